"""Conditioning guarantees and the mu(R) / mu(Q) sandwich on random verifiers.

    python3 scripts/conditioning_sweep.py --count 20 --out conditioning.csv
"""
import argparse
import math
import sys

import numpy as np

from common import random_measurement, random_state, write_rows
from qipmmw.conditioning import condition, sandwich_check, uniform_state
from qipmmw.oracle import reference_mu


def oracle(q, dims):
    return reference_mu(q, dims, tol=1e-6)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--p", type=lambda t: [int(x) for x in t.split(",")], default=[1, 2])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    for i in range(args.count):
        p = args.p[i % len(args.p)]
        d = 2**p
        psi = random_state(rng, d, d)
        pi = random_measurement(rng, d, d, rank=int(rng.integers(0, d * d + 1)))
        inst = condition(psi, pi, p)
        k, n = inst.k, inst.n
        w = np.linalg.eigvalsh(inst.q.q)
        overlap = abs(np.vdot(uniform_state(psi, inst.schmidt, inst.selected_indices).amplitudes, psi.amplitudes))
        sand = sandwich_check(psi, pi, p, oracle)
        rows.append({
            "index": i, "p": p, "k": k, "bin": inst.selected_bin, "sigma": n,
            "kappa": inst.q.kappa, "kappa_ok": inst.q.kappa <= 64 * k * (1 + 1e-9),
            "lambda_min_ok": w[0] >= 1 / (64 * k * n) - 1e-12, "lambda_max_ok": w[-1] <= 1 / n + 1e-12,
            "overlap": overlap, "overlap_ok": overlap >= 1 / math.sqrt(4 * k) - 1e-12,
            "sigma_ok": n >= 2**inst.selected_bin / (4 * k),
            "mu_r": sum(sand.mu_r) / 2, "mu_q": sum(sand.mu_q) / 2,
            "sandwich_lower": sand.lower_bound, "sandwich_upper": sand.upper_bound, "sandwich_ok": sand.holds,
        })
    write_rows(rows, args.out)
    bad = sum(not all(v for key, v in r.items() if key.endswith("_ok")) for r in rows)
    print(f"# {len(rows)} instances, {bad} with a failed check", file=sys.stderr)


if __name__ == "__main__":
    main()
