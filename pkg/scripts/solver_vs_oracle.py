"""Solver decisions and certificates against the reference oracle on random Q.

    python3 scripts/solver_vs_oracle.py --count 20 --t-max 2000 --out solver.csv
"""
import argparse
import sys
import time

import numpy as np

from common import random_q, write_rows
from qipmmw.certificates import certificate_from_outcome, verify
from qipmmw.mmw import DEFAULT_STEP, Decision, practical_params, solve
from qipmmw.oracle import reference_mu
from qipmmw.quantum import InteractiveMeasurement


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--t-max", type=int, default=2000)
    ap.add_argument("--step", type=float, default=DEFAULT_STEP)
    ap.add_argument("--epsilon", type=float, default=1 / 12)
    ap.add_argument("--max-dim", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    eps = args.epsilon
    rows = []
    for i in range(args.count):
        m, n = int(rng.integers(1, args.max_dim + 1)), int(rng.integers(1, args.max_dim + 1))
        if m * n == 1:
            m = 2
        kappa = float(rng.uniform(2, 16))
        q = InteractiveMeasurement.from_matrix(
            random_q(rng, m, n, kappa=kappa, target_mu=float(rng.uniform(0.15, 0.55))), m, n)
        mu = reference_mu(q.q, q.dims, tol=1e-8)
        # Alternate sides, placing gamma just outside the promise gap.
        yes = i % 2 == 0
        gamma = mu.estimate / (1 + 5 * eps) if yes else mu.estimate / (1 - 5 * eps)
        start = time.perf_counter()
        out = solve(q, gamma, eps, practical_params(q, gamma, eps, args.t_max, args.step))
        elapsed = time.perf_counter() - start
        cert = certificate_from_outcome(q, out)
        rep = verify(cert, q, gamma, eps)
        expected = Decision.ACCEPT if yes else Decision.REJECT
        rows.append({
            "index": i, "dim_y": m, "dim_x": n, "kappa": q.kappa,
            "mu_lower": mu.lower, "mu_upper": mu.upper, "gamma": gamma,
            "expected": expected.value, "decision": out.decision.value,
            "iterations": out.iterations, "certificate": "primal" if out.decision is Decision.ACCEPT else "dual",
            "claimed_trace": cert.claimed_trace, "verified": rep.passed,
            "violations": ";".join(rep.violations), "seconds": round(elapsed, 3),
        })
    write_rows(rows, args.out)
    wrong = sum(r["decision"] != r["expected"] for r in rows)
    invalid = sum(not r["verified"] for r in rows)
    print(f"# {len(rows)} runs, {wrong} wrong decisions, {invalid} invalid certificates", file=sys.stderr)


if __name__ == "__main__":
    main()
