"""Sweep the exponent step and iteration budget of the practical parameters.

Each (step, T) cell runs the same random instances on both sides of the
promise gap and counts wrong decisions and certificates that fail to verify.

    python3 scripts/step_sweep.py --steps 0.3,2,8 --t-max 300,1000 --count 12
"""
import argparse
import sys
import time

import numpy as np

from common import random_q, write_rows
from qipmmw.certificates import certificate_from_outcome, verify
from qipmmw.mmw import Decision, practical_params, solve
from qipmmw.quantum import InteractiveMeasurement


def floats(text):
    return [float(x) for x in text.split(",")]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--steps", type=floats, default=[0.3, 2.0, 8.0])
    ap.add_argument("--t-max", type=lambda t: [int(x) for x in t.split(",")], default=[300, 1000])
    ap.add_argument("--count", type=int, default=12)
    ap.add_argument("--epsilon", type=float, default=1 / 12)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    eps = args.epsilon
    rng = np.random.default_rng(args.seed)
    cases = []
    for _ in range(args.count):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        if m * n == 1:
            m = 2
        mu = float(rng.uniform(0.2, 0.5))
        q = InteractiveMeasurement.from_matrix(random_q(rng, m, n, kappa=float(rng.uniform(2, 16)), target_mu=mu),
                                               m, n)
        cases.append((q, mu / (1 + 5 * eps), Decision.ACCEPT))
        cases.append((q, min(mu / (1 - 5 * eps), 0.99), Decision.REJECT))

    rows = []
    for step in args.steps:
        for t_max in args.t_max:
            wrong = invalid = 0
            worst_dual = np.inf
            start = time.perf_counter()
            for q, gamma, expected in cases:
                out = solve(q, gamma, eps, practical_params(q, gamma, eps, t_max, step))
                wrong += out.decision is not expected
                rep = verify(certificate_from_outcome(q, out), q, gamma, eps)
                invalid += not rep.passed
                if out.decision is Decision.REJECT:
                    worst_dual = min(worst_dual, rep.values["phi_star_lambda_min"])
            rows.append({"step": step, "t_max": t_max, "runs": len(cases), "wrong": wrong,
                         "invalid_certificates": invalid, "min_phi_star_lambda": worst_dual,
                         "seconds": round(time.perf_counter() - start, 2)})
            print(f"# step={step} T={t_max}: wrong {wrong}, invalid {invalid}", file=sys.stderr)
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
