"""Error-reduction parameters, analytic bounds, and Monte Carlo completeness.

    python3 scripts/amplification_mc.py --r 2 --q 3 --a 0.6667 --b 0.3333 --trials 1000
"""
import argparse
import sys

from common import write_rows
from qipmmw import amplification as amp


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--r", type=int, default=2)
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--a", type=float, default=2 / 3)
    ap.add_argument("--b", type=float, default=1 / 3)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--probs", type=lambda t: [float(x) for x in t.split(",")], default=None,
                    help="per-execution accept probabilities to simulate (default: a and the midpoint)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    params = amp.derive_params(args.r, args.q, args.a, args.b)
    print(f"# s={params.s} t={params.t} threshold={params.threshold} "
          f"completeness<={amp.completeness_bound(params):.3e} soundness<={amp.soundness_bound(params):.3e}",
          file=sys.stderr)
    probs = args.probs or [args.a, (args.a + args.b) / 2]
    rows = []
    for prob in probs:
        res = amp.simulate_completeness(params, args.trials, seed=args.seed, success_prob=prob)
        rows.append({"r": params.r, "q": params.q, "s": params.s, "t": params.t, "success_prob": prob,
                     "trials": res.trials, "rejections": res.failures, "rate": res.rate, "bound": res.bound})
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
