"""Command-line front end: condition, solve, oracle, verify, amplify.

Exit codes: 0 success or verification pass, 1 verification failure or an
out-of-promise/oracle disagreement flag, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import replace

import numpy as np

from . import amplification
from .certificates import certificate_from_outcome, verify
from .conditioning import BinSelectionError, condition
from .io import (
    FormatError,
    RawQ,
    decode_certificate,
    dumps,
    encode_certificate,
    encode_conditioned,
    encode_oracle,
    load_json,
    matrix_digest,
    parse_instance,
)
from .linalg import NotHermitianError, SingularOperatorError
from .mmw import DEFAULT_STEP, Decision, PrecisionError, derive_params, practical_params, solve, write_trace_csv
from .oracle import reference_mu
from .quantum import InteractiveMeasurement, VerifierInstance

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_instance(path: str):
    try:
        return parse_instance(load_json(path))
    except (FormatError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _operator(inst, gamma=None, epsilon=None):
    """Return (InteractiveMeasurement, gamma, epsilon, raw matrix, info) for any instance form."""
    if isinstance(inst, VerifierInstance):
        cond = condition(inst.psi, inst.pi, inst.p)
        info = {"k": cond.k, "selected_bin": cond.selected_bin, "n": cond.n}
        return cond.q, gamma or cond.gamma, epsilon or cond.epsilon, cond.q.q, info
    if gamma is None or epsilon is None:
        gamma = gamma if gamma is not None else inst.gamma
        epsilon = epsilon if epsilon is not None else inst.epsilon
    if gamma is None or epsilon is None:
        raise UsageError("gamma and epsilon must be given in the instance or on the command line")
    try:
        q = InteractiveMeasurement.from_matrix(inst.q, inst.dim_y, inst.dim_x)
    except SingularOperatorError as exc:
        raise UsageError(f"Q must be invertible: {exc}") from exc
    return q, float(gamma), float(epsilon), inst.q, {}


def _parse_override(text: str | None):
    if not text:
        return None
    out = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in {"T", "t_max", "delta", "eta", "step"}:
            raise UsageError(f"unknown override {key!r}; use T, delta, eta or step")
        out["t_max" if key == "T" else key] = float(value)
    return out


def _params(q, gamma, epsilon, override):
    params = derive_params(q, gamma, epsilon)
    if override is None:
        return params
    # A shortened run without an explicit eta gets the rescaled step.
    if "step" in override or ("t_max" in override and "eta" not in override):
        t_max = int(override.get("t_max", params.t_max))
        params = practical_params(q, gamma, epsilon, t_max, override.get("step", DEFAULT_STEP))
    fields = {k: v for k, v in override.items() if k != "step"}
    if "t_max" in fields:
        fields["t_max"] = int(fields["t_max"])
    return replace(params, **fields)


def cmd_condition(args) -> int:
    inst = _load_instance(args.instance)
    if not isinstance(inst, VerifierInstance):
        raise UsageError("condition needs a circuit or psi/pi instance")
    cond = condition(inst.psi, inst.pi, inst.p)
    _emit(dumps(encode_conditioned(cond)), args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    inst = _load_instance(args.instance)
    q, gamma, epsilon, raw, info = _operator(inst, args.gamma, args.epsilon)
    params = _params(q, gamma, epsilon, _parse_override(args.params_override))
    t1 = time.perf_counter()
    try:
        outcome = solve(q, gamma, epsilon, params)
    except PrecisionError as exc:
        print(f"precision monitor: {exc}", file=sys.stderr)
        return EXIT_FAIL
    t2 = time.perf_counter()
    cert = certificate_from_outcome(q, outcome)
    report = verify(cert, q, gamma, epsilon)
    t3 = time.perf_counter()
    if args.trace:
        write_trace_csv(outcome.trace, args.trace)
    if args.certificate:
        _emit(dumps(encode_certificate(cert, gamma, epsilon, matrix_digest(raw))), args.certificate)

    doc = {
        "instance": {"dim_y": q.dim_y, "dim_x": q.dim_x, "kappa": q.kappa, "gamma": gamma,
                     "epsilon": epsilon, **info},
        "params": {"delta": params.delta, "t_max": params.t_max, "eta": params.eta},
        "decision": outcome.decision.value,
        "iterations": outcome.iterations,
        "certificate": {"kind": cert.kind, "claimed_trace": cert.claimed_trace,
                        "verified": report.passed, "violations": report.violations},
    }
    status = EXIT_OK if report.passed else EXIT_FAIL
    if args.oracle:
        res = reference_mu(q.q, q.dims, tol=args.tol, seed=args.seed)
        yes, no = res.lower >= (1 + 4 * epsilon) * gamma, res.upper <= (1 - 4 * epsilon) * gamma
        agrees = (outcome.decision is Decision.ACCEPT and res.upper >= gamma) or \
                 (outcome.decision is Decision.REJECT and res.lower <= gamma)
        doc["oracle"] = {**encode_oracle(res, witnesses=False), "in_promise": yes or no, "agrees": agrees}
        if not (yes or no) or not agrees:
            status = EXIT_FAIL
    doc["digest"] = hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()
    doc["timings"] = {"setup_s": t1 - t0, "solve_s": t2 - t1, "certificate_s": t3 - t2}
    _emit(dumps(doc), args.output)
    return status


def cmd_oracle(args) -> int:
    inst = _load_instance(args.instance)
    if isinstance(inst, RawQ):
        q, dims = inst.q, (inst.dim_y, inst.dim_x)
    else:
        from .quantum import build_q
        q, dims = build_q(inst.psi, inst.pi), (inst.pi.dim_y, inst.psi.dim_x)
    try:
        res = reference_mu(q, dims, tol=args.tol, iter_budget=args.budget, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(dumps(encode_oracle(res)), args.output)
    return EXIT_OK if res.converged else EXIT_FAIL


def cmd_verify(args) -> int:
    try:
        data = load_json(args.certificate)
        cert = decode_certificate(data)
    except (FormatError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.certificate}: {exc}") from exc
    inst = _load_instance(args.instance)
    gamma = data.get("gamma")
    epsilon = data.get("epsilon")
    q, gamma, epsilon, raw, _ = _operator(inst, gamma, epsilon)
    digest = data.get("instance_sha256")
    if digest is not None and digest != matrix_digest(raw):
        raise UsageError("certificate was issued for a different instance")
    side = q.q.shape[0] if cert.kind == "primal" else q.dim_x
    mat = cert.x if cert.kind == "primal" else cert.y
    if np.asarray(mat).shape != (side, side):
        raise UsageError(f"certificate shape {np.asarray(mat).shape} does not fit the instance")
    report = verify(cert, q, gamma, epsilon)
    _emit(dumps({"kind": cert.kind, "passed": report.passed, "violations": report.violations,
                 "values": report.values}), args.output)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_amplify(args) -> int:
    try:
        params = amplification.derive_params(args.r, args.q, args.a, args.b)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    doc = {
        "params": params.to_dict(),
        "chernoff_row_bound": amplification.chernoff_row_bound(params),
        "completeness_bound": amplification.completeness_bound(params),
        "soundness_bound": amplification.soundness_bound(params),
        "two_to_minus_r": 2.0 ** -params.r,
    }
    if args.trials:
        mc = amplification.simulate_completeness(params, args.trials, args.seed)
        doc["monte_carlo"] = {"trials": mc.trials, "failures": mc.failures, "rate": mc.rate,
                              "slack": mc.slack, "seed": mc.seed}
    _emit(dumps(doc), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qipmmw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("condition", help="build a well-conditioned Q from a verifier instance")
    p.add_argument("instance")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_condition)

    p = sub.add_parser("solve", help="run the multiplicative weights test and certify the answer")
    p.add_argument("instance")
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--params-override", help="comma list of T=, delta=, eta=, step=; T alone also rescales eta to the default step")
    p.add_argument("--trace", help="CSV path for the per-iteration trace")
    p.add_argument("--certificate", help="path for the certificate JSON")
    p.add_argument("--oracle", action="store_true", help="cross-check against the reference oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="bracket mu(Q) for a small instance")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--budget", type=int, default=20000)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="check a certificate against an instance")
    p.add_argument("certificate")
    p.add_argument("instance")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("amplify", help="error-reduction parameters, bounds and Monte Carlo")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_amplify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, BinSelectionError, NotHermitianError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
