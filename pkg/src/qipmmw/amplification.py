"""Error reduction by threshold voting over parallel repetitions.

Run ``s * t`` executions, set ``z_i = 1`` when row ``i`` has at least
``t (a + b) / 2`` accepting outcomes, and accept iff every ``z_i = 1``.
With ``s = 2rq`` and ``t = 8rq^2 s`` both error probabilities drop below
``2^-r``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class AmplificationParams:
    r: int
    q: int
    a: float
    b: float
    s: int
    t: int
    threshold: float

    def to_dict(self) -> dict:
        return asdict(self)


def derive_params(r: int, q: int, a: float, b: float) -> AmplificationParams:
    if r < 1 or q < 1:
        raise ValueError("r and q must be positive integers")
    if not (0 <= b <= a <= 1):
        raise ValueError(f"need 0 <= b <= a <= 1, got a={a}, b={b}")
    # Exact rational comparison so that a - b == 1/q is accepted.
    if Fraction(a).limit_denominator(10**12) - Fraction(b).limit_denominator(10**12) < Fraction(1, q):
        raise ValueError(f"gap a - b = {a - b} is below 1/q = {1 / q}")
    s = 2 * r * q
    t = 8 * r * q * q * s
    return AmplificationParams(r, q, a, b, s, t, t * (a + b) / 2)


def decision(y, params: AmplificationParams) -> bool:
    """Accept iff every row of the ``s x t`` outcome matrix reaches the threshold."""
    y = np.asarray(y)
    if y.shape != (params.s, params.t):
        raise ValueError(f"outcome matrix must be {params.s}x{params.t}, got {y.shape}")
    return bool(np.all(y.sum(axis=1) >= params.threshold))


def chernoff_row_bound(params: AmplificationParams) -> float:
    """``exp(-t (a - b)^2 / (8a))``, the bound on ``Pr[z_i = 0]`` for an honest prover."""
    return math.exp(-params.t * (params.a - params.b) ** 2 / (8 * params.a))


def completeness_bound(params: AmplificationParams) -> float:
    """``s e^{-rs}``; checked to be below ``2^-r``."""
    bound = params.s * math.exp(-params.r * params.s)
    if not bound < 2.0 ** -params.r:
        raise ArithmeticError(f"s e^(-rs) = {bound} is not below 2^-r")
    return bound


def soundness_bound(params: AmplificationParams) -> float:
    """``(1 - 1/(2q))^s``; checked to be below ``exp(-s/(2q))`` and ``2^-r``."""
    bound = (1 - 1 / (2 * params.q)) ** params.s
    if not (bound < math.exp(-params.s / (2 * params.q)) and bound < 2.0 ** -params.r):
        raise ArithmeticError(f"(1 - 1/(2q))^s = {bound} violates the chain")
    return bound


@dataclass(frozen=True)
class MonteCarloResult:
    trials: int
    success_prob: float
    failures: int
    rate: float
    bound: float
    slack: float
    seed: int


def simulate_completeness(params: AmplificationParams, trials: int, seed: int = 0,
                          success_prob: float | None = None, batch: int = 64) -> MonteCarloResult:
    """Honest-prover rejection frequency with i.i.d. Bernoulli outcomes.

    Each execution accepts with probability ``success_prob`` (default ``a``).
    The Chernoff bound is asserted only when ``success_prob >= a``; below
    that the instance is outside the promise and the rate is just reported.
    Trials are drawn in batches from one seeded generator, so the result
    depends only on the arguments.
    """
    prob = params.a if success_prob is None else success_prob
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    failures = 0
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        y = rng.random((n, params.s, params.t)) < prob
        rows_ok = y.sum(axis=2) >= params.threshold
        failures += int(np.count_nonzero(~rows_ok.all(axis=1)))
        done += n
    bound = completeness_bound(params)
    slack = 3 * math.sqrt(bound * (1 - bound) / trials)
    rate = failures / trials
    if prob >= params.a and rate > bound + slack:
        raise AssertionError(f"empirical rejection rate {rate} exceeds {bound} + 3 sigma")
    return MonteCarloResult(trials, prob, failures, rate, bound, slack, seed)
