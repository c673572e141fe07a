"""Matrix multiplicative weights test of ``mu(Q) >= gamma``.

Each round decomposes ``Phi(rho_t)``, collects the eigenvectors whose
eigenvalues exceed ``1/gamma``, and either accepts (their mass ``s`` is at
most ``delta ||Q^{-1}||``) or adds the normalized projector ``Y_t`` to the
running sum and re-weights ``rho`` through
``exp(-eta delta Phi*(Y_0 + ... + Y_t))``.  After ``t_max`` rounds without
acceptance it rejects.  The accept state and the list of ``Y_t`` are kept so
that primal and dual certificates can be built from the run.
"""

from __future__ import annotations

import csv
import decimal
import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import linalg as la
from .quantum import InteractiveMeasurement, phi, phi_star


class PrecisionError(RuntimeError):
    """The pairing <rho_t, Phi*(Y_t)> fell below 1 - (eps gamma / 2)^2 / 12."""


class Decision(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class SolverParams:
    delta: float
    t_max: int
    eta: float
    exp_tol: float = 1e-12
    eig_tol: float = 1e-10


@dataclass(frozen=True)
class IterationRecord:
    t: int
    s: float
    trace_w: float
    pairing: float = math.nan
    trace_y: float = math.nan
    step_norm: float = math.nan
    # Tr(W_{t+1}) / Tr(W_t); NaN on the accepting round.
    decay: float = math.nan
    # Number of identical rounds this record stands for (see ``solve``).
    repeats: int = 1
    # ln Tr(W_t); trace_w itself underflows on long runs.
    log_trace_w: float = math.nan


@dataclass
class AcceptWitness:
    rho: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    big_set: np.ndarray
    s: float


@dataclass
class SolverOutcome:
    decision: Decision
    params: SolverParams
    gamma: float
    epsilon: float
    accept: AcceptWitness | None = None
    y_list: list[np.ndarray] = field(default_factory=list, repr=False)
    trace: list[IterationRecord] = field(default_factory=list, repr=False)

    @property
    def iterations(self) -> int:
        return sum(r.repeats for r in self.trace)

    def y_weights(self) -> list[int]:
        """Multiplicity of each entry of ``y_list`` in the full sequence ``Y_0 .. Y_{T-1}``."""
        return [r.repeats for r in self.trace if not math.isnan(r.pairing)]


def _check_unit_interval(name: str, value: float, closed: bool = False) -> None:
    if not (0.0 < value < 1.0 or (closed and value == 1.0)):
        raise ValueError(f"{name} must lie in (0, 1{']' if closed else ')'}, got {value}")


def _rational(x: float) -> Fraction:
    # Thresholds are meant as rationals; recover e.g. 1/12 from its float.
    return Fraction(x).limit_denominator(10**12)


def exact_t_max(nm: int, gamma: float, epsilon: float, kappa: float) -> int:
    """``ceil(24 ln(NM) / (eps^3 gamma^3 delta))`` without float rounding in the ceiling."""
    eps, gam = _rational(epsilon), _rational(gamma)
    denom = eps**5 * gam**3 / (8 * Fraction(kappa) ** 2)
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        val = 24 * decimal.Decimal(int(nm)).ln() * denom.denominator / denom.numerator
        return int(val.to_integral_value(rounding=decimal.ROUND_CEILING))


def derive_params(q: InteractiveMeasurement, gamma: float, epsilon: float) -> SolverParams:
    """Parameters of the unmodified algorithm.

    ``delta = eps^2 / (8 kappa^2)``, ``t_max = ceil(24 ln(NM) / (eps^3 gamma^3 delta))``
    and ``eta = eps gamma / 2``.  ``epsilon = 1`` is accepted here for
    plugging in formulas; ``solve`` requires ``epsilon < 1``.
    """
    _check_unit_interval("gamma", gamma)
    _check_unit_interval("epsilon", epsilon, closed=True)
    if not math.isfinite(q.kappa):
        raise la.SingularOperatorError("condition number unavailable")
    delta = float(_rational(epsilon) ** 2 / (8 * Fraction(q.kappa) ** 2))
    t_max = exact_t_max(q.dim_x * q.dim_y, gamma, epsilon, q.kappa)
    return SolverParams(
        delta=delta,
        t_max=t_max,
        eta=epsilon * gamma / 2,
        eig_tol=delta / (4 * q.dim_x * q.inv_spectral_norm),
    )


DEFAULT_STEP = 8.0


def practical_params(q: InteractiveMeasurement, gamma: float, epsilon: float, t_max: int,
                     step: float = DEFAULT_STEP) -> SolverParams:
    """Derived ``delta`` with a larger exponent scale for short runs.

    Every ``Phi*(Y_t)`` has norm below ``gamma ||Q^{-1}||`` (since ``s > 1/gamma``),
    so ``eta`` is chosen to make ``eta * delta * gamma * ||Q^{-1}|| = step``.
    The accept threshold and both certificates are unchanged; only how fast
    ``rho`` moves toward the violated directions differs.
    """
    base = derive_params(q, gamma, epsilon)
    eta = step / (base.delta * gamma * q.inv_spectral_norm)
    return replace(base, t_max=int(t_max), eta=max(eta, base.eta))


def pairing_value(q: InteractiveMeasurement, rho, y) -> float:
    """``<rho, Phi*(Y)>``."""
    return float(np.real(la.inner(rho, phi_star(q, y))))


def solve(q: InteractiveMeasurement, gamma: float, epsilon: float,
          params_override: SolverParams | None = None, fast_forward: bool = True) -> SolverOutcome:
    """Run the test.  ``params_override`` replaces the derived parameters.

    When ``Phi*(Y_t)`` is a multiple of the identity, ``rho_{t+1} = rho_t`` and
    every later round repeats round ``t`` exactly.  With ``fast_forward`` the
    remaining rounds are then folded into one record with ``repeats > 1``
    instead of being recomputed.
    """
    params = params_override or derive_params(q, gamma, epsilon)
    _check_unit_interval("gamma", gamma)
    _check_unit_interval("epsilon", epsilon)
    n, m = q.dim_x, q.dim_y
    nm = n * m
    threshold = params.delta * q.inv_spectral_norm
    # Precision floor on the pairing; tied to eps*gamma/2 whatever the step scale.
    pairing_floor = 1.0 - (epsilon * gamma / 2) ** 2 / 12
    scale = params.eta * params.delta

    rho = np.eye(nm, dtype=complex) / nm
    log_trace_w = math.log(nm)
    y_sum = np.zeros((n, n), dtype=complex)
    outcome = SolverOutcome(Decision.REJECT, params, gamma, epsilon)

    t = 0
    while t < params.t_max:
        eig = la.herm_eig(phi(q, rho), tol=max(params.eig_tol, 1e-13))
        lam, vecs = eig.eigenvalues, eig.unitary
        big = gamma * lam > 1.0
        s = float(lam[big].sum())
        trace_w = math.exp(log_trace_w)
        if s <= threshold:
            outcome.decision = Decision.ACCEPT
            outcome.accept = AcceptWitness(rho, lam, vecs, np.flatnonzero(big), s)
            outcome.trace.append(IterationRecord(t, s, trace_w, log_trace_w=log_trace_w))
            return outcome

        xs = vecs[:, big]
        y_t = xs @ xs.conj().T / s
        y_t = 0.5 * (y_t + y_t.conj().T)
        step_op = phi_star(q, y_t)
        pairing = float(np.real(la.inner(rho, step_op)))
        if not pairing >= pairing_floor:
            raise PrecisionError(f"pairing {pairing:.12f} < {pairing_floor:.12f} at t={t}")
        outcome.y_list.append(y_t)
        y_sum += y_t

        c_step = float(np.real(np.trace(step_op))) / nm
        if fast_forward and la.spectral_norm(step_op - c_step * np.eye(nm)) <= 1e-13 * abs(c_step):
            repeats = params.t_max - t
            outcome.trace.append(IterationRecord(
                t=t, s=s, trace_w=trace_w, pairing=pairing,
                trace_y=float(np.real(np.trace(y_t))),
                step_norm=params.delta * la.spectral_norm(step_op),
                decay=math.exp(-params.eta * params.delta * c_step),
                repeats=repeats, log_trace_w=log_trace_w,
            ))
            return outcome

        arg = scale * phi_star(q, y_sum)
        # exp(-A) = exp(-c) exp(-(A - c)) with c = lambda_min(A) >= 0: the shifted
        # exponential has spectrum in (0, 1] and ||A - c|| <= ||A|| <= eta * (t + 1).
        c = max(0.0, la.lambda_min(arg))
        w = la.expm_hermitian(-(arg - c * np.eye(nm)), norm_bound=params.eta * (t + 1) * (1 + 1e-9) + 1e-12,
                              tol=params.exp_tol)
        tr = float(np.real(np.trace(w)))
        if not (math.isfinite(tr) and tr > 0):
            raise FloatingPointError(f"non-finite weight trace at t={t}")
        new_log = math.log(tr) - c
        outcome.trace.append(IterationRecord(
            t=t, s=s, trace_w=trace_w, pairing=pairing,
            trace_y=float(np.real(np.trace(y_t))),
            step_norm=params.delta * la.spectral_norm(step_op),
            decay=math.exp(new_log - log_trace_w), log_trace_w=log_trace_w,
        ))
        log_trace_w = new_log
        rho = w / tr
        t += 1

    return outcome


def format_exp(log_value: float) -> str:
    """Decimal string for ``exp(log_value)`` that stays exact below the double range."""
    if math.isnan(log_value):
        return "nan"
    if -700.0 < log_value < 700.0:
        return repr(math.exp(log_value))
    e10 = log_value / math.log(10)
    exponent = math.floor(e10)
    mantissa = 10 ** (e10 - exponent)
    return f"{mantissa:.16f}e{exponent:+d}"


def write_trace_csv(records: Iterable[IterationRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "s", "trace_w", "pairing"])
        for r in records:
            pairing = "" if math.isnan(r.pairing) else repr(r.pairing)
            log_w = r.log_trace_w if not math.isnan(r.log_trace_w) else math.log(r.trace_w)
            writer.writerow([r.t, repr(r.s), format_exp(log_w), pairing])
            if r.repeats > 1:
                # A fast-forwarded tail: the same round repeated up to t_max - 1.
                tail = log_w + (r.repeats - 1) * math.log(r.decay)
                writer.writerow([r.t + r.repeats - 1, repr(r.s), format_exp(tail), pairing])
