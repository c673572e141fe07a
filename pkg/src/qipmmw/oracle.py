"""Reference values of mu(Q) for small instances.

Two independent bounds bracket ``mu(Q) = max <Q, J>`` over Choi matrices of
channels:

* ``lower`` comes from monotone ascent over Stinespring isometries.  The
  objective is a convex quadratic in the isometry, so replacing the isometry
  by the polar factor of the gradient never decreases it.  Several random
  starts are tried.
* ``upper`` comes from ``min Tr(Y)`` subject to ``1_Y (x) Y >= Q``, solved by
  a quadratic exterior penalty on the negative eigenvalues of ``1 (x) Y - Q``
  (gradient assembled from eigenvectors, minimized with L-BFGS) followed by
  the shift ``Y <- Y + max(0, -lambda_min) 1`` that restores feasibility.

Both bounds come with the witness that certifies them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import linalg as la
from .quantum import ChoiMatrix, MeasurementOperator, PureState, build_q

MAX_SIDE = 64
PENALTY_LADDER = tuple(10.0**e for e in range(2, 13))


@dataclass
class OracleResult:
    lower: float
    upper: float
    choi: np.ndarray = field(repr=False)
    dual: np.ndarray = field(repr=False)
    converged: bool
    seed: int
    restarts: int
    iterations: int

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    @property
    def estimate(self) -> float:
        return 0.5 * (self.lower + self.upper)


def _hermitian_coords(n: int):
    iu = np.triu_indices(n, 1)

    def unpack(z: np.ndarray) -> np.ndarray:
        y = np.zeros((n, n), dtype=complex)
        y[np.diag_indices(n)] = z[:n]
        y[iu] = z[n:n + len(iu[0])] + 1j * z[n + len(iu[0]):]
        return y + np.triu(y, 1).conj().T

    def pack(g: np.ndarray) -> np.ndarray:
        # Gradient of Re Tr(G dY) in the real coordinates used by unpack.
        return np.concatenate([np.real(np.diag(g)), 2 * np.real(g[iu]), 2 * np.imag(g[iu])])

    return unpack, pack


def dual_upper(q: np.ndarray, dims: tuple[int, int]) -> tuple[float, np.ndarray]:
    """Feasible ``Y`` (``1 (x) Y >= Q``) of near-minimal trace."""
    m, n = dims
    unpack, pack = _hermitian_coords(n)
    eye_m = np.eye(m)
    z = np.zeros(n * n)
    z[:n] = la.spectral_norm(q)
    for c in PENALTY_LADDER:
        def objective(z, c=c):
            y = unpack(z)
            w, u = np.linalg.eigh(np.kron(eye_m, y) - q)
            neg = np.minimum(w, 0.0)
            val = float(np.real(np.trace(y))) + 0.5 * c * float(neg @ neg)
            grad = np.eye(n) + c * la.partial_trace((u * neg) @ u.conj().T, dims, "A")
            return val, pack(grad)

        z = minimize(objective, z, jac=True, method="L-BFGS-B",
                     options=dict(maxiter=5000, maxcor=30, gtol=1e-13, ftol=1e-17)).x
    y = unpack(z)
    shift = max(0.0, -la.lambda_min(np.kron(eye_m, y) - q))
    # A hair of extra shift absorbs the round-off of the final eigenvalue check.
    y = y + (shift + 1e-14 * max(1.0, la.spectral_norm(q))) * np.eye(n)
    return float(np.real(np.trace(y))), y


def _stinespring_ascent(q: np.ndarray, dims: tuple[int, int], rng: np.random.Generator,
                        max_iter: int, stall_tol: float = 1e-15) -> tuple[float, np.ndarray, int]:
    m, n = dims
    r = m * n
    g = rng.standard_normal((r * m, n)) + 1j * rng.standard_normal((r * m, n))
    v, _ = np.linalg.qr(g)
    best, best_v = -np.inf, v
    stall = 0
    it = 0
    for it in range(1, max_iter + 1):
        cols = v.reshape(r, m * n).T
        qcols = q @ cols
        val = float(np.real(np.vdot(cols, qcols)))
        if val > best + stall_tol:
            best, best_v, stall = val, v, 0
        else:
            stall += 1
            if stall >= 20:
                break
        u, _, vh = np.linalg.svd(qcols.T.reshape(r * m, n), full_matrices=False)
        v = u @ vh
    cols = best_v.reshape(r, m * n).T
    return best, cols @ cols.conj().T, it


def reference_mu(q, dims: tuple[int, int], tol: float = 1e-6, iter_budget: int = 20000,
                 seed: int = 0, restarts: int = 8) -> OracleResult:
    """Bracket ``mu(Q)`` between a primal and a dual feasible value.

    ``q`` need not be invertible.  Restarts stop early once the gap is at
    most ``tol``; ``converged`` is False if the budget ran out first.
    """
    q = la.hermitize(q)
    m, n = dims
    if q.shape[0] != m * n:
        raise ValueError(f"operator side {q.shape[0]} != {m} * {n}")
    if m * n > MAX_SIDE:
        raise ValueError(f"N*M = {m * n} exceeds the oracle limit {MAX_SIDE}")
    upper, y = dual_upper(q, dims)
    rng = np.random.default_rng(seed)
    lower, choi, used, tried = -np.inf, None, 0, 0
    per_restart = max(1, iter_budget // restarts)
    while tried < restarts and used < iter_budget:
        val, j, it = _stinespring_ascent(q, dims, rng, min(per_restart, iter_budget - used))
        used += it
        tried += 1
        if val > lower:
            lower, choi = val, j
        if upper - lower <= tol:
            break
    return OracleResult(lower, upper, choi, y, upper - lower <= tol, seed, tried, used)


def check_witnesses(res: OracleResult, q, dims: tuple[int, int], tol: float = 1e-8) -> bool:
    """Weak-duality witnesses: Choi PSD with ``Tr_Y J <= 1``, ``1 (x) Y - Q >= 0``."""
    m, n = dims
    j = ChoiMatrix(res.choi, m, n)
    ok_primal = j.is_psd(tol) and la.lambda_max(j.reduced_x() - np.eye(n)) <= tol
    ok_value = abs(float(np.real(la.inner(q, res.choi))) - res.lower) <= tol
    ok_dual = la.lambda_min(np.kron(np.eye(m), res.dual) - q) >= -tol
    return ok_primal and ok_value and ok_dual


def mu_of_raw_instance(psi: PureState, pi: MeasurementOperator, **kwargs) -> OracleResult:
    """``mu(R)`` for the raw (possibly singular) operator of a verifier."""
    return reference_mu(build_q(psi, pi), (pi.dim_y, psi.dim_x), **kwargs)
