"""Primal and dual certificates for the normalized SDP.

Primal: ``X >= 0`` with ``Phi(X) <= 1``; ``Tr(X)`` lower-bounds ``mu(Q)``.
Dual: ``Y >= 0`` with ``Phi*(Y) >= 1``; ``Tr(Y)`` upper-bounds ``mu(Q)``.
Verification recomputes everything from the instance and the matrix alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la
from .mmw import AcceptWitness, SolverOutcome, Decision
from .quantum import InteractiveMeasurement, phi, phi_star

PSD_TOL = 1e-9
FEASIBILITY_TOL = 1e-8
HERMITIAN_TOL = 1e-9
TRACE_CLAIM_TOL = 1e-9
UHLMANN_TRACE_TOL = 1e-8
UHLMANN_FIDELITY_TOL = 1e-7


class UhlmannError(RuntimeError):
    pass


class CertificateError(RuntimeError):
    pass


@dataclass
class PrimalCertificate:
    x: np.ndarray = field(repr=False)
    claimed_trace: float
    kind: str = "primal"


@dataclass
class DualCertificate:
    y: np.ndarray = field(repr=False)
    claimed_trace: float
    kind: str = "dual"


@dataclass
class VerificationReport:
    passed: bool
    violations: list[str]
    values: dict[str, float]

    def __bool__(self) -> bool:
        return self.passed


def uhlmann_extend(r0, p1, dims: tuple[int, int]) -> np.ndarray:
    """Extension ``R1`` of ``P1`` with ``Tr_Y(R1) = P1`` and ``F(R0, R1) = F(Tr_Y R0, P1)``.

    ``r0`` acts on ``Y (x) X`` with ``dims = (dim_y, dim_x)``.  A purification
    of ``R0`` on ``Y (x) X (x) W`` (``W = C^{NM}``) is written as
    ``vec(sqrt(P0) U*)`` for an isometry ``U``; the extension is the reduced
    state of ``vec(sqrt(P1) V U*)`` where ``V`` is the polar unitary making
    ``sqrt(P0) sqrt(P1) V`` positive semidefinite.
    """
    m, n = dims
    r0 = la.hermitize(r0)
    p1 = la.hermitize(p1)
    if r0.shape[0] != m * n or p1.shape != (n, n):
        raise ValueError(f"shape mismatch: r0 {r0.shape}, p1 {p1.shape}, dims {dims}")
    w, e = np.linalg.eigh(r0)
    w = np.clip(w, 0.0, None)
    # u0[y, x, k] = sqrt(w_k) e_k[y, x]; G has rows x and columns (y, k).
    u0 = (e * np.sqrt(w)).reshape(m, n, m * n)
    g = u0.transpose(1, 0, 2).reshape(n, m * m * n)
    a, sv, bh = np.linalg.svd(g, full_matrices=False)
    sqrt_p0 = (a * sv) @ a.conj().T
    u_star = a @ bh
    v = la.polar_unitary(sqrt_p0 @ la.psd_sqrt(p1))
    h = la.psd_sqrt(p1) @ v @ u_star
    u1 = h.reshape(n, m, m * n).transpose(1, 0, 2).reshape(m * n, m * n)
    r1 = u1 @ u1.conj().T
    r1 = 0.5 * (r1 + r1.conj().T)

    p0 = la.partial_trace(r0, dims, "A")
    reduced = la.partial_trace(r1, dims, "A")
    scale = max(1.0, float(np.real(np.trace(p1))))
    if np.linalg.norm(reduced - p1, 2) > UHLMANN_TRACE_TOL * scale:
        raise UhlmannError("extension does not reduce to P1")
    f_target = la.fidelity(p0, p1)
    f_got = la.fidelity(r0, r1)
    if abs(f_got - f_target) > UHLMANN_FIDELITY_TOL * max(1.0, f_target):
        raise UhlmannError(f"fidelity mismatch {f_got:.12g} vs {f_target:.12g}")
    return r1


def build_primal(q: InteractiveMeasurement, gamma: float, witness: AcceptWitness,
                 epsilon: float | None = None) -> PrimalCertificate:
    """``X = gamma sqrt(Q) R1 sqrt(Q)`` from the accepting density operator.

    ``R1`` extends ``P1 = (1/gamma) sum_{j in S} x_j x_j* + sum_{j not in S} lambda_j x_j x_j*``
    from ``R0 = Q^{-1/2} rho Q^{-1/2}``.  With ``epsilon`` given, a trace
    below ``(1 - 2 eps) gamma`` raises :class:`CertificateError`.
    """
    lam, vecs = witness.eigenvalues, witness.eigenvectors
    weights = lam.copy()
    weights[witness.big_set] = 1.0 / gamma
    p1 = (vecs * weights) @ vecs.conj().T
    r0 = q.inv_sqrt_q @ witness.rho @ q.inv_sqrt_q
    r1 = uhlmann_extend(r0, p1, q.dims)
    x = gamma * q.sqrt_q @ r1 @ q.sqrt_q
    x = 0.5 * (x + x.conj().T)
    tr = float(np.real(np.trace(x)))
    if epsilon is not None and tr < (1 - 2 * epsilon) * gamma:
        raise CertificateError(f"primal trace {tr:.9g} below (1 - 2 eps) gamma = {(1 - 2 * epsilon) * gamma:.9g}")
    return PrimalCertificate(x, tr)


def build_dual(y_list: Sequence[np.ndarray], epsilon: float,
               weights: Sequence[int] | None = None) -> DualCertificate:
    """``Y = (1 + eps)/T (Y_0 + ... + Y_{T-1})``.

    ``weights`` gives the multiplicity of each listed ``Y_t`` when a run
    folded repeated rounds together.
    """
    if len(y_list) == 0:
        raise ValueError("dual certificate needs at least one Y_t")
    w = np.ones(len(y_list)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(y_list),) or np.any(w < 1):
        raise ValueError("weights must be positive counts, one per Y_t")
    y = (1 + epsilon) / w.sum() * np.tensordot(w, np.asarray(y_list), axes=1)
    y = 0.5 * (y + y.conj().T)
    return DualCertificate(y, float(np.real(np.trace(y))))


def certificate_from_outcome(q: InteractiveMeasurement, outcome: SolverOutcome):
    if outcome.decision is Decision.ACCEPT:
        return build_primal(q, outcome.gamma, outcome.accept, outcome.epsilon)
    return build_dual(outcome.y_list, outcome.epsilon, outcome.y_weights())


def _common_checks(mat: np.ndarray, claimed: float, violations: list[str], values: dict) -> np.ndarray | None:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or not np.all(np.isfinite(mat)):
        violations.append("shape")
        return None
    skew = float(np.linalg.norm(mat - mat.conj().T, 2))
    values["hermiticity_defect"] = skew
    if skew > HERMITIAN_TOL * max(1.0, float(np.linalg.norm(mat, 2))):
        violations.append("hermitian")
    h = 0.5 * (mat + mat.conj().T)
    values["trace"] = float(np.real(np.trace(h)))
    values["lambda_min"] = float(np.linalg.eigvalsh(h)[0])
    if values["lambda_min"] < -PSD_TOL:
        violations.append("positive_semidefinite")
    if abs(values["trace"] - claimed) > TRACE_CLAIM_TOL:
        violations.append("claimed_trace")
    return h


def verify_primal(cert: PrimalCertificate, q: InteractiveMeasurement, gamma: float,
                  epsilon: float) -> VerificationReport:
    """Feasibility ``X >= 0``, ``Phi(X) <= 1`` and ``Tr(X) >= (1 - 2 eps) gamma``."""
    violations: list[str] = []
    values: dict[str, float] = {}
    x = _common_checks(cert.x, cert.claimed_trace, violations, values)
    if x is not None and x.shape != q.q.shape:
        violations.append("dimension")
        x = None
    if x is not None:
        values["phi_excess"] = float(np.linalg.eigvalsh(phi(q, x) - np.eye(q.dim_x))[-1])
        if values["phi_excess"] > FEASIBILITY_TOL:
            violations.append("phi_le_identity")
        values["trace_bound"] = (1 - 2 * epsilon) * gamma
        if values["trace"] < values["trace_bound"]:
            violations.append("trace_lower_bound")
    return VerificationReport(not violations, violations, values)


def verify_dual(cert: DualCertificate, q: InteractiveMeasurement, gamma: float,
                epsilon: float) -> VerificationReport:
    """Feasibility ``Y >= 0``, ``Phi*(Y) >= 1`` and ``Tr(Y) <= (1 + eps) gamma``."""
    violations: list[str] = []
    values: dict[str, float] = {}
    y = _common_checks(cert.y, cert.claimed_trace, violations, values)
    if y is not None and y.shape != (q.dim_x, q.dim_x):
        violations.append("dimension")
        y = None
    if y is not None:
        values["phi_star_lambda_min"] = float(np.linalg.eigvalsh(phi_star(q, y))[0])
        if values["phi_star_lambda_min"] < 1 - FEASIBILITY_TOL:
            violations.append("phi_star_ge_identity")
        values["trace_bound"] = (1 + epsilon) * gamma
        if values["trace"] > values["trace_bound"]:
            violations.append("trace_upper_bound")
    return VerificationReport(not violations, violations, values)


def verify(cert, q: InteractiveMeasurement, gamma: float, epsilon: float) -> VerificationReport:
    if isinstance(cert, PrimalCertificate):
        return verify_primal(cert, q, gamma, epsilon)
    return verify_dual(cert, q, gamma, epsilon)
