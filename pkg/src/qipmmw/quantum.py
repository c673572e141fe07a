"""States, measurements, channels and the interactive measurement operator.

Conventions: for a pure state on ``X (x) Z`` the message register ``X`` is
the high-order tensor factor.  Choi matrices and interactive measurement
operators live on ``Y (x) X`` with ``Y`` the high-order factor, so that
``J(Psi) = sum_ij Psi(|i><j|) (x) |i><j|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la

UNITARITY_TOL = 1e-9
MEASUREMENT_TOL = 1e-9
NORMALIZATION_TOL = 1e-10
TRACE_PRESERVING_TOL = 1e-8
INVERTIBILITY_FLOOR = 1e-13


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    dim_x: int
    dim_z: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if len(amp) != self.dim_x * self.dim_z:
            raise ValueError(f"state length {len(amp)} != {self.dim_x} * {self.dim_z}")
        if abs(np.linalg.norm(amp) - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"state is not normalized (norm {np.linalg.norm(amp):.12f})")
        object.__setattr__(self, "amplitudes", amp)

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped so that row ``i`` holds ``|psi_i>`` in ``Z``."""
        return self.amplitudes.reshape(self.dim_x, self.dim_z)


@dataclass(frozen=True)
class MeasurementOperator:
    """Operator ``0 <= P <= 1`` on ``Y (x) Z``."""

    matrix: np.ndarray
    dim_y: int
    dim_z: int

    def __post_init__(self):
        m = la.hermitize(self.matrix)
        if m.shape[0] != self.dim_y * self.dim_z:
            raise ValueError(f"measurement side {m.shape[0]} != {self.dim_y} * {self.dim_z}")
        w = np.linalg.eigvalsh(m)
        if w[0] < -MEASUREMENT_TOL or w[-1] > 1 + MEASUREMENT_TOL:
            raise ValueError(f"measurement eigenvalues [{w[0]:.3e}, {w[-1]:.6f}] outside [0, 1]")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: np.ndarray
    dim_y: int
    dim_x: int

    def __post_init__(self):
        m = la.hermitize(self.matrix)
        if m.shape[0] != self.dim_y * self.dim_x:
            raise ValueError(f"Choi side {m.shape[0]} != {self.dim_y} * {self.dim_x}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "ChoiMatrix":
        """``J = sum_e vec(A_e) vec(A_e)*`` for Kraus operators ``A_e : X -> Y``."""
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        dim_y, dim_x = kraus[0].shape
        cols = np.stack([la.vec(k) for k in kraus], axis=1)
        return cls(cols @ cols.conj().T, dim_y, dim_x)

    def reduced_x(self) -> np.ndarray:
        return la.partial_trace(self.matrix, (self.dim_y, self.dim_x), "A")

    def is_psd(self, tol: float = 1e-9) -> bool:
        return la.lambda_min(self.matrix) >= -tol

    def is_trace_preserving(self, tol: float = TRACE_PRESERVING_TOL) -> bool:
        return np.linalg.norm(self.reduced_x() - np.eye(self.dim_x), 2) <= tol

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """``Psi(rho) = Tr_X(J (1_Y (x) rho^T))``."""
        rho = np.asarray(rho, dtype=complex)
        return la.partial_trace(self.matrix @ np.kron(np.eye(self.dim_y), rho.T),
                                (self.dim_y, self.dim_x), "B")


def identity_channel(dim: int) -> ChoiMatrix:
    return ChoiMatrix.from_kraus([np.eye(dim)])


def depolarizing_channel(dim_y: int, dim_x: int) -> ChoiMatrix:
    """Completely depolarizing channel ``rho -> Tr(rho) 1/M``."""
    return ChoiMatrix(np.eye(dim_y * dim_x) / dim_y, dim_y, dim_x)


def random_kraus(dim_y: int, dim_x: int, rng: np.random.Generator, rank: int | None = None) -> list[np.ndarray]:
    rank = rank or dim_x * dim_y
    g = rng.standard_normal((rank * dim_y, dim_x)) + 1j * rng.standard_normal((rank * dim_y, dim_x))
    v, _ = np.linalg.qr(g)
    return [v[e * dim_y:(e + 1) * dim_y] for e in range(rank)]


def random_channel(dim_y: int, dim_x: int, rng: np.random.Generator, rank: int | None = None) -> ChoiMatrix:
    return ChoiMatrix.from_kraus(random_kraus(dim_y, dim_x, rng, rank))


@dataclass(frozen=True)
class InteractiveMeasurement:
    """Invertible interactive measurement operator with cached spectral data.

    The stored ``q`` is the square of the committed square root, so that
    ``sqrt_q``, ``inv_sqrt_q`` and ``q`` are mutually consistent.
    """

    q: np.ndarray
    dim_y: int
    dim_x: int
    sqrt_q: np.ndarray = field(repr=False)
    inv_sqrt_q: np.ndarray = field(repr=False)
    spectral_norm: float
    inv_spectral_norm: float
    kappa: float

    @classmethod
    def from_matrix(cls, q, dim_y: int, dim_x: int, floor: float = INVERTIBILITY_FLOOR) -> "InteractiveMeasurement":
        q = la.hermitize(q)
        if q.shape[0] != dim_y * dim_x:
            raise ValueError(f"operator side {q.shape[0]} != {dim_y} * {dim_x}")
        w, u = np.linalg.eigh(q)
        if w[0] < floor * max(1.0, w[-1]):
            raise la.SingularOperatorError(f"Q is not invertible (lambda_min = {w[0]:.3e})")
        r = np.sqrt(w)
        sqrt_q = (u * r) @ u.conj().T
        inv_sqrt_q = (u / r) @ u.conj().T
        sqrt_q = 0.5 * (sqrt_q + sqrt_q.conj().T)
        inv_sqrt_q = 0.5 * (inv_sqrt_q + inv_sqrt_q.conj().T)
        q_committed = sqrt_q @ sqrt_q
        norm, inv_norm = float(w[-1]), float(1.0 / w[0])
        return cls(0.5 * (q_committed + q_committed.conj().T), dim_y, dim_x, sqrt_q, inv_sqrt_q,
                   norm, inv_norm, norm * inv_norm)

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim_y, self.dim_x


def phi(q: InteractiveMeasurement, x) -> np.ndarray:
    """``Phi(X) = Tr_Y(Q^{-1/2} X Q^{-1/2})``."""
    x = la.as_matrix(x)
    if x.shape != q.q.shape:
        raise ValueError(f"argument shape {x.shape} != {q.q.shape}")
    return la.partial_trace(q.inv_sqrt_q @ x @ q.inv_sqrt_q, q.dims, "A")


def phi_star(q: InteractiveMeasurement, y) -> np.ndarray:
    """``Phi*(Y) = Q^{-1/2} (1_Y (x) Y) Q^{-1/2}``."""
    y = la.as_matrix(y)
    if y.shape != (q.dim_x, q.dim_x):
        raise ValueError(f"argument shape {y.shape} != {(q.dim_x, q.dim_x)}")
    out = q.inv_sqrt_q @ np.kron(np.eye(q.dim_y), y) @ q.inv_sqrt_q
    return 0.5 * (out + out.conj().T)


# --- verifier circuits -------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    """Unitary on the listed qubits.

    Qubit ``0`` is the least significant tensor factor of the register.  The
    gate matrix is ordered with ``targets[0]`` as its most significant factor,
    so a CNOT with ``targets=[c, t]`` uses the textbook matrix.
    """

    targets: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        k = len(self.targets)
        if m.shape != (2**k, 2**k):
            raise ValueError(f"gate on {k} qubits needs a {2**k}x{2**k} matrix, got {m.shape}")
        if len(set(self.targets)) != k:
            raise ValueError(f"repeated target qubit in {self.targets}")
        if np.linalg.norm(m.conj().T @ m - np.eye(2**k), 2) > UNITARITY_TOL:
            raise ValueError("gate matrix is not unitary")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "matrix", m)


def apply_gate(state: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    """Apply ``gate`` to the leading axis of ``state`` (shape ``(2**n, ...)``)."""
    for t in gate.targets:
        if not 0 <= t < n_qubits:
            raise ValueError(f"qubit index {t} out of range for {n_qubits} qubits")
    rest = state.shape[1:]
    k = len(gate.targets)
    psi = state.reshape((2,) * n_qubits + rest)
    axes = [n_qubits - 1 - t for t in gate.targets]
    g = gate.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(g, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(state.shape)


def circuit_unitary(gates: Sequence[Gate], n_qubits: int) -> np.ndarray:
    u = np.eye(2**n_qubits, dtype=complex)
    for g in gates:
        u = apply_gate(u, g, n_qubits)
    return u


@dataclass(frozen=True)
class VerifierInstance:
    psi: PureState
    pi: MeasurementOperator
    p: int


def build_verifier_instance(u_gates: Sequence[Gate], v_gates: Sequence[Gate], p: int) -> VerifierInstance:
    """``psi = U|0...0>`` and ``Pi = V* (|1><1| (x) 1) V`` on ``2p`` qubits.

    The output qubit is the most significant qubit (index ``2p - 1``) of the
    ``Y (x) Z`` register.
    """
    n = 2 * p
    dim = 2**p
    zero = np.zeros(2**n, dtype=complex)
    zero[0] = 1.0
    psi = zero
    for g in u_gates:
        psi = apply_gate(psi, g, n)
    v = circuit_unitary(v_gates, n)
    accept = np.kron(np.diag([0.0, 1.0]), np.eye(2 ** (n - 1)))
    pi = v.conj().T @ accept @ v
    return VerifierInstance(PureState(psi, dim, dim), MeasurementOperator(pi, dim, dim), p)


def state_operator_B(psi: PureState) -> np.ndarray:
    """``B = sum_i |psi_i><i|`` in ``L(X, Z)`` for ``psi = sum_i |i>|psi_i>``."""
    return psi.as_matrix().T.copy()


def build_q(psi: PureState, pi: MeasurementOperator) -> np.ndarray:
    """``Q = (1_Y (x) B*) Pi (1_Y (x) B)`` as a plain PSD matrix on ``Y (x) X``."""
    if pi.dim_z != psi.dim_z:
        raise ValueError(f"private register mismatch: {pi.dim_z} != {psi.dim_z}")
    b = np.kron(np.eye(pi.dim_y), state_operator_B(psi))
    q = b.conj().T @ pi.matrix @ b
    return 0.5 * (q + q.conj().T)


def accept_probability(instance: VerifierInstance, channel: ChoiMatrix) -> float:
    """``<Pi, (1 (x) B) J (1 (x) B*)>``, the verifier's acceptance probability."""
    if not channel.is_trace_preserving():
        raise ValueError("channel is not trace preserving")
    if (channel.dim_y, channel.dim_x) != (instance.pi.dim_y, instance.psi.dim_x):
        raise ValueError("channel dimensions do not match the verifier")
    b = np.kron(np.eye(channel.dim_y), state_operator_B(instance.psi))
    out = b @ channel.matrix @ b.conj().T
    return float(np.real(la.inner(instance.pi.matrix, out)))
