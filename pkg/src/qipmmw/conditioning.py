"""Turn a raw verifier description into a well-conditioned measurement operator.

The construction replaces the verifier's initial state by a state that is
maximally entangled on a dyadic bin of its Schmidt spectrum, compresses the
registers to that bin, and mixes the measurement with the identity so that
``kappa(Q) <= 64 k`` with ``k = p + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import linalg as la
from .quantum import InteractiveMeasurement, MeasurementOperator, PureState, build_q

SCHMIDT_CUTOFF = 1e-14
# Coefficients this close (in log2) to a dyadic boundary are treated as on it.
BOUNDARY_SNAP = 1e-12


class BinSelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SchmidtData:
    coefficients: np.ndarray
    x_vectors: np.ndarray
    z_vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        amp = np.einsum("j,aj,bj->ab", np.sqrt(self.coefficients), self.x_vectors, self.z_vectors)
        return amp.reshape(-1)


@dataclass(frozen=True)
class ConditionedInstance:
    q: InteractiveMeasurement
    gamma: float
    epsilon: float
    k: int
    selected_bin: int
    selected_indices: tuple[int, ...]
    schmidt: SchmidtData
    overlap: float

    @property
    def n(self) -> int:
        return len(self.selected_indices)


def schmidt(psi: PureState, cutoff: float = SCHMIDT_CUTOFF) -> SchmidtData:
    """Schmidt decomposition ``psi = sum_j sqrt(lambda_j) |x_j>|z_j>``.

    Coefficients below ``cutoff`` are dropped.
    """
    u, s, vh = np.linalg.svd(psi.as_matrix(), full_matrices=False)
    lam = s**2
    keep = lam >= cutoff
    return SchmidtData(lam[keep], u[:, keep], vh[keep].T.copy())


def dyadic_bin(lam: float) -> int:
    """Index ``i >= 1`` with ``2**-i < lam <= 2**(1-i)``."""
    x = -math.log2(lam)
    r = round(x)
    if abs(x - r) < BOUNDARY_SNAP:
        x = r
    return math.floor(x) + 1


def select_bin(data: SchmidtData, k: int) -> tuple[int, tuple[int, ...]]:
    """Smallest ``i`` in ``1..k`` whose bin carries Schmidt mass ``>= 1/(2k)``."""
    if k < 1:
        raise ValueError("k must be positive")
    bins = [dyadic_bin(lam) for lam in data.coefficients]
    for i in range(1, k + 1):
        members = tuple(j for j, b in enumerate(bins) if b == i)
        if sum(data.coefficients[j] for j in members) >= 1.0 / (2 * k):
            return i, members
    raise BinSelectionError(f"no dyadic bin among 1..{k} carries mass 1/(2k); k is too small for this state")


def condition(psi: PureState, pi: MeasurementOperator, p: int) -> ConditionedInstance:
    if psi.dim_x > 2**p or psi.dim_z != pi.dim_z:
        raise ValueError("register dimensions do not match p")
    k = p + 1
    data = schmidt(psi)
    i, sigma = select_bin(data, k)
    n = len(sigma)
    z_iso = data.z_vectors[:, list(sigma)]
    m = pi.dim_y
    lift = np.kron(np.eye(m), z_iso)
    p_op = lift.conj().T @ pi.matrix @ lift
    mix = Fraction(1, 64 * k)
    mixed = float(1 - mix) * p_op + float(mix) * np.eye(m * n)
    tau = np.eye(n).reshape(-1) / math.sqrt(n)
    q = build_q(PureState(tau, n, n), MeasurementOperator(mixed, m, n))
    overlap = float(np.sum(np.sqrt(data.coefficients[list(sigma)] / n)))
    return ConditionedInstance(
        q=InteractiveMeasurement.from_matrix(q, m, n),
        gamma=float(Fraction(3, 64 * k)),
        epsilon=float(Fraction(1, 12)),
        k=k,
        selected_bin=i,
        selected_indices=sigma,
        schmidt=data,
        overlap=overlap,
    )


def uniform_state(psi: PureState, data: SchmidtData, sigma: tuple[int, ...]) -> PureState:
    """``|phi> = |Sigma|^{-1/2} sum_{j in Sigma} |x_j>|z_j>`` on the original registers."""
    amp = sum(np.kron(data.x_vectors[:, j], data.z_vectors[:, j]) for j in sigma) / math.sqrt(len(sigma))
    return PureState(amp, psi.dim_x, psi.dim_z)


@dataclass
class SandwichReport:
    k: int
    mu_r: tuple[float, float]
    mu_q: tuple[float, float]
    lower_bound: float
    upper_bound: float
    lower_holds: bool
    upper_holds: bool

    @property
    def holds(self) -> bool:
        return self.lower_holds and self.upper_holds


def sandwich_check(psi: PureState, pi: MeasurementOperator, p: int,
                   oracle_mu: Callable[[np.ndarray, tuple[int, int]], object],
                   tol: float = 1e-9) -> SandwichReport:
    """Check ``mu(R) - (1 - 1/(8k)) <= mu(Q) <= 4k mu(R) + 1/(64k)``.

    ``oracle_mu(matrix, (dim_y, dim_x))`` must return an object with
    ``lower`` and ``upper`` attributes bracketing ``mu``.  Each inequality
    is checked in the direction the brackets make conservative.
    """
    inst = condition(psi, pi, p)
    k = inst.k
    r = build_q(psi, pi)
    res_r = oracle_mu(r, (pi.dim_y, psi.dim_x))
    res_q = oracle_mu(inst.q.q, inst.q.dims)
    lower_bound = res_r.lower - (1 - 1 / (8 * k))
    upper_bound = 4 * k * res_r.upper + 1 / (64 * k)
    return SandwichReport(
        k=k,
        mu_r=(res_r.lower, res_r.upper),
        mu_q=(res_q.lower, res_q.upper),
        lower_bound=lower_bound,
        upper_bound=upper_bound,
        lower_holds=lower_bound <= res_q.upper + tol,
        upper_holds=res_q.lower <= upper_bound + tol,
    )
