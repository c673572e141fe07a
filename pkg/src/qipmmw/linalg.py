"""Dense complex linear-algebra kernels.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  All
eigenvalue orderings are descending.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

SYMMETRIZE_TOL = 1e-8
DEFAULT_RANK_CUTOFF = 1e-12


class NotHermitianError(ValueError):
    pass


class NormBoundError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


class SingularOperatorError(ValueError):
    pass


@dataclass(frozen=True)
class HermitianEig:
    unitary: np.ndarray
    eigenvalues: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.unitary * self.eigenvalues) @ self.unitary.conj().T


@dataclass(frozen=True)
class Svd:
    left: np.ndarray
    right: np.ndarray
    singulars: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.singulars)

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singulars) @ self.right.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitize(h, tol: float = SYMMETRIZE_TOL) -> np.ndarray:
    """Return ``(H + H*)/2``, refusing inputs that are far from Hermitian.

    The asymmetry is measured in Frobenius norm relative to ``max(1, ||H||_2)``.
    """
    m = _square(h)
    skew = np.linalg.norm(m - m.conj().T)
    if skew > tol * max(1.0, np.linalg.norm(m)):
        raise NotHermitianError(f"matrix is not Hermitian (||H - H*||_2 = {skew:.3e})")
    return 0.5 * (m + m.conj().T)


def herm_eig(h, tol: float = 1e-10) -> HermitianEig:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    ``tol`` bounds the reconstruction error relative to ``max(1, ||H||)``;
    a LAPACK result that misses it raises ``np.linalg.LinAlgError``.
    """
    m = hermitize(h)
    w, u = np.linalg.eigh(m)
    w = w[::-1].copy()
    u = u[:, ::-1].copy()
    scale = max(1.0, float(np.max(np.abs(w))) if len(w) else 0.0)
    err = np.linalg.norm((u * w) @ u.conj().T - m, 2) if len(w) else 0.0
    if err > tol * scale:
        raise np.linalg.LinAlgError(f"eigendecomposition residual {err:.3e} exceeds {tol:.1e}")
    return HermitianEig(u, w)


def eigvalsh_desc(h) -> np.ndarray:
    return np.linalg.eigvalsh(hermitize(h))[::-1]


def lambda_max(h) -> float:
    return float(np.linalg.eigvalsh(hermitize(h))[-1])


def lambda_min(h) -> float:
    return float(np.linalg.eigvalsh(hermitize(h))[0])


def svd(m, tol: float = 1e-10, rank_cutoff: float | None = None) -> Svd:
    """Rank-revealing SVD ``M = U diag(s) V*``.

    Singular values not exceeding ``rank_cutoff`` are dropped; the default
    cutoff is ``1e-12`` times the largest singular value.
    """
    a = as_matrix(m)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if rank_cutoff is None:
        rank_cutoff = DEFAULT_RANK_CUTOFF * (s[0] if len(s) else 0.0)
    keep = s > rank_cutoff
    out = Svd(u[:, keep], vh[keep].conj().T, s[keep])
    err = np.linalg.norm(out.reconstruct() - a, 2) if a.size else 0.0
    if err > tol * max(1.0, s[0] if len(s) else 0.0) + (s[~keep].max() if (~keep).any() else 0.0):
        raise np.linalg.LinAlgError(f"SVD residual {err:.3e} exceeds {tol:.1e}")
    return out


def spectral_norm(a) -> float:
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def norms(a) -> tuple[float, float, float]:
    """Trace, Frobenius and spectral norms (1, 2, inf norms of the singular values)."""
    s = np.linalg.svd(as_matrix(a), compute_uv=False)
    return float(s.sum()), float(np.sqrt(np.sum(s**2))), float(s.max(initial=0.0))


def trace_norm(a) -> float:
    return float(np.linalg.svd(as_matrix(a), compute_uv=False).sum())


def inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``<A, B> = Tr(A* B)``."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


def _spectral_norm_upper(a: np.ndarray) -> float:
    # ||A||_2 <= sqrt(||A||_1 ||A||_inf) and ||A||_2 <= ||A||_F; both are cheap.
    col = np.abs(a).sum(axis=0).max()
    row = np.abs(a).sum(axis=1).max()
    return float(min(np.sqrt(col * row), np.linalg.norm(a)))


def expm(m, norm_bound: float, tol: float = 1e-12) -> np.ndarray:
    """Matrix exponential by scaling and squaring a truncated Taylor series.

    ``norm_bound`` is a caller-supplied bound on the spectral norm of ``M``;
    it is checked and a violation raises :class:`NormBoundError`.  The series
    on the scaled matrix is truncated once the remainder term falls below
    ``tol * 2**-s`` so the relative error after ``s`` squarings stays near
    ``tol``.
    """
    a = _square(m)
    n = a.shape[0]
    nrm = _spectral_norm_upper(a)
    if nrm > norm_bound:
        nrm = spectral_norm(a)
        if nrm > norm_bound * (1 + 1e-12):
            raise NormBoundError(f"||M|| = {nrm:.6g} exceeds the bound {norm_bound:.6g}")
    s = max(0, math.ceil(math.log2(nrm / 0.5))) if nrm > 0.5 else 0
    b = a / (2**s)
    theta = nrm / (2**s)
    target = tol * 2.0 ** (-s)
    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    j = 0
    remainder = math.exp(theta)
    while True:
        j += 1
        term = term @ b / j
        result = result + term
        # Lagrange remainder of exp(theta) truncated after degree j.
        remainder = theta ** (j + 1) / math.factorial(j + 1) * math.exp(theta)
        if remainder <= target or j >= 60:
            break
    for _ in range(s):
        result = result @ result
    return result


def expm_hermitian(h, norm_bound: float, tol: float = 1e-12) -> np.ndarray:
    """``expm`` for Hermitian arguments, with the result re-symmetrized."""
    e = expm(hermitize(h), norm_bound, tol)
    return 0.5 * (e + e.conj().T)


def partial_trace(m, dims: tuple[int, int], traced: Literal["A", "B", 0, 1] = "B") -> np.ndarray:
    """Partial trace of an operator on ``A (x) B`` over one factor."""
    a = _square(m)
    da, db = dims
    if a.shape[0] != da * db:
        raise ValueError(f"matrix side {a.shape[0]} does not match dims {dims}")
    t = a.reshape(da, db, da, db)
    if traced in ("A", 0):
        return np.einsum("ijik->jk", t)
    if traced in ("B", 1):
        return np.einsum("ijkj->ik", t)
    raise ValueError(f"traced factor must be 'A' or 'B', got {traced!r}")


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def vec(a) -> np.ndarray:
    """Row-major vectorization: ``vec(|i><j|) = |i>|j>``."""
    return as_matrix(a).reshape(-1)


def unvec(v, shape: tuple[int, int]) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(shape)


def _psd_eig(p, tol: float) -> tuple[np.ndarray, np.ndarray]:
    m = hermitize(p)
    w, u = np.linalg.eigh(m)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if w.size and w[0] < -tol * scale:
        raise NotPSDError(f"matrix has eigenvalue {w[0]:.3e} < 0")
    return np.clip(w, 0.0, None), u


def psd_sqrt(p, tol: float = 1e-9) -> np.ndarray:
    w, u = _psd_eig(p, tol)
    return (u * np.sqrt(w)) @ u.conj().T


def psd_sqrt_and_inv_sqrt(p, floor: float) -> tuple[np.ndarray, np.ndarray]:
    """Square root and inverse square root from one eigendecomposition.

    Raises :class:`SingularOperatorError` when the smallest eigenvalue is
    below ``floor``.
    """
    m = hermitize(p)
    w, u = np.linalg.eigh(m)
    if w[0] < floor:
        raise SingularOperatorError(f"smallest eigenvalue {w[0]:.3e} below floor {floor:.1e}")
    r = np.sqrt(w)
    sqrt_p = (u * r) @ u.conj().T
    inv_sqrt_p = (u / r) @ u.conj().T
    return 0.5 * (sqrt_p + sqrt_p.conj().T), 0.5 * (inv_sqrt_p + inv_sqrt_p.conj().T)


def fidelity(p, q, tol: float = 1e-9) -> float:
    """``F(P, Q) = ||sqrt(P) sqrt(Q)||_1`` for PSD ``P`` and ``Q``."""
    a, b = _square(p), _square(q)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return trace_norm(psd_sqrt(a, tol) @ psd_sqrt(b, tol))


def polar_unitary(a) -> np.ndarray:
    """Unitary ``V`` making ``A V`` positive semidefinite (square ``A``).

    With ``A = W S U*`` the choice ``V = U W*`` gives ``A V = W S W*``; on
    rank deficiency the full SVD supplies the completing basis vectors.
    """
    w, _, uh = np.linalg.svd(_square(a))
    return uh.conj().T @ w.conj().T


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (z + z.conj().T)


def random_psd(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.standard_normal((n, rank or n)) + 1j * rng.standard_normal((n, rank or n))
    return g @ g.conj().T
