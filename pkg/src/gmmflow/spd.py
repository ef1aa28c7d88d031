"""Spectral calculus on symmetric and symmetric positive definite matrices.

Every matrix function here goes through a single symmetric
eigendecomposition, computed once when the matrix object is built.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DomainError, NotSpd

SYM_TOL = 1e-12
SPD_FLOOR = 1e-12
PHI_SWITCH = 1e-4


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _square(entries) -> np.ndarray:
    a = np.array(entries, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


class SymMatrix:
    """Real symmetric matrix with its eigendecomposition.

    Parameters
    ----------
    entries : array-like (d, d)
        Must be symmetric to within ``SYM_TOL`` in relative Frobenius norm.
        The stored entries are the symmetrized input.
    """

    __slots__ = ("_entries", "_eigvals", "_eigvecs")

    def __init__(self, entries):
        a = _square(entries)
        scale = np.linalg.norm(a)
        if scale > 0 and np.linalg.norm(a - a.T) > SYM_TOL * scale:
            raise ValueError("matrix is not symmetric")
        a = symmetrize(a)
        w, v = np.linalg.eigh(a)
        self._set(a, w, v)

    def _set(self, a, w, v):
        for arr in (a, w, v):
            arr.flags.writeable = False
        self._entries = a
        self._eigvals = w
        self._eigvecs = v

    @classmethod
    def _from_eigh(cls, w: np.ndarray, v: np.ndarray):
        """Build from a known spectrum without re-factorizing."""
        obj = cls.__new__(cls)
        w = np.array(w, dtype=float)
        v = np.array(v, dtype=float)
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        obj._set(symmetrize((v * w) @ v.T), w, v)
        return obj

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def eigvals(self) -> np.ndarray:
        """Eigenvalues in ascending order."""
        return self._eigvals

    @property
    def eigvecs(self) -> np.ndarray:
        return self._eigvecs

    @property
    def norm(self) -> float:
        """Spectral norm, max |eigenvalue|."""
        return float(np.max(np.abs(self._eigvals)))

    @property
    def min_eig(self) -> float:
        return float(self._eigvals[0])

    @property
    def max_eig(self) -> float:
        return float(self._eigvals[-1])

    def trace(self) -> float:
        return float(np.sum(self._eigvals))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._entries, dtype=dtype)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, eig=[{self.min_eig:.3g}, {self.max_eig:.3g}])"


class SpdMatrix(SymMatrix):
    """Symmetric positive definite matrix.

    Construction fails with :class:`NotSpd` when the smallest eigenvalue is
    at or below ``SPD_FLOOR * max(lambda_max, 1)``.
    """

    __slots__ = ()

    def __init__(self, entries):
        try:
            super().__init__(entries)
        except ValueError as exc:
            raise NotSpd(str(exc)) from exc
        self._check_floor()

    @classmethod
    def _from_eigh(cls, w, v):
        obj = super()._from_eigh(w, v)
        obj._check_floor()
        return obj

    def _check_floor(self):
        w = self._eigvals
        floor = SPD_FLOOR * max(w[-1], 1.0)
        if w[0] <= floor:
            raise NotSpd(
                f"matrix is not positive definite: min eigenvalue {w[0]:.3e} <= floor {floor:.3e}"
            )

    def sqrt(self) -> "SpdMatrix":
        return SpdMatrix._from_eigh(np.sqrt(self._eigvals), self._eigvecs)

    def inv_sqrt(self) -> "SpdMatrix":
        return SpdMatrix._from_eigh(1.0 / np.sqrt(self._eigvals), self._eigvecs)

    def inv(self) -> "SpdMatrix":
        return SpdMatrix._from_eigh(1.0 / self._eigvals, self._eigvecs)

    def logdet(self) -> float:
        return float(np.sum(np.log(self._eigvals)))

    @property
    def condition(self) -> float:
        return self.max_eig / self.min_eig


def as_spd(a) -> SpdMatrix:
    return a if isinstance(a, SpdMatrix) else SpdMatrix(a)


def as_sym(a) -> SymMatrix:
    return a if isinstance(a, SymMatrix) else SymMatrix(a)


def sym_sqrt(a) -> SpdMatrix:
    """Principal square root of an SPD matrix."""
    return as_spd(a).sqrt()


def sym_inv_sqrt(a) -> SpdMatrix:
    """Inverse principal square root of an SPD matrix."""
    return as_spd(a).inv_sqrt()


def spectral_apply(
    a,
    f: Callable[[np.ndarray], np.ndarray],
    domain: Optional[Tuple[float, float]] = None,
) -> SymMatrix:
    """Apply a scalar function to a symmetric matrix through its spectrum.

    ``f`` receives the eigenvalue array and must be vectorized. ``domain``
    is an open interval ``(low, high)``; eigenvalues outside it raise
    :class:`DomainError` before ``f`` is called.
    """
    a = as_sym(a)
    w = a.eigvals
    if domain is not None:
        lo, hi = domain
        if np.any(w <= lo) or np.any(w >= hi):
            raise DomainError(
                f"eigenvalues [{w[0]:.6g}, {w[-1]:.6g}] leave the domain ({lo}, {hi})"
            )
    fw = np.asarray(f(w), dtype=float)
    return SymMatrix._from_eigh(fw, a.eigvecs)


def phi(z):
    """log(1 + z) / z with phi(0) = 1, for z > -1.

    Below ``PHI_SWITCH`` in magnitude the five-term alternating series is
    used instead of the quotient.
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= -1.0):
        raise DomainError("phi is defined only for z > -1")
    small = np.abs(z_arr) < PHI_SWITCH
    safe = np.where(small, 1.0, z_arr)
    direct = np.log1p(safe) / safe
    zs = np.where(small, z_arr, 0.0)
    series = 1.0 - zs / 2 + zs**2 / 3 - zs**3 / 4 + zs**4 / 5
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def whitened_perturbation(sigma0, delta) -> Tuple[float, SymMatrix]:
    """Whiten ``delta`` by the source covariance.

    Returns ``(rho_hat, c0)`` where ``c0 = sigma0^{-1/2} delta sigma0^{-1/2}``
    and ``rho_hat`` is its spectral norm.
    """
    sigma0 = as_spd(sigma0)
    delta = np.asarray(delta, dtype=float)
    if delta.ndim == 0:
        delta = delta.reshape(1, 1)
    if delta.shape != (sigma0.dim, sigma0.dim):
        raise ValueError(f"dimension mismatch: {delta.shape} vs {sigma0.dim}")
    r = sigma0.inv_sqrt().entries
    c0 = SymMatrix(symmetrize(r @ delta @ r))
    return c0.norm, c0


@dataclass(frozen=True)
class RegimeIndicators:
    """Conditioning and commutation indicators for a (source, increment) pair."""

    m0: float
    M0: float
    kappa: float
    delta_norm: float
    comm: float


def normalized_commutator(a: np.ndarray, b: np.ndarray) -> float:
    nb = np.linalg.norm(b)
    if nb == 0:
        return 0.0
    return float(np.linalg.norm(a @ b - b @ a) / (np.linalg.norm(a) * nb))


def regime_indicators(sigma0, delta) -> RegimeIndicators:
    sigma0 = as_spd(sigma0)
    delta = np.asarray(delta, dtype=float).reshape(sigma0.dim, sigma0.dim)
    delta_norm = float(np.max(np.abs(np.linalg.eigvalsh(symmetrize(delta))))) if delta.size else 0.0
    return RegimeIndicators(
        m0=sigma0.min_eig,
        M0=sigma0.max_eig,
        kappa=sigma0.condition,
        delta_norm=delta_norm,
        comm=normalized_commutator(sigma0.entries, delta),
    )
