"""Costs and maps between two Gaussian components."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainError
from .spd import SpdMatrix, SymMatrix, as_spd, phi, symmetrize, whitened_perturbation

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True, eq=False)
class Gaussian:
    """Normal distribution N(mean, cov); ``cov`` is coerced to SpdMatrix."""

    mean: np.ndarray
    cov: SpdMatrix

    def __post_init__(self):
        cov = as_spd(self.cov)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if mean.shape[0] != cov.dim:
            raise ValueError(f"mean has length {mean.shape[0]} but covariance has dim {cov.dim}")
        mean.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.cov.dim

    def logpdf(self, x) -> np.ndarray:
        """Log density at ``x`` of shape (d,) or (n, d)."""
        x = np.asarray(x, dtype=float)
        y = (x - self.mean) @ self.cov.eigvecs
        maha = np.sum(y * y / self.cov.eigvals, axis=-1)
        return -0.5 * (self.dim * LOG_2PI + self.cov.logdet() + maha)

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))


def _check_pair(src: Gaussian, dst: Gaussian):
    if src.dim != dst.dim:
        raise ValueError(f"dimension mismatch: {src.dim} vs {dst.dim}")


def _mean_term(src: Gaussian, dst: Gaussian) -> float:
    dmu = dst.mean - src.mean
    return float(dmu @ dmu)


def _delta(src: Gaussian, dst: Gaussian) -> np.ndarray:
    return dst.cov.entries - src.cov.entries


def surrogate_cov_term(sigma0: SpdMatrix, delta: np.ndarray) -> float:
    """Covariance part of the linear-path kinetic action.

    Evaluated in whitened coordinates as 1/4 Tr(phi(C0) C0 Sigma0 C0),
    with the trace taken in the eigenbasis of C0.
    """
    _, c0 = whitened_perturbation(sigma0, delta)
    w, u = c0.eigvals, c0.eigvecs
    if w[0] <= -1.0:
        raise DomainError(f"whitened perturbation has eigenvalue {w[0]:.6g} <= -1")
    diag = np.sum(u * (sigma0.entries @ u), axis=0)
    return float(0.25 * np.sum(phi(w) * w * w * diag))


def surrogate_cost(src: Gaussian, dst: Gaussian) -> float:
    """Kinetic action of the linear mean/covariance interpolation, in closed form."""
    _check_pair(src, dst)
    return _mean_term(src, dst) + surrogate_cov_term(src.cov, _delta(src, dst))


def _bures_root(sigma0: SpdMatrix, sigma1: SpdMatrix) -> Tuple[np.ndarray, SymMatrix]:
    s = sigma0.sqrt().entries
    # inner product may be too ill-conditioned for the SPD floor; clip instead
    inner = SymMatrix(symmetrize(s @ sigma1.entries @ s))
    return s, inner


def w2_cov_term(sigma0: SpdMatrix, sigma1: SpdMatrix) -> float:
    _, inner = _bures_root(sigma0, sigma1)
    root_trace = float(np.sum(np.sqrt(np.clip(inner.eigvals, 0.0, None))))
    return max(sigma0.trace() + sigma1.trace() - 2.0 * root_trace, 0.0)


def w2_squared(src: Gaussian, dst: Gaussian) -> float:
    """Squared 2-Wasserstein distance between two Gaussians."""
    _check_pair(src, dst)
    return _mean_term(src, dst) + w2_cov_term(src.cov, dst.cov)


def quadratic_proxy(src: Gaussian, dst: Gaussian) -> float:
    """1/4 Tr(dSigma Sigma0^{-1} dSigma), the shared second-order term."""
    _check_pair(src, dst)
    delta = _delta(src, dst)
    y = src.cov.inv().entries @ delta
    return float(0.25 * np.sum(delta * y))


def ot_map(src: Gaussian, dst: Gaussian) -> Tuple[np.ndarray, np.ndarray]:
    """Optimal affine map T(x) = M x + shift pushing ``src`` onto ``dst``.

    ``M`` is symmetric positive definite and ``shift = mu1 - M mu0``.
    """
    _check_pair(src, dst)
    r = src.cov.inv_sqrt().entries
    _, inner = _bures_root(src.cov, dst.cov)
    w = np.sqrt(np.clip(inner.eigvals, 0.0, None))
    root = (inner.eigvecs * w) @ inner.eigvecs.T
    m = symmetrize(r @ root @ r)
    return m, dst.mean - m @ src.mean


@dataclass(frozen=True)
class PairCostReport:
    mean_term: float
    surrogate_cov_term: float
    w2_cov_term: float
    surrogate_total: float
    w2_total: float
    quadratic_proxy: float
    gap: float

    @property
    def err_w(self) -> float:
        return abs(self.w2_total - (self.mean_term + self.quadratic_proxy))

    @property
    def err_c(self) -> float:
        return abs(self.surrogate_total - (self.mean_term + self.quadratic_proxy))


def pair_report(src: Gaussian, dst: Gaussian) -> PairCostReport:
    _check_pair(src, dst)
    mean_term = _mean_term(src, dst)
    c_cov = surrogate_cov_term(src.cov, _delta(src, dst))
    w_cov = w2_cov_term(src.cov, dst.cov)
    c = mean_term + c_cov
    w = mean_term + w_cov
    return PairCostReport(
        mean_term=mean_term,
        surrogate_cov_term=c_cov,
        w2_cov_term=w_cov,
        surrogate_total=c,
        w2_total=w,
        quadratic_proxy=quadratic_proxy(src, dst),
        gap=c - w,
    )
