"""Gaussian paths between two components and their affine velocity fields.

Two path kinds are supported:

* ``linear``: means and covariances interpolated linearly, with the
  continuity-equation field ``dmu + 1/2 dSigma Sigma(t)^{-1} (x - mu(t))``.
* ``geodesic``: the Bures-Wasserstein displacement interpolation
  ``Sigma(t) = A(t) Sigma0 A(t)`` with ``A(t) = (1 - t) I + t M``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import OutOfRange
from .gaussian import Gaussian, ot_map
from .spd import symmetrize


class PathKind(str, enum.Enum):
    LINEAR = "linear"
    GEODESIC = "geodesic"


@dataclass(frozen=True, eq=False)
class AffineField:
    """v(x) = drift + gain (x - center) at a fixed time."""

    drift: np.ndarray
    gain: np.ndarray
    center: np.ndarray

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.drift + (x - self.center) @ self.gain.T

    def divergence(self) -> float:
        return float(np.trace(self.gain))

    def scaled_gain(self, factor: float) -> "AffineField":
        return AffineField(self.drift, factor * self.gain, self.center)


@dataclass(frozen=True, eq=False)
class GaussianPath:
    kind: PathKind
    src: Gaussian
    dst: Gaussian
    map_matrix: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        kind = PathKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.src.dim != self.dst.dim:
            raise ValueError("path endpoints have different dimensions")
        if kind is PathKind.GEODESIC and self.map_matrix is None:
            m, _ = ot_map(self.src, self.dst)
            object.__setattr__(self, "map_matrix", m)

    @property
    def dim(self) -> int:
        return self.src.dim

    @property
    def mean_velocity(self) -> np.ndarray:
        return self.dst.mean - self.src.mean

    def mean_at(self, t: float) -> np.ndarray:
        return (1.0 - t) * self.src.mean + t * self.dst.mean

    def a_matrix(self, t: float) -> np.ndarray:
        """A(t) = (1 - t) I + t M on geodesic paths."""
        return (1.0 - t) * np.eye(self.dim) + t * self.map_matrix

    def cov_entries(self, t: float) -> np.ndarray:
        if self.kind is PathKind.LINEAR:
            return (1.0 - t) * self.src.cov.entries + t * self.dst.cov.entries
        a = self.a_matrix(t)
        return symmetrize(a @ self.src.cov.entries @ a.T)

    def at(self, t: float) -> Gaussian:
        return path_at(self, t)

    def field(self, t: float) -> AffineField:
        _check_t(t)
        center = self.mean_at(t)
        if self.kind is PathKind.LINEAR:
            delta = self.dst.cov.entries - self.src.cov.entries
            # B = 1/2 dSigma Sigma^{-1}; both factors symmetric
            gain = 0.5 * np.linalg.solve(self.cov_entries(t), delta).T
        else:
            gain = np.linalg.solve(self.a_matrix(t), self.map_matrix - np.eye(self.dim)).T
        return AffineField(self.mean_velocity, gain, center)


def linear_path(src: Gaussian, dst: Gaussian) -> GaussianPath:
    return GaussianPath(PathKind.LINEAR, src, dst)


def geodesic_path(src: Gaussian, dst: Gaussian) -> GaussianPath:
    return GaussianPath(PathKind.GEODESIC, src, dst)


def _check_t(t: float):
    if not (0.0 <= t <= 1.0):
        raise OutOfRange(f"t = {t} is outside [0, 1]")


def path_at(path: GaussianPath, t: float) -> Gaussian:
    """Gaussian marginal of the path at time ``t``."""
    _check_t(t)
    return Gaussian(path.mean_at(t), path.cov_entries(t))


def field_at(path: GaussianPath, t: float, x) -> np.ndarray:
    """Velocity of the path's continuity-equation field at (t, x)."""
    return path.field(t)(x)


def gauss_legendre_01(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def kinetic_action(path: GaussianPath, quad_nodes: int = 200) -> float:
    """Gauss-Legendre estimate of int_0^1 E||v(t, X_t)||^2 dt."""
    if quad_nodes < 1:
        raise ValueError("quad_nodes must be positive")
    ts, ws = gauss_legendre_01(quad_nodes)
    total = 0.0
    for t, w in zip(ts, ws):
        f = path.field(t)
        energy = f.drift @ f.drift + np.trace(f.gain @ path.cov_entries(t) @ f.gain.T)
        total += w * energy
    return float(total)


def continuity_residual(
    path: GaussianPath,
    t: float,
    x,
    h: float = 1e-5,
    velocity: Optional[AffineField] = None,
) -> float:
    """Absolute residual of the log-form continuity equation at (t, x).

    The time derivative of log density uses a central difference with step
    ``h``; divergence and score are analytic. ``velocity`` overrides the
    path's own field, which lets callers probe corrupted fields.
    """
    _check_t(t - h)
    _check_t(t + h)
    x = np.asarray(x, dtype=float)
    dlog = (path_at(path, t + h).logpdf(x) - path_at(path, t - h).logpdf(x)) / (2.0 * h)
    g = path_at(path, t)
    v = velocity if velocity is not None else path.field(t)
    score = -np.linalg.solve(g.cov.entries, x - g.mean)
    return float(abs(dlog + v.divergence() + score @ v(x)))


def flow_map(path: GaussianPath, t: float, steps: int = 1000) -> Tuple[np.ndarray, np.ndarray]:
    """Affine flow map x -> Phi x + offset of the path field from 0 to ``t``.

    Geodesic paths use Phi(t) = A(t); linear paths integrate
    dPhi/dt = B(t) Phi with classical RK4 over ``steps`` uniform steps.
    """
    _check_t(t)
    if path.kind is PathKind.GEODESIC:
        phi_t = path.a_matrix(t)
    else:
        phi_t = np.eye(path.dim)
        if t > 0:
            h = t / steps
            gain = lambda s: path.field(s).gain
            for k in range(steps):
                s = t * k / steps
                k1 = gain(s) @ phi_t
                mid = gain(t * (k + 0.5) / steps)
                k2 = mid @ (phi_t + 0.5 * h * k1)
                k3 = mid @ (phi_t + 0.5 * h * k2)
                k4 = gain(min(t * (k + 1) / steps, t)) @ (phi_t + h * k3)
                phi_t = phi_t + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return phi_t, path.mean_at(t) - phi_t @ path.src.mean
