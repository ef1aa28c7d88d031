"""Explicit cubic bound on the surrogate/Wasserstein gap and path splitting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import LocalityViolated
from .gaussian import Gaussian
from .spd import SpdMatrix, as_spd, normalized_commutator, whitened_perturbation

COMMUTING_TOL = 1e-10
MIN_SEGMENTS_GRID = 64
MIN_SEGMENTS_SAFETY = 0.99


@dataclass(frozen=True)
class GapBound:
    """Cubic gap bound for one Gaussian pair.

    ``b_c``, ``b_w`` and ``bound_value`` are ``None`` whenever the pair is
    outside the local regime (``rho_hat >= 1``). ``commuting`` records
    whether the source covariance commutes with the increment, which is the
    hypothesis under which the bound is guaranteed to dominate.
    """

    rho_hat: float
    delta_norm: float
    valid: bool
    commuting: bool
    b_c: Optional[float] = None
    b_w: Optional[float] = None
    bound_value: Optional[float] = None

    @property
    def c_remainder_bound(self) -> Optional[float]:
        return None if self.b_c is None else self.b_c * self.delta_norm**3

    @property
    def w_remainder_bound(self) -> Optional[float]:
        return None if self.b_w is None else self.b_w * self.delta_norm**3


def bound_constants(sigma0, rho_hat: float) -> Tuple[float, float]:
    """Remainder constants (B_C, B_W) for source covariance ``sigma0``."""
    if not rho_hat < 1.0:
        raise LocalityViolated(f"rho_hat = {rho_hat:.6g} is not < 1")
    sigma0 = as_spd(sigma0)
    d = sigma0.dim
    m0, big_m0 = sigma0.min_eig, sigma0.max_eig
    b_c = 0.75 * d * big_m0 / (m0**3 * (1.0 - rho_hat))
    b_w = (
        16.0 * math.sqrt(2.0) * d * big_m0**6 * (1.0 + rho_hat) ** 1.5
        / (m0**8 * (1.0 - rho_hat) ** 4)
    )
    return b_c, b_w


def _gap_bound(sigma0: SpdMatrix, delta: np.ndarray) -> GapBound:
    rho_hat, _ = whitened_perturbation(sigma0, delta)
    delta_norm = float(np.max(np.abs(np.linalg.eigvalsh(delta))))
    commuting = normalized_commutator(sigma0.entries, delta) < COMMUTING_TOL
    if not rho_hat < 1.0:
        return GapBound(rho_hat, delta_norm, False, commuting)
    b_c, b_w = bound_constants(sigma0, rho_hat)
    return GapBound(rho_hat, delta_norm, True, commuting, b_c, b_w, (b_c + b_w) * delta_norm**3)


def cubic_gap_bound(src: Gaussian, dst: Gaussian) -> GapBound:
    """Bound on |C - W2^2| for a component pair; invalid outside rho_hat < 1."""
    return _gap_bound(src.cov, dst.cov.entries - src.cov.entries)


@dataclass(frozen=True, eq=False)
class SplitPlan:
    n_segments: int
    checkpoints: List[Gaussian]
    rho: List[float]
    bounds: List[GapBound]

    @property
    def per_segment(self) -> List[Tuple[float, GapBound]]:
        return list(zip(self.rho, self.bounds))

    @property
    def valid(self) -> bool:
        return all(b.valid for b in self.bounds)

    @property
    def invalid_segments(self) -> List[int]:
        return [k for k, b in enumerate(self.bounds) if not b.valid]

    def segments(self) -> List[Tuple[Gaussian, Gaussian]]:
        return list(zip(self.checkpoints[:-1], self.checkpoints[1:]))


def split_path(src: Gaussian, dst: Gaussian, n: int) -> SplitPlan:
    """Subdivide the linear covariance path into ``n`` equal increments."""
    if n < 1:
        raise ValueError("n must be at least 1")
    delta = dst.cov.entries - src.cov.entries
    step = delta / n
    checkpoints = [src]
    for k in range(1, n):
        s = k / n
        checkpoints.append(
            Gaussian((1.0 - s) * src.mean + s * dst.mean, src.cov.entries + s * delta)
        )
    checkpoints.append(dst)
    bounds = [_gap_bound(checkpoints[k].cov, step) for k in range(n)]
    return SplitPlan(n, checkpoints, [b.rho_hat for b in bounds], bounds)


def min_segments(src: Gaussian, dst: Gaussian) -> int:
    """Smallest N with N > ||dSigma|| / m, m a lower bound on lambda_min along the path.

    ``m`` is the minimum of lambda_min over a uniform grid on the linear
    covariance path, shrunk by a 0.99 safety factor.
    """
    delta = dst.cov.entries - src.cov.entries
    delta_norm = float(np.max(np.abs(np.linalg.eigvalsh(delta))))
    if delta_norm == 0.0:
        return 1
    grid = np.linspace(0.0, 1.0, MIN_SEGMENTS_GRID)
    m_low = min(SpdMatrix(src.cov.entries + s * delta).min_eig for s in grid)
    m_low *= MIN_SEGMENTS_SAFETY
    return int(math.floor(delta_norm / m_low)) + 1


@dataclass(frozen=True)
class SegmentwiseBound:
    valid: bool
    value: Optional[float]
    offending: Tuple[int, ...] = ()


def segmentwise_bound_sum(plan: SplitPlan) -> SegmentwiseBound:
    """Sum of per-segment cubic bounds; invalid if any segment has rho_k >= 1."""
    bad = tuple(plan.invalid_segments)
    if bad:
        return SegmentwiseBound(False, None, bad)
    return SegmentwiseBound(True, float(sum(b.bound_value for b in plan.bounds)))
