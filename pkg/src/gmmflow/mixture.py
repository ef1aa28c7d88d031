"""Mixture-level transport: pairwise costs, entropic coupling, and the mixture flow."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateDensity, NotSpd, NumericalUnderflow
from .gaussian import Gaussian, surrogate_cost, w2_squared
from .paths import GaussianPath, PathKind

WEIGHT_TOL = 1e-12
LOG_UNDERFLOW = -745.0
WARM_SWEEPS = 20

METHOD_PATH = {"A": PathKind.LINEAR, "B": PathKind.GEODESIC}


def _check_method(method: str) -> str:
    method = str(method).upper()
    if method not in METHOD_PATH:
        raise ValueError(f"unknown method {method!r}; expected 'A' or 'B'")
    return method


@dataclass(frozen=True, eq=False)
class Gmm:
    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        comps = tuple(self.components)
        if len(comps) == 0:
            raise ValueError("a mixture needs at least one component")
        if w.shape[0] != len(comps):
            raise ValueError(f"{w.shape[0]} weights for {len(comps)} components")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must be nonnegative and sum to 1 (sum = {w.sum()!r})")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise ValueError(f"components have mixed dimensions {sorted(dims)}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_arrays(cls, weights, means, covariances) -> "Gmm":
        return cls(weights, [Gaussian(m, c) for m, c in zip(means, covariances)])

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def n_components(self) -> int:
        return len(self.components)

    def logpdf(self, x) -> np.ndarray:
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights)
        terms = np.stack([lw + c.logpdf(x) for lw, c in zip(logw, self.components)], axis=-1)
        return logsumexp(terms, axis=-1)

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def mean(self) -> np.ndarray:
        return sum(w * c.mean for w, c in zip(self.weights, self.components))

    def covariance(self) -> np.ndarray:
        mu = self.mean()
        out = np.zeros((self.dim, self.dim))
        for w, c in zip(self.weights, self.components):
            dm = c.mean - mu
            out += w * (c.cov.entries + np.outer(dm, dm))
        return out


def cost_matrix(src: Gmm, dst: Gmm, method: str = "A") -> np.ndarray:
    """Pairwise component costs: surrogate (A) or exact W2^2 (B)."""
    method = _check_method(method)
    if src.dim != dst.dim:
        raise ValueError(f"dimension mismatch: {src.dim} vs {dst.dim}")
    pair_cost = surrogate_cost if method == "A" else w2_squared
    out = np.empty((src.n_components, dst.n_components))
    for i, a in enumerate(src.components):
        for j, b in enumerate(dst.components):
            try:
                out[i, j] = pair_cost(a, b)
            except NotSpd as exc:
                raise NotSpd(f"pair ({i}, {j}): {exc}") from exc
    return out


@dataclass(frozen=True, eq=False)
class Coupling:
    pi: np.ndarray
    cost: np.ndarray
    epsilon: float
    iterations_used: int
    marginal_error: float
    objective: float

    @property
    def transport_cost(self) -> float:
        return float(np.sum(self.pi * self.cost))


def _plan(f, g, cost, epsilon):
    with np.errstate(invalid="ignore"):
        logp = (f[:, None] + g[None, :] - cost) / epsilon
    logp = np.where(np.isnan(logp), -np.inf, logp)
    return np.exp(logp)


def _sweep(f, g, loga, logb, cost, epsilon):
    g = epsilon * (logb - logsumexp((f[:, None] - cost) / epsilon, axis=0))
    f = epsilon * (loga - logsumexp((g[None, :] - cost) / epsilon, axis=1))
    return f, g


def _marginal_error(pi, a, b) -> float:
    return max(np.abs(pi.sum(axis=1) - a).sum(), np.abs(pi.sum(axis=0) - b).sum())


def _schedule(cost, epsilon):
    """Halving epsilon schedule from the cost spread down to ``epsilon``."""
    finite = cost[np.isfinite(cost)]
    spread = float(finite.max() - finite.min()) if finite.size else 0.0
    levels = max(0, int(np.ceil(np.log2(max(spread, epsilon) / epsilon))))
    return [epsilon * 2.0**k for k in range(levels, 0, -1)]


def sinkhorn(
    a: Sequence[float],
    b: Sequence[float],
    cost,
    epsilon: float = 5e-2,
    max_iter: int = 5000,
    tol: float = 1e-9,
) -> Coupling:
    """Entropic OT plan between weight vectors by log-domain Sinkhorn.

    Potentials are warm-started by epsilon scaling: a few sweeps at each
    of a halving sequence of larger regularizations, then sweeps at
    ``epsilon`` itself. Every sweep counts against ``max_iter``.
    Convergence is judged on the l1 marginal violation
    ``max(||pi 1 - a||_1, ||pi^T 1 - b||_1)`` at the target epsilon. If
    ``max_iter`` is reached the plan is returned as is, with the achieved
    error in ``marginal_error``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if cost.shape != (a.size, b.size):
        raise ValueError(f"cost has shape {cost.shape}, expected {(a.size, b.size)}")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix has non-finite entries")
    with np.errstate(divide="ignore"):
        loga, logb = np.log(a), np.log(b)
    f = np.zeros_like(a)
    g = np.zeros_like(b)
    it = 0
    for eps_k in _schedule(cost, epsilon):
        for _ in range(WARM_SWEEPS):
            if it >= max_iter - 1:
                break
            f, g = _sweep(f, g, loga, logb, cost, eps_k)
            it += 1
    err = np.inf
    while it < max_iter:
        f, g = _sweep(f, g, loga, logb, cost, epsilon)
        it += 1
        err = _marginal_error(_plan(f, g, cost, epsilon), a, b)
        if not np.isfinite(err):
            raise NumericalUnderflow(
                "Sinkhorn scalings degenerated; increase epsilon relative to the cost scale"
            )
        if err <= tol:
            break
    pi = _plan(f, g, cost, epsilon)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where(pi > 0, pi * (np.log(pi) - 1.0), 0.0)
    objective = float(np.sum(pi * cost) + epsilon * np.sum(ent))
    return Coupling(pi, cost, float(epsilon), it, float(err), objective)


@dataclass(frozen=True, eq=False)
class MixtureFlow:
    src: Gmm
    dst: Gmm
    coupling: Coupling
    pair_paths: List[List[GaussianPath]]
    method: str

    @property
    def dim(self) -> int:
        return self.src.dim

    def active_pairs(self):
        """(i, j, log pi_ij, path) for pairs with positive plan mass."""
        pi = self.coupling.pi
        for i, row in enumerate(self.pair_paths):
            for j, path in enumerate(row):
                if pi[i, j] > 0:
                    yield i, j, float(np.log(pi[i, j])), path


def build_flow(
    src: Gmm,
    dst: Gmm,
    method: str = "A",
    epsilon: float = 5e-2,
    max_iter: int = 5000,
    tol: float = 1e-9,
) -> MixtureFlow:
    """Assemble costs, coupling and pairwise paths into a mixture flow."""
    method = _check_method(method)
    cost = cost_matrix(src, dst, method)
    coupling = sinkhorn(src.weights, dst.weights, cost, epsilon, max_iter, tol)
    kind = METHOD_PATH[method]
    paths = [[GaussianPath(kind, a, b) for b in dst.components] for a in src.components]
    return MixtureFlow(src, dst, coupling, paths, method)


def _terms(flow: MixtureFlow, t: float, x):
    """Log-weighted component densities and fields at time t.

    Returns ``(index, logterms, fields)`` where ``logterms`` has shape
    (..., P) over the P active pairs.
    """
    index, logs, fields = [], [], []
    for i, j, logpi, path in flow.active_pairs():
        g = path.at(t)
        index.append((i, j))
        logs.append(logpi + g.logpdf(x))
        fields.append(path.field(t))
    return index, np.stack(logs, axis=-1), fields


def density_at(flow: MixtureFlow, t: float, x) -> np.ndarray:
    """Interpolating mixture density sum_ij pi_ij N(x | mu_ij(t), Sigma_ij(t))."""
    _, logs, _ = _terms(flow, t, x)
    return np.exp(logsumexp(logs, axis=-1))


def _gamma(logs: np.ndarray) -> np.ndarray:
    top = np.max(logs, axis=-1, keepdims=True)
    if np.any(top < LOG_UNDERFLOW):
        raise DegenerateDensity("every mixture term underflows at the query point")
    w = np.exp(logs - top)
    return w / w.sum(axis=-1, keepdims=True)


def responsibilities(flow: MixtureFlow, t: float, x) -> np.ndarray:
    """Posterior pair weights gamma_ij(t, x) as a (..., K0, K1) array."""
    index, logs, _ = _terms(flow, t, x)
    gam = _gamma(logs)
    out = np.zeros(gam.shape[:-1] + flow.coupling.pi.shape)
    for p, (i, j) in enumerate(index):
        out[..., i, j] = gam[..., p]
    return out


def global_velocity(flow: MixtureFlow, t: float, x) -> np.ndarray:
    """Responsibility-weighted blend of the pairwise velocity fields."""
    x = np.asarray(x, dtype=float)
    _, logs, fields = _terms(flow, t, x)
    gam = _gamma(logs)
    out = np.zeros(np.broadcast_shapes(x.shape, (flow.dim,)))
    for p, f in enumerate(fields):
        out += gam[..., p, None] * f(x)
    return out


def mixture_continuity_residual(
    flow: MixtureFlow, t: float, x, h_t: float = 1e-4, h_x: float = 1e-4
) -> float:
    """|d_t rho + div(rho u)| at (t, x) by central differences in t and x."""
    x = np.asarray(x, dtype=float)
    dt = (density_at(flow, t + h_t, x) - density_at(flow, t - h_t, x)) / (2.0 * h_t)
    div = 0.0
    for k in range(flow.dim):
        e = np.zeros(flow.dim)
        e[k] = h_x
        flux = []
        for y in (x + e, x - e):
            flux.append(density_at(flow, t, y) * global_velocity(flow, t, y)[k])
        div += (flux[0] - flux[1]) / (2.0 * h_x)
    return float(abs(dt + div))


__all__ = [
    "Coupling",
    "Gmm",
    "MixtureFlow",
    "build_flow",
    "cost_matrix",
    "density_at",
    "global_velocity",
    "mixture_continuity_residual",
    "responsibilities",
    "sinkhorn",
]
