"""Per-pair diagnostics rows, regime recommendations and runtime timings."""
from __future__ import annotations

import math
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .bounds import cubic_gap_bound, min_segments
from .gaussian import Gaussian, pair_report
from .mixture import METHOD_PATH, Gmm, MixtureFlow, cost_matrix, global_velocity, sinkhorn
from .paths import GaussianPath
from .scenarios import ScenarioSpec, runtime_mixtures
from .spd import regime_indicators

RHO_MAX = 1.0
COMM_MAX = 0.05

TABLE_COLUMNS = (
    "name", "dim", "rho_hat", "kappa", "dsigma_norm", "comm",
    "w2sq", "c", "gap", "err_w", "err_c",
)
DIAGNOSE_COLUMNS = TABLE_COLUMNS + ("bound_value", "commuting", "min_segments", "recommendation")
RUNTIME_COLUMNS = ("dim", "method", "stage", "median_seconds")
STAGES = ("costs", "sinkhorn", "fields", "velocity")


@dataclass(frozen=True)
class ReportRow:
    name: str
    dim: int
    rho_hat: float
    kappa: float
    dsigma_norm: float
    comm: float
    w2sq: float
    c: float
    gap: float
    err_w: float
    err_c: float
    bound_value: Optional[float] = None
    commuting: bool = False
    min_segments: int = 1
    recommendation: str = "B"

    def values(self, columns: Sequence[str] = DIAGNOSE_COLUMNS) -> list:
        d = asdict(self)
        return [d[c] for c in columns]


def recommend(
    rho_hat: float,
    comm: float,
    bound_value: Optional[float],
    rho_max: float = RHO_MAX,
    comm_max: float = COMM_MAX,
    budget: float = math.inf,
) -> str:
    """"A" inside the local, near-commuting regime with an affordable bound, else "B"."""
    if rho_hat < rho_max and comm < comm_max and bound_value is not None and bound_value <= budget:
        return "A"
    return "B"


def report_row(
    name: str,
    src: Gaussian,
    dst: Gaussian,
    rho_max: float = RHO_MAX,
    comm_max: float = COMM_MAX,
    budget: float = math.inf,
) -> ReportRow:
    delta = dst.cov.entries - src.cov.entries
    ind = regime_indicators(src.cov, delta)
    rep = pair_report(src, dst)
    gb = cubic_gap_bound(src, dst)
    return ReportRow(
        name=name,
        dim=src.dim,
        rho_hat=gb.rho_hat,
        kappa=ind.kappa,
        dsigma_norm=ind.delta_norm,
        comm=ind.comm,
        w2sq=rep.w2_total,
        c=rep.surrogate_total,
        gap=rep.gap,
        err_w=rep.err_w,
        err_c=rep.err_c,
        bound_value=gb.bound_value,
        commuting=gb.commuting,
        min_segments=min_segments(src, dst),
        recommendation=recommend(gb.rho_hat, ind.comm, gb.bound_value, rho_max, comm_max, budget),
    )


def diagnose(src: Gmm, dst: Gmm, **thresholds) -> List[ReportRow]:
    """One row per component pair, named ``"i->j"``."""
    if src.dim != dst.dim:
        raise ValueError(f"dimension mismatch: {src.dim} vs {dst.dim}")
    return [
        report_row(f"{i}->{j}", a, b, **thresholds)
        for i, a in enumerate(src.components)
        for j, b in enumerate(dst.components)
    ]


def bench_table(scenarios: Iterable[ScenarioSpec], **thresholds) -> List[ReportRow]:
    rows = []
    for spec in scenarios:
        src, dst = spec.build()
        rows.append(report_row(spec.name, src, dst, **thresholds))
    return rows


def _time(fn, repeats: int):
    samples, out = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples), out


def _stage_times(src: Gmm, dst: Gmm, method: str, repeats: int, probes: np.ndarray) -> dict:
    kind = METHOD_PATH[method]
    t_cost, cost = _time(lambda: cost_matrix(src, dst, method), repeats)
    t_ot, coupling = _time(lambda: sinkhorn(src.weights, dst.weights, cost), repeats)
    t_fields, paths = _time(
        lambda: [[GaussianPath(kind, a, b) for b in dst.components] for a in src.components],
        repeats,
    )
    flow = MixtureFlow(src, dst, coupling, paths, method)
    t_vel, _ = _time(lambda: global_velocity(flow, 0.5, probes), repeats)
    return dict(costs=t_cost, sinkhorn=t_ot, fields=t_fields, velocity=t_vel)


def bench_runtime(
    dims: Sequence[int],
    scenario: int = 1,
    repeats: int = 5,
    n_probes: int = 64,
    seed: int = 0,
) -> List[tuple]:
    """Median wall-clock seconds per (dim, method, stage); ODE integration excluded.

    Stages: pairwise costs, Sinkhorn coupling, pairwise path/field
    construction, and one evaluation of the global velocity on
    ``n_probes`` points at t = 1/2. Runs are sequential.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    rows = []
    for d in dims:
        if d < 1:
            raise ValueError("dims must be positive")
        src, dst = runtime_mixtures(scenario, d, seed)
        probes = np.random.default_rng([seed, d]).standard_normal((n_probes, d))
        for method in ("A", "B"):
            times = _stage_times(src, dst, method, repeats, probes)
            rows.extend((d, method, stage, times[stage]) for stage in STAGES)
    return rows
