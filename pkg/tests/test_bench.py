import math
import time

import numpy as np
import pytest

from gmmflow.bench import RUNTIME_COLUMNS, STAGES, bench_runtime, bench_table, diagnose, recommend
from gmmflow.gaussian import Gaussian
from gmmflow.mixture import Gmm
from gmmflow.scenarios import (
    GENERATORS,
    ScenarioSpec,
    builtin_table_scenarios,
    commuting_local_scenarios,
    runtime_mixtures,
    whitened_pair,
)
from gmmflow.spd import normalized_commutator, whitened_perturbation


@pytest.fixture(scope="module")
def table():
    return bench_table(builtin_table_scenarios())


def test_builtin_row_one_two_decimals(table):
    row = table[0]
    got = [row.rho_hat, row.kappa, row.dsigma_norm, row.comm, row.w2sq, row.c, row.gap, row.err_w, row.err_c]
    want = [3.00, 1.00, 3.00, 0.00, 5.00, 5.04, 0.04, 1.25, 1.21]
    assert [round(v, 2) for v in got] == want
    assert row.recommendation == "B" and row.min_segments == 4


def test_row_invariants(table):
    for row in table:
        assert abs(row.gap - (row.c - row.w2sq)) <= 1e-12 * max(1.0, row.c)
        assert row.err_w >= 0 and row.err_c >= 0


def test_near_boundary_analogue_gap_dominates(table):
    row = next(r for r in table if "Near-SPD" in r.name)
    assert row.kappa == pytest.approx(1000.0)
    assert row.rho_hat == pytest.approx(93.05, abs=0.01)
    assert row.gap / row.w2sq > 1.0
    local = [r.gap for r in table if r.rho_hat < 2]
    assert row.gap > 100 * max(local)


def test_indicator_targets_of_fitted_analogues(table):
    by_name = {r.name: r for r in table}
    r = by_name["analogue-of-2D non-comm"]
    assert (round(r.rho_hat, 2), round(r.kappa, 2), round(r.dsigma_norm, 2), round(r.comm, 2)) == (1.68, 9.0, 5.76, 0.19)
    r = by_name["analogue-of-kappa=1e6 stress test"]
    assert (round(r.rho_hat, 2), round(r.dsigma_norm, 2), round(r.comm, 2)) == (0.98, 1.28, 0.43)
    assert r.kappa == pytest.approx(1e6)


def test_commuting_local_rows_respect_bound():
    rows = bench_table(builtin_table_scenarios() + commuting_local_scenarios())
    checked = 0
    for row in rows:
        if row.commuting and row.rho_hat < 1:
            assert abs(row.gap) <= row.bound_value
            checked += 1
    assert checked >= 3


def test_generators_deterministic_and_spd():
    specs = [
        ScenarioSpec("t", 6, "toeplitz", dict(decay0=0.7, decay1=0.2)),
        ScenarioSpec("f", 8, "factor", dict(factors=2, noise=0.3), seed=1),
        ScenarioSpec("w", 5, "wishart", dict(dof=20), seed=2),
        ScenarioSpec("r", 4, "seeded-random", dict(kappa=5.0, rho=0.6, commuting=True), seed=3),
    ]
    for spec in specs:
        (a0, a1), (b0, b1) = spec.build(), spec.build()
        assert np.array_equal(a0.cov.entries, b0.cov.entries)
        assert np.array_equal(a1.cov.entries, b1.cov.entries)
        assert a0.cov.min_eig > 0 and a1.cov.min_eig > 0
    with pytest.raises(ValueError):
        ScenarioSpec("x", 2, "unknown")
    assert set(GENERATORS) == {"explicit", "toeplitz", "factor", "wishart", "seeded-random"}


def test_whitened_pair_hits_targets():
    rng = np.random.default_rng(0)
    s0, s1 = whitened_pair(rng, 6, kappa=10.0, rho=0.7, c_low=-0.7, commuting=True)
    rho, _ = whitened_perturbation(s0, s1 - s0)
    assert rho == pytest.approx(0.7, rel=1e-10)
    assert np.linalg.cond(s0) == pytest.approx(10.0, rel=1e-8)
    assert normalized_commutator(s0, s1 - s0) < 1e-10


def test_recommend_rules():
    assert recommend(0.5, 0.01, 1.0) == "A"
    assert recommend(1.0, 0.01, 1.0) == "B"
    assert recommend(0.5, 0.05, 1.0) == "B"
    assert recommend(0.5, 0.01, None) == "B"
    assert recommend(0.5, 0.01, 2.0, budget=1.0) == "B"
    assert recommend(0.5, 0.2, 1.0, comm_max=0.3) == "A"


def test_diagnose_pairs_named_and_ordered():
    g = Gaussian([0.0], [[1.0]])
    rows = diagnose(Gmm([0.5, 0.5], [g, Gaussian([1.0], [[2.0]])]), Gmm([1.0], [g]))
    assert [r.name for r in rows] == ["0->0", "1->0"]
    assert rows[0].w2sq == 0.0 and rows[0].recommendation == "A"


def test_runtime_mixtures_shape():
    for sc in (1, 2, 3):
        src, dst = runtime_mixtures(sc, 7)
        assert src.n_components == dst.n_components == 2 and src.dim == 7
    with pytest.raises(ValueError):
        runtime_mixtures(4, 2)


def test_runtime_schema_stable_and_fast():
    t0 = time.perf_counter()
    one = bench_runtime([2], scenario=2, repeats=1)
    elapsed = time.perf_counter() - t0
    five = bench_runtime([2], scenario=2, repeats=5)
    assert elapsed < 1.0
    assert [r[:3] for r in one] == [r[:3] for r in five]
    assert len(RUNTIME_COLUMNS) == len(one[0])
    assert {r[2] for r in one} == set(STAGES)
    assert all(r[3] >= 0 and math.isfinite(r[3]) for r in one + five)
    with pytest.raises(ValueError):
        bench_runtime([2], repeats=0)
