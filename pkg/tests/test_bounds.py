import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmmflow.bounds import (
    bound_constants,
    cubic_gap_bound,
    min_segments,
    segmentwise_bound_sum,
    split_path,
)
from gmmflow.errors import LocalityViolated
from gmmflow.gaussian import Gaussian, pair_report

from pairs import commuting_pair, random_pair

ROW1 = (Gaussian([0.0], [[1.0]]), Gaussian([2.0], [[4.0]]))


def test_constants_hand_evaluated():
    # Sigma0 = diag(1, 2), rho = 1/2: B_C = 3/4*2*2/(1*0.5), B_W = 16 sqrt2 * 2 * 64 * 1.5^1.5 / 0.5^4
    b_c, b_w = bound_constants(np.diag([1.0, 2.0]), 0.5)
    assert b_c == pytest.approx(6.0)
    assert b_w == pytest.approx(16 * math.sqrt(2) * 2 * 64 * 1.5**1.5 * 16)


def test_constants_require_locality():
    for rho in (1.0, 1.5):
        with pytest.raises(LocalityViolated):
            bound_constants(np.eye(2), rho)


def test_row_one_outside_local_regime():
    gb = cubic_gap_bound(*ROW1)
    assert gb.rho_hat == 3.0 and gb.delta_norm == 3.0
    assert not gb.valid and gb.bound_value is None and gb.commuting


def test_boundary_rho_exactly_one_is_invalid():
    gb = cubic_gap_bound(Gaussian([0.0], [[1.0]]), Gaussian([0.0], [[2.0]]))
    assert gb.rho_hat == 1.0 and not gb.valid


def test_noncommuting_flag():
    rng = np.random.default_rng(3)
    src, dst = random_pair(rng, 3)
    gb = cubic_gap_bound(src, dst)
    assert not gb.commuting


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([1, 2, 4]), st.integers(0, 2**31 - 1))
def test_bound_dominates_commuting_gap(d, seed):
    src, dst = commuting_pair(np.random.default_rng(seed), d, rho_max=0.9)
    gb = cubic_gap_bound(src, dst)
    assert gb.valid and gb.commuting
    rep = pair_report(src, dst)
    assert abs(rep.gap) <= gb.bound_value
    assert rep.err_c <= gb.c_remainder_bound
    assert rep.err_w <= gb.w_remainder_bound


def test_split_row_one_n4():
    plan = split_path(*ROW1, 4)
    np.testing.assert_allclose(plan.rho, [0.75, 3 / 7, 0.3, 3 / 13], rtol=1e-14)
    assert plan.valid
    assert plan.checkpoints[-1] is ROW1[1]
    assert [c.cov.entries[0, 0] for c in plan.checkpoints] == pytest.approx([1, 1.75, 2.5, 3.25, 4])
    total = segmentwise_bound_sum(plan)
    gap_sum = sum(pair_report(a, b).gap for a, b in plan.segments())
    assert total.valid and gap_sum <= total.value


def test_split_row_one_n3_invalid():
    plan = split_path(*ROW1, 3)
    assert plan.rho[0] == pytest.approx(1.0)
    assert plan.invalid_segments == [0]
    total = segmentwise_bound_sum(plan)
    assert not total.valid and total.value is None and total.offending == (0,)


def test_split_rejects_zero_segments():
    with pytest.raises(ValueError):
        split_path(*ROW1, 0)


def test_min_segments():
    assert min_segments(*ROW1) == 4
    g = ROW1[0]
    assert min_segments(g, g) == 1
    # shrinking path: lambda_min along the path reaches 0.25
    assert min_segments(ROW1[1], Gaussian([0.0], [[0.25]])) == math.floor(3.75 / (0.25 * 0.99)) + 1


def test_min_segments_gives_valid_split():
    rng = np.random.default_rng(12)
    for _ in range(20):
        src, dst = random_pair(rng, 3, kappa_max=5.0)
        assert split_path(src, dst, min_segments(src, dst)).valid


def test_gap_sum_shrinks_with_refinement():
    src = Gaussian(np.zeros(2), np.diag([2.0, 3.0]))
    dst = Gaussian(np.zeros(2), np.diag([1.6, 3.5]))
    sums = [segmentwise_bound_sum(split_path(src, dst, n)).value for n in (4, 8, 16)]
    assert sums[0] > sums[1] > sums[2]
