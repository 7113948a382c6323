import math

import numpy as np
import pytest
from scipy import integrate, stats

from bridgecut import pointproc as pp
from bridgecut.errors import ParameterError
from bridgecut.randkit import BROWNIAN, StableParams


def d_sets(n, xi, seed):
    rng = np.random.default_rng(seed)
    return [pp.construct_points_D(xi, rng) for _ in range(n)], rng


def test_point_set_validation_and_csv():
    with pytest.raises(ParameterError):
        pp.MarkedPointSet([1.0, -1.0], [1.0, 1.0])
    with pytest.raises(ParameterError):
        pp.MarkedPointSet([1.0], [1.0, 2.0])
    ps = pp.MarkedPointSet([2.0, 1.0], [0.5, 0.25], "X-biased")
    assert ps.to_csv().splitlines() == ["x,y,order_index", "2.0,0.5,0", "1.0,0.25,1"]
    assert ps.psi == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("xi", [0.5, 2.0])
def test_sums_follow_gamma_and_exponential(xi):
    sets, _ = d_sets(4000, xi, 1)
    sx = [s.sum_x + s.dropped_mass for s in sets]
    sy = [s.sum_y for s in sets]
    assert stats.kstest(sx, stats.gamma(0.5, scale=1 / xi).cdf).pvalue > 1e-3
    assert stats.kstest(sy, stats.expon(scale=1 / (math.sqrt(2) * math.sqrt(xi))).cdf).pvalue > 1e-3


def test_first_y_share_is_uniform_and_independent():
    sets, _ = d_sets(4000, 1.0, 2)
    share = np.array([s.y[0] / s.sum_y for s in sets])
    total = np.array([s.sum_y for s in sets])
    assert stats.kstest(share, "uniform").pvalue > 1e-3
    assert abs(stats.spearmanr(share, total)[0]) < 0.06


def test_reorder_biased():
    rng = np.random.default_rng(3)
    single = pp.MarkedPointSet([1.0], [2.0])
    out = pp.reorder_biased(single, "Y", rng)
    assert out.x.tolist() == [1.0] and out.order_tag == "Y-biased"
    two = pp.MarkedPointSet([1.0, 1.0], [2.0, 1.0])
    hits = sum(pp.reorder_biased(two, "Y", rng).y[0] == 2.0 for _ in range(6000))
    assert abs(hits / 6000 - 2 / 3) < 0.02
    with pytest.raises(ParameterError):
        pp.reorder_biased(pp.MarkedPointSet([], []), "X", rng)
    with pytest.raises(ParameterError):
        pp.reorder_biased(two, "Z", rng)


def test_x_biased_normalised_sequence_is_gem():
    sets, rng = d_sets(3000, 1.0, 4)
    first = [pp.reorder_biased(s, "X", rng).x[0] / (s.sum_x + s.dropped_mass) for s in sets]
    assert stats.kstest(first, stats.beta(1, 0.5).cdf).pvalue > 1e-3


def test_palm_checks_small():
    sets, rng = d_sets(8000, 1.0, 5)
    ysets = [pp.reorder_biased(s, "Y", rng) for s in sets]
    reports = pp.palm_checks(sets, ysets, math.sqrt(2), level=0.001, tol=0.02)
    assert all(r.passed for r in reports)
    assert all(r.warnings for r in reports)
    assert reports[2].statistic > 5
    assert len(reports) == 4


def test_two_point_palm_detects_uniform_shuffle():
    sets, rng = d_sets(6000, 1.0, 13)
    shuffled = []
    for s in sets:
        perm = rng.permutation(len(s))
        shuffled.append(pp.MarkedPointSet(s.x[perm], s.y[perm]))
    assert pp.palm_two_point_check(sets, math.sqrt(2), level=0.001).passed
    assert not pp.palm_two_point_check(shuffled, math.sqrt(2), level=0.001).passed


def test_palm_check_detects_wrong_order():
    # under Y-biased order Y_1 is not a plain (X-biased) pick, but it still is a Y-size-biased
    # pick; a uniform reshuffle breaks the identity
    sets, rng = d_sets(6000, 1.0, 6)
    shuffled = []
    for s in sets:
        perm = rng.permutation(len(s))
        shuffled.append(pp.MarkedPointSet(s.x[perm], s.y[perm]))
    table = pp.first_point_table(shuffled)
    assert not pp.palm_size_biased_check(table, math.sqrt(2)).passed


def test_small_jump_rates_match_quadrature():
    d, xi = 1e-3, 1.5
    k = 1 / math.sqrt(2 * math.pi)
    marked, mean = pp.small_jump_rates(xi, d)
    assert marked == pytest.approx(integrate.quad(lambda x: -math.expm1(-xi * x) * k * x ** -1.5, 0, d)[0], rel=1e-8)
    assert mean == pytest.approx(integrate.quad(lambda x: math.exp(-xi * x) * k * x ** -0.5, 0, d)[0], rel=1e-8)
    big = integrate.quad(lambda x: -math.expm1(-xi * x) * k * x ** -1.5, d, np.inf)[0]
    assert marked + big == pytest.approx(math.sqrt(2 * xi), rel=1e-7)
    assert pp.levy_tail(d) == pytest.approx(integrate.quad(lambda x: k * x ** -1.5, d, np.inf)[0], rel=1e-8)


def test_default_cutoff_meets_budget():
    for xi in (0.5, 1.0, 2.0):
        delta = pp.default_cutoff(xi)
        _, mean = pp.small_jump_rates(xi, delta)
        assert mean / math.sqrt(2 * xi) <= 1.01e-4 * 0.5 / xi


def test_lemma_gp():
    reports = pp.verify_lemma_gp(1.0, 3000, np.random.default_rng(7), level=0.001)
    assert len(reports) == 3
    assert all(r.passed for r in reports), [r.line() for r in reports]


def test_lemma_gp_general_alpha_skips_brownian_grid():
    p = StableParams(0.7, 1.0)
    reports = pp.verify_lemma_gp(1.0, 1500, np.random.default_rng(8), p, delta=1e-6, level=0.001)
    assert len(reports) == 2 and all(r.passed for r in reports)


def test_lemma_gp_warns_on_coarse_cutoff():
    reports = pp.verify_lemma_gp(1.0, 200, np.random.default_rng(11), delta=0.05, level=0.001)
    assert all(r.warnings for r in reports)


def test_taurho1_cells_sum_to_one():
    t = [0.0, 0.1, 0.5, np.inf]
    l = [0.0, 0.3, 1.0, np.inf]
    assert pp.taurho1_cell_probabilities(1.0, t, l).sum() == pytest.approx(1.0, abs=1e-7)


def test_stable_corollary():
    L, first = pp.stable_corollary_sample(3000, np.random.default_rng(9))
    assert stats.kstest(L, lambda x: 1 - np.exp(-x * x / 2)).pvalue > 1e-3
    assert stats.kstest(first, "uniform").pvalue > 1e-3
    assert abs(stats.spearmanr(first, L)[0]) < 0.07


def test_t_construction_matches_d_construction():
    rng = np.random.default_rng(10)
    T = [pp.construct_points_T(1.0, 2 ** 12, rng) for _ in range(600)]
    D = [pp.construct_points_D(1.0, rng) for _ in range(3000)]
    for f in (lambda s: s.sum_x, lambda s: s.sum_y, lambda s: s.y.max()):
        assert stats.ks_2samp([f(s) for s in T], [f(s) for s in D]).pvalue > 1e-3
    with pytest.raises(ParameterError):
        pp.construct_points_T(1.0, 64, rng, StableParams(0.3, 1.0))
    with pytest.raises(ParameterError):
        pp.construct_points_D(0.0, rng)
