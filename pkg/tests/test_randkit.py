import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from bridgecut.errors import DomainError, ParameterError
from bridgecut.randkit import (
    BROWNIAN,
    LengthSequence,
    RngStream,
    StableParams,
    beta_density,
    cdf_T1,
    cdf_tau_br,
    density_L1_bridge,
    density_T1,
    density_tau_br,
    gem_lengths,
    intensity_T_lengths,
    joint_density_split,
    levy_density,
    rank_lengths,
    replicate_streams,
    sample_beta,
    sample_gamma,
    sample_stable,
    size_biased_order,
    split_integral,
    stable_density,
)
from bridgecut.randkit.densities import density_T1, joint_density_T1_split
from bridgecut.statlab import ks_one_sample, ks_two_sample


def gen(seed, sid=0):
    return RngStream(seed, sid)


def test_stream_determinism():
    a = RngStream(11, 3).generator.standard_normal(50)
    b = RngStream(11, 3).generator.standard_normal(50)
    c = RngStream(11, 4).generator.standard_normal(50)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    streams = replicate_streams(11, 3, offset=2)
    assert [s.stream_id for s in streams] == [2, 3, 4]


def test_streams_look_independent():
    x = RngStream(5, 0).generator.standard_normal(20000)
    y = RngStream(5, 1).generator.standard_normal(20000)
    assert abs(np.corrcoef(x, y)[0, 1]) < 4 / math.sqrt(20000)


def test_beta_sampler_and_density():
    x = sample_beta(1.0, 0.5, gen(1), size=200000)
    assert abs(x.mean() - 2 / 3) < 0.004
    assert beta_density(0.25, 1.0, 0.5) == pytest.approx(0.5 * 0.75 ** -0.5, rel=1e-12)
    assert integrate.quad(lambda u: beta_density(u, 2.0, 3.0), 0, 1)[0] == pytest.approx(1, abs=1e-8)
    with pytest.raises(ParameterError):
        sample_beta(0.0, 1.0, gen(1))


def test_gamma_sampler():
    x = sample_gamma(2.0, gen(2), size=200000)
    assert abs(x.var() - 2.0) < 0.05
    e = sample_gamma(1.0, gen(3), size=200000)
    assert abs(e.mean() - 1.0) < 0.01
    with pytest.raises(ParameterError):
        sample_gamma(-1.0, gen(1))


def test_beta_gamma_independence():
    g = gen(4).generator
    ga = g.gamma(1.5, size=100000)
    gb = g.gamma(2.0, size=100000)
    ratio, total = ga / (ga + gb), ga + gb
    r = np.corrcoef(ratio > 0.4, total > 3.0)[0, 1]
    assert abs(r) < 4 / math.sqrt(100000)


def test_stable_laplace_transform():
    tau = sample_stable(BROWNIAN, 1.0, gen(5), size=1_000_000)
    for xi in (0.5, 1.0, 2.0):
        v = np.exp(-xi * tau)
        se = v.std() / math.sqrt(v.size)
        assert abs(v.mean() - math.exp(-BROWNIAN.c * xi ** 0.5)) < 4 * se


def test_stable_laplace_general_alpha():
    p = StableParams(0.3, 1.7)
    tau = sample_stable(p, 0.8, gen(6), size=400000)
    v = np.exp(-tau)
    se = v.std() / math.sqrt(v.size)
    assert abs(v.mean() - math.exp(-0.8 * 1.7)) < 4 * se


def test_stable_matches_levy_and_inverse_square_normal():
    tau = sample_stable(BROWNIAN, 1.0, gen(7), size=20000)
    # f_1 is the law of 1/N^2, whose cdf is 2 * normal tail at t^(-1/2)
    cdf = lambda t: 2 * stats.norm.sf(t ** -0.5)
    assert ks_one_sample(tau, cdf).passed
    n = gen(8).generator.standard_normal(20000)
    assert ks_two_sample(tau, n ** -2.0).passed


def test_stable_density_brownian_closed_form():
    t = np.array([0.1, 0.5, 2.0, 9.0])
    assert np.allclose(stable_density(t, 1.3), levy_density(1.3, t), rtol=1e-12)


def test_kanter_density_near_half_matches_levy():
    p = StableParams(0.5 - 1e-9, math.sqrt(2.0))
    for t in (0.2, 1.0, 4.0):
        assert stable_density(t, 1.0, p) == pytest.approx(levy_density(1.0, t), rel=1e-6)


def test_bridge_local_time_density():
    ell = np.array([0.3, 1.0, 2.5])
    assert np.allclose(density_L1_bridge(ell), ell * np.exp(-ell ** 2 / 2), rtol=1e-12)
    p = StableParams(0.3, 1.0)
    assert integrate.quad(lambda l: density_L1_bridge(l, p), 0, np.inf)[0] == pytest.approx(1, abs=1e-6)


def test_gem_first_stick():
    for theta, target in ((1.0, 0.5), (0.5, 2 / 3)):
        q1 = np.array([gem_lengths(theta, rng=gen(9, i)).values[0] for i in range(4000)])
        assert abs(q1.mean() - target) < 4 * q1.std() / math.sqrt(q1.size)


def test_gem_law_and_second_stick():
    seqs = [gem_lengths(0.5, rng=gen(12, i)) for i in range(5000)]
    q1 = np.array([s.values[0] for s in seqs])
    q2 = np.array([s.values[1] for s in seqs])
    cdf = lambda u: stats.beta.cdf(u, 1, 0.5)
    assert ks_one_sample(q1, cdf).passed
    w2 = q2 / (1 - q1)
    assert ks_one_sample(w2, cdf).passed
    assert ks_one_sample(w2[q1 < 0.5], cdf).passed
    assert ks_one_sample(w2[q1 >= 0.5], cdf).passed


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0.2, 5.0), tol=st.floats(1e-12, 1e-3), seed=st.integers(0, 2**32))
def test_gem_mass_is_conserved(theta, tol, seed):
    s = gem_lengths(theta, tol, rng=gen(seed))
    assert abs(math.fsum(s.values) + s.residual_mass - 1.0) < 1e-12
    assert s.residual_mass < tol
    assert np.all(s.values > 0)


def test_gem_rejects_bad_tolerance():
    with pytest.raises(ParameterError):
        gem_lengths(1.0, 0.0)
    with pytest.raises(ParameterError):
        gem_lengths(-1.0)


def test_rank_lengths():
    r = rank_lengths(LengthSequence([0.2, 0.5, 0.3]))
    assert r.values.tolist() == [0.5, 0.3, 0.2]
    assert r.order_tag == "ranked"
    assert rank_lengths(r).values.tolist() == r.values.tolist()


def test_rank_then_size_bias_round_trip():
    firsts = []
    for i in range(5000):
        g = gen(13, i).generator
        s = rank_lengths(gem_lengths(0.5, 1e-10, rng=g))
        firsts.append(s.values[size_biased_order(s.values, g)[0]])
    direct = [gem_lengths(0.5, rng=gen(14, i)).values[0] for i in range(5000)]
    assert ks_two_sample(firsts, direct).passed


def test_size_biased_order_frequencies():
    g = gen(15).generator
    counts = {}
    for _ in range(30000):
        key = tuple(size_biased_order([1, 1, 1], g))
        counts[key] = counts.get(key, 0) + 1
    assert set(counts) == set(permutations(range(3)))
    assert all(abs(c / 30000 - 1 / 6) < 0.01 for c in counts.values())
    first = np.array([size_biased_order([2, 1], g)[0] for _ in range(30000)])
    assert abs(np.mean(first == 0) - 2 / 3) < 0.01
    order = np.array([tuple(size_biased_order([3, 1], g)) == (0, 1) for _ in range(30000)])
    assert abs(order.mean() - 3 / 4) < 0.01


def test_size_biased_order_errors():
    with pytest.raises(ParameterError):
        size_biased_order([])
    with pytest.raises(ParameterError):
        size_biased_order([1.0, 0.0])


def test_density_tau_br_values():
    assert density_tau_br(0.5, 0.37) == pytest.approx(1.0, abs=1e-14)
    expected = (3 / 16) / (2 * (3 / 64 + 9 / 64) ** 1.5)
    assert density_tau_br(0.25, 0.25) == pytest.approx(expected, rel=1e-14)
    for u in (0.1, 0.3, 0.8):
        assert integrate.quad(lambda x: density_tau_br(u, x), 0, 1)[0] == pytest.approx(1, abs=1e-8)
        xs = np.array([0.2, 0.6, 0.9])
        num = [integrate.quad(lambda x: density_tau_br(u, x), 0, v)[0] for v in xs]
        assert np.allclose(cdf_tau_br(u, xs), num, atol=1e-10)
    with pytest.raises(DomainError):
        density_tau_br(0.0, 0.5)
    with pytest.raises(DomainError):
        density_tau_br(0.5, 1.0)


def test_density_tau_br_general_alpha_reduces_to_closed_form():
    assert density_tau_br(0.3, 0.4, 0.5 - 1e-9) == pytest.approx(density_tau_br(0.3, 0.4), rel=1e-6)


def test_density_T1():
    h = lambda x: x ** -0.5 + math.log(x ** -0.5 - 1)
    assert h(0.25) == 2.0
    assert density_T1(0.25) == pytest.approx((2 + h(0.75)) / 2, rel=1e-14)
    assert density_T1(0.1) == pytest.approx(density_T1(0.9), rel=1e-13)
    assert integrate.quad(density_T1, 0, 1)[0] == pytest.approx(1, abs=1e-8)
    for x in (0.05, 0.3, 0.77):
        assert cdf_T1(x) == pytest.approx(integrate.quad(density_T1, 0, x)[0], abs=1e-10)
    assert cdf_T1(0.0) == 0.0 and cdf_T1(1.0) == 1.0
    with pytest.raises(DomainError):
        density_T1(0.0)


def test_T1_density_is_the_first_stick_mixture():
    # 1 - T_1 mixes the hitting-time density over a uniform fraction
    x = 0.35
    mix = integrate.quad(lambda u: density_tau_br(u, 1 - x), 0, 1)[0]
    assert mix == pytest.approx(density_T1(x), rel=1e-8)


def test_intensity_T_lengths():
    assert intensity_T_lengths(0.75, 0.5) == pytest.approx(4 / 3, rel=1e-14)
    assert intensity_T_lengths(0.5, 0.5) == pytest.approx(math.sqrt(2), rel=1e-14)
    for x in (0.2, 0.6):
        val = integrate.quad(lambda u: density_tau_br(u, x) / u, 0, 1)[0]
        assert val == pytest.approx(intensity_T_lengths(x), abs=1e-6)
    with pytest.raises(DomainError):
        intensity_T_lengths(1.0)


def test_split_density():
    assert split_integral(1.2, 0.7) == pytest.approx(split_integral(0.7, 1.2), rel=1e-14)
    for a, b in [(1.3, 0.4), (0.2, 2.0)]:
        num = integrate.quad(lambda x: (x * (1 - x)) ** -0.5 / (a * x ** 0.5 + b * (1 - x) ** 0.5), 0, 1)[0]
        assert split_integral(a, b) == pytest.approx(num, abs=1e-8)
    total = integrate.dblquad(lambda b, a: joint_density_split(a, b), 0, 12, 0, 12)[0]
    assert total == pytest.approx(1, abs=1e-6)


@pytest.mark.parametrize("x", [0.2, 0.5, 0.85])
def test_trivariate_T1_density_marginalizes_to_T1(x):
    val, _ = integrate.dblquad(lambda k, h: joint_density_T1_split(x, h, k), 0, np.inf, 0, np.inf)
    assert val == pytest.approx(density_T1(x), rel=1e-6)
