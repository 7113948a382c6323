import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bridgecut.errors import ParameterError, StructuralError
from bridgecut.partitions import (
    ExactDist,
    IntervalPartition,
    SetPartition,
    bernoulli_cycle_dist,
    discrete_d_partition,
    discrete_t_partition,
    empirical_intensity,
    exact_d_block_probability,
    exact_d_block_probability_by_representatives,
    intensity_bin_masses,
    jd_law,
    jt_law,
    kallenberg_local_time,
    make_exchangeable,
    pt_form,
    set_partitions,
    stick_identity_sum,
    stirling_cycle_dist,
    symmetrized_d_probability,
    symmetrized_d_probability_exact,
    t_block_law,
)
from bridgecut.randkit import RngStream, gem_lengths
from bridgecut.statlab import chi_square_counts


def rational_lengths(g, n):
    x = [Fraction(int(v)) for v in g.integers(1, 10 ** 6, size=n)]
    s = sum(x)
    return sorted((v / s for v in x), reverse=True)


def test_make_exchangeable():
    ip = make_exchangeable([1.0], 0)
    assert ip.n == 1 and ip.endpoints.tolist() == [0.0, 1.0]
    g = RngStream(1).generator
    first = [make_exchangeable([0.3, 0.7], g).order[0] for _ in range(20000)]
    assert abs(np.mean(first) - 0.5) < 0.015
    ip = make_exchangeable([0.2, 0.5, 0.3], g)
    assert ip.lengths.tolist() == [0.5, 0.3, 0.2]
    assert np.all(np.diff(ip.endpoints) > 0)
    with pytest.raises(ParameterError):
        make_exchangeable([])
    with pytest.raises(StructuralError):
        IntervalPartition([0.5, 0.5], [0, 0])


def test_set_partitions_counts():
    bell = [1, 2, 5, 15, 52, 203, 877, 4140]
    assert [sum(1 for _ in set_partitions(n)) for n in range(1, 9)] == bell
    with pytest.raises(StructuralError):
        SetPartition(3, [(1, 2), (2, 3)])


def test_pt_form_sums_to_one():
    for n in range(1, 8):
        assert sum(pt_form(b, n) for b in set_partitions(n)) == 1
    assert pt_form([(1, 2, 3, 4)], 4) == Fraction(1, 4)


def test_single_block_probability():
    g = np.random.default_rng(0)
    for n in range(1, 7):
        x = rational_lengths(g, n)
        assert exact_d_block_probability(x, [tuple(range(1, n + 1))]) == Fraction(1, n)


def test_representative_sum_matches_factorised_form():
    g = np.random.default_rng(1)
    for n in range(2, 7):
        x = rational_lengths(g, n)
        for blocks in set_partitions(n):
            assert exact_d_block_probability_by_representatives(x, list(blocks)) == \
                exact_d_block_probability(x, list(blocks))


def test_block_validation():
    with pytest.raises(StructuralError):
        exact_d_block_probability([0.5, 0.5], [(1,)])
    with pytest.raises(StructuralError):
        exact_d_block_probability([0.5, 0.5], [(1,), (2,)], representatives=[2, 1])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=6))
def test_stick_identity(masses):
    assert abs(stick_identity_sum(masses) - 1.0) < 1e-12


def test_symmetrized_d_law_is_pt_form():
    g = np.random.default_rng(2)
    for n in range(2, 7):
        x = g.uniform(size=n)
        x = np.sort(x / x.sum())[::-1]
        for blocks in set_partitions(n):
            assert abs(symmetrized_d_probability(x, blocks) - float(pt_form(blocks, n))) < 1e-12
    x = rational_lengths(g, 4)
    for blocks in set_partitions(4):
        assert symmetrized_d_probability_exact(x, blocks) == pt_form(blocks, 4)


def test_cycle_count_laws():
    assert stirling_cycle_dist(1).probabilities == {1: 1}
    d3 = stirling_cycle_dist(3).probabilities
    assert d3 == {1: Fraction(1, 3), 2: Fraction(1, 2), 3: Fraction(1, 6)}
    for n in range(1, 12):
        d = stirling_cycle_dist(n)
        assert d == bernoulli_cycle_dist(n)
        assert d.mean() == sum(Fraction(1, i) for i in range(1, n + 1))


def test_j_laws_exact():
    g = np.random.default_rng(3)
    for n in range(1, 9):
        assert jd_law(rational_lengths(g, n)) == stirling_cycle_dist(n)
        assert jt_law(n) == stirling_cycle_dist(n)
    assert jd_law([Fraction(7, 10), Fraction(3, 10)]).probabilities[1] == Fraction(1, 2)


def test_t_block_law_is_pt_form():
    for n in range(1, 6):
        law = t_block_law(n)
        for blocks in set_partitions(n):
            assert law[SetPartition(n, blocks)] == pt_form(blocks, n)


def test_exact_dist_json_and_validation():
    doc = json.loads(stirling_cycle_dist(2).to_json())
    assert doc == [{"value": 1, "num": 1, "den": 2}, {"value": 2, "num": 1, "den": 2}]
    with pytest.raises(StructuralError):
        ExactDist({1: Fraction(1, 3)})


def test_discrete_cuts_small_cases():
    ip = make_exchangeable([1.0], 0)
    assert discrete_d_partition(ip, 0).J == 1
    assert discrete_t_partition(ip, 0).J == 1
    g = RngStream(4).generator
    jd = [discrete_d_partition(make_exchangeable([0.8, 0.2], g), g).J for _ in range(20000)]
    jt = [discrete_t_partition(make_exchangeable([0.8, 0.2], g), g).J for _ in range(20000)]
    assert abs(np.mean(np.array(jd) == 1) - 0.5) < 0.015
    assert abs(np.mean(np.array(jt) == 1) - 0.5) < 0.015


def test_discrete_cuts_cover_unit_interval():
    g = RngStream(5).generator
    for _ in range(200):
        ip = make_exchangeable(g.dirichlet(np.ones(6)), g)
        for cut in (discrete_d_partition(ip, g), discrete_t_partition(ip, g)):
            ends = [b for _, b in cut.intervals]
            assert cut.intervals[0][0] == 0.0 and ends[-1] == 1.0
            assert all(cut.intervals[i][1] == cut.intervals[i + 1][0] for i in range(cut.J - 1))
            assert sum(len(b) for b in cut.ordered_blocks) == 6


def test_discrete_d_block_law_monte_carlo():
    g = RngStream(6).generator
    blocks = list(set_partitions(3))
    index = {SetPartition(3, b): i for i, b in enumerate(blocks)}
    counts = np.zeros(len(blocks))
    ip = make_exchangeable([1 / 3] * 3, g)
    for _ in range(100000):
        ip.order = g.permutation(3)
        counts[index[discrete_d_partition(ip, g).partition]] += 1
    probs = [float(pt_form(b, 3)) for b in blocks]
    assert chi_square_counts(counts, probs).passed


def test_t_single_block_frequency():
    g = RngStream(7).generator
    ip = make_exchangeable([0.1, 0.2, 0.7], g)
    single = np.mean([discrete_t_partition(ip, g).J == 1 for _ in range(30000)])
    assert abs(single - 1 / 3) < 0.015


def test_d_merged_intervals_in_length_biased_order():
    g = RngStream(8).generator
    shares, first = [], []
    for _ in range(40000):
        ip = make_exchangeable(g.dirichlet(np.ones(5)), g)
        cut = discrete_d_partition(ip, g)
        lens = np.array([b - a for a, b in cut.intervals])
        k = int(np.argmax(lens))
        shares.append(lens[k])
        first.append(k == 0)
    s, y = np.array(shares), np.array(first, dtype=float)
    slope = np.dot(s, y) / np.dot(s, s)
    assert abs(slope - 1) < 0.02


def test_kallenberg():
    ip = IntervalPartition([0.5, 0.3, 0.2], [2, 0, 1])
    assert kallenberg_local_time(ip, 3, 1.0) == 1.0
    assert kallenberg_local_time(ip, 3, 0.0) == 0.0
    assert kallenberg_local_time(ip, 2, 0.7) == 0.5
    with pytest.raises(ParameterError):
        kallenberg_local_time(ip, 4, 0.5)


def test_intensity_of_gem_half():
    # size-biased sampling of GEM(alpha) lengths gives the T-length intensity
    g = RngStream(9).generator
    reps = [gem_lengths(0.5, 1e-8, rng=g).values for _ in range(4000)]
    edges = np.linspace(0.05, 0.95, 10)
    emp = empirical_intensity(reps, edges)
    expected = intensity_bin_masses(edges)
    assert np.allclose(emp, expected, rtol=0.08)
