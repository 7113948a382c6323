"""Named verification suites.

Each suite returns a list of ``StatReport``.  The numbered acceptance
criteria are labelled ``[k]`` in report names.  ``quick=True`` shrinks
sample sizes for smoke runs; fixed distance thresholds are then replaced by
level-based critical values so the smaller runs stay calibrated.

Replicate i of a block uses ``RngStream(seed, block_offset + i)``.
"""

from __future__ import annotations

import contextlib
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import stats

from . import bridge as br
from . import mappings as mp
from . import partitions as pt
from . import pointproc as pp
from .errors import ParameterError
from .parallel import replicate_map
from .randkit import densities as dens
from .randkit.rng import RngStream
from .randkit.samplers import BROWNIAN, StableParams, gem_lengths, sample_stable, size_biased_order
from .statlab import (StatReport, bonferroni, chi_square_counts, compare_estimates, exact_equality,
                      ks_one_sample, ks_two_sample, max_error, mean_within, plain_mean, poststratified_mean,
                      weighted_mean)

FAMILY_LEVEL = 0.01
_PARAMS = [BROWNIAN]


def current_params() -> StableParams:
    return _PARAMS[-1]


@contextlib.contextmanager
def override_params(p: StableParams):
    """Run suites with different stable constants (used as a negative control)."""
    _PARAMS.append(p)
    try:
        yield p
    finally:
        _PARAMS.pop()


@dataclass
class Scale:
    quick: bool

    def pick(self, full, quick):
        return quick if self.quick else full


def _timed(reports: list[StatReport], t0: float) -> list[StatReport]:
    dt = time.perf_counter() - t0
    for r in reports:
        r.runtime = dt
    return reports


def _fixed(value, scale: Scale):
    return None if scale.quick else value


def _mean_check(samples, target, tol, name, scale: Scale, level, seed):
    if scale.quick:
        se = plain_mean(samples).se
        tol = max(tol, stats.norm.isf(level / 2) * se)
    return mean_within(samples, target, tol, name=name, seed=seed)


# partitions: criteria 1-3

def _random_lengths(g, n):
    x = g.uniform(size=n)
    while len(set(x.tolist())) < n:
        x = g.uniform(size=n)
    return np.sort(x / x.sum())[::-1]


def suite_partitions(seed: int = 1, quick: bool = False, threads=None) -> list[StatReport]:
    g = RngStream(seed, 0).generator
    reports = []

    t0 = time.perf_counter()
    worst, checked = 0.0, 0
    for n in range(2, 9):
        blocks_all = list(pt.set_partitions(n))
        for _ in range(5):
            x = _random_lengths(g, n)
            for blocks in blocks_all:
                worst = max(worst, abs(pt.symmetrized_d_probability(x, blocks) - float(pt.pt_form(blocks, n))))
                checked += 1
    reports += _timed([max_error("[1] symmetrized D-block law = PT form", worst, 1e-10, checked, seed)], t0)

    t0 = time.perf_counter()
    bad = 0
    for n in range(1, 9):
        x = [Fraction(int(v)) for v in g.integers(1, 10 ** 6, size=n)]
        s = sum(x)
        target = pt.stirling_cycle_dist(n)
        bad += pt.jd_law([v / s for v in x]) != target
        bad += pt.jt_law(n) != target
    reports += _timed([exact_equality("[2] J^D and J^T laws = |s(n,k)|/n!", bad, 16, seed)], t0)

    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(g.integers(2, 9))
        k = int(g.integers(1, n + 1))
        labels = np.concatenate([np.arange(k), g.integers(0, k, size=n - k)])
        g.shuffle(labels)
        x = g.uniform(size=n)
        masses = np.bincount(labels, weights=x / x.sum(), minlength=k)
        worst = max(worst, abs(pt.stick_identity_sum(masses) - 1.0))
    reports += _timed([max_error("[3] stick identity sums to 1", worst, 1e-12, 100, seed)], t0)
    return reports


# mappings: criteria 4 and 10

def _mapping_replicate(n):
    def fn(gen):
        s = mp.fast_statistics(gen.integers(0, n, size=n))
        return s.num_cyclic, s.first_basin_bf
    return fn


def _first_d_cut(m, p):
    def fn(gen):
        return br.d_partition(br.simulate_bridge(m, gen), gen)[0].length
    return fn


def suite_mappings(seed: int = 1, quick: bool = False, threads=None) -> list[StatReport]:
    scale = Scale(quick)
    level = bonferroni(FAMILY_LEVEL, 2)
    reports = []

    t0 = time.perf_counter()
    tables = {n: mp.enumerate_exact(n) for n in range(2, 7)}
    same = sum(t.cycle_sequence[mp.OrderingMode.CyclesFirst.value]
               != t.cycle_sequence[mp.OrderingMode.BasinsFirst.value] for t in tables.values())
    same += sum(t.num_cycles != mp.mapping_cycle_law(n) for n, t in tables.items() if n <= 4)
    differ = sum(tables[n].mean_first_basin("cycles-first") == tables[n].mean_first_basin("basins-first")
                 for n in range(3, 7))
    r1 = exact_equality("[4] cycle-size law equal across orderings", same, len(tables), seed)
    r2 = exact_equality("[4] E|B_n,1| differs across orderings", differ, 4, seed)
    r2.details = {str(n): [str(tables[n].mean_first_basin(m)) for m in ("cycles-first", "basins-first")]
                  for n in range(3, 7)}
    reports += _timed([r1, r2], t0)

    t0 = time.perf_counter()
    n = scale.pick(40_000, 4_000)
    reps = scale.pick(10_000, 1_000)
    rows = np.array(replicate_map(_mapping_replicate(n), reps, seed, threads, offset=10_000_000))
    cyc = rows[:, 0] / math.sqrt(n)
    basin = rows[:, 1] / n
    dv1 = np.array(replicate_map(_first_d_cut(scale.pick(2 ** 14, 2 ** 12), current_params()),
                                 reps, seed, threads, offset=11_000_000))
    r1 = ks_one_sample(cyc, dens.rayleigh_cdf, name="[10] |C_n|/sqrt(n) ~ Rayleigh",
                       threshold=_fixed(0.02, scale), level=level, seed=seed)
    r2 = ks_two_sample(basin, dv1, name="[10] |B_n,1|/n (basins-first) ~ D_V1",
                       threshold=_fixed(0.03, scale), level=level, seed=seed)
    reports += _timed([r1, r2], t0)
    return reports


# bridge: criteria 5-9 and 11

def _bridge_replicate(m, p):
    def fn(gen):
        path = br.simulate_bridge(m, gen)
        prof = br.local_time_profile(path, p=p)
        d = br.d_partition(path, gen, prof)
        t = br.t_partition(path, prof, gen)
        return (prof.total, d[0].length, t[0].D, br.tau_fraction(prof, 0.5),
                max(f.length for f in d), max(f.length for f in t), d[0].local_time / prof.total)
    return fn


def _local_time_replicate(m, p):
    def fn(gen):
        return br.local_time_profile(br.simulate_bridge(m, gen), p=p).total
    return fn


def _pseudo_replicate(m, p):
    def fn(gen):
        x = br.simulate_pseudo_bridge(m, gen, p=p)
        return np.abs(x.values).max(), br.local_time_profile(x, p=p).total
    return fn


def _bridge_max_replicate(m, p):
    def fn(gen):
        x = br.simulate_bridge(m, gen)
        return np.abs(x.values).max(), br.local_time_profile(x, p=p).total
    return fn


def suite_bridge(seed: int = 1, quick: bool = False, threads=None) -> list[StatReport]:
    scale = Scale(quick)
    p = current_params()
    level = bonferroni(FAMILY_LEVEL, 12)
    # grid artefacts near t = 1 are of order sqrt(dt); 2^12 is too coarse even for smoke runs
    m = scale.pick(2 ** 16, 2 ** 14)
    reps = scale.pick(10_000, 1_000)
    reports = []

    t0 = time.perf_counter()
    rows = np.array(replicate_map(_bridge_replicate(m, p), reps, seed, threads, offset=20_000_000))
    L1, d1, T1, tau, topD, topT, share = rows.T
    build = time.perf_counter() - t0

    t0 = time.perf_counter()
    reports += _timed([
        _mean_check(d1, 2 / 3, 0.01, "[5] E lambda(I^D_1) = 2/3", scale, level, seed),
        _mean_check(T1, 0.5, 0.01, "[5] E T_1 = 1/2", scale, level, seed)], t0 - build)

    t0 = time.perf_counter()
    ks_fine = ks_one_sample(L1, dens.rayleigh_cdf, name=f"[6] L_1 ~ Rayleigh at m={m}",
                            threshold=_fixed(0.02, scale), level=level, seed=seed)
    new = [ks_fine]
    if not quick:
        coarse = np.array(replicate_map(_local_time_replicate(m // 4, p), reps, seed, threads,
                                        offset=21_000_000))
        ks_coarse = ks_one_sample(coarse, dens.rayleigh_cdf, name=f"L_1 ~ Rayleigh at m={m // 4}",
                                  level=level, seed=seed)
        new.append(StatReport(f"[6] KS(m={m}) / KS(m={m // 4}) within 2x", ks_fine.statistic / ks_coarse.statistic,
                              2.0, (reps, reps), seed=seed,
                              details={"ks_fine": ks_fine.statistic, "ks_coarse": ks_coarse.statistic}))
    reports += _timed(new, t0 - build)

    t0 = time.perf_counter()
    reports += _timed([
        ks_one_sample(tau, stats.uniform.cdf, name="[7] tau^br_1/2 ~ Uniform(0,1)",
                      threshold=_fixed(0.02, scale), level=level, seed=seed),
        ks_one_sample(T1, dens.cdf_T1, name="[8] T_1 ~ closed-form law",
                      threshold=_fixed(0.02, scale), level=level, seed=seed),
        ks_two_sample(topD, topT, name="[9] top length, D vs T partitions",
                      threshold=_fixed(0.02, scale), level=level, seed=seed),
        ks_one_sample(share, stats.uniform.cdf, name="L(I^D_1)/L_1 ~ Uniform(0,1)", level=level, seed=seed),
    ], t0 - build)

    reports += suite_pseudo_bridge(seed, quick, threads, level)
    return reports


def suite_pseudo_bridge(seed: int = 1, quick: bool = False, threads=None, level=None) -> list[StatReport]:
    scale = Scale(quick)
    p = current_params()
    level = bonferroni(FAMILY_LEVEL, 5) if level is None else level
    m = scale.pick(2 ** 14, 2 ** 12)
    reps = scale.pick(10_000, 1_000)
    t0 = time.perf_counter()
    pmax, pL = np.array(replicate_map(_pseudo_replicate(m, p), reps, seed, threads, offset=30_000_000)).T
    bmax, bL = np.array(replicate_map(_bridge_max_replicate(m, p), reps, seed, threads, offset=31_000_000)).T
    w = 1.0 / bL
    z = stats.norm.isf(level / 2)
    sig = scale.pick(3.0, max(3.0, z))
    # E[1/L^2] diverges for the bridge, so the plain ratio estimate is heavy tailed. Stratify on L,
    # whose 1/L-tilted law is half-normal (scaled like the estimator), and weight inside each stratum.
    k = scale.pick(10, 5)
    edges = (math.sqrt(2) / p.c) * stats.halfnorm.ppf(np.linspace(0, 1, k + 1))
    masses = np.full(k, 1.0 / k)
    out = []
    for f_p, f_b, label in ((pmax, bmax, "max|B*|"), (pL, bL, "L(B*)")):
        rep = compare_estimates(plain_mean(f_p), poststratified_mean(f_b, w, bL, edges, masses),
                                name=f"[11] E {label} vs 1/L-weighted bridge", sigmas=sig, seed=seed)
        rep.details["unstratified"] = weighted_mean(f_b, w).value
        out.append(rep)

    bad, checked = 0, 0
    bins = np.linspace(-4, 4, 81)
    for i in range(scale.pick(200, 50)):
        gen = RngStream(seed, 32_000_000 + i).generator
        x = br.simulate_pseudo_bridge(m, gen, p=p)
        y = br.path_swap(x, gen.uniform(0.01, 0.99))
        bad += not np.array_equal(br.occupation_histogram(x, bins), br.occupation_histogram(y, bins))
        checked += 1
    out.append(exact_equality("[11] occupation histogram unchanged by path swap", bad, checked, seed))

    hits = np.array(replicate_map(lambda g: br.simulate_bessel3_hitting(m, g), reps, seed, threads,
                                  offset=33_000_000))
    out.append(ks_two_sample(pmax, 1 / (2 * np.sqrt(hits)), name="[11] max|B*| vs 1/(2 sqrt H_1(R_3))",
                             threshold=_fixed(0.03, scale), level=level, seed=seed))
    return _timed(out, t0)


# point processes: criterion 12

def suite_pointproc(seed: int = 1, quick: bool = False, threads=None) -> list[StatReport]:
    scale = Scale(quick)
    p = current_params()
    level = bonferroni(FAMILY_LEVEL, 14)
    reports = []

    t0 = time.perf_counter()
    reps = scale.pick(20_000, 2_000)
    new = []
    for j, xi in enumerate((0.5, 1.0, 2.0)):
        sets = replicate_map(lambda g, xi=xi: pp.construct_points_D(xi, g, p), reps, seed, threads,
                             offset=40_000_000 + j * 1_000_000)
        sx = np.array([s.sum_x for s in sets])
        sy = np.array([s.sum_y for s in sets])
        new.append(ks_one_sample(sx, stats.gamma(BROWNIAN.alpha, scale=1 / xi).cdf,
                                 name=f"[12] Sigma_X ~ Gamma(alpha)/xi, xi={xi}",
                                 threshold=_fixed(0.02, scale), level=level, seed=seed))
        new.append(ks_one_sample(sy, stats.expon(scale=1 / float(BROWNIAN.laplace_exponent(xi))).cdf,
                                 name=f"[12] Sigma_Y ~ Exp(c xi^alpha), xi={xi}",
                                 threshold=_fixed(0.02, scale), level=level, seed=seed))
    reports += _timed(new, t0)

    t0 = time.perf_counter()
    reps = scale.pick(100_000, 10_000)

    def both(g):
        s = pp.construct_points_D(1.0, g, p)
        return s, pp.reorder_biased(s, "Y", g)

    pairs = replicate_map(both, reps, seed, threads, offset=44_000_000)
    psi = float(BROWNIAN.laplace_exponent(1.0))
    palm = pp.palm_checks([a for a, _ in pairs], [b for _, b in pairs], psi, level=level, seed=seed)
    palm[0].name = "[12] X-biased: (Y_1, Sigma_Y - Y_1) is a size-biased pick"
    ratio = np.array([b.x[0] / b.sum_x for _, b in pairs])
    palm[1] = _mean_check(ratio, 0.5, 0.01, "[12] Y-biased: E[X_1/Sigma_X] = 1/2", scale, level, seed)
    palm[2].name = "[12] Y-biased: E[X_1/Sigma_X] = 2/3 rejected"
    palm[3].name = "X-biased: first two Y's are successive size-biased picks"
    if quick:
        palm[2].threshold = 3.0
        for r in palm:
            r.warnings = [w for w in r.warnings if "replicates" not in w]
    reports += _timed(palm, t0)

    t0 = time.perf_counter()
    gp = pp.verify_lemma_gp(1.0, scale.pick(10_000, 2_000), RngStream(seed, 45_000_000).generator, p,
                            level=level, seed=seed)
    gp[0].name = "[12] first mark L ~ Exp(sqrt 2) at xi=1"
    if not quick:
        gp[0].threshold = 0.02
    reports += _timed(gp, t0)

    t0 = time.perf_counter()
    L, first = pp.stable_corollary_sample(scale.pick(10_000, 2_000), RngStream(seed, 46_000_000).generator, p)
    reports += _timed([
        ks_one_sample(L, dens.rayleigh_cdf, name="sum (Q_j/sigma_j)^alpha ~ Rayleigh", level=level, seed=seed),
        ks_one_sample(first, stats.uniform.cdf, name="L_1/L ~ Uniform(0,1)", level=level, seed=seed)], t0)

    t0 = time.perf_counter()
    reps = scale.pick(3_000, 500)
    mT = scale.pick(2 ** 14, 2 ** 12)
    setsT = replicate_map(lambda g: pp.construct_points_T(1.0, mT, g, p), reps, seed, threads, offset=47_000_000)
    setsD = replicate_map(lambda g: pp.construct_points_D(1.0, g, p), reps, seed, threads, offset=48_000_000)
    new = []
    for label, f in (("Sigma_X", lambda s: s.sum_x), ("top X", lambda s: s.x.max()),
                     ("Sigma_Y", lambda s: s.sum_y), ("top Y", lambda s: s.y.max())):
        new.append(ks_two_sample([f(s) for s in setsT], [f(s) for s in setsD],
                                 name=f"T- vs D-construction: {label}", level=level, seed=seed))
    reports += _timed(new, t0)
    return reports


# randkit samplers

def suite_distributions(seed: int = 1, quick: bool = False, threads=None) -> list[StatReport]:
    scale = Scale(quick)
    level = bonferroni(FAMILY_LEVEL, 5)
    g = RngStream(seed, 50_000_000).generator
    n = scale.pick(100_000, 10_000)
    t0 = time.perf_counter()
    tau = sample_stable(BROWNIAN, 1.0, g, size=n)
    e = np.exp(-tau)
    se = e.std(ddof=1) / math.sqrt(n)
    out = [StatReport("E exp(-tau_1) = exp(-sqrt 2)", abs(e.mean() - math.exp(-math.sqrt(2))) / se,
                      stats.norm.isf(level / 2), (n,), seed=seed),
           ks_one_sample(tau, lambda x: 2 * stats.norm.sf(1 / np.sqrt(x)), name="tau_1 ~ 1/N^2",
                         level=level, seed=seed)]
    first = np.array([gem_lengths(0.5, rng=g).values[0] for _ in range(scale.pick(20_000, 2_000))])
    out.append(ks_one_sample(first, stats.beta(1, 0.5).cdf, name="GEM(1/2) first stick ~ beta(1, 1/2)",
                             level=level, seed=seed))
    w = np.array([3.0, 2.0, 1.0])
    k = scale.pick(60_000, 6_000)
    firsts = np.bincount([size_biased_order(w, g)[0] for _ in range(k)], minlength=3)
    out.append(chi_square_counts(firsts, w / w.sum(), name="size-biased first pick", level=level, seed=seed))
    b = g.beta(0.5, 0.5, size=n)
    out.append(ks_one_sample(b, stats.beta(0.5, 0.5).cdf, name="beta(1/2, 1/2) sampler", level=level, seed=seed))
    return _timed(out, t0)


SUITES: dict[str, Callable[..., list[StatReport]]] = {
    "distributions": suite_distributions,
    "partitions": suite_partitions,
    "mappings": suite_mappings,
    "bridge": suite_bridge,
    "pointproc": suite_pointproc,
}


def run_suite(name: str, seed: int = 1, quick: bool = False, threads=None) -> list[tuple[str, StatReport]]:
    """Run one suite, or all of them for ``name == "all"``; returns (suite, report) pairs."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ParameterError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    return [(s, r) for s in names for r in SUITES[s](seed=seed, quick=quick, threads=threads)]
