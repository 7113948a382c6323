"""Bivariate Poisson point processes of lengths and local times.

Points (X_j, Y_j) = (G lambda_j, G^alpha L_j) with G ~ Gamma(alpha)/xi, where
lambda_j are the lengths of an interval partition and L_j the local times of
its pieces.  Also the subordinator-marking construction and Palm checks.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate, special, stats

from . import bridge as br
from .errors import ParameterError
from .randkit.rng import as_generator
from .randkit.samplers import BROWNIAN, StableParams, gem_lengths, sample_stable, size_biased_order
from .statlab import (StatReport, chi_square_counts, chi_square_grid, ks_one_sample, mean_within,
                      rejection_sigmas)

OrderTag = Literal["unordered", "X-biased", "Y-biased"]


@dataclass
class MarkedPointSet:
    x: np.ndarray
    y: np.ndarray
    order_tag: OrderTag = "unordered"
    xi: float = 1.0
    params: StableParams = BROWNIAN
    dropped_mass: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ParameterError("x and y must be 1-d arrays of equal length")
        if np.any(self.x <= 0) or np.any(self.y <= 0):
            raise ParameterError("point coordinates must be strictly positive")

    def __len__(self):
        return self.x.size

    @property
    def sum_x(self) -> float:
        return float(self.x.sum())

    @property
    def sum_y(self) -> float:
        return float(self.y.sum())

    @property
    def psi(self) -> float:
        return float(self.params.laplace_exponent(self.xi))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "order_index"])
        for i, (a, b) in enumerate(zip(self.x, self.y)):
            w.writerow([repr(float(a)), repr(float(b)), i])
        return buf.getvalue()


def _check_xi(xi):
    if not xi > 0:
        raise ParameterError(f"xi must be positive, got {xi}")


def construct_points_D(xi: float, rng=None, p: StableParams = BROWNIAN,
                       tail_tolerance: float = 1e-9) -> MarkedPointSet:
    """Points (G lambda_j, G^alpha L_j) in X-biased order.

    lambda ~ GEM(alpha), L_j = lambda_j^alpha tau_j^(-alpha) with i.i.d. tau_j
    distributed as tau_1, and G ~ Gamma(alpha)/xi independent.
    """
    _check_xi(xi)
    gen = as_generator(rng)
    a = p.alpha
    lam = gem_lengths(a, tail_tolerance, gen)
    g = gen.gamma(a) / xi
    tau = sample_stable(p, 1.0, gen, size=len(lam))
    L = lam.values ** a * tau ** -a
    keep = lam.values > 0
    return MarkedPointSet(g * lam.values[keep], g ** a * L[keep], "X-biased", xi, p,
                          dropped_mass=g * lam.residual_mass)


def construct_points_T(xi: float, m: int, rng=None, p: StableParams = BROWNIAN) -> MarkedPointSet:
    """Points (G lambda_j, G^alpha L_j) from the T-partition of a simulated bridge.

    Fragments come in their left-to-right order, which is the order of the
    T-partition; the point set is tagged unordered since only its law as a
    multiset is claimed.
    """
    _check_xi(xi)
    if p.alpha != 0.5:
        raise ParameterError("the bridge construction is Brownian (alpha = 1/2)")
    gen = as_generator(rng)
    path = br.simulate_bridge(m, gen)
    prof = br.local_time_profile(path, p=p)
    frags = br.t_partition(path, prof, gen)
    lam = np.array([f.length for f in frags])
    L = np.array([f.local_time for f in frags])
    keep = (lam > 0) & (L > 0)
    g = gen.gamma(p.alpha) / xi
    return MarkedPointSet(g * lam[keep], g ** p.alpha * L[keep], "unordered", xi, p,
                          dropped_mass=g * lam[~keep].sum())


def reorder_biased(ps: MarkedPointSet, coordinate: str, rng=None) -> MarkedPointSet:
    """Put the points in size-biased order of the chosen coordinate ("X" or "Y")."""
    if len(ps) == 0:
        raise ParameterError("cannot reorder an empty point set")
    if coordinate not in ("X", "Y"):
        raise ParameterError("coordinate must be 'X' or 'Y'")
    w = ps.x if coordinate == "X" else ps.y
    perm = size_biased_order(w, rng)
    return MarkedPointSet(ps.x[perm], ps.y[perm], f"{coordinate}-biased", ps.xi, ps.params,
                          ps.dropped_mass, dict(ps.meta))


def first_point_table(sets) -> np.ndarray:
    """Rows (X_1, Y_1, Sigma_X, Sigma_Y) for a sequence of point sets."""
    return np.array([(s.x[0], s.y[0], s.sum_x, s.sum_y) for s in sets])


def _exp_bins(rate, k):
    q = np.linspace(0, 1, k + 1)
    e = stats.expon(scale=1 / rate).ppf(q)
    e[-1] = np.inf
    return e


def palm_size_biased_check(table: np.ndarray, psi: float, bins: int = 8, level: float = 0.01,
                           seed=None, name: str = "palm Y-biased pick") -> StatReport:
    """Chi-square of (Y_1, Sigma_Y - Y_1) against rho_Y(y) f_Y(v) y/(y+v).

    With rho_Y(y) = e^(-psi y)/y and f_Y(v) = psi e^(-psi v) the right side is
    psi e^(-psi s)/s at s = y + v, so in coordinates (S, Y_1/S) it factorizes
    into Exp(psi) times Uniform(0,1); the grid is equal-probability in those.
    """
    y1 = table[:, 1]
    s = table[:, 3]
    uv = np.column_stack([s, y1 / s])
    edges = [_exp_bins(psi, bins), np.linspace(0, 1, bins + 1)]
    counts, _ = np.histogramdd(uv, bins=edges)
    probs = np.full((bins, bins), 1.0 / bins ** 2)
    return chi_square_counts(counts, probs, name=name, level=level, seed=seed)


def palm_two_point_check(sets, psi: float, bins: int = 4, level: float = 0.01, seed=None,
                         name: str = "palm Y-biased first two picks") -> StatReport:
    """Chi-square for the first two Y's being successive size-biased picks.

    With S = Sigma_Y, U1 = Y_1/S and U2 = Y_2/(S - Y_1) the two-point analogue of the
    one-point identity factorizes as Exp(psi) x Uniform x Uniform.
    """
    rows = np.array([(s.sum_y, s.y[0], s.y[1]) for s in sets if len(s) >= 2])
    skipped = len(sets) - len(rows)
    S, y1, y2 = rows.T
    pts = np.column_stack([S, y1 / S, y2 / (S - y1)])
    u = np.linspace(0, 1, bins + 1)
    counts, _ = np.histogramdd(pts, bins=[_exp_bins(psi, bins), u, u])
    rep = chi_square_counts(counts, np.full(counts.shape, 1.0 / counts.size), name=name, level=level, seed=seed)
    if skipped:
        rep.warnings.append(f"{skipped} sets with fewer than two points skipped")
    return rep


def palm_checks(sets_x_biased, sets_y_biased, psi: float, level: float = 0.01, seed=None,
                tol: float = 0.01, sigmas: float = 5.0) -> list[StatReport]:
    """(a) Y_1 is a size-biased pick of the Y's under X-biased order;
    (b) under Y-biased order E[X_1/Sigma_X] is 1/2, and 2/3 is rejected;
    then a two-point spot check of (a)."""
    ta = first_point_table(sets_x_biased)
    tb = first_point_table(sets_y_biased)
    ratio = tb[:, 0] / tb[:, 2]
    reps = [palm_size_biased_check(ta, psi, level=level, seed=seed),
            mean_within(ratio, 0.5, tol, name="Y-biased E[X1/SumX] = 1/2", seed=seed),
            rejection_sigmas(ratio, 2.0 / 3.0, sigmas, name="Y-biased E[X1/SumX] != 2/3", seed=seed),
            palm_two_point_check(sets_x_biased, psi, level=level, seed=seed)]
    for r in reps:
        if len(ratio) < 100_000:
            r.warnings.append(f"only {len(ratio)} replicates; power target assumes 1e5")
    return reps


# subordinator with jumps marked at rate 1 - e^(-xi x)

def levy_tail(delta: float, p: StableParams = BROWNIAN) -> float:
    """nu(delta, inf) for nu(dx) = c alpha / Gamma(1-alpha) x^(-1-alpha) dx."""
    return p.c / math.gamma(1 - p.alpha) * delta ** -p.alpha


def small_jump_rates(xi: float, delta: float, p: StableParams = BROWNIAN) -> tuple[float, float]:
    """(rate of marked jumps below delta, mean unmarked mass below delta), per unit local time."""
    a, c = p.alpha, p.c
    k = c * a / math.gamma(1 - a)
    # int_0^delta (1 - e^(-xi x)) x^(-1-a) dx and int_0^delta e^(-xi x) x^(-a) dx
    marked = k * (xi ** a * special.gamma(1 - a) * special.gammainc(1 - a, xi * delta) / a
                  - (1 - math.exp(-xi * delta)) * delta ** -a / a)
    unmarked = k * xi ** (a - 1) * special.gamma(1 - a) * special.gammainc(1 - a, xi * delta)
    return float(marked), float(unmarked)


def default_cutoff(xi: float, p: StableParams = BROWNIAN, fraction: float = 1e-4) -> float:
    """Cutoff whose discarded expected small-jump mass is ``fraction`` of E[G] = alpha/xi."""
    a = p.alpha
    k = p.c * a / math.gamma(1 - a)
    # unmarked small mass per unit local time ~ k delta^(1-a)/(1-a); E L = 1/psi
    target = fraction * (a / xi) * p.laplace_exponent(xi) * (1 - a) / k
    return float(target ** (1 / (1 - a)))


@dataclass
class MarkedSubordinatorSample:
    L: np.ndarray
    G: np.ndarray
    tau_u1: np.ndarray
    delta: float


def simulate_marked_subordinator(xi: float, reps: int, rng=None, p: StableParams = BROWNIAN,
                                 delta: float | None = None, block: int = 4096) -> MarkedSubordinatorSample:
    """Stable subordinator jumps above ``delta`` as a Poisson process in (local time, size).

    Each jump is marked with probability 1 - e^(-xi x); marks among jumps
    below ``delta`` arrive as an independent Poisson stream and unmarked
    small jumps are replaced by their mean.  L is the local time of the first
    mark, G the unmarked mass before it, and tau_u1 the unmarked mass up to
    local time 1.
    """
    _check_xi(xi)
    gen = as_generator(rng)
    delta = default_cutoff(xi, p) if delta is None else delta
    lam = levy_tail(delta, p)
    r_small, mu_small = small_jump_rates(xi, delta, p)
    a = p.alpha
    Ls, Gs, Ts = np.empty(reps), np.empty(reps), np.empty(reps)
    for i in range(reps):
        small_mark = gen.exponential(1 / r_small) if r_small > 0 else math.inf
        t0, big_sum, L, G, tau1 = 0.0, 0.0, None, None, None
        while L is None or tau1 is None:
            times = t0 + np.cumsum(gen.exponential(1 / lam, block))
            sizes = delta * gen.uniform(size=block) ** (-1 / a)
            marked = gen.uniform(size=block) < -np.expm1(-xi * sizes)
            unm = np.where(marked, 0.0, sizes)
            csum = big_sum + np.cumsum(unm)
            if L is None:
                hit = np.flatnonzero(marked)
                first_big = times[hit[0]] if hit.size else math.inf
                if min(first_big, small_mark) <= times[-1]:
                    L = min(first_big, small_mark)
                    k = np.searchsorted(times, L, side="left")
                    prior = csum[k - 1] if k > 0 else big_sum
                    G = prior + mu_small * L
            if tau1 is None and times[-1] >= 1.0:
                k = np.searchsorted(times, 1.0, side="right")
                tau1 = (csum[k - 1] if k > 0 else big_sum) + mu_small
            t0, big_sum = times[-1], csum[-1]
        Ls[i], Gs[i], Ts[i] = L, G, tau1
    return MarkedSubordinatorSample(Ls, Gs, Ts, delta)


def taurho1_cell_probabilities(xi: float, t_edges, l_edges) -> np.ndarray:
    """Cell masses of psi e^(-xi t) f_l(t) for the Brownian case, f_l the Levy density."""
    psi = BROWNIAN.laplace_exponent(xi)

    def strip(t, l1, l2):
        if t <= 0:
            return 0.0
        hi = 0.0 if math.isinf(l2) else math.exp(-l2 * l2 / (2 * t))
        return psi * math.exp(-xi * t) * t ** -0.5 / math.sqrt(2 * math.pi) * (math.exp(-l1 * l1 / (2 * t)) - hi)

    out = np.empty((len(t_edges) - 1, len(l_edges) - 1))
    for i in range(out.shape[0]):
        for j in range(out.shape[1]):
            out[i, j] = integrate.quad(strip, t_edges[i], t_edges[i + 1],
                                       args=(l_edges[j], l_edges[j + 1]), limit=200)[0]
    return out


def verify_lemma_gp(xi: float = 1.0, reps: int = 10_000, rng=None, p: StableParams = BROWNIAN,
                    delta: float | None = None, bins: int = 6, level: float = 0.01,
                    seed=None) -> list[StatReport]:
    """L ~ Exp(psi); (G, L) joint law; E e^(-tau^u_1) = e^(c xi^a - c (1+xi)^a)."""
    sample = simulate_marked_subordinator(xi, reps, rng, p, delta)
    psi = float(p.laplace_exponent(xi))
    reps_out = [ks_one_sample(sample.L, stats.expon(scale=1 / psi).cdf, name="first mark L ~ Exp(psi)",
                              level=level, seed=seed)]
    if p.alpha == 0.5:
        t_edges = stats.gamma(p.alpha, scale=1 / xi).ppf(np.linspace(0, 1, bins + 1))
        l_edges = _exp_bins(psi, bins)
        t_edges[-1] = np.inf
        probs = taurho1_cell_probabilities(xi, t_edges, l_edges)
        reps_out.append(chi_square_grid(np.column_stack([sample.G, sample.L]), None, [t_edges, l_edges],
                                        name="(G, L) joint density", level=level, seed=seed,
                                        probabilities=probs))
    target = math.exp(p.c * xi ** p.alpha - p.c * (1 + xi) ** p.alpha)
    e = np.exp(-sample.tau_u1)
    se = e.std(ddof=1) / math.sqrt(e.size)
    z = abs(e.mean() - target) / se
    reps_out.append(StatReport("E exp(-tau^u_1)", z, 4.0, (e.size,), seed=seed,
                               details={"mean": float(e.mean()), "se": float(se), "target": target}))
    _, mu_small = small_jump_rates(xi, sample.delta, p)
    coarse = mu_small / psi > 1e-3 * p.alpha / xi
    for r in reps_out:
        r.details["delta"] = sample.delta
        if coarse:
            r.warnings.append("jump cutoff is coarse: discarded small-jump mass exceeds 1e-3 of E[G]")
    return reps_out


def stable_corollary_sample(reps: int, rng=None, p: StableParams = BROWNIAN,
                            tail_tolerance: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """L = sum (Q_j/sigma_j)^alpha with Q ~ GEM(alpha), sigma_j i.i.d. tau_1; returns (L, L_1/L)."""
    gen = as_generator(rng)
    L = np.empty(reps)
    first = np.empty(reps)
    for i in range(reps):
        q = gem_lengths(p.alpha, tail_tolerance, gen).values
        s = sample_stable(p, 1.0, gen, size=q.size)
        parts = (q / s) ** p.alpha
        L[i] = parts.sum()
        first[i] = parts[0] / L[i]
    return L, first
