"""Grid Brownian paths, their zero sets and local time, and the D- and T-partitions.

A grid point i is a zero when ``values[i] == 0`` or the path changes sign
between i and i+1; a crossing is assigned to the earlier point.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import special

from .errors import BudgetError, DomainError, ParameterError, ResolutionError, StructuralError
from .randkit.rng import as_generator
from .randkit.samplers import BROWNIAN, StableParams

PathKind = Literal["bridge", "motion", "pseudo-bridge", "fragment"]
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
# steps whose endpoints are this many step-sds away from 0 carry no local time
_FAR = 12.0


@dataclass
class DiscretePath:
    values: np.ndarray
    kind: PathKind = "motion"
    duration: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise ParameterError("a path needs at least two grid points")
        if self.kind == "bridge" and not (self.values[0] == 0.0 and self.values[-1] == 0.0):
            raise StructuralError("a bridge must start and end at 0")

    @property
    def m(self) -> int:
        return self.values.size - 1

    @property
    def dt(self) -> float:
        return self.duration / self.m

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.duration, self.m + 1)


def _check_m(m):
    if int(m) != m or m < 2:
        raise ParameterError(f"grid size must be an integer >= 2, got {m}")


def simulate_motion(m: int, rng=None, duration: float = 1.0) -> DiscretePath:
    _check_m(m)
    gen = as_generator(rng)
    w = np.empty(m + 1)
    w[0] = 0.0
    np.cumsum(gen.standard_normal(m) * math.sqrt(duration / m), out=w[1:])
    return DiscretePath(w, "motion", duration)


def simulate_bridge(m: int, rng=None) -> DiscretePath:
    """B_t = W_t - t W_1 on the grid t = i/m."""
    w = simulate_motion(m, rng).values
    b = w - np.linspace(0.0, 1.0, m + 1) * w[-1]
    b[-1] = 0.0
    return DiscretePath(b, "bridge")


def grid_zeros(path: DiscretePath) -> np.ndarray:
    v = path.values
    z = v == 0.0
    z[:-1] |= v[:-1] * v[1:] < 0.0
    return np.flatnonzero(z)


@dataclass
class ExcursionSet:
    intervals: np.ndarray
    lengths: np.ndarray

    def __len__(self):
        return len(self.lengths)


def excursions(path: DiscretePath) -> ExcursionSet:
    """Intervals between successive grid zeros; one-step gaps count as part of the zero set."""
    z = grid_zeros(path)
    if z.size < 2:
        return ExcursionSet(np.empty((0, 2), dtype=np.int64), np.empty(0))
    starts, ends = z[:-1], z[1:]
    keep = ends - starts >= 2
    iv = np.column_stack([starts[keep], ends[keep]])
    return ExcursionSet(iv, (iv[:, 1] - iv[:, 0]) * path.dt)


@dataclass
class LocalTimeProfile:
    """Cumulative local time at 0 on the path grid."""

    times: np.ndarray
    L: np.ndarray
    epsilon: float | None
    alpha: float
    c: float
    method: str

    @property
    def total(self) -> float:
        return float(self.L[-1])


def step_local_time(values: np.ndarray, h: float) -> np.ndarray:
    """E[local time at 0 over each step | endpoint values], for Brownian steps of duration h.

    For endpoints a, b this is sqrt(h) * Phibar((|a|+|b|)/sqrt h) / phi((b-a)/sqrt h),
    the bridge expectation of the occupation density at 0.
    """
    a, b = values[:-1], values[1:]
    sh = math.sqrt(h)
    k = (np.abs(a) + np.abs(b)) / sh
    out = np.zeros(a.size)
    near = k < _FAR
    if np.any(near):
        d = (b[near] - a[near]) / sh
        out[near] = sh * np.exp(special.log_ndtr(-k[near]) + 0.5 * d * d + _LOG_SQRT_2PI)
    return out


def count_estimator_profile(path: DiscretePath, epsilon: float, p: StableParams = BROWNIAN) -> np.ndarray:
    """(Gamma(1-alpha)/c) eps^alpha N_(t,eps); excursions count when they end."""
    ex = excursions(path)
    long_ends = ex.intervals[ex.lengths > epsilon, 1]
    counts = np.zeros(path.m + 1)
    np.add.at(counts, long_ends, 1.0)
    return math.gamma(1 - p.alpha) / p.c * epsilon ** p.alpha * np.cumsum(counts)


def local_time_profile(path: DiscretePath, epsilon: float | None = None, method: str = "conditional",
                       p: StableParams = BROWNIAN) -> LocalTimeProfile:
    """Cumulative local time at 0.

    ``method="conditional"`` (default) sums the exact conditional expectation
    of each step's local time given the grid values, scaled by sqrt(2)/c.
    ``method="count"`` is the excursion-count estimator with threshold
    ``epsilon`` (default sqrt(dt)).
    """
    dt = path.dt
    if epsilon is not None and not epsilon > dt:
        raise ResolutionError(f"epsilon={epsilon} must exceed the grid step {dt}")
    if method == "conditional":
        inc = step_local_time(path.values, dt) * (math.sqrt(2.0) / p.c)
        L = np.concatenate(([0.0], np.cumsum(inc)))
    elif method == "count":
        eps = math.sqrt(dt) if epsilon is None else epsilon
        if not eps > dt:
            raise ResolutionError("grid too coarse for the count estimator")
        epsilon = eps
        L = count_estimator_profile(path, eps, p)
    else:
        raise ParameterError(f"unknown local time method {method!r}")
    return LocalTimeProfile(path.times, L, epsilon, p.alpha, p.c, method)


@dataclass
class Fragment:
    """The piece of ``source`` between grid indices ``start`` and ``end``."""

    source: DiscretePath = field(repr=False)
    start: int
    end: int
    local_time: float | None = None

    @property
    def G(self) -> float:
        return self.start * self.source.dt

    @property
    def D(self) -> float:
        return self.end * self.source.dt

    @property
    def length(self) -> float:
        return (self.end - self.start) * self.source.dt

    @property
    def standardized(self) -> DiscretePath:
        v = self.source.values[self.start:self.end + 1] / math.sqrt(self.length)
        return DiscretePath(v, "fragment", 1.0)

    def to_dict(self) -> dict:
        return {"G": self.G, "D": self.D, "length": self.length, "local_time": self.local_time,
                "start": self.start, "end": self.end}


def standardize_fragment(path: DiscretePath, interval, profile: LocalTimeProfile | None = None) -> Fragment:
    """Fragment over grid indices ``interval = (start, end)``, with Brownian rescaling to [0, 1]."""
    start, end = int(interval[0]), int(interval[1])
    if not 0 <= start < end <= path.m:
        raise DomainError("fragment interval must have positive length inside the path")
    lt = None if profile is None else float(profile.L[end] - profile.L[start])
    return Fragment(path, start, end, lt)


def _next_zero(zeros: np.ndarray, idx: int) -> int | None:
    k = np.searchsorted(zeros, idx, side="left")
    return int(zeros[k]) if k < zeros.size else None


def d_partition(path: DiscretePath, rng=None, profile: LocalTimeProfile | None = None) -> list[Fragment]:
    """Cut at the first grid zero after V_j, V_j uniform on [D_(j-1), 1]."""
    gen = as_generator(rng)
    m = path.m
    zeros = grid_zeros(path)
    prev = 0
    out = []
    while prev < m:
        v = gen.uniform(prev / m, 1.0)
        idx = max(math.ceil(v * m), prev + 1)
        d = _next_zero(zeros, idx)
        if d is None or m - d < 2:
            d = m
        out.append(standardize_fragment(path, (prev, d), profile))
        prev = d
    return out


def _snap_to_zero(zeros: np.ndarray, idx: int, prev: int) -> int | None:
    """Nearest grid zero strictly after ``prev``; ties go to the earlier zero."""
    k = np.searchsorted(zeros, idx, side="left")
    cands = [int(zeros[j]) for j in (k - 1, k) if 0 <= j < zeros.size and zeros[j] > prev]
    if not cands:
        return None
    return min(cands, key=lambda z: (abs(z - idx), z))


def t_partition(path: DiscretePath, profile: LocalTimeProfile, rng=None) -> list[Fragment]:
    """Cut at T_j = first grid time where L/L_1 exceeds Vhat_j = 1 - prod (1 - U_i)."""
    gen = as_generator(rng)
    m = path.m
    L = profile.L
    total = L[-1]
    if not total > 0:
        raise ResolutionError("local time over the path is zero at this resolution")
    zeros = grid_zeros(path)
    prev, rest = 0, 1.0
    out = []
    while prev < m:
        rest *= 1.0 - gen.uniform()
        target = (1.0 - rest) * total
        idx = int(np.searchsorted(L, target, side="right"))
        t = None if idx > m else _snap_to_zero(zeros, max(idx, prev + 1), prev)
        if t is None or m - t < 2:
            t = m
        out.append(standardize_fragment(path, (prev, t), profile))
        prev = t
    return out


def tau_fraction(profile: LocalTimeProfile, u: float, path: DiscretePath | None = None) -> float:
    """Grid version of inf{t : L_t / L_1 > u}."""
    if not 0.0 < u < 1.0:
        raise DomainError("u must lie in (0, 1)")
    L = profile.L
    idx = int(np.searchsorted(L, u * L[-1], side="right"))
    return profile.times[min(idx, L.size - 1)]


def simulate_pseudo_bridge(m: int, rng=None, p: StableParams = BROWNIAN, horizon: float = 1 / 16,
                           max_doublings: int = 80) -> DiscretePath:
    """Brownian motion run until its local time at 0 reaches 1, rescaled to unit length.

    The path keeps ``m`` steps: whenever the horizon doubles, every other
    grid point is dropped and ``m/2`` fresh steps are appended.  Local time
    is accumulated at the resolution each segment was simulated at and
    thinned along with the path.  The stopping time is the last grid zero at
    or before the first crossing of level 1 (the next zero if that one is
    the origin), so the result has between roughly m/2 and m steps.
    """
    _check_m(m)
    if m % 2:
        raise ParameterError("m must be even")
    gen = as_generator(rng)
    scale = math.sqrt(2.0) / p.c
    H = horizon
    v = simulate_motion(m, gen, H).values
    L = np.concatenate(([0.0], np.cumsum(step_local_time(v, H / m) * scale)))
    for _ in range(max_doublings + 1):
        if L[-1] > 1.0:
            idx = int(np.searchsorted(L, 1.0, side="right"))
            zeros = grid_zeros(DiscretePath(v, "motion", H))
            z = int(zeros[np.searchsorted(zeros, idx, side="right") - 1])
            if z < 2:
                later = zeros[zeros >= 2]
                z = int(later[0]) if later.size else -1
            if z >= 2:
                out = v[:z + 1] / math.sqrt(z * H / m)
                out[-1] = 0.0
                return DiscretePath(out, "pseudo-bridge", 1.0)
        H *= 2.0
        seg = np.concatenate(([v[-1]], v[-1] + np.cumsum(gen.standard_normal(m // 2) * math.sqrt(H / m))))
        inc = np.cumsum(step_local_time(seg, H / m) * scale)
        v = np.concatenate((v[::2], seg[1:]))
        L = np.concatenate((L[::2], L[-1] + inc))
    raise BudgetError("local time did not reach 1 within the doubling budget")


def path_swap(x: DiscretePath, u: float) -> DiscretePath:
    """Swap the excursion straddling u to the end: x[0,G_u] : x[D_u,1] : x[G_u,D_u]."""
    if not 0.0 < u < 1.0:
        raise DomainError("u must lie in (0, 1)")
    m = x.m
    zeros = grid_zeros(x)
    pos = u * m
    before = zeros[zeros <= pos]
    after = zeros[zeros > pos]
    if before.size == 0 or after.size == 0:
        raise StructuralError("path needs a zero before u and one after it")
    g, d = int(before[-1]), int(after[0])
    v = x.values
    y = np.concatenate((v[:g], v[d:m], v[g:d + 1]))
    return DiscretePath(y, x.kind if x.kind != "bridge" else "motion", x.duration)


def occupation_histogram(path: DiscretePath, bins) -> np.ndarray:
    """Counts of left-point grid values per bin (occupation measure in units of dt)."""
    return np.histogram(path.values[:-1], bins=bins)[0]


def straddling_excursion(path: DiscretePath, u: float) -> tuple[int, int]:
    """Grid indices (G_u, D_u) of the last zero <= u and the first zero > u."""
    zeros = grid_zeros(path)
    pos = u * path.m
    before = zeros[zeros <= pos]
    after = zeros[zeros > pos]
    if before.size == 0 or after.size == 0:
        raise StructuralError("no zero on one side of u")
    return int(before[-1]), int(after[0])


def simulate_bessel3_hitting(m: int, rng=None, max_steps: int = 50_000_000) -> float:
    """First passage of the 3-d Bessel process from 0 to 1.

    The process is simulated exactly as the norm of a 3-d Brownian motion on
    a grid of step 1/m; a passage between grid points is detected with the
    bridge crossing probability exp(-2 (1 - r_a)(1 - r_b)/dt) and its time
    interpolated linearly.
    """
    _check_m(m)
    gen = as_generator(rng)
    dt = 1.0 / m
    sd = math.sqrt(dt)
    chunk = max(1024, min(m, 1 << 16))
    pos = np.zeros(3)
    r_prev = 0.0
    steps = 0
    while steps < max_steps:
        w = pos + np.cumsum(gen.standard_normal((chunk, 3)) * sd, axis=0)
        r = np.sqrt(np.einsum("ij,ij->i", w, w))
        ra = np.concatenate(([r_prev], r[:-1]))
        hit = r >= 1.0
        gap = np.maximum(1.0 - ra, 0.0) * np.maximum(1.0 - r, 0.0)
        cross = gen.uniform(size=chunk) < np.exp(-2.0 * gap / dt)
        first = np.flatnonzero(hit | cross)
        if first.size:
            i = int(first[0])
            a, b = ra[i], r[i]
            if hit[i] and b > a:
                frac = (1.0 - a) / (b - a)
            else:
                frac = 0.5
            return (steps + i + frac) * dt
        pos = w[-1]
        r_prev = float(r[-1])
        steps += chunk
    raise BudgetError("Bessel process did not reach 1 within the step budget")


def sample_bessel3_hitting_series(size: int, rng=None, terms: int = 2000) -> np.ndarray:
    """Exact-in-law oracle: H = sum_k 2 E_k / (pi^2 k^2), tail replaced by its mean."""
    gen = as_generator(rng)
    k = np.arange(1, terms + 1)
    w = 2.0 / (math.pi ** 2 * k ** 2)
    head = np.zeros(size)
    for start in range(0, terms, 256):
        sl = slice(start, start + 256)
        head += gen.standard_exponential((size, w[sl].size)) @ w[sl]
    tail_mean = 1.0 / 3.0 - w.sum()
    return head + tail_mean


def path_to_csv(path: DiscretePath) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t", "value"])
    for t, v in zip(path.times, path.values):
        wr.writerow([repr(float(t)), repr(float(v))])
    return buf.getvalue()


def fragments_to_json(fragments: list[Fragment], extra: dict | None = None) -> str:
    doc = {"fragments": [f.to_dict() for f in fragments]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1)
