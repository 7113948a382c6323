"""Exchangeable interval partitions, their discrete D/T coarsenings and exact set-partition laws."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Iterator, Sequence

import numpy as np

from .errors import ParameterError, StructuralError
from .randkit.rng import as_generator


@dataclass
class IntervalPartition:
    """Intervals of [0, 1] labelled 0..n-1 by decreasing length.

    ``order[k]`` is the label of the k-th interval from the left and
    ``marks`` holds optional per-interval weights in label order.
    """

    lengths: np.ndarray
    order: np.ndarray
    marks: np.ndarray | None = None

    def __post_init__(self):
        self.lengths = np.asarray(self.lengths, dtype=float)
        self.order = np.asarray(self.order, dtype=np.int64)
        if sorted(self.order.tolist()) != list(range(self.lengths.size)):
            raise StructuralError("order must be a permutation of the interval labels")
        if abs(math.fsum(self.lengths) - 1.0) > 1e-12:
            raise StructuralError("lengths must sum to 1")

    @property
    def n(self) -> int:
        return int(self.lengths.size)

    @property
    def endpoints(self) -> np.ndarray:
        e = np.concatenate(([0.0], np.cumsum(self.lengths[self.order])))
        e[-1] = 1.0
        return e

    @property
    def placed_lengths(self) -> np.ndarray:
        return self.lengths[self.order]


def _ranked(lengths) -> np.ndarray:
    x = np.asarray(lengths, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ParameterError("need a nonempty list of lengths")
    if np.any(~(x > 0)):
        raise ParameterError("lengths must be positive")
    s = math.fsum(x)
    if abs(s - 1.0) > 1e-9:
        raise ParameterError(f"lengths must sum to 1, got {s}")
    return np.sort(x / s)[::-1]


def make_exchangeable(lengths, rng=None) -> IntervalPartition:
    """Place the intervals in a uniformly random order, independent of their lengths."""
    x = _ranked(lengths)
    return IntervalPartition(x, as_generator(rng).permutation(x.size))


@dataclass(frozen=True)
class SetPartition:
    """Blocks of [1..n] stored as sorted tuples, sorted by least element."""

    n: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(int(v) for v in b)) for b in self.blocks))
        flat = [v for b in blocks for v in b]
        if any(len(b) == 0 for b in blocks) or sorted(flat) != list(range(1, self.n + 1)):
            raise StructuralError("blocks must be disjoint, nonempty and cover [1..n]")
        object.__setattr__(self, "blocks", blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)


@dataclass
class DiscreteCut:
    intervals: list
    partition: SetPartition
    ordered_blocks: list
    J: int


def _cut_result(ip: IntervalPartition, cuts: list) -> DiscreteCut:
    e = ip.endpoints
    intervals, blocks = [], []
    prev = 0
    for c in cuts:
        intervals.append((float(e[prev]), float(e[c])))
        blocks.append(tuple(int(v) + 1 for v in ip.order[prev:c]))
        prev = c
    return DiscreteCut(intervals, SetPartition(ip.n, blocks), blocks, len(cuts))


def discrete_d_partition(ip: IntervalPartition, rng=None) -> DiscreteCut:
    """Cut at the right end of the interval holding V_j, V_j uniform on [D_(j-1), 1].

    Blocks hold 1-based length-rank labels.  A draw landing exactly on an
    endpoint belongs to the interval on its right.
    """
    gen = as_generator(rng)
    e = ip.endpoints
    cuts, k = [], 0
    while k < ip.n:
        v = gen.uniform(e[k], 1.0)
        idx = int(np.searchsorted(e, v, side="right"))
        k = max(min(idx, ip.n), k + 1)
        cuts.append(k)
    return _cut_result(ip, cuts)


def discrete_t_partition(ip: IntervalPartition, rng=None) -> DiscreteCut:
    """Cut at endpoints picked uniformly among those to the right of the last cut."""
    gen = as_generator(rng)
    cuts, k = [], 0
    while k < ip.n:
        k = int(gen.integers(k + 1, ip.n + 1))
        cuts.append(k)
    return _cut_result(ip, cuts)


def set_partitions(n: int) -> Iterator[tuple]:
    """All partitions of [1..n] as tuples of blocks, via restricted growth strings."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    a = [0] * n

    def rec(i, m):
        if i == n:
            blocks = [[] for _ in range(m)]
            for v, b in enumerate(a):
                blocks[b].append(v + 1)
            yield tuple(tuple(b) for b in blocks)
            return
        for b in range(m + 1):
            a[i] = b
            yield from rec(i + 1, max(m, b + 1))

    a[0] = 0
    yield from rec(1, 1)


def pt_form(blocks: Sequence, n: int | None = None) -> Fraction:
    """(1/n!) prod (|A_j| - 1)!, the law of the T-induced partition of [n]."""
    sizes = [len(b) for b in blocks]
    n = sum(sizes) if n is None else n
    return Fraction(math.prod(math.factorial(s - 1) for s in sizes), math.factorial(n))


def _block_mass(lengths, block):
    return sum((lengths[a - 1] for a in block), type(lengths[0])(0))


def _check_blocks(lengths, blocks):
    n = len(lengths)
    flat = sorted(v for b in blocks for v in b)
    if flat != list(range(1, n + 1)) or any(len(b) == 0 for b in blocks):
        raise StructuralError("blocks must partition the labels 1..n")


def exact_d_block_probability(lengths, blocks: Sequence, representatives: Sequence | None = None):
    """Probability that the D-partition has the ordered blocks ``blocks``.

    With ``representatives`` (one label per block) this is the probability
    that additionally block j is closed by the right end of that interval:
    (1/n!) prod (|A_j|-1)! lambda(a_j) / sum_(i>=j) lambda(A_i).
    Without, the sum over all choices of representatives, in which each
    lambda(a_j) becomes lambda(A_j).  Exact for Fraction lengths.
    """
    lengths = list(lengths)
    _check_blocks(lengths, blocks)
    n = len(lengths)
    masses = [_block_mass(lengths, b) for b in blocks]
    tails = [sum(masses[j:], type(masses[0])(0)) for j in range(len(blocks))]
    comb = pt_form(blocks, n)
    if isinstance(lengths[0], Fraction):
        p = comb
    else:
        p = float(comb)
    for j, b in enumerate(blocks):
        if representatives is None:
            num = masses[j]
        else:
            a = representatives[j]
            if a not in b:
                raise StructuralError("each representative must lie in its block")
            num = lengths[a - 1]
        p = p * num / tails[j]
    return p


def exact_d_block_probability_by_representatives(lengths, blocks):
    """The same quantity as ``exact_d_block_probability`` by explicit summation over representatives."""
    total = 0
    for reps in product(*blocks):
        total = total + exact_d_block_probability(lengths, blocks, reps)
    return total


@lru_cache(maxsize=None)
def _perm_table(k: int) -> np.ndarray:
    return np.array(list(permutations(range(k))), dtype=np.int64).reshape(-1, k)


def stick_identity_sum(masses) -> float:
    """sum over orders sigma of prod_j m_sigma(j) / sum_(i>=j) m_sigma(i); equals 1."""
    m = np.asarray(masses, dtype=float)
    P = _perm_table(m.size)
    seq = m[P]
    tails = np.cumsum(seq[:, ::-1], axis=1)[:, ::-1]
    return float(np.sum(np.prod(seq / tails, axis=1)))


def symmetrized_d_probability(lengths, blocks) -> float:
    """P(D-partition = {A_1..A_k}) as an unordered partition: sum over block orders."""
    lengths = np.asarray(lengths, dtype=float)
    _check_blocks(lengths.tolist(), blocks)
    masses = np.array([lengths[np.asarray(b) - 1].sum() for b in blocks])
    return float(pt_form(blocks, lengths.size)) * stick_identity_sum(masses)


def symmetrized_d_probability_exact(lengths, blocks) -> Fraction:
    return sum((exact_d_block_probability(lengths, [blocks[i] for i in p])
                for p in permutations(range(len(blocks)))), Fraction(0))


@dataclass
class ExactDist:
    """A finite law with exact rational probabilities."""

    probabilities: dict

    def __post_init__(self):
        total = sum(self.probabilities.values(), Fraction(0))
        if total != 1:
            raise StructuralError(f"probabilities sum to {total}, not 1")

    @property
    def support(self) -> list:
        return sorted(self.probabilities)

    def mean(self) -> Fraction:
        return sum((Fraction(k) * p for k, p in self.probabilities.items()), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, ExactDist):
            return NotImplemented
        keys = set(self.probabilities) | set(other.probabilities)
        return all(self.probabilities.get(k, 0) == other.probabilities.get(k, 0) for k in keys)

    def to_json(self) -> str:
        return json.dumps([{"value": k, "num": p.numerator, "den": p.denominator}
                           for k, p in sorted(self.probabilities.items())])


def stirling_cycle_numbers(n: int) -> list:
    """Row n of the signless Stirling numbers of the first kind, index k = 0..n."""
    row = [1]
    for m in range(n):
        new = [0] * (m + 2)
        for k, c in enumerate(row):
            new[k] += m * c
            new[k + 1] += c
        row = new
    return row


def stirling_cycle_dist(n: int) -> ExactDist:
    """Law of the number of cycles of a uniform permutation of [n]: |s(n,k)|/n!."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    row = stirling_cycle_numbers(n)
    f = math.factorial(n)
    return ExactDist({k: Fraction(c, f) for k, c in enumerate(row) if c})


def bernoulli_cycle_dist(n: int) -> ExactDist:
    """The same law as a sum of independent Bernoulli(1/i), i = 1..n."""
    dist = {0: Fraction(1)}
    for i in range(1, n + 1):
        p = Fraction(1, i)
        new = {}
        for k, q in dist.items():
            new[k] = new.get(k, 0) + q * (1 - p)
            new[k + 1] = new.get(k + 1, 0) + q * p
        dist = {k: v for k, v in new.items() if v}
    return ExactDist(dist)


def jd_law(lengths) -> ExactDist:
    """Exact law of the number of D-blocks, by dynamic programming over remaining label sets.

    From remaining labels R the next block B is closed with probability
    lambda(B)/lambda(R) (|B|-1)! (|R|-|B|)! / |R|!; the product of these over a
    block sequence telescopes to the ordered-block probability.
    """
    lengths = list(lengths)
    n = len(lengths)
    zero = lengths[0] * 0
    full = (1 << n) - 1
    mass = [zero] * (1 << n)
    size = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        mass[mask] = mass[mask & (mask - 1)] + lengths[low]
        size[mask] = size[mask & (mask - 1)] + 1
    fact = [math.factorial(i) for i in range(n + 1)]

    @lru_cache(maxsize=None)
    def law(R):
        if R == 0:
            return {0: 1}
        out = {}
        r = size[R]
        B = R
        while B:
            b = size[B]
            w = mass[B] / mass[R] * Fraction(fact[b - 1] * fact[r - b], fact[r]) \
                if isinstance(zero, Fraction) else \
                mass[B] / mass[R] * fact[b - 1] * fact[r - b] / fact[r]
            for j, q in law(R & ~B).items():
                out[j + 1] = out.get(j + 1, 0) + w * q
            B = (B - 1) & R
        return out

    res = law(full)
    if isinstance(zero, Fraction):
        return ExactDist({k: Fraction(v) for k, v in res.items()})
    return res


def jt_law(n: int) -> ExactDist:
    """Exact law of the number of T-blocks: each cut is uniform among remaining endpoints."""

    @lru_cache(maxsize=None)
    def q(r):
        if r == 0:
            return {0: Fraction(1)}
        out = {}
        for b in range(1, r + 1):
            for j, p in q(r - b).items():
                out[j + 1] = out.get(j + 1, 0) + p / r
        return out

    return ExactDist(q(n))


def t_block_law(n: int) -> dict:
    """Exact law of the T-induced partition, by recursion over cuts (length-free)."""
    out = {}

    def rec(k, prob, blocks, order):
        if k == n:
            key = SetPartition(n, blocks)
            out[key] = out.get(key, 0) + prob
            return
        r = n - k
        for c in range(k + 1, n + 1):
            rec(c, prob / r, blocks + [tuple(order[k:c])], order)

    for order in permutations(range(1, n + 1)):
        rec(0, Fraction(1, math.factorial(n)), [], order)
    return out


def kallenberg_local_time(ip: IntervalPartition, top_n: int, u: float) -> float:
    """Fraction of the ``top_n`` longest intervals whose right endpoint is <= u."""
    if not 1 <= top_n <= ip.n:
        raise ParameterError("top_n must lie between 1 and the number of intervals")
    right = ip.endpoints[1:]
    pos = np.empty(ip.n, dtype=np.int64)
    pos[ip.order] = np.arange(ip.n)
    ends = right[pos[:top_n]]
    return float(np.count_nonzero(ends <= u + 1e-15) / top_n)


def kallenberg_profile(left_ends, lengths, top_n: int, grid) -> np.ndarray:
    """Kallenberg normalised count on a grid, for intervals given by left ends and lengths."""
    lengths = np.asarray(lengths, dtype=float)
    if top_n > lengths.size:
        raise ParameterError("top_n exceeds the number of intervals")
    top = np.argsort(-lengths, kind="stable")[:top_n]
    ends = np.sort(np.asarray(left_ends, dtype=float)[top] + lengths[top])
    return np.searchsorted(ends, np.asarray(grid, dtype=float), side="right") / top_n


def empirical_intensity(partitions: Sequence, bins) -> np.ndarray:
    """Mean number of interval lengths per bin, summed over all intervals of each replicate."""
    edges = np.asarray(bins, dtype=float)
    total = np.zeros(edges.size - 1)
    for lengths in partitions:
        total += np.histogram(np.asarray(lengths, dtype=float), bins=edges)[0]
    return total / max(len(partitions), 1)


def intensity_bin_masses(bins, alpha: float = 0.5) -> np.ndarray:
    """Integral of alpha x^(-1) (1-x)^(alpha-1) over each bin, by quadrature."""
    from scipy import integrate

    edges = np.asarray(bins, dtype=float)
    f = lambda x: alpha / x * (1.0 - x) ** (alpha - 1.0)
    return np.array([integrate.quad(f, lo, hi, limit=200)[0] for lo, hi in zip(edges[:-1], edges[1:])])
