"""Random mappings of [n]: digraph decomposition, component orderings and walk encodings.

Public objects use 1-based labels as in ``image[i] = M(i)``; the vectorised
helpers work on 0-based integer arrays.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

import numpy as np

from .errors import ParameterError, StructuralError
from .randkit.rng import as_generator

MAX_SAMPLE_N = 10_000_000
MAX_ENUMERATE_N = 7


class OrderingMode(enum.Enum):
    CyclesFirst = "cycles-first"
    BasinsFirst = "basins-first"

    @classmethod
    def parse(cls, value) -> "OrderingMode":
        if isinstance(value, cls):
            return value
        for mode in cls:
            if value in (mode.value, mode.name):
                return mode
        raise ParameterError(f"unknown ordering mode {value!r}")


@dataclass(frozen=True)
class Mapping:
    """A function [n] -> [n] stored as ``image`` with 1-based entries."""

    image: np.ndarray

    def __post_init__(self):
        img = np.asarray(self.image, dtype=np.int64)
        if img.ndim != 1 or img.size == 0:
            raise ParameterError("a mapping needs a nonempty 1-d image")
        if img.min() < 1 or img.max() > img.size:
            raise StructuralError("image entries must lie in [1..n]")
        object.__setattr__(self, "image", img)

    @property
    def n(self) -> int:
        return int(self.image.size)

    def zero_based(self) -> np.ndarray:
        return self.image - 1

    @classmethod
    def from_zero_based(cls, f) -> "Mapping":
        return cls(np.asarray(f, dtype=np.int64) + 1)

    def __call__(self, i: int) -> int:
        return int(self.image[i - 1])


@dataclass
class FunctionalDigraph:
    """Cycles, rooted trees and basins of a mapping digraph (1-based labels).

    ``cycles[j]`` starts at its least element and follows the mapping;
    ``basins[j]`` is the basin of ``cycles[j]``.
    """

    n: int
    cyclic_points: frozenset
    cycles: list
    tree_of: dict
    basins: list
    heights: dict
    root_of: np.ndarray = field(repr=False)
    depth: np.ndarray = field(repr=False)
    children: list = field(repr=False)

    @property
    def num_cycles(self) -> int:
        return len(self.cycles)


def sample_uniform_mapping(n: int, rng=None) -> Mapping:
    if n < 1:
        raise ParameterError("n must be at least 1")
    if n > MAX_SAMPLE_N:
        raise ParameterError(f"n above the memory guard {MAX_SAMPLE_N}")
    return Mapping(as_generator(rng).integers(1, n + 1, size=n))


def analyze_digraph(m: Mapping) -> FunctionalDigraph:
    """Decompose by peeling in-degree-0 vertices, then search trees from the cyclic roots."""
    n = m.n
    f = m.zero_based().tolist()
    indeg = [0] * n
    for v in f:
        indeg[v] += 1
    alive = [True] * n
    queue = deque(i for i in range(n) if indeg[i] == 0)
    while queue:
        v = queue.popleft()
        alive[v] = False
        w = f[v]
        indeg[w] -= 1
        if indeg[w] == 0:
            queue.append(w)
    cyclic = alive

    children = [[] for _ in range(n)]
    for v in range(n):
        if not cyclic[v]:
            children[f[v]].append(v)

    cycles = []
    seen = [False] * n
    for c in range(n):
        if cyclic[c] and not seen[c]:
            cyc = [c]
            seen[c] = True
            x = f[c]
            while x != c:
                cyc.append(x)
                seen[x] = True
                x = f[x]
            cycles.append(cyc)

    root_of = np.empty(n, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    tree_of, heights = {}, {}
    for cyc in cycles:
        for c in cyc:
            members = [c]
            root_of[c] = c
            stack = [c]
            h = 0
            while stack:
                v = stack.pop()
                for u in children[v]:
                    root_of[u] = c
                    depth[u] = depth[v] + 1
                    h = max(h, depth[u])
                    members.append(u)
                    stack.append(u)
            tree_of[c + 1] = sorted(x + 1 for x in members)
            heights[c + 1] = int(h)
    basins = [sorted(v for c in cyc for v in tree_of[c + 1]) for cyc in cycles]
    return FunctionalDigraph(
        n=n,
        cyclic_points=frozenset(i + 1 for i in range(n) if cyclic[i]),
        cycles=[[c + 1 for c in cyc] for cyc in cycles],
        tree_of=tree_of,
        basins=basins,
        heights=heights,
        root_of=root_of + 1,
        depth=depth,
        children=[[u + 1 for u in ch] for ch in children],
    )


@dataclass(frozen=True)
class Component:
    basin: list
    cycle: list
    roots: list


def _around_cycle(cycle: list, c: int) -> list:
    """Roots in the order M(c), M^2(c), ..., c for a cycle listed in mapping order."""
    k = cycle.index(c)
    return cycle[k + 1:] + cycle[:k + 1]


def order_components(d: FunctionalDigraph, mode) -> list[Component]:
    mode = OrderingMode.parse(mode)
    comps = []
    for cyc, basin in zip(d.cycles, d.basins):
        if mode is OrderingMode.CyclesFirst:
            key, c = cyc[0], cyc[0]
        else:
            key = basin[0]
            c = int(d.root_of[basin[0] - 1])
        comps.append((key, Component(basin, cyc, _around_cycle(cyc, c))))
    comps.sort(key=lambda kc: kc[0])
    return [c for _, c in comps]


def encode_tree_walk(root: int, tree, m: Mapping, digraph: FunctionalDigraph | None = None) -> np.ndarray:
    """Depth-first contour of the tree at ``root``: +1 entering a vertex, -1 leaving it.

    Children are visited in increasing label order.
    """
    d = digraph if digraph is not None else analyze_digraph(m)
    if root not in d.cyclic_points or sorted(tree) != d.tree_of[root]:
        raise StructuralError(f"vertex set is not the tree rooted at {root}")
    steps = []
    stack = [(root, 0)]
    steps.append(1)
    while stack:
        v, i = stack[-1]
        ch = d.children[v - 1]
        if i < len(ch):
            stack[-1] = (v, i + 1)
            stack.append((ch[i], 0))
            steps.append(1)
        else:
            stack.pop()
            steps.append(-1)
    return np.array(steps, dtype=np.int8)


@dataclass
class MappingWalk:
    steps: np.ndarray
    component_boundaries: np.ndarray
    zero_return_indices: np.ndarray
    search: np.ndarray = field(default=None, repr=False)

    @property
    def levels(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.steps, dtype=np.int64)))

    @property
    def max_level(self) -> int:
        return int(self.levels.max())


def build_mapping_walk(d: FunctionalDigraph, m: Mapping, mode) -> MappingWalk:
    """Concatenate the tree walks in the order given by ``mode``."""
    parts, bounds, search = [], [], []
    pos = 0
    for comp in order_components(d, mode):
        bounds.append(pos)
        for r in comp.roots:
            w = encode_tree_walk(r, d.tree_of[r], m, d)
            parts.append(w)
            pos += w.size
            search.extend(_preorder(r, d))
    steps = np.concatenate(parts)
    levels = np.cumsum(steps, dtype=np.int64)
    zeros = np.flatnonzero(levels == 0) + 1
    return MappingWalk(steps, np.array(bounds, dtype=np.int64), zeros, np.array(search, dtype=np.int64))


def _preorder(root: int, d: FunctionalDigraph) -> list:
    out, stack = [], [root]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(reversed(d.children[v - 1]))
    return out


@dataclass
class WalkStatistics:
    components: list
    cyclic_scaled: float
    scaled_max: float


def scaled_walk_statistics(w: MappingWalk, d: FunctionalDigraph, mode) -> WalkStatistics:
    """Per component (|B_j|/n, |C_j|/sqrt n) in ``mode`` order, |C_n|/sqrt n and max level/sqrt n."""
    n = d.n
    rn = math.sqrt(n)
    comps = [(Fraction(len(c.basin), n), len(c.cycle)) for c in order_components(d, mode)]
    return WalkStatistics(
        components=[(float(b), k / rn) for b, k in comps],
        cyclic_scaled=len(d.cyclic_points) / rn,
        scaled_max=w.max_level / rn,
    )


def sample_single_cycle_mapping(n: int, rng=None, max_tries: int = 1_000_000) -> Mapping:
    """Uniform mapping conditioned to have exactly one cycle, by rejection."""
    gen = as_generator(rng)
    for _ in range(max_tries):
        m = sample_uniform_mapping(n, gen)
        if fast_statistics(m.zero_based()).num_cycles == 1:
            return m
    raise ParameterError("rejection sampler exhausted its tries")


# ---------------------------------------------------------------------------
# vectorised pointer jumping, on batches of 0-based mappings (last axis)


def _gather(a, idx):
    return np.take_along_axis(a, idx, axis=-1)


def _rounds(n: int) -> int:
    return max(1, math.ceil(math.log2(max(n, 2))))


def batch_structure(F: np.ndarray) -> dict:
    """Cyclic mask, tree roots, depths and cycle labels for each row of ``F``.

    The label of a vertex is the least cyclic point of the cycle its tree hangs on.
    """
    F = np.asarray(F)
    B, n = F.shape
    K = _rounds(n)
    ar = np.broadcast_to(np.arange(n), (B, n))
    g = F
    for _ in range(K):
        g = _gather(g, g)
    cyc = np.zeros((B, n), dtype=bool)
    np.put_along_axis(cyc, g, True, axis=-1)
    nxt = np.where(cyc, ar, F)
    dist = (~cyc).astype(np.int64)
    for _ in range(K):
        dist = dist + _gather(dist, nxt)
        nxt = _gather(nxt, nxt)
    root = nxt
    lab = ar.copy()
    h = F
    for _ in range(K + 1):
        lab = np.minimum(lab, _gather(lab, h))
        h = _gather(h, h)
    # on cyclic points lab is the cycle minimum; push it down the trees
    label = _gather(np.where(cyc, lab, n), root)
    return {"cyclic": cyc, "root": root, "depth": dist, "label": label}


@dataclass(frozen=True)
class ComponentStats:
    n: int
    num_cyclic: int
    num_cycles: int
    first_basin_cf: int
    first_basin_bf: int
    max_height: int


def fast_statistics(f) -> ComponentStats:
    """Component counts of one 0-based mapping via pointer jumping."""
    f = np.asarray(f, dtype=np.int64)
    n = f.size
    s = batch_structure(f[None, :])
    cyc, label, depth = s["cyclic"][0], s["label"][0], s["depth"][0]
    is_label = cyc & (label == np.arange(n))
    bsize = np.bincount(label, minlength=n)
    cmin = int(np.argmax(cyc))
    return ComponentStats(n, int(cyc.sum()), int(is_label.sum()), int(bsize[cmin]),
                          int(bsize[label[0]]), int(depth.max()))


def _encode(seqs: np.ndarray, base: int) -> np.ndarray:
    out = np.zeros(seqs.shape[0], dtype=np.int64)
    for j in range(seqs.shape[1]):
        out = out * base + seqs[:, j]
    return out


def _decode(code: int, base: int, length: int) -> tuple:
    digits = []
    for _ in range(length):
        code, r = divmod(int(code), base)
        digits.append(r)
    return tuple(x for x in reversed(digits) if x)


def batch_tables(F: np.ndarray) -> dict:
    """Per-row summaries used by exact enumeration."""
    B, n = F.shape
    s = batch_structure(F)
    cyc, label, root = s["cyclic"], s["label"], s["root"]
    ar = np.arange(n)
    rows = np.arange(B)[:, None]
    is_label = cyc & (label == ar)
    flat = (rows * n + label).ravel()
    bsize = np.bincount(flat, minlength=B * n).reshape(B, n)
    csize = np.bincount(flat[cyc.ravel()], minlength=B * n).reshape(B, n)
    bmin = np.full(B * n, n, dtype=np.int64)
    np.minimum.at(bmin, flat, np.broadcast_to(ar, (B, n)).ravel())
    bmin = bmin.reshape(B, n)
    cmin = np.argmax(cyc, axis=1)
    first_cf = bsize[np.arange(B), cmin]
    first_bf = bsize[np.arange(B), label[:, 0]]

    big = 2 * n
    key_cf = np.where(is_label, ar, big + ar)
    key_bf = np.where(is_label, bmin, big + ar)
    seq_cf = _gather(csize, np.argsort(key_cf, axis=1))
    seq_bf = _gather(csize, np.argsort(key_bf, axis=1))
    bseq_cf = _gather(bsize, np.argsort(key_cf, axis=1))
    bseq_bf = _gather(bsize, np.argsort(key_bf, axis=1))

    # position of each cyclic point along its cycle, counted from the cycle minimum
    pos = np.zeros((B, n), dtype=np.int64)
    cur = np.broadcast_to(ar, (B, n)).copy()
    active = is_label.copy()
    for t in range(1, n + 1):
        cur = _gather(F, cur)
        bi, vi = np.nonzero(active)
        pos[bi, cur[bi, vi]] = t
        active &= cur != ar
        if not active.any():
            break
    tsize = np.bincount((rows * n + root).ravel(), minlength=B * n).reshape(B, n)
    key_tree = np.where(cyc, label * (n + 1) + pos, big * (n + 1) + ar)
    tseq_cf = _gather(tsize, np.argsort(key_tree, axis=1))
    return {
        "num_cycles": is_label.sum(axis=1),
        "num_cyclic": cyc.sum(axis=1),
        "first_basin_cf": first_cf,
        "first_basin_bf": first_bf,
        "cycle_seq_cf": _encode(seq_cf, n + 1),
        "cycle_seq_bf": _encode(seq_bf, n + 1),
        "basin_seq_cf": _encode(bseq_cf, n + 1),
        "basin_seq_bf": _encode(bseq_bf, n + 1),
        "tree_seq_cf": _encode(tseq_cf, n + 1),
    }


def _all_mappings_with_first(n: int, first: int) -> np.ndarray:
    k = np.arange(n ** (n - 1), dtype=np.int64)
    cols = [np.full(k.size, first, dtype=np.int64)]
    for j in range(n - 2, -1, -1):
        cols.append((k // n ** j) % n)
    return np.column_stack(cols)


@dataclass
class ExactTables:
    """Exact laws over all n^n mappings of [n]; values are Fractions."""

    n: int
    num_cycles: dict
    num_cyclic: dict
    first_basin: dict
    cycle_sequence: dict
    basin_sequence: dict
    tree_sequence_cf: dict

    def mean_first_basin(self, mode) -> Fraction:
        mode = OrderingMode.parse(mode)
        return sum((k * p for k, p in self.first_basin[mode.value].items()), Fraction(0))

    def to_json(self) -> str:
        def enc(d):
            return [{"value": list(k) if isinstance(k, tuple) else k,
                     "num": p.numerator, "den": p.denominator} for k, p in sorted(d.items())]

        doc = {
            "n": self.n,
            "num_cycles": enc(self.num_cycles),
            "num_cyclic": enc(self.num_cyclic),
            "first_basin": {k: enc(v) for k, v in self.first_basin.items()},
            "cycle_sequence": {k: enc(v) for k, v in self.cycle_sequence.items()},
            "basin_sequence": {k: enc(v) for k, v in self.basin_sequence.items()},
            "tree_sequence_cf": {str(m): enc(v) for m, v in sorted(self.tree_sequence_cf.items())},
        }
        return json.dumps(doc, indent=1)


def enumerate_exact(n: int) -> ExactTables:
    """Tabulate component laws over all n^n mappings, chunked by the image of 1."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    if n > MAX_ENUMERATE_N:
        raise ParameterError(f"refusing to enumerate {n}^{n} mappings; the guard is n <= {MAX_ENUMERATE_N}")
    keys = ("num_cycles", "num_cyclic", "first_basin_cf", "first_basin_bf", "cycle_seq_cf",
            "cycle_seq_bf", "basin_seq_cf", "basin_seq_bf")
    tallies = {k: {} for k in keys}
    tree = {}
    for first in range(n):
        t = batch_tables(_all_mappings_with_first(n, first))
        for k in keys:
            vals, cnt = np.unique(t[k], return_counts=True)
            for v, c in zip(vals.tolist(), cnt.tolist()):
                tallies[k][v] = tallies[k].get(v, 0) + c
        pairs = np.stack([t["num_cyclic"], t["tree_seq_cf"]], axis=1)
        vals, cnt = np.unique(pairs, axis=0, return_counts=True)
        for (mm, code), c in zip(vals.tolist(), cnt.tolist()):
            tree.setdefault(mm, {})
            tree[mm][code] = tree[mm].get(code, 0) + c
    total = n ** n

    def law(d, decode=False):
        return {(_decode(k, n + 1, n) if decode else k): Fraction(c, total) for k, c in sorted(d.items())}

    tree_cond = {}
    for mm, d in tree.items():
        tot = sum(d.values())
        tree_cond[mm] = {_decode(k, n + 1, n): Fraction(c, tot) for k, c in sorted(d.items())}
    return ExactTables(
        n=n,
        num_cycles=law(tallies["num_cycles"]),
        num_cyclic=law(tallies["num_cyclic"]),
        first_basin={OrderingMode.CyclesFirst.value: law(tallies["first_basin_cf"]),
                     OrderingMode.BasinsFirst.value: law(tallies["first_basin_bf"])},
        cycle_sequence={OrderingMode.CyclesFirst.value: law(tallies["cycle_seq_cf"], True),
                        OrderingMode.BasinsFirst.value: law(tallies["cycle_seq_bf"], True)},
        basin_sequence={OrderingMode.CyclesFirst.value: law(tallies["basin_seq_cf"], True),
                        OrderingMode.BasinsFirst.value: law(tallies["basin_seq_bf"], True)},
        tree_sequence_cf=tree_cond,
    )


def cyclic_count_law(n: int) -> dict:
    """Exact P(|C_n| = m) = n!/(n-m)! * m * n^(n-m-1) / n^n."""
    out = {}
    for m in range(1, n + 1):
        ways = math.perm(n, m) * m * n ** (n - m - 1) if m < n else math.factorial(n)
        out[m] = Fraction(ways, n ** n)
    return out


def is_exchangeable(law: dict) -> bool:
    """True when every rearrangement of each sequence has the same probability."""
    for seq, p in law.items():
        for perm in set(permutations(seq)):
            if law.get(perm, Fraction(0)) != p:
                return False
    return True


def mapping_cycle_law(n: int) -> dict:
    """Exact law of the number of cycles K_n, by enumeration."""
    return enumerate_exact(n).num_cycles
