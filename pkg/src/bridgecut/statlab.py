"""Goodness-of-fit tests, weighted estimators and report assembly.

Every test returns a ``StatReport`` whose decision is derived from its
statistic and threshold, never set by hand.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import integrate, stats

from .errors import ContractError, DegenerateError, ParameterError

Decision = Literal["pass", "fail", "warn"]
MIN_KS_SAMPLES = 100


@dataclass
class StatReport:
    """A named verification result.

    ``direction`` says which side of the threshold passes: ``"le"`` for
    distances (statistic <= threshold) and ``"ge"`` for power checks such as
    "rejected at 5 sigma" (statistic >= threshold).
    """

    name: str
    statistic: float
    threshold: float
    sample_sizes: tuple = ()
    direction: Literal["le", "ge"] = "le"
    p_value: float | None = None
    seed: int | None = None
    runtime: float = 0.0
    warnings: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def decision(self) -> Decision:
        stat = float(self.statistic)
        ok = stat <= self.threshold if self.direction == "le" else stat >= self.threshold
        if not (math.isfinite(stat) and ok):
            return "fail"
        return "warn" if self.warnings else "pass"

    @property
    def passed(self) -> bool:
        return self.decision != "fail"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sample_sizes"] = list(self.sample_sizes)
        d["decision"] = self.decision
        return _jsonable(d)

    def line(self) -> str:
        op = "<=" if self.direction == "le" else ">="
        return (f"{self.decision.upper():4s} {self.name}: {self.statistic:.6g} "
                f"{op} {self.threshold:.6g}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def bonferroni(level: float, k: int) -> float:
    """Per-test level so that k tests keep family-wise level ``level``."""
    if k < 1:
        raise ParameterError("need at least one test")
    return level / k


def ecdf(samples):
    """Sorted support and ECDF heights (right-continuous)."""
    x = np.sort(np.asarray(samples, dtype=float))
    return x, np.arange(1, x.size + 1) / x.size


def _check_size(n, name):
    if n < MIN_KS_SAMPLES:
        raise ParameterError(f"{name} needs at least {MIN_KS_SAMPLES} samples, got {n}")


def ks_one_sample(samples, cdf: Callable, name: str = "ks", threshold: float | None = None,
                  level: float = 0.01, seed=None) -> StatReport:
    """Sup distance between the ECDF and ``cdf`` with its asymptotic p-value.

    Without an explicit ``threshold`` the asymptotic critical value at
    ``level`` is used.
    """
    t0 = time.perf_counter()
    x = np.sort(np.asarray(samples, dtype=float))
    _check_size(x.size, "ks_one_sample")
    F = np.asarray(cdf(x), dtype=float)
    if F.shape != x.shape or np.any(np.diff(F) < -1e-12) or np.any((F < -1e-12) | (F > 1 + 1e-12)):
        raise ContractError("cdf must be a nondecreasing map into [0, 1] on the sample support")
    n = x.size
    # compare at distinct values, using left limits so atoms in cdf are handled
    v, first = np.unique(x, return_index=True)
    upper = np.append(first[1:], n) / n
    lower = first / n
    Fv = F[first]
    Fl = np.asarray(cdf(np.nextafter(v, -np.inf)), dtype=float)
    d = float(max(np.max(np.abs(upper - Fv)), np.max(np.abs(Fl - lower)), 0.0))
    p = float(stats.kstwobign.sf(math.sqrt(n) * d))
    if threshold is None:
        threshold = float(stats.kstwobign.isf(level) / math.sqrt(n))
    return StatReport(name, d, threshold, (n,), p_value=p, seed=seed,
                      runtime=time.perf_counter() - t0)


def ks_two_sample(a, b, name: str = "ks2", threshold: float | None = None,
                  level: float = 0.01, seed=None) -> StatReport:
    """Two-sample KS with asymptotic p-value at effective size nm/(n+m)."""
    t0 = time.perf_counter()
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_size(a.size, "ks_two_sample")
    _check_size(b.size, "ks_two_sample")
    d = float(stats.ks_2samp(a, b, method="asymp").statistic)
    ne = a.size * b.size / (a.size + b.size)
    p = float(stats.kstwobign.sf(math.sqrt(ne) * d))
    if threshold is None:
        threshold = float(stats.kstwobign.isf(level) / math.sqrt(ne))
    return StatReport(name, d, threshold, (a.size, b.size), p_value=p, seed=seed,
                      runtime=time.perf_counter() - t0)


def merge_sparse(observed, expected, min_expected: float = 5.0):
    """Greedily merge adjacent cells (in flattened order) until each expects >= min_expected."""
    obs = np.asarray(observed, dtype=float).ravel()
    exp = np.asarray(expected, dtype=float).ravel()
    out_o, out_e = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            out_o.append(acc_o)
            out_e.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if out_e:
            out_o[-1] += acc_o
            out_e[-1] += acc_e
        else:
            out_o.append(acc_o)
            out_e.append(acc_e)
    return np.array(out_o), np.array(out_e)


def chi_square_counts(observed, probabilities, name: str = "chi2", level: float = 0.01,
                      seed=None, min_expected: float = 5.0) -> StatReport:
    """Pearson test of cell counts against cell probabilities, merging sparse cells."""
    t0 = time.perf_counter()
    obs = np.asarray(observed, dtype=float).ravel()
    prob = np.asarray(probabilities, dtype=float).ravel()
    if obs.shape != prob.shape:
        raise ParameterError("observed and probabilities must have the same number of cells")
    if np.any(prob < 0):
        raise ParameterError("probabilities must be nonnegative")
    n = obs.sum()
    prob = prob / prob.sum()
    exp = n * prob
    warns = []
    if np.any(exp < min_expected):
        obs, exp = merge_sparse(obs, exp, min_expected)
        warns.append(f"merged sparse cells down to {obs.size}")
    dof = obs.size - 1
    if dof < 1:
        raise ParameterError("need at least two cells after merging")
    stat = float(np.sum((obs - exp) ** 2 / exp))
    threshold = float(stats.chi2.isf(level, dof))
    p = float(stats.chi2.sf(stat, dof))
    return StatReport(name, stat, threshold, (int(n),), p_value=p, seed=seed,
                      runtime=time.perf_counter() - t0, warnings=warns,
                      details={"dof": dof})


def cell_probabilities(density: Callable, bins: Sequence) -> np.ndarray:
    """Integrate a 1-d or 2-d density over the cells of a rectangular grid."""
    if len(bins) == 1:
        e = np.asarray(bins[0], dtype=float)
        return np.array([integrate.quad(density, lo, hi, limit=200)[0]
                         for lo, hi in zip(e[:-1], e[1:])])
    if len(bins) == 2:
        ex, ey = (np.asarray(b, dtype=float) for b in bins)
        out = np.empty((ex.size - 1, ey.size - 1))
        for i in range(ex.size - 1):
            for j in range(ey.size - 1):
                out[i, j] = integrate.dblquad(lambda y, x: density(x, y), ex[i], ex[i + 1],
                                              ey[j], ey[j + 1], epsabs=1e-10, epsrel=1e-8)[0]
        return out
    raise ParameterError("only 1-d and 2-d grids are supported")


def chi_square_grid(samples, density: Callable | None, bins: Sequence, name: str = "chi2",
                    level: float = 0.01, seed=None, probabilities=None) -> StatReport:
    """Histogram ``samples`` on a grid and test against ``density`` (or given cell probabilities).

    ``bins`` is a list with one edge array per coordinate.  Samples outside
    the grid are ignored; the cell probabilities are renormalised to the
    grid accordingly, so the grid should cover essentially all the mass.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    edges = [np.asarray(b, dtype=float) for b in bins]
    if x.shape[1] != len(edges):
        raise ParameterError("sample dimension does not match the number of edge arrays")
    counts, _ = np.histogramdd(x, bins=edges)
    if probabilities is None:
        if density is None:
            raise ParameterError("need a density or explicit cell probabilities")
        probabilities = cell_probabilities(density, edges)
    return chi_square_counts(counts, probabilities, name=name, level=level, seed=seed)


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    n: int


def plain_mean(samples) -> Estimate:
    f = np.asarray(samples, dtype=float)
    return Estimate(float(f.mean()), float(f.std(ddof=1) / math.sqrt(f.size)), f.size)


def weighted_mean(samples, weights) -> Estimate:
    """Self-normalised weighted mean sum(w f)/sum(w) with delta-method standard error."""
    f = np.asarray(samples, dtype=float)
    w = np.asarray(weights, dtype=float)
    if f.shape != w.shape:
        raise ParameterError("samples and weights must have the same shape")
    if np.any(w < 0):
        raise ParameterError("weights must be nonnegative")
    sw = w.sum()
    if not sw > 0:
        raise DegenerateError("total weight is zero")
    r = float(np.dot(w, f) / sw)
    se = float(math.sqrt(np.sum(w * w * (f - r) ** 2)) / sw)
    return Estimate(r, se, f.size)


def poststratified_mean(samples, weights, keys, edges, masses) -> Estimate:
    """Weighted mean combined over strata of ``keys`` whose target masses are known.

    Inside stratum ``[edges[k], edges[k+1])`` the self-normalised weighted mean is used;
    the strata are then mixed with ``masses``. With heavy-tailed weights this confines
    the tail to the stratum that produces it.
    """
    f = np.asarray(samples, dtype=float)
    w = np.asarray(weights, dtype=float)
    k = np.asarray(keys, dtype=float)
    q = np.asarray(masses, dtype=float)
    edges = np.asarray(edges, dtype=float)
    if not (f.shape == w.shape == k.shape) or edges.size != q.size + 1:
        raise ParameterError("shape mismatch between samples, weights, keys, edges and masses")
    if np.any(q < 0) or not math.isclose(q.sum(), 1.0, abs_tol=1e-9):
        raise ParameterError("stratum masses must be a probability vector")
    idx = np.searchsorted(edges, k, side="right") - 1
    value, var = 0.0, 0.0
    for j, mass in enumerate(q):
        sel = idx == j
        if not sel.any():
            raise DegenerateError(f"stratum {j} is empty")
        est = weighted_mean(f[sel], w[sel])
        value += mass * est.value
        var += (mass * est.se) ** 2
    return Estimate(float(value), math.sqrt(var), f.size)


def compare_estimates(a: Estimate, b: Estimate, name: str = "agreement", sigmas: float = 3.0,
                      seed=None) -> StatReport:
    """Pass when |a - b| is within ``sigmas`` combined standard errors."""
    se = math.hypot(a.se, b.se)
    z = abs(a.value - b.value) / se if se > 0 else (0.0 if a.value == b.value else math.inf)
    return StatReport(name, z, sigmas, (a.n, b.n), seed=seed,
                      details={"a": a.value, "a_se": a.se, "b": b.value, "b_se": b.se})


def mean_within(samples, target: float, tol: float, name: str = "mean", seed=None) -> StatReport:
    """Pass when the sample mean is within ``tol`` of ``target``."""
    est = plain_mean(samples)
    return StatReport(name, abs(est.value - target), tol, (est.n,), seed=seed,
                      details={"mean": est.value, "se": est.se, "target": target})


def rejection_sigmas(samples, null_value: float, sigmas: float = 5.0, name: str = "reject",
                     seed=None) -> StatReport:
    """Power check: pass when the mean sits at least ``sigmas`` SE away from ``null_value``."""
    est = plain_mean(samples)
    z = abs(est.value - null_value) / est.se if est.se > 0 else math.inf
    return StatReport(name, z, sigmas, (est.n,), direction="ge", seed=seed,
                      details={"mean": est.value, "se": est.se, "null": null_value})


def exact_equality(name: str, mismatches: int, checked: int, seed=None) -> StatReport:
    """Report for exact identities: the statistic is the count of mismatches."""
    return StatReport(name, float(mismatches), 0.0, (checked,), seed=seed)


def max_error(name: str, error: float, tol: float, n: int, seed=None) -> StatReport:
    return StatReport(name, float(error), tol, (n,), seed=seed)


def reports_to_json(reports: Sequence[StatReport], config: dict | None = None) -> str:
    doc = {"config": _jsonable(config or {}), "reports": [r.to_dict() for r in reports],
           "all_passed": all(r.passed for r in reports)}
    return json.dumps(doc, indent=2, sort_keys=True)


SUMMARY_FIELDS = ("suite", "name", "statistic", "threshold", "direction", "decision",
                  "p_value", "sample_sizes", "seed", "runtime")


def reports_to_csv(rows: Sequence[tuple[str, StatReport]]) -> str:
    """One CSV line per (suite, report) pair."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for suite, r in rows:
        w.writerow([suite, r.name, repr(float(r.statistic)), repr(float(r.threshold)),
                    r.direction, r.decision, "" if r.p_value is None else repr(r.p_value),
                    ";".join(str(s) for s in r.sample_sizes),
                    "" if r.seed is None else r.seed, f"{r.runtime:.3f}"])
    return buf.getvalue()
