"""Samplers: beta, gamma, one-sided stable, GEM stick-breaking, size-biased orders."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..errors import ParameterError
from .rng import as_generator

OrderTag = Literal["stick-order", "ranked", "size-biased"]


@dataclass(frozen=True)
class StableParams:
    """Index ``alpha`` and Laplace coefficient ``c``: E exp(-xi tau_l) = exp(-l c xi^alpha)."""

    alpha: float
    c: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.c > 0.0:
            raise ParameterError(f"c must be positive, got {self.c}")

    def laplace_exponent(self, xi):
        return self.c * np.power(xi, self.alpha)


# Brownian motion with local time normalised as an occupation density.
BROWNIAN = StableParams(alpha=0.5, c=math.sqrt(2.0))


@dataclass
class LengthSequence:
    values: np.ndarray
    residual_mass: float = 0.0
    order_tag: OrderTag = "stick-order"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.residual_mass < 0:
            raise ParameterError("residual_mass must be nonnegative")

    def __len__(self):
        return len(self.values)

    @property
    def total(self) -> float:
        return float(math.fsum(self.values) + self.residual_mass)


def sample_beta(a: float, b: float, rng=None, size=None):
    if not (a > 0 and b > 0):
        raise ParameterError(f"beta parameters must be positive, got ({a}, {b})")
    return as_generator(rng).beta(a, b, size=size)


def sample_gamma(s: float, rng=None, size=None):
    if not s > 0:
        raise ParameterError(f"gamma shape must be positive, got {s}")
    return as_generator(rng).gamma(s, size=size)


def sample_positive_stable(alpha: float, rng=None, size=None):
    """Standard one-sided stable variable with E exp(-s S) = exp(-s^alpha).

    Chambers-Mallows-Stuck in Kanter's form: with U uniform on (0, pi) and
    E standard exponential,
    S = sin(alpha U) / sin(U)^(1/alpha) * (sin((1-alpha) U) / E)^((1-alpha)/alpha).
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    gen = as_generator(rng)
    u = gen.uniform(0.0, math.pi, size=size)
    e = gen.standard_exponential(size=size)
    return (np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
            * (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha))


def sample_stable(p: StableParams, level: float = 1.0, rng=None, size=None):
    """Sample tau_level of the subordinator with Laplace exponent level*c*xi^alpha."""
    if not level > 0:
        raise ParameterError(f"level must be positive, got {level}")
    scale = (level * p.c) ** (1.0 / p.alpha)
    return scale * sample_positive_stable(p.alpha, rng, size=size)


def gem_lengths(theta: float, tail_tolerance: float = 1e-9, rng=None,
                block: int = 16) -> LengthSequence:
    """GEM(theta) stick-breaking, truncated once the unbroken stick is below tolerance."""
    if not theta > 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if not 0.0 < tail_tolerance < 1.0:
        raise ParameterError(f"tail_tolerance must lie in (0, 1), got {tail_tolerance}")
    gen = as_generator(rng)
    pieces = []
    remaining = 1.0
    while remaining >= tail_tolerance:
        w = gen.beta(1.0, theta, size=block)
        left = remaining * np.cumprod(np.concatenate(([1.0], 1.0 - w)))
        q = left[:-1] * w
        stop = np.flatnonzero(left[1:] < tail_tolerance)
        if stop.size:
            k = stop[0] + 1
            pieces.append(q[:k])
            remaining = left[k]
            break
        pieces.append(q)
        remaining = left[-1]
    values = np.concatenate(pieces)
    # residual is the exact complement so the total is 1 up to rounding
    residual = max(0.0, 1.0 - math.fsum(values))
    return LengthSequence(values, residual, "stick-order")


def rank_lengths(seq: LengthSequence) -> LengthSequence:
    """Nonincreasing rearrangement; ties keep their original order."""
    order = np.argsort(-seq.values, kind="stable")
    return LengthSequence(seq.values[order], seq.residual_mass, "ranked")


def size_biased_order(weights, rng=None) -> np.ndarray:
    """Random permutation drawn by successive weight-proportional picks without replacement.

    Uses the exponential race: index i gets key E_i / w_i and the keys are
    sorted, which has the same law as sequential proportional sampling.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ParameterError("weights must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ParameterError("weights must be finite and positive")
    keys = as_generator(rng).standard_exponential(w.size) / w
    return np.argsort(keys, kind="stable")


def size_biased_reorder(seq: LengthSequence, rng=None) -> LengthSequence:
    perm = size_biased_order(seq.values, rng)
    return LengthSequence(seq.values[perm], seq.residual_mass, "size-biased")


def uniform_stick_breaking(total: float = 1.0, tail_tolerance: float = 1e-9, rng=None):
    """Shares total*U_j*prod(1-U_i): GEM(1) scaled by ``total``."""
    seq = gem_lengths(1.0, tail_tolerance, rng)
    return total * seq.values
