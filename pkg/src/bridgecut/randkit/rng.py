"""Reproducible random streams keyed by ``(root_seed, stream_id)``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A named substream of a root seed.

    The same ``(root_seed, stream_id)`` pair always yields the same
    generator state, independently of which thread asks for it.  Distinct
    stream ids are spawned children of one ``SeedSequence`` and are therefore
    statistically independent.
    """

    root_seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        root = int(self.root_seed) & _MASK64
        sid = int(self.stream_id) & _MASK64
        ss = np.random.SeedSequence(entropy=root, spawn_key=(sid,))
        object.__setattr__(self, "_gen", np.random.Generator(np.random.PCG64(ss)))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def substream(self, stream_id: int) -> "RngStream":
        return RngStream(self.root_seed, stream_id)


def as_generator(rng) -> np.random.Generator:
    """Coerce ``RngStream``, ``Generator``, int seed or None to a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def replicate_streams(root_seed: int, n: int, offset: int = 0) -> list[RngStream]:
    """Per-replicate streams, ``stream_id = offset + replicate index``."""
    return [RngStream(root_seed, offset + i) for i in range(n)]
