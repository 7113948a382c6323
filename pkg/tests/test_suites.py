import math

import numpy as np
import pytest

from bridgecut import suites
from bridgecut.errors import ParameterError
from bridgecut.parallel import replicate_map, resolve_threads
from bridgecut.randkit import StableParams


def test_replicate_map_is_schedule_independent():
    fn = lambda g: float(g.uniform())
    a = replicate_map(fn, 300, 5, threads=1, chunk=7)
    b = replicate_map(fn, 300, 5, threads=3, chunk=64)
    assert a == b and len(set(a)) == 300
    assert replicate_map(fn, 10, 5, offset=290) == a[290:]


def test_resolve_threads(monkeypatch):
    monkeypatch.delenv("BRIDGECUT_THREADS", raising=False)
    assert resolve_threads() == 1
    monkeypatch.setenv("BRIDGECUT_THREADS", "3")
    assert resolve_threads() == 3 and resolve_threads(2) == 2
    with pytest.raises(ParameterError):
        resolve_threads(0)


@pytest.mark.parametrize("name", ["distributions", "partitions", "mappings", "bridge", "pointproc"])
def test_quick_suites_pass(name):
    rows = suites.run_suite(name, seed=1, quick=True)
    assert rows and all(s == name for s, _ in rows)
    assert all(r.passed for _, r in rows), [r.line() for _, r in rows if not r.passed]


def test_suite_is_deterministic():
    a = [r.statistic for _, r in suites.run_suite("distributions", seed=3, quick=True)]
    b = [r.statistic for _, r in suites.run_suite("distributions", seed=3, quick=True)]
    assert a == b


def test_unknown_suite():
    with pytest.raises(ParameterError):
        suites.run_suite("nope")


def test_corrupted_constant_fails_bridge_suite():
    with suites.override_params(StableParams(0.5, 1.0)):
        assert suites.current_params().c == 1.0
        rows = suites.run_suite("bridge", seed=1, quick=True)
    assert suites.current_params().c == pytest.approx(math.sqrt(2))
    failed = {r.name for _, r in rows if not r.passed}
    assert any("Rayleigh" in n for n in failed)
