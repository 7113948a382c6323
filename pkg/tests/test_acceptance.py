"""Full-scale acceptance run: one test per numbered criterion.

Each suite runs once per session at full scale with seed 1; every criterion prints a single
PASS/FAIL line summarising its checks. Run alone with ``pytest -m acceptance -s``.
"""
import pytest

from bridgecut import suites

pytestmark = pytest.mark.acceptance

SEED = 1

# criterion -> (suite, runtime budget in seconds or None)
CRITERIA = {
    1: ("partitions", 60),
    2: ("partitions", 60),
    3: ("partitions", 60),
    4: ("mappings", 120),
    5: ("bridge", 600),
    6: ("bridge", 600),
    7: ("bridge", 600),
    8: ("bridge", 600),
    9: ("bridge", 600),
    10: ("mappings", 900),
    11: ("bridge", 600),
    12: ("pointproc", None),
}

_cache = {}


def _reports(suite):
    if suite not in _cache:
        _cache[suite] = [r for _, r in suites.run_suite(suite, seed=SEED, quick=False)]
    return _cache[suite]


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    suite, budget = CRITERIA[number]
    reports = [r for r in _reports(suite) if r.name.startswith(f"[{number}]")]
    assert reports, f"no checks registered for criterion {number}"
    slow = [r for r in reports if budget is not None and r.runtime > budget]
    ok = all(r.passed for r in reports) and not slow
    worst = max(reports, key=lambda r: (not r.passed, r.runtime))
    with capsys.disabled():
        print(f"\ncriterion {number:2d} {'PASS' if ok else 'FAIL'}: {len(reports)} checks; "
              f"{worst.line()} ({worst.runtime:.1f}s)")
    assert not slow, [f"{r.name}: {r.runtime:.0f}s > {budget}s" for r in slow]
    assert ok, [r.line() for r in reports if not r.passed]
