import itertools

import pytest
from hypothesis import HealthCheck, settings

from boxtopos.logic import gbit, pr_presentation
from boxtopos.poset import FinitePoset

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def brute_force_upper_sets(p: FinitePoset) -> set:
    """Oracle: filter every subset by upward closure."""
    out = set()
    elems = list(p)
    for r in range(len(elems) + 1):
        for sub in itertools.combinations(elems, r):
            s = set(sub)
            if all(b in s for a in s for b in p.up(a)):
                out.add(frozenset(s))
    return out


def random_poset(draw_pairs, n: int) -> FinitePoset:
    """Poset on ``0..n-1`` generated by pairs ``i < j`` (acyclic by construction)."""
    elems = [str(i) for i in range(n)]
    pairs = [(str(i), str(j)) for i, j in draw_pairs if i < j < n]
    return FinitePoset.generated(elems, pairs)


@pytest.fixture(scope="session")
def gbit_b():
    return gbit()


@pytest.fixture(scope="session")
def pr_b():
    return pr_presentation()


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
