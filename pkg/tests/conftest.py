import itertools
import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])


def brute_subgroups(orders):
    """All subgroups of a product of cyclic groups as frozensets, by
    closing every generating pair (enough for rank <= 2 groups) and
    every triple for rank 3."""
    elems = list(itertools.product(*[range(d) for d in orders]))

    def close(gens):
        S = {tuple(0 for _ in orders)}
        frontier = list(S)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = tuple((a + b) % d for a, b, d in zip(x, g, orders))
                if y not in S:
                    S.add(y)
                    frontier.append(y)
        return frozenset(S)

    out = set()
    for r in range(len(orders) + 1):
        for gens in itertools.combinations(elems, r):
            out.add(close(gens))
    return out
