import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from folnerlab.words import code_of
from folnerlab.zoo import from_json

settings.register_profile("repo", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


@pytest.fixture
def Z():
    return from_json({"family": "Z"})


@pytest.fixture
def Z2():
    return from_json({"family": "Zd", "d": 2})


@pytest.fixture
def circle():
    return from_json({"family": "CircleRationals"})


def zcodes(lo, hi):
    """Codes of g0^k for k in lo..hi."""
    return [code_of(f"g0^{k}") if k else 1 for k in range(lo, hi + 1)]


def F(p, q=1):
    return Fraction(p, q)


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
