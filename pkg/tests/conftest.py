import random
import sys

import pytest
from hypothesis import HealthCheck, settings

from divheight.poly import PolyMap, random_form
from divheight.resultant import macaulay_resultant

settings.register_profile(
    "default",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("default")


def random_morphism(rng: random.Random, N: int, d: int, max_terms: int = 3, coeff_range: int = 3) -> PolyMap:
    while True:
        F = PolyMap([random_form(rng, N + 1, d, max_terms, coeff_range) for _ in range(N + 1)])
        if macaulay_resultant(F) != 0:
            return F


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
