from __future__ import annotations

import numpy as np
import pytest

from multicurve.bootstrap import bootstrap_all, bootstrap_single_curve
from multicurve.marketdata import ReferenceScenario, generate_reference_scenario
from multicurve.timegrid import Tenor


@pytest.fixture(scope="session")
def reference():
    return ReferenceScenario()


@pytest.fixture(scope="session")
def ref_quotes(reference):
    return generate_reference_scenario(reference)


@pytest.fixture(scope="session")
def ref_curves(ref_quotes):
    cs, _ = bootstrap_all(ref_quotes)
    return cs


@pytest.fixture(scope="session")
def ref_single6m(ref_quotes):
    cs, _ = bootstrap_single_curve(ref_quotes, Tenor.M6)
    return cs


@pytest.fixture(scope="session")
def zero_spread_quotes():
    return generate_reference_scenario(ReferenceScenario(spreads={t: 0.0 for t in (Tenor.M1, Tenor.M3, Tenor.M6, Tenor.M12)}))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
