from __future__ import annotations

import numpy as np
import pytest

from cybersim.stochastic import CashMoments
from cybersim.underwriting import ContractSpec, Holding, Portfolio


@pytest.fixture
def panel_contracts():
    rows = [
        (500e3, 200e3, 125e3, 0.10),
        (1e6, 400e3, 350e3, 0.15),
        (2e6, 1e6, 1e6, 0.16),
        (5e6, 2.5e6, 1.25e6, 0.20),
        (10e6, 4e6, 4e6, 0.30),
    ]
    return [ContractSpec(lim, CashMoments(m, s), claim_probability=p) for lim, m, s, p in rows]


@pytest.fixture
def make_portfolio(panel_contracts):
    def build(name, counts, capital=None):
        return Portfolio(name, tuple(Holding(c, n) for c, n in zip(panel_contracts, counts)), 0.5, capital)

    return build


@pytest.fixture
def alpha(make_portfolio):
    return make_portfolio("Alpha", [200, 0, 0, 0, 0])


@pytest.fixture
def charlie(make_portfolio):
    return make_portfolio("Charlie", [50, 20, 15, 5, 0])


@pytest.fixture
def echo(make_portfolio):
    return make_portfolio("Echo", [0, 0, 0, 0, 10])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Records one summary line per acceptance criterion for the terminal report."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])
    return lines.append


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
