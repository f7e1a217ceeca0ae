import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relayauction.channel import LinkBudget  # noqa: E402

ACCEPTANCE_LINES: list = []


def random_links(rng, n, W=10e6):
    """Vector of plausible link budgets spanning weak to strong links (linear SINRs)."""
    return LinkBudget(
        sinr_si=10 ** rng.uniform(-1, 4, n),
        sinr_sj=10 ** rng.uniform(-2, 1.5, n),
        gamma_ij=10 ** rng.uniform(0, 5, n),
        gamma_sj=10 ** rng.uniform(-2, 1, n),
        bandwidth_w=W,
    )


def pick(lb, k):
    return LinkBudget(float(lb.sinr_si[k]), float(lb.sinr_sj[k]), float(lb.gamma_ij[k]),
                      float(lb.gamma_sj[k]), lb.bandwidth_w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
