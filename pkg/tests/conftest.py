import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fcnls.groundstate import solve  # noqa: E402
from fcnls.model import ProblemParams  # noqa: E402
from fcnls.spectral import Grid  # noqa: E402


@pytest.fixture(scope="session")
def ref():
    return ProblemParams(N=2, s=0.8, b=-0.1, alpha=1.0, p=3.0, epsilon=-1)


@pytest.fixture(scope="session")
def grid128():
    return Grid(2, 128, 8.0)


@pytest.fixture(scope="session")
def gs128(ref, grid128):
    return solve(ref, grid128)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
