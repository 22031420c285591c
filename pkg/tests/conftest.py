import numpy as np
import pytest

from g2speckle.geometry import make_rng, sample_ball


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture(scope="session")
def cloud100():
    """N=100 uniform ball of diameter 6 pi, fixed seed."""
    return sample_ball(100, 6 * np.pi, 7)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        ok, detail = RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
