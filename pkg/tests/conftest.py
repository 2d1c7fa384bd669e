import numpy as np
import pytest

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def record(number, passed, detail):
    """Log one check of a criterion; several checks of one criterion are ANDed."""
    if number in ACCEPTANCE:
        prev_ok, prev_detail = ACCEPTANCE[number]
        passed, detail = prev_ok and passed, f"{prev_detail}; {detail}"
    ACCEPTANCE[number] = (bool(passed), detail)
    return passed


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
