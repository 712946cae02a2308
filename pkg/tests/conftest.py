import numpy as np
import pytest

from workload_lab import kernels

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=kernels.available())
def backend(request):
    return request.param


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, passed, detail)."""
    def record(number, passed, detail):
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE[number] = f"criterion {number}: {status}  {detail}"
        return passed
    return record


@pytest.fixture
def skip_criterion():
    def record(number, reason):
        _ACCEPTANCE[number] = f"criterion {number}: SKIP  {reason}"
        pytest.skip(reason)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
