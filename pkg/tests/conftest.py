import numpy as np
import pytest

from holomux import bundled_photo, symmetrize_target

_acceptance_lines = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def photo512():
    return symmetrize_target(bundled_photo())


@pytest.fixture(scope="session")
def photo256():
    return symmetrize_target(bundled_photo((256, 256)))


@pytest.fixture(scope="session")
def photo64():
    return symmetrize_target(bundled_photo((64, 64)))


@pytest.fixture
def report():
    """Record a one-line PASS/FAIL verdict shown in the terminal summary."""

    def _report(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _acceptance_lines.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
