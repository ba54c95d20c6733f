import numpy as np
import pytest

from wncs.plant import pendulum_preset

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def pendulum():
    return pendulum_preset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def _report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
