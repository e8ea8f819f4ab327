import numpy as np
import pytest

from regbreaks.synth import fig2_spec, gen_series


@pytest.fixture
def rng():
    return np.random.default_rng(20140101)


@pytest.fixture(scope="session")
def fig2_series():
    return gen_series(fig2_spec(seed=0))


CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    CRITERIA[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
