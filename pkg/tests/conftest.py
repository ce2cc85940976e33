import numpy as np
import pytest

from rosenblatt.spectral import nystrom_eig

_SPECTRA = {}


def spectrum(H: float, cells: int = 2000, keep: int = 200):
    key = (float(H), cells, keep)
    if key not in _SPECTRA:
        _SPECTRA[key] = nystrom_eig(float(H), cells, keep)
    return _SPECTRA[key]


@pytest.fixture(scope="session")
def spec075():
    return spectrum(0.75)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion at the end of the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
