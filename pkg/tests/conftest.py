"""Shared fixtures and the acceptance-summary hook."""

import numpy as np
import pytest

from antitrotter.oracle import random_psd

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collector for per-criterion pass/fail lines printed at session end."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(181422)


def pd_pair(tag: int, d: int, lo: float = 1e-3, hi: float = 1e3):
    """Deterministic random PD pair with log-uniform spectra in [lo, hi]."""
    A = random_psd([tag, 0], d, {"log_range": (lo, hi)})
    B = random_psd([tag, 1], d, {"log_range": (lo, hi)})
    return A, B


def haar_unitary(rng, d: int) -> np.ndarray:
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(X)
    phase = np.diag(R) / np.abs(np.diag(R))
    return Q * phase.conj()
