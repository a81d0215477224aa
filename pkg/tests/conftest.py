import numpy as np
import pytest

from gdfpca._kernels import lag_reconstruct

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def one_factor_scores(rng, n, m, K, noise=0.0):
    """Scores built exactly from the lag model plus optional noise."""
    f = rng.standard_normal(n + K)
    beta = rng.standard_normal((K + 1, m))
    alpha = rng.standard_normal(m)
    chi = lag_reconstruct(f, beta, alpha)
    if noise:
        chi = chi + noise * rng.standard_normal(chi.shape)
    return chi, f, beta, alpha
