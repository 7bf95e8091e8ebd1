import numpy as np
import pytest

from mcdiff.mixture import MixtureSpec, PressureLaw

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


def isothermal_spec(cs, sigma, epsilon=0.01, d=1, ref=None):
    laws = tuple(PressureLaw.isothermal(c) for c in cs)
    ref = np.ones(len(cs)) if ref is None else ref
    return MixtureSpec(laws, ref, np.asarray(sigma, dtype=float), epsilon, d)


def sigma_from_pairs(n, pairs):
    s = np.zeros((n, n))
    for (i, j), v in pairs.items():
        s[i, j] = s[j, i] = v
    return s


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
