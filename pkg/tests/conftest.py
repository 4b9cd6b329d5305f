import math

import numpy as np
import pytest

from kaonkraus.hilbert import Momentum, distinguishable_layout, identical_layout
from kaonkraus.params import PhysicalParams

# Kaon-like widths in units of Γ_S
GAMMA_L = 0.0017502
DELTA_M = 0.4739

ACCEPTANCE_LINES: list[str] = []


def epsilon_for(delta_l: float, eps_im: float = 0.0) -> complex:
    """ε with the given imaginary part and 2 Re ε / (1 + |ε|²) = delta_l."""
    if delta_l == 0:
        return complex(0.0, eps_im)
    re = (1 - math.sqrt(1 - delta_l**2 * (1 + eps_im**2))) / delta_l
    return complex(re, eps_im)


def make_params(delta_l=0.0, lam=0.0, gamma_s=1.0, gamma_l=GAMMA_L, delta_m=DELTA_M, eps_im=0.0):
    return PhysicalParams(
        gamma_s=gamma_s, gamma_l=gamma_l, m_s=0.0, m_l=delta_m, epsilon=epsilon_for(delta_l, eps_im), lam=lam
    )


@pytest.fixture
def kaon():
    return make_params(delta_l=0.05, lam=0.1)


@pytest.fixture
def clean():
    return make_params()


@pytest.fixture
def momenta():
    return Momentum.along_z("p", 1.0, 0.0), Momentum.along_z("q", 1.0, 0.0)


@pytest.fixture
def boosted():
    """Unequal Lorentz factors: γ_p = 1.25, γ_q = 2."""
    return Momentum.along_z("p", 1.0, 0.75), Momentum.along_z("q", 1.0, math.sqrt(3.0))


@pytest.fixture
def dist(momenta):
    return distinguishable_layout(*momenta)


@pytest.fixture
def ident(momenta):
    return identical_layout(*momenta)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def acceptance_report():
    def record(criterion: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
