from pathlib import Path

import numpy as np
import pytest

from basketlevy import BasketModel, Gaussian, KoBoL, Null
from basketlevy.config import load_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Collect one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def _record(label: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
        print(_ACCEPTANCE[-1])

    return _record


@pytest.fixture(scope="session")
def configs_dir():
    return CONFIGS


def config(name):
    return load_config(CONFIGS / f"{name}.yaml")


@pytest.fixture
def kobol_fixture():
    return KoBoL(nu=0.5, c_plus=1.0, c_minus=1.0, lambda_plus=5.0, lambda_minus=-5.0)


@pytest.fixture
def bs_model():
    return BasketModel([Gaussian(0.04)], [Null()], [[0.0]])


@pytest.fixture
def margrabe_model():
    # sigma1 = 0.3, sigma2 = 0.2, rho = 0.5 via one common Brownian factor
    return BasketModel([Gaussian(0.05), Gaussian(0.0175)], [Gaussian(1.0), Null()],
                       [[0.2, 0.0], [0.15, 0.0]])


def random_kobol(rng, nu_range=(0.05, 0.95)):
    return KoBoL(
        nu=rng.uniform(*nu_range),
        c_plus=rng.uniform(0.1, 2.0),
        c_minus=rng.uniform(0.1, 2.0),
        lambda_plus=rng.uniform(1.0, 10.0),
        lambda_minus=-rng.uniform(1.0, 10.0),
        mu=rng.uniform(-0.5, 0.5),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(2013)
