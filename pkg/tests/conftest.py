import hypothesis
import numpy as np
import pytest

from gkcascade import synthetic
from gkcascade.marketdata import compute_log_returns

hypothesis.settings.register_profile("ci", deadline=None, max_examples=100)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def panel20():
    return synthetic.factor_panel(n_days=750, seed=7)


@pytest.fixture(scope="session")
def returns20(panel20):
    return compute_log_returns(panel20)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
