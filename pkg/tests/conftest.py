"""Shared fixtures: the handful of models the whole suite leans on."""

import pytest

from levy_expfun import ExponentialJumps, LevyModel, SubordinatorModel


@pytest.fixture
def killed_unit() -> LevyModel:
    # I ~ Uniform(0,1): the one-line sanity model
    return LevyModel.killed_drift(1.0, 1.0)


@pytest.fixture
def killed_two() -> LevyModel:
    # density 2(1-t) on (0,1)
    return LevyModel.killed_drift(2.0, 1.0)


@pytest.fixture
def dufresne() -> LevyModel:
    """xi = 2B - 2t, so I = 1/(2*Gamma(1,1)) and everything is closed form."""
    return LevyModel.brownian_drift(0.0, -2.0, 2.0)


@pytest.fixture
def kou() -> LevyModel:
    """Two-sided jump diffusion with no closed law; the cross-check workhorse."""
    return LevyModel.double_exp(0.0, -1.5, 1.0, 1.0, 2.0, 1.0, 3.0)


@pytest.fixture
def drift_sub() -> SubordinatorModel:
    return SubordinatorModel(kill=1.0, drift=1.0, jumps=None)


@pytest.fixture
def jumpy_sub() -> SubordinatorModel:
    return SubordinatorModel(kill=0.5, drift=1.0, jumps=ExponentialJumps(1.0, 2.0))


@pytest.fixture
def drift_sub_model(drift_sub) -> LevyModel:
    return LevyModel.neg_subordinator(drift_sub)


@pytest.fixture
def jumpy_sub_model(jumpy_sub) -> LevyModel:
    return LevyModel.neg_subordinator(jumpy_sub)
