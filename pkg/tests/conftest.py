"""Shared model fixtures for the test suite."""

import numpy as np
import pytest

from riskdp.model import InvestmentParams, LQParams, build_investment, build_lq, build_tabular


@pytest.fixture(scope="session")
def lq_fixture():
    """Reference linear-quadratic instance: grid [-3, 3] with 41 points,
    9 actions bounded by 2, 5 noise atoms, discount 0.5."""
    params = LQParams(
        sigma=1.0, action_bound=2.0, x_lo=-3.0, x_hi=3.0,
        grid_points=41, n_actions=9, noise_atoms=5,
    )
    return build_lq(params, 0.5)


@pytest.fixture(scope="session")
def investment_fixture():
    """Reference wealth instance with a zero risk-free rate: grid [0, 2]
    with 21 points so wealth 1 sits exactly on the grid."""
    params = InvestmentParams(
        mu=0.05, r=0.0, sigma=0.2, action_bound=1.0,
        wealth_lo=0.0, wealth_hi=2.0, grid_points=21, n_actions=5, noise_atoms=3,
    )
    return build_investment(params, 0.9)


@pytest.fixture()
def two_state_model():
    """Two states, two deterministic actions (move to the action's index);
    state 0 costs 1 per stage, state 1 is free.  The optimal value is
    (1, 0)."""
    kernel = [
        [[1.0, 0.0], [0.0, 1.0]],
        [[1.0, 0.0], [0.0, 1.0]],
    ]
    costs = [[1.0, 1.0], [0.0, 0.0]]
    return build_tabular(kernel, costs, 0.5)
