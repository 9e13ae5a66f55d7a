"""Shared fixtures: the expensive equilibrium solves are computed once per session."""

import numpy as np
import pytest
from dataclasses import replace

from mfpricing import (
    Bounds,
    IntensityParams,
    InventoryRange,
    ModelParams,
    PenaltyParams,
    SolverSettings,
    TimeGrid,
    solve_equilibrium,
)


def oversell_params(alpha_neg=0.2, phi_neg=0.06, beta=0.3) -> ModelParams:
    return ModelParams(
        inv=InventoryRange(q_max=5, q_min=-2),
        intensity=IntensityParams(scale=1.0, kappa=1.0, beta=beta),
        penalty=PenaltyParams(alpha_pos=0.1, alpha_neg=alpha_neg,
                              phi_pos=0.03, phi_neg=phi_neg),
        bounds=Bounds(b_lo=-10.0, b_hi=20.0),
    )


def coarse_params(**kwargs) -> ModelParams:
    """Base parameters on a light grid for fast unit tests."""
    return ModelParams(grid=TimeGrid(horizon=10.0, n_steps=2_000), **kwargs)


@pytest.fixture(scope="session")
def base_params() -> ModelParams:
    return ModelParams()


@pytest.fixture(scope="session")
def base_eq(base_params):
    return solve_equilibrium(base_params, SolverSettings())


@pytest.fixture(scope="session")
def beta09_params(base_params) -> ModelParams:
    return replace(base_params, intensity=IntensityParams(1.0, 1.0, 0.9))


@pytest.fixture(scope="session")
def beta09_eq(beta09_params):
    return solve_equilibrium(beta09_params, SolverSettings())


@pytest.fixture(scope="session")
def capped_params(base_params) -> ModelParams:
    return replace(base_params, bounds=Bounds(b_lo=-10.0, b_hi=1.0))


@pytest.fixture(scope="session")
def capped_eq(capped_params):
    return solve_equilibrium(capped_params, SolverSettings())


@pytest.fixture(scope="session")
def oversell_low_params() -> ModelParams:
    return oversell_params(alpha_neg=0.2, phi_neg=0.06)


@pytest.fixture(scope="session")
def oversell_low_eq(oversell_low_params):
    return solve_equilibrium(oversell_low_params, SolverSettings())


@pytest.fixture(scope="session")
def oversell_high_params() -> ModelParams:
    return oversell_params(alpha_neg=0.9, phi_neg=0.15)


@pytest.fixture(scope="session")
def oversell_high_eq(oversell_high_params):
    return solve_equilibrium(oversell_high_params, SolverSettings())
