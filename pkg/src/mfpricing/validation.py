"""Independent oracles and Monte Carlo checks of the solver outputs.

The jump simulation thins Bernoulli draws against the grid rates (one draw per
time step), so the empirical inventory law is an unbiased sample of the
forward solver's discretization, and the mean realized objective matches the
initial value surface up to statistical error. Exact-clock simulation is
deliberately out of scope: the oracle shares the solvers' error model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .equilibrium import EquilibriumSolution
from .model import ModelParams, StabilityError

__all__ = [
    "PerformanceEstimate",
    "AgentSimulation",
    "BestResponseRow",
    "simulate_agent",
    "best_response_check",
    "pure_death_oracle",
    "population_vs_montecarlo",
    "single_agent_solve",
]


@dataclass(frozen=True)
class PerformanceEstimate:
    mean: float
    stderr: float
    n_paths: int


@dataclass
class AgentSimulation:
    """Objective estimate plus empirical inventory histograms at checkpoints."""

    estimate: PerformanceEstimate
    checkpoint_times: np.ndarray
    histograms: np.ndarray  # shape (n_checkpoints, n_levels), rows sum to 1

    @property
    def terminal_histogram(self) -> np.ndarray:
        return self.histograms[-1]


def _checkpoint_indices(n_steps: int) -> np.ndarray:
    idx = np.array([n_steps // 4, n_steps // 2, 3 * n_steps // 4, n_steps])
    return np.unique(idx)


def _quote_grid(eq: EquilibriumSolution, p: ModelParams,
                strategy_override: Callable[[float, int], float] | None) -> np.ndarray:
    if strategy_override is None:
        return np.ascontiguousarray(eq.quotes.quotes)
    times = eq.quotes.times
    grid = np.empty_like(eq.quotes.quotes)
    for iq in range(grid.shape[0]):
        q = p.inv.q_min + 1 + iq
        for j, t in enumerate(times):
            grid[iq, j] = strategy_override(t, q)
    return grid


def simulate_agent(
    eq: EquilibriumSolution,
    p: ModelParams,
    n_paths: int,
    seed: int,
    strategy_override: Callable[[float, int], float] | None = None,
) -> AgentSimulation:
    """Simulate one agent against the fixed equilibrium mean quote.

    The mean-field limit makes the mean quote exogenous to a single agent, so
    paths are independent. The realized objective per path is terminal cash
    plus marked-to-reference inventory, net of the terminal and running
    penalties. Runs are reproducible and coupled across strategies through
    per-path streams derived from (seed, path index).
    """
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    quotes = _quote_grid(eq, p, strategy_override)
    checkpoints = _checkpoint_indices(p.grid.n_steps)
    objective, hist, status = _kernels.simulate_paths(
        quotes, np.ascontiguousarray(eq.delta_bar), p.grid.dt, p.inv.q_min,
        p.intensity.scale, p.intensity.kappa + p.intensity.beta, p.intensity.beta,
        p.sigma, p.s0, p.x0,
        p.penalty.alpha_pos, p.penalty.alpha_neg, p.penalty.phi_pos, p.penalty.phi_neg,
        n_paths, seed, checkpoints,
    )
    if status >= 0:
        raise StabilityError(
            f"rate * dt >= 1 at time step {status}; refine the grid", step=status
        )
    mean = float(objective.mean())
    stderr = float(objective.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else 0.0
    return AgentSimulation(
        estimate=PerformanceEstimate(mean=mean, stderr=stderr, n_paths=n_paths),
        checkpoint_times=checkpoints * p.grid.dt,
        histograms=hist.astype(float) / n_paths,
    )


@dataclass(frozen=True)
class BestResponseRow:
    shift: float
    estimate: PerformanceEstimate | None
    rejected: bool


def best_response_check(
    eq: EquilibriumSolution,
    p: ModelParams,
    perturbations: Sequence[float],
    n_paths: int,
    seed: int,
) -> list[BestResponseRow]:
    """Estimate the objective of constant-shifted strategies under common random numbers.

    Equilibrium optimality predicts the zero-shift row is maximal up to Monte
    Carlo noise. Shifts that push any quote outside the admissible bounds are
    rejected per-row rather than failing the whole table.
    """
    base = eq.quotes.quotes
    rows: list[BestResponseRow] = []
    for shift in perturbations:
        shifted = base + float(shift)
        if shifted.min() < p.bounds.b_lo or shifted.max() > p.bounds.b_hi:
            rows.append(BestResponseRow(shift=float(shift), estimate=None, rejected=True))
            continue
        sim = simulate_agent(
            eq, p, n_paths, seed, strategy_override=None if shift == 0 else _shifted(eq, shift)
        )
        rows.append(BestResponseRow(shift=float(shift), estimate=sim.estimate, rejected=False))
    return rows


def _shifted(eq: EquilibriumSolution, shift: float) -> Callable[[float, int], float]:
    times = eq.quotes.times
    dt = times[1] - times[0]

    def strategy(t: float, q: int) -> float:
        j = int(round(t / dt))
        return eq.quotes.level(q)[j] + shift

    return strategy


def pure_death_oracle(rate: float, t: float, q_max: int) -> np.ndarray:
    """Closed-form inventory law under a constant sale rate (truncated Poisson).

    Returns probabilities indexed by level q = 0 .. q_max: the chance of k
    sales by time t is Poisson(rate * t) at k, with the survivor mass of
    q_max-or-more sales collected at level 0.
    """
    if rate < 0 or t < 0:
        raise ValueError("rate and t must be nonnegative")
    out = np.zeros(q_max + 1)
    mu = rate * t
    for k in range(q_max):
        out[q_max - k] = math.exp(-mu) * mu**k / math.factorial(k)
    out[0] = 1.0 - out[1:].sum()
    return out


def population_vs_montecarlo(
    eq: EquilibriumSolution, p: ModelParams, n_paths: int, seed: int
) -> list[tuple[float, float]]:
    """Sup-norm gap between the empirical inventory law and the forward solver.

    Compares at the quarter-horizon checkpoints; with the shared grid
    discretization the empirical histogram is an unbiased sample of the
    solver's law, so deviations are binomial noise (meaningful from around a
    thousand paths, but total for any sample size).
    """
    sim = simulate_agent(eq, p, n_paths, seed)
    out = []
    for time, hist in zip(sim.checkpoint_times, sim.histograms):
        j = int(round(time / p.grid.dt))
        deviation = float(np.abs(hist - eq.population.proportions[:, j]).max())
        out.append((float(time), deviation))
    return out


def single_agent_solve(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Independently coded single-seller solver (no competition term).

    Plain-numpy explicit Euler on the monopolist's value ODEs with sale rate
    scale * exp(-kappa * quote); serves as the oracle the mean-field solver
    must reproduce entry-for-entry at beta = 0. Returns (values, quotes)
    arrays in the same layout as the surfaces.
    """
    n = p.grid.n_steps
    dt = p.grid.dt
    levels = p.inv.levels()
    n_q = levels.size
    alpha = np.where(levels >= 0, p.penalty.alpha_pos, p.penalty.alpha_neg)
    phi = np.where(levels >= 0, p.penalty.phi_pos, p.penalty.phi_neg)
    kappa = p.intensity.kappa
    if kappa == 0:
        raise ValueError("kappa must be positive in the single-agent model")

    h = np.empty((n_q, n + 1))
    f = np.empty((n_q - 1, n + 1))
    h[:, n] = -alpha * levels.astype(float) ** 2

    def clamp(raw):
        return np.minimum(p.bounds.b_hi, np.maximum(raw, p.bounds.b_lo))

    f[:, n] = clamp(1.0 / kappa + h[1:, n] - h[:-1, n])
    for j in range(n - 1, -1, -1):
        rate_dt = p.intensity.scale * np.exp(-kappa * f[:, j + 1]) * dt
        if rate_dt.max() >= 1.0:
            raise StabilityError(f"rate * dt >= 1 at time step {j}; refine the grid", step=j)
        h[0, j] = h[0, j + 1] - dt * phi[0] * levels[0] ** 2
        h[1:, j] = (
            h[1:, j + 1]
            + rate_dt * (f[:, j + 1] + h[:-1, j + 1] - h[1:, j + 1])
            - dt * phi[1:] * levels[1:].astype(float) ** 2
        )
        f[:, j] = clamp(1.0 / kappa + h[1:, j] - h[:-1, j])
    return h, f
