"""Economic observables of an equilibrium: cost, revenue, volume, unit costs,
and the overselling cancellation probability.

Cumulative quantities use left-endpoint rectangle sums on the solver grid,
matching the first-order accuracy of the forward evolution. Revenue charges
the terminal inventory penalty preemptively at every time, as if all agents
stopped trading there, so the path is continuous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumSolution
from .model import ModelParams
from .population import ACTIVE_MASS_FLOOR, hold_last_defined

__all__ = ["EconomicSeries", "CancellationReport", "economic_series", "cancellation_probability"]


@dataclass
class EconomicSeries:
    """Per-grid-point market aggregates.

    avg_cost is NaN while cumulative volume is zero (undefined, not zero);
    inst_cost holds its last defined value when the instantaneous sale rate
    vanishes.
    """

    times: np.ndarray
    cost: np.ndarray       # cumulative spread paid by consumers
    revenue: np.ndarray    # cost net of the preemptive terminal penalty
    volume: np.ndarray     # cumulative units sold per agent
    avg_cost: np.ndarray   # cost / volume
    inst_cost: np.ndarray  # spread paid per unit at each instant


def economic_series(eq: EquilibriumSolution, p: ModelParams) -> EconomicSeries:
    """Cost, revenue, volume, and unit-cost paths implied by an equilibrium."""
    quotes = eq.quotes.quotes
    active = eq.population.proportions[1:, :]
    dt = p.grid.dt
    kb = p.intensity.kappa + p.intensity.beta
    rates = p.intensity.scale * np.exp(
        -kb * quotes + p.intensity.beta * eq.delta_bar[np.newaxis, :]
    )
    sale_rate = np.einsum("qj,qj->j", active, rates)
    cost_rate = np.einsum("qj,qj,qj->j", quotes, active, rates)

    n = quotes.shape[1]
    cost = np.zeros(n)
    volume = np.zeros(n)
    cost[1:] = np.cumsum(cost_rate[:-1]) * dt
    volume[1:] = np.cumsum(sale_rate[:-1]) * dt

    levels = np.arange(p.inv.q_min + 1, p.inv.q_max + 1)
    alpha = np.where(levels >= 0, p.penalty.alpha_pos, p.penalty.alpha_neg)
    penalty = (alpha * levels.astype(float) ** 2) @ active
    revenue = cost - penalty

    avg_cost = np.full(n, np.nan)
    sold = volume > 0
    avg_cost[sold] = cost[sold] / volume[sold]

    with np.errstate(divide="ignore", invalid="ignore"):
        inst = cost_rate / sale_rate
    inst_cost = hold_last_defined(inst, sale_rate >= ACTIVE_MASS_FLOOR)

    return EconomicSeries(
        times=eq.population.times, cost=cost, revenue=revenue,
        volume=volume, avg_cost=avg_cost, inst_cost=inst_cost,
    )


@dataclass
class CancellationReport:
    """Chance a given buyer loses her unit to overselling at the terminal time."""

    probability: float
    per_depth: dict[int, float]  # oversold depth -> contribution


def cancellation_probability(final_proportions: np.ndarray, p: ModelParams) -> CancellationReport:
    """Probability that a random buyer's order is cancelled at the horizon.

    Agents who oversold by d units cancel d of their q_max + d filled orders
    uniformly at random; buyers are matched to agents in proportion to sales.
    Requires an overselling model (q_min < 0) and at least one completed sale.
    """
    if p.inv.q_min >= 0:
        raise ValueError("cancellation requires an overselling model (q_min < 0)")
    final_proportions = np.asarray(final_proportions, dtype=float)
    if final_proportions.shape != (p.inv.n_levels,):
        raise ValueError("final proportions do not match the admissible levels")
    bought = 1.0 - final_proportions[-1]
    if bought <= 0.0:
        raise ValueError("no consumer ever bought: cancellation probability undefined")
    per_depth: dict[int, float] = {}
    for depth in range(1, -p.inv.q_min + 1):
        share = final_proportions[-depth - p.inv.q_min] / bought
        per_depth[depth] = share * depth / (p.inv.q_max + depth)
    return CancellationReport(probability=sum(per_depth.values()), per_depth=per_depth)
