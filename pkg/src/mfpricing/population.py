"""Forward evolution of the inventory distribution and the mean-quote aggregation.

All agents start at full inventory; sales move mass down one level at the
quote-dependent rate. Agents in the lowest admissible level have left the
market and no longer quote, so the mean quote averages over the remaining
levels only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hjb import QuoteSurface
from .model import ModelParams, StabilityError

__all__ = ["PopulationFlow", "forward_evolve", "mean_quote", "ACTIVE_MASS_FLOOR"]

# Below this much active mass the mean quote holds its last well-defined
# value; the shipped parameter sets never reach this regime.
ACTIVE_MASS_FLOOR = 1e-12


@dataclass
class PopulationFlow:
    """Proportions of agents at each level over time; row iq holds level q_min + iq."""

    proportions: np.ndarray  # shape (n_levels, n_steps + 1)
    q_min: int
    times: np.ndarray

    def level(self, q: int) -> np.ndarray:
        iq = q - self.q_min
        if not 0 <= iq < self.proportions.shape[0]:
            raise IndexError(f"inventory level {q} outside the admissible range")
        return self.proportions[iq]

    def final(self) -> np.ndarray:
        return self.proportions[:, -1]


def forward_evolve(f: QuoteSurface, mean_path: np.ndarray, p: ModelParams) -> PopulationFlow:
    """Evolve the population from full inventory under the given quote surface.

    Explicit Euler with rates sampled at the left endpoint of each grid cell;
    mass is conserved exactly by construction. Raises StabilityError if any
    rate * dt >= 1 (a proportion would go negative).
    """
    n_q = p.inv.n_levels
    mean_path = np.ascontiguousarray(mean_path, dtype=float)
    if f.quotes.shape != (n_q - 1, p.grid.n_steps + 1):
        raise ValueError("quote surface does not match the model grid")
    if mean_path.shape != (p.grid.n_steps + 1,):
        raise ValueError("mean path does not match the model grid")
    prop, status = _kernels.forward_sweep(
        np.ascontiguousarray(f.quotes), mean_path, p.grid.dt,
        p.intensity.scale, p.intensity.kappa + p.intensity.beta, p.intensity.beta,
    )
    if status >= 0:
        raise StabilityError(
            f"rate * dt >= 1 at time step {status}; refine the grid", step=status
        )
    return PopulationFlow(proportions=prop, q_min=p.inv.q_min, times=p.grid.times())


def hold_last_defined(values: np.ndarray, defined: np.ndarray) -> np.ndarray:
    """Replace undefined entries by the most recent defined value (NaN before the first)."""
    out = np.array(values, dtype=float)
    if defined.all():
        return out
    last = np.nan
    for j in range(out.size):
        if defined[j]:
            last = out[j]
        else:
            out[j] = last
    return out


def mean_quote(f: QuoteSurface, pop: PopulationFlow, p: ModelParams) -> np.ndarray:
    """Population-average quote among agents still in the market.

    At each time the average weights the quotes of levels q_min + 1 .. q_max
    by their population shares, normalized by the active mass 1 - P[q_min].
    Where the active mass falls below ACTIVE_MASS_FLOOR the path holds its
    last well-defined value.
    """
    if f.quotes.shape[1] != pop.proportions.shape[1]:
        raise ValueError("quote surface and population flow are on different grids")
    active = pop.proportions[1:, :]
    numer = np.einsum("qj,qj->j", f.quotes, active)
    denom = 1.0 - pop.proportions[0, :]
    defined = denom >= ACTIVE_MASS_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = numer / denom
    return hold_last_defined(ratio, defined)
