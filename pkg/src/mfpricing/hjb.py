"""Backward solver for the excess-value ODE system and the clamped feedback quotes.

One unified state space {q_min, ..., q_max} covers the base model, the
single-agent reference (beta = 0), the price-ceiling variant, and the
overselling variant (q_min < 0). The lowest level is absorbing: it cannot
sell and only accrues its running penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import ModelParams, StabilityError

__all__ = ["ValueSurface", "QuoteSurface", "terminal_values", "optimal_quote", "backward_solve"]


@dataclass
class ValueSurface:
    """Excess profit-to-go h on the level x time grid; row iq holds level q_min + iq."""

    values: np.ndarray  # shape (n_levels, n_steps + 1)
    q_min: int
    times: np.ndarray

    def level(self, q: int) -> np.ndarray:
        iq = q - self.q_min
        if not 0 <= iq < self.values.shape[0]:
            raise IndexError(f"inventory level {q} outside the admissible range")
        return self.values[iq]


@dataclass
class QuoteSurface:
    """Feedback quotes on the level x time grid; defined for levels q_min + 1 .. q_max."""

    quotes: np.ndarray  # shape (n_levels - 1, n_steps + 1)
    q_min: int
    times: np.ndarray

    def level(self, q: int) -> np.ndarray:
        iq = q - self.q_min - 1
        if not 0 <= iq < self.quotes.shape[0]:
            raise IndexError(f"level {q} cannot sell or is outside the admissible range")
        return self.quotes[iq]


def terminal_values(p: ModelParams) -> np.ndarray:
    """Terminal condition -alpha(q) * q^2 for each admissible level."""
    levels = p.inv.levels()
    alpha = np.where(levels >= 0, p.penalty.alpha_pos, p.penalty.alpha_neg)
    return -alpha * levels.astype(float) ** 2


def optimal_quote(value_hold: float, value_sold: float, p: ModelParams) -> float:
    """Clamped maximizer of the expected revenue rate for one sellable level.

    ``value_hold`` is the excess value at the current level, ``value_sold``
    one level below. Independent of the market mean quote: the mean scales
    the sale rate but not the argmax.
    """
    kb = p.intensity.kappa + p.intensity.beta
    if kb == 0:
        raise ValueError("kappa + beta must be positive: the revenue rate has no maximizer")
    raw = 1.0 / kb + value_hold - value_sold
    return min(p.bounds.b_hi, max(raw, p.bounds.b_lo))


def backward_solve(mean_path: np.ndarray, p: ModelParams) -> tuple[ValueSurface, QuoteSurface]:
    """Solve the value ODEs backward from the terminal condition.

    Fully explicit Euler stepping; the given mean-quote path is treated as
    piecewise constant on grid cells, sampled at the right endpoint. The
    returned quote surface holds the clamped maximizer at every (level, time)
    node. With beta = 0 the mean path cancels and this is the single-agent
    reference solver.

    Raises StabilityError if any rate * dt >= 1 during the sweep.
    """
    kb = p.intensity.kappa + p.intensity.beta
    if kb == 0:
        raise ValueError("kappa + beta must be positive: the revenue rate has no maximizer")
    mean_path = np.ascontiguousarray(mean_path, dtype=float)
    if mean_path.shape != (p.grid.n_steps + 1,):
        raise ValueError(
            f"mean path has {mean_path.size} points, grid expects {p.grid.n_steps + 1}"
        )
    h, f, status = _kernels.backward_sweep(
        terminal_values(p), mean_path, p.grid.dt, p.inv.q_min,
        p.intensity.scale, kb, p.intensity.beta,
        p.penalty.phi_pos, p.penalty.phi_neg, p.bounds.b_lo, p.bounds.b_hi,
    )
    if status >= 0:
        raise StabilityError(
            f"rate * dt >= 1 at time step {status}; refine the grid", step=status
        )
    times = p.grid.times()
    return (
        ValueSurface(values=h, q_min=p.inv.q_min, times=times),
        QuoteSurface(quotes=f, q_min=p.inv.q_min, times=times),
    )
