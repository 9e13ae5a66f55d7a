"""Market parameters, the competitive sales-intensity function, and validity checks.

The sales intensity of a single seller depends on her own quoted spread and on
the average spread quoted across the market:

    rate(delta, mean) = scale * exp(-(kappa + beta) * delta + beta * mean)

Lower own quotes and a higher market average both speed up sales; ``beta``
controls the strength of the competitive interaction (``beta = 0`` recovers the
single-seller model).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TimeGrid",
    "InventoryRange",
    "IntensityParams",
    "PenaltyParams",
    "Bounds",
    "ModelParams",
    "StabilityError",
    "validate_params",
    "intensity",
    "ConditionCheck",
    "IntensityConditionsReport",
    "check_intensity_conditions",
    "finite_market_sales_derivative",
]

# Relative step for the central finite differences used by the intensity
# condition checks; balances truncation and round-off for exponentials of
# O(1) arguments.
FD_RELATIVE_STEP = 1e-6


class StabilityError(RuntimeError):
    """An explicit time step violated rate * dt < 1; refine the grid."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class TimeGrid:
    """Equidistant grid on [0, horizon] with points t_j = j * dt."""

    horizon: float = 10.0
    n_steps: int = 10_000

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass(frozen=True)
class InventoryRange:
    """Admissible inventory levels {q_min, ..., q_max}; q_min < 0 allows overselling."""

    q_max: int = 5
    q_min: int = 0

    @property
    def n_levels(self) -> int:
        return self.q_max - self.q_min + 1

    def levels(self) -> np.ndarray:
        return np.arange(self.q_min, self.q_max + 1)


@dataclass(frozen=True)
class IntensityParams:
    scale: float = 1.0   # base rate of sales at zero spreads
    kappa: float = 1.0   # sensitivity to the seller's own spread
    beta: float = 0.3    # sensitivity to the market mean spread (competition)


@dataclass(frozen=True)
class PenaltyParams:
    """Quadratic inventory penalties, split by sign of the inventory level.

    The *_neg values apply to oversold (negative) inventory only; the base
    model (q_min = 0) never touches them.
    """

    alpha_pos: float = 0.1   # terminal penalty, q >= 0
    alpha_neg: float = 0.2   # terminal penalty, q < 0
    phi_pos: float = 0.03    # running penalty, q >= 0
    phi_neg: float = 0.06    # running penalty, q < 0

    def alpha(self, q: int) -> float:
        return self.alpha_pos if q >= 0 else self.alpha_neg

    def phi(self, q: int) -> float:
        return self.phi_pos if q >= 0 else self.phi_neg


@dataclass(frozen=True)
class Bounds:
    """Admissible quote interval; b_hi = inf means no price ceiling."""

    b_lo: float = -10.0
    b_hi: float = math.inf


@dataclass(frozen=True)
class ModelParams:
    """All market, penalty, bound, and grid constants for one scenario.

    sigma, s0, and x0 only affect Monte Carlo sample paths; the value
    surfaces, quotes, population flow, and mean quote are independent of them.
    """

    grid: TimeGrid = field(default_factory=TimeGrid)
    inv: InventoryRange = field(default_factory=InventoryRange)
    intensity: IntensityParams = field(default_factory=IntensityParams)
    penalty: PenaltyParams = field(default_factory=PenaltyParams)
    bounds: Bounds = field(default_factory=Bounds)
    sigma: float = 1.0
    s0: float = 0.0
    x0: float = 0.0


def validate_params(p: ModelParams) -> list[str]:
    """Return every violated invariant by name; an empty list means valid."""
    bad: list[str] = []
    if not (p.grid.horizon > 0 and p.grid.n_steps >= 1):
        bad.append("dt > 0")
    if not (p.inv.q_min <= 0 < p.inv.q_max):
        bad.append("q_min <= 0 < q_max")
    if p.intensity.scale < 0:
        bad.append("scale >= 0")
    if p.intensity.kappa < 0:
        bad.append("kappa >= 0")
    if p.intensity.beta < 0:
        bad.append("beta >= 0")
    for name in ("alpha_pos", "alpha_neg", "phi_pos", "phi_neg"):
        if getattr(p.penalty, name) < 0:
            bad.append(f"{name} >= 0")
    if p.inv.q_min < 0:
        if not p.penalty.alpha_pos < p.penalty.alpha_neg:
            bad.append("alpha_pos < alpha_neg")
        if not p.penalty.phi_pos < p.penalty.phi_neg:
            bad.append("phi_pos < phi_neg")
    if not math.isfinite(p.bounds.b_lo):
        bad.append("b_lo finite")
    if not p.bounds.b_lo < p.bounds.b_hi:
        bad.append("b_lo < b_hi")
    if p.sigma < 0:
        bad.append("sigma >= 0")
    return bad


def intensity(delta, delta_bar, ip: IntensityParams):
    """Instantaneous sale rate for own spread ``delta`` given market mean ``delta_bar``.

    Broadcasts over array inputs.
    """
    return ip.scale * np.exp(-(ip.kappa + ip.beta) * delta + ip.beta * delta_bar)


@dataclass(frozen=True)
class ConditionCheck:
    """One economic condition on the intensity; holds iff margin < 0 (<= 0 if non-strict)."""

    passed: bool
    margin: float
    worst_point: tuple[float, float]


@dataclass(frozen=True)
class IntensityConditionsReport:
    own_slope_negative: ConditionCheck       # d rate / d own < 0
    market_slope_positive: ConditionCheck    # d rate / d mean > 0
    joint_raise_slows_sales: ConditionCheck  # sum of the two slopes < 0
    cross_effect_nonpositive: ConditionCheck  # d2 rate / d own d mean <= 0
    revenue_concavity: ConditionCheck        # rate * rate_dd < 2 * rate_d^2

    def as_dict(self) -> dict[str, ConditionCheck]:
        return {
            "own_slope_negative": self.own_slope_negative,
            "market_slope_positive": self.market_slope_positive,
            "joint_raise_slows_sales": self.joint_raise_slows_sales,
            "cross_effect_nonpositive": self.cross_effect_nonpositive,
            "revenue_concavity": self.revenue_concavity,
        }

    def all_passed(self) -> bool:
        return all(c.passed for c in self.as_dict().values())

    def failed(self) -> list[str]:
        return [name for name, c in self.as_dict().items() if not c.passed]


def check_intensity_conditions(
    ip: IntensityParams, sample_points: Iterable[tuple[float, float]]
) -> IntensityConditionsReport:
    """Verify the five competition-theory conditions by central finite differences.

    Each condition is reported with the worst-case sample point, i.e. the
    point where the condition came closest to failing (or failed hardest).
    """
    points = [(float(d), float(m)) for d, m in sample_points]
    if not points:
        raise ValueError("sample grid must be nonempty")

    def rate(d: float, m: float) -> float:
        return float(intensity(d, m, ip))

    # margin arrays: condition k holds at a point iff margin < 0 (<= 0 for cross)
    worst = [(-math.inf, points[0])] * 5
    for d, m in points:
        hd = FD_RELATIVE_STEP * max(1.0, abs(d))
        hm = FD_RELATIVE_STEP * max(1.0, abs(m))
        lam = rate(d, m)
        d_own = (rate(d + hd, m) - rate(d - hd, m)) / (2 * hd)
        d_mean = (rate(d, m + hm) - rate(d, m - hm)) / (2 * hm)
        d_own2 = (rate(d + hd, m) - 2 * lam + rate(d - hd, m)) / (hd * hd)
        cross = (
            rate(d + hd, m + hm)
            - rate(d + hd, m - hm)
            - rate(d - hd, m + hm)
            + rate(d - hd, m - hm)
        ) / (4 * hd * hm)
        margins = (
            d_own,                      # want < 0
            -d_mean,                    # want < 0, i.e. d_mean > 0
            d_own + d_mean,             # want < 0
            cross,                      # want <= 0
            lam * d_own2 - 2 * d_own * d_own,  # want < 0
        )
        worst = [
            (mg, (d, m)) if mg > w[0] else w for mg, w in zip(margins, worst)
        ]

    strict = (True, True, True, False, True)
    checks = [
        ConditionCheck(
            passed=(w[0] < 0 if s else w[0] <= 0), margin=w[0], worst_point=w[1]
        )
        for w, s in zip(worst, strict)
    ]
    return IntensityConditionsReport(*checks)


def finite_market_sales_derivative(
    ip: IntensityParams, quotes: Sequence[float], i: int
) -> float:
    """Aggregate response of total sales when every agent but ``i`` raises quotes.

    Uses the M-agent intensity with the market mean replaced by the average of
    all M quotes; returns the sum over agents j of the partial derivatives of
    agent j's rate with respect to every quote except agent i's (0-based i).
    The closed form is

        beta*(M-1)/M * rate_i - (kappa + beta/M) * sum_{j != i} rate_j,

    which is negative for large M; for small M and asymmetric quotes the sign
    may flip.
    """
    q = np.asarray(quotes, dtype=float)
    m = q.size
    if m < 2:
        raise ValueError("at least two agents are required")
    if not 0 <= i < m:
        raise ValueError("agent index out of range")
    total = q.sum()
    rates = ip.scale * np.exp(
        -(ip.kappa + ip.beta * (m - 1) / m) * q + (ip.beta / m) * (total - q)
    )
    others = rates.sum() - rates[i]
    return float(ip.beta * (m - 1) / m * rates[i] - (ip.kappa + ip.beta / m) * others)
