"""Competitive dynamic inventory pricing in the large-market limit.

Couples a backward value-function solver with a forward population equation
through a damped fixed-point iteration to find market equilibria, then derives
economic observables and Monte Carlo validation from the result. A FastAPI
service and a thin CLI client expose the scenario runner.
"""

from .config import (
    ConfigError,
    ConfigParseError,
    ConfigValidationError,
    ScenarioConfig,
    parse_config,
)
from .equilibrium import (
    EquilibriumSolution,
    RobustnessReport,
    SolverSettings,
    residual,
    robustness_study,
    solve_equilibrium,
)
from .hjb import QuoteSurface, ValueSurface, backward_solve, optimal_quote, terminal_values
from .metrics import (
    CancellationReport,
    EconomicSeries,
    cancellation_probability,
    economic_series,
)
from .model import (
    Bounds,
    IntensityParams,
    InventoryRange,
    ModelParams,
    PenaltyParams,
    StabilityError,
    TimeGrid,
    check_intensity_conditions,
    finite_market_sales_derivative,
    intensity,
    validate_params,
)
from .population import PopulationFlow, forward_evolve, mean_quote
from .scenarios import ScenarioResult, run_scenario
from .validation import (
    AgentSimulation,
    BestResponseRow,
    PerformanceEstimate,
    best_response_check,
    population_vs_montecarlo,
    pure_death_oracle,
    simulate_agent,
    single_agent_solve,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "TimeGrid", "InventoryRange", "IntensityParams", "PenaltyParams", "Bounds",
    "ModelParams", "StabilityError", "validate_params", "intensity",
    "check_intensity_conditions", "finite_market_sales_derivative",
    "ValueSurface", "QuoteSurface", "terminal_values", "optimal_quote", "backward_solve",
    "PopulationFlow", "forward_evolve", "mean_quote",
    "SolverSettings", "EquilibriumSolution", "RobustnessReport",
    "residual", "solve_equilibrium", "robustness_study",
    "EconomicSeries", "CancellationReport", "economic_series", "cancellation_probability",
    "PerformanceEstimate", "AgentSimulation", "BestResponseRow",
    "simulate_agent", "best_response_check", "pure_death_oracle",
    "population_vs_montecarlo", "single_agent_solve",
    "ConfigError", "ConfigParseError", "ConfigValidationError",
    "ScenarioConfig", "parse_config",
    "ScenarioResult", "run_scenario",
]
