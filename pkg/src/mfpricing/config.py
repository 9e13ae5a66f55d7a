"""Scenario configuration: flat key-value documents, defaults, and validation.

The native format is one ``key = value`` pair per line with ``#`` comments;
solver settings live under the dotted ``solver.`` namespace. A JSON object
(nested by namespace or using the same dotted keys) is accepted as an
alternative encoding of the same schema. Unknown keys are errors, not
warnings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Any

from .equilibrium import DEFAULT_TOL, SolverSettings
from .model import (
    Bounds,
    IntensityParams,
    InventoryRange,
    ModelParams,
    PenaltyParams,
    TimeGrid,
    validate_params,
)

__all__ = [
    "ConfigError",
    "ConfigParseError",
    "ConfigValidationError",
    "ScenarioConfig",
    "SCENARIO_KINDS",
    "parse_config",
    "resolved_config",
    "apply_overrides",
]

SCENARIO_KINDS = (
    "reference",
    "equilibrium",
    "beta_sweep",
    "price_cap",
    "oversell",
    "robustness",
    "validate",
)


class ConfigError(ValueError):
    """Base class for configuration problems."""


class ConfigParseError(ConfigError):
    """Malformed document: bad syntax, unknown key, or wrong value type."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if key is not None:
            prefix.append(f"key {key!r}")
        super().__init__((": ".join(prefix) + ": " if prefix else "") + message)
        self.key = key
        self.line = line


class ConfigValidationError(ConfigError):
    """Well-formed document whose values violate model or scenario invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid configuration: " + "; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    model: ModelParams
    solver: SolverSettings
    sweep: tuple[float, ...]
    seed: int
    n_trials: int
    n_paths: int
    out_dir: str


def _as_float(raw: Any) -> float:
    if isinstance(raw, bool):
        raise TypeError
    if isinstance(raw, (int, float)):
        return float(raw)
    if isinstance(raw, str):
        return float(raw.strip())
    raise TypeError


def _as_int(raw: Any) -> int:
    if isinstance(raw, bool):
        raise TypeError
    if isinstance(raw, int):
        return raw
    if isinstance(raw, float):
        if raw != int(raw):
            raise TypeError
        return int(raw)
    if isinstance(raw, str):
        return int(raw.strip(), 10)
    raise TypeError


def _as_str(raw: Any) -> str:
    if not isinstance(raw, str):
        raise TypeError
    return raw.strip()


def _as_kind(raw: Any) -> str:
    kind = _as_str(raw)
    if kind not in SCENARIO_KINDS:
        raise TypeError
    return kind


def _as_sweep(raw: Any) -> tuple[float, ...]:
    if isinstance(raw, str):
        parts = [s for s in (piece.strip() for piece in raw.split(",")) if s]
        return tuple(float(s) for s in parts)
    if isinstance(raw, (list, tuple)):
        return tuple(_as_float(v) for v in raw)
    raise TypeError


def _as_init(raw: Any):
    if isinstance(raw, str):
        text = raw.strip()
        if text == "terminal":
            return "terminal"
        return float(text)
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw)
    raise TypeError


# key -> (converter, expected-type description, default)
_SCHEMA: dict[str, tuple[Any, str, Any]] = {
    "kind": (_as_kind, "one of " + ", ".join(SCENARIO_KINDS), None),
    "out_dir": (_as_str, "path", "out"),
    "seed": (_as_int, "integer", 0),
    "sweep": (_as_sweep, "comma-separated numbers", ()),
    "n_trials": (_as_int, "integer", 100),
    "n_paths": (_as_int, "integer", 100_000),
    "horizon": (_as_float, "number", 10.0),
    "n_steps": (_as_int, "integer", 10_000),
    "q_max": (_as_int, "integer", 5),
    "q_min": (_as_int, "integer", 0),
    "scale": (_as_float, "number", 1.0),
    "kappa": (_as_float, "number", 1.0),
    "beta": (_as_float, "number", 0.3),
    "alpha_pos": (_as_float, "number", 0.1),
    "alpha_neg": (_as_float, "number", 0.2),
    "phi_pos": (_as_float, "number", 0.03),
    "phi_neg": (_as_float, "number", 0.06),
    "b_lo": (_as_float, "number", -10.0),
    "b_hi": (_as_float, "number or 'inf'", math.inf),
    "sigma": (_as_float, "number", 1.0),
    "s0": (_as_float, "number", 0.0),
    "x0": (_as_float, "number", 0.0),
    "solver.gamma": (_as_float, "number", 0.1),
    "solver.tol": (_as_float, "number", DEFAULT_TOL),
    "solver.max_iter": (_as_int, "integer", 10_000),
    "solver.init": (_as_init, "number or 'terminal'", "terminal"),
}


def _flatten_json(obj: dict, prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in obj.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten_json(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat


def _read_document(text: str) -> tuple[dict[str, Any], dict[str, int]]:
    """Parse either encoding into a raw key -> value map plus line numbers."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(f"invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigParseError("JSON document must be an object")
        return _flatten_json(obj), {}
    raw: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigParseError("expected 'key = value'", line=lineno)
        key, value = body.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigParseError("missing key before '='", line=lineno)
        if key in raw:
            raise ConfigParseError("duplicate key", key=key, line=lineno)
        raw[key] = value.strip()
        lines[key] = lineno
    return raw, lines


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document, applying all defaults.

    Raises ConfigParseError for syntax, unknown keys, or mistyped values, and
    ConfigValidationError for violated model or scenario invariants.
    """
    raw, lines = _read_document(text)
    values: dict[str, Any] = {key: default for key, (_, _, default) in _SCHEMA.items()}
    for key, raw_value in raw.items():
        if key not in _SCHEMA:
            raise ConfigParseError("unknown key", key=key, line=lines.get(key))
        convert, expected, _ = _SCHEMA[key]
        try:
            values[key] = convert(raw_value)
        except (TypeError, ValueError):
            raise ConfigParseError(
                f"expected {expected}, got {raw_value!r}", key=key, line=lines.get(key)
            ) from None
    if values["kind"] is None:
        raise ConfigParseError("missing required key", key="kind")
    if values["kind"] == "reference":
        # the reference scenario is the no-competition solve
        values["beta"] = 0.0

    model = ModelParams(
        grid=TimeGrid(horizon=values["horizon"], n_steps=values["n_steps"]),
        inv=InventoryRange(q_max=values["q_max"], q_min=values["q_min"]),
        intensity=IntensityParams(
            scale=values["scale"], kappa=values["kappa"], beta=values["beta"]
        ),
        penalty=PenaltyParams(
            alpha_pos=values["alpha_pos"], alpha_neg=values["alpha_neg"],
            phi_pos=values["phi_pos"], phi_neg=values["phi_neg"],
        ),
        bounds=Bounds(b_lo=values["b_lo"], b_hi=values["b_hi"]),
        sigma=values["sigma"], s0=values["s0"], x0=values["x0"],
    )
    violations = validate_params(model)
    try:
        solver = SolverSettings(
            gamma=values["solver.gamma"], tol=values["solver.tol"],
            max_iter=values["solver.max_iter"], init=values["solver.init"],
        )
    except ValueError as exc:
        violations.append(str(exc))
        solver = SolverSettings()
    violations.extend(_kind_violations(values))
    if violations:
        raise ConfigValidationError(violations)
    return ScenarioConfig(
        kind=values["kind"], model=model, solver=solver,
        sweep=values["sweep"], seed=values["seed"],
        n_trials=values["n_trials"], n_paths=values["n_paths"],
        out_dir=values["out_dir"],
    )


def _kind_violations(values: dict[str, Any]) -> list[str]:
    bad = []
    kind = values["kind"]
    if kind == "oversell" and values["q_min"] >= 0:
        bad.append("oversell requires q_min < 0")
    if kind == "price_cap" and not math.isfinite(values["b_hi"]):
        bad.append("price_cap requires a finite b_hi")
    if kind == "beta_sweep" and not values["sweep"]:
        bad.append("beta_sweep requires a nonempty sweep list")
    if kind == "robustness" and values["n_trials"] < 2:
        bad.append("robustness requires n_trials >= 2")
    if values["n_paths"] < 1:
        bad.append("n_paths >= 1")
    if values["seed"] < 0:
        bad.append("seed >= 0")
    return bad


def resolved_config(cfg: ScenarioConfig) -> dict[str, Any]:
    """Flat mapping of every effective setting; parses back to an equal config."""
    m = cfg.model
    b_hi = m.bounds.b_hi if math.isfinite(m.bounds.b_hi) else "inf"
    init = cfg.solver.init
    if not isinstance(init, (str, float, int)):
        raise ValueError("only named or constant initializations are serializable")
    return {
        "kind": cfg.kind,
        "out_dir": cfg.out_dir,
        "seed": cfg.seed,
        "sweep": list(cfg.sweep),
        "n_trials": cfg.n_trials,
        "n_paths": cfg.n_paths,
        "horizon": m.grid.horizon,
        "n_steps": m.grid.n_steps,
        "q_max": m.inv.q_max,
        "q_min": m.inv.q_min,
        "scale": m.intensity.scale,
        "kappa": m.intensity.kappa,
        "beta": m.intensity.beta,
        "alpha_pos": m.penalty.alpha_pos,
        "alpha_neg": m.penalty.alpha_neg,
        "phi_pos": m.penalty.phi_pos,
        "phi_neg": m.penalty.phi_neg,
        "b_lo": m.bounds.b_lo,
        "b_hi": b_hi,
        "sigma": m.sigma,
        "s0": m.s0,
        "x0": m.x0,
        "solver.gamma": cfg.solver.gamma,
        "solver.tol": cfg.solver.tol,
        "solver.max_iter": cfg.solver.max_iter,
        "solver.init": init,
    }


def apply_overrides(
    cfg: ScenarioConfig,
    seed: int | None = None,
    n_steps: int | None = None,
    out_dir: str | None = None,
) -> ScenarioConfig:
    """Return a copy of the config with command-line overrides applied."""
    if seed is not None:
        if seed < 0:
            raise ConfigValidationError(["seed >= 0"])
        cfg = replace(cfg, seed=seed)
    if n_steps is not None:
        if n_steps < 1:
            raise ConfigValidationError(["n_steps >= 1"])
        model = replace(cfg.model, grid=TimeGrid(cfg.model.grid.horizon, n_steps))
        cfg = replace(cfg, model=model)
    if out_dir is not None:
        cfg = replace(cfg, out_dir=out_dir)
    return cfg
