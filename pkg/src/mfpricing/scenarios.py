"""Scenario runner: dispatches the named experiments and emits figure-ready CSVs.

Every run writes quotes.csv, values.csv, population.csv, mean_quote.csv,
metrics.csv, residuals.csv, and a manifest.json whose "config" block is a
complete, re-runnable configuration. Floating-point columns carry 17
significant digits so downstream tolerances are not polluted by formatting.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from .config import ScenarioConfig, resolved_config
from .equilibrium import EquilibriumSolution, robustness_study, solve_equilibrium
from .metrics import cancellation_probability, economic_series
from .model import ModelParams, StabilityError
from .validation import best_response_check, simulate_agent

__all__ = ["ScenarioResult", "run_scenario", "EXIT_OK", "EXIT_CONFIG", "EXIT_NO_CONVERGENCE", "EXIT_UNSTABLE"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_UNSTABLE = 4

BEST_RESPONSE_SHIFTS = (-0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2)


@dataclass
class ScenarioResult:
    status: str  # ok | non_convergence | stability_failure
    exit_code: int
    out_dir: Path
    manifest: dict[str, Any]
    files: list[str]  # paths relative to out_dir


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return format(x, ".17g")
    return str(x)


class _Emitter:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: list[str] = []

    def csv(self, name: str, header: list[str], rows) -> None:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        self.files.append(name)

    def text(self, name: str, content: str) -> None:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)
        self.files.append(name)


def _write_solution(em: _Emitter, eq: EquilibriumSolution, p: ModelParams, prefix: str = "") -> None:
    times = eq.values.times
    q_min = p.inv.q_min
    n_q = p.inv.n_levels

    def surface_rows():
        for j, t in enumerate(times):
            for iq in range(n_q):
                quote = eq.quotes.quotes[iq - 1, j] if iq > 0 else math.nan
                yield (t, q_min + iq, eq.values.values[iq, j], quote)

    em.csv(prefix + "values.csv", ["t", "q", "h", "delta_star"], surface_rows())
    em.csv(
        prefix + "quotes.csv",
        ["t", "q", "delta_star"],
        (
            (t, q_min + 1 + iq, eq.quotes.quotes[iq, j])
            for j, t in enumerate(times)
            for iq in range(n_q - 1)
        ),
    )
    em.csv(
        prefix + "population.csv",
        ["t", "q", "P"],
        (
            (t, q_min + iq, eq.population.proportions[iq, j])
            for j, t in enumerate(times)
            for iq in range(n_q)
        ),
    )
    em.csv(
        prefix + "mean_quote.csv",
        ["t", "delta_bar"],
        zip(times, eq.delta_bar),
    )
    series = economic_series(eq, p)
    em.csv(
        prefix + "metrics.csv",
        ["t", "C", "R", "V", "K", "Kbar"],
        zip(series.times, series.cost, series.revenue, series.volume,
            series.avg_cost, series.inst_cost),
    )
    em.csv(
        prefix + "residuals.csv",
        ["iter", "residual"],
        ((i + 1, r) for i, r in enumerate(eq.residual_history)),
    )


def _solution_summary(eq: EquilibriumSolution) -> dict[str, Any]:
    return {
        "converged": bool(eq.converged),
        "iterations": int(eq.iterations),
        "final_residual": float(eq.residual_history[-1]) if eq.residual_history.size else None,
    }


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None) -> ScenarioResult:
    """Execute the configured scenario and write its artifacts.

    Files are written under ``out_dir`` (defaults to the config's own
    out_dir); the manifest always records the configured value so it stays
    re-runnable. Solver non-convergence and stability failures produce a
    nonzero exit code with the diagnostic residual log still written.
    """
    target = Path(out_dir) if out_dir is not None else Path(cfg.out_dir)
    target.mkdir(parents=True, exist_ok=True)
    em = _Emitter(target)
    manifest: dict[str, Any] = {"config": resolved_config(cfg), "kind": cfg.kind}
    status, exit_code = "ok", EXIT_OK
    started = time.perf_counter()
    try:
        if cfg.kind == "beta_sweep":
            status, exit_code = _run_beta_sweep(em, cfg, manifest)
        elif cfg.kind == "robustness":
            status, exit_code = _run_robustness(em, cfg, manifest)
        elif cfg.kind == "validate":
            status, exit_code = _run_validate(em, cfg, manifest)
        else:  # reference, equilibrium, price_cap, oversell
            status, exit_code = _run_equilibrium(em, cfg, manifest)
    except StabilityError as exc:
        status, exit_code = "stability_failure", EXIT_UNSTABLE
        manifest["error"] = str(exc)
    manifest["status"] = status
    manifest["runtime_s"] = time.perf_counter() - started
    manifest["files"] = em.files
    em.text("manifest.json", json.dumps(manifest, indent=2) + "\n")
    return ScenarioResult(
        status=status, exit_code=exit_code, out_dir=target,
        manifest=manifest, files=em.files,
    )


def _run_equilibrium(em: _Emitter, cfg: ScenarioConfig, manifest: dict) -> tuple[str, int]:
    eq = solve_equilibrium(cfg.model, cfg.solver)
    _write_solution(em, eq, cfg.model)
    manifest.update(_solution_summary(eq))
    if cfg.kind == "oversell":
        report = cancellation_probability(eq.population.final(), cfg.model)
        lines = [f"p_cancel = {_fmt(report.probability)}"]
        for depth, value in sorted(report.per_depth.items()):
            lines.append(f"depth_{depth} = {_fmt(value)}")
        em.text("cancellation.txt", "\n".join(lines) + "\n")
        manifest["p_cancel"] = report.probability
    if not eq.converged:
        return "non_convergence", EXIT_NO_CONVERGENCE
    return "ok", EXIT_OK


def _run_beta_sweep(em: _Emitter, cfg: ScenarioConfig, manifest: dict) -> tuple[str, int]:
    runs = []
    all_converged = True
    for beta in cfg.sweep:
        model = replace(cfg.model, intensity=replace(cfg.model.intensity, beta=beta))
        eq = solve_equilibrium(model, cfg.solver)
        prefix = f"beta_{beta:g}/"
        _write_solution(em, eq, model, prefix=prefix)
        runs.append({"beta": beta, "prefix": prefix, **_solution_summary(eq)})
        all_converged &= eq.converged
    manifest["runs"] = runs
    if not all_converged:
        return "non_convergence", EXIT_NO_CONVERGENCE
    return "ok", EXIT_OK


def _run_robustness(em: _Emitter, cfg: ScenarioConfig, manifest: dict) -> tuple[str, int]:
    eq = solve_equilibrium(cfg.model, cfg.solver)
    _write_solution(em, eq, cfg.model)
    manifest.update(_solution_summary(eq))
    report = robustness_study(cfg.model, cfg.solver, cfg.n_trials, cfg.seed)
    em.csv(
        "stderr_per_t.csv",
        ["t", "mean", "stderr"],
        zip(report.times, report.mean, report.stderr),
    )
    manifest["n_trials"] = cfg.n_trials
    manifest["trials_converged"] = int(report.converged.sum())
    manifest["max_stderr"] = float(report.stderr.max())
    if not (eq.converged and report.converged.all()):
        return "non_convergence", EXIT_NO_CONVERGENCE
    return "ok", EXIT_OK


def _run_validate(em: _Emitter, cfg: ScenarioConfig, manifest: dict) -> tuple[str, int]:
    p = cfg.model
    eq = solve_equilibrium(p, cfg.solver)
    _write_solution(em, eq, p)
    manifest.update(_solution_summary(eq))
    theoretical_value = p.x0 + p.inv.q_max * p.s0 + eq.values.level(p.inv.q_max)[0]
    rows: list[tuple] = []
    shifts = [s for s in BEST_RESPONSE_SHIFTS]
    table = best_response_check(eq, p, shifts, cfg.n_paths, cfg.seed)
    for row in table:
        if row.rejected:
            rows.append(("best_response", row.shift, math.nan, math.nan, math.nan, "rejected"))
        else:
            rows.append((
                "best_response", row.shift, row.estimate.mean, row.estimate.stderr,
                theoretical_value if row.shift == 0 else math.nan, "",
            ))
    sim = simulate_agent(eq, p, cfg.n_paths, cfg.seed)
    for c, t in enumerate(sim.checkpoint_times):
        j = int(round(t / p.grid.dt))
        deviation = float(np.abs(sim.histograms[c] - eq.population.proportions[:, j]).max())
        rows.append(("population_deviation", t, deviation, math.nan, math.nan, ""))
    em.csv(
        "montecarlo.csv",
        ["check", "arg", "estimate", "stderr", "reference", "note"],
        rows,
    )
    em.csv(
        "histograms.csv",
        ["checkpoint", "q", "empirical", "theoretical"],
        (
            (t, p.inv.q_min + iq, sim.histograms[c, iq],
             eq.population.proportions[iq, int(round(t / p.grid.dt))])
            for c, t in enumerate(sim.checkpoint_times)
            for iq in range(p.inv.n_levels)
        ),
    )
    manifest["n_paths"] = cfg.n_paths
    manifest["value_estimate"] = sim.estimate.mean
    manifest["value_stderr"] = sim.estimate.stderr
    manifest["value_reference"] = float(theoretical_value)
    if not eq.converged:
        return "non_convergence", EXIT_NO_CONVERGENCE
    return "ok", EXIT_OK
