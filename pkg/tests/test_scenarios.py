import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from mfpricing import parse_config, run_scenario

COARSE = "horizon = 10\nn_steps = 2000\n"


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def column(rows: list[dict], name: str) -> np.ndarray:
    return np.array([float(r[name]) for r in rows])


STANDARD_FILES = (
    "quotes.csv", "values.csv", "population.csv",
    "mean_quote.csv", "metrics.csv", "residuals.csv",
)


class TestEquilibriumScenario:
    def test_emits_the_standard_artifacts(self, tmp_path):
        cfg = parse_config("kind = equilibrium\n" + COARSE)
        result = run_scenario(cfg, out_dir=tmp_path)
        assert result.status == "ok" and result.exit_code == 0
        for name in STANDARD_FILES + ("manifest.json",):
            assert (tmp_path / name).exists(), name
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["converged"] is True
        assert manifest["iterations"] >= 1
        assert manifest["final_residual"] <= cfg.solver.tol

    def test_manifest_config_is_re_runnable(self, tmp_path):
        cfg = parse_config("kind = equilibrium\n" + COARSE)
        run_scenario(cfg, out_dir=tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        again = parse_config(json.dumps(manifest["config"]))
        assert again == cfg

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = parse_config("kind = equilibrium\nseed = 4\n" + COARSE)
        a, b = tmp_path / "a", tmp_path / "b"
        run_scenario(cfg, out_dir=a)
        run_scenario(cfg, out_dir=b)
        for name in STANDARD_FILES:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_forced_non_convergence_still_writes_the_log(self, tmp_path):
        cfg = parse_config(
            "kind = equilibrium\nsolver.tol = 0\nsolver.max_iter = 1\n" + COARSE
        )
        result = run_scenario(cfg, out_dir=tmp_path)
        assert result.status == "non_convergence"
        assert result.exit_code == 3
        log = read_csv(tmp_path / "residuals.csv")
        assert len(log) == 1

    def test_unstable_grid_reports_failure(self, tmp_path):
        cfg = parse_config("kind = equilibrium\nn_steps = 2\n")
        result = run_scenario(cfg, out_dir=tmp_path)
        assert result.status == "stability_failure"
        assert result.exit_code == 4
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert "rate * dt" in manifest["error"]

    def test_full_precision_columns(self, tmp_path):
        cfg = parse_config("kind = equilibrium\n" + COARSE)
        run_scenario(cfg, out_dir=tmp_path)
        rows = read_csv(tmp_path / "mean_quote.csv")
        # round-tripping the text must reproduce the float exactly
        values = column(rows, "delta_bar")
        texts = [r["delta_bar"] for r in rows]
        assert all(float(t) == v for t, v in zip(texts, values))


class TestReferenceScenario:
    def test_single_agent_surface_shape(self, tmp_path):
        cfg = parse_config("kind = reference\n" + COARSE)
        result = run_scenario(cfg, out_dir=tmp_path)
        assert result.exit_code == 0
        rows = read_csv(tmp_path / "quotes.csv")
        t = column(rows, "t")
        q = column(rows, "q").astype(int)
        f = column(rows, "delta_star")
        # quotes decrease in the inventory level at every time
        for when in np.unique(t)[:: len(np.unique(t)) // 7]:
            at = f[t == when][np.argsort(q[t == when])]
            assert np.all(np.diff(at) <= 1e-12)
        # high-inventory quotes dip and then rise into the horizon
        top = f[q == 5]
        assert top[-1] > top.min()


class TestBetaSweepScenario:
    def test_one_artifact_set_per_value(self, tmp_path):
        cfg = parse_config("kind = beta_sweep\nsweep = 0.3, 0.9\n" + COARSE)
        result = run_scenario(cfg, out_dir=tmp_path)
        assert result.exit_code == 0
        low = read_csv(tmp_path / "beta_0.3" / "mean_quote.csv")
        high = read_csv(tmp_path / "beta_0.9" / "mean_quote.csv")
        assert np.all(column(high, "delta_bar") < column(low, "delta_bar"))


class TestOversellScenario:
    def test_cancellation_report_written(self, tmp_path):
        cfg = parse_config(
            "kind = oversell\nq_min = -2\nalpha_neg = 0.2\nphi_neg = 0.06\nb_hi = 20\n"
            + COARSE
        )
        result = run_scenario(cfg, out_dir=tmp_path)
        assert result.exit_code == 0
        text = (tmp_path / "cancellation.txt").read_text()
        values = dict(line.split(" = ") for line in text.strip().splitlines())
        p_cancel = float(values["p_cancel"])
        assert 0.0 < p_cancel < 1.0
        assert p_cancel == pytest.approx(
            float(values["depth_1"]) + float(values["depth_2"]), rel=1e-12
        )


class TestRobustnessScenario:
    def test_stderr_report(self, tmp_path):
        cfg = parse_config("kind = robustness\nn_trials = 3\nseed = 5\n" + COARSE)
        result = run_scenario(cfg, out_dir=tmp_path)
        assert result.exit_code == 0
        rows = read_csv(tmp_path / "stderr_per_t.csv")
        assert len(rows) == 2001
        assert column(rows, "stderr").max() <= 1e-12
        assert result.manifest["trials_converged"] == 3


class TestValidateScenario:
    def test_montecarlo_reports(self, tmp_path):
        cfg = parse_config("kind = validate\nn_paths = 4000\nseed = 12\n" + COARSE)
        result = run_scenario(cfg, out_dir=tmp_path)
        assert result.exit_code == 0
        rows = read_csv(tmp_path / "montecarlo.csv")
        checks = {r["check"] for r in rows}
        assert checks == {"best_response", "population_deviation"}
        base = next(r for r in rows if r["check"] == "best_response" and float(r["arg"]) == 0)
        assert abs(float(base["estimate"]) - float(base["reference"])) \
            <= 4 * float(base["stderr"])
        hist = read_csv(tmp_path / "histograms.csv")
        assert {float(r["checkpoint"]) for r in hist} == {2.5, 5.0, 7.5, 10.0}
        empirical = column(hist, "empirical")
        theoretical = column(hist, "theoretical")
        assert np.abs(empirical - theoretical).max() <= 3 * math.sqrt(0.25 / 4000) + 1e-3
