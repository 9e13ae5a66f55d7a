"""HTTP service wrapping the solver: submit a scenario config, get the artifacts back.

Scenarios run synchronously inside the request and the emitted files are
returned in the response body, so clients own where results land on disk.
Config problems map to HTTP 422; solver non-convergence and stability
failures are reported in the response status with diagnostics included.
"""

from __future__ import annotations

import tempfile
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .config import ConfigError, ConfigParseError, apply_overrides, parse_config
from .model import validate_params
from .scenarios import run_scenario

__all__ = ["create_app", "app"]


class HealthResponse(BaseModel):
    status: str
    version: str


class ValidateParamsRequest(BaseModel):
    config: str = Field(description="scenario document, flat key-value or JSON")


class ValidateParamsResponse(BaseModel):
    violations: list[str]


class ScenarioRunRequest(BaseModel):
    config: str = Field(description="scenario document, flat key-value or JSON")
    seed: int | None = None
    n_steps: int | None = None


class ScenarioRunResponse(BaseModel):
    status: str
    exit_code: int
    kind: str
    manifest: dict[str, Any]
    files: dict[str, str]


def create_app() -> FastAPI:
    from . import __version__

    app = FastAPI(title="mfpricing", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/params/validate", response_model=ValidateParamsResponse)
    def validate(req: ValidateParamsRequest) -> ValidateParamsResponse:
        try:
            cfg = parse_config(req.config)
        except ConfigParseError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except ConfigError as exc:
            violations = getattr(exc, "violations", None) or [str(exc)]
            return ValidateParamsResponse(violations=violations)
        return ValidateParamsResponse(violations=validate_params(cfg.model))

    @app.post("/scenarios/run", response_model=ScenarioRunResponse)
    def run(req: ScenarioRunRequest) -> ScenarioRunResponse:
        try:
            cfg = parse_config(req.config)
            cfg = apply_overrides(cfg, seed=req.seed, n_steps=req.n_steps)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with tempfile.TemporaryDirectory() as tmp:
            result = run_scenario(cfg, out_dir=tmp)
            files = {
                name: (Path(tmp) / name).read_text() for name in result.files
            }
        return ScenarioRunResponse(
            status=result.status,
            exit_code=result.exit_code,
            kind=cfg.kind,
            manifest=result.manifest,
            files=files,
        )

    return app


app = create_app()
