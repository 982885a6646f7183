"""FastAPI wrapper around the experiment harness."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import ChaosLabError, ConfigError
from ..harness import SCHEMA_VERSION, available_experiments, load_bundled_config, run_config
from .models import (
    ExperimentListResponse,
    HealthResponse,
    RunRequest,
    RunResponse,
    SuiteRequest,
    SuiteResponse,
    report_to_model,
)


def create_app() -> FastAPI:
    app = FastAPI(title="chaoslab", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.get("/experiments", response_model=ExperimentListResponse)
    def experiments():
        return ExperimentListResponse(experiments=list(available_experiments()))

    @app.post("/experiments/{name}", response_model=RunResponse)
    def run_one(name: str, request: RunRequest):
        if name not in available_experiments():
            raise HTTPException(status_code=404, detail=f"unknown experiment '{name}'")
        config = {
            "schema": SCHEMA_VERSION,
            "seed": request.seed,
            "experiments": [{"name": name, "params": request.params}],
        }
        reports = _run(config)
        return RunResponse(report=report_to_model(reports[0]))

    @app.post("/suite", response_model=SuiteResponse)
    def run_suite(request: SuiteRequest):
        if request.bundled is not None:
            try:
                config = load_bundled_config(request.bundled)
            except ConfigError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from None
        else:
            config = dict(request.config)
        if request.seed is not None:
            config["seed"] = request.seed
        reports = _run(config)
        return SuiteResponse(
            reports=[report_to_model(r) for r in reports],
            all_pass=all(r.all_pass for r in reports),
        )

    return app


def _run(config):
    try:
        return run_config(config)
    except ChaosLabError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


app = create_app()
