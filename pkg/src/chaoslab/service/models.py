"""Request and response bodies for the HTTP surface.

Non-finite metric values travel as their ``repr`` strings ("inf",
"-inf", "nan") because JSON has no encoding for them; clients can
round-trip with ``float()``.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

from ..harness import ExperimentReport


class MetricModel(BaseModel):
    name: str
    value: float | str
    standard_error: float | str | None = None
    exact: bool = False
    verdict: str = "info"


class ReportModel(BaseModel):
    experiment_id: str
    config_hash: str
    seed: int
    schema_version: int
    runtime_seconds: float
    metrics: list[MetricModel]
    all_pass: bool


def report_to_model(report: ExperimentReport) -> ReportModel:
    body = report.canonical_dict()
    return ReportModel(
        experiment_id=body["experiment_id"],
        config_hash=body["config_hash"],
        seed=body["seed"],
        schema_version=body["schema_version"],
        runtime_seconds=report.runtime_seconds,
        metrics=[MetricModel(**m) for m in body["metrics"]],
        all_pass=report.all_pass,
    )


class RunRequest(BaseModel):
    seed: int = 0
    params: dict = Field(default_factory=dict)


class RunResponse(BaseModel):
    report: ReportModel


class SuiteRequest(BaseModel):
    """Exactly one of ``config`` (inline object) or ``bundled`` (name of a
    packaged config).  ``seed`` overrides the config's pinned seed."""

    config: dict | None = None
    bundled: str | None = None
    seed: int | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.config is None) == (self.bundled is None):
            raise ValueError("provide exactly one of 'config' or 'bundled'")
        return self


class SuiteResponse(BaseModel):
    reports: list[ReportModel]
    all_pass: bool


class HealthResponse(BaseModel):
    status: str
    version: str


class ExperimentListResponse(BaseModel):
    experiments: list[str]
