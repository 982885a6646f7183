"""HTTP layer: pydantic bodies in `models`, the FastAPI app in `app`."""

from .app import app, create_app
from .models import (
    ExperimentListResponse,
    HealthResponse,
    MetricModel,
    ReportModel,
    RunRequest,
    RunResponse,
    SuiteRequest,
    SuiteResponse,
    report_to_model,
)

__all__ = [
    "app",
    "create_app",
    "ExperimentListResponse",
    "HealthResponse",
    "MetricModel",
    "ReportModel",
    "RunRequest",
    "RunResponse",
    "SuiteRequest",
    "SuiteResponse",
    "report_to_model",
]
