"""Structured experiment reports.

One report per experiment run: metric rows plus the identifying triple
(experiment id, config hash, seed).  Reports with equal config and seed
must be byte-identical once serialized, so the canonical forms exclude
wall-clock runtime; the runtime stays on the in-memory record for
console display.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ParameterError

__all__ = [
    "SCHEMA_VERSION",
    "MetricRecord",
    "ExperimentReport",
    "config_hash_of",
    "write_reports",
    "render_reports",
]

SCHEMA_VERSION = 1

_VERDICTS = ("pass", "fail", "info")


@dataclass(frozen=True)
class MetricRecord:
    """One measured quantity.

    Exactly one of the two accuracy markers applies: stochastic metrics
    carry a standard error, exact ones carry the exact flag.
    """

    name: str
    value: float
    standard_error: float | None = None
    exact: bool = False
    verdict: str = "info"

    def __post_init__(self) -> None:
        if not self.name:
            raise ParameterError("metric name must be nonempty")
        if self.verdict not in _VERDICTS:
            raise ParameterError(f"verdict must be one of {_VERDICTS}")
        if self.exact == (self.standard_error is not None):
            raise ParameterError(
                "a metric is either exact or carries a standard error"
            )
        object.__setattr__(self, "value", float(self.value))
        if self.standard_error is not None:
            if self.standard_error < 0:
                raise ParameterError("standard error must be nonnegative")
            object.__setattr__(self, "standard_error", float(self.standard_error))


@dataclass(frozen=True)
class ExperimentReport:
    experiment_id: str
    config_hash: str
    seed: int
    metrics: tuple[MetricRecord, ...]
    runtime_seconds: float = 0.0
    schema_version: int = field(default=SCHEMA_VERSION)

    @property
    def all_pass(self) -> bool:
        return all(m.verdict != "fail" for m in self.metrics)

    def canonical_dict(self) -> dict:
        """Serializable form; runtime is deliberately left out so equal
        (config, seed) runs serialize to equal bytes."""
        return {
            "schema_version": self.schema_version,
            "experiment_id": self.experiment_id,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "metrics": [
                {
                    "name": m.name,
                    "value": _jsonable(m.value),
                    "standard_error": _jsonable(m.standard_error),
                    "exact": m.exact,
                    "verdict": m.verdict,
                }
                for m in self.metrics
            ],
        }

    def to_json_line(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))


def _jsonable(x):
    # JSON has no inf/nan literals; strings keep the line parseable
    if x is None:
        return None
    if math.isinf(x) or math.isnan(x):
        return repr(x)
    return x


def config_hash_of(config: dict) -> str:
    """SHA-256 of the canonical JSON encoding."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _summary_rows(reports) -> list[list[str]]:
    rows = [["experiment", "metric", "value", "standard_error", "exact", "verdict"]]
    for report in reports:
        for m in report.metrics:
            rows.append(
                [
                    report.experiment_id,
                    m.name,
                    repr(m.value),
                    "" if m.standard_error is None else repr(m.standard_error),
                    "true" if m.exact else "false",
                    m.verdict,
                ]
            )
    return rows


def render_reports(reports, fmt: str = "json-lines") -> str:
    """Reports as text, either JSON lines or the CSV summary table."""
    if fmt == "json-lines":
        return "".join(r.to_json_line() + "\n" for r in reports)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(_summary_rows(reports))
        return buf.getvalue()
    raise ParameterError("format must be 'json-lines' or 'csv'")


def write_reports(reports, out_dir) -> tuple[Path, Path]:
    """Write reports.jsonl and summary.csv under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jsonl = out / "reports.jsonl"
    jsonl.write_text(render_reports(reports, "json-lines"))
    summary = out / "summary.csv"
    summary.write_text(render_reports(reports, "csv"))
    return jsonl, summary
