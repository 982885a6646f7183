"""Experiment harness: enumeration oracles, convergence diagnostics,
experiment registry, and report emission."""

from .diagnostics import as_convergence_diagnostic
from .enumeration import (
    exact_decoupled_tail,
    exact_tail,
    min_decoupling_constant,
    pattern_matrix,
    reverse_triangle_check,
    sum_h_kernel,
)
from .experiments import (
    available_experiments,
    experiment_defaults,
    load_bundled_config,
    run_config,
)
from .reports import (
    SCHEMA_VERSION,
    ExperimentReport,
    MetricRecord,
    config_hash_of,
    render_reports,
    write_reports,
)

__all__ = [
    "experiment_defaults",
    "as_convergence_diagnostic",
    "pattern_matrix",
    "exact_tail",
    "exact_decoupled_tail",
    "min_decoupling_constant",
    "reverse_triangle_check",
    "sum_h_kernel",
    "available_experiments",
    "run_config",
    "load_bundled_config",
    "MetricRecord",
    "ExperimentReport",
    "config_hash_of",
    "write_reports",
    "render_reports",
    "SCHEMA_VERSION",
]
