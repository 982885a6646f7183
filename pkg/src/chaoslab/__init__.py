"""chaoslab: polynomial chaoses over random signs and Poisson counts.

The package has three layers.  `distributions`, `tensors`, `chaos`,
`cdp`, and `poisson` hold the math: distribution queries with exact
truncated moments, symmetric tensors on increasing index tuples, chaos
evaluation with decoupled and kernel-expanded variants, the dispersion
criterion with its counterexample schedules, and multiple integrals
against Poisson counts.  The `harness` subpackage names experiments
over those pieces and renders deterministic reports.  `service` and
`cli` expose the harness over HTTP and the command line.
"""

from .errors import (
    ChaosLabError,
    ConfigError,
    DomainError,
    EnumerationCapError,
    NoScheduleError,
    ParameterError,
)
from .harness import available_experiments, load_bundled_config, run_config
from .streams import Stream

__version__ = "0.1.0"

__all__ = [
    "ChaosLabError",
    "ConfigError",
    "DomainError",
    "EnumerationCapError",
    "NoScheduleError",
    "ParameterError",
    "Stream",
    "available_experiments",
    "load_bundled_config",
    "run_config",
    "__version__",
]
