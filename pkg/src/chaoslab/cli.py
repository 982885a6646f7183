"""Command-line entry points.

Every experiment is a subcommand; `run` executes a whole config (a JSON
file path or the name of a bundled config such as ``paper-suite``).
With ``--server`` the work is posted to a running service and only the
rendering happens locally; otherwise everything runs in-process.

Exit status: 0 when every metric verdict passes, 1 when any fails,
2 on configuration or transport errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import ChaosLabError, ConfigError
from .harness import (
    SCHEMA_VERSION,
    ExperimentReport,
    MetricRecord,
    available_experiments,
    experiment_defaults,
    load_bundled_config,
    render_reports,
    run_config,
    write_reports,
)

_PATH_KEYS = ("paths", "mc_paths", "inner_paths")


@click.group()
@click.version_option(package_name="chaoslab")
def main():
    """Experiment harness for polynomial chaoses."""


def _common_options(fn):
    for option in reversed(
        (
            click.option("--paths", type=int, default=None, help="Override the sample-path count."),
            click.option(
                "--out-dir",
                type=click.Path(file_okay=False),
                default=None,
                help="Write reports.jsonl and summary.csv here.",
            ),
            click.option(
                "--format",
                "fmt",
                type=click.Choice(["json-lines", "csv"]),
                default="json-lines",
                show_default=True,
                help="Stdout rendering.",
            ),
            click.option(
                "--server",
                default=None,
                metavar="URL",
                help="Post the run to a chaoslab service instead of executing in-process.",
            ),
        )
    ):
        fn = option(fn)
    return fn


def _apply_paths(params: dict, name: str, paths: int, strict: bool) -> None:
    defaults = experiment_defaults(name)
    for key in _PATH_KEYS:
        if key in defaults:
            params[key] = paths
            return
    if strict:
        raise ConfigError(f"'{name}' takes no path-count parameter")


def _number(x):
    # float() also parses the "inf"/"nan" strings the service emits
    return float(x)


def _report_from_payload(body: dict) -> ExperimentReport:
    metrics = tuple(
        MetricRecord(
            m["name"],
            _number(m["value"]),
            standard_error=None if m["standard_error"] is None else _number(m["standard_error"]),
            exact=m["exact"],
            verdict=m["verdict"],
        )
        for m in body["metrics"]
    )
    return ExperimentReport(
        experiment_id=body["experiment_id"],
        config_hash=body["config_hash"],
        seed=body["seed"],
        metrics=metrics,
        runtime_seconds=body.get("runtime_seconds", 0.0),
        schema_version=body["schema_version"],
    )


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    try:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            response = client.post(route, json=payload)
    except httpx.HTTPError as exc:
        raise ConfigError(f"server unreachable: {exc}") from None
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise ConfigError(f"server returned {response.status_code}: {detail}")
    return response.json()


def _finish(reports, out_dir, fmt) -> None:
    if out_dir:
        write_reports(reports, out_dir)
    click.echo(render_reports(reports, fmt), nl=False)
    sys.exit(0 if all(r.all_pass for r in reports) else 1)


def _run_single(name, seed, paths, out_dir, fmt, server):
    params: dict = {}
    if paths is not None:
        _apply_paths(params, name, paths, strict=True)
    if server:
        data = _post(server, f"/experiments/{name}", {"seed": seed, "params": params})
        reports = [_report_from_payload(data["report"])]
    else:
        config = {
            "schema": SCHEMA_VERSION,
            "seed": seed,
            "experiments": [{"name": name, "params": params}],
        }
        reports = run_config(config)
    _finish(reports, out_dir, fmt)


def _make_command(name):
    @click.option("--seed", type=int, default=0, show_default=True, help="Root seed.")
    @_common_options
    def command(seed, paths, out_dir, fmt, server):
        try:
            _run_single(name, seed, paths, out_dir, fmt, server)
        except ChaosLabError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    command.__doc__ = f"Run the {name} experiment."
    return click.command(name=name)(command)


for _name in available_experiments():
    main.add_command(_make_command(_name))


def _load_config(source: str) -> dict:
    path = Path(source)
    if path.exists():
        try:
            return json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from None
    return load_bundled_config(source)


@main.command(name="run")
@click.argument("config_source", metavar="CONFIG")
@click.option("--seed", type=int, default=None, help="Override the config's pinned seed.")
@_common_options
def run_command(config_source, seed, paths, out_dir, fmt, server):
    """Run every experiment in CONFIG (a JSON file or a bundled name)."""
    try:
        config = _load_config(config_source)
        if seed is not None:
            config["seed"] = seed
        if paths is not None:
            for entry in config.get("experiments", ()):
                params = entry.setdefault("params", {})
                if isinstance(entry.get("name"), str):
                    _apply_paths(params, entry["name"], paths, strict=False)
        if server:
            data = _post(server, "/suite", {"config": config})
            reports = [_report_from_payload(body) for body in data["reports"]]
        else:
            reports = run_config(config)
        _finish(reports, out_dir, fmt)
    except ChaosLabError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Serve the HTTP API."""
    import uvicorn

    uvicorn.run("chaoslab.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
