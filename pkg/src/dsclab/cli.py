"""Command-line surface: four verbs, each a thin wrapper over the service
client.

Every verb accepts --seed, --out, and --format {csv|json}; --server points
the client at a remote instance instead of the in-process app.  CSV output
is canonical and excludes wall-clock fields, so identical seeds give
byte-identical files.
"""

from __future__ import annotations

import json
import sys

import click

from .client import ServiceClient, ServiceError
from .configio import load_config

FORMATS = click.Choice(["csv", "json"])


def _common(fn):
    fn = click.option("--seed", type=int, default=None,
                      help="Master seed override.")(fn)
    fn = click.option("--out", type=click.Path(writable=True), default=None,
                      help="Output path (default: stdout).")(fn)
    fn = click.option("--format", "fmt", type=FORMATS, default="csv",
                      show_default=True, help="Output format.")(fn)
    fn = click.option("--server", default=None, metavar="URL",
                      help="Base URL of a running service "
                           "(default: in-process).")(fn)
    return fn


def _emit(text: str, out):
    if out is None:
        click.echo(text, nl=not text.endswith("\n"))
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _client(server):
    return ServiceClient(base_url=server)


@click.group()
def main():
    """Distributed source coding laboratory."""


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--trial-log", type=click.Path(writable=True), default=None,
              help="Also write a per-trial CSV to this path.")
@_common
def simulate(config_path, trial_log, seed, out, fmt, server):
    """Run the configured code over its block-length sweep."""
    cfg = load_config(config_path)
    try:
        with _client(server) as client:
            resp = client.simulate(cfg, seed=seed,
                                   trial_log=trial_log is not None)
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    if trial_log is not None:
        with open(trial_log, "w") as fh:
            fh.write(resp["trial_csv"])
    if fmt == "csv":
        _emit(resp["csv"], out)
    else:
        _emit(json.dumps({"columns": resp["columns"], "rows": resp["rows"]},
                         indent=2) + "\n", out)
    if any(row.get("note") for row in resp["rows"]):
        sys.exit(1)


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@_common
def region(config_path, seed, out, fmt, server):
    """Emit or query the configured rate-distortion system."""
    del seed  # region construction is deterministic
    cfg = load_config(config_path)
    section = cfg.get("region", {})
    point = section.get("point")
    if point is not None:
        point = {str(k): float(v) for k, v in point.items()}
    try:
        with _client(server) as client:
            resp = client.region(cfg["problem"],
                                 mode=section.get("mode", "rit"),
                                 example=section.get("example"),
                                 eliminate=bool(section.get("eliminate", False)),
                                 point=point)
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    if fmt == "json":
        _emit(json.dumps(resp, indent=2) + "\n", out)
        return
    if resp.get("system") is not None:
        lines = resp["system"].splitlines()
        header = lines[0].split()
        rows = [ln.replace(" >= ", " ").split() for ln in lines[1:]]
        csv_text = ",".join(header + ["b"]) + "\n"
        csv_text += "\n".join(",".join(r) for r in rows) + "\n"
        _emit(csv_text, out)
    else:
        lines = ["row,slack,member"]
        for k, slack in enumerate(resp["slacks"]):
            lines.append(f"{k},{slack!r},{resp['member']}")
        _emit("\n".join(lines) + "\n", out)


@main.command()
@click.option("--scope", type=click.Choice(["hash", "spectrum", "decision",
                                            "identity", "all"]),
              default="all", show_default=True)
@_common
def verify(scope, seed, out, fmt, server):
    """Run the lemma verification batteries; nonzero exit on failure."""
    del seed  # batteries carry their own fixed fixtures
    try:
        with _client(server) as client:
            resp = client.verify(scope=scope)
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    if fmt == "csv":
        _emit(resp["csv"], out)
    else:
        _emit(json.dumps({"scope": resp["scope"], "failures": resp["failures"],
                          "reports": resp["reports"]}, indent=2) + "\n", out)
    if resp["failures"]:
        sys.exit(1)


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@_common
def spectrum(config_path, seed, out, fmt, server):
    """Estimate spectral entropy rates for the configured source."""
    cfg = load_config(config_path)
    try:
        with _client(server) as client:
            resp = client.spectrum(cfg, seed=seed)
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    if fmt == "csv":
        lines = ["n,estimate"]
        for n in sorted(resp["trajectory"], key=int):
            lines.append(f"{n},{resp['trajectory'][n]!r}")
        _emit("\n".join(lines) + "\n", out)
    else:
        _emit(json.dumps(resp, indent=2) + "\n", out)


if __name__ == "__main__":
    main()
