"""Command-line entry point: identity checks, experiment runs, re-aggregation
and shipped demos."""

from __future__ import annotations

import importlib.resources
import json
import os
import sys

import click

from .checks import run_population_checks
from .errors import ConfigError
from .harness import aggregate, emit, load_config, load_trials, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRIAL = 3


@click.group()
def main():
    """Mixture-proportion estimation toolkit."""


@main.command("population-check")
@click.option("--seed", default=0, show_default=True, help="Base seed for the random instances.")
@click.option("--triples", default=1000, show_default=True, help="Number of random instances.")
def population_check(seed: int, triples: int):
    """Run the exact-identity suite and print one pass/fail line per check."""
    results = run_population_checks(seed=seed, n_triples=triples)
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"[{status}] {r.name}" + (f" - {r.detail}" if r.detail else ""))
        failed = failed or not r.passed
    sys.exit(EXIT_TRIAL if failed else EXIT_OK)


def _execute(config: dict, out_dir: str, seed, jobs: int, timing: bool) -> int:
    if seed is not None:
        config = dict(config, base_seed=int(seed))
    if timing:
        config = dict(config, timing=True)
    reports = run_experiment(config, jobs=jobs)
    summary = aggregate(reports)
    paths = emit(reports, summary, out_dir, config=config)
    for name in sorted(paths):
        click.echo(f"wrote {paths[name]}")
    n_failed = sum(1 for r in reports if r.error)
    if n_failed:
        click.echo(f"{n_failed}/{len(reports)} trials failed", err=True)
        return EXIT_TRIAL
    return EXIT_OK


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=None, type=int, help="Override the config base seed.")
@click.option("--jobs", default=1, show_default=True, type=click.IntRange(min=1))
@click.option("--timing/--no-timing", default=False, help="Record wall times (breaks byte-stability of trials.csv).")
def run(config_path: str, out_dir: str, seed, jobs: int, timing: bool):
    """Run the experiment grid described by a JSON config."""
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    sys.exit(_execute(config, out_dir, seed, jobs, timing))


@main.command()
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True, file_okay=False))
def report(in_dir: str):
    """Re-aggregate an existing trials.csv and print the summary table."""
    trials_path = os.path.join(in_dir, "trials.csv")
    if not os.path.exists(trials_path):
        click.echo(f"config error: no trials.csv in {in_dir}", err=True)
        sys.exit(EXIT_CONFIG)
    reports = load_trials(trials_path)
    summary = aggregate(reports)
    header = f"{'scenario':<12} {'kappa*':>7} {'estimator':<12} {'variant':<8} {'mae':>8} {'bias':>9} sign"
    click.echo(header)
    for row in summary:
        click.echo(
            f"{row['scenario']:<12} {row['kappa_star']:>7.3f} {row['estimator']:<12} "
            f"{row['variant']:<8} {row['mae']:>8.4f} {row['bias']:>+9.4f} {row['sign']}"
        )
    with open(os.path.join(in_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump({"rows": summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    sys.exit(EXIT_OK)


def shipped_config(name: str) -> dict:
    """Load one of the packaged experiment configs by scenario name."""
    resource = importlib.resources.files("mpekit").joinpath(f"configs/{name}.json")
    if not resource.is_file():
        raise ConfigError(f"no shipped config named {name!r}")
    return json.loads(resource.read_text(encoding="utf-8"))


@main.command()
@click.argument("scenario")
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False))
@click.option("--jobs", default=1, show_default=True, type=click.IntRange(min=1))
def demo(scenario: str, out_dir, jobs: int):
    """Run a shipped config (synthetic, gamma, irreducible, reporting, trend)."""
    try:
        config = shipped_config(scenario)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    sys.exit(_execute(config, out_dir or f"out_{scenario}", None, jobs, False))


if __name__ == "__main__":
    main()
