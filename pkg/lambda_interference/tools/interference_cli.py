#!/usr/bin/env python3
# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""CLI tool to reproduce the multi-field interference figures from a config."""

import functools
import logging
import pathlib
from typing import Any, Callable, Optional

import click
import click_log

import lambda_interference

logger = logging.getLogger()
click_log.basic_config(logger)

EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3


def _run_options(function: Callable[..., Any]) -> Callable[..., Any]:
    @click.option(
        "--config",
        "-c",
        "config_source",
        required=True,
        help="JSON configuration file, or a bundled scenario name (fig2..fig6).",
    )
    @click.option("--seed", type=click.IntRange(min=0), help="Override the seed.")
    @click.option(
        "--out",
        "output_dir",
        type=click.Path(file_okay=False),
        help="Directory to write the artifacts to.",
    )
    @click.option(
        "--grid-step",
        "grid_step_ghz",
        type=float,
        help="Coupling detuning step of the sweep, in GHz.",
    )
    @click.option("--trials", type=click.IntRange(min=1), help="Simulated trials.")
    @functools.wraps(function)
    def wrapper(**kwargs: Any) -> Any:
        return function(**kwargs)

    return wrapper


def _execute(subcommand: str, export_events: bool = False, **options: Any) -> None:
    ctx = click.get_current_context()
    try:
        result = lambda_interference.run(
            subcommand,
            options.pop("config_source"),
            export_events=export_events,
            **options,
        )
    except (
        lambda_interference.ConfigError,
        lambda_interference.TimeTagFormatError,
    ) as error:
        click.echo(f"Configuration error: {error}", err=True)
        ctx.exit(EXIT_CONFIG_ERROR)
    except (lambda_interference.NumericError, ValueError) as error:
        click.echo(f"Numeric error: {error}", err=True)
        ctx.exit(EXIT_NUMERIC_ERROR)

    for path in result.paths:
        logging.info(f"Wrote {path}")
    click.echo(f"{subcommand}: {result.summary}")


@click.group()
@click_log.simple_verbosity_option(logger, "--vlog")
def main() -> None:
    """Lambda-system multi-field interference simulator."""


def _register(name: str, help_text: str) -> None:
    @_run_options
    def command(**options: Any) -> None:
        _execute(name, **options)

    main.command(name=name, help=help_text)(command)


_register("components", "Seven emission components at the configured detuning.")
_register("populations", "Bare-state populations over the square pulse.")
_register("sweep", "Emission components over the coupling-detuning grid.")
_register("filter", "Transmission windows of the calibrated cavity stacks.")
_register("convolve", "Filtered counts while the coupling detuning is scanned.")
_register("recover", "Wiener recovery of a synthetic photon spectrum.")
_register("tradeoff", "Cross-correlation against excitation probability.")
_register("gates", "Cross-correlation while one integration gate is delayed.")


@main.command(help="Photon statistics and the Cauchy-Schwarz test.")
@_run_options
@click.option(
    "--export-events",
    is_flag=True,
    help="Also write the detection events as CSV and binary time tags.",
)
def stats(export_events: bool, **options: Any) -> None:
    _execute("stats", export_events=export_events, **options)


@main.command(help="Summarize a binary time-tag file.")
@click.argument(
    "path",
    type=click.Path(exists=True, dir_okay=False),
    callback=lambda ctx, param, value: pathlib.Path(value),
)
@click.option(
    "--trials",
    "show_trials",
    type=click.IntRange(min=0),
    default=0,
    help="Print the events of the first N trials.",
)
def timetags(path: pathlib.Path, show_trials: Optional[int]) -> None:
    try:
        tags = lambda_interference.read_timetags(path)
    except lambda_interference.TimeTagFormatError as error:
        click.echo(f"Invalid time-tag file: {error}", err=True)
        click.get_current_context().exit(EXIT_CONFIG_ERROR)

    events = tags.events
    click.echo(
        f"seed {tags.seed}: {events.n_trials} trials, {len(events)} detections"
    )
    for record in tags.records():
        if record.trial >= (show_trials or 0):
            break
        for channel, t_ns in record.events:
            click.echo(f"{record.trial}\t{channel.label}\t{t_ns:.6f}")


if __name__ == "__main__":
    main()
