# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""CSV and JSON artifacts carrying the scenario, config hash and seed."""

import csv
import json
import logging
import pathlib
from typing import Any, Iterable, List, Mapping, Optional, Sequence

from ._config import RunConfig


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def header_lines(config: RunConfig, subcommand: str) -> List[str]:
    return [
        f"# lambda-interference {subcommand}",
        f"# scenario: {config.scenario}",
        f"# config_sha256: {config.digest}",
        f"# seed: {config.seed}",
    ]


def output_path(config: RunConfig, name: str, suffix: str = ".csv") -> pathlib.Path:
    directory = pathlib.Path(config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory / f"{config.scenario}_{name}{suffix}"


def write_csv(
    config: RunConfig,
    subcommand: str,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    name: Optional[str] = None,
) -> pathlib.Path:
    path = output_path(config, name or subcommand)
    with path.open("w", encoding="utf-8", newline="") as stream:
        for line in header_lines(config, subcommand):
            stream.write(line + "\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        count = 0
        for row in rows:
            writer.writerow([format_value(value) for value in row])
            count += 1
    logging.debug(f"Wrote {count} rows to {path}")
    return path


def write_json(
    config: RunConfig, subcommand: str, payload: Mapping[str, Any]
) -> pathlib.Path:
    path = output_path(config, subcommand, ".json")
    document = {
        "scenario": config.scenario,
        "subcommand": subcommand,
        "config_sha256": config.digest,
        "seed": config.seed,
        **payload,
    }
    path.write_text(
        json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path
