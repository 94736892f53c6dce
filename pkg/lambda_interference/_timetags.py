# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""Binary time-tag files for simulated detection events.

A file is a little-endian header followed by one fixed-size record per
detection, in the order of the event stream.
"""

import dataclasses
import logging
import pathlib
from typing import Iterator

import construct
import numpy as np

from ._counting import EventStream, TrialRecord
from ._exceptions import TimeTagFormatError

FORMAT_VERSION = 1

_HEADER = construct.Struct(
    magic=construct.Const(b"LITT"),
    version=construct.Const(FORMAT_VERSION, construct.Int16ul),
    seed=construct.Int64ul,
    n_trials=construct.Int64ul,
    n_records=construct.Int64ul,
)

_RECORD = construct.Struct(
    trial=construct.Int32ul,
    channel=construct.Int8ul,
    t_ns=construct.Float64l,
)

_TIMETAG_FILE = construct.Struct(
    "header" / _HEADER,
    "records" / construct.Array(construct.this.header.n_records, _RECORD),
    construct.Terminated,
)


@dataclasses.dataclass(frozen=True)
class TimeTagFile:
    seed: int
    events: EventStream

    def records(self) -> Iterator[TrialRecord]:
        return self.events.records()


def build_timetags(events: EventStream, seed: int) -> bytes:
    if events.n_trials > 2**32:
        raise ValueError(f"Too many trials for 32-bit indices: {events.n_trials}.")
    return _TIMETAG_FILE.build(
        {
            "header": {
                "seed": seed,
                "n_trials": events.n_trials,
                "n_records": len(events),
            },
            "records": [
                {"trial": int(trial), "channel": int(channel), "t_ns": float(t_ns)}
                for trial, channel, t_ns in zip(
                    events.trial, events.channel, events.t_ns
                )
            ],
        }
    )


def parse_timetags(data: bytes) -> TimeTagFile:
    try:
        parsed = _TIMETAG_FILE.parse(data)
    except construct.ConstructError as error:
        raise TimeTagFormatError(f"Invalid time-tag data: {error}") from error

    records = parsed.records
    channel = np.array([record.channel for record in records], dtype=np.int64)
    if np.any(channel > 1):
        raise TimeTagFormatError(f"Unknown channel in records: {channel.max()}.")
    try:
        events = EventStream(
            trial=np.array([record.trial for record in records], dtype=np.int64),
            channel=channel,
            t_ns=np.array([record.t_ns for record in records], dtype=float),
            n_trials=parsed.header.n_trials,
        )
    except ValueError as error:
        raise TimeTagFormatError(f"Inconsistent time-tag records: {error}") from error
    return TimeTagFile(seed=parsed.header.seed, events=events)


def write_timetags(path: pathlib.Path, events: EventStream, seed: int) -> None:
    data = build_timetags(events, seed)
    logging.debug(f"Writing {len(events)} time tags ({len(data)} bytes) to {path}")
    path.write_bytes(data)


def read_timetags(path: pathlib.Path) -> TimeTagFile:
    return parse_timetags(path.read_bytes())
