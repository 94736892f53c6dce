# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0

# pylint: disable=protected-access,missing-docstring

import pathlib
import tempfile
import unittest

import numpy as np

from lambda_interference import _counting, _timetags
from lambda_interference._exceptions import TimeTagFormatError

_HEADER_SIZE = 30
_RECORD_SIZE = 13


def _events():
    return _counting.EventStream(
        trial=[0, 0, 3],
        channel=[1, 0, 0],
        t_ns=[1.25, -0.5, 4.0],
        n_trials=5,
    )


class TestTimeTags(unittest.TestCase):
    def test_layout(self):
        data = _timetags.build_timetags(_events(), seed=42)
        self.assertEqual(len(data), _HEADER_SIZE + 3 * _RECORD_SIZE)
        self.assertEqual(data[:4], b"LITT")
        self.assertEqual(data[4:6], b"\x01\x00")
        self.assertEqual(data[6:14], (42).to_bytes(8, "little"))

    def test_parse(self):
        tags = _timetags.parse_timetags(_timetags.build_timetags(_events(), seed=7))
        self.assertEqual(tags.seed, 7)
        self.assertEqual(tags.events.n_trials, 5)
        np.testing.assert_array_equal(tags.events.trial, [0, 0, 3])
        np.testing.assert_array_equal(tags.events.channel, [0, 1, 0])
        np.testing.assert_array_equal(tags.events.t_ns, [-0.5, 1.25, 4.0])
        self.assertEqual(len(list(tags.records())), 5)

    def test_empty_run(self):
        empty = _counting.EventStream([], [], [], n_trials=3)
        data = _timetags.build_timetags(empty, seed=0)
        self.assertEqual(len(data), _HEADER_SIZE)
        self.assertEqual(len(_timetags.parse_timetags(data).events), 0)

    def test_file_roundtrip(self):
        events = _counting.simulate_trials(
            _counting.SourceModel(mu=0.2, jitter=0.1), 2000, seed=3
        )
        with tempfile.TemporaryDirectory() as tmpdir:
            path = pathlib.Path(tmpdir) / "run.ttr"
            _timetags.write_timetags(path, events, seed=3)
            tags = _timetags.read_timetags(path)
        np.testing.assert_array_equal(tags.events.trial, events.trial)
        np.testing.assert_array_equal(tags.events.t_ns, events.t_ns)

    def test_bad_magic(self):
        data = _timetags.build_timetags(_events(), seed=1)
        with self.assertRaises(TimeTagFormatError):
            _timetags.parse_timetags(b"XXXX" + data[4:])

    def test_bad_version(self):
        data = bytearray(_timetags.build_timetags(_events(), seed=1))
        data[4] = 2
        with self.assertRaises(TimeTagFormatError):
            _timetags.parse_timetags(bytes(data))

    def test_truncated(self):
        data = _timetags.build_timetags(_events(), seed=1)
        for size in (0, 10, len(data) - 1):
            with self.subTest(size=size), self.assertRaises(TimeTagFormatError):
                _timetags.parse_timetags(data[:size])

    def test_trailing_bytes(self):
        data = _timetags.build_timetags(_events(), seed=1)
        with self.assertRaises(TimeTagFormatError):
            _timetags.parse_timetags(data + b"\x00")

    def test_unknown_channel(self):
        data = bytearray(_timetags.build_timetags(_events(), seed=1))
        data[_HEADER_SIZE + 4] = 2
        with self.assertRaises(TimeTagFormatError):
            _timetags.parse_timetags(bytes(data))

    def test_trial_outside_run(self):
        data = bytearray(_timetags.build_timetags(_events(), seed=1))
        data[_HEADER_SIZE + 2 * _RECORD_SIZE] = 9
        with self.assertRaises(TimeTagFormatError):
            _timetags.parse_timetags(bytes(data))


if __name__ == "__main__":
    unittest.main()
