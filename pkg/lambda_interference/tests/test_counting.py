# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""Tests for the photon-pair simulator and correlation estimators."""

# pylint: disable=protected-access,missing-docstring

import dataclasses
import math
import unittest

import numpy as np

from lambda_interference import _config, _counting
from lambda_interference._counting import Channel, CorrelationEstimate, CountSummary
from lambda_interference._exceptions import EstimateError

_WIDE = _counting.GateConfig(width=100.0)


def _within(estimate, expected, sigmas=3.0):
    return abs(estimate.value - expected) < sigmas * estimate.sigma


def _single_channel_events(photons, channel=Channel.SIGNAL):
    trials = np.repeat(np.arange(photons.size), photons)
    return _counting.EventStream(
        trial=trials,
        channel=np.full(trials.size, int(channel)),
        t_ns=np.zeros(trials.size),
        n_trials=photons.size,
    )


class TestSourceModel(unittest.TestCase):
    def test_validation(self):
        for kwargs in (
            {"mu": -0.1},
            {"mu": 0.1, "eta_s": 1.5},
            {"mu": 0.1, "purity": 0.4},
            {"mu": 0.1, "schmidt_number": 0.5},
            {"mu": 0.1, "record_window": 0.0},
            {"mu": math.nan},
        ):
            with self.subTest(kwargs=kwargs), self.assertRaises(ValueError):
                _counting.SourceModel(**kwargs)

    def test_purity_split(self):
        model = _counting.SourceModel(mu=0.2, purity=0.75)
        self.assertAlmostEqual(model.correlated_mean, 0.1)
        self.assertAlmostEqual(model.independent_mean, 0.05)

    def test_channel_parse(self):
        self.assertIs(Channel.parse("S"), Channel.SIGNAL)
        self.assertIs(Channel.parse("idler"), Channel.IDLER)
        self.assertEqual(Channel.IDLER.label, "I")
        with self.assertRaises(ValueError):
            Channel.parse("x")


class TestEventStream(unittest.TestCase):
    def test_sorted_on_construction(self):
        events = _counting.EventStream(
            trial=[2, 0, 2, 0],
            channel=[0, 1, 0, 0],
            t_ns=[1.0, 0.5, -1.0, 3.0],
            n_trials=3,
        )
        np.testing.assert_array_equal(events.trial, [0, 0, 2, 2])
        np.testing.assert_array_equal(events.channel, [0, 1, 0, 0])
        np.testing.assert_array_equal(events.t_ns, [3.0, 0.5, -1.0, 1.0])

    def test_records_cover_every_trial(self):
        events = _counting.EventStream(
            trial=[0, 2], channel=[0, 1], t_ns=[0.1, 0.2], n_trials=4
        )
        records = list(events.records())
        self.assertEqual([record.trial for record in records], [0, 1, 2, 3])
        self.assertEqual(records[1].events, ())
        self.assertEqual(records[2].events, ((Channel.IDLER, 0.2),))
        rebuilt = _counting.EventStream.from_records(records, 4)
        np.testing.assert_array_equal(rebuilt.t_ns, events.t_ns)

    def test_validation(self):
        with self.assertRaises(ValueError):
            _counting.EventStream(trial=[3], channel=[0], t_ns=[0.0], n_trials=3)
        with self.assertRaises(ValueError):
            _counting.EventStream(trial=[0], channel=[2], t_ns=[0.0], n_trials=1)
        with self.assertRaises(ValueError):
            _counting.EventStream(trial=[0], channel=[0], t_ns=[math.inf], n_trials=1)


class TestSimulateTrials(unittest.TestCase):
    def test_no_source_no_events(self):
        events = _counting.simulate_trials(_counting.SourceModel(mu=0.0), 10000, 1)
        self.assertEqual(len(events), 0)
        self.assertEqual(events.n_trials, 10000)

    def test_deterministic(self):
        model = _counting.SourceModel(mu=0.1, jitter=0.2, noise_i=1e-3)
        first = _counting.simulate_trials(model, 100000, seed=42)
        second = _counting.simulate_trials(model, 100000, seed=42)
        np.testing.assert_array_equal(first.trial, second.trial)
        np.testing.assert_array_equal(first.t_ns, second.t_ns)
        other = _counting.simulate_trials(model, 100000, seed=43)
        self.assertFalse(
            len(other) == len(first) and np.array_equal(other.t_ns, first.t_ns)
        )

    def test_blocks_do_not_depend_on_run_length(self):
        model = _counting.SourceModel(mu=0.1)
        short = _counting.simulate_trials(model, _counting._CHUNK_TRIALS, seed=5)
        longer = _counting.simulate_trials(model, _counting._CHUNK_TRIALS + 100, 5)
        head = longer.trial < _counting._CHUNK_TRIALS
        np.testing.assert_array_equal(longer.trial[head], short.trial)
        np.testing.assert_array_equal(longer.t_ns[head], short.t_ns)

    def test_streams_differ(self):
        model = _counting.SourceModel(mu=0.1)
        first = _counting.simulate_trials(model, 20000, seed=5, stream=0)
        second = _counting.simulate_trials(model, 20000, seed=5, stream=1)
        self.assertFalse(np.array_equal(first.trial[:100], second.trial[:100]))

    def test_invalid_trial_count(self):
        with self.assertRaises(ValueError):
            _counting.simulate_trials(_counting.SourceModel(mu=0.1), 0, 1)


class TestCorrelationEstimates(unittest.TestCase):
    def test_cross_arithmetic(self):
        unit = _counting.g2_cross(CountSummary(100, 10, 10, 1))
        self.assertAlmostEqual(unit.value, 1.0)
        estimate = _counting.g2_cross(CountSummary(100, 10, 10, 5))
        self.assertAlmostEqual(estimate.value, 5.0)
        expected_sigma = 5.0 * math.sqrt(1 / 5 + 1 / 10 + 1 / 10)
        self.assertAlmostEqual(estimate.sigma, expected_sigma)

    def test_cross_undefined(self):
        with self.assertRaises(EstimateError):
            _counting.g2_cross(CountSummary(100, 0, 10, 0))

    def test_summary_validation(self):
        with self.assertRaises(ValueError):
            CountSummary(100, 5, 10, 6)
        with self.assertRaises(ValueError):
            CountSummary(10, 11, 11, 0)

    def test_thermal_source(self):
        mu = 0.01
        model = _counting.SourceModel(mu=mu, eta_s=1.0, eta_i=1.0)
        events = _counting.simulate_trials(model, 1_000_000, seed=11)
        cross = _counting.g2_cross(_counting.summarize(events, _WIDE, _WIDE))
        # Clicks saturate at mu / (1 + mu); photon numbers give 2 + 1/mu.
        self.assertTrue(_within(cross, (1 + mu) / mu), msg=str(cross))
        self.assertTrue(_within(cross, 2 + 1 / mu), msg=str(cross))

        auto = _counting.g2_auto(events, Channel.SIGNAL, splitter_seed=12)
        self.assertTrue(_within(auto, 2.0), msg=str(auto))

    def test_unprepared_atoms_give_accidentals(self):
        model = _counting.SourceModel(mu=0.2, eta_s=1.0, eta_i=1.0, purity=0.5)
        events = _counting.simulate_trials(model, 200_000, seed=3)
        cross = _counting.g2_cross(_counting.summarize(events, _WIDE, _WIDE))
        self.assertTrue(_within(cross, 1.0), msg=str(cross))
        self.assertLessEqual(cross.value, 2.0)

        partial = dataclasses.replace(model, purity=0.75)
        events = _counting.simulate_trials(partial, 200_000, seed=3)
        cross = _counting.g2_cross(_counting.summarize(events, _WIDE, _WIDE))
        self.assertGreater(cross.value - 3 * cross.sigma, 1.0)

    def test_multimode_autocorrelation(self):
        model = _counting.SourceModel(mu=0.01, eta_s=1.0, eta_i=1.0, schmidt_number=2)
        events = _counting.simulate_trials(model, 1_000_000, seed=8)
        auto = _counting.g2_auto(events, Channel.IDLER, splitter_seed=9)
        self.assertTrue(_within(auto, 1.5), msg=str(auto))

    def test_single_photons_never_coincide(self):
        auto = _counting.g2_auto(
            _single_channel_events(np.ones(1000, dtype=int)), Channel.SIGNAL, 0
        )
        self.assertEqual(auto.value, 0.0)

    def test_coherent_light(self):
        photons = np.random.default_rng(4).poisson(0.2, 200_000)
        auto = _counting.g2_auto(_single_channel_events(photons), Channel.SIGNAL, 5)
        self.assertTrue(_within(auto, 1.0), msg=str(auto))

    def test_auto_without_detections(self):
        events = _single_channel_events(np.ones(10, dtype=int), Channel.IDLER)
        with self.assertRaises(EstimateError):
            _counting.g2_auto(events, Channel.SIGNAL, 0)

    def test_heralding(self):
        summary = CountSummary(1000, 100, 40, 20)
        herald = _counting.heralding_efficiency
        self.assertAlmostEqual(herald(summary, Channel.SIGNAL), 0.2)
        self.assertAlmostEqual(herald(summary, Channel.IDLER), 0.5)
        with self.assertRaises(EstimateError):
            _counting.heralding_efficiency(CountSummary(10, 0, 0, 0), Channel.IDLER)

    def test_heralding_tracks_partner_efficiency(self):
        model = _counting.SourceModel(mu=0.01, eta_s=0.3, eta_i=0.5)
        summary = _counting.summarize(
            _counting.simulate_trials(model, 1_000_000, seed=21), _WIDE, _WIDE
        )
        self.assertLess(
            abs(_counting.heralding_efficiency(summary, Channel.IDLER) - 0.3), 0.02
        )
        self.assertLess(
            abs(_counting.heralding_efficiency(summary, Channel.SIGNAL) - 0.5), 0.03
        )


class TestCauchySchwarz(unittest.TestCase):
    def setUp(self):
        self.g_si = CorrelationEstimate(8.58, 0.12)
        self.g_ss = CorrelationEstimate(2.05, 0.10)
        self.g_ii = CorrelationEstimate(1.64, 0.21)

    def test_measured_values_violate(self):
        result = _counting.cs_test(self.g_si, self.g_ss, self.g_ii)
        self.assertTrue(result.violated)
        self.assertAlmostEqual(result.margin, 8.58**2 - 2.05 * 1.64)
        expected_sigma = math.sqrt(
            (2 * 8.58 * 0.12) ** 2 + (1.64 * 0.10) ** 2 + (2.05 * 0.21) ** 2
        )
        self.assertAlmostEqual(result.sigma, expected_sigma)
        self.assertLess(abs(result.sigma_count - 33.3), 0.1)

    def test_bootstrap_agrees(self):
        result = _counting.cs_test(self.g_si, self.g_ss, self.g_ii)
        bootstrap = _counting.cs_bootstrap(self.g_si, self.g_ss, self.g_ii, seed=1)
        self.assertLess(abs(bootstrap / result.sigma_count - 1), 0.1)

    def test_classical_values(self):
        result = _counting.cs_test(
            CorrelationEstimate(1.5, 0.05),
            CorrelationEstimate(2.0, 0.1),
            CorrelationEstimate(2.0, 0.1),
        )
        self.assertFalse(result.violated)
        self.assertLess(result.sigma_count, 0)

    def test_exact_values(self):
        exact = CorrelationEstimate(2.0, 0.0)
        result = _counting.cs_test(exact, exact, exact)
        self.assertEqual(result.sigma_count, 0.0)
        with self.assertRaises(EstimateError):
            _counting.cs_bootstrap(exact, exact, exact)
        with self.assertRaises(ValueError):
            _counting.cs_bootstrap(self.g_si, self.g_ss, self.g_ii, n=1)


class TestGates(unittest.TestCase):
    def test_contains(self):
        gate = _counting.GateConfig(width=2.0, delay=1.0)
        np.testing.assert_array_equal(
            gate.contains([-0.5, 0.0, 2.0, 2.5]), [False, True, True, False]
        )
        with self.assertRaises(ValueError):
            _counting.GateConfig(width=0.0)

    def test_translation_invariance(self):
        model = _counting.SourceModel(mu=0.1, eta_s=0.3, eta_i=0.3, noise_i=0.01)
        events = _counting.simulate_trials(model, 50_000, seed=2)
        shifted = _counting.EventStream(
            events.trial, events.channel, events.t_ns + 3.0, events.n_trials
        )
        for width in (1.0, 4.0):
            gate = _counting.GateConfig(width)
            moved = _counting.GateConfig(width, delay=3.0)
            self.assertEqual(
                _counting.summarize(events, gate, gate),
                _counting.summarize(shifted, moved, moved),
            )

    def test_cascade_lag_makes_scan_asymmetric(self):
        model = _counting.SourceModel(mu=0.1, eta_s=0.3, eta_i=0.3, cascade_lag=0.5)
        events = _counting.simulate_trials(model, 200_000, seed=17)
        early, late = _counting.gate_delay_scan(events, [-1.0, 1.0], gate_width=1.0)
        self.assertEqual((early.delay, late.delay), (-1.0, 1.0))
        assert early.g2 is not None and late.g2 is not None
        separation = (late.g2.value - early.g2.value) / math.hypot(
            late.g2.sigma, early.g2.sigma
        )
        self.assertGreaterEqual(separation, 5.0)

    def test_prompt_emission_scan_is_symmetric(self):
        model = _counting.SourceModel(mu=0.1, eta_s=0.3, eta_i=0.3)
        events = _counting.simulate_trials(model, 1_000_000, seed=17)
        early, late = _counting.gate_delay_scan(events, [-1.0, 1.0], gate_width=2.0)
        assert early.g2 is not None and late.g2 is not None
        self.assertLess(
            abs(late.g2.value - early.g2.value),
            2 * math.hypot(late.g2.sigma, early.g2.sigma),
        )

    def test_far_delays_are_noisier(self):
        config = _config.load_config("fig6")
        events = _counting.simulate_trials(
            config.source_model(), config.counting.trials, config.seed
        )
        points = _counting.gate_delay_scan(
            events,
            config.counting.delays_ns,
            gate_width=config.counting.scan_gate_width_ns,
            scanned=config.counting.scanned,
        )
        estimated = [point for point in points if point.summary.n_si > 0]
        (prompt,) = [point for point in estimated if point.delay == 0.0]
        far = max(estimated, key=lambda point: abs(point.delay))
        self.assertGreaterEqual(abs(far.delay), 4.0)
        assert prompt.g2 is not None and far.g2 is not None
        self.assertGreater(
            far.g2.sigma / far.g2.value, prompt.g2.sigma / prompt.g2.value
        )

    def test_scanning_the_signal_gate_mirrors(self):
        model = _counting.SourceModel(mu=0.1, eta_s=0.3, eta_i=0.3, cascade_lag=0.5)
        events = _counting.simulate_trials(model, 200_000, seed=17)
        early, late = _counting.gate_delay_scan(
            events, [-1.0, 1.0], gate_width=1.0, scanned="gate1"
        )
        assert early.g2 is not None and late.g2 is not None
        self.assertGreater(early.g2.value, late.g2.value)

    def test_invalid_scan(self):
        events = _single_channel_events(np.ones(10, dtype=int))
        with self.assertRaises(ValueError):
            _counting.gate_delay_scan(events, [0.0], scanned="gate3")
        with self.assertRaises(EstimateError):
            _counting.gate_delay_scan(events, [])

    def test_empty_gate_is_reported(self):
        events = _single_channel_events(np.ones(10, dtype=int))
        with self.assertLogs(level="WARNING"):
            (point,) = _counting.gate_delay_scan(events, [0.0])
        self.assertIsNone(point.g2)


class TestTradeoff(unittest.TestCase):
    def test_energy_map(self):
        mapping = _counting.DriveEnergyMap(kappa_per_pj=1e-3, noise_i_per_pj=1e-5)
        self.assertAlmostEqual(mapping.mu(100.0), 0.1)
        self.assertAlmostEqual(mapping.omega(95.0), mapping.omega_ref)
        self.assertAlmostEqual(mapping.omega(4 * 95.0), 2 * mapping.omega_ref)
        model = mapping.model(_counting.SourceModel(mu=0.0), 200.0)
        self.assertAlmostEqual(model.mu, 0.2)
        self.assertAlmostEqual(model.noise_i, 2e-3)
        self.assertEqual(model.noise_s, 0.0)

    def test_reproduces_measured_tradeoff(self):
        config = _config.load_config("fig4")
        rows = _counting.tradeoff_sweep(
            config.counting.energies_pj,
            config.energy_map(),
            config.source_model(),
            config.counting.trials,
            config.seed,
            config.signal_gate(),
            config.idler_gate(),
        )
        self.assertEqual([row.energy_pj for row in rows], [42, 95, 160, 320, 640])
        g2 = [row.g2 for row in rows]
        assert all(estimate is not None for estimate in g2)
        values = [estimate.value for estimate in g2]

        self.assertGreaterEqual(values[0], 15.0)
        self.assertLessEqual(values[0], 19.0)
        self.assertTrue(_within(g2[1], 8.58), msg=str(g2[1]))
        self.assertTrue(all(value > 2.0 for value in values), msg=str(values))
        self.assertTrue(np.all(np.diff(values) < 0), msg=str(values))

        excitation = [row.excitation for row in rows]
        self.assertTrue(np.all(np.diff(excitation) > 0), msg=str(excitation))
        self.assertGreater(rows[-1].heralding_s, rows[0].heralding_s)
        self.assertGreater(rows[-1].heralding_i, rows[0].heralding_i)

    def test_rejects_empty_or_blind(self):
        mapping = _counting.DriveEnergyMap(kappa_per_pj=1e-3)
        template = _counting.SourceModel(mu=0.0)
        with self.assertRaises(EstimateError):
            _counting.tradeoff_sweep([], mapping, template, 10, 0, _WIDE, _WIDE)
        blind = _counting.SourceModel(mu=0.0, eta_s=0.0)
        with self.assertRaises(EstimateError):
            _counting.tradeoff_sweep([1.0], mapping, blind, 10, 0, _WIDE, _WIDE)


if __name__ == "__main__":
    unittest.main()
