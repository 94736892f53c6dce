# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""Subcommands turning a run configuration into data artifacts."""

import dataclasses
import logging
import pathlib
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from . import _counting, _dynamics, _emission, _filter, _output, _timetags
from ._config import RunConfig, load_config
from ._exceptions import EstimateError


@dataclasses.dataclass(frozen=True)
class RunResult:
    paths: List[pathlib.Path]
    summary: str


def _ghz(value: float) -> float:
    return _dynamics.to_ghz(value)


def _emission_rows(emission: _emission.EmissionSet) -> List[List[Any]]:
    magnitudes = emission.normalized_magnitudes()
    intensities = emission.normalized_intensities()
    return [
        [
            _ghz(emission.delta23),
            component.index,
            _ghz(component.offset),
            component.amplitude,
            float(magnitudes[row]),
            float(intensities[row]),
        ]
        for row, component in enumerate(emission.components)
    ]


_EMISSION_COLUMNS = (
    "delta23_GHz",
    "j",
    "offset_GHz",
    "D",
    "absD_norm",
    "intensity_norm",
)


def _components(config: RunConfig, events: bool) -> RunResult:
    emission = _emission.emission_set(
        config.level_scheme(), config.drive_params(), config.collection_factors()
    )
    path = _output.write_csv(
        config, "components", _EMISSION_COLUMNS, _emission_rows(emission)
    )
    strongest = int(np.argmax(emission.normalized_magnitudes())) + 1
    return RunResult(
        [path],
        f"7 components at {_ghz(emission.delta23):.2f} GHz;"
        f" strongest is D{strongest}",
    )


def _sweep_points(config: RunConfig) -> List[_emission.SweepPoint]:
    return list(
        _emission.detuning_sweep(
            config.detuning_grid(),
            config.level_scheme(),
            config.drive_params(),
            config.collection_factors(),
        )
    )


def _sweep(config: RunConfig, events: bool) -> RunResult:
    points = _sweep_points(config)
    rows = [
        row
        for point in points
        if point.emission is not None
        for row in _emission_rows(point.emission)
    ]
    path = _output.write_csv(config, "sweep", _EMISSION_COLUMNS, rows)
    skipped = sum(point.emission is None for point in points)
    return RunResult(
        [path], f"{len(points)} detuning points, {skipped} skipped (degenerate)"
    )


def _populations(config: RunConfig, events: bool) -> RunResult:
    drive = config.drive_params()
    basis = _dynamics.solve(config.level_scheme(), drive)
    trace = _dynamics.population_trace(
        basis, drive.pulse_duration, config.time_grid.points
    )
    rows = [
        [float(t), *(float(p) for p in populations)]
        for t, populations in zip(trace.times, trace.populations)
    ]
    path = _output.write_csv(config, "populations", ("t_ns", "p1", "p2", "p3"), rows)
    final = trace.populations[-1]
    return RunResult(
        [path],
        f"populations at {drive.pulse_duration} ns:"
        f" {final[0]:.4f} {final[1]:.4f} {final[2]:.4f}",
    )


def _filter_windows(config: RunConfig, events: bool) -> RunResult:
    signal, idler = config.signal_stack(), config.idler_stack()
    grid = _filter.centered_grid(
        _dynamics.ghz(config.filter.span_ghz), config.filter.points
    )
    rows = zip(
        (_ghz(nu) for nu in grid),
        _filter.transmission(signal, grid),
        _filter.transmission(idler, grid),
    )
    path = _output.write_csv(
        config, "filter", ("freq_GHz", "signal", "idler"), ([*row] for row in rows)
    )
    # Measure a single order of the periodic window.
    fsr = signal.cavities[0].fsr
    if fsr:
        grid = grid[np.abs(grid) < fsr / 2]
    width = _filter.fwhm(_filter.window_grid(signal, grid))
    return RunResult(
        [path],
        f"signal stack FWHM {_ghz(width) * 1e3:.1f} MHz,"
        f" peak {signal.peak:.3f}",
    )


def _convolve(config: RunConfig, events: bool) -> RunResult:
    reference_delta23 = _dynamics.ghz(config.filter.reference_delta23_ghz)
    reference = _emission.emission_set(
        config.level_scheme().with_delta23(reference_delta23),
        config.drive_params(),
        config.collection_factors(),
    )
    signal, idler = _filter.tracking_stacks(
        reference, config.signal_stack(), config.idler_stack()
    )
    trace = _filter.convolution_sweep(
        _sweep_points(config),
        signal,
        idler,
        laser_tracking=config.filter.laser_tracking,
        reference_delta23=reference_delta23,
    )
    rows = (
        [_ghz(delta), float(s), float(i)]
        for delta, s, i in zip(trace.delta23, trace.signal, trace.idler)
    )
    path = _output.write_csv(
        config, "convolve", ("delta_GHz", "counts_signal", "counts_idler"), rows
    )
    peaks = _filter.count_peaks(trace.signal)
    positions = ", ".join(f"{_ghz(trace.delta23[index]):.2f}" for index in peaks)
    return RunResult(
        [path], f"signal trace has {len(peaks)} peaks at [{positions}] GHz"
    )


def recovery_roundtrip(
    config: RunConfig,
) -> Tuple[_filter.SpectrumGrid, _filter.SpectrumGrid, _filter.SpectrumGrid]:
    """Convolve the gaussian source, add the configured noise and recover it.

    Returns the source, the measured trace and the recovered spectrum.
    """
    section = config.recover
    grid = _filter.centered_grid(_dynamics.ghz(section.span_ghz), section.points)
    width = _dynamics.ghz(section.source_fwhm_mhz / 1e3)
    sigma = width / (2 * np.sqrt(2 * np.log(2)))
    source = _filter.SpectrumGrid(grid, np.exp(-0.5 * (grid / sigma) ** 2))

    stack = config.recovery_stack()
    trace = _filter.convolve_spectrum(source, stack)
    if section.noise:
        rng = np.random.default_rng(config.seed)
        noisy = trace.values + rng.normal(
            0.0, section.noise * trace.values.max(), grid.size
        )
        trace = _filter.SpectrumGrid(grid, noisy)
    recovered = _filter.recover_spectrum(trace, stack, config.filter.wiener_epsilon)
    return source, trace, recovered


def _recover(config: RunConfig, events: bool) -> RunResult:
    source, trace, recovered = recovery_roundtrip(config)
    grid = source.frequencies

    rows = (
        [_ghz(nu), float(s), float(t), float(v)]
        for nu, s, t, v in zip(grid, source.values, trace.values, recovered.values)
    )
    path = _output.write_csv(
        config, "recover", ("freq_GHz", "source", "trace", "value"), rows
    )
    measured = _filter.fwhm(recovered)
    efficiency = _filter.spectral_efficiency(source, config.recovery_stack())
    return RunResult(
        [path],
        f"recovered FWHM {_ghz(measured) * 1e3:.1f} MHz"
        f" (source {config.recover.source_fwhm_mhz:.1f} MHz,"
        f" efficiency {efficiency:.1%})",
    )


def _estimate_row(
    name: str, estimate: Optional[_counting.CorrelationEstimate]
) -> List[Any]:
    if estimate is None:
        return [name, None, None]
    return [name, estimate.value, estimate.sigma]


def _optional_estimate(
    compute: Callable[[], _counting.CorrelationEstimate]
) -> Optional[_counting.CorrelationEstimate]:
    try:
        return compute()
    except EstimateError as error:
        logging.warning(f"{error}")
        return None


def _export_events(
    config: RunConfig, stream: _counting.EventStream
) -> List[pathlib.Path]:
    csv_path = _output.write_csv(
        config,
        "stats",
        ("trial", "channel", "t_ns"),
        (
            [int(trial), _counting.Channel(int(channel)).label, float(t_ns)]
            for trial, channel, t_ns in zip(stream.trial, stream.channel, stream.t_ns)
        ),
        name="events",
    )
    binary_path = _output.output_path(config, "events", ".ttr")
    _timetags.write_timetags(binary_path, stream, config.seed)
    return [csv_path, binary_path]


def _stats(config: RunConfig, events: bool) -> RunResult:
    stream = _counting.simulate_trials(
        config.source_model(), config.counting.trials, config.seed
    )
    gate_s, gate_i = config.signal_gate(), config.idler_gate()
    summary = _counting.summarize(stream, gate_s, gate_i)

    g_si = _optional_estimate(lambda: _counting.g2_cross(summary))
    g_ss = _optional_estimate(
        lambda: _counting.g2_auto(
            stream, _counting.Channel.SIGNAL, config.seed + 1, gate_s
        )
    )
    g_ii = _optional_estimate(
        lambda: _counting.g2_auto(
            stream, _counting.Channel.IDLER, config.seed + 2, gate_i
        )
    )

    payload: Dict[str, Any] = {
        "counts": dataclasses.asdict(summary),
        "p_S": summary.p_s,
        "p_I": summary.p_i,
        "p_SI": summary.p_si,
    }
    rows: List[List[Any]] = [
        ["p_S", summary.p_s, None],
        ["p_I", summary.p_i, None],
        ["p_SI", summary.p_si, None],
        _estimate_row("g2_SI", g_si),
        _estimate_row("g2_SS", g_ss),
        _estimate_row("g2_II", g_ii),
    ]
    for name, estimate in (("g2_SI", g_si), ("g2_SS", g_ss), ("g2_II", g_ii)):
        payload[name] = dataclasses.asdict(estimate) if estimate else None

    for herald in _counting.Channel:
        name = f"heralding_{herald.label}"
        try:
            value: Optional[float] = _counting.heralding_efficiency(summary, herald)
        except EstimateError as error:
            logging.warning(f"{error}")
            value = None
        payload[name] = value
        rows.append([name, value, None])

    verdict = "no Cauchy-Schwarz test"
    if g_si and g_ss and g_ii:
        result = _counting.cs_test(g_si, g_ss, g_ii)
        bootstrap = _counting.cs_bootstrap(g_si, g_ss, g_ii, seed=config.seed)
        payload["cauchy_schwarz"] = {
            "violated": result.violated,
            "margin": result.margin,
            "sigma": result.sigma,
            "sigma_count": result.sigma_count,
            "bootstrap_sigma_count": bootstrap,
        }
        rows.append(["cs_margin", result.margin, result.sigma])
        rows.append(["cs_sigma_count", result.sigma_count, None])
        rows.append(["cs_bootstrap_sigma_count", bootstrap, None])
        verdict = (
            f"Cauchy-Schwarz {'violated' if result.violated else 'satisfied'}"
            f" by {result.sigma_count:.1f} sigma"
        )

    paths = [
        _output.write_csv(config, "stats", ("quantity", "value", "sigma"), rows),
        _output.write_json(config, "stats", payload),
    ]
    if events:
        paths.extend(_export_events(config, stream))
    return RunResult(paths, f"g2_SI = {g_si}; {verdict}")


def _tradeoff(config: RunConfig, events: bool) -> RunResult:
    rows = _counting.tradeoff_sweep(
        config.counting.energies_pj,
        config.energy_map(),
        config.source_model(),
        config.counting.trials,
        config.seed,
        config.signal_gate(),
        config.idler_gate(),
    )
    columns = (
        "energy_pJ",
        "mu",
        "omega_GHz",
        "excitation",
        "p_S",
        "p_I",
        "p_SI",
        "g2_SI",
        "g2_SI_sigma",
        "heralding_S",
        "heralding_I",
    )
    path = _output.write_csv(
        config,
        "tradeoff",
        columns,
        (
            [
                row.energy_pj,
                row.mu,
                _ghz(row.omega),
                row.excitation,
                row.summary.p_s,
                row.summary.p_i,
                row.summary.p_si,
                row.g2.value if row.g2 else None,
                row.g2.sigma if row.g2 else None,
                row.heralding_s,
                row.heralding_i,
            ]
            for row in rows
        ),
    )
    values = [f"{row.g2.value:.2f}" if row.g2 else "n/a" for row in rows]
    return RunResult([path], f"g2_SI over energies: {', '.join(values)}")


def _gates(config: RunConfig, events: bool) -> RunResult:
    stream = _counting.simulate_trials(
        config.source_model(), config.counting.trials, config.seed
    )
    points = _counting.gate_delay_scan(
        stream,
        config.counting.delays_ns,
        gate_width=config.counting.scan_gate_width_ns,
        scanned=config.counting.scanned,
    )
    path = _output.write_csv(
        config,
        "gates",
        ("delay_ns", "N_S", "N_I", "N_SI", "g2_SI", "g2_SI_sigma"),
        (
            [
                point.delay,
                point.summary.n_s,
                point.summary.n_i,
                point.summary.n_si,
                point.g2.value if point.g2 else None,
                point.g2.sigma if point.g2 else None,
            ]
            for point in points
        ),
    )
    best = max(
        (point for point in points if point.g2 is not None),
        key=lambda point: point.g2.value if point.g2 else 0.0,
        default=None,
    )
    if best is None:
        return RunResult([path], "no defined g2_SI in the gate scan")
    return RunResult(
        [path], f"highest g2_SI {best.g2} at {config.counting.scanned} {best.delay} ns"
    )


SUBCOMMANDS: Dict[str, Callable[[RunConfig, bool], RunResult]] = {
    "components": _components,
    "populations": _populations,
    "sweep": _sweep,
    "filter": _filter_windows,
    "convolve": _convolve,
    "recover": _recover,
    "stats": _stats,
    "tradeoff": _tradeoff,
    "gates": _gates,
}


def run(
    subcommand: str,
    config_source: str,
    export_events: bool = False,
    **overrides: Any,
) -> RunResult:
    """Load the configuration and run one subcommand on it."""
    try:
        handler = SUBCOMMANDS[subcommand]
    except KeyError:
        raise ValueError(f"Unknown subcommand {subcommand!r}.") from None
    config = load_config(config_source, **overrides)
    logging.info(f"Running {subcommand} for scenario {config.scenario}")
    return handler(config, export_events)
