# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""Monte Carlo photon-pair source, click detection and correlation estimators.

Times are in ns relative to the coupling pulse. Channel 0 is the signal (gate
1) and channel 1 the idler (gate 2).
"""

import dataclasses
import enum
import logging
import math
from typing import (
    Any,
    Callable,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
    TypeVar,
)

import numpy as np
import numpy.typing as npt
from uncertainties import ufloat

from . import _dynamics
from ._exceptions import EstimateError

# Trials simulated per random stream; fixed so results never depend on how
# the run is split up.
_CHUNK_TRIALS = 65536

T = TypeVar("T")


class Channel(enum.IntEnum):
    SIGNAL = 0
    IDLER = 1

    @property
    def label(self) -> str:
        return "S" if self is Channel.SIGNAL else "I"

    @classmethod
    def parse(cls, value: str) -> "Channel":
        labels = {
            "s": cls.SIGNAL,
            "signal": cls.SIGNAL,
            "i": cls.IDLER,
            "idler": cls.IDLER,
        }
        try:
            return labels[value.lower()]
        except KeyError:
            raise ValueError(f"Unknown channel {value!r}; expected S or I.") from None


def _require_probability(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and 0 <= value <= 1):
            raise ValueError(f"{name} must be a probability, got {value}.")


def _require_non_negative(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value >= 0):
            raise ValueError(f"{name} must be non-negative, got {value}.")


@dataclasses.dataclass(frozen=True)
class SourceModel:
    """Pair source and detection chain.

    `noise_s`/`noise_i` are background click probabilities per trial, spread
    over the record window. `purity` is the fraction of atoms prepared in the
    initial ground state; the unprepared part emits into two independent
    sources. `schmidt_number` sets the marginal statistics, g2_auto = 1 + 1/K.
    """

    mu: float
    eta_s: float = 0.055
    eta_i: float = 0.055
    noise_s: float = 0.0
    noise_i: float = 0.0
    purity: float = 1.0
    cascade_lag: float = 0.0
    jitter: float = 0.0
    schmidt_number: float = 1.0
    emission_width: float = 2.0
    record_window: float = 20.0
    leakage: float = 0.0

    def __post_init__(self) -> None:
        _require_non_negative(
            mu=self.mu,
            cascade_lag=self.cascade_lag,
            jitter=self.jitter,
            emission_width=self.emission_width,
        )
        _require_probability(
            eta_s=self.eta_s,
            eta_i=self.eta_i,
            noise_s=self.noise_s,
            noise_i=self.noise_i,
            leakage=self.leakage,
        )
        if not 0.5 <= self.purity <= 1:
            raise ValueError(f"purity must be within [0.5, 1], got {self.purity}.")
        if not (math.isfinite(self.schmidt_number) and self.schmidt_number >= 1):
            raise ValueError(
                f"schmidt_number must be at least 1, got {self.schmidt_number}."
            )
        if not (math.isfinite(self.record_window) and self.record_window > 0):
            raise ValueError(
                f"record_window must be positive, got {self.record_window}."
            )

    @property
    def correlated_mean(self) -> float:
        return self.mu * (2 * self.purity - 1)

    @property
    def independent_mean(self) -> float:
        return self.mu * (1 - self.purity)


@dataclasses.dataclass(frozen=True)
class TrialRecord:
    trial: int
    events: Tuple[Tuple[Channel, float], ...] = ()


@dataclasses.dataclass(frozen=True)
class EventStream:
    """Detection events of a run, sorted by trial, then channel, then time."""

    trial: npt.NDArray[np.int64]
    channel: npt.NDArray[np.int8]
    t_ns: npt.NDArray[np.float64]
    n_trials: int

    def __post_init__(self) -> None:
        trial = np.asarray(self.trial, dtype=np.int64)
        channel = np.asarray(self.channel, dtype=np.int8)
        t_ns = np.asarray(self.t_ns, dtype=float)
        if not trial.shape == channel.shape == t_ns.shape or trial.ndim != 1:
            raise ValueError("Event arrays must be one-dimensional and aligned.")
        if self.n_trials < 0:
            raise ValueError(f"Negative trial count {self.n_trials}.")
        if trial.size and (trial.min() < 0 or trial.max() >= self.n_trials):
            raise ValueError("Event trial index outside the run.")
        if not np.all(np.isin(channel, (Channel.SIGNAL, Channel.IDLER))):
            raise ValueError("Event channel must be 0 (signal) or 1 (idler).")
        if not np.all(np.isfinite(t_ns)):
            raise ValueError("Event timestamps must be finite.")

        order = np.lexsort((t_ns, channel, trial))
        object.__setattr__(self, "trial", trial[order])
        object.__setattr__(self, "channel", channel[order])
        object.__setattr__(self, "t_ns", t_ns[order])

    def __len__(self) -> int:
        return int(self.trial.size)

    @classmethod
    def from_records(
        cls, records: Sequence[TrialRecord], n_trials: int
    ) -> "EventStream":
        rows = [
            (record.trial, int(channel), t_ns)
            for record in records
            for channel, t_ns in record.events
        ]
        if not rows:
            return cls(np.zeros(0), np.zeros(0), np.zeros(0), n_trials)
        trial, channel, t_ns = zip(*rows)
        return cls(np.array(trial), np.array(channel), np.array(t_ns), n_trials)

    def records(self) -> Iterator[TrialRecord]:
        """One record per trial, including trials without detections."""
        bounds = np.searchsorted(self.trial, np.arange(self.n_trials + 1))
        for trial in range(self.n_trials):
            start, stop = bounds[trial], bounds[trial + 1]
            yield TrialRecord(
                trial=trial,
                events=tuple(
                    (Channel(int(channel)), float(t_ns))
                    for channel, t_ns in zip(
                        self.channel[start:stop], self.t_ns[start:stop]
                    )
                ),
            )


def _thermal(
    rng: np.random.Generator, mean: float, schmidt_number: float, size: int
) -> npt.NDArray[np.int64]:
    if mean == 0:
        return np.zeros(size, dtype=np.int64)
    # K independent thermal modes sum to a negative binomial.
    return rng.negative_binomial(
        schmidt_number, schmidt_number / (schmidt_number + mean), size
    )


def _lag(rng: np.random.Generator, mean: float, size: int) -> npt.NDArray[np.float64]:
    if mean == 0:
        return np.zeros(size)
    return rng.exponential(mean, size)


class _ChunkEvents:
    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng
        self.trial: List[npt.NDArray] = []
        self.channel: List[npt.NDArray] = []
        self.t_ns: List[npt.NDArray] = []

    def detect(
        self,
        trials: npt.NDArray[np.int64],
        times: npt.NDArray[np.float64],
        efficiency: float,
        channel: Channel,
    ) -> None:
        detected = self.rng.random(trials.size) < efficiency
        self.trial.append(trials[detected])
        self.channel.append(np.full(int(detected.sum()), channel, dtype=np.int8))
        self.t_ns.append(times[detected])


def _simulate_chunk(
    model: SourceModel, size: int, rng: np.random.Generator
) -> Tuple[npt.NDArray, npt.NDArray, npt.NDArray]:
    half_width = model.emission_width / 2
    half_window = model.record_window / 2
    events = _ChunkEvents(rng)
    trials = np.arange(size)

    pairs = _thermal(rng, model.correlated_mean, model.schmidt_number, size)
    lone_s = _thermal(rng, model.independent_mean, model.schmidt_number, size)
    lone_i = _thermal(rng, model.independent_mean, model.schmidt_number, size)

    pair_trials = np.repeat(trials, pairs)
    emitted = rng.uniform(-half_width, half_width, pair_trials.size)
    events.detect(pair_trials, emitted, model.eta_s, Channel.SIGNAL)
    events.detect(
        pair_trials,
        emitted + _lag(rng, model.cascade_lag, pair_trials.size),
        model.eta_i,
        Channel.IDLER,
    )

    lone_trials = np.repeat(trials, lone_s)
    events.detect(
        lone_trials,
        rng.uniform(-half_width, half_width, lone_trials.size),
        model.eta_s,
        Channel.SIGNAL,
    )
    lone_trials = np.repeat(trials, lone_i)
    events.detect(
        lone_trials,
        rng.uniform(-half_width, half_width, lone_trials.size)
        + _lag(rng, model.cascade_lag, lone_trials.size),
        model.eta_i,
        Channel.IDLER,
    )

    # Stray pairs from coupling light leaking outside the pulse.
    leak_trials = np.flatnonzero(rng.random(size) < model.leakage)
    leaked = rng.uniform(-half_window, half_window, leak_trials.size)
    events.detect(leak_trials, leaked, model.eta_s, Channel.SIGNAL)
    events.detect(
        leak_trials,
        leaked + _lag(rng, model.cascade_lag, leak_trials.size),
        model.eta_i,
        Channel.IDLER,
    )

    for channel, probability in (
        (Channel.SIGNAL, model.noise_s),
        (Channel.IDLER, model.noise_i),
    ):
        noisy = np.flatnonzero(rng.random(size) < probability)
        events.detect(
            noisy, rng.uniform(-half_window, half_window, noisy.size), 1.0, channel
        )

    t_ns = np.concatenate(events.t_ns)
    if model.jitter > 0:
        t_ns = t_ns + rng.normal(0.0, model.jitter, t_ns.size)
    return np.concatenate(events.trial), np.concatenate(events.channel), t_ns


def simulate_trials(
    model: SourceModel, n_trials: int, seed: int, stream: int = 0
) -> EventStream:
    """Simulate `n_trials` coupling pulses.

    Every block of trials draws from its own stream spawned from
    (seed, stream, block), so a run is reproducible bit for bit.
    """
    if n_trials < 1:
        raise ValueError(f"Need at least one trial, got {n_trials}.")

    trial: List[npt.NDArray] = []
    channel: List[npt.NDArray] = []
    t_ns: List[npt.NDArray] = []
    for chunk, start in enumerate(range(0, n_trials, _CHUNK_TRIALS)):
        size = min(_CHUNK_TRIALS, n_trials - start)
        rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(stream, chunk))
        )
        chunk_trial, chunk_channel, chunk_t = _simulate_chunk(model, size, rng)
        trial.append(chunk_trial + start)
        channel.append(chunk_channel)
        t_ns.append(chunk_t)

    events = EventStream(
        np.concatenate(trial), np.concatenate(channel), np.concatenate(t_ns), n_trials
    )
    logging.debug(f"Simulated {n_trials} trials with {len(events)} detections.")
    return events


@dataclasses.dataclass(frozen=True)
class GateConfig:
    width: float
    delay: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.width) and self.width > 0):
            raise ValueError(f"Gate width must be positive, got {self.width}.")
        if not math.isfinite(self.delay):
            raise ValueError(f"Non-finite gate delay: {self.delay!r}.")

    def contains(self, t_ns: npt.ArrayLike) -> npt.NDArray[np.bool_]:
        return np.abs(np.asarray(t_ns) - self.delay) <= self.width / 2


@dataclasses.dataclass(frozen=True)
class CountSummary:
    n_trials: int
    n_s: int
    n_i: int
    n_si: int

    def __post_init__(self) -> None:
        if not 0 <= self.n_si <= min(self.n_s, self.n_i) <= self.n_trials:
            raise ValueError(f"Inconsistent counts: {self}.")
        if max(self.n_s, self.n_i) > self.n_trials:
            raise ValueError(f"More clicks than trials: {self}.")

    def _probability(self, count: int) -> float:
        if self.n_trials == 0:
            return 0.0
        return count / self.n_trials

    @property
    def p_s(self) -> float:
        return self._probability(self.n_s)

    @property
    def p_i(self) -> float:
        return self._probability(self.n_i)

    @property
    def p_si(self) -> float:
        return self._probability(self.n_si)


def _clicked_trials(
    events: EventStream, channel: Channel, gate: Optional[GateConfig]
) -> npt.NDArray[np.int64]:
    selected = events.channel == channel
    if gate is not None:
        selected &= gate.contains(events.t_ns)
    return np.unique(events.trial[selected])


def summarize(
    events: EventStream, gate_s: GateConfig, gate_i: GateConfig
) -> CountSummary:
    """Click counts: at most one per channel per trial."""
    signal = _clicked_trials(events, Channel.SIGNAL, gate_s)
    idler = _clicked_trials(events, Channel.IDLER, gate_i)
    return CountSummary(
        n_trials=events.n_trials,
        n_s=int(signal.size),
        n_i=int(idler.size),
        n_si=int(np.intersect1d(signal, idler, assume_unique=True).size),
    )


@dataclasses.dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    sigma: float

    @classmethod
    def from_ufloat(cls, estimate) -> "CorrelationEstimate":
        return cls(value=float(estimate.nominal_value), sigma=float(estimate.std_dev))

    def as_ufloat(self):
        return ufloat(self.value, self.sigma)

    def __str__(self) -> str:
        return f"{self.value:.4g} ± {self.sigma:.2g}"


def _poisson(count: int):
    return ufloat(count, math.sqrt(count))


def _normalized_coincidence(
    n_trials: int, n_a: int, n_b: int, n_ab: int
) -> CorrelationEstimate:
    if n_a == 0 or n_b == 0:
        raise EstimateError(
            f"Correlation undefined without clicks (N_a={n_a}, N_b={n_b})."
        )
    estimate = _poisson(n_ab) * n_trials / (_poisson(n_a) * _poisson(n_b))
    return CorrelationEstimate.from_ufloat(estimate)


def g2_cross(summary: CountSummary) -> CorrelationEstimate:
    """p_SI / (p_S p_I) with Poissonian errors on the three counts."""
    return _normalized_coincidence(
        summary.n_trials, summary.n_s, summary.n_i, summary.n_si
    )


def g2_auto(
    events: EventStream,
    channel: Channel,
    splitter_seed: int,
    gate: Optional[GateConfig] = None,
) -> CorrelationEstimate:
    """Non-heralded autocorrelation behind a simulated 50:50 beam splitter."""
    selected = events.channel == channel
    if gate is not None:
        selected &= gate.contains(events.t_ns)
    trials = events.trial[selected]
    if trials.size == 0:
        raise EstimateError(f"No {channel.label} detections to split.")

    routed = np.random.default_rng(splitter_seed).random(trials.size) < 0.5
    port_a = np.unique(trials[routed])
    port_b = np.unique(trials[~routed])
    return _normalized_coincidence(
        events.n_trials,
        int(port_a.size),
        int(port_b.size),
        int(np.intersect1d(port_a, port_b, assume_unique=True).size),
    )


@dataclasses.dataclass(frozen=True)
class CauchySchwarzResult:
    violated: bool
    margin: float
    sigma: float

    @property
    def sigma_count(self) -> float:
        if self.sigma == 0:
            return math.copysign(math.inf, self.margin) if self.margin else 0.0
        return self.margin / self.sigma


def cs_test(
    g_si: CorrelationEstimate, g_ss: CorrelationEstimate, g_ii: CorrelationEstimate
) -> CauchySchwarzResult:
    """Margin of (g_SI)^2 over g_SS g_II, with first-order error propagation."""
    margin = g_si.as_ufloat() ** 2 - g_ss.as_ufloat() * g_ii.as_ufloat()
    return CauchySchwarzResult(
        violated=margin.nominal_value > 0,
        margin=float(margin.nominal_value),
        sigma=float(margin.std_dev),
    )


def cs_bootstrap(
    g_si: CorrelationEstimate,
    g_ss: CorrelationEstimate,
    g_ii: CorrelationEstimate,
    n: int = 100_000,
    seed: int = 0,
) -> float:
    """Sigma count of the Cauchy-Schwarz margin from Gaussian resampling."""
    if n < 2:
        raise ValueError(f"Need at least two bootstrap samples, got {n}.")
    rng = np.random.default_rng(seed)
    samples = [
        rng.normal(estimate.value, estimate.sigma, n) for estimate in (g_si, g_ss, g_ii)
    ]
    margins = samples[0] ** 2 - samples[1] * samples[2]
    spread = margins.std(ddof=1)
    if spread == 0:
        raise EstimateError("Bootstrap margins have no spread.")
    return float(margins.mean() / spread)


def heralding_efficiency(summary: CountSummary, herald: Channel) -> float:
    """p_SI over the herald's click probability."""
    count = summary.n_s if herald is Channel.SIGNAL else summary.n_i
    if count == 0:
        raise EstimateError(f"No {herald.label} clicks to herald with.")
    return summary.n_si / count


@dataclasses.dataclass(frozen=True)
class DriveEnergyMap:
    """Coupling pulse energy to pair number, noise and Rabi frequency."""

    kappa_per_pj: float
    noise_s_per_pj: float = 0.0
    noise_i_per_pj: float = 0.0
    omega_ref: float = _dynamics.ghz(2.0)
    energy_ref: float = 95.0

    def __post_init__(self) -> None:
        _require_non_negative(
            kappa_per_pj=self.kappa_per_pj,
            noise_s_per_pj=self.noise_s_per_pj,
            noise_i_per_pj=self.noise_i_per_pj,
            omega_ref=self.omega_ref,
        )
        if not self.energy_ref > 0:
            raise ValueError(f"energy_ref must be positive, got {self.energy_ref}.")

    def mu(self, energy: float) -> float:
        return self.kappa_per_pj * energy

    def omega(self, energy: float) -> float:
        return self.omega_ref * math.sqrt(energy / self.energy_ref)

    def model(self, template: SourceModel, energy: float) -> SourceModel:
        _require_non_negative(energy=energy)
        return dataclasses.replace(
            template,
            mu=self.mu(energy),
            noise_s=min(1.0, self.noise_s_per_pj * energy),
            noise_i=min(1.0, self.noise_i_per_pj * energy),
        )


@dataclasses.dataclass(frozen=True)
class TradeoffRow:
    energy_pj: float
    mu: float
    omega: float
    excitation: float
    summary: CountSummary
    g2: Optional[CorrelationEstimate]
    heralding_s: Optional[float]
    heralding_i: Optional[float]


def _optional(estimate: Callable[..., T]) -> Callable[..., Optional[T]]:
    def _call(*args: Any) -> Optional[T]:
        try:
            return estimate(*args)
        except EstimateError as error:
            logging.warning(f"{estimate.__name__}: {error}")
            return None

    return _call


def tradeoff_sweep(
    energies: Sequence[float],
    mapping: DriveEnergyMap,
    template: SourceModel,
    n_trials: int,
    seed: int,
    gate_s: GateConfig,
    gate_i: GateConfig,
) -> List[TradeoffRow]:
    """Cross-correlation against excitation probability over pulse energies.

    Excitation is the detected coincidence probability divided by the product
    of both detection efficiencies.
    """
    if not energies:
        raise EstimateError("Tradeoff sweep needs at least one energy.")
    efficiency = template.eta_s * template.eta_i
    if efficiency == 0:
        raise EstimateError("Excitation is undefined with zero detection efficiency.")

    rows = []
    for index, energy in enumerate(energies):
        model = mapping.model(template, energy)
        events = simulate_trials(model, n_trials, seed, stream=index)
        summary = summarize(events, gate_s, gate_i)
        row = TradeoffRow(
            energy_pj=float(energy),
            mu=model.mu,
            omega=mapping.omega(energy),
            excitation=summary.p_si / efficiency,
            summary=summary,
            g2=_optional(g2_cross)(summary),
            heralding_s=_optional(heralding_efficiency)(summary, Channel.SIGNAL),
            heralding_i=_optional(heralding_efficiency)(summary, Channel.IDLER),
        )
        logging.debug(f"{energy} pJ: excitation {row.excitation:.4%}, g2 {row.g2}")
        rows.append(row)
    return rows


@dataclasses.dataclass(frozen=True)
class GateScanPoint:
    delay: float
    summary: CountSummary
    g2: Optional[CorrelationEstimate]


GATE_NAMES = ("gate1", "gate2")


def gate_delay_scan(
    events: EventStream,
    delays: Sequence[float],
    gate_width: float = 1.0,
    scanned: str = "gate2",
) -> List[GateScanPoint]:
    """g2_SI while one gate is held at 0 ns and the other is delayed.

    Gate 1 selects signal clicks and gate 2 idler clicks.
    """
    if scanned not in GATE_NAMES:
        raise ValueError(f"Scanned gate must be one of {GATE_NAMES}, got {scanned!r}.")
    if not delays:
        raise EstimateError("Gate scan needs at least one delay.")

    fixed = GateConfig(width=gate_width)
    points = []
    for delay in delays:
        moved = GateConfig(width=gate_width, delay=delay)
        gate_s, gate_i = (fixed, moved) if scanned == "gate2" else (moved, fixed)
        summary = summarize(events, gate_s, gate_i)
        try:
            g2: Optional[CorrelationEstimate] = g2_cross(summary)
        except EstimateError as error:
            logging.warning(f"Gate delay {delay} ns: {error}")
            g2 = None
        points.append(GateScanPoint(delay=float(delay), summary=summary, g2=g2))
    return points
