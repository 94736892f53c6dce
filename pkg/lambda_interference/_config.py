# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""JSON run configuration.

Files use laboratory units (GHz, MHz, ns, pJ); everything handed to the
numeric modules is converted to rad/ns here, once.
"""

import copy
import dataclasses
import hashlib
import importlib.resources
import json
import logging
import pathlib
from typing import Any, Dict, Mapping, Optional, Tuple, Type, TypeVar

import numpy as np
import numpy.typing as npt

from . import _counting, _dynamics, _emission, _filter
from ._exceptions import ConfigError

BUNDLED_SCENARIOS = ("fig2", "fig3", "fig4", "fig5", "fig6")

_Section = TypeVar("_Section")


@dataclasses.dataclass(frozen=True)
class SchemeSection:
    splitting_ghz: float = _dynamics.CESIUM_SPLITTING_GHZ
    delta23_ghz: float = 4.0
    gauge: float = 0.5


@dataclasses.dataclass(frozen=True)
class DriveSection:
    omega12_ghz: float = 2.0
    omega23_ghz: float = 2.0
    pulse_duration_ns: float = 2.0
    d12: float = 1.0
    d32: float = 1.0


@dataclasses.dataclass(frozen=True)
class SweepSection:
    start_ghz: float = 1.0
    stop_ghz: float = 9.0
    step_ghz: float = 0.01


@dataclasses.dataclass(frozen=True)
class StackSection:
    cavities: int = 4
    total_fwhm_mhz: float = 380.0
    total_peak: float = 0.7
    fsr_ghz: float = 15.0


@dataclasses.dataclass(frozen=True)
class FilterSection:
    signal: StackSection = dataclasses.field(default_factory=StackSection)
    idler: StackSection = dataclasses.field(default_factory=StackSection)
    laser_tracking: bool = True
    reference_delta23_ghz: float = 4.0
    wiener_epsilon: float = _filter.DEFAULT_WIENER_EPSILON
    span_ghz: float = 20.0
    points: int = 2001


@dataclasses.dataclass(frozen=True)
class RecoverSection:
    source_fwhm_mhz: float = 590.0
    noise: float = 0.0
    span_ghz: float = 20.0
    points: int = 2001
    cavities: int = 2
    total_fwhm_mhz: float = 380.0
    total_peak: float = 0.7


@dataclasses.dataclass(frozen=True)
class SourceSection:
    mu: float = 0.118
    eta_s: float = 0.055
    eta_i: float = 0.055
    noise_s: float = 0.0
    noise_i: float = 0.0
    purity: float = 1.0
    cascade_lag_ns: float = 0.0
    jitter_ns: float = 0.0
    schmidt_number: float = 1.0
    emission_width_ns: float = 2.0
    record_window_ns: float = 20.0
    leakage: float = 0.0


@dataclasses.dataclass(frozen=True)
class GateSection:
    width_ns: float = 9.0
    delay_ns: float = 0.0


@dataclasses.dataclass(frozen=True)
class GatesSection:
    signal: GateSection = dataclasses.field(default_factory=GateSection)
    idler: GateSection = dataclasses.field(default_factory=GateSection)


@dataclasses.dataclass(frozen=True)
class CountingSection:
    trials: int = 1_000_000
    energies_pj: Tuple[float, ...] = (42.0, 95.0, 160.0, 320.0, 640.0)
    kappa_per_pj: float = 1.24e-3
    noise_s_per_pj: float = 0.0
    noise_i_per_pj: float = 1.705e-5
    omega_ref_ghz: float = 2.0
    energy_ref_pj: float = 95.0
    scan_gate_width_ns: float = 1.0
    scanned: str = "gate2"
    delays_ns: Tuple[float, ...] = (-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0)


@dataclasses.dataclass(frozen=True)
class TimeGridSection:
    points: int = 201


@dataclasses.dataclass(frozen=True)
class RunConfig:
    scenario: str = "custom"
    seed: int = 0
    output_dir: str = "."
    scheme: SchemeSection = dataclasses.field(default_factory=SchemeSection)
    drive: DriveSection = dataclasses.field(default_factory=DriveSection)
    collection: Tuple[float, ...] = (1.0,) * 7
    sweep: SweepSection = dataclasses.field(default_factory=SweepSection)
    filter: FilterSection = dataclasses.field(default_factory=FilterSection)
    recover: RecoverSection = dataclasses.field(default_factory=RecoverSection)
    source: SourceSection = dataclasses.field(default_factory=SourceSection)
    gates: GatesSection = dataclasses.field(default_factory=GatesSection)
    counting: CountingSection = dataclasses.field(default_factory=CountingSection)
    time_grid: TimeGridSection = dataclasses.field(default_factory=TimeGridSection)
    digest: str = dataclasses.field(default="", compare=False)

    def level_scheme(self) -> _dynamics.LevelScheme:
        return _dynamics.LevelScheme(
            splitting_31=_dynamics.ghz(self.scheme.splitting_ghz),
            delta23=_dynamics.ghz(self.scheme.delta23_ghz),
            gauge=self.scheme.gauge,
        )

    def drive_params(self) -> _dynamics.DriveParams:
        return _dynamics.DriveParams(
            omega12=_dynamics.ghz(self.drive.omega12_ghz),
            omega23=_dynamics.ghz(self.drive.omega23_ghz),
            pulse_duration=self.drive.pulse_duration_ns,
            d12=self.drive.d12,
            d32=self.drive.d32,
        )

    def collection_factors(self) -> _emission.CollectionFactors:
        return _emission.CollectionFactors(tuple(self.collection))

    def detuning_grid(self) -> npt.NDArray[np.float64]:
        return _emission.detuning_grid(
            _dynamics.ghz(self.sweep.start_ghz),
            _dynamics.ghz(self.sweep.stop_ghz),
            _dynamics.ghz(self.sweep.step_ghz),
        )

    @staticmethod
    def _stack(section: StackSection) -> _filter.FilterStack:
        return _filter.calibrate_stack(
            section.cavities,
            _dynamics.ghz(section.total_fwhm_mhz / 1e3),
            section.total_peak,
            fsr=_dynamics.ghz(section.fsr_ghz),
        )

    def signal_stack(self) -> _filter.FilterStack:
        return self._stack(self.filter.signal)

    def idler_stack(self) -> _filter.FilterStack:
        return self._stack(self.filter.idler)

    def recovery_stack(self) -> _filter.FilterStack:
        return _filter.calibrate_stack(
            self.recover.cavities,
            _dynamics.ghz(self.recover.total_fwhm_mhz / 1e3),
            self.recover.total_peak,
        )

    def source_model(self) -> _counting.SourceModel:
        source = self.source
        return _counting.SourceModel(
            mu=source.mu,
            eta_s=source.eta_s,
            eta_i=source.eta_i,
            noise_s=source.noise_s,
            noise_i=source.noise_i,
            purity=source.purity,
            cascade_lag=source.cascade_lag_ns,
            jitter=source.jitter_ns,
            schmidt_number=source.schmidt_number,
            emission_width=source.emission_width_ns,
            record_window=source.record_window_ns,
            leakage=source.leakage,
        )

    def signal_gate(self) -> _counting.GateConfig:
        gate = self.gates.signal
        return _counting.GateConfig(gate.width_ns, gate.delay_ns)

    def idler_gate(self) -> _counting.GateConfig:
        gate = self.gates.idler
        return _counting.GateConfig(gate.width_ns, gate.delay_ns)

    def energy_map(self) -> _counting.DriveEnergyMap:
        return _counting.DriveEnergyMap(
            kappa_per_pj=self.counting.kappa_per_pj,
            noise_s_per_pj=self.counting.noise_s_per_pj,
            noise_i_per_pj=self.counting.noise_i_per_pj,
            omega_ref=_dynamics.ghz(self.counting.omega_ref_ghz),
            energy_ref=self.counting.energy_ref_pj,
        )


def _convert(value: Any, default: Any, key: str) -> Any:
    if dataclasses.is_dataclass(default):
        return _build_section(type(default), value, key)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true or false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigError(key, f"expected a list, got {value!r}")
        return tuple(
            _convert(item, 0.0, f"{key}[{index}]") for index, item in enumerate(value)
        )
    raise AssertionError(f"Unsupported configuration default for {key}.")


def _build_section(cls: Type[_Section], raw: Any, path: str) -> _Section:
    if not isinstance(raw, Mapping):
        raise ConfigError(path or "<root>", f"expected an object, got {raw!r}")

    fields = {
        field.name: field
        for field in dataclasses.fields(cls)  # type: ignore[arg-type]
        if field.name != "digest"
    }
    for key in raw:
        if key not in fields:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")

    values: Dict[str, Any] = {}
    for name, field in fields.items():
        if name not in raw:
            continue
        if field.default_factory is not dataclasses.MISSING:  # type: ignore[misc]
            default = field.default_factory()  # type: ignore[misc]
        else:
            default = field.default
        values[name] = _convert(raw[name], default, f"{path}.{name}" if path else name)
    return cls(**values)


def _validate(config: RunConfig) -> None:
    checks = (
        ("scheme", config.level_scheme),
        ("drive", config.drive_params),
        ("collection", config.collection_factors),
        ("sweep", config.detuning_grid),
        ("filter.signal", config.signal_stack),
        ("filter.idler", config.idler_stack),
        ("recover", config.recovery_stack),
        ("source", config.source_model),
        ("gates.signal", config.signal_gate),
        ("gates.idler", config.idler_gate),
        ("counting", config.energy_map),
    )
    for key, build in checks:
        try:
            build()
        except ValueError as error:
            raise ConfigError(key, str(error)) from error

    if config.seed < 0:
        raise ConfigError("seed", "must be non-negative")
    if config.counting.trials < 1:
        raise ConfigError("counting.trials", "must be at least 1")
    if config.counting.scanned not in _counting.GATE_NAMES:
        raise ConfigError(
            "counting.scanned", f"expected one of {_counting.GATE_NAMES}"
        )
    if config.filter.wiener_epsilon <= 0:
        raise ConfigError("filter.wiener_epsilon", "must be positive")
    if config.time_grid.points < 2:
        raise ConfigError("time_grid.points", "must be at least 2")
    for key, points in (
        ("filter.points", config.filter.points),
        ("recover.points", config.recover.points),
    ):
        if points < 3 or points % 2 == 0:
            raise ConfigError(key, "must be an odd number of at least 3")
    if not 0 <= config.recover.noise < 1:
        raise ConfigError("recover.noise", "must be within [0, 1)")
    for key, value in (
        ("filter.span_ghz", config.filter.span_ghz),
        ("filter.reference_delta23_ghz", config.filter.reference_delta23_ghz),
        ("recover.source_fwhm_mhz", config.recover.source_fwhm_mhz),
        ("counting.scan_gate_width_ns", config.counting.scan_gate_width_ns),
    ):
        if value <= 0:
            raise ConfigError(key, "must be positive")
    if not config.counting.energies_pj:
        raise ConfigError("counting.energies_pj", "must not be empty")
    if any(energy < 0 for energy in config.counting.energies_pj):
        raise ConfigError("counting.energies_pj", "energies must be non-negative")
    if not config.counting.delays_ns:
        raise ConfigError("counting.delays_ns", "must not be empty")


def config_digest(raw: Mapping[str, Any]) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def parse_config(raw: Mapping[str, Any]) -> RunConfig:
    config = _build_section(RunConfig, raw, "")
    _validate(config)
    return dataclasses.replace(config, digest=config_digest(raw))


def apply_overrides(
    raw: Mapping[str, Any],
    *,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    grid_step_ghz: Optional[float] = None,
    trials: Optional[int] = None,
) -> Dict[str, Any]:
    """Copy of the raw configuration with command line values applied."""
    result = copy.deepcopy(dict(raw))
    if seed is not None:
        result["seed"] = seed
    if output_dir is not None:
        result["output_dir"] = output_dir
    if grid_step_ghz is not None:
        result.setdefault("sweep", {})["step_ghz"] = grid_step_ghz
    if trials is not None:
        result.setdefault("counting", {})["trials"] = trials
    return result


def _read_raw(source: str) -> Dict[str, Any]:
    path = pathlib.Path(source)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    elif source in BUNDLED_SCENARIOS:
        logging.debug(f"Using bundled configuration {source}")
        data = importlib.resources.files("lambda_interference") / "data"
        text = (data / f"{source}.json").read_text(encoding="utf-8")
    else:
        raise ConfigError("<file>", f"no configuration at {source!r}")

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError("<file>", f"invalid JSON in {source}: {error}") from error
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    return raw


def load_config(source: str, **overrides: Any) -> RunConfig:
    """Load a configuration file, or a bundled scenario by name."""
    return parse_config(apply_overrides(_read_raw(source), **overrides))
