# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""Seven-component emission of the driven Lambda system."""

import dataclasses
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from . import _dynamics
from ._exceptions import DegenerateLabelingError

COMPONENTS = tuple(range(1, 8))

# Coupling detunings (GHz) at which the seven components are reported in the
# reference measurement.
REFERENCE_DETUNINGS_GHZ = (1.62, 4.00, 6.40, 8.00)
_REFERENCE_DETUNINGS = tuple(_dynamics.ghz(value) for value in REFERENCE_DETUNINGS_GHZ)

SIGNAL_COMPONENT = 6
IDLER_COMPONENT = 2


@dataclasses.dataclass(frozen=True)
class SpectralComponent:
    index: int
    offset: float
    amplitude: float

    @property
    def magnitude(self) -> float:
        return abs(self.amplitude)


@dataclasses.dataclass(frozen=True)
class CollectionFactors:
    """Phenomenological direction and polarization selection per component."""

    values: Tuple[float, ...] = (1.0,) * 7

    def __post_init__(self) -> None:
        if len(self.values) != 7:
            raise ValueError(
                f"Expected seven collection factors, got {len(self.values)}."
            )
        for index, value in zip(COMPONENTS, self.values):
            if not 0 <= value <= 1:
                raise ValueError(
                    f"Collection factor c{index} must be within [0, 1], got {value}."
                )

    def __getitem__(self, index: int) -> float:
        return self.values[index - 1]

    def as_array(self) -> npt.NDArray[np.float64]:
        return np.asarray(self.values, dtype=float)


def component_offsets(lambdas: Sequence[float]) -> npt.NDArray[np.float64]:
    l1, l2, l3 = lambdas
    return np.array([l2 - l1, l3 - l1, l2 - l3, 0.0, l3 - l2, l1 - l3, l1 - l2])


def component_amplitudes(
    G: npt.NDArray, d12: float = 1.0, d32: float = 1.0
) -> npt.NDArray:
    """Amplitudes D_1..D_7 of the dipole expectation value."""
    # Zero-based indices: G[0, 1] is G_12.
    g = np.asarray(G)

    def _pair(a: int, b: int) -> complex:
        return (d12 * g[0, a] + d32 * g[2, a]) * g[1, b]

    d4 = d12 * (g[0, 0] * g[1, 0] + g[0, 1] * g[1, 1] + g[0, 2] * g[1, 2]) + d32 * (
        g[2, 0] * g[1, 0] + g[2, 1] * g[1, 1] + g[2, 2] * g[1, 2]
    )
    return np.array(
        [
            _pair(0, 1),
            _pair(0, 2),
            _pair(2, 1),
            d4,
            _pair(1, 2),
            _pair(2, 0),
            _pair(1, 0),
        ]
    )


@dataclasses.dataclass(frozen=True)
class EmissionSet:
    components: Tuple[SpectralComponent, ...]
    normalization: float
    delta23: float
    omega12: float
    omega23: float
    gauge: float
    collection: CollectionFactors = CollectionFactors()

    @property
    def offsets(self) -> npt.NDArray[np.float64]:
        return np.array([component.offset for component in self.components])

    @property
    def amplitudes(self) -> npt.NDArray[np.float64]:
        return np.array([component.amplitude for component in self.components])

    def normalized_magnitudes(self) -> npt.NDArray[np.float64]:
        magnitudes = np.abs(self.amplitudes)
        if self.normalization == 0:
            return magnitudes
        return magnitudes / self.normalization

    def intensities(self) -> npt.NDArray[np.float64]:
        """Detected intensity per component, c_j |D_j|^2."""
        return self.collection.as_array() * np.abs(self.amplitudes) ** 2

    def normalized_intensities(self) -> npt.NDArray[np.float64]:
        intensities = self.intensities()
        peak = intensities.max()
        if peak == 0:
            return intensities
        return intensities / peak

    def component(self, index: int) -> SpectralComponent:
        return self.components[index - 1]


def emission_set(
    scheme: _dynamics.LevelScheme,
    drive: _dynamics.DriveParams,
    collection: CollectionFactors = CollectionFactors(),
) -> EmissionSet:
    basis = _dynamics.solve(scheme, drive)
    assert basis.G is not None
    offsets = component_offsets(basis.lambdas)
    amplitudes = np.real_if_close(component_amplitudes(basis.G, drive.d12, drive.d32))

    components = tuple(
        SpectralComponent(index=index, offset=float(offset), amplitude=float(amplitude))
        for index, offset, amplitude in zip(COMPONENTS, offsets, amplitudes)
    )
    return EmissionSet(
        components=components,
        normalization=float(np.abs(amplitudes).max()),
        delta23=scheme.delta23,
        omega12=drive.omega12,
        omega23=drive.omega23,
        gauge=scheme.gauge,
        collection=collection,
    )


@dataclasses.dataclass(frozen=True)
class SweepPoint:
    delta23: float
    emission: Optional[EmissionSet] = None
    error: Optional[str] = None


def _merge_points(
    values: npt.NDArray[np.float64], mandatory: Sequence[float]
) -> npt.NDArray[np.float64]:
    tolerance = 1e-9 * max(1.0, float(np.abs(values).max()))
    extra = [
        value
        for value in mandatory
        if values[0] - tolerance <= value <= values[-1] + tolerance
        and np.abs(values - value).min() > tolerance
    ]
    return np.sort(np.concatenate([values, extra]))


def detuning_grid(
    start: float,
    stop: float,
    step: float,
    mandatory: Sequence[float] = _REFERENCE_DETUNINGS,
) -> npt.NDArray[np.float64]:
    """Uniform coupling-detuning grid merged with the mandatory points in range."""
    if not (0 < start <= stop):
        raise ValueError(f"Invalid detuning range [{start}, {stop}].")
    if step <= 0:
        raise ValueError(f"Detuning step must be positive, got {step}.")

    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return _merge_points(start + step * np.arange(count), mandatory)


def detuning_sweep(
    grid: Sequence[float],
    template: _dynamics.LevelScheme,
    drive: _dynamics.DriveParams,
    collection: CollectionFactors = CollectionFactors(),
    mandatory: Sequence[float] = _REFERENCE_DETUNINGS,
) -> Sequence[SweepPoint]:
    values = np.asarray(grid, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("Detuning grid must be a non-empty sequence.")
    if np.any(values <= 0) or np.any(np.diff(values) <= 0):
        raise ValueError("Detuning grid must be positive and strictly increasing.")

    values = _merge_points(values, mandatory)

    points = []
    for delta23 in values:
        scheme = template.with_delta23(float(delta23))
        try:
            emission = emission_set(scheme, drive, collection)
        except DegenerateLabelingError as error:
            logging.warning(
                f"Skipping coupling detuning"
                f" {_dynamics.to_ghz(delta23):.4f} GHz: {error}"
            )
            points.append(SweepPoint(delta23=float(delta23), error=str(error)))
            continue

        logging.debug(
            f"delta23={_dynamics.to_ghz(delta23):.4f} GHz"
            f" |D|={emission.normalized_magnitudes()}"
        )
        points.append(SweepPoint(delta23=float(delta23), emission=emission))
    return points
