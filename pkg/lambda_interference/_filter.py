# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""Cascaded-cavity filtering, detuning-sweep convolution and spectrum recovery.

Frequencies are angular (rad/ns) throughout, like the rest of the package. A
window placed on a frequency grid always has its zero lag on the middle sample.
"""

import dataclasses
import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
import scipy.fft
import scipy.optimize
import scipy.signal

from . import _dynamics
from ._emission import IDLER_COMPONENT, SIGNAL_COMPONENT, EmissionSet, SweepPoint
from ._exceptions import (
    ConvergenceError,
    EstimateError,
    GridMismatchError,
    SpectrumShapeError,
)

_BISECTION_MAX_ITERATIONS = 200
_GRID_TOLERANCE = 1e-6

DEFAULT_WIENER_EPSILON = 1e-3


@dataclasses.dataclass(frozen=True)
class CavitySpec:
    center: float
    fwhm: float
    fsr: float = 0.0
    peak: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.fwhm) and self.fwhm > 0):
            raise ValueError(f"Cavity FWHM must be positive, got {self.fwhm}.")
        if not (0 < self.peak <= 1):
            raise ValueError(f"Cavity peak must be within (0, 1], got {self.peak}.")
        if not (math.isfinite(self.fsr) and self.fsr >= 0):
            raise ValueError(f"Cavity FSR must be non-negative, got {self.fsr}.")
        if not math.isfinite(self.center):
            raise ValueError(f"Non-finite cavity center: {self.center!r}.")

    def transmission(self, nu: npt.ArrayLike) -> npt.NDArray[np.float64]:
        detuning = np.asarray(nu, dtype=float) - self.center
        if self.fsr > 0:
            detuning = np.mod(detuning + self.fsr / 2, self.fsr) - self.fsr / 2
        return self.peak / (1 + (2 * detuning / self.fwhm) ** 2)


@dataclasses.dataclass(frozen=True)
class FilterStack:
    cavities: Tuple[CavitySpec, ...]

    def __post_init__(self) -> None:
        if not self.cavities:
            raise ValueError("A filter stack needs at least one cavity.")

    @property
    def center(self) -> float:
        return self.cavities[0].center

    @property
    def peak(self) -> float:
        return float(np.prod([cavity.peak for cavity in self.cavities]))

    def recentered(self, center: float) -> "FilterStack":
        shift = center - self.center
        return FilterStack(
            tuple(
                dataclasses.replace(cavity, center=cavity.center + shift)
                for cavity in self.cavities
            )
        )


def transmission(stack: FilterStack, nu: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Product of the cavity lines; a scalar input yields a 0-d array."""
    result = np.ones_like(np.asarray(nu, dtype=float))
    for cavity in stack.cavities:
        result = result * cavity.transmission(nu)
    return result


def calibrate_stack(
    n_cavities: int,
    total_fwhm: float,
    total_peak: float,
    fsr: float = 0.0,
    center: float = 0.0,
) -> FilterStack:
    """Identical cavities whose product has the requested FWHM and peak."""
    if n_cavities < 1:
        raise ValueError(f"Need at least one cavity, got {n_cavities}.")
    if not (math.isfinite(total_fwhm) and total_fwhm > 0):
        raise ValueError(f"Total FWHM must be positive, got {total_fwhm}.")
    if not (0 < total_peak <= 1):
        raise ValueError(f"Total peak must be within (0, 1], got {total_peak}.")
    if fsr and fsr <= total_fwhm:
        raise ValueError(f"FSR {fsr} does not leave room for a {total_fwhm} window.")

    def _excess(width: float) -> float:
        cavity = CavitySpec(center=0.0, fwhm=width, fsr=fsr)
        return float(cavity.transmission(total_fwhm / 2)) ** n_cavities - 0.5

    try:
        width = scipy.optimize.bisect(
            _excess,
            0.5 * total_fwhm,
            total_fwhm * (2 + 2 * math.sqrt(n_cavities)),
            xtol=1e-12 * total_fwhm,
            maxiter=_BISECTION_MAX_ITERATIONS,
        )
    except (RuntimeError, ValueError) as error:
        raise ConvergenceError(
            f"Could not calibrate {n_cavities} cavities to {total_fwhm} rad/ns: {error}"
        ) from error

    logging.debug(
        f"Calibrated {n_cavities} cavities: per-cavity FWHM"
        f" {_dynamics.to_ghz(width) * 1e3:.2f} MHz"
    )
    peak = total_peak ** (1 / n_cavities)
    cavity = CavitySpec(center=center, fwhm=float(width), fsr=fsr, peak=peak)
    return FilterStack((cavity,) * n_cavities)


@dataclasses.dataclass(frozen=True)
class SpectrumGrid:
    frequencies: npt.NDArray[np.float64]
    values: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        frequencies = np.asarray(self.frequencies, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if frequencies.ndim != 1 or frequencies.size < 3:
            raise ValueError("A spectrum grid needs at least three frequencies.")
        if values.shape != frequencies.shape:
            raise ValueError(
                f"Spectrum values {values.shape} do not match grid"
                f" {frequencies.shape}."
            )
        if not (np.all(np.isfinite(frequencies)) and np.all(np.isfinite(values))):
            raise ValueError("Spectrum grid contains non-finite samples.")
        steps = np.diff(frequencies)
        if steps[0] <= 0 or not np.allclose(
            steps, steps[0], rtol=_GRID_TOLERANCE, atol=0
        ):
            raise ValueError("Spectrum grid must be uniform and increasing.")
        object.__setattr__(self, "frequencies", frequencies)
        object.__setattr__(self, "values", values)

    @property
    def step(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def same_grid(self, other: "SpectrumGrid") -> bool:
        return self.frequencies.shape == other.frequencies.shape and bool(
            np.allclose(
                self.frequencies,
                other.frequencies,
                rtol=0,
                atol=_GRID_TOLERANCE * abs(self.step),
            )
        )


def centered_grid(span: float, points: int) -> npt.NDArray[np.float64]:
    """Symmetric grid over [-span/2, span/2] whose middle sample is zero."""
    if points < 3 or points % 2 == 0:
        raise ValueError(f"Grid needs an odd number of points >= 3, got {points}.")
    if not span > 0:
        raise ValueError(f"Grid span must be positive, got {span}.")
    return np.linspace(-span / 2, span / 2, points)


def window_grid(stack: FilterStack, frequencies: npt.ArrayLike) -> SpectrumGrid:
    """Stack window sampled by lag, centered on the middle grid sample."""
    grid = np.asarray(frequencies, dtype=float)
    lags = grid - grid[grid.size // 2]
    return SpectrumGrid(grid, transmission(stack, stack.center + lags))


def _kernel_spectrum(window: SpectrumGrid) -> npt.NDArray[np.complex128]:
    total = window.values.sum()
    if not total > 0:
        raise SpectrumShapeError("Filter window has no transmission on this grid.")
    return scipy.fft.fft(scipy.fft.ifftshift(window.values / total))


def convolve_spectrum(spectrum: SpectrumGrid, stack: FilterStack) -> SpectrumGrid:
    """Counts recorded while the stack is scanned across the spectrum."""
    kernel = _kernel_spectrum(window_grid(stack, spectrum.frequencies))
    trace = scipy.fft.ifft(scipy.fft.fft(spectrum.values) * kernel).real
    return SpectrumGrid(spectrum.frequencies, trace)


def recover_spectrum(
    trace: SpectrumGrid,
    window: Union[FilterStack, SpectrumGrid],
    epsilon: float = DEFAULT_WIENER_EPSILON,
) -> SpectrumGrid:
    """Wiener-regularized deconvolution of a scan trace by the stack window."""
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise ValueError(f"Wiener epsilon must be positive, got {epsilon}.")
    if isinstance(window, FilterStack):
        window = window_grid(window, trace.frequencies)
    elif not trace.same_grid(window):
        raise GridMismatchError("Trace and filter window are on different grids.")

    kernel = _kernel_spectrum(window)
    power = np.abs(kernel) ** 2
    response = np.conj(kernel) / (power + epsilon * power.max())
    recovered = scipy.fft.ifft(scipy.fft.fft(trace.values) * response).real
    return SpectrumGrid(trace.frequencies, np.clip(recovered, 0, None))


def _crossing(
    frequencies: npt.NDArray[np.float64],
    values: npt.NDArray[np.float64],
    inside: int,
    outside: int,
    half: float,
) -> float:
    fraction = (values[inside] - half) / (values[inside] - values[outside])
    return float(
        frequencies[inside] + fraction * (frequencies[outside] - frequencies[inside])
    )


def fwhm(spectrum: SpectrumGrid) -> float:
    """Linearly interpolated full width at half of the global maximum."""
    values = spectrum.values
    peak_index = int(np.argmax(values))
    half = values[peak_index] / 2
    if not half > 0:
        raise SpectrumShapeError("Spectrum has no positive maximum.")

    below = np.flatnonzero(values < half)
    left = below[below < peak_index]
    right = below[below > peak_index]
    if left.size == 0 or right.size == 0:
        raise SpectrumShapeError("Spectrum never drops below half maximum.")
    left_out, right_out = int(left[-1]), int(right[0])

    if np.any(values[:left_out] >= half) or np.any(values[right_out + 1 :] >= half):
        raise SpectrumShapeError("Spectrum has more than one lobe above half maximum.")

    low = _crossing(spectrum.frequencies, values, left_out + 1, left_out, half)
    high = _crossing(spectrum.frequencies, values, right_out - 1, right_out, half)
    return high - low


PULSE_SHAPES = ("square", "gaussian")


def pulse_spectrum(
    duration: float,
    shape: str = "square",
    frequencies: Optional[npt.ArrayLike] = None,
) -> SpectrumGrid:
    """Power spectrum of a pulse envelope, normalized to unit peak.

    For the gaussian shape `duration` is the intensity FWHM of the pulse.
    """
    if not (math.isfinite(duration) and duration > 0):
        raise ValueError(f"Pulse duration must be positive, got {duration}.")
    if shape not in PULSE_SHAPES:
        raise ValueError(f"Unknown pulse shape {shape!r}; expected {PULSE_SHAPES}.")
    if frequencies is None:
        frequencies = centered_grid(_dynamics.ghz(16 / duration), 4001)
    grid = np.asarray(frequencies, dtype=float)
    cycles = grid / _dynamics.TWO_PI

    if shape == "square":
        values = np.sinc(cycles * duration) ** 2
    else:
        bandwidth = 2 * math.log(2) / (math.pi * duration)
        values = np.exp(-4 * math.log(2) * (cycles / bandwidth) ** 2)
    return SpectrumGrid(grid, values)


def spectral_efficiency(spectrum: SpectrumGrid, stack: FilterStack) -> float:
    """Fraction of the photon spectrum transmitted by the stack."""
    weight = spectrum.values.sum()
    if not weight > 0:
        raise SpectrumShapeError("Spectrum carries no power.")
    passed = spectrum.values * transmission(stack, spectrum.frequencies)
    return float(passed.sum() / weight)


@dataclasses.dataclass(frozen=True)
class ConvolutionTrace:
    delta23: npt.NDArray[np.float64]
    signal: npt.NDArray[np.float64]
    idler: npt.NDArray[np.float64]


def laser_offset(delta23: float, reference_delta23: float) -> float:
    """Shift of the emission frame when the coupling laser is tuned."""
    return -(delta23 - reference_delta23)


def tracking_stacks(
    reference: EmissionSet, signal_stack: FilterStack, idler_stack: FilterStack
) -> Tuple[FilterStack, FilterStack]:
    """Place the stacks on the signal and idler lines of the reference point."""
    return (
        signal_stack.recentered(reference.component(SIGNAL_COMPONENT).offset),
        idler_stack.recentered(reference.component(IDLER_COMPONENT).offset),
    )


def convolution_sweep(
    sweep: Sequence[SweepPoint],
    signal_stack: FilterStack,
    idler_stack: FilterStack,
    laser_tracking: bool = True,
    reference_delta23: float = _dynamics.ghz(4.0),
) -> ConvolutionTrace:
    """Filtered counts versus coupling detuning for both channels.

    The stacks sit still in the lab frame; each component lands at
    laser_offset + its dressed offset and contributes c_j |D_j|^2 times the
    stack transmission there.

    With a 15 GHz free spectral range the signal trace can carry lines from
    the neighbouring order: in the bundled fig3 scan the peak near 4 GHz is
    component 6 on its own line, while the tallest one near 7.1 GHz is
    component 2 one free spectral range away.
    """
    points = [point for point in sweep if point.emission is not None]
    skipped = len(sweep) - len(points)
    if skipped:
        logging.warning(f"Convolution sweep ignores {skipped} unlabeled point(s).")
    if not points:
        raise EstimateError("Convolution sweep has no usable detuning points.")

    delta23 = np.array([point.delta23 for point in points])
    signal = np.empty(len(points))
    idler = np.empty(len(points))
    for row, point in enumerate(points):
        emission = point.emission
        assert emission is not None
        origin = 0.0
        if laser_tracking:
            origin = laser_offset(point.delta23, reference_delta23)
        positions = origin + emission.offsets
        intensities = emission.intensities()
        signal[row] = float(np.sum(intensities * transmission(signal_stack, positions)))
        idler[row] = float(np.sum(intensities * transmission(idler_stack, positions)))
    return ConvolutionTrace(delta23=delta23, signal=signal, idler=idler)


def count_peaks(
    values: npt.ArrayLike, threshold: float = 0.05
) -> npt.NDArray[np.int64]:
    """Indices of interior local maxima above `threshold` of the global maximum."""
    trace = np.asarray(values, dtype=float)
    top = trace.max(initial=0.0)
    if top <= 0:
        return np.array([], dtype=np.int64)
    peaks, _ = scipy.signal.find_peaks(trace, height=threshold * top)
    return peaks.astype(np.int64)
