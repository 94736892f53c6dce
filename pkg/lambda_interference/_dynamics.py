# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0
"""Driven three-level Lambda system in the rotating-wave approximation.

Angular frequencies are in rad/ns and times in ns, with hbar set to 1.
"""

import dataclasses
import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from ._exceptions import DegenerateLabelingError

TWO_PI = 2 * math.pi

# Ground-state hyperfine splitting of 133Cs.
CESIUM_SPLITTING_GHZ = 9.19

# Two overlaps closer than this are treated as a tie when labeling.
_LABEL_TIE_TOLERANCE = 1e-9

Detunings = Tuple[float, float, float]


def ghz(value: float) -> float:
    """Convert a plain frequency in GHz into an angular frequency in rad/ns."""
    return TWO_PI * value


def to_ghz(value: float) -> float:
    return value / TWO_PI


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"Non-finite {name}: {value!r}.")


def resolve_detunings(
    delta23: float, splitting_31: float, gauge: float = 0.5
) -> Detunings:
    """Split the coupling detuning into (Delta1, Delta2, Delta3).

    Only the two sums Delta2+Delta3 and Delta1+Delta2 are fixed; the gauge picks
    one member of the remaining one-parameter family.
    """
    _require_finite(delta23=delta23, splitting_31=splitting_31, gauge=gauge)
    if delta23 <= 0:
        raise ValueError(f"Coupling detuning must be positive, got {delta23}.")
    if not 0 <= gauge <= 1:
        raise ValueError(f"Gauge must be within [0, 1], got {gauge}.")

    delta2 = gauge * delta23
    delta3 = delta23 - delta2
    delta1 = delta23 + splitting_31 - delta2
    return delta1, delta2, delta3


@dataclasses.dataclass(frozen=True)
class LevelScheme:
    splitting_31: float
    delta23: float
    gauge: float = 0.5

    def __post_init__(self) -> None:
        # Rejects invalid detunings at construction.
        resolve_detunings(self.delta23, self.splitting_31, self.gauge)

    @classmethod
    def cesium(cls, delta23: float, gauge: float = 0.5) -> "LevelScheme":
        return cls(ghz(CESIUM_SPLITTING_GHZ), delta23, gauge)

    @property
    def detunings(self) -> Detunings:
        return resolve_detunings(self.delta23, self.splitting_31, self.gauge)

    def with_delta23(self, delta23: float) -> "LevelScheme":
        return dataclasses.replace(self, delta23=delta23)


@dataclasses.dataclass(frozen=True)
class DriveParams:
    omega12: float
    omega23: float
    pulse_duration: float = 2.0
    d12: float = 1.0
    d32: float = 1.0

    def __post_init__(self) -> None:
        _require_finite(
            omega12=self.omega12,
            omega23=self.omega23,
            d12=self.d12,
            d32=self.d32,
        )
        if self.omega12 < 0 or self.omega23 < 0:
            raise ValueError("Rabi frequencies must be non-negative.")
        if not (math.isfinite(self.pulse_duration) and self.pulse_duration > 0):
            raise ValueError(
                f"Pulse duration must be positive, got {self.pulse_duration}."
            )


InteractionMatrix = npt.NDArray[np.float64]


def build_interaction_matrix(
    delta1: float, delta2: float, delta3: float, omega12: float, omega23: float
) -> InteractionMatrix:
    _require_finite(
        delta1=delta1, delta2=delta2, delta3=delta3, omega12=omega12, omega23=omega23
    )
    return np.array(
        [
            [-delta1, omega12 / 2, 0.0],
            [omega12 / 2, delta2, omega23 / 2],
            [0.0, omega23 / 2, -delta3],
        ]
    )


def scheme_matrix(scheme: LevelScheme, drive: DriveParams) -> InteractionMatrix:
    return build_interaction_matrix(*scheme.detunings, drive.omega12, drive.omega23)


@dataclasses.dataclass(frozen=True)
class DressedBasis:
    """Labeled eigenpairs of the interaction matrix.

    Column n of `eigvecs` is (f_n, g_n, h_n), the dressed state connected to
    bare state n. `G` holds the expansion coefficients once an initial state
    has been projected on the basis.
    """

    lambdas: npt.NDArray[np.float64]
    eigvecs: npt.NDArray[np.float64]
    G: Optional[npt.NDArray] = None


def _label_eigenvectors(eigvecs: npt.NDArray[np.float64]) -> Sequence[int]:
    """Map each eigenvector (ascending eigenvalue order) onto a bare state."""
    overlaps = np.abs(eigvecs)
    labels = []
    taken = set()
    for column in range(overlaps.shape[1]):
        best = overlaps[:, column].max()
        candidates = [
            state
            for state in range(overlaps.shape[0])
            if overlaps[state, column] >= best - _LABEL_TIE_TOLERANCE
        ]
        free = [state for state in candidates if state not in taken]
        if not free:
            raise DegenerateLabelingError(
                f"Dressed state {column} overlaps most with bare state(s)"
                f" {[state + 1 for state in candidates]}, already labeled."
            )
        labels.append(free[0])
        taken.add(free[0])
    return labels


def dressed_basis(matrix: InteractionMatrix) -> DressedBasis:
    matrix = np.asarray(matrix, dtype=float)
    scale = max(1.0, float(np.abs(matrix).max()))
    if not np.allclose(matrix, matrix.T, rtol=0, atol=1e-12 * scale):
        raise ValueError("Interaction matrix is not symmetric.")

    values, vectors = np.linalg.eigh(matrix)
    labels = _label_eigenvectors(vectors)

    lambdas = np.empty(3)
    eigvecs = np.empty((3, 3))
    for column, state in enumerate(labels):
        vector = vectors[:, column]
        if vector[state] < 0:
            vector = -vector
        lambdas[state] = values[column]
        eigvecs[:, state] = vector

    logging.debug(f"Dressed eigenvalues (rad/ns): {lambdas}")
    return DressedBasis(lambdas=lambdas, eigvecs=eigvecs)


INITIAL_STATE = (1.0, 0.0, 0.0)


def expansion_coefficients(
    basis: DressedBasis, initial: Sequence[complex] = INITIAL_STATE
) -> npt.NDArray:
    """Expansion matrix G_mn = q_n (v_n)_m of the initial amplitudes."""
    state = np.asarray(initial)
    if state.shape != (3,):
        raise ValueError(f"Initial state must have three amplitudes, got {initial!r}.")
    if not np.isclose(np.vdot(state, state).real, 1.0, atol=1e-9):
        raise ValueError(f"Initial state {initial!r} is not normalized.")

    q = np.linalg.solve(basis.eigvecs, state)
    # Orthonormal eigenvectors cannot produce a singular system.
    assert np.allclose(basis.eigvecs @ q, state, atol=1e-10)
    return basis.eigvecs * q[np.newaxis, :]


def solve(
    scheme: LevelScheme,
    drive: DriveParams,
    initial: Sequence[complex] = INITIAL_STATE,
) -> DressedBasis:
    basis = dressed_basis(scheme_matrix(scheme, drive))
    return dataclasses.replace(basis, G=expansion_coefficients(basis, initial))


def amplitudes(basis: DressedBasis, t: Union[float, npt.ArrayLike]) -> npt.NDArray:
    """a_n(t) = sum_m G_nm exp(-i lambda_m t); one row per time."""
    if basis.G is None:
        raise ValueError("Dressed basis has no expansion coefficients.")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    phases = np.exp(-1j * np.outer(times, basis.lambdas))
    return phases @ basis.G.T


def populations(
    basis: DressedBasis,
    t: Union[float, npt.ArrayLike],
    pulse_duration: Optional[float] = None,
) -> npt.NDArray[np.float64]:
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0) or (
        pulse_duration is not None and np.any(times > pulse_duration)
    ):
        raise ValueError("Populations are only defined within the square pulse.")
    result = np.abs(amplitudes(basis, times)) ** 2
    if np.ndim(t) == 0:
        return result[0]
    return result


@dataclasses.dataclass(frozen=True)
class PopulationTrace:
    times: npt.NDArray[np.float64]
    populations: npt.NDArray[np.float64]


def population_trace(
    basis: DressedBasis, pulse_duration: float, points: int = 201
) -> PopulationTrace:
    times = np.linspace(0.0, pulse_duration, points)
    return PopulationTrace(
        times=times, populations=populations(basis, times, pulse_duration)
    )


def ac_stark_shifts(
    basis: DressedBasis, detunings: Detunings
) -> npt.NDArray[np.float64]:
    """s_n = (-1)^n lambda_n - Delta_n for n = 1, 2, 3."""
    signs = np.array([-1.0, 1.0, -1.0])
    return signs * basis.lambdas - np.asarray(detunings)
