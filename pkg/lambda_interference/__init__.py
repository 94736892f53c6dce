# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0

from ._config import RunConfig, load_config, parse_config  # noqa: F401
from ._counting import (  # noqa: F401
    CauchySchwarzResult,
    Channel,
    CorrelationEstimate,
    CountSummary,
    DriveEnergyMap,
    EventStream,
    GateConfig,
    SourceModel,
    TrialRecord,
    cs_bootstrap,
    cs_test,
    g2_auto,
    g2_cross,
    gate_delay_scan,
    heralding_efficiency,
    simulate_trials,
    summarize,
    tradeoff_sweep,
)
from ._dynamics import (  # noqa: F401
    DressedBasis,
    DriveParams,
    LevelScheme,
    PopulationTrace,
    ac_stark_shifts,
    build_interaction_matrix,
    dressed_basis,
    expansion_coefficients,
    ghz,
    populations,
    resolve_detunings,
    solve,
    to_ghz,
)
from ._emission import (  # noqa: F401
    CollectionFactors,
    EmissionSet,
    SpectralComponent,
    component_amplitudes,
    component_offsets,
    detuning_grid,
    detuning_sweep,
    emission_set,
)
from ._exceptions import *  # noqa: F403,F401
from ._filter import (  # noqa: F401
    CavitySpec,
    FilterStack,
    SpectrumGrid,
    calibrate_stack,
    convolution_sweep,
    convolve_spectrum,
    count_peaks,
    fwhm,
    pulse_spectrum,
    recover_spectrum,
    spectral_efficiency,
    transmission,
)
from ._runner import SUBCOMMANDS, RunResult, run  # noqa: F401
from ._timetags import TimeTagFile, read_timetags, write_timetags  # noqa: F401
