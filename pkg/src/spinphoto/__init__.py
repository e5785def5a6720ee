"""Desk-scale simulator for storing bit images in dipolar-coupled spin
clusters via multi-harmonic weak pulses and reading them back as stacks of
phase-cycled NMR spectra."""

from .codec import DecodeReport, decode, fidelity, otsu_threshold, sample_slots
from .engine import (
    Fid,
    Spectrum,
    Workspace,
    acquire,
    collective_rotation,
    evolve,
    line_broaden,
    pulse_propagator,
    spectrum,
    step_propagator_exact,
    step_propagator_split,
)
from .errors import (
    AliasingError,
    NoSeparationError,
    NumericalContractError,
    SpinPhotoError,
    ValidationError,
)
from .experiments import (
    Acquisition,
    ExperimentPlan,
    LockSweepResult,
    PhotographyConfig,
    SpectrumStack,
    cycled_fid,
    lock_duration_sweep,
    run_photography,
    run_single_pulse,
    run_two_pulse,
)
from .spins import (
    DensityState,
    OperatorSet,
    SpinSystem,
    build_hamiltonian,
    build_operators,
    random_couplings,
    thermal_state,
)
from .waveform import (
    BitImage,
    HarmonicSet,
    Waveform,
    bits_to_harmonics,
    centered_start,
    load_pbm,
    load_waveform,
    randomize_phases,
    rotate_phase,
    row_harmonics,
    save_pbm,
    save_waveform,
    synthesize,
)

__version__ = "0.1.0"
