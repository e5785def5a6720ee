"""The three experiment drivers: single pulse, phase-cycled two-pulse, and
the row-by-row image retrieval (pseudo-2D sweep of the readout comb).

Phase cycle convention: the second pulse runs once per phase offset in the
cycle (default +pi/2 and -pi/2 relative to the first pulse) and the detected
FIDs are averaged with equal positive receiver weights. The two default
branches have exactly opposite rf fields, so any response that does not
depend on the first pulse cancels identically, while the component created
by the first pulse and held by the locking field survives.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import Fid, Spectrum, acquire, evolve, line_broaden, save_spectrum, spectrum
from .errors import ValidationError
from .spins import DensityState, SpinSystem, thermal_state
from .waveform import (
    BitImage,
    HarmonicSet,
    Waveform,
    bits_to_harmonics,
    centered_start,
    rotate_phase,
    row_harmonics,
    synthesize,
)

logger = logging.getLogger("spinphoto")

# Two-branch cycle: opposite lock phases, averaged. Cancels everything the
# first pulse did not create (the two branch fields are exact negatives) and
# reduces to the single-pulse signal at zero lock duration.
DEFAULT_PHASE_CYCLE = (np.pi / 2.0, -np.pi / 2.0)

# Four-branch gating cycle for the image readout: (lock parallel to the
# stored coherence, both signs) minus (lock perpendicular, both signs).
# Responses that do not interact with the readout comb are identical in all
# four branches and cancel exactly, so a slot only survives when both pulses
# address it -- the bitwise-AND behavior of the retrieval protocol.
GATING_PHASE_CYCLE = (np.pi / 2.0, -np.pi / 2.0, 0.0, np.pi)
GATING_RECEIVER_WEIGHTS = (0.25, 0.25, -0.25, -0.25)


@dataclass(frozen=True)
class Acquisition:
    """Detection settings shared by all experiments."""

    t_acq: float
    dwell: float
    lb: float
    zero_fill: int
    dead_time: float = 0.0

    def __post_init__(self):
        if self.t_acq <= 0 or self.dwell <= 0:
            raise ValidationError("acquisition times must be positive")
        if self.lb < 0 or self.dead_time < 0:
            raise ValidationError("lb and dead_time must be >= 0")


@dataclass
class ExperimentPlan:
    """One pulse-and-detect run: optional second pulse with a phase cycle.

    ``receiver_weights`` holds the signed weight of each cycle branch in the
    detected sum; None means equal averaging, which keeps the component the
    first pulse created and cancels the rest for the default two-branch cycle.
    """

    sys: SpinSystem
    acquisition: Acquisition
    pulse1: Waveform | None = None
    pulse2: Waveform | None = None
    pulse2_phase_cycle: tuple[float, ...] = DEFAULT_PHASE_CYCLE
    receiver_weights: tuple[float, ...] | None = None
    mode: str = "split"

    def __post_init__(self):
        if self.pulse1 is None and self.pulse2 is None:
            raise ValidationError("plan needs at least one pulse")
        if self.pulse2 is not None and len(self.pulse2_phase_cycle) == 0:
            raise ValidationError("phase cycle must be non-empty when pulse2 is present")
        if self.receiver_weights is not None and len(self.receiver_weights) != len(
            self.pulse2_phase_cycle
        ):
            raise ValidationError("one receiver weight per phase-cycle branch required")


@dataclass
class SpectrumStack:
    """One spectrum per readout-comb reference frequency, common axis."""

    rows: list[Spectrum]
    row_freqs: list[float]

    def __post_init__(self):
        if len(self.rows) != len(self.row_freqs):
            raise ValidationError("one reference frequency per row required")
        if not self.rows:
            raise ValidationError("stack must hold at least one row")
        axis = self.rows[0].freqs
        for spec in self.rows[1:]:
            if not np.array_equal(spec.freqs, axis):
                raise ValidationError("all stack rows must share the frequency axis")


def _detect(state: DensityState, sys: SpinSystem, acq: Acquisition) -> Fid:
    return acquire(state, sys, acq.t_acq, acq.dwell, dead_time=acq.dead_time)


def _process(fid: Fid, acq: Acquisition) -> Spectrum:
    return spectrum(line_broaden(fid, acq.lb), acq.zero_fill)


def run_single_pulse(plan: ExperimentPlan) -> Spectrum:
    """Thermal state -> pulse1 -> detect -> line broaden -> spectrum."""
    if plan.pulse2 is not None:
        raise ValidationError("single-pulse plan must not carry a second pulse")
    rho = thermal_state(plan.sys)
    rho = evolve(rho, plan.sys, plan.pulse1, plan.mode)
    return _process(_detect(rho, plan.sys, plan.acquisition), plan.acquisition)


def cycled_fid(
    prepared: DensityState,
    sys: SpinSystem,
    pulse2: Waveform,
    cycle: tuple[float, ...],
    acq: Acquisition,
    mode: str,
    weights: tuple[float, ...] | None = None,
) -> Fid:
    """Weighted sum of branch FIDs over the second-pulse phase cycle.

    Any branch pair whose phases differ by pi has exactly opposite rf fields,
    so the response to the second pulse alone flips sign between them; equal
    weights over such a pair cancel it while keeping what the first pulse
    created. The four-branch gating cycle additionally subtracts the
    perpendicular-lock pair, which removes everything the second pulse does
    not act on.
    """
    if weights is None:
        weights = tuple(1.0 / len(cycle) for _ in cycle)
    if len(weights) != len(cycle):
        raise ValidationError("one receiver weight per phase-cycle branch required")
    total = None
    truncated = False
    for phase, weight in zip(cycle, weights):
        branch = rotate_phase(pulse2, phase)
        rho = evolve(prepared, sys, branch, mode)
        fid = _detect(rho, sys, acq)
        truncated |= fid.truncated
        term = weight * fid.samples
        total = term if total is None else total + term
    return Fid(dwell=acq.dwell, samples=total, truncated=truncated)


def run_two_pulse(plan: ExperimentPlan) -> Spectrum:
    """Phase-cycled two-pulse experiment; returns the cycled-sum spectrum."""
    if plan.pulse1 is None or plan.pulse2 is None:
        raise ValidationError("two-pulse plan needs both pulses")
    rho = thermal_state(plan.sys)
    rho = evolve(rho, plan.sys, plan.pulse1, plan.mode)
    fid = cycled_fid(
        rho, plan.sys, plan.pulse2, plan.pulse2_phase_cycle,
        plan.acquisition, plan.mode, weights=plan.receiver_weights,
    )
    return _process(fid, plan.acquisition)


@dataclass(frozen=True)
class PhotographyConfig:
    """Everything but the image and the spin system for a retrieval run."""

    spacing: float
    amp1: float
    dur1: float
    steps1: int
    amp2: float
    dur2: float
    steps2: int
    acquisition: Acquisition
    f_start: float | None = None  # None centers the slot comb on the carrier
    phase_cycle: tuple[float, ...] = GATING_PHASE_CYCLE
    receiver_weights: tuple[float, ...] | None = GATING_RECEIVER_WEIGHTS
    mode: str = "split"
    jobs: int | None = None

    def start_frequency(self, img: BitImage) -> float:
        if self.f_start is not None:
            return self.f_start
        return centered_start(img.rows * img.cols, self.spacing)


def write_pulse(img: BitImage, cfg: PhotographyConfig) -> Waveform:
    """The image-encoding pulse: one harmonic per bit."""
    hs = bits_to_harmonics(img, cfg.start_frequency(img), cfg.spacing, cfg.amp1)
    return synthesize(hs, cfg.dur1, cfg.steps1)


def readout_comb(row: int, img: BitImage, cfg: PhotographyConfig) -> HarmonicSet:
    return row_harmonics(
        row, cfg.start_frequency(img), cfg.spacing, img.cols, img.rows, cfg.amp2
    )


def photograph_rows(
    prepared: DensityState,
    sys: SpinSystem,
    row_pulses: list[Waveform],
    row_freqs: list[float],
    acq: Acquisition,
    cycle: tuple[float, ...] = GATING_PHASE_CYCLE,
    weights: tuple[float, ...] | None = GATING_RECEIVER_WEIGHTS,
    mode: str = "split",
    jobs: int | None = None,
) -> SpectrumStack:
    """Run the readout rows (independent, hence parallel) against a prepared state."""

    def one_row(idx: int) -> Spectrum:
        try:
            fid = cycled_fid(prepared, sys, row_pulses[idx], cycle, acq, mode, weights=weights)
            return _process(fid, acq)
        except Exception as exc:
            raise type(exc)(f"row {idx}: {exc}") from exc

    workers = jobs if jobs and jobs > 0 else (os.cpu_count() or 1)
    workers = min(workers, len(row_pulses))
    if workers == 1:
        rows = [one_row(i) for i in range(len(row_pulses))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one_row, range(len(row_pulses))))
    return SpectrumStack(rows=rows, row_freqs=list(row_freqs))


def run_photography(img: BitImage, sys: SpinSystem, cfg: PhotographyConfig) -> SpectrumStack:
    """Full retrieval: encode the image once, then read it back row by row."""
    pulse1 = write_pulse(img, cfg)
    rho0 = thermal_state(sys)
    prepared = evolve(rho0, sys, pulse1, cfg.mode)
    f_start = cfg.start_frequency(img)
    row_pulses = [
        synthesize(readout_comb(r, img, cfg), cfg.dur2, cfg.steps2)
        for r in range(img.rows)
    ]
    row_freqs = [f_start + r * cfg.spacing for r in range(img.rows)]
    return photograph_rows(
        prepared, sys, row_pulses, row_freqs, cfg.acquisition,
        cycle=cfg.phase_cycle, weights=cfg.receiver_weights,
        mode=cfg.mode, jobs=cfg.jobs,
    )


@dataclass
class LockSweepResult:
    durations: np.ndarray
    amplitudes: np.ndarray  # signed real part at the drive frequency
    spectra: list[Spectrum]


def lock_duration_sweep(
    sys: SpinSystem,
    f1: float,
    amp1: float,
    dur1: float,
    steps1: int,
    amp2: float,
    dur2_max: float,
    dur2_points: int,
    steps2: int,
    acq: Acquisition,
    cycle: tuple[float, ...] = DEFAULT_PHASE_CYCLE,
    mode: str = "split",
) -> LockSweepResult:
    """Signed response at the drive frequency vs locking-pulse duration.

    The first pulse is a single harmonic at f1; the second is the same
    harmonic, stepped through the phase cycle, with its duration swept from
    zero to dur2_max (inclusive) in dur2_points equal increments. Branch
    states evolve incrementally, so the sweep costs one pass through the
    longest pulse per branch.
    """
    if dur2_points < 2:
        raise ValidationError("sweep needs at least the zero and one nonzero duration")
    if steps2 % (dur2_points - 1) != 0:
        raise ValidationError("steps2 must divide evenly into the sweep increments")
    hs1 = HarmonicSet([f1], [amp1], [0.0])
    pulse1 = synthesize(hs1, dur1, steps1)
    pulse2_full = synthesize(HarmonicSet([f1], [amp2], [0.0]), dur2_max, steps2)

    rho0 = thermal_state(sys)
    prepared = evolve(rho0, sys, pulse1, mode)

    branches = [(rotate_phase(pulse2_full, phase), prepared) for phase in cycle]
    durations = np.linspace(0.0, dur2_max, dur2_points)
    per_inc = steps2 // (dur2_points - 1)

    spectra: list[Spectrum] = []
    amplitudes = np.empty(dur2_points)
    for k in range(dur2_points):
        if k > 0:
            start, stop = (k - 1) * per_inc, k * per_inc
            branches = [
                (wf, evolve(state, sys, wf.segment(start, stop), mode))
                for wf, state in branches
            ]
        fids = [_detect(state, sys, acq) for _, state in branches]
        samples = sum(f.samples for f in fids) / len(fids)
        fid = Fid(dwell=acq.dwell, samples=samples, truncated=any(f.truncated for f in fids))
        spec = _process(fid, acq)
        spectra.append(spec)
        amplitudes[k] = spec.real_at(f1)
    return LockSweepResult(durations=durations, amplitudes=amplitudes, spectra=spectra)


def save_stack(stack: SpectrumStack, out_dir: str | Path, acq: Acquisition | None = None) -> None:
    """One spectrum CSV per row plus an index JSON naming them."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for idx, spec in enumerate(stack.rows):
        name = f"row_{idx:03d}.csv"
        save_spectrum(
            spec,
            out_dir / name,
            dwell=acq.dwell if acq else None,
            lb=acq.lb if acq else None,
            zero_fill=acq.zero_fill if acq else None,
        )
        names.append(name)
    index = {"row_freqs_hz": stack.row_freqs, "files": names}
    (out_dir / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
