"""Bit images, harmonic pulse programs, and sampled rf waveforms.

A bit image maps to a comb of circularly polarized harmonics (one frequency
slot per bit, column-major from the upper-left corner); a harmonic set is
sampled into a piecewise-constant (bx, by) waveform that a spectrometer -- or
the engine module -- can play back step by step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AliasingError, ValidationError

MAX_IMAGE_BITS = 4096


@dataclass(frozen=True)
class BitImage:
    """rows x cols grid of {0,1} payload bits."""

    rows: int
    cols: int
    bits: np.ndarray

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("image must have at least one row and column")
        if self.rows * self.cols > MAX_IMAGE_BITS:
            raise ValidationError(f"image exceeds {MAX_IMAGE_BITS} bits")
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.shape != (self.rows, self.cols):
            raise ValidationError(f"bits must be {self.rows}x{self.cols}")
        if not np.all((bits == 0) | (bits == 1)):
            raise ValidationError("image cells must be 0 or 1")
        bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    def flat_column_major(self) -> np.ndarray:
        """Bits as a 1-D array, column after column, row varying fastest."""
        return self.bits.T.reshape(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitImage):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.bits, other.bits)
        )


def load_pbm(path: str | Path) -> BitImage:
    """Read a plain-text PBM (magic P1) image; '#' comments are allowed."""
    tokens: list[str] = []
    for line in Path(path).read_text().splitlines():
        body = line.split("#", 1)[0]
        tokens.extend(body.split())
    if not tokens or tokens[0] != "P1":
        raise ValidationError(f"{path}: not a plain PBM (P1) file")
    if len(tokens) < 3:
        raise ValidationError(f"{path}: truncated PBM header")
    cols, rows = int(tokens[1]), int(tokens[2])
    cells = tokens[3:]
    if len(cells) != rows * cols:
        raise ValidationError(f"{path}: expected {rows * cols} cells, got {len(cells)}")
    bits = np.array([int(c) for c in cells], dtype=np.uint8).reshape(rows, cols)
    return BitImage(rows, cols, bits)


def save_pbm(img: BitImage, path: str | Path) -> None:
    lines = [f"P1", f"{img.cols} {img.rows}"]
    lines += [" ".join(str(int(b)) for b in row) for row in img.bits]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class HarmonicSet:
    """Frequency-domain pulse program: (frequency Hz, amplitude Hz, phase rad).

    Frequencies are offsets from the carrier and must be strictly increasing;
    amplitudes are precession frequencies (gamma*B1 / 2*pi). Zero-amplitude
    entries are kept so downstream code knows every slot frequency.
    """

    frequencies: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        amps = np.asarray(self.amplitudes, dtype=float)
        phases = np.asarray(self.phases, dtype=float)
        if freqs.ndim != 1 or freqs.size == 0:
            raise ValidationError("harmonic set must be a non-empty 1-D list")
        if amps.shape != freqs.shape or phases.shape != freqs.shape:
            raise ValidationError("frequencies/amplitudes/phases must have equal length")
        if np.any(np.diff(freqs) <= 0):
            raise ValidationError("harmonic frequencies must be strictly increasing")
        if np.any(amps < 0):
            raise ValidationError("harmonic amplitudes must be non-negative")
        for name, arr in (("frequencies", freqs), ("amplitudes", amps), ("phases", phases)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.frequencies.size

    def with_amplitude(self, index: int, amp: float) -> "HarmonicSet":
        """Copy of this set with one slot's amplitude replaced."""
        amps = self.amplitudes.copy()
        amps[index] = amp
        return HarmonicSet(self.frequencies, amps, self.phases)


def centered_start(n_slots: int, spacing: float) -> float:
    """f_start that centers an n_slots comb of the given spacing on the carrier."""
    return -0.5 * (n_slots - 1) * spacing


def bits_to_harmonics(
    img: BitImage, f_start: float, spacing: float, amp_one: float
) -> HarmonicSet:
    """One harmonic per image bit, column-major from the upper-left corner.

    Bit with linear index k (row varying fastest within a column) owns the
    frequency f_start + k*spacing; set bits get amplitude amp_one, clear bits
    amplitude zero. All phases are zero.
    """
    if spacing <= 0:
        raise ValidationError("slot spacing must be positive")
    if amp_one <= 0:
        raise ValidationError("amplitude for set bits must be positive")
    flat = img.flat_column_major()
    freqs = f_start + spacing * np.arange(flat.size)
    amps = amp_one * flat.astype(float)
    return HarmonicSet(freqs, amps, np.zeros(flat.size))


def row_harmonics(
    row: int, f_start: float, spacing: float, n_cols: int, n_rows: int, amp: float
) -> HarmonicSet:
    """Readout comb selecting one image row: n_cols teeth, one per column.

    Tooth m sits at f_start + row*spacing + m*(spacing*n_rows), which is the
    slot frequency of bit (row, m); stepping ``row`` by one shifts every tooth
    by one slot spacing.
    """
    if not (0 <= row < n_rows):
        raise ValidationError(f"row {row} out of range for {n_rows} rows")
    if spacing <= 0 or amp <= 0:
        raise ValidationError("spacing and amplitude must be positive")
    freqs = f_start + row * spacing + spacing * n_rows * np.arange(n_cols)
    return HarmonicSet(freqs, np.full(n_cols, float(amp)), np.zeros(n_cols))


@dataclass(frozen=True)
class Waveform:
    """Sampled rf pulse: per-step rotating-frame field pair (bx, by) in Hz.

    Steps are piecewise constant over dt = duration / n_steps; the field
    values are the ideal waveform sampled at each step's midpoint.
    """

    duration: float
    steps: np.ndarray  # (n_steps, 2) float, columns bx, by
    reference_offset: float = 0.0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValidationError("waveform duration must be positive")
        steps = np.asarray(self.steps, dtype=float)
        if steps.ndim != 2 or steps.shape[1] != 2 or steps.shape[0] < 1:
            raise ValidationError("steps must be a (n_steps, 2) array")
        if not np.all(np.isfinite(steps)):
            raise ValidationError("step fields must be finite")
        steps = steps.copy()
        steps.flags.writeable = False
        object.__setattr__(self, "steps", steps)

    @property
    def n_steps(self) -> int:
        return self.steps.shape[0]

    @property
    def dt(self) -> float:
        return self.duration / self.n_steps

    def max_amplitude(self) -> float:
        return float(np.abs(self.steps).max())

    def segment(self, start: int, stop: int) -> "Waveform":
        """Steps [start, stop) as a waveform of their own.

        Step fields keep their absolute-time phases, so a segment is only
        meaningful when played as the continuation of the preceding steps.
        """
        if not (0 <= start < stop <= self.n_steps):
            raise ValidationError(f"bad segment [{start}, {stop}) of {self.n_steps} steps")
        return Waveform(
            duration=(stop - start) * self.dt,
            steps=self.steps[start:stop],
            reference_offset=self.reference_offset,
        )


def randomize_phases(hs: HarmonicSet, seed: int) -> HarmonicSet:
    """Copy of a harmonic set with i.i.d. uniform phases in [0, 2*pi).

    All-zero starting phases make every harmonic peak at t=0, which can give
    the sampled waveform a large crest factor; randomized phases spread the
    peaks out. Deterministic for a given seed; off unless explicitly used.
    """
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(hs))
    return HarmonicSet(hs.frequencies, hs.amplitudes, phases)


def synthesize(
    hs: HarmonicSet,
    duration: float,
    n_steps: int,
    reference_offset: float = 0.0,
) -> Waveform:
    """Sample a harmonic set into a piecewise-constant circularly polarized pulse.

    At each step midpoint t: bx = sum_k a_k cos(2*pi*f_k*t + phi_k) and
    by = sum_k a_k sin(2*pi*f_k*t + phi_k), with f_k shifted by
    reference_offset. Step counts below the Nyquist-style bound
    2 * duration * max|f| are rejected as aliasing.
    """
    if duration <= 0:
        raise ValidationError("pulse duration must be positive")
    if n_steps < 1:
        raise ValidationError("need at least one step")
    freqs = hs.frequencies + reference_offset
    f_max = float(np.abs(freqs).max())
    required = 2.0 * duration * f_max
    if n_steps < required:
        raise AliasingError(
            f"{n_steps} steps undersample harmonics up to {f_max:g} Hz over "
            f"{duration:g} s (need >= {int(np.ceil(required))})"
        )
    dt = duration / n_steps
    t = (np.arange(n_steps) + 0.5) * dt
    bx = np.zeros(n_steps)
    by = np.zeros(n_steps)
    for f, a, phi in zip(freqs, hs.amplitudes, hs.phases):
        if a == 0.0:
            continue
        arg = 2.0 * np.pi * f * t + phi
        bx += a * np.cos(arg)
        by += a * np.sin(arg)
    return Waveform(duration=duration, steps=np.column_stack([bx, by]),
                    reference_offset=reference_offset)


def rotate_phase(wf: Waveform, phi: float) -> Waveform:
    """Waveform with every harmonic phase shifted by phi.

    Shifting all phases by phi rotates each step's (bx, by) vector by phi.
    Quarter-turn offsets are applied with exact {0, +-1} factors so that the
    +pi/2 and -pi/2 branches of a phase cycle are exact sign mirrors.
    """
    quarter = phi / (np.pi / 2.0)
    q = round(quarter)
    if abs(quarter - q) < 1e-12:
        c, s = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][q % 4]
    else:
        c, s = np.cos(phi), np.sin(phi)
    bx, by = wf.steps[:, 0], wf.steps[:, 1]
    steps = np.column_stack([c * bx - s * by, s * bx + c * by])
    return Waveform(duration=wf.duration, steps=steps, reference_offset=wf.reference_offset)


def save_waveform(wf: Waveform, path: str | Path) -> None:
    """Write step CSV (17 significant digits) plus a JSON metadata sidecar."""
    path = Path(path)
    lines = ["step,bx_hz,by_hz"]
    lines += [
        f"{i},{bx:.17g},{by:.17g}" for i, (bx, by) in enumerate(wf.steps)
    ]
    path.write_text("\n".join(lines) + "\n")
    meta = {
        "duration_s": wf.duration,
        "n_steps": wf.n_steps,
        "reference_offset_hz": wf.reference_offset,
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_waveform(path: str | Path) -> Waveform:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    lines = path.read_text().splitlines()
    if not lines or lines[0] != "step,bx_hz,by_hz":
        raise ValidationError(f"{path}: bad waveform CSV header")
    steps = np.empty((len(lines) - 1, 2))
    for row, line in enumerate(lines[1:]):
        idx, bx, by = line.split(",")
        if int(idx) != row:
            raise ValidationError(f"{path}: non-contiguous step index at line {row + 2}")
        steps[row] = (float(bx), float(by))
    if len(steps) != int(meta["n_steps"]):
        raise ValidationError(f"{path}: sidecar n_steps disagrees with CSV")
    return Waveform(
        duration=float(meta["duration_s"]),
        steps=steps,
        reference_offset=float(meta["reference_offset_hz"]),
    )
