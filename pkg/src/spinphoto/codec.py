"""Slot readout, bit classification, and fidelity reporting.

Slot amplitudes are window-integrated real parts of the stack spectra
(window half-width spacing/4, so a one-bin mismatch between synthesis and
FFT axes cannot move a peak out of its window). Classification orients the
table by its dominant sign, then thresholds the oriented values, so peaks
of the opposite sign (for example an unlocked response that survived the
readout pulse) count as zeros.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NoSeparationError, ValidationError
from .waveform import BitImage
from .experiments import SpectrumStack

DECODE_FORMAT_VERSION = 1


def sample_slots(
    stack: SpectrumStack, f_start: float, spacing: float, rows: int, cols: int
) -> np.ndarray:
    """Signed real window integral at every slot frequency, as a rows x cols table.

    Slot (r, c) owns the frequency f_start + (c*rows + r)*spacing and is read
    from stack row r; the window integral is df * sum of the real part over
    bins within spacing/4 of the slot frequency.
    """
    if len(stack.rows) != rows:
        raise ValidationError(f"stack has {len(stack.rows)} rows, expected {rows}")
    axis = stack.rows[0].freqs
    df = stack.rows[0].df
    half = spacing / 4.0
    table = np.empty((rows, cols))
    for r in range(rows):
        values = stack.rows[r].values.real
        for c in range(cols):
            f_slot = f_start + (c * rows + r) * spacing
            if f_slot - half < axis[0] or f_slot + half > axis[-1]:
                raise ValidationError(
                    f"slot ({r}, {c}) at {f_slot:g} Hz falls outside the spectral axis"
                )
            window = np.abs(axis - f_slot) <= half
            table[r, c] = df * values[window].sum()
    return table


def otsu_threshold(values: np.ndarray) -> float:
    """Exact Otsu split: maximizes between-class variance over all cuts.

    Works on the raw float values (no histogram), so the result is
    equivariant under positive rescaling. Ties resolve to the lowest cut.
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size < 2 or v[0] == v[-1]:
        raise NoSeparationError("all slot amplitudes are equal; nothing to threshold")
    n = v.size
    best_score = -np.inf
    best_cut = None
    csum = np.cumsum(v)
    total = csum[-1]
    for k in range(1, n):
        if v[k - 1] == v[k]:
            continue
        w0 = k / n
        m0 = csum[k - 1] / k
        m1 = (total - csum[k - 1]) / (n - k)
        score = w0 * (1.0 - w0) * (m0 - m1) ** 2
        if score > best_score:
            best_score = score
            best_cut = 0.5 * (v[k - 1] + v[k])
    return float(best_cut)


@dataclass
class DecodeReport:
    """Outcome of thresholding a slot-amplitude table."""

    recovered: BitImage
    slot_amplitudes: np.ndarray  # raw signed table, pre-orientation
    threshold: float
    margin: float  # min |oriented - threshold| / |threshold| over all slots
    orientation: int  # +1 or -1; sign the table was multiplied by
    threshold_mode: str
    bit_errors: int | None = None

    def to_json(self) -> str:
        doc = {
            "format_version": DECODE_FORMAT_VERSION,
            "rows": self.recovered.rows,
            "cols": self.recovered.cols,
            "bits": self.recovered.bits.tolist(),
            "slot_amplitudes": self.slot_amplitudes.tolist(),
            "threshold": self.threshold,
            "margin": self.margin,
            "orientation": self.orientation,
            "threshold_mode": self.threshold_mode,
        }
        if self.bit_errors is not None:
            doc["bit_errors"] = self.bit_errors
        return json.dumps(doc, indent=2, sort_keys=True)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def decode(
    table: np.ndarray,
    threshold_mode: str = "otsu",
    threshold: float | None = None,
    reference: BitImage | None = None,
) -> DecodeReport:
    """Classify slot amplitudes into bits.

    The table is oriented so its dominant peak is positive (the sign of the
    largest-magnitude entry), then bit = 1 iff the oriented amplitude is >=
    the threshold. ``threshold_mode`` is "otsu" or "fixed"; fixed mode
    requires ``threshold``.
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.size == 0:
        raise ValidationError("slot table must be a non-empty 2-D array")
    if np.ptp(table) == 0.0:
        raise NoSeparationError("slot table is constant; no threshold separates it")

    flat = table.ravel()
    sign = 1 if flat[np.argmax(np.abs(flat))] >= 0 else -1
    oriented = sign * table

    if threshold_mode == "otsu":
        if threshold is not None:
            raise ValidationError("otsu mode does not take an explicit threshold")
        thr = otsu_threshold(oriented)
    elif threshold_mode == "fixed":
        if threshold is None:
            raise ValidationError("fixed mode requires a threshold value")
        thr = float(threshold)
    else:
        raise ValidationError(f"unknown threshold mode {threshold_mode!r}")
    if thr == 0.0:
        raise NoSeparationError("threshold collapsed to zero")

    bits = (oriented >= thr).astype(np.uint8)
    margin = float(np.min(np.abs(oriented - thr)) / abs(thr))
    recovered = BitImage(table.shape[0], table.shape[1], bits)
    report = DecodeReport(
        recovered=recovered,
        slot_amplitudes=table,
        threshold=thr,
        margin=margin,
        orientation=sign,
        threshold_mode=threshold_mode,
    )
    if reference is not None:
        report.bit_errors, _ = fidelity(recovered, reference)
    return report


def fidelity(recovered: BitImage, reference: BitImage) -> tuple[int, float]:
    """Hamming distance between images and the matching fraction."""
    if recovered.rows != reference.rows or recovered.cols != reference.cols:
        raise ValidationError("image dimensions differ")
    errors = int(np.count_nonzero(recovered.bits != reference.bits))
    total = recovered.rows * recovered.cols
    return errors, 1.0 - errors / total
