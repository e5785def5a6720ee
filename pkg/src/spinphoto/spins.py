"""Spin-1/2 cluster definitions: operators, dipolar Hamiltonians, initial states.

All Hamiltonians carry units of Hz; propagators elsewhere use
``exp(-i * 2*pi * H * t)``, so pulse amplitudes written in Hz are precession
frequencies. The computational basis orders spin 0 as the leftmost Kronecker
factor, bit 0 meaning "up" (m = +1/2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

MAX_SPINS = 12
COUPLING_BOUND_HZ = 1.0e6

# 2x2 spin-1/2 matrices (hbar = 1).
SX = np.array([[0.0, 0.5], [0.5, 0.0]])
SY = np.array([[0.0, -0.5j], [0.5j, 0.0]])
SZ = np.array([[0.5, 0.0], [0.0, -0.5]])


def _as_square(table, n: int, name: str) -> np.ndarray:
    arr = np.asarray(table, dtype=float)
    if arr.shape != (n, n):
        raise ValidationError(f"{name} must be {n}x{n}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class SpinSystem:
    """An n-spin-1/2 cluster with secular dipolar couplings and Zeeman offsets.

    couplings[i][j] is the dipolar constant d_ij in Hz (symmetric, zero
    diagonal); offsets[i] is the resonance offset of spin i in Hz.
    """

    n: int
    couplings: np.ndarray
    offsets: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        # Single-spin systems are allowed so the trivial rotation/detection
        # identities can run through the same code path as real clusters.
        if not (1 <= self.n <= MAX_SPINS):
            raise ValidationError(f"spin count must be in [1, {MAX_SPINS}], got {self.n}")
        couplings = _as_square(self.couplings, self.n, "couplings")
        if not np.all(np.isfinite(couplings)):
            raise ValidationError("couplings must be finite")
        if np.any(np.abs(couplings) > COUPLING_BOUND_HZ):
            raise ValidationError(f"|d_ij| must be <= {COUPLING_BOUND_HZ:g} Hz")
        if not np.array_equal(couplings, couplings.T):
            raise ValidationError("coupling table must be symmetric")
        if np.any(np.diag(couplings) != 0.0):
            raise ValidationError("coupling table must have zero diagonal")
        offsets = self.offsets
        if offsets is None:
            offsets = np.zeros(self.n)
        offsets = np.asarray(offsets, dtype=float)
        if offsets.shape != (self.n,):
            raise ValidationError(f"offsets must have length {self.n}")
        if not np.all(np.isfinite(offsets)):
            raise ValidationError("offsets must be finite")
        couplings = couplings.copy()
        offsets = offsets.copy()
        couplings.flags.writeable = False
        offsets.flags.writeable = False
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "offsets", offsets)

    @property
    def dim(self) -> int:
        return 2**self.n

    def fingerprint(self) -> bytes:
        """Byte key identifying this system (used for workspace caching)."""
        return b"%d|" % self.n + self.couplings.tobytes() + b"|" + self.offsets.tobytes()

    def to_json(self, seed: int | None = None) -> str:
        doc = {
            "n": self.n,
            "couplings": self.couplings.tolist(),
            "offsets": self.offsets.tolist(),
        }
        if seed is not None:
            doc["seed"] = seed
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SpinSystem":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"not valid JSON: {exc}") from exc
        for key in ("n", "couplings"):
            if key not in doc:
                raise ValidationError(f"spin system JSON missing key {key!r}")
        return cls(n=int(doc["n"]), couplings=doc["couplings"], offsets=doc.get("offsets"))

    def save(self, path: str | Path, seed: int | None = None) -> None:
        Path(path).write_text(self.to_json(seed=seed) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SpinSystem":
        return cls.from_json(Path(path).read_text())


def random_couplings(n: int, bound: float, seed: int) -> np.ndarray:
    """Symmetric coupling table with i.i.d. uniform entries in [-bound, +bound].

    Deterministic for a given seed; the diagonal is zero.
    """
    if bound <= 0:
        raise ValidationError("coupling bound must be positive")
    rng = np.random.default_rng(seed)
    table = np.zeros((n, n))
    iu, ju = np.triu_indices(n, k=1)
    table[iu, ju] = rng.uniform(-bound, bound, size=iu.size)
    table += table.T
    return table


@dataclass
class DensityState:
    """Deviation density matrix of an n-spin cluster (Hermitian, 2^n x 2^n)."""

    matrix: np.ndarray
    n: int

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = 2**self.n
        if self.matrix.shape != (dim, dim):
            raise ValidationError(f"state matrix must be {dim}x{dim} for n={self.n}")

    @property
    def dim(self) -> int:
        return 2**self.n

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def copy(self) -> "DensityState":
        return DensityState(self.matrix.copy(), self.n)


class OperatorSet:
    """Spin operators for an n-spin-1/2 cluster in the full 2^n space.

    Single-spin operators are built on demand and cached; the arrays are
    marked read-only so a set can be shared between concurrent runs.
    """

    def __init__(self, n: int):
        if not (1 <= n <= MAX_SPINS):
            raise ValidationError(f"spin count must be in [1, {MAX_SPINS}], got {n}")
        self.n = n
        self.dim = 2**n
        self._cache: dict[tuple[str, int], np.ndarray] = {}

    def _lift(self, m2: np.ndarray, i: int) -> np.ndarray:
        left = np.eye(2**i)
        right = np.eye(2 ** (self.n - i - 1))
        return np.kron(np.kron(left, m2), right)

    def _single(self, axis: str, i: int) -> np.ndarray:
        if not (0 <= i < self.n):
            raise ValidationError(f"spin index {i} out of range for n={self.n}")
        key = (axis, i)
        if key not in self._cache:
            m2 = {"x": SX, "y": SY, "z": SZ}[axis]
            op = self._lift(m2, i)
            op.flags.writeable = False
            self._cache[key] = op
        return self._cache[key]

    def ix(self, i: int) -> np.ndarray:
        return self._single("x", i)

    def iy(self, i: int) -> np.ndarray:
        return self._single("y", i)

    def iz(self, i: int) -> np.ndarray:
        return self._single("z", i)

    def _collective(self, axis: str) -> np.ndarray:
        key = (axis, -1)
        if key not in self._cache:
            op = sum(self._single(axis, i) for i in range(self.n))
            op.flags.writeable = False
            self._cache[key] = op
        return self._cache[key]

    @property
    def fx(self) -> np.ndarray:
        return self._collective("x")

    @property
    def fy(self) -> np.ndarray:
        return self._collective("y")

    @property
    def fz(self) -> np.ndarray:
        return self._collective("z")

    @property
    def f_plus(self) -> np.ndarray:
        key = ("+", -1)
        if key not in self._cache:
            op = self.fx + 1j * self.fy
            op.flags.writeable = False
            self._cache[key] = op
        return self._cache[key]


def build_operators(n: int) -> OperatorSet:
    """Operator set {Ix_i, Iy_i, Iz_i, Fx, Fy, Fz} for an n-spin cluster."""
    return OperatorSet(n)


def _spin_bits(n: int) -> np.ndarray:
    """(2^n, n) array of basis-state bits; bit 0 means m = +1/2."""
    k = np.arange(2**n)
    return (k[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1


def build_hamiltonian(sys: SpinSystem) -> np.ndarray:
    """Static Hamiltonian (Hz) of the cluster in the computational basis.

    H0 = sum_{i<j} d_ij (2 Izi Izj - Ixi Ixj - Iyi Iyj) + sum_i offset_i Izi.

    The secular flip-flop part connects basis states that differ by swapping
    one up/down pair, so H0 is assembled directly from bit patterns instead
    of summing Kronecker-lifted products; the result is identical and the
    assembly stays cheap up to the 12-spin ceiling.
    """
    n = sys.n
    dim = sys.dim
    bits = _spin_bits(n)
    m = 0.5 - bits  # magnetic quantum number of each spin per basis state

    h = np.zeros((dim, dim))
    # Izi*Izj and offset terms are diagonal: 2 sum_{i<j} d_ij m_i m_j = m^T D m.
    h[np.diag_indices(dim)] = np.einsum("ki,ij,kj->k", m, sys.couplings, m) + m @ sys.offsets

    # -(IxIx + IyIy) exchanges anti-aligned pairs with matrix element -d_ij/2.
    k = np.arange(dim)
    for i in range(n):
        mask_i = 1 << (n - 1 - i)
        for j in range(i + 1, n):
            d = sys.couplings[i, j]
            if d == 0.0:
                continue
            mask_j = 1 << (n - 1 - j)
            differ = bits[:, i] != bits[:, j]
            src = k[differ]
            dst = src ^ (mask_i | mask_j)
            h[dst, src] += -0.5 * d
    return h


def thermal_state(sys: SpinSystem) -> DensityState:
    """High-temperature deviation state Fz / 2^n (traceless)."""
    bits = _spin_bits(sys.n)
    fz_diag = (0.5 - bits).sum(axis=1)
    matrix = np.diag(fz_diag / sys.dim).astype(complex)
    return DensityState(matrix, sys.n)
