"""Uniform sampling lattices, their frequency duals, and sampled fields.

All integrals in the library use one quadrature rule: the left-endpoint
Riemann sum step^n * sum(values) over a half-open box. Keeping a single
rule makes the FFT fast paths agree with direct quadrature to rounding
error instead of to discretization error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import LatticeMismatch

__all__ = [
    "Lattice",
    "FrequencyLattice",
    "SampledField",
    "make_lattice",
    "dual_lattice",
    "riemann_integral",
    "inner_product",
]


@dataclass(frozen=True, eq=False)
class Lattice:
    """Uniform grid origin + j*step for multi-indices j in [0, count)."""

    origin: np.ndarray
    step: np.ndarray
    count: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.count)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.step))

    @property
    def size(self) -> int:
        return int(np.prod(self.count))

    def axis_points(self, a: int) -> np.ndarray:
        return self.origin[a] + np.arange(self.count[a]) * self.step[a]

    def point(self, j) -> np.ndarray:
        return self.origin + np.asarray(j) * self.step

    def index(self, p) -> np.ndarray:
        j = np.rint((np.asarray(p, float) - self.origin) / self.step).astype(int)
        return j

    def points(self) -> np.ndarray:
        """All lattice points, shape (*count, dim). Use sparingly."""
        axes = [self.axis_points(a) for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def upper(self) -> np.ndarray:
        """Exclusive box corner origin + count*step."""
        return self.origin + self.count * self.step

    def same_grid(self, other: "Lattice") -> bool:
        return (
            self.dim == other.dim
            and np.array_equal(self.count, other.count)
            and np.array_equal(self.step, other.step)
            and np.array_equal(self.origin, other.origin)
        )

    def to_json(self) -> dict:
        return {
            "origin": [float(x) for x in self.origin],
            "step": [float(x) for x in self.step],
            "count": [int(x) for x in self.count],
        }

    @staticmethod
    def from_json(obj: dict) -> "Lattice":
        return make_lattice(obj["origin"], obj["step"], obj["count"])


def make_lattice(origin, step, count) -> Lattice:
    """Validated lattice constructor; scalars are promoted to 1-vectors."""
    origin = np.atleast_1d(np.asarray(origin, dtype=float))
    step = np.atleast_1d(np.asarray(step, dtype=float))
    count = np.atleast_1d(np.asarray(count, dtype=int))
    if not (len(origin) == len(step) == len(count)):
        raise ValueError("origin, step and count must have equal length")
    if np.any(step <= 0):
        raise ValueError("lattice step must be strictly positive")
    if np.any(count < 2):
        raise ValueError("lattice count must be at least 2 per axis")
    return Lattice(origin=origin, step=step, count=count)


@dataclass(frozen=True, eq=False)
class FrequencyLattice:
    """Centered frequency grid dual to a sampling lattice.

    Bin m on axis a sits at m * step[a] with m in [-floor(N/2), ceil(N/2)),
    i.e. fftshift order in physical units. The dual step is kept as an
    exact rational of the stored signal step so step * signal_step * count
    equals 1 exactly, not merely to rounding.
    """

    signal_step: np.ndarray
    count: np.ndarray
    step_exact: tuple = field(repr=False, default=())

    def __post_init__(self):
        if not self.step_exact:
            exact = tuple(
                Fraction(1, 1) / (Fraction(float(s)) * int(n))
                for s, n in zip(self.signal_step, self.count)
            )
            object.__setattr__(self, "step_exact", exact)

    @property
    def dim(self) -> int:
        return len(self.count)

    @property
    def step(self) -> np.ndarray:
        return np.array([float(f) for f in self.step_exact])

    @property
    def nyquist(self) -> np.ndarray:
        return 0.5 / self.signal_step

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.step))

    @property
    def size(self) -> int:
        return int(np.prod(self.count))

    def axis_bins(self, a: int) -> np.ndarray:
        """Centered bin offsets m in [-floor(N/2), ceil(N/2))."""
        n = self.count[a]
        return np.arange(n) - n // 2

    def axis_freqs(self, a: int) -> np.ndarray:
        return self.axis_bins(a) * float(self.step_exact[a])

    def grids(self) -> list[np.ndarray]:
        """Per-axis frequency values, broadcastable to the full grid."""
        out = []
        for a in range(self.dim):
            shape = [1] * self.dim
            shape[a] = self.count[a]
            out.append(self.axis_freqs(a).reshape(shape))
        return out

    def to_json(self) -> dict:
        return {
            "signal_step": [float(x) for x in self.signal_step],
            "count": [int(x) for x in self.count],
        }

    @staticmethod
    def from_json(obj: dict) -> "FrequencyLattice":
        return FrequencyLattice(
            signal_step=np.asarray(obj["signal_step"], float),
            count=np.asarray(obj["count"], int),
        )


def dual_lattice(lat: Lattice) -> FrequencyLattice:
    """Frequency lattice dual to `lat`: step 1/(N*delta), same counts."""
    return FrequencyLattice(signal_step=lat.step.copy(), count=lat.count.copy())


@dataclass(eq=False)
class SampledField:
    """Complex samples of a function on a lattice."""

    lattice: Lattice
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != tuple(self.lattice.count):
            raise ValueError(
                f"values shape {vals.shape} does not match lattice count "
                f"{tuple(self.lattice.count)}"
            )
        if vals.dtype != np.complex128:
            vals = vals.astype(np.complex128)
        self.values = vals

    @property
    def norm_l2(self) -> float:
        return float(
            np.sqrt(self.lattice.cell_volume * np.sum(np.abs(self.values) ** 2))
        )

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.values.imag), initial=0.0) <= tol)

    def copy(self) -> "SampledField":
        return SampledField(self.lattice, self.values.copy(), self.label)


def riemann_integral(field: SampledField) -> complex:
    """Left-endpoint Riemann sum step^n * sum(values)."""
    return complex(field.lattice.cell_volume * np.sum(field.values))


def inner_product(a: SampledField, b: SampledField) -> complex:
    """L2 inner product step^n * sum(a * conj(b)); lattices must match."""
    if not a.lattice.same_grid(b.lattice):
        raise LatticeMismatch("inner_product requires identical lattices")
    return complex(a.lattice.cell_volume * np.sum(a.values * np.conj(b.values)))
