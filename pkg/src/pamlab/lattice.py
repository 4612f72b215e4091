"""Periodic lattices on [-L/2, L/2)^d with FFT convolution and spectral calculus.

Coordinates are cell centers x_k = (k + 1/2) h - L/2, so no grid point ever
sits on a kernel singularity at the origin.  All convolutions are exact
circular convolutions carrying the cell measure h^dim; discrete L2 inner
products carry the same measure.
"""

from __future__ import annotations

import csv
import os
import struct
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.fft as _fft

from .errors import (
    DimensionError,
    LatticeMismatchError,
    NonPowerOfTwoError,
)

_WORKERS = os.cpu_count() or 1


def _rfftn(a: np.ndarray) -> np.ndarray:
    return _fft.rfftn(a, workers=_WORKERS)


def _irfftn(a: np.ndarray, shape) -> np.ndarray:
    return _fft.irfftn(a, s=shape, workers=_WORKERS)


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic grid: `dim` in {2,3}, torus side `L`, `N` cells per side."""

    dim: int
    L: float
    N: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DimensionError(f"dim must be 2 or 3, got {self.dim}")
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise NonPowerOfTwoError(f"N must be a power of two >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.dim

    @property
    def n_sites(self) -> int:
        return self.N**self.dim

    @property
    def cell_measure(self) -> float:
        return self.h**self.dim

    def axis_coords(self) -> np.ndarray:
        """Cell-center coordinates along one axis (site positions)."""
        return (np.arange(self.N) + 0.5) * self.h - self.L / 2.0

    def coords(self) -> list[np.ndarray]:
        x = self.axis_coords()
        return list(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def radius(self) -> np.ndarray:
        """Torus-representative |x| at every cell center."""
        r2 = np.zeros(self.shape)
        for c in self.coords():
            r2 += c * c
        return np.sqrt(r2)

    def axis_displacements(self) -> np.ndarray:
        """Displacement coordinates m*h wrapped to [-L/2, L/2), index 0 at 0.

        Convolution kernels are sampled here: FFT index convolution pairs
        index offsets with displacement vectors, so a kernel array must put
        the origin at index 0.  Index reflection (N - m) mod N is then the
        exact map x -> -x.
        """
        m = np.arange(self.N)
        return ((m + self.N // 2) % self.N - self.N // 2) * self.h

    def displacements(self) -> list[np.ndarray]:
        d = self.axis_displacements()
        return list(np.meshgrid(*([d] * self.dim), indexing="ij"))

    def displacement_radius(self) -> np.ndarray:
        """Torus-representative |d| on the displacement grid."""
        r2 = np.zeros(self.shape)
        for c in self.displacements():
            r2 += c * c
        return np.sqrt(r2)

    def axis_wavenumbers(self) -> np.ndarray:
        """FFT-ordered wavenumbers 2 pi / L * {0,..,N/2-1,-N/2,..,-1}."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    def rfft_wavenumbers(self) -> list[np.ndarray]:
        """Broadcastable wavenumber grids matching the rfftn layout."""
        full = self.axis_wavenumbers()
        half = 2.0 * np.pi * np.fft.rfftfreq(self.N, d=self.h)
        axes = [full] * (self.dim - 1) + [half]
        grids = []
        for i, ax in enumerate(axes):
            sh = [1] * self.dim
            sh[i] = len(ax)
            grids.append(ax.reshape(sh))
        return grids


def make_lattice(dim: int, L: float, N: int) -> LatticeSpec:
    return LatticeSpec(dim=dim, L=float(L), N=int(N))


@dataclass
class Field:
    """Real-valued grid function on a LatticeSpec."""

    lattice: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.lattice.shape:
            raise LatticeMismatchError(
                f"values shape {self.values.shape} != lattice shape {self.lattice.shape}"
            )

    def copy(self) -> "Field":
        return Field(self.lattice, self.values.copy())

    def _check(self, other: "Field") -> None:
        if not isinstance(other, Field):
            raise TypeError("expected a Field")
        if other.lattice != self.lattice:
            raise LatticeMismatchError("fields live on different lattices")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.lattice, self.values + other.values)
        return Field(self.lattice, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.lattice, self.values - other.values)
        return Field(self.lattice, self.values - other)

    def __mul__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.lattice, self.values * other.values)
        return Field(self.lattice, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.lattice, -self.values)

    def l2_norm(self) -> float:
        """Discrete L2 norm sqrt(h^dim * sum f^2)."""
        return float(np.sqrt(self.lattice.cell_measure * np.sum(self.values**2)))

    def inner(self, other: "Field") -> float:
        self._check(other)
        return float(self.lattice.cell_measure * np.sum(self.values * other.values))


def zero_field(lattice: LatticeSpec) -> Field:
    return Field(lattice, np.zeros(lattice.shape))


def constant_field(lattice: LatticeSpec, c: float) -> Field:
    return Field(lattice, np.full(lattice.shape, float(c)))


@dataclass
class SpectralField:
    """Complex DFT coefficients of a Field, full FFT ordering."""

    lattice: LatticeSpec
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.shape != self.lattice.shape:
            raise LatticeMismatchError("coefficient shape does not match lattice")


def to_spectral(f: Field) -> SpectralField:
    return SpectralField(f.lattice, _fft.fftn(f.values, workers=_WORKERS))


def from_spectral(sf: SpectralField) -> Field:
    vals = _fft.ifftn(sf.coefficients, workers=_WORKERS)
    return Field(sf.lattice, vals.real)


def periodic_convolve(f: Field, kernel: Field) -> Field:
    """Exact circular convolution with the cell-measure factor h^dim."""
    if f.lattice != kernel.lattice:
        raise LatticeMismatchError("convolution requires matching lattices")
    lat = f.lattice
    out = _irfftn(_rfftn(f.values) * _rfftn(kernel.values), lat.shape)
    return Field(lat, out * lat.cell_measure)


def spectral_derivative(f: Field, op: str) -> Field:
    """Spectral derivative: op is 'laplacian' or 'grad_i' with 0 <= i < dim.

    Gradients zero the Nyquist plane of the differentiated axis so the result
    of an odd multiplier stays real-symmetric.
    """
    lat = f.lattice
    fh = _rfftn(f.values)
    ks = lat.rfft_wavenumbers()
    if op == "laplacian":
        k2 = sum(k * k for k in ks)
        out = _irfftn(-k2 * fh, lat.shape)
        return Field(lat, out)
    if op.startswith("grad_"):
        i = int(op.split("_", 1)[1])
        if not 0 <= i < lat.dim:
            raise ValueError(f"axis {i} out of range for dim {lat.dim}")
        mult = 1j * ks[i].copy()
        # zero the Nyquist mode of the differentiated axis
        sl = [slice(None)] * lat.dim
        sl[i] = slice(lat.N // 2, lat.N // 2 + 1)
        mult[tuple(sl)] = 0.0
        out = _irfftn(mult * fh, lat.shape)
        return Field(lat, out)
    raise ValueError(f"unknown derivative op {op!r}")


def gradient(f: Field) -> list[Field]:
    return [spectral_derivative(f, f"grad_{i}") for i in range(f.lattice.dim)]


@dataclass(frozen=True)
class Weight:
    """Weight function evaluated at the torus-representative radius.

    kind 'polynomial': (1+|x|)^a, a > 0.  kind 'exponential': exp(l (1+|x|)).
    """

    kind: str
    param: float

    @staticmethod
    def polynomial(a: float) -> "Weight":
        if not a > 0:
            raise ValueError("polynomial weight requires a > 0")
        return Weight("polynomial", float(a))

    @staticmethod
    def exponential(ell: float) -> "Weight":
        return Weight("exponential", float(ell))

    def at_radius(self, r: np.ndarray) -> np.ndarray:
        if self.kind == "polynomial":
            return (1.0 + r) ** self.param
        if self.kind == "exponential":
            return np.exp(self.param * (1.0 + r))
        raise ValueError(f"unknown weight kind {self.kind!r}")


def weight_eval(w: Weight, lattice: LatticeSpec) -> Field:
    return Field(lattice, w.at_radius(lattice.radius()))


def weight_trick_constant(
    a: float,
    lattice: LatticeSpec,
    gaps: Iterable[float] | None = None,
) -> float:
    """Fit the constant C in sup_x p_a(x) e_{l+s}(x) / e_{l+t}(x) <= C (t-s)^-a.

    The rate l cancels from the ratio, which depends on (s, t) only through
    the gap t - s; the sup is taken over the grid and the fit over a dense
    range of gaps, so the returned C makes the bound tight for the worst one.
    """
    if gaps is None:
        gaps = np.geomspace(0.02, 4.0, 40)
    r = lattice.radius()
    pa = (1.0 + r) ** a
    best = 0.0
    for g in gaps:
        if not g > 0:
            raise ValueError("gaps must be positive")
        ratio = pa * np.exp(-g * (1.0 + r))
        best = max(best, float(ratio.max()) * g**a)
    return best


_HEADER = struct.Struct("<IId")  # dim, N, L


def write_field(f: Field, path: str) -> None:
    """Flat binary format: 16-byte header (dim u32, N u32, L f64 LE), then
    N^dim little-endian f64 values in row-major order."""
    lat = f.lattice
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(lat.dim, lat.N, lat.L))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path: str) -> Field:
    with open(path, "rb") as fh:
        dim, N, L = _HEADER.unpack(fh.read(_HEADER.size))
        lat = LatticeSpec(dim=dim, L=L, N=N)
        vals = np.frombuffer(fh.read(), dtype="<f8").reshape(lat.shape)
    return Field(lat, vals.astype(float))


def field_to_csv(f: Field, path: str) -> None:
    """CSV export with one row per site: index columns then the value."""
    lat = f.lattice
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"i{ax}" for ax in range(lat.dim)] + ["value"])
        for idx in np.ndindex(*lat.shape):
            writer.writerow(list(idx) + [f"{f.values[idx]:.17g}"])
