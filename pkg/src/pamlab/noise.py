"""White-noise sampling, mollifiers and exact lattice shifts.

Sampling uses the counter-based Philox generator keyed by (seed, stream), so
any (seed, stream) pair reproduces the same field regardless of how many
other streams were drawn, in what order, or on how many workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import radial
from .errors import LatticeMismatchError, NonLatticeShiftError, UnresolvedMollifierError
from .lattice import Field, LatticeSpec, periodic_convolve

RNG_ID = "numpy-philox4x64:standard_normal:v1"

#: minimum number of cells across the mollifier half-width; configurable per
#: call, the default keeps gradient quadratures of convolved kernels honest.
DEFAULT_MIN_CELLS = 4.0


@dataclass
class WhiteNoiseSample:
    """I.i.d. N(0, 1/h^dim) site values: unit-variance pairings with L2-normalized
    test functions."""

    field: Field
    seed: int
    stream: int


def sample_white_noise(lattice: LatticeSpec, seed: int, stream: int = 0) -> WhiteNoiseSample:
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))
    values = rng.standard_normal(lattice.shape) / lattice.h ** (lattice.dim / 2.0)
    return WhiteNoiseSample(field=Field(lattice, values), seed=seed, stream=stream)


@dataclass
class Mollifier:
    """Scaled unit-mass bump eps^-d rho(x/eps), normalized to discrete mass 1.

    The profile is a convolution kernel, so it is sampled on the displacement
    grid (origin at index 0).
    """

    lattice: LatticeSpec
    eps: float
    profile: Field


def make_mollifier(
    lattice: LatticeSpec, eps: float, min_cells: float = DEFAULT_MIN_CELLS
) -> Mollifier:
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if eps < min_cells * lattice.h:
        raise UnresolvedMollifierError(
            f"eps={eps} below {min_cells} cells (h={lattice.h}); "
            f"pass min_cells explicitly to relax"
        )
    r = lattice.displacement_radius()
    vals = radial.bump(r / eps, lattice.dim) / eps**lattice.dim
    mass = vals.sum() * lattice.cell_measure
    vals = vals / mass
    return Mollifier(lattice=lattice, eps=float(eps), profile=Field(lattice, vals))


def mollify(xi: WhiteNoiseSample, m: Mollifier) -> Field:
    if xi.field.lattice != m.lattice:
        raise LatticeMismatchError("noise and mollifier live on different lattices")
    return periodic_convolve(xi.field, m.profile)


def shift_field(f: Field, shift: Sequence[int]) -> Field:
    """Cyclic shift by whole cells: the result at site y holds the old value
    at y - shift (exact permutation, no arithmetic)."""
    shift = tuple(shift)
    if len(shift) != f.lattice.dim:
        raise NonLatticeShiftError(f"need {f.lattice.dim} components, got {len(shift)}")
    for s in shift:
        if int(s) != s:
            raise NonLatticeShiftError(f"non-integer cell shift {s}")
    return Field(f.lattice, np.roll(f.values, tuple(int(s) for s in shift), axis=tuple(range(f.lattice.dim))))
