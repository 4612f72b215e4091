"""2D driver/enhancement pairs and the machinery built on the truncated
log-kernel.

The kernel G(x) = -ln|x| chi(|x|) / (2 pi) reproduces a delta under -Lap up
to the smooth annulus remainder F.  From a mollified noise sample X this
module forms the enhancement U = |grad(G * X)|^2 - C_eps with the
deterministic constant C_eps, applies additive shifts of the pair, and solves
the small fixed-point problem that drives the pair to a prescribed constant
enhancement through a two-scale random shift.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import radial
from .errors import KernelDomainError, LatticeMismatchError, NoContractionError
from .lattice import (
    Field,
    LatticeSpec,
    gradient,
    periodic_convolve,
    read_field,
    write_field,
)
from .noise import RNG_ID, Mollifier, WhiteNoiseSample, mollify


# ---------------------------------------------------------------------------
# kernel on the lattice


@dataclass
class GreenKernel2D:
    lattice: LatticeSpec
    G: Field
    F: Field

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.int64(self.lattice.N).tobytes())
        h.update(np.float64(self.lattice.L).tobytes())
        h.update(self.G.values.tobytes())
        h.update(self.F.values.tobytes())
        return h.hexdigest()


def build_green_kernel(lattice: LatticeSpec) -> GreenKernel2D:
    """Sample G and F on the displacement grid; the cell containing the
    origin holds the exact cell average of the log singularity.

    Over the origin cell [-h/2, h/2]^2 the average of -ln|x|/(2 pi) is
    -(ln(h/2) + mean of ln|u| over the unit cell) / (2 pi) as long as the
    cutoff is identically 1 there; otherwise falls back to quadrature.
    """
    if lattice.dim != 2:
        raise KernelDomainError("2D kernel requires a 2D lattice")
    if not lattice.L > 4.0:
        raise KernelDomainError(f"need L > 4 to hold the kernel support, got L={lattice.L}")
    r = lattice.displacement_radius()
    G = radial.green2d(r)
    h = lattice.h
    if np.sqrt(2.0) * h / 2.0 < 1.0:
        avg = -(np.log(h / 2.0) + radial.LOG_CELL_AVG_2D) / radial.TWO_PI
    else:
        avg, _ = integrate.dblquad(
            lambda y, x: radial.green2d(np.hypot(x, y)),
            0.0,
            h / 2.0,
            0.0,
            h / 2.0,
            epsabs=1e-12,
        )
        avg /= (h / 2.0) ** 2
    G[(0,) * lattice.dim] = avg
    F = radial.green2d_annulus_remainder(r)
    return GreenKernel2D(lattice=lattice, G=Field(lattice, G), F=Field(lattice, F))


# ---------------------------------------------------------------------------
# renormalization constant


@dataclass(frozen=True)
class RenormConstant2D:
    eps: float
    value: float


def compute_renorm_2d(m: Mollifier, kernel: GreenKernel2D) -> RenormConstant2D:
    """Deterministic quadrature of the gradient energy of G * rho_eps.

    On the lattice this equals the variance of any gradient component pair of
    the convolved noise, so Monte-Carlo estimates of E|grad Y(0)|^2 agree
    with it in expectation exactly.
    """
    if m.lattice != kernel.lattice:
        raise LatticeMismatchError("mollifier and kernel live on different lattices")
    smoothed = periodic_convolve(kernel.G, m.profile)
    lat = m.lattice
    total = 0.0
    for g in gradient(smoothed):
        total += float(np.sum(g.values**2))
    return RenormConstant2D(eps=m.eps, value=total * lat.cell_measure)


# ---------------------------------------------------------------------------
# the enhanced pair


@dataclass
class EnhancedNoise2D:
    """Pair (X, U): driver field and its renormalized gradient-square."""

    X: Field
    U: Field
    eps: float | str
    meta: dict = dc_field(default_factory=dict)

    def lattice(self) -> LatticeSpec:
        return self.X.lattice


def build_enhanced_2d(
    xi: WhiteNoiseSample,
    m: Mollifier,
    kernel: GreenKernel2D,
    C: RenormConstant2D,
) -> EnhancedNoise2D:
    if abs(m.eps - C.eps) > 1e-12:
        raise LatticeMismatchError(f"mollifier eps {m.eps} != renorm eps {C.eps}")
    X = mollify(xi, m)
    Y = periodic_convolve(kernel.G, X)
    gY = gradient(Y)
    U = Field(X.lattice, sum(g.values**2 for g in gY) - C.value)
    meta = {
        "seed": xi.seed,
        "stream": xi.stream,
        "rng": RNG_ID,
        "C_eps": C.value,
        "kernel_hash": kernel.content_hash(),
    }
    return EnhancedNoise2D(X=X, U=U, eps=m.eps, meta=meta)


def shift_T_h(q: EnhancedNoise2D, h: Field, kernel: GreenKernel2D) -> EnhancedNoise2D:
    """Additive shift of the pair:

    (X, U) -> (X + h, U + 2 grad(G*X).grad(G*h) + |grad(G*h)|^2).
    """
    if h.lattice != q.X.lattice:
        raise LatticeMismatchError("shift field lives on a different lattice")
    gX = gradient(periodic_convolve(kernel.G, q.X))
    gh = gradient(periodic_convolve(kernel.G, h))
    cross = sum(a.values * b.values for a, b in zip(gX, gh))
    square = sum(b.values**2 for b in gh)
    return EnhancedNoise2D(
        X=q.X + h,
        U=Field(q.U.lattice, q.U.values + 2.0 * cross + square),
        eps=q.eps,
        meta=dict(q.meta),
    )


# ---------------------------------------------------------------------------
# serialization


def save_enhanced(q: EnhancedNoise2D, prefix: str) -> list[str]:
    paths = [f"{prefix}-X.field", f"{prefix}-U.field", f"{prefix}.json"]
    write_field(q.X, paths[0])
    write_field(q.U, paths[1])
    sidecar = {"epsilon": q.eps}
    for key in ("C_eps", "seed", "stream", "rng", "kernel_hash"):
        sidecar[key] = q.meta.get(key)
    with open(paths[2], "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def load_enhanced(prefix: str) -> EnhancedNoise2D:
    with open(f"{prefix}.json") as fh:
        sidecar = json.load(fh)
    X = read_field(f"{prefix}-X.field")
    U = read_field(f"{prefix}-U.field")
    eps = sidecar.pop("epsilon")
    return EnhancedNoise2D(X=X, U=U, eps=eps, meta=sidecar)


# ---------------------------------------------------------------------------
# radial Fourier side: the cross-energy v and the resonance fixed point
#
# All kernels here are radial, so the lattice plays no role; mollification
# scales far below any realistic grid spacing (lambda = delta^(1/delta))
# stay exactly representable.

_FHAT_KMAX = 256.0
_BUMPHAT_SMAX = 240.0


class KernelSpectra:
    """Cached radial Fourier data for the truncated log-kernel and the bump.

    ghat uses the exact identity k^2 ghat(k) = 1 + Fhat(k) away from k = 0
    and direct quadrature below it; the two branches agree on the overlap.
    """

    def __init__(self, n_grid: int = 6000):
        kf = np.linspace(0.0, _FHAT_KMAX, n_grid)
        self._kf = kf
        self._fhat = radial.ft_radial_2d(radial.green2d_annulus_remainder, 2.0, kf)
        ks = np.linspace(1e-4, 1.2, 600)
        self._ks = ks
        self._ghat_low = radial.ft_radial_2d(radial.green2d, 2.0, ks)
        ss = np.linspace(0.0, _BUMPHAT_SMAX, n_grid)
        self._ss = ss
        self._bhat = radial.ft_radial_2d(lambda r: radial.bump(r, 2), 1.0, ss)

    def fhat(self, k):
        k = np.asarray(k, dtype=float)
        return np.where(k <= _FHAT_KMAX, np.interp(k, self._kf, self._fhat), 0.0)

    def bump_hat(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= _BUMPHAT_SMAX, np.interp(s, self._ss, self._bhat), 0.0)

    def ghat(self, k):
        k = np.asarray(k, dtype=float)
        out = np.empty_like(k)
        low = k < 1.0
        out[low] = np.interp(k[low], self._ks, self._ghat_low)
        out[~low] = (1.0 + self.fhat(k[~low])) / k[~low] ** 2
        return out

    def cross_energy(self, d1: float, d2: float, n_per_decade: int = 400) -> float:
        """v(d1, d2) = int grad(G*rho_d1) . grad(G*rho_d2) dx over R^2.

        Computed as a log-frequency quadrature of
        (2 pi)^-1 k^3 ghat(k)^2 bump_hat(d1 k) bump_hat(d2 k); a zero scale
        argument drops its bump factor.
        """
        dmax = max(d1, d2)
        if dmax <= 0.0:
            raise ValueError("at least one scale must be positive")
        k_lo, k_up = 1e-3, _BUMPHAT_SMAX / dmax
        n = max(200, int(n_per_decade * np.log10(k_up / k_lo)))
        u = np.linspace(np.log(k_lo), np.log(k_up), n)
        k = np.exp(u)
        w = (1.0 + self.fhat(k)) ** 2 / radial.TWO_PI
        # below the spline switch use the direct ghat to avoid cancellation
        low = k < 1.0
        if np.any(low):
            w[low] = k[low] ** 4 * self.ghat(k[low]) ** 2 / radial.TWO_PI
        if d1 > 0.0:
            w = w * self.bump_hat(d1 * k)
        if d2 > 0.0:
            w = w * self.bump_hat(d2 * k)
        return float(np.trapezoid(w, u))


@lru_cache(maxsize=1)
def get_kernel_spectra() -> KernelSpectra:
    return KernelSpectra()


@dataclass
class ResonanceResult:
    delta: float
    lam: float
    a: float
    residual: float
    contraction_factor: float


def resonance_scale(delta: float) -> float:
    """The second shift scale lambda_delta = delta^(1/delta)."""
    lam = delta ** (1.0 / delta)
    if lam < 1e-300 or lam == 0.0:
        raise ValueError(f"lambda underflows for delta={delta}; use delta >= 0.02")
    return lam


def solve_resonance(
    c: float,
    delta: float,
    spectra: KernelSpectra | None = None,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> ResonanceResult:
    """Solve for the small coefficient a_delta driving the shifted pair
    toward the constant enhancement c.

    The scalar fixed point is
        a = [c - v(d,d) + 2 a v(d,l) - a^2 v(l,l) + 2 v(d,0)] / (2 v(l,0))
    with l = delta^(1/delta); iteration stops when successive iterates agree
    to `tol`.  Raises NoContractionError when no contraction is observed.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    sp = spectra if spectra is not None else get_kernel_spectra()
    lam = resonance_scale(delta)
    v_dd = sp.cross_energy(delta, delta)
    v_dl = sp.cross_energy(delta, lam)
    v_ll = sp.cross_energy(lam, lam)
    v_d0 = sp.cross_energy(delta, 0.0)
    v_l0 = sp.cross_energy(lam, 0.0)

    def m_of(a: float) -> float:
        return (c - v_dd + 2.0 * a * v_dl - a * a * v_ll + 2.0 * v_d0) / (2.0 * v_l0)

    a = 0.0
    for _ in range(max_iter):
        a_next = m_of(a)
        if not np.isfinite(a_next):
            raise NoContractionError(f"iteration diverged at delta={delta}")
        if abs(a_next - a) < tol:
            a = a_next
            break
        a = a_next
    else:
        raise NoContractionError(f"no convergence within {max_iter} iterations at delta={delta}")
    factor = abs(2.0 * v_dl - 2.0 * a * v_ll) / (2.0 * v_l0)
    if factor >= 1.0:
        raise NoContractionError(f"contraction factor {factor:.3f} >= 1 at delta={delta}")
    residual = abs(c - (v_dd - 2.0 * a * v_dl + a * a * v_ll - 2.0 * v_d0 + 2.0 * a * v_l0))
    return ResonanceResult(
        delta=delta, lam=lam, a=a, residual=residual, contraction_factor=factor
    )


def resonance_sweep(
    c: float, deltas, spectra: KernelSpectra | None = None
) -> tuple[list[ResonanceResult], float]:
    """Run solve_resonance over a delta sweep; returns results and the single
    envelope constant R0 = max |a_delta| / delta."""
    sp = spectra if spectra is not None else get_kernel_spectra()
    results = [solve_resonance(c, d, sp) for d in deltas]
    r0 = max(abs(res.a) / res.delta for res in results)
    return results, r0
