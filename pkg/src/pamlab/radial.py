"""Closed-form radial profiles shared by the kernel and mollifier machinery.

Everything here is a plain function of the radius, vectorised over numpy
arrays.  The smooth step ``smooth_step`` and the cutoff ``chi`` have exact
analytic first and second derivatives, which is what makes the annulus
remainders of the truncated Green kernels available in closed form.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * np.pi

# Exact cell averages of the kernel singularities over the unit cell touching
# the origin; both verified against adaptive quadrature in the test suite.
#   LOG_CELL_AVG_2D = mean of ln|u| over [0,1]^2
#   INV_CELL_AVG_3D = mean of 1/|u| over [0,1]^3
LOG_CELL_AVG_2D = (np.log(2.0) + np.pi / 2.0 - 3.0) / 2.0
INV_CELL_AVG_3D = (3.0 * np.log(2.0 + np.sqrt(3.0)) - np.pi / 2.0) / 2.0


def _phi(t: np.ndarray) -> np.ndarray:
    # clipped so exp(phi) saturates instead of overflowing
    return np.clip(1.0 / t - 1.0 / (1.0 - t), -700.0, 700.0)


def smooth_step(t):
    """C^inf step: 0 for t <= 0, 1 for t >= 1, strictly increasing between."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    m = (t > 0.0) & (t < 1.0)
    out[m] = 1.0 / (1.0 + np.exp(_phi(t[m])))
    return out


def smooth_step_d1(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = (t > 0.0) & (t < 1.0)
    tm = t[m]
    s = 1.0 / (1.0 + np.exp(_phi(tm)))
    dphi = -1.0 / tm**2 - 1.0 / (1.0 - tm) ** 2
    out[m] = -dphi * s * (1.0 - s)
    return out


def smooth_step_d2(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = (t > 0.0) & (t < 1.0)
    tm = t[m]
    s = 1.0 / (1.0 + np.exp(_phi(tm)))
    dphi = -1.0 / tm**2 - 1.0 / (1.0 - tm) ** 2
    d2phi = 2.0 / tm**3 - 2.0 / (1.0 - tm) ** 3
    ds = -dphi * s * (1.0 - s)
    out[m] = -d2phi * s * (1.0 - s) - dphi * ds * (1.0 - 2.0 * s)
    return out


def chi(r):
    """Radial cutoff: 1 on [0,1], smooth descent on (1,2), 0 from 2 on."""
    r = np.asarray(r, dtype=float)
    return 1.0 - smooth_step(r - 1.0)


def chi_d1(r):
    return -smooth_step_d1(np.asarray(r, dtype=float) - 1.0)


def chi_d2(r):
    return -smooth_step_d2(np.asarray(r, dtype=float) - 1.0)


def green2d(r):
    """Truncated log kernel -ln(r) chi(r) / (2 pi); singular at r = 0."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        g = -np.log(r) / TWO_PI
    return np.where(r >= 2.0, 0.0, g * chi(r))


def green2d_annulus_remainder(r):
    """The smooth function F with -Lap(green2d) = delta_0 + F.

    Supported in the annulus 1 <= r <= 2, where the radial Laplacian of the
    product g(r) chi(r) with harmonic g(r) = -ln(r)/(2 pi) reduces to
    2 g' chi' + g (chi'' + chi'/r).
    """
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    m = (r > 1.0) & (r < 2.0)
    rm = r[m]
    g = -np.log(rm) / TWO_PI
    dg = -1.0 / (TWO_PI * rm)
    c1 = chi_d1(rm)
    c2 = chi_d2(rm)
    out[m] = -(2.0 * dg * c1 + g * (c2 + c1 / rm))
    return out


def green3d(r):
    """Truncated Newton kernel chi(r) / (4 pi r); singular at r = 0."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        g = 1.0 / (4.0 * np.pi * r)
    return np.where(r >= 2.0, 0.0, g * chi(r))


def green3d_annulus_remainder(r):
    """F with -Lap(green3d) = delta_0 + F; supported in 1 <= r <= 2."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    m = (r > 1.0) & (r < 2.0)
    rm = r[m]
    g = 1.0 / (4.0 * np.pi * rm)
    dg = -1.0 / (4.0 * np.pi * rm**2)
    c1 = chi_d1(rm)
    c2 = chi_d2(rm)
    out[m] = -(2.0 * dg * c1 + g * (c2 + 2.0 * c1 / rm))
    return out


def bump_unnormalized(r):
    """exp(-1/(1-r^2)) on r < 1, zero outside."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    m = r < 1.0
    out[m] = np.exp(-1.0 / (1.0 - r[m] ** 2))
    return out


@lru_cache(maxsize=None)
def bump_norm_constant(dim: int) -> float:
    """Constant c with integral of c*exp(-1/(1-|x|^2)) over R^dim equal to 1."""
    if dim == 2:
        val, _ = integrate.quad(lambda r: np.exp(-1.0 / (1.0 - r * r)) * r, 0.0, 1.0)
        return 1.0 / (TWO_PI * val)
    if dim == 3:
        val, _ = integrate.quad(lambda r: np.exp(-1.0 / (1.0 - r * r)) * r * r, 0.0, 1.0)
        return 1.0 / (4.0 * np.pi * val)
    raise ValueError(f"dim must be 2 or 3, got {dim}")


def bump(r, dim: int):
    """Unit-mass bump profile on the unit ball of R^dim."""
    return bump_norm_constant(dim) * bump_unnormalized(r)


def _gauss_nodes(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def ft_radial_2d(profile, rmax: float, k, n_nodes: int = 4096):
    """Fourier transform of a radial function of R^2 at radial frequencies k.

    fhat(k) = 2 pi * int_0^rmax profile(r) J0(k r) r dr, vectorised over k.
    """
    from scipy.special import j0

    r, w = _gauss_nodes(0.0, rmax, n_nodes)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    return TWO_PI * j0(np.outer(k, r)) @ (profile(r) * r * w)


def ft_radial_3d(profile, rmax: float, k, n_nodes: int = 4096):
    """Fourier transform of a radial function of R^3 at radial frequencies k.

    fhat(k) = 4 pi * int_0^rmax profile(r) sinc(k r) r^2 dr with
    sinc(x) = sin(x)/x.
    """
    r, w = _gauss_nodes(0.0, rmax, n_nodes)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    pr = profile(r) * r * r * w
    kr = np.outer(k, r)
    sinc = np.ones_like(kr)
    nz = kr != 0.0
    sinc[nz] = np.sin(kr[nz]) / kr[nz]
    return 4.0 * np.pi * sinc @ pr
