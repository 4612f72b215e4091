"""Lattice substrate: construction contracts, FFT algebra, weights, serialization."""

import numpy as np
import pytest

from pamlab import radial
from pamlab.errors import (
    DimensionError,
    LatticeMismatchError,
    NonPowerOfTwoError,
)
from pamlab.lattice import (
    Field,
    LatticeSpec,
    Weight,
    constant_field,
    field_to_csv,
    gradient,
    make_lattice,
    periodic_convolve,
    read_field,
    spectral_derivative,
    to_spectral,
    weight_eval,
    weight_trick_constant,
    write_field,
    zero_field,
)


def rand_field(lat, seed=0):
    rng = np.random.default_rng(seed)
    return Field(lat, rng.standard_normal(lat.shape))


# ---------------------------------------------------------------------------
# construction


def test_make_lattice_2d_spacing():
    spec = make_lattice(2, 16.0, 64)
    assert spec.h == 0.25


def test_make_lattice_3d_spacing():
    spec = make_lattice(3, 8.0, 16)
    assert spec.h == 0.5


def test_make_lattice_rejects_non_power_of_two():
    with pytest.raises(NonPowerOfTwoError):
        make_lattice(2, 16.0, 63)


def test_make_lattice_rejects_bad_dim():
    with pytest.raises(DimensionError):
        make_lattice(4, 16.0, 64)
    with pytest.raises(DimensionError):
        make_lattice(1, 16.0, 64)


def test_cell_centers_avoid_origin():
    spec = make_lattice(2, 8.0, 32)
    assert np.abs(spec.axis_coords()).min() > 0


def test_displacement_grid_contains_origin_and_reflects():
    spec = make_lattice(2, 8.0, 32)
    d = spec.axis_displacements()
    assert d[0] == 0.0
    m = np.arange(1, spec.N)
    m = m[m != spec.N // 2]  # the Nyquist point is its own reflection mod L
    assert np.array_equal(d[(spec.N - m) % spec.N], -d[m])


# ---------------------------------------------------------------------------
# convolution


def test_convolve_delta_identity():
    lat = make_lattice(2, 4.0, 16)
    f = rand_field(lat, 1)
    delta = zero_field(lat)
    delta.values[3, 5] = 1.0 / lat.cell_measure
    out = periodic_convolve(f, delta)
    assert np.allclose(out.values, np.roll(f.values, (3, 5), axis=(0, 1)), atol=1e-12)


def test_convolve_mass_preservation():
    lat = make_lattice(2, 4.0, 16)
    kern = rand_field(lat, 2)
    kern.values = np.abs(kern.values)
    kern.values /= kern.values.sum() * lat.cell_measure
    out = periodic_convolve(constant_field(lat, 3.7), kern)
    assert np.allclose(out.values, 3.7, atol=1e-12)


def test_convolve_matches_direct_double_loop():
    lat = make_lattice(2, 4.0, 16)
    f = rand_field(lat, 3)
    g = rand_field(lat, 4)
    out = periodic_convolve(f, g)
    N = lat.N
    direct = np.zeros((N, N))
    for i in range(N):
        for j in range(N):
            acc = 0.0
            for a in range(N):
                for b in range(N):
                    acc += f.values[a, b] * g.values[(i - a) % N, (j - b) % N]
            direct[i, j] = acc * lat.cell_measure
    assert np.max(np.abs(out.values - direct)) <= 1e-10 * np.max(np.abs(direct))


def test_convolve_commutes():
    lat = make_lattice(2, 4.0, 32)
    f, g = rand_field(lat, 5), rand_field(lat, 6)
    a = periodic_convolve(f, g).values
    b = periodic_convolve(g, f).values
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))


def test_convolve_rejects_lattice_mismatch():
    f = rand_field(make_lattice(2, 4.0, 16))
    g = rand_field(make_lattice(2, 4.0, 32))
    with pytest.raises(LatticeMismatchError):
        periodic_convolve(f, g)


# ---------------------------------------------------------------------------
# spectral derivatives


def test_laplacian_eigenfunction():
    lat = make_lattice(2, 8.0, 64)
    x = lat.coords()[0]
    f = Field(lat, np.sin(2 * np.pi * x / lat.L))
    lap = spectral_derivative(f, "laplacian")
    expect = -((2 * np.pi / lat.L) ** 2) * f.values
    assert np.max(np.abs(lap.values - expect)) <= 1e-12 * np.max(np.abs(expect))


def test_gradient_of_constant_is_zero():
    lat = make_lattice(3, 4.0, 16)
    g = gradient(constant_field(lat, 2.0))
    for comp in g:
        assert np.max(np.abs(comp.values)) <= 1e-12


def test_gradient_vs_centered_differences_single_mode():
    # For f = sin(k x), centered differences give cos(k x) sin(k h)/h; the
    # spectral gradient gives k cos(k x).  Their gap is the analytic
    # second-order term, checked exactly at two resolutions.
    for N in (32, 64):
        lat = make_lattice(2, 8.0, N)
        x = lat.coords()[0]
        k = 3 * 2 * np.pi / lat.L
        f = Field(lat, np.sin(k * x))
        spec = spectral_derivative(f, "grad_0").values
        fd = (np.roll(f.values, -1, axis=0) - np.roll(f.values, 1, axis=0)) / (2 * lat.h)
        gap = np.max(np.abs(spec - fd))
        predicted = np.max(np.abs(np.cos(k * x))) * k * (1 - np.sin(k * lat.h) / (k * lat.h))
        assert abs(gap - predicted) <= 1e-10
        assert gap <= (k**3 * lat.h**2) / 6 * 1.01


def test_laplacian_has_zero_mean():
    lat = make_lattice(2, 4.0, 32)
    lap = spectral_derivative(rand_field(lat, 7), "laplacian")
    assert abs(lap.values.mean()) <= 1e-10


# ---------------------------------------------------------------------------
# Parseval and spectral round trip


def test_parseval():
    lat = make_lattice(2, 4.0, 32)
    f = rand_field(lat, 8)
    sf = to_spectral(f)
    lhs = lat.cell_measure * np.sum(f.values**2)
    rhs = lat.cell_measure / lat.n_sites * np.sum(np.abs(sf.coefficients) ** 2)
    assert abs(lhs - rhs) <= 1e-12 * lhs


def test_spectral_conjugate_symmetry():
    lat = make_lattice(2, 4.0, 16)
    c = to_spectral(rand_field(lat, 9)).coefficients
    flipped = c[(-np.arange(lat.N)) % lat.N][:, (-np.arange(lat.N)) % lat.N]
    assert np.max(np.abs(c - np.conj(flipped))) <= 1e-12 * np.max(np.abs(c))


# ---------------------------------------------------------------------------
# weights


def test_polynomial_weight_values():
    lat = make_lattice(2, 16.0, 64)
    w = weight_eval(Weight.polynomial(2.0), lat)
    r = lat.radius()
    # (1+0)^a at the nearest-to-origin site up to the half-cell offset
    assert w.values.min() >= 1.0
    i = np.unravel_index(np.argmin(r), r.shape)
    assert np.isclose(w.values[i], (1 + r[i]) ** 2, atol=0)
    # closed-form check at |x| = 3
    mask = np.isclose(r, 3.0, atol=1e-12)
    if mask.any():
        assert np.allclose(w.values[mask], 16.0)


def test_polynomial_weight_formula_values():
    w = Weight.polynomial(2.0)
    assert w.at_radius(np.array(0.0)) == 1.0
    assert w.at_radius(np.array(3.0)) == 16.0


def test_exponential_weight_zero_rate_is_one():
    lat = make_lattice(2, 8.0, 16)
    w = weight_eval(Weight.exponential(0.0), lat)
    assert np.allclose(w.values, 1.0, atol=0)


def test_weight_trick_inequality_holds_on_other_grids():
    a = 1.5
    ref = make_lattice(2, 16.0, 64)
    C = weight_trick_constant(a, ref)
    for lat in (make_lattice(2, 8.0, 32), make_lattice(2, 16.0, 128)):
        r = lat.radius()
        for s, t in ((0.0, 0.5), (0.1, 0.9), (0.25, 2.0)):
            sup = np.max((1 + r) ** a * np.exp(-(t - s) * (1 + r)))
            assert sup <= C * (t - s) ** (-a) * (1 + 1e-12)


def test_weight_trick_fit_is_tight_on_reference_grid():
    a = 1.5
    ref = make_lattice(2, 16.0, 64)
    gaps = np.geomspace(0.02, 4.0, 40)
    C = weight_trick_constant(a, ref, gaps=gaps)
    r = ref.radius()
    sups = [np.max((1 + r) ** a * np.exp(-g * (1 + r))) * g**a for g in gaps]
    assert np.isclose(max(sups), C)


# ---------------------------------------------------------------------------
# serialization


def test_field_binary_round_trip(tmp_path):
    lat = make_lattice(2, 4.0, 16)
    f = rand_field(lat, 10)
    path = str(tmp_path / "f.field")
    write_field(f, path)
    g = read_field(path)
    assert g.lattice == lat
    assert np.array_equal(g.values, f.values)


def test_field_binary_header_layout(tmp_path):
    lat = make_lattice(3, 8.0, 8)
    f = zero_field(lat)
    path = str(tmp_path / "f.field")
    write_field(f, path)
    raw = open(path, "rb").read()
    assert len(raw) == 16 + 8 * lat.n_sites
    assert int.from_bytes(raw[0:4], "little") == 3
    assert int.from_bytes(raw[4:8], "little") == 8
    assert np.frombuffer(raw[8:16], dtype="<f8")[0] == 8.0


def test_field_csv_export(tmp_path):
    lat = make_lattice(2, 4.0, 8)
    f = rand_field(lat, 11)
    path = str(tmp_path / "f.csv")
    field_to_csv(f, path)
    lines = open(path).read().strip().split("\n")
    assert lines[0] == "i0,i1,value"
    assert len(lines) == 1 + lat.n_sites


# ---------------------------------------------------------------------------
# cell-average constants used by the kernels


def test_log_cell_average_constant_against_quadrature():
    from scipy import integrate

    val, _ = integrate.dblquad(
        lambda y, x: np.log(np.hypot(x, y)), 0.0, 1.0, 0.0, 1.0, epsabs=1e-12
    )
    assert abs(val - radial.LOG_CELL_AVG_2D) <= 1e-10


def test_inv_cell_average_constant_against_quadrature():
    from scipy import integrate

    def inner(y, x):
        s2 = x * x + y * y
        return np.log((1.0 + np.sqrt(s2 + 1.0)) / np.sqrt(s2))

    val, _ = integrate.dblquad(inner, 0.0, 1.0, 0.0, 1.0, epsabs=1e-12)
    assert abs(val - radial.INV_CELL_AVG_3D) <= 1e-10
