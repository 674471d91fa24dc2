import numpy as np
import pytest
from fractions import Fraction

from dirstft import (
    LatticeMismatch,
    SampledField,
    dual_lattice,
    inner_product,
    make_lattice,
    riemann_integral,
)


def test_points_example():
    lat = make_lattice([-1.0], [0.5], [4])
    np.testing.assert_array_equal(lat.axis_points(0), [-1.0, -0.5, 0.0, 0.5])


def test_dual_example_1d():
    lat = make_lattice([0.0], [0.1], [100])
    freq = dual_lattice(lat)
    assert freq.step[0] == pytest.approx(0.1)
    assert freq.nyquist[0] == pytest.approx(5.0)


def test_dual_example_2d():
    lat = make_lattice([0.0, 0.0], [0.5, 0.25], [8, 16])
    freq = dual_lattice(lat)
    np.testing.assert_allclose(freq.step, [0.25, 0.25])


def test_dual_product_exact_in_rational_arithmetic():
    # holds even for steps with no exact binary representation
    lat = make_lattice([0.0], [0.1], [100])
    freq = dual_lattice(lat)
    assert freq.step_exact[0] * Fraction(0.1) * 100 == 1


@pytest.mark.parametrize("origin,step,count", [
    ([0.0], [0.0], [4]),
    ([0.0], [-0.5], [4]),
    ([0.0], [0.5], [1]),
])
def test_make_lattice_rejects_bad_input(origin, step, count):
    with pytest.raises(ValueError):
        make_lattice(origin, step, count)


def test_index_point_roundtrip_exact():
    lat = make_lattice([-1.0, 2.0], [0.1, 0.25], [50, 8])
    for j in [(0, 0), (7, 3), (49, 7), (13, 5)]:
        assert tuple(lat.index(lat.point(j))) == j


def test_riemann_zero_and_constant():
    lat = make_lattice([0.0], [0.1], [10])
    zero = SampledField(lat, np.zeros(10, complex))
    assert riemann_integral(zero) == 0
    const = SampledField(lat, np.ones(10, complex))
    assert riemann_integral(const) == pytest.approx(1.0, abs=1e-15)


def test_riemann_gaussian_against_fine_quadrature():
    # standard bivariate normal integrates to 1; oracle at step/4
    def gaussian_integral(step):
        n = int(round(16 / step))
        lat = make_lattice([-8.0, -8.0], [step, step], [n, n])
        pts = lat.points()
        vals = np.exp(-np.sum(pts**2, axis=-1) / 2) / (2 * np.pi)
        return riemann_integral(SampledField(lat, vals.astype(complex)))

    coarse = gaussian_integral(0.0625)
    fine = gaussian_integral(0.0625 / 4)
    assert abs(coarse - fine) < 1e-10
    assert abs(coarse - 1.0) < 1e-10


def test_riemann_linearity():
    rng = np.random.default_rng(7)
    lat = make_lattice([0.0], [0.3], [17])
    a = SampledField(lat, rng.standard_normal(17) + 1j * rng.standard_normal(17))
    b = SampledField(lat, rng.standard_normal(17) + 1j * rng.standard_normal(17))
    al, be = 1.7 - 0.3j, -0.2 + 2.2j
    combo = SampledField(lat, al * a.values + be * b.values)
    lhs = riemann_integral(combo)
    rhs = al * riemann_integral(a) + be * riemann_integral(b)
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_inner_product_norm_and_symmetry():
    rng = np.random.default_rng(11)
    lat = make_lattice([0.0, 0.0], [0.5, 0.5], [6, 4])
    a = SampledField(lat, rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4)))
    b = SampledField(lat, rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4)))
    aa = inner_product(a, a)
    assert aa.imag == pytest.approx(0.0, abs=1e-14)
    assert aa.real == pytest.approx(a.norm_l2**2, rel=1e-12)
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)))


def test_inner_product_orthogonal_exponentials():
    # two DFT bins over a full period
    lat = make_lattice([0.0], [1.0 / 32], [32])
    t = lat.axis_points(0)
    e1 = SampledField(lat, np.exp(2j * np.pi * 3 * t))
    e2 = SampledField(lat, np.exp(2j * np.pi * 5 * t))
    assert abs(inner_product(e1, e2)) < 1e-12


def test_inner_product_unit_gaussian():
    # unit-L2 gaussian paired with itself, against a finer quadrature
    def ip(step):
        n = int(round(16 / step))
        lat = make_lattice([-8.0], [step], [n])
        t = lat.axis_points(0)
        g = SampledField(lat, (np.pi ** -0.25) * np.exp(-t**2 / 2) + 0j)
        return inner_product(g, g)

    assert abs(ip(1.0 / 16) - 1.0) < 1e-8
    assert abs(ip(1.0 / 16) - ip(1.0 / 64)) < 1e-10


def test_inner_product_lattice_mismatch():
    a = SampledField(make_lattice([0.0], [0.5], [4]), np.ones(4, complex))
    b = SampledField(make_lattice([0.0], [0.25], [4]), np.ones(4, complex))
    with pytest.raises(LatticeMismatch):
        inner_product(a, b)


def test_field_shape_validation():
    lat = make_lattice([0.0], [0.5], [4])
    with pytest.raises(ValueError):
        SampledField(lat, np.ones(5, complex))


def test_real_values_promoted_to_complex():
    lat = make_lattice([0.0], [0.5], [4])
    f = SampledField(lat, np.arange(4, dtype=float))
    assert f.values.dtype == np.complex128
    assert f.is_real()
