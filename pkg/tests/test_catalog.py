import math
from fractions import Fraction

import numpy as np
import pytest

from legpinch import catalog as cat
from legpinch import cubic_spectrum as cs
from legpinch import immersion as im
from legpinch import tensor_core as tc
from legpinch.errors import DimensionError


@pytest.mark.parametrize(
    "n,norm_sq,theta",
    [(2, 2.0, 1 / math.sqrt(2)), (3, 10.0 / 3.0, 2 / math.sqrt(3)), (5, 28.0 / 5.0, 4 / math.sqrt(5))],
)
def test_calabi_expected_values(n, norm_sq, theta):
    e = cat.calabi_torus(n)
    assert e.expected.norm_sq == pytest.approx(norm_sq, abs=1e-14)
    assert e.expected.theta == pytest.approx(theta, abs=1e-14)
    assert e.expected.minimal and e.expected.legendrian


@pytest.mark.parametrize("n", range(2, 9))
def test_calabi_closed_form_consistency(n):
    e = cat.calabi_torus(n)
    s = e.closed_form_sigma
    assert s.is_traceless()
    assert np.max(np.abs(tc.simons_rhs(s).dense)) <= 1e-10
    assert s.norm_sq() == pytest.approx(e.expected.norm_sq, abs=1e-13)
    # equality in the main pinching condition, exact as rationals
    assert Fraction(n + 2, 1) * Fraction(n - 1, 1) / n == Fraction((n - 1) * (n + 2), n)
    assert (n + 2) / math.sqrt(n) * e.expected.theta == pytest.approx(e.expected.norm_sq, rel=1e-15)


def test_calabi_dimension_error():
    with pytest.raises(DimensionError):
        cat.calabi_torus(1)


@pytest.mark.parametrize("n", [2, 4])
def test_calabi_fd_matches_closed_form(n, rng):
    e = cat.calabi_torus(n)
    u = e.immersion.sample_points(1, rng, margin=0.3)[0]
    sa = im.sigma_at(im.jet(e.immersion, u, h=1e-3, richardson=True))
    sp = cs.theta(sa.sigma)
    assert sp.theta == pytest.approx(e.expected.theta, abs=1e-5)
    assert sa.sigma.norm_sq() == pytest.approx(e.expected.norm_sq, abs=1e-5)
    np.testing.assert_allclose(np.sort(sp.mu), np.sort(e.expected.mu), atol=1e-5)


def test_totally_geodesic_entries(rng):
    for n in (2, 3):
        e = cat.totally_geodesic(n)
        assert e.expected.norm_sq == 0.0
        assert e.expected.theta == 0.0
        assert e.expected.legendrian
        for u in e.immersion.sample_points(100, rng, margin=0.05):
            j = im.jet(e.immersion, u)
            assert im.legendrian_residual(j) <= 1e-12


def test_control_entry(rng):
    e = cat.control_non_legendrian()
    assert e.expected.legendrian is False
    assert e.expected.minimal is None
    assert e.expected.norm_sq is None
    # |F| = 1 everywhere
    for u in e.immersion.sample_points(100, rng):
        assert abs(np.linalg.norm(e.immersion.point(u)) - 1.0) <= 1e-12
    j = im.jet(e.immersion, np.array([0.3, 0.8]))
    assert im.legendrian_residual(j) >= 0.1


def test_registry():
    assert "calabi3" in cat.names()
    assert cat.get("calabi3").immersion.n == 3
    assert cat.get("geodesic4").immersion.n == 4
    assert cat.get("control").name == "control"
    with pytest.raises(KeyError):
        cat.get("klein")


def test_unit_sphere_invariant(rng):
    for name in ("calabi2", "calabi5", "geodesic3", "control"):
        e = cat.get(name)
        for u in e.immersion.sample_points(20, rng):
            f = e.immersion.point(u)
            assert abs(np.linalg.norm(f) - 1.0) <= 1e-12
