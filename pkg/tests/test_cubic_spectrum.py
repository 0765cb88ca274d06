import math

import numpy as np
import pytest

from legpinch import cubic_spectrum as cs
from legpinch import tensor_core as tc
from legpinch.errors import ConvergenceError, DimensionError

from conftest import calabi_sigma


def _zero3():
    return tc.sym3_from_entries(3, {})


def test_cubic_form_values():
    s = calabi_sigma(3)
    assert cs.cubic_form(s, np.array([1.0, 0.0, 0.0])) == pytest.approx(2 / math.sqrt(3), abs=1e-15)
    assert cs.cubic_form(s, np.array([0.0, 1.0, 0.0])) == 0.0
    assert cs.cubic_form(s, np.zeros(3)) == 0.0


def test_cubic_form_odd(rng):
    s = tc.random_traceless(4, rng)
    x = rng.standard_normal(4)
    assert cs.cubic_form(s, -x) == pytest.approx(-cs.cubic_form(s, x), rel=1e-12)


def test_cubic_form_dimension_error():
    with pytest.raises(DimensionError):
        cs.cubic_form(calabi_sigma(3), np.ones(4))


def test_theta_zero_tensor():
    sp = cs.theta(_zero3())
    assert sp.theta == 0.0
    np.testing.assert_array_equal(sp.e1, [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(sp.basis, np.eye(3))


@pytest.mark.parametrize("n", range(2, 9))
def test_theta_calabi(n):
    sp = cs.theta(calabi_sigma(n))
    expect = (n - 1) / math.sqrt(n)
    assert sp.theta == pytest.approx(expect, abs=1e-8)
    assert sp.lagrange_residual <= 1e-8
    mu_expect = np.array([expect] + [-1 / math.sqrt(n)] * (n - 1))
    np.testing.assert_allclose(sp.mu, mu_expect, atol=1e-8)
    assert sp.mu[0] == pytest.approx(sp.theta)
    # adapted basis is orthonormal with e1 first
    np.testing.assert_allclose(sp.basis @ sp.basis.T, np.eye(n), atol=1e-12)
    np.testing.assert_allclose(sp.basis[0], sp.e1)
    # slice in adapted basis is diagonal
    a = np.einsum("ijk,i->jk", calabi_sigma(n).dense, sp.e1)
    diag = sp.basis @ a @ sp.basis.T
    np.testing.assert_allclose(diag, np.diag(sp.mu), atol=1e-8)


def test_theta_oracle_mode(rng):
    s = tc.random_traceless(3, rng)
    sp = cs.theta(s, oracle=True)
    assert sp.theta > 0.0


def test_theta_matches_bruteforce(rng):
    for _ in range(10):
        s = tc.random_traceless(3, rng)
        sp = cs.theta(s)
        ref = cs.theta_bruteforce(s)
        assert abs(sp.theta - ref) <= 1e-4 * max(ref, 1.0)


def test_theta_homogeneity_and_negation(rng):
    s = tc.random_traceless(4, rng)
    sp = cs.theta(s)
    up = cs.theta(tc.SymCubic(4, 3.0 * s.distinct))
    assert up.theta == pytest.approx(3.0 * sp.theta, rel=1e-10)
    assert np.linalg.norm(up.e1 - sp.e1) <= 1e-6 or np.linalg.norm(up.e1 + sp.e1) <= 1e-6
    neg = cs.theta(tc.SymCubic(4, -s.distinct))
    assert neg.theta == pytest.approx(sp.theta, rel=1e-10)
    assert np.linalg.norm(neg.e1 + sp.e1) <= 1e-6


def test_theta_orthogonal_invariance(rng):
    # quantified module property: 1e3 random (tensor, rotation) pairs
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 5))
        s = tc.random_traceless(n, rng)
        q = np.linalg.qr(rng.standard_normal((n, n)))[0]
        a = cs.theta(s, starts=16).theta
        b = cs.theta(cs.conjugate(s, q), starts=16).theta
        worst = max(worst, abs(a - b) / max(abs(a), 1e-30))
    assert worst <= 1e-8


def test_mu_sums_to_slice_trace(rng):
    for n in (3, 5):
        s = tc.random_traceless(n, rng)
        sp = cs.theta(s)
        assert abs(np.sum(sp.mu)) <= 1e-10
        assert sp.mu[0] >= 2.0 * sp.mu[1] - 1e-8
    # general tensors: mu sums to the trace of the slice at the maximizer
    raw = tc.SymCubic(4, np.random.default_rng(3).standard_normal(tc.distinct_count(4)))
    sp = cs.theta(raw)
    slice_trace = float(np.trace(np.einsum("ijk,i->jk", raw.dense, sp.e1)))
    assert np.sum(sp.mu) == pytest.approx(slice_trace, abs=1e-10)


def test_beta_sandwich(rng):
    for _ in range(50):
        s = tc.random_traceless(3, rng)
        sp = cs.theta(s)
        beta = sp.mu[0] ** 2 + 3.0 * np.sum(sp.mu[1:] ** 2)
        assert beta <= s.norm_sq() + 1e-9
        assert beta >= (3 + 2) / (3 - 1) * sp.theta**2 - 1e-9


def test_bruteforce_zero_and_calabi():
    assert cs.theta_bruteforce(_zero3()) == 0.0
    assert cs.theta_bruteforce(calabi_sigma(2)) == pytest.approx(1 / math.sqrt(2), abs=1e-6)


def test_bruteforce_n2_against_trig_oracle(rng):
    # independent closed-form-style oracle: dense angle grid plus golden polish
    from scipy.optimize import minimize_scalar

    for _ in range(5):
        s = tc.random_traceless(2, rng)

        def f(t):
            x = np.array([math.cos(t), math.sin(t)])
            return -cs.cubic_form(s, x)

        ts = np.linspace(0.0, 2 * math.pi, 20001)
        vals = np.array([-f(t) for t in ts])
        t0 = ts[np.argmax(vals)]
        res = minimize_scalar(f, bracket=(t0 - 1e-3, t0, t0 + 1e-3), options={"xtol": 1e-14})
        oracle = -res.fun
        assert cs.theta_bruteforce(s) == pytest.approx(oracle, abs=1e-8)


def test_bruteforce_dimension_error():
    with pytest.raises(DimensionError):
        cs.theta_bruteforce(calabi_sigma(5))


def test_canonical3_calabi():
    c = cs.canonical3(calabi_sigma(3))
    assert c.lambda1 == pytest.approx(1 / math.sqrt(3), abs=1e-8)
    assert c.lambda2 == pytest.approx(1 / math.sqrt(3), abs=1e-8)
    assert c.mu1 == pytest.approx(0.0, abs=1e-8)
    assert c.mu2 == pytest.approx(0.0, abs=1e-8)
    assert (c.x, c.y, c.z) == pytest.approx((4.0 / 3.0, 0.0, 0.0), abs=1e-8)
    assert c.theta == pytest.approx(2 / math.sqrt(3), abs=1e-8)


def test_canonical3_zero():
    c = cs.canonical3(_zero3())
    assert (c.lambda1, c.lambda2, c.mu1, c.mu2) == (0.0, 0.0, 0.0, 0.0)


def test_canonical3_roundtrip(rng):
    worst = 0.0
    for _ in range(1000):
        s = tc.random_traceless(3, rng)
        c = cs.canonical3(s)
        back = cs.reconstruct_canonical3(c)
        worst = max(worst, float(np.max(np.abs(back.dense - s.dense))))
    assert worst <= 1e-9


def test_canonical3_structure(rng):
    s = tc.random_traceless(3, rng)
    c = cs.canonical3(s)
    r = cs.conjugate(s, c.rotation)
    # displayed slice pattern: rotated entries beyond the four parameters vanish
    assert abs(r.get(1, 1, 2)) <= 1e-8
    assert abs(r.get(1, 1, 3)) <= 1e-8
    assert abs(r.get(1, 2, 3)) <= 1e-8
    assert r.get(1, 2, 2) == pytest.approx(-c.lambda1, abs=1e-12)
    assert r.get(1, 3, 3) == pytest.approx(-c.lambda2, abs=1e-12)
    assert r.get(2, 3, 3) == pytest.approx(-c.mu1, abs=1e-10)
    assert r.get(3, 3, 3) == pytest.approx(-c.mu2, abs=1e-10)
    # norm identity in (x, y, z)
    assert c.norm_sq == pytest.approx(s.norm_sq(), abs=1e-8)
    inv = tc.invariants(s)
    assert c.gram == pytest.approx(inv.gram, abs=1e-7)
    assert c.theta == pytest.approx(cs.theta(s).theta, abs=1e-10)


def test_canonical3_errors(rng):
    with pytest.raises(DimensionError):
        cs.canonical3(tc.random_traceless(4, rng))
    from legpinch.errors import TraceError

    with pytest.raises(TraceError):
        cs.canonical3(tc.sym3_from_entries(3, {(1, 1, 1): 1.0}))


def test_multiplicity_calabi_and_zero():
    assert cs.multiplicity_one(calabi_sigma(3)) is True
    assert cs.multiplicity_one(_zero3()) is False


def test_multiplicity_flips_along_degenerating_family():
    # slice s(e1,.,.) = diag(2t, -t, -t); the t -> 0 end is the boundary case
    # where every direction enters the tolerance band
    flags = []
    for t in (0.5, 0.2, 0.1, 0.02, 0.005):
        s = tc.sym3_from_entries(3, {(1, 1, 1): 2 * t, (1, 2, 2): -t, (1, 3, 3): -t})
        flags.append(cs.multiplicity_one(s))
    assert flags[0] and flags[1]
    assert not flags[-1] and not flags[-2]
    assert sorted(flags, reverse=True) == flags  # single flip


def test_multiplicity_false_when_maximizer_moves_off_e1():
    # slice spectrum (1, m, -1-m): for m > 1/2 two symmetric maximizers appear
    s = tc.sym3_from_entries(3, {(1, 1, 1): 1.0, (1, 2, 2): 0.6, (1, 3, 3): -1.6})
    assert cs.multiplicity_one(s) is False


def test_theta_hits_convergence_error_on_absurd_tolerance(rng):
    s = tc.random_traceless(3, rng)
    with pytest.raises(ConvergenceError) as exc:
        cs.theta(s, tol=1e-30)
    assert exc.value.best is not None


def test_adapted_spectrum_multiplicity_field():
    sp = cs.theta(calabi_sigma(3))
    assert sp.multiplicity_one is None
    sp = cs.theta(calabi_sigma(3), check_multiplicity=True)
    assert sp.multiplicity_one is True


def test_multiplicity_sampled_directions_above_n4():
    # n > 4 falls back to seeded sampled directions
    assert cs.multiplicity_one(calabi_sigma(5)) is True
