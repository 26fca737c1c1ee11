import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import eval_gegenbauer

import oracles
from diffwave import specfun as sf


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.5])
def test_gegenbauer_matches_scipy(nu):
    t = np.linspace(-1, 1, 41)
    for k in range(15):
        np.testing.assert_allclose(sf.gegenbauer(nu, k, t), eval_gegenbauer(k, nu, t), rtol=1e-12, atol=1e-12)


def test_gegenbauer_explicit_low_degree():
    t = np.linspace(-1, 1, 9)
    np.testing.assert_allclose(sf.gegenbauer(1.0, 2, t), 4 * t**2 - 1, atol=1e-15)
    np.testing.assert_allclose(sf.gegenbauer(0.5, 3, t), 0.5 * (5 * t**3 - 3 * t), atol=1e-15)


@given(st.floats(0.25, 4.0), st.integers(0, 20))
def test_gegenbauer_at_one(nu, k):
    assert sf.gegenbauer(nu, k, 1.0) == pytest.approx(sf.gegenbauer_at_one(nu, k), rel=1e-11)
    assert sf.gegenbauer_at_one(nu, k) == pytest.approx(math.comb(k + 1, k) if nu == 1 else eval_gegenbauer(k, nu, 1.0), rel=1e-11)


def test_gegenbauer_argument_checks():
    assert sf.gegenbauer(1.0, 3, 1 + 1e-13) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        sf.gegenbauer(1.0, 3, 1.01)
    with pytest.raises(ValueError):
        sf.gegenbauer(1.0, -1, 0.0)
    with pytest.raises(ValueError):
        sf.gegenbauer(0.0, 2, 0.0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_gegenbauer_norm_constant_against_quad(n):
    nu = (n - 1) / 2
    area = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    for k in range(6):
        val, _ = quad(lambda t: eval_gegenbauer(k, nu, t) ** 2 * (1 - t * t) ** (n / 2 - 1), -1, 1)
        assert sf.gegenbauer_norm_constant(nu, k, n) == pytest.approx(area * val, rel=1e-9)
    with pytest.raises(ValueError):
        sf.gegenbauer_norm_constant(1.0, 2, 2)


def test_dimension_and_area_tables():
    assert [sf.harmonic_dimension(k, 2) for k in range(5)] == [1, 3, 5, 7, 9]
    assert [sf.harmonic_dimension(k, 3) for k in range(5)] == [1, 4, 9, 16, 25]
    assert [sf.harmonic_dimension(k, 1) for k in range(3)] == [1, 2, 2]
    assert sf.sphere_area(1) == pytest.approx(2 * math.pi)
    assert sf.sphere_area(2) == pytest.approx(4 * math.pi)
    assert sf.sphere_area(3) == pytest.approx(2 * math.pi**2)


@pytest.mark.parametrize("q", [0.0, 0.05, 0.3, 0.7, 0.95])
def test_theta3_against_mpmath(q):
    for u in np.linspace(-2, 2, 17):
        assert sf.theta3(u, q) == pytest.approx(oracles.theta3(u, q), abs=1e-12 * max(1, 1 / (1 - q)))


def test_theta3_reference_value():
    assert sf.theta3(0.0, math.exp(-0.4 * math.pi**2)) == pytest.approx(1.038592883107067, abs=1e-14)


@pytest.mark.parametrize("q", [0.01, 0.2, 0.6, 0.9])
def test_theta3_derivative(q):
    theta = np.linspace(-1.3, 1.3, 23)
    got = sf.theta3_dtheta(theta, q)
    ref = np.array([oracles.theta3_dtheta(x, q) for x in theta])
    np.testing.assert_allclose(got, ref, atol=1e-10 * max(1, 1 / (1 - q) ** 2))
    # odd, and 1-periodic
    np.testing.assert_allclose(sf.theta3_dtheta(-theta, q), -got, atol=1e-12)
    np.testing.assert_allclose(sf.theta3_dtheta(theta + 1, q), got, atol=1e-9)
    h = 1e-5
    fd = (sf.theta3(math.pi * (theta + h), q) - sf.theta3(math.pi * (theta - h), q)) / (2 * h)
    np.testing.assert_allclose(got, fd, rtol=1e-6, atol=1e-6)


def test_theta_nome_checks():
    with pytest.raises(ValueError):
        sf.theta3(0.0, 1.0)
    with pytest.raises(ValueError):
        sf.theta3_dtheta(0.0, -0.1)
    assert sf.theta3(0.3, 0.0) == 1.0


def test_spherical_harmonics_against_scipy(rng):
    xi = rng.standard_normal((30, 3))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    t, theta = sf.cartesian_to_sphere(xi)
    for k in range(8):
        block = sf.harmonic_block(k, t, theta)
        for col, j in enumerate(sf.adapted_orders(k)):
            ref = oracles.ylm(k, j, xi)
            np.testing.assert_allclose(sf.spherical_harmonic(sf.SphericalHarmonicIndex(k, j), t, theta), ref, atol=1e-12)
            np.testing.assert_allclose(block[:, col], ref, atol=1e-12)
    blocks = sf.harmonic_blocks(7, t, theta)
    for k in range(8):
        np.testing.assert_allclose(blocks[k], sf.harmonic_block(k, t, theta), atol=1e-13)


def test_harmonic_index_validation():
    with pytest.raises(ValueError):
        sf.SphericalHarmonicIndex(2, 3)
    assert sf.adapted_orders(2) == [0, 1, -1, 2, -2]


@settings(max_examples=50)
@given(st.floats(-1, 1), st.floats(-math.pi, math.pi, exclude_max=True))
def test_coordinate_round_trip(t, theta):
    xi = sf.sphere_to_cartesian(t, theta)
    assert np.linalg.norm(xi) == pytest.approx(1.0)
    t2, th2 = sf.cartesian_to_sphere(xi)
    assert t2 == pytest.approx(t, abs=1e-12)
    if abs(t) < 1 - 1e-9:
        assert np.exp(1j * th2) == pytest.approx(np.exp(1j * theta), abs=1e-7)
