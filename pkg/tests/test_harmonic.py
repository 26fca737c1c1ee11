import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import eval_gegenbauer, spherical_in

import oracles
from diffwave import grids
from diffwave import harmonic as hm


def _ylm_block(k, xi):
    return np.stack([oracles.ylm(k, j, xi) for j in oracles.adapted(k)], axis=-1)


def test_rep_tables():
    assert hm.rep_dim("torus", -3) == 1 and hm.rep_dim("s3", 3) == 4 and hm.rep_dim("so3", 2) == 5
    assert hm.eigenvalue("torus", 2) == pytest.approx(16 * math.pi**2)
    assert hm.eigenvalue("s3", 1) == pytest.approx(3 * (2 * math.pi**2) ** (2 / 3))
    assert hm.eigenvalue("s2", 3, lambda_scale=2.0) == 24.0
    assert hm.rep_index("s2", 4).rank == 1 and hm.rep_index("so3", 4).rank == 9
    assert hm.rep_ids("torus", 2) == [-2, -1, 0, 1, 2]
    with pytest.raises(ValueError):
        hm.rep_index("s3", -1)
    with pytest.raises(ValueError):
        hm.rep_dim("s5", 1)


def test_wigner_acts_on_harmonics(rng):
    A = grids.random_rotations(rng, 4)
    xi = grids.random_sphere_points(rng, 7)
    for k in range(6):
        D = hm.wigner_matrix(k, A)
        for a, Dk in zip(A, D):
            lhs = _ylm_block(k, xi @ a.T)
            np.testing.assert_allclose(lhs, _ylm_block(k, xi) @ Dk.T, atol=1e-12)


def test_wigner_homomorphism_unitary_and_characters(rng):
    A, B = grids.random_rotations(rng, 5), grids.random_rotations(rng, 5)
    DA, DB, DAB = hm.wigner_matrices(5, A), hm.wigner_matrices(5, B), hm.wigner_matrices(5, A @ B)
    for k in range(6):
        np.testing.assert_allclose(DAB[k], DA[k] @ DB[k], atol=1e-12)
        eye = np.broadcast_to(np.eye(2 * k + 1), DA[k].shape)
        np.testing.assert_allclose(DA[k] @ np.conj(np.swapaxes(DA[k], -1, -2)), eye, atol=1e-12)
        np.testing.assert_allclose(hm.character("so3", k, A), oracles.so3_character(k, A), atol=1e-11)


def test_wigner_of_z_rotation_is_diagonal():
    a = 0.7
    for k in range(5):
        expected = np.diag(np.exp(-1j * np.array(oracles.adapted(k)) * a))
        np.testing.assert_allclose(hm.wigner_matrix(k, grids.rot_z(a)), expected, atol=1e-13)


def test_stabilizer_projector_is_so2_average():
    H = hm.stabilizer_projector(5)
    R = grids.so2_grid(16)
    for k in range(6):
        avg = hm.wigner_matrix(k, R).mean(axis=0)
        np.testing.assert_allclose(avg, H[k], atol=1e-13)
        assert H.ranks[k] == 1
        P = hm.adaptation_unitary(k)
        np.testing.assert_allclose(P @ P.T, np.eye(2 * k + 1))
        conv = H.in_conventional_basis(k)
        assert conv[k, k] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        hm.stabilizer_projector(3, "s3")


def test_lift_identity(rng):
    """Y_k^j lifts to E_{1j} / sqrt(4 pi d_k)."""
    A = grids.random_rotations(rng, 6)
    for k in range(4):
        for col, j in enumerate(oracles.adapted(k)):
            a = [np.zeros(2 * m + 1, complex) for m in range(k + 1)]
            a[k][col] = 1.0
            c = hm.coefficients_from_harmonics(a)
            assert c[k][0, col] == pytest.approx(1 / math.sqrt(4 * math.pi * (2 * k + 1)))
            got = hm.synthesize(hm.lift(c), A)
            np.testing.assert_allclose(got, oracles.ylm(k, j, A @ grids.NORTH_POLE), atol=1e-12)
    with pytest.raises(ValueError):
        hm.lift(hm.SpectralCoefficients.zeros("torus", 2))


def _random(rng, geometry, L):
    entries = {}
    for i in hm.rep_ids(geometry, L):
        d = hm.rep_dim(geometry, i)
        if geometry == "s3":
            m = complex(*rng.standard_normal(2)) * np.eye(d)
        else:
            m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            if geometry == "s2":
                m[1:] = 0
        entries[i] = m.astype(complex)
    return hm.SpectralCoefficients(geometry, L, entries)


@pytest.mark.parametrize(
    "geometry,L,grid",
    [
        ("torus", 12, lambda: grids.torus_grid_for_band(12)),
        ("s3", 10, lambda: grids.sphere3_grid(10)),
        ("s2", 8, lambda: grids.sphere2_grid(8)),
        ("so3", 4, lambda: hm.so3_grid(4)),
    ],
)
def test_round_trip_and_parseval(rng, geometry, L, grid):
    g = grid()
    c = _random(rng, geometry, L)
    vals = hm.fourier_backward(c, g)
    np.testing.assert_allclose(vals, hm.synthesize(c, g.nodes), atol=1e-10)
    back = hm.fourier_forward(geometry, vals, g, L)
    assert back.max_abs_diff(c) < 1e-11
    assert float(np.real(g.mean(np.abs(vals) ** 2))) == pytest.approx(c.norm_sq(), rel=1e-12)
    d = _random(rng, geometry, L)
    assert complex(g.mean(vals * np.conj(hm.fourier_backward(d, g)))) == pytest.approx(c.inner(d), rel=1e-11)


def test_torus_coefficients_against_direct_sum(rng):
    f, coef = oracles.random_trig_poly(rng, 6, mean_zero=False)
    g = grids.torus_grid_for_band(6)
    c = hm.fourier_forward("torus", f(g.nodes), g, 6)
    for k, v in coef.items():
        assert c[k][0, 0] == pytest.approx(v, abs=1e-12)


def test_s2_coefficients_against_scipy_harmonics(rng):
    f, coef = oracles.random_s2_function(rng, 6, mean_zero=False)
    g = grids.sphere2_grid(6)
    a = hm.sphere_analysis(f(g.nodes), g, 6)
    for (k, j), v in coef.items():
        assert a[k][oracles.adapted(k).index(j)] == pytest.approx(v, abs=1e-11)
    pts = grids.random_sphere_points(rng, 5)
    np.testing.assert_allclose(hm.sphere_synthesis(a, pts), f(pts), atol=1e-11)
    c = hm.coefficients_from_harmonics(a)
    assert hm.first_row_residual(c) == 0.0
    assert c.norm_sq() == pytest.approx(sum(abs(v) ** 2 for v in coef.values()) / (4 * math.pi))


def test_s3_rejects_noncentral_samples(rng):
    g = grids.sphere3_grid(4)
    with pytest.raises(ValueError, match="not central"):
        hm.fourier_forward("s3", g.nodes[:, 1], g, 4)


def test_grid_band_checks():
    with pytest.raises(ValueError):
        hm.fourier_forward("s2", np.zeros(len(grids.sphere2_grid(3))), grids.sphere2_grid(3), 5)
    with pytest.raises(ValueError):
        hm.fourier_forward("torus", np.zeros(len(grids.sphere2_grid(3))), grids.sphere2_grid(3), 2)


def test_translations_torus(rng):
    f, _ = oracles.random_trig_poly(rng, 5)
    g = grids.torus_grid_for_band(5)
    c = hm.fourier_forward("torus", f(g.nodes), g, 5)
    x, s = rng.uniform(size=7), 0.31
    np.testing.assert_allclose(hm.synthesize(hm.translate_left(s, c), x), f(s + x), atol=1e-12)
    np.testing.assert_allclose(hm.synthesize(hm.translate_right(s, c), x), f(x - s), atol=1e-12)
    np.testing.assert_allclose(hm.synthesize(hm.check_involution(c), x), np.conj(f(-x)), atol=1e-12)


def test_translations_so3(rng):
    f, _ = oracles.random_s2_function(rng, 4, mean_zero=False)
    c = hm.fourier_forward("s2", f(grids.sphere2_grid(4).nodes), grids.sphere2_grid(4), 4)
    lifted = hm.lift(c)
    phi = lambda A: f(A @ grids.NORTH_POLE)
    g = grids.random_rotations(rng, 1)[0]
    A = grids.random_rotations(rng, 6)
    np.testing.assert_allclose(hm.synthesize(hm.translate_left(g, lifted), A), phi(g @ A), atol=1e-11)
    right = hm.translate_right(g, c)
    assert right.geometry == "so3"
    np.testing.assert_allclose(hm.synthesize(right, A), phi(A @ g.T), atol=1e-11)
    np.testing.assert_allclose(hm.synthesize(hm.check_involution(lifted), A), np.conj(phi(np.swapaxes(A, 1, 2))), atol=1e-11)
    with pytest.raises(ValueError):
        hm.translate_left(np.array([1.0, 0, 0, 0]), _random(rng, "s3", 2))


def test_descend_and_zonal_projection(rng):
    c = _random(rng, "so3", 3)
    with pytest.raises(ValueError):
        hm.descend(c)
    z = hm.zonal_project(c)
    assert hm.first_row_residual(z) == 0.0
    np.testing.assert_allclose(z[2][0], c[2][0])
    zonal = oracles.random_zonal_function(rng, 4)
    g = grids.sphere2_grid(4)
    assert hm.zonal_commutator(hm.fourier_forward("s2", zonal(g.nodes), g, 4)) < 1e-12
    assert hm.zonal_commutator(_random(rng, "s2", 4)) > 1e-3


def test_funk_hecke_on_s2_matches_bessel():
    for k in range(10):
        assert hm.funk_hecke(np.exp, k, 2) == pytest.approx(4 * math.pi * spherical_in(k, 1.0), rel=1e-12)


@pytest.mark.parametrize("n", [3, 4])
def test_funk_hecke_higher_spheres(n):
    nu = (n - 1) / 2
    area = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    f = lambda t: np.cos(3 * t) + t**2
    for k in range(6):
        val, _ = quad(lambda t: f(t) * eval_gegenbauer(k, nu, t) * (1 - t * t) ** (n / 2 - 1), -1, 1)
        ref = area * val / eval_gegenbauer(k, nu, 1.0)
        assert hm.funk_hecke(f, k, n) == pytest.approx(ref, rel=1e-9, abs=1e-12)
    t, _ = hm.funk_hecke_nodes(n)
    assert hm.funk_hecke(f(t), 2, n) == pytest.approx(hm.funk_hecke(f, 2, n))
    with pytest.raises(ValueError):
        hm.funk_hecke(f, 1, 1)


def test_characters_s3_and_torus(rng):
    x = grids.random_unit_quaternions(rng, 5)
    w = np.arccos(x[:, 0])
    for n in range(5):
        np.testing.assert_allclose(hm.character("s3", n, x), np.sin((n + 1) * w) / np.sin(w), atol=1e-10)
    assert hm.character("torus", 3, 0.25) == pytest.approx(-1j)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["torus", "s3", "s2", "so3"]), st.integers(0, 4), st.integers(0, 2**31))
def test_json_round_trip(geometry, L, seed):
    c = _random(np.random.default_rng(seed), geometry, L)
    back = hm.SpectralCoefficients.from_json(c.to_json())
    assert back.geometry == c.geometry and back.bandlimit == c.bandlimit
    assert back.max_abs_diff(c) == 0.0


def test_container_algebra(rng):
    a, b = _random(rng, "so3", 2), _random(rng, "so3", 2)
    assert ((a + b) - b).max_abs_diff(a) < 1e-15
    assert a.inner(a) == pytest.approx(a.norm_sq())
    assert 0 not in a.without_trivial().ids()
    with pytest.raises(ValueError):
        hm.SpectralCoefficients("s2", 1, {1: np.eye(2)})
