import csv
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from diffwave import grids


def test_torus_grid_exactness():
    g = grids.torus_grid_for_band(10)
    for k in range(-20, 21):
        expected = 1.0 if k == 0 else 0.0
        assert abs(g.integrate(np.exp(2j * math.pi * k * g.nodes)) - expected) < 1e-13
    assert g.total == pytest.approx(1.0)
    with pytest.raises(ValueError):
        grids.torus_grid(0)


def test_torus_grid_small_cases():
    g = grids.torus_grid(4)
    np.testing.assert_allclose(g.nodes, [0, 0.25, 0.5, 0.75])
    np.testing.assert_allclose(g.weights, 0.25)
    assert abs(grids.torus_grid(8).integrate(np.exp(2j * math.pi * grids.torus_grid(8).nodes))) < 1e-15
    # theta_3 has mean 1 over a period; q = 0.5 decays fast enough for 64 nodes
    g = grids.torus_grid(64)
    vals = np.array([oracles.theta3(math.pi * t, 0.5) for t in g.nodes])
    assert abs(g.integrate(vals - 1.0)) < 1e-12


@pytest.mark.parametrize("L", [2, 5, 9])
def test_sphere2_monomials(L):
    g = grids.sphere2_grid(L)
    assert g.total == pytest.approx(4 * math.pi)
    x, y, z = g.nodes.T
    for a, b, c in itertools.product(range(2 * L + 1), repeat=3):
        if a + b + c <= 2 * L:
            got = g.integrate(x**a * y**b * z**c)
            assert got == pytest.approx(oracles.sphere_monomial_integral(a, b, c), abs=1e-12)


@pytest.mark.parametrize("N", [2, 4, 7])
def test_sphere3_monomials(N):
    g = grids.sphere3_grid(N)
    assert g.total == pytest.approx(1.0)
    assert np.allclose(np.linalg.norm(g.nodes, axis=1), 1.0)
    for e in itertools.product(range(2 * N + 1), repeat=4):
        if sum(e) <= 2 * N:
            got = g.integrate(np.prod(g.nodes ** np.array(e), axis=1))
            assert got == pytest.approx(oracles.s3_monomial_mean(e), abs=1e-12)


def test_so3_haar_second_moments():
    g = grids.so3_grid(3)
    assert g.total == pytest.approx(1.0)
    A = g.nodes
    m = np.einsum("q,qij,qkl->ijkl", g.weights, A, A)
    ref = np.einsum("ik,jl->ijkl", np.eye(3), np.eye(3)) / 3
    np.testing.assert_allclose(m, ref, atol=1e-13)
    np.testing.assert_allclose(g.integrate(A), np.zeros((3, 3)), atol=1e-13)


def test_so3_characters_orthonormal():
    g = grids.so3_grid(4)
    chars = np.array([oracles.so3_character(k, g.nodes) for k in range(5)])
    gram = np.einsum("q,iq,jq->ij", g.weights, chars, chars)
    np.testing.assert_allclose(gram, np.eye(5), atol=1e-12)


@settings(max_examples=60)
@given(st.floats(-math.pi, math.pi), st.floats(0, math.pi), st.floats(-math.pi, math.pi))
def test_euler_round_trip(a, b, c):
    A = grids.euler_to_matrix(a, b, c)
    np.testing.assert_allclose(A @ A.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(A) == pytest.approx(1.0)
    R = grids.Rotation3.from_matrix(A)
    assert 0 <= R.beta <= math.pi
    np.testing.assert_allclose(R.matrix, A, atol=1e-9)
    np.testing.assert_allclose(R.inverse().matrix, A.T, atol=1e-9)


@pytest.mark.parametrize("beta", [0.0, math.pi])
def test_euler_at_poles(beta):
    A = grids.euler_to_matrix(0.7, beta, -1.1)
    a, b, c = grids.matrix_to_euler(A)
    assert a == 0.0
    np.testing.assert_allclose(grids.euler_to_matrix(a, b, c), A, atol=1e-12)


def test_rotation_rejects_reflection():
    with pytest.raises(ValueError):
        grids.Rotation3.from_matrix(np.diag([1.0, 1.0, -1.0]))


def test_rotation_conventions():
    A = grids.rot_z(math.pi / 2)
    np.testing.assert_allclose(A @ np.array([1.0, 0, 0]), [0, -1, 0], atol=1e-15)
    np.testing.assert_allclose(grids.rotate_sphere(grids.Rotation3(0, 0, 0), grids.NORTH_POLE), grids.NORTH_POLE)
    np.testing.assert_allclose(grids.so2_grid(4)[1], grids.rot_z(math.pi / 2))


def _quat_to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def test_quaternion_laws(rng):
    a, b, c = grids.random_unit_quaternions(rng, 3)
    np.testing.assert_allclose(grids.quaternion_mul(a, b), oracles.quaternion_product(a, b), atol=1e-14)
    np.testing.assert_allclose(
        grids.quaternion_mul(grids.quaternion_mul(a, b), c), grids.quaternion_mul(a, grids.quaternion_mul(b, c)), atol=1e-14
    )
    np.testing.assert_allclose(grids.quaternion_mul(a, grids.quaternion_conj(a)), [1, 0, 0, 0], atol=1e-14)
    # the double cover is a homomorphism
    np.testing.assert_allclose(_quat_to_matrix(grids.quaternion_mul(a, b)), _quat_to_matrix(a) @ _quat_to_matrix(b), atol=1e-13)


def test_random_rotations_are_rotations(rng):
    R = grids.random_rotations(rng, 20)
    np.testing.assert_allclose(R @ np.swapaxes(R, -1, -2), np.broadcast_to(np.eye(3), R.shape), atol=1e-13)
    np.testing.assert_allclose(np.linalg.det(R), 1.0)


@pytest.mark.parametrize("geometry", ["torus", "s2", "s3", "so3"])
def test_export_csv(tmp_path, geometry):
    g = {"torus": grids.torus_grid(5), "s2": grids.sphere2_grid(2), "s3": grids.sphere3_grid(1), "so3": grids.so3_grid(1)}[geometry]
    path = tmp_path / "g.csv"
    grids.export_grid_csv(g, path)
    rows = list(csv.reader(open(path)))
    assert rows[0][-1] == "weight"
    assert len(rows) == len(g) + 1
    assert sum(float(r[-1]) for r in rows[1:]) == pytest.approx(g.total)


def test_grids_are_read_only():
    g = grids.sphere2_grid(3)
    with pytest.raises(ValueError):
        g.nodes[0, 0] = 1.0
