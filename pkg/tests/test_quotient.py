import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_gegenbauer

import oracles
from diffwave import diffusive as dv
from diffwave import grids
from diffwave import quotient as qt
from diffwave import transform as tf

ONE = dv.weight_alpha("constant")


def test_spec_elements():
    spec = qt.QuotientSpec(5)
    el = spec.gamma_elements
    assert el.shape == (5, 4)
    np.testing.assert_allclose(el[1], [math.cos(2 * math.pi / 5), math.sin(2 * math.pi / 5), 0, 0])
    assert spec.is_closed()
    # omega^p = 1 for the generator
    w = el[1]
    acc = np.array([1.0, 0, 0, 0])
    for _ in range(5):
        acc = oracles.quaternion_product(acc, w)
    np.testing.assert_allclose(acc, [1, 0, 0, 0], atol=1e-14)
    for bad in (0, -2, 2.5):
        with pytest.raises(ValueError):
            qt.QuotientSpec(bad)


def test_translate_is_right_multiplication(rng):
    spec = qt.QuotientSpec(3)
    x = grids.random_unit_quaternions(rng, 4)
    out = spec.translate(x)
    assert out.shape == (3, 4, 4)
    for k, g in enumerate(spec.gamma_elements):
        for i in range(4):
            np.testing.assert_allclose(out[k, i], oracles.quaternion_product(x[i], g), atol=1e-14)


@pytest.mark.parametrize(
    "p,n,expected",
    [(2, 4, 5), (2, 3, 0), (3, 4, 1), (2, 2, 3), (5, 0, 1), (3, 1, 0), (1, 6, 7)],
)
def test_rank_examples(p, n, expected):
    assert qt.gamma_rank(p, n) == expected
    assert qt.gamma_rank_bruteforce(p, n) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=100)
@given(st.integers(1, 12), st.integers(0, 40))
def test_rank_matches_character_average(p, n):
    """Character average computed here with scipy's Gegenbauer polynomials."""
    avg = np.mean([eval_gegenbauer(n, 1.0, math.cos(2 * math.pi * k / p)) for k in range(1, p + 1)])
    assert qt.gamma_rank(p, n) == round(avg)
    assert abs(avg - round(avg)) < 1e-8
    assert qt.gamma_projector(qt.QuotientSpec(p), n).ranks[n] == qt.gamma_rank(p, n)


def test_rank_domain_errors():
    with pytest.raises(ValueError):
        qt.gamma_rank(0, 3)
    with pytest.raises(ValueError):
        qt.gamma_rank_bruteforce(2, -1)


def test_character_expansion():
    u = np.linspace(0, 2 * math.pi, 50)
    for n in range(12):
        assert qt.character_expansion_gap(n, u) < 1e-11


def test_projector_is_diagonal_projection():
    proj = qt.gamma_projector(qt.QuotientSpec(4), 10)
    for n in range(11):
        P = proj[n]
        np.testing.assert_array_equal(P @ P, P)
        np.testing.assert_array_equal(P, np.diag(np.diag(P)))
        assert int(np.trace(P).real) == proj.ranks[n]


def test_rp3_family_drops_odd_terms(rng):
    N = 10
    rp3 = qt.quotient_zonal_family(qt.QuotientSpec(2), ONE, N)
    x = grids.random_unit_quaternions(rng, 20)
    rho = 0.03
    S3C = (2 * math.pi**2) ** (2 / 3)
    ref = sum(
        (n + 1) * math.sqrt(S3C * n * (n + 2)) * math.exp(-rho * S3C * n * (n + 2) / 2) * eval_gegenbauer(n, 1.0, x[:, 0])
        for n in range(2, N + 1, 2)
    )
    np.testing.assert_allclose(rp3.evaluate(rho, x), ref, atol=1e-10)


def test_p1_is_plain_s3_family(rng):
    q = qt.quotient_zonal_family(qt.QuotientSpec(1), ONE, 8)
    s3 = dv.heat_wavelet_family(dv.heat_identity("s3", 8), ONE)
    x = grids.random_unit_quaternions(rng, 10)
    np.testing.assert_allclose(q.evaluate(0.05, x), s3.evaluate(0.05, x), atol=1e-12)
    for n in range(9):
        np.testing.assert_allclose(q.coefficient(0.05, n), s3.coefficient(0.05, n), atol=1e-15)


def test_p3_degree_one_term_vanishes(rng):
    x = grids.random_unit_quaternions(rng, 100)
    assert np.max(np.abs(qt.averaged_term(qt.QuotientSpec(3), 1, x))) < 1e-10
    assert np.max(np.abs(qt.averaged_term(qt.QuotientSpec(3), 3, x))) > 0.1


def test_invariance_examples():
    spec = qt.QuotientSpec(3)
    fam = qt.quotient_zonal_family(spec, ONE, 10)
    assert qt.gamma_invariance_check(lambda x: fam.evaluate(0.05, x), spec).max_deviation < 1e-9
    rep = qt.gamma_invariance_check(lambda x: qt.central_term(1, x), qt.QuotientSpec(2))
    assert rep.max_deviation > 0.5 and not rep.passed(0.5)
    assert rep.witness[0] == 1
    assert qt.gamma_invariance_check(lambda x: np.ones(len(x)), spec).max_deviation == 0.0


def test_invariance_from_samples():
    spec = qt.QuotientSpec(3)
    fam = qt.quotient_zonal_family(spec, ONE, 6)
    grid = grids.sphere3_grid(6)
    rep = qt.gamma_invariance_check(fam.evaluate(0.05, grid.nodes), spec, grid=grid)
    assert rep.max_deviation < 1e-9 and rep.fit_residual < 1e-9
    bad = qt.gamma_invariance_check(qt.central_term(1, grid.nodes), qt.QuotientSpec(2), grid=grid)
    assert bad.max_deviation > 0.5
    with pytest.raises(ValueError):
        qt.gamma_invariance_check(np.zeros(3), spec)
    with pytest.raises(ValueError):
        qt.polynomial_interpolant(np.zeros(len(grids.sphere2_grid(2))), grids.sphere2_grid(2), 2)


def test_quotient_admissibility():
    spec = qt.QuotientSpec(3)
    fam = qt.quotient_zonal_family(spec, dv.weight_alpha("power-law", exponent=-1.0), 12)
    g = tf.scale_grid(0.01, 5.0)
    for r in fam.plus_reps():
        A = tf.admissibility_integral(fam, r.id, g)
        assert np.trace(A).real == pytest.approx(qt.gamma_rank(3, r.id) * math.exp(-0.01 * r.lambda_sq), abs=1e-10)
