"""Batch verification of the library's identities, grouped into suites.

Every check compares a library computation against an independent route
(closed forms, direct quadrature, or a second algorithm) and records the
worst discrepancy next to its tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import diffusive as dv
from . import grids, harmonic as hm, quotient as qt, specfun as sf, transform as tf

SUITES = ("fourier", "diffusive", "transform", "quotient")
REFINEMENT_FLOOR = 1e-12  # errors below this are rounding noise


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    value: float
    tol: float
    witness: str = ""
    seconds: float = 0.0


def _check(suite, name, value, tol, witness="", invert=False):
    value = float(value)
    ok = (value <= tol) if not invert else (value > tol)
    return Check(suite, name, bool(ok and math.isfinite(value)), value, tol, witness)


def _random_coefficients(rng, geometry, L, mean_zero=True):
    entries = {}
    for i in hm.rep_ids(geometry, L):
        d = hm.rep_dim(geometry, i)
        if geometry == "s3":
            m = (rng.standard_normal() + 1j * rng.standard_normal()) * np.eye(d)
        else:
            m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            if geometry == "s2":
                m[1:] = 0
        if mean_zero and hm.eigenvalue(geometry, i) == 0:
            m = np.zeros_like(m)
        entries[i] = m
    return hm.SpectralCoefficients(geometry, L, entries)


# --- fourier ----------------------------------------------------------------------------


def _fourier(rng, tamper_lambda):
    out = []
    L = 16
    g = grids.sphere2_grid(L)
    Y = np.concatenate(hm.harmonic_blocks(L, g.coords["t"], g.coords["theta"]), axis=1)
    gram = np.einsum("q,qi,qj->ij", g.weights, np.conj(Y), Y)
    out.append(_check("fourier", "s2_harmonics_orthonormal", np.max(np.abs(gram - np.eye(len(gram)))), 1e-12))

    for geometry, band, grid in (
        ("torus", 16, grids.torus_grid_for_band(16)),
        ("s3", 16, grids.sphere3_grid(16)),
        ("s2", 10, grids.sphere2_grid(10)),
        ("so3", 5, hm.so3_grid(5)),
    ):
        c = _random_coefficients(rng, geometry, band, mean_zero=False)
        vals = hm.fourier_backward(c, grid)
        back = hm.fourier_forward(geometry, vals, grid, band)
        out.append(_check("fourier", f"{geometry}_roundtrip", back.max_abs_diff(c), 1e-11))
        energy = float(np.real(grid.mean(np.abs(vals) ** 2)))
        out.append(_check("fourier", f"{geometry}_parseval", abs(energy - c.norm_sq()) / c.norm_sq(), 1e-12))

    A = grids.random_rotations(rng, 6)
    B = grids.random_rotations(rng, 6)
    DA, DB, DAB = hm.wigner_matrices(6, A), hm.wigner_matrices(6, B), hm.wigner_matrices(6, A @ B)
    err = max(float(np.max(np.abs(DAB[k] - DA[k] @ DB[k]))) for k in range(7))
    out.append(_check("fourier", "so3_homomorphism", err, 1e-12))

    # addition theorem against Legendre polynomials
    xi, eta = grids.random_sphere_points(rng, 50), grids.random_sphere_points(rng, 50)
    Yx, Ye = hm.sphere_harmonics_at(8, xi), hm.sphere_harmonics_at(8, eta)
    dots = np.sum(xi * eta, axis=1)
    err = max(
        float(np.max(np.abs(np.sum(Yx[k] * np.conj(Ye[k]), axis=1) - (2 * k + 1) / (4 * math.pi) * sf.gegenbauer(0.5, k, dots))))
        for k in range(9)
    )
    out.append(_check("fourier", "addition_theorem", err, 1e-10))

    # Funk-Hecke multiplier against a 2-D product quadrature
    big = grids.sphere2_grid(48)
    e = grids.random_sphere_points(rng, 1)[0]
    f = np.exp(big.nodes @ e)
    Yb, Ye = hm.sphere_harmonics_at(6, big.nodes), hm.sphere_harmonics_at(6, e[None])
    err = 0.0
    for k in range(7):
        direct = np.einsum("q,q,qj->j", big.weights, f, Yb[k])
        err = max(err, float(np.max(np.abs(direct - hm.funk_hecke(np.exp, k, 2) * Ye[k][0]))))
    out.append(_check("fourier", "funk_hecke", err, 1e-9))

    # heat-kernel Parseval: theta_3 samples against the spectral eigenvalue table
    t = 0.01
    tg = grids.torus_grid(129)
    p = sf.theta3(math.pi * tg.nodes, math.exp(-4 * math.pi**2 * t))
    ks = np.arange(-32, 33)
    lam = np.array([tamper_lambda * hm.eigenvalue("torus", int(k)) for k in ks])
    spectral = float(np.sum(np.exp(-2 * lam * t)))
    out.append(_check("fourier", "heat_kernel_parseval", abs(float(tg.mean(p * p)) - spectral), 1e-12))

    # S^3 characters are orthonormal
    g3 = grids.sphere3_grid(12)
    C = sf.gegenbauer_all(1.0, 12, g3.coords["x0"])
    gram = np.einsum("q,iq,jq->ij", g3.weights, C, C)
    out.append(_check("fourier", "s3_characters_orthonormal", np.max(np.abs(gram - np.eye(13))), 1e-12))

    out.append(_check("fourier", "theta3_reference_value", abs(sf.theta3(0.0, math.exp(-0.4 * math.pi**2)) - 1.038592883107067), 1e-14))
    return out


# --- diffusive ---------------------------------------------------------------------------


def _diffusive(rng, tamper_lambda):
    out = []
    for geometry, band in (("torus", 16), ("s3", 16), ("s2", 16)):
        rep = dv.verify_diffusive(dv.heat_identity(geometry, band))
        bad = [k for k, c in rep.conditions.items() if not c.passed]
        out.append(Check("diffusive", f"heat_{geometry}_diffusive", rep.passed, float(len(bad)), 0.0, ",".join(bad)))

    # negative control: a growing kernel must be rejected
    grow = dv.DiffusiveIdentity(
        "torus",
        dv.make_reps("torus", 4),
        spectral=lambda t, r: np.exp(t * r.lambda_sq * 1e-3) * np.eye(1),
    )
    rep = dv.verify_diffusive(grow)
    out.append(Check("diffusive", "rejects_growing_kernel", not rep.passed, 0.0, 0.0))

    # heat-trace weight against a long direct sum
    w = dv.weight_alpha("heat-trace", "s3", 200)
    rho = 0.05
    n = np.arange(1, 2000)
    lam = hm.S3_LAPLACE_CONSTANT * n * (n + 2)
    direct = math.fsum((n + 1) ** 2 * lam * np.exp(-rho * lam))
    out.append(_check("diffusive", "heat_trace_alpha", abs(w(rho) - direct) / direct, 1e-12))

    # admissibility over [t, inf)
    one = dv.weight_alpha("constant")
    for geometry, band in (("torus", 32), ("s3", 16)):
        ident = dv.heat_identity(geometry, band)
        fam = dv.heat_wavelet_family(ident, one)
        err = 0.0
        for t in (0.01, 0.1, 1.0):
            sg = tf.scale_grid(t, 5.0)
            for r in fam.plus_reps():
                A = tf.admissibility_integral(fam, r.id, sg)
                err = max(err, float(np.max(np.abs(A - math.exp(-t * r.lambda_sq) * np.eye(r.dim)))))
        out.append(_check("diffusive", f"admissibility_{geometry}", err, 1e-8))
    return out


# --- transform ---------------------------------------------------------------------------


def _rel(a: hm.SpectralCoefficients, b: hm.SpectralCoefficients) -> float:
    return math.sqrt((a - b).norm_sq() / b.norm_sq())


def _transform(rng, tamper_lambda):
    out = []
    one = dv.weight_alpha("constant")
    sg = tf.scale_grid()

    fam = dv.heat_wavelet_family(dv.heat_identity("torus", 32), one, eta=dv.minus_i_sign)
    gap = rt = cons = 0.0
    for _ in range(5):
        phi = _random_coefficients(rng, "torus", 32)
        field = tf.wavelet_forward_group(phi, fam, sg)
        gap = max(gap, tf.energy_gap(field))
        rec = tf.wavelet_inverse_group(field)
        rt = max(rt, _rel(rec, phi))
        cons = max(cons, tf.wavelet_inverse_group(field, from_samples=True).max_abs_diff(rec))
    out.append(_check("transform", "torus_energy_gap", gap, 1e-7))
    out.append(_check("transform", "torus_roundtrip", rt, 1e-6))
    out.append(_check("transform", "torus_inverse_consistency", cons, 1e-9))

    fam3 = dv.heat_wavelet_family(dv.heat_identity("s3", 12), dv.weight_alpha("power-law", c=1.0, exponent=-1.0))
    phi = _random_coefficients(rng, "s3", 12)
    field = tf.wavelet_forward_group(phi, fam3, sg)
    out.append(_check("transform", "s3_energy_gap", tf.energy_gap(field), 1e-7))
    out.append(_check("transform", "s3_roundtrip", _rel(tf.wavelet_inverse_group(field), phi), 1e-6))

    L = 6
    phi = _random_coefficients(rng, "s2", L)
    z = dv.zonal_family_on_sphere(2, one, L)
    fz = tf.wavelet_forward_zonal(phi, z, sg)
    out.append(_check("transform", "s2_zonal_energy_gap", tf.energy_gap(fz), 1e-7))
    out.append(_check("transform", "s2_zonal_roundtrip", _rel(tf.wavelet_inverse_zonal(fz, from_samples=True), phi), 1e-5))
    w = {k: dv.random_unit_weights(rng, k) for k in range(L + 1)}
    nz = dv.nonzonal_family(one, w, L)
    fn = tf.wavelet_forward_nonzonal(phi, nz, sg)
    out.append(_check("transform", "s2_nonzonal_energy_gap", tf.energy_gap(fn), 1e-7))
    out.append(_check("transform", "s2_nonzonal_roundtrip", _rel(tf.wavelet_inverse_nonzonal(fn, from_samples=True), phi), 1e-5))

    out.extend(_products(rng))
    out.extend(_inner_products(rng))

    theta = np.linspace(-1.5, 1.5, 301)
    err = 0.0
    for rho in (0.005, 0.01, 0.1):
        ref = -sf.theta3_dtheta(theta, math.exp(-2 * math.pi**2 * rho))
        err = max(err, float(np.max(np.abs(fam.evaluate(rho, theta) - ref))))
    out.append(_check("transform", "torus_family_theta3", err, 1e-9))

    # halving the log step of the default grid barely moves the round-trip error
    phi = _random_coefficients(rng, "torus", 32)
    coarse = tf.scale_grid()
    e1 = _rel(tf.wavelet_inverse_group(tf.wavelet_forward_group(phi, fam, coarse)), phi)
    e2 = _rel(tf.wavelet_inverse_group(tf.wavelet_forward_group(phi, fam, coarse.refined())), phi)
    out.append(_check("transform", "scale_refinement", abs(e1 - e2) / max(e2, REFINEMENT_FLOOR), 10.0))
    return out


def _products(rng):
    """Convolution-type products: spectral form against direct quadrature, L = 4."""
    out = []
    L = 4
    so3 = hm.so3_grid(L)
    s2 = grids.sphere2_grid(L)
    phi, psi = _random_coefficients(rng, "s2", L, False), _random_coefficients(rng, "s2", L, False)
    f = lambda c: (lambda x: hm.synthesize(c, x))
    pts = grids.random_sphere_points(rng, 6)
    rots = grids.random_rotations(rng, 6)

    spec = hm.synthesize(tf.conv_group(phi, psi), pts)
    quad = tf.space_convolution_quadrature(f(phi), f(psi), pts, so3)
    out.append(_check("transform", "group_convolution", np.max(np.abs(spec - quad)), 1e-9))

    spec = hm.synthesize(tf.conv_bullet(phi, psi), rots)
    quad = tf.bullet_quadrature(f(phi), f(psi), rots, s2)
    out.append(_check("transform", "bullet_product", np.max(np.abs(spec - quad)), 1e-9))

    spec = hm.synthesize(tf.conv_zonal_hat(phi, psi), pts)
    quad = tf.zonal_hat_quadrature(f(phi), f(psi), pts, so3)
    out.append(_check("transform", "zonal_product", np.max(np.abs(spec - quad)), 1e-9))
    return out


def _inner_products(rng):
    """<psi_rho, T_g psi_rho'> against the heat kernel Laplacian at (rho + rho') / 2."""
    out = []
    for geometry, band, alpha in (
        ("torus", 24, dv.weight_alpha("constant")),
        ("s3", 16, dv.weight_alpha("power-law", c=1.0, exponent=-1.0)),
    ):
        ident = dv.heat_identity(geometry, band)
        fam = dv.heat_wavelet_family(ident, alpha)
        grid = grids.torus_grid_for_band(band) if geometry == "torus" else grids.sphere3_grid(band)
        err = 0.0
        for _ in range(3):
            rho, rho2 = rng.uniform(0.01, 0.2, 2)
            if geometry == "torus":
                g = rng.uniform()
                shifted = np.mod(grid.nodes + g, 1.0)
            else:
                g = grids.random_unit_quaternions(rng, 1)[0]
                shifted = grids.quaternion_mul(np.broadcast_to(g, grid.nodes.shape), grid.nodes)
            quad = grid.integrate(fam.evaluate(rho, grid.nodes) * np.conj(fam.evaluate(rho2, shifted)))
            tmid = 0.5 * (rho + rho2)
            lap = sum(
                r.dim * r.lambda_sq * math.exp(-r.lambda_sq * tmid) * np.conj(hm.character(geometry, r.id, g))
                for r in ident.reps
            )
            ref = lap / math.sqrt(alpha(rho) * alpha(rho2))
            err = max(err, abs(quad - ref) / max(1.0, abs(ref)))
        out.append(_check("transform", f"inner_product_{geometry}", err, 1e-8))
    return out


# --- quotient ------------------------------------------------------------------------------


def _quotient(rng, tamper_lambda):
    out = []
    worst = 0.0
    mismatch = ""
    for p in range(2, 8):
        for n in range(25):
            a, b = qt.gamma_rank(p, n), qt.gamma_rank_bruteforce(p, n)
            worst = max(worst, abs(a - b))
            if a != round(b) and not mismatch:
                mismatch = f"p={p}, n={n}"
    out.append(_check("quotient", "rank_formula", worst, 1e-9, mismatch))

    one = dv.weight_alpha("constant")
    rp3 = qt.quotient_zonal_family(qt.QuotientSpec(2), one, 16)
    s3 = dv.heat_wavelet_family(dv.heat_identity("s3", 16), one)
    err = 0.0
    for rho in (0.01, 0.1):
        for n in range(17):
            expect = s3.coefficient(rho, n) if n % 2 == 0 else np.zeros((n + 1, n + 1))
            err = max(err, float(np.max(np.abs(rp3.coefficient(rho, n) - expect))))
    out.append(_check("quotient", "rp3_parity", err, 1e-12))

    fam = qt.quotient_zonal_family(qt.QuotientSpec(3), one, 12)
    rep = qt.gamma_invariance_check(lambda x: fam.evaluate(0.05, x), fam.extras["spec"], seed=int(rng.integers(1 << 30)))
    out.append(_check("quotient", "family_invariant", rep.max_deviation, 1e-9))
    rep = qt.gamma_invariance_check(lambda x: qt.central_term(1, x), qt.QuotientSpec(2), seed=1)
    out.append(_check("quotient", "odd_character_not_invariant", rep.max_deviation, 0.5, invert=True))

    u = np.linspace(0, 2 * math.pi, 97)
    out.append(_check("quotient", "character_expansion", max(qt.character_expansion_gap(n, u) for n in range(25)), 1e-10))

    err = 0.0
    for t in (0.01, 0.1):
        sg = tf.scale_grid(t, 5.0)
        for r in fam.plus_reps():
            A = tf.admissibility_integral(fam, r.id, sg)
            err = max(err, float(np.max(np.abs(A - math.exp(-t * r.lambda_sq) * fam.structure(r.id)))))
    out.append(_check("quotient", "quotient_admissibility", err, 1e-8))
    return out


_RUNNERS = {"fourier": _fourier, "diffusive": _diffusive, "transform": _transform, "quotient": _quotient}


def run_suite(name: str = "all", seed: int = 0, tamper_lambda: float = 1.0) -> list[Check]:
    """Run one suite (or 'all'); deterministic for a fixed seed."""
    names = SUITES if name == "all" else (name,)
    for n in names:
        if n not in _RUNNERS:
            raise ValueError(f"unknown suite {n!r}; choose from all, {', '.join(SUITES)}")
    checks = []
    for k, n in enumerate(names):
        rng = np.random.default_rng([seed, k])
        t0 = time.perf_counter()
        part = _RUNNERS[n](rng, tamper_lambda)
        dt = time.perf_counter() - t0
        for c in part:
            c.seconds = dt / len(part)
        checks.extend(part)
    return checks


def report(checks: list[Check]) -> dict:
    """JSON-ready report; timings are left out so reports are reproducible."""
    rows = []
    for c in checks:
        d = asdict(c)
        d.pop("seconds")
        rows.append(d)
    return {"passed": all(c.passed for c in checks), "n_checks": len(checks), "checks": rows}
