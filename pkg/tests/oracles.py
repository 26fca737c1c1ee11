"""Reference implementations used as test oracles.

Built on scipy and mpmath so that expected values never come from the
package under test.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.special import eval_gegenbauer, gammaln, sph_harm_y


def ylm(k: int, j: int, xi) -> np.ndarray:
    """Orthonormal spherical harmonic without the Condon-Shortley phase, z the polar axis."""
    xi = np.asarray(xi, dtype=float)
    polar = np.arccos(np.clip(xi[..., 2], -1.0, 1.0))
    az = np.arctan2(xi[..., 1], xi[..., 0])
    val = sph_harm_y(k, j, polar, az)
    return val * (-1) ** j if j > 0 else val


def adapted(k: int):
    out = [0]
    for m in range(1, k + 1):
        out += [m, -m]
    return out


def random_s2_function(rng, L: int, mean_zero: bool = True):
    """Random band-limited S^2 function as (callable, coefficient dict {(k, j): a})."""
    coef = {}
    for k in range(0 if not mean_zero else 1, L + 1):
        for j in range(-k, k + 1):
            coef[(k, j)] = rng.standard_normal() + 1j * rng.standard_normal()

    def f(xi):
        xi = np.asarray(xi, dtype=float)
        return sum(a * ylm(k, j, xi) for (k, j), a in coef.items())

    return f, coef


def random_zonal_function(rng, L: int):
    c = rng.standard_normal(L + 1) + 1j * rng.standard_normal(L + 1)

    def f(xi):
        z = np.clip(np.asarray(xi, dtype=float)[..., 2], -1, 1)
        return sum(c[k] * eval_gegenbauer(k, 0.5, z) for k in range(L + 1))

    return f


def random_trig_poly(rng, B: int, mean_zero: bool = True):
    c = rng.standard_normal(2 * B + 1) + 1j * rng.standard_normal(2 * B + 1)
    if mean_zero:
        c[B] = 0.0
    ks = np.arange(-B, B + 1)

    def f(theta):
        return np.exp(2j * np.pi * np.multiply.outer(np.asarray(theta, float), ks)) @ c

    return f, dict(zip(ks.tolist(), c))


def sphere_monomial_integral(a: int, b: int, c: int) -> float:
    """int_{S^2} x^a y^b z^c (Lebesgue), closed form via Gamma functions."""
    if a % 2 or b % 2 or c % 2:
        return 0.0
    be = [(e + 1) / 2 for e in (a, b, c)]
    return 2.0 * math.exp(sum(gammaln(x) for x in be) - gammaln(sum(be)))


def s3_monomial_mean(e) -> float:
    """Normalized integral over S^3 of prod x_i^{e_i}."""
    if any(x % 2 for x in e):
        return 0.0
    be = [(x + 1) / 2 for x in e]
    total = 2.0 * math.exp(sum(gammaln(x) for x in be) - gammaln(sum(be)))
    return total / (2 * math.pi**2)


def theta3(u: float, q: float) -> float:
    return float(mpmath.jtheta(3, u, q))


def theta3_dtheta(theta: float, q: float) -> float:
    """d/d theta of theta_3(pi theta, q) via mpmath's derivative in the first argument."""
    return float(math.pi * mpmath.jtheta(3, math.pi * theta, q, 1))


def so3_character(k: int, A) -> np.ndarray:
    """Weyl character sin((2k+1) w / 2) / sin(w / 2) with w the rotation angle."""
    A = np.asarray(A, dtype=float)
    c = np.clip((np.trace(A, axis1=-2, axis2=-1) - 1) / 2, -1, 1)
    w = np.arccos(c)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.sin((2 * k + 1) * w / 2) / np.sin(w / 2)
    return np.where(np.abs(w) < 1e-8, 2 * k + 1, val)


def quaternion_product(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return np.array([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ])
