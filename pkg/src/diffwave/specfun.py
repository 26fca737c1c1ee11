"""Scalar special functions: Gegenbauer polynomials, spherical harmonics on S^2
and Jacobi's theta_3 with its derivative.

Everything here accepts numpy arrays for the evaluation argument and is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CLAMP_TOL = 1e-12
DEFAULT_TAIL_TOL = 1e-14


def sphere_area(n: int) -> float:
    """Lebesgue measure |S^n| of the unit n-sphere in R^{n+1}."""
    if n < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {n}")
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def harmonic_dimension(k: int, n: int) -> int:
    """d_k(n), the dimension of degree-k spherical harmonics on S^n."""
    if k < 0 or n < 1:
        raise ValueError(f"invalid degree/dimension k={k}, n={n}")
    if n == 1:
        return 1 if k == 0 else 2
    return math.comb(n + k, n) - (math.comb(n + k - 2, n) if k >= 2 else 0)


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + CLAMP_TOL):
        raise ValueError("argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def gegenbauer_all(nu: float, kmax: int, t):
    """All C_0^nu .. C_kmax^nu at ``t``; result has shape (kmax + 1,) + t.shape."""
    if nu <= 0:
        raise ValueError(f"Gegenbauer order must be positive, got {nu}")
    if kmax < 0:
        raise ValueError(f"degree must be >= 0, got {kmax}")
    t = _check_t(t)
    out = np.empty((kmax + 1,) + t.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 2.0 * nu * t
    for k in range(2, kmax + 1):
        out[k] = (2.0 * t * (k + nu - 1) * out[k - 1] - (k + 2 * nu - 2) * out[k - 2]) / k
    return out


def gegenbauer(nu: float, k: int, t):
    """C_k^nu(t) by forward three-term recurrence.

    Arguments slightly outside [-1, 1] (within 1e-12) are clamped; anything
    further out raises ``ValueError``.
    """
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    val = gegenbauer_all(nu, k, t)[k]
    return float(val) if np.ndim(val) == 0 else val


def gegenbauer_at_one(nu: float, k: int) -> float:
    """C_k^nu(1) = binomial(2 nu + k - 1, k), valid for real nu > 0."""
    return math.exp(math.lgamma(2 * nu + k) - math.lgamma(k + 1) - math.lgamma(2 * nu))


def gegenbauer_norm_constant(nu: float, k: int, n: int) -> float:
    """|S^{n-1}| * int_{-1}^{1} [C_k^nu(t)]^2 (1 - t^2)^{n/2 - 1} dt for nu = (n-1)/2.

    Uses the closed form C_k^nu(1)^2 |S^n| / d_k(n).
    """
    if n < 2 or k < 0:
        raise ValueError(f"invalid n={n}, k={k}")
    if abs(nu - (n - 1) / 2) > 1e-14:
        raise ValueError(f"nu must equal (n-1)/2 = {(n - 1) / 2}, got {nu}")
    return gegenbauer_at_one(nu, k) ** 2 * sphere_area(n) / harmonic_dimension(k, n)


# --- theta functions -------------------------------------------------------


def _check_nome(q):
    if not 0.0 <= q < 1.0:
        raise ValueError(f"nome must lie in [0, 1), got {q}")


def theta3_terms(q: float, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest K with 2 q^{K^2} / (1 - q) < tail_tol; terms k = 1..K-1 are kept."""
    _check_nome(q)
    if q == 0.0:
        return 1
    K = 1
    while 2.0 * q ** (K * K) / (1.0 - q) >= tail_tol:
        K += 1
    return K


def theta3(u, q: float, tail_tol: float = DEFAULT_TAIL_TOL):
    """Jacobi theta_3(u, q) = 1 + 2 sum_{k>=1} q^{k^2} cos(2 k u)."""
    K = theta3_terms(q, tail_tol)
    u = np.asarray(u, dtype=float)
    k = np.arange(1, K)
    terms = q ** (k * k.astype(float))
    val = 1.0 + 2.0 * np.cos(2.0 * np.multiply.outer(u, k)) @ terms
    return float(val) if val.ndim == 0 else val


def theta3_dtheta(theta, q: float, tail_tol: float = DEFAULT_TAIL_TOL):
    """d/d theta of theta_3(pi theta, q) = -4 pi sum_k k q^{k^2} sin(2 pi k theta)."""
    _check_nome(q)
    theta = np.asarray(theta, dtype=float)
    if q == 0.0:
        val = np.zeros_like(theta)
        return float(val) if val.ndim == 0 else val
    # k q^{k^2} has ratio (1 + 1/k) q^{2k+1} between consecutive terms, which
    # decreases in k; stop once the geometric majorant of the tail is small
    K = 1
    while True:
        r = (1.0 + 1.0 / K) * q ** (2 * K + 1)
        if r < 1.0 and 4.0 * math.pi * K * q ** (K * K) / (1.0 - r) < tail_tol:
            break
        K += 1
    k = np.arange(1, K)
    terms = k * q ** (k * k.astype(float))
    val = -4.0 * math.pi * (np.sin(2.0 * math.pi * np.multiply.outer(theta, k)) @ terms)
    return float(val) if val.ndim == 0 else val


# --- spherical harmonics on S^2 -----------------------------------------------


@dataclass(frozen=True)
class SphericalHarmonicIndex:
    degree: int
    order: int

    def __post_init__(self):
        if self.degree < 0 or abs(self.order) > self.degree:
            raise ValueError(f"invalid harmonic index (k={self.degree}, j={self.order})")


def adapted_orders(k: int) -> list[int]:
    """Orders of degree k in the adapted basis: the zonal order 0 first, then 1, -1, 2, -2, ..."""
    out = [0]
    for m in range(1, k + 1):
        out += [m, -m]
    return out


def _harmonic_constant(k: int, m: int) -> float:
    # sqrt((2k+1) Gamma(m+1/2)^2 Gamma(k-m+1) / (2^{2-2m} pi^2 Gamma(k+m+1))); orthonormal on S^2
    logc = (
        math.log(2 * k + 1)
        + 2 * math.lgamma(m + 0.5)
        + math.lgamma(k - m + 1)
        - (2 - 2 * m) * math.log(2.0)
        - 2 * math.log(math.pi)
        - math.lgamma(k + m + 1)
    )
    return math.exp(0.5 * logc)


def spherical_harmonic(idx: SphericalHarmonicIndex, t, theta):
    """Y_k^j at latitude-sine ``t`` and longitude ``theta``.

    Orthonormal with respect to Lebesgue measure on S^2 (area 4 pi), no
    Condon-Shortley phase. The factor (1 - t^2)^{|j|/2} is taken from t.
    """
    k, j = idx.degree, idx.order
    m = abs(j)
    t = _check_t(t)
    theta = np.asarray(theta, dtype=float)
    radial = gegenbauer_all(m + 0.5, k - m, t)[k - m] * (1.0 - t * t) ** (m / 2)
    val = _harmonic_constant(k, m) * radial * np.exp(1j * j * theta)
    return complex(val) if np.ndim(val) == 0 else val


def harmonic_block(k: int, t, theta) -> np.ndarray:
    """Degree-k harmonics in adapted order; shape t.shape + (2k + 1,)."""
    t = _check_t(t)
    theta = np.asarray(theta, dtype=float)
    cols = []
    for j in adapted_orders(k):
        m = abs(j)
        radial = gegenbauer_all(m + 0.5, k - m, t)[k - m] * (1.0 - t * t) ** (m / 2)
        cols.append(_harmonic_constant(k, m) * radial * np.exp(1j * j * theta))
    return np.stack(cols, axis=-1)


def harmonic_blocks(L: int, t, theta) -> list[np.ndarray]:
    """[harmonic_block(k, t, theta) for k = 0..L], sharing one recurrence per order."""
    t = _check_t(t)
    theta = np.asarray(theta, dtype=float)
    radial = {}
    for m in range(L + 1):
        g = gegenbauer_all(m + 0.5, L - m, t) * (1.0 - t * t) ** (m / 2)
        phase_p = np.exp(1j * m * theta)
        for k in range(m, L + 1):
            c = _harmonic_constant(k, m) * g[k - m]
            radial[(k, m)] = c * phase_p
            if m:
                radial[(k, -m)] = c * np.conj(phase_p)
    return [np.stack([radial[(k, j)] for j in adapted_orders(k)], axis=-1) for k in range(L + 1)]


def cartesian_to_sphere(xi) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors (..., 3) to (t, theta) with t = xi_z and theta the longitude."""
    xi = np.asarray(xi, dtype=float)
    t = np.clip(xi[..., 2], -1.0, 1.0)
    theta = np.arctan2(xi[..., 1], xi[..., 0])
    return t, theta


def sphere_to_cartesian(t, theta) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    r = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    return np.stack([r * np.cos(theta), r * np.sin(theta), t], axis=-1)
