"""Wavelets on lens spaces S^3 / Gamma with Gamma cyclic of order p, acting from the right."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import grids
from .diffusive import WaveletFamily, WeightFunction, heat_identity
from .specfun import gegenbauer_all


@dataclass(frozen=True)
class QuotientSpec:
    p: int
    gamma_elements: np.ndarray = field(init=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or self.p < 1:
            raise ValueError(f"lens-space order must be a positive integer, got {self.p!r}")
        u = 2 * math.pi * np.arange(self.p) / self.p
        el = np.stack([np.cos(u), np.sin(u), np.zeros_like(u), np.zeros_like(u)], axis=1)
        el.setflags(write=False)
        object.__setattr__(self, "gamma_elements", el)

    @property
    def angles(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.p) / self.p

    def is_closed(self, tol: float = 1e-12) -> bool:
        el = self.gamma_elements
        for a, b in itertools.product(el, el):
            prod = grids.quaternion_mul(a, b)
            if np.min(np.linalg.norm(el - prod, axis=1)) > tol:
                return False
        return True

    def translate(self, x) -> np.ndarray:
        """x gamma for every gamma; shape (p,) + x.shape."""
        x = np.asarray(x, dtype=float)
        return np.stack([grids.quaternion_mul(x, np.broadcast_to(g, x.shape)) for g in self.gamma_elements])


def _check(p: int, n: int):
    if p < 1 or n < 0:
        raise ValueError(f"need p >= 1 and n >= 0, got p={p}, n={n}")


def gamma_rank(p: int, n: int) -> int:
    """#{m in 0..n : n - 2m = 0 mod p}."""
    _check(p, n)
    return sum(1 for m in range(n + 1) if (n - 2 * m) % p == 0)


def gamma_rank_bruteforce(p: int, n: int) -> float:
    """(1/p) sum_k C_n^1(cos 2 pi k / p), the averaged character."""
    _check(p, n)
    t = np.cos(2 * math.pi * np.arange(1, p + 1) / p)
    return float(np.mean(gegenbauer_all(1.0, n, t)[n]))


def character_expansion_gap(n: int, u) -> float:
    """max |C_n^1(cos u) - sum_m cos((n - 2m) u)|."""
    u = np.asarray(u, dtype=float)
    lhs = gegenbauer_all(1.0, n, np.cos(u))[n]
    rhs = sum(np.cos((n - 2 * m) * u) for m in range(n + 1))
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class GammaProjector:
    """Gamma_hat(t_n) in the weight basis of t_n, for n = 0..N."""

    spec: QuotientSpec
    matrices: dict
    ranks: dict

    def __getitem__(self, n):
        return self.matrices[n]


def gamma_projector(spec: QuotientSpec, bandlimit: int) -> GammaProjector:
    """Average of t_n(gamma) over Gamma; t_n(e^{iu}) = diag(e^{i(n - 2m) u}) in the weight basis."""
    mats, ranks = {}, {}
    for n in range(bandlimit + 1):
        w = n - 2 * np.arange(n + 1)
        avg = np.mean(np.exp(1j * np.outer(spec.angles, w)), axis=0)
        # a mean of p-th roots of unity is exactly 0 or 1
        exact = np.round(avg.real)
        if np.max(np.abs(avg - exact)) > 1e-10:
            raise ArithmeticError("Gamma average is not a 0/1 projector")
        mats[n] = np.diag(exact).astype(complex)
        ranks[n] = int(round(np.trace(mats[n]).real))
    return GammaProjector(spec, mats, ranks)


def quotient_zonal_family(spec: QuotientSpec, alpha: WeightFunction, bandlimit: int,
                          lambda_scale: float = 1.0) -> WaveletFamily:
    """S^3 heat family averaged over right Gamma-translates.

    Coefficients are c_n Gamma_hat(t_n); samples are the average of the
    central family at x gamma.
    """
    identity = heat_identity("s3", bandlimit, lambda_scale)
    proj = gamma_projector(spec, bandlimit)
    structures = {}
    for r in identity.reps:
        structures[r.id] = proj[r.id] if identity.plus(r) else np.zeros((r.dim, r.dim), complex)
    return WaveletFamily("s3", "quotient", identity, alpha, structures, extras={"spec": spec, "projector": proj})


def evaluate_quotient_family(family: WaveletFamily, rho: float, points) -> np.ndarray:
    """(1/|Gamma|) sum_gamma sum_n (n+1) s_n C_n^1(Sc(x gamma))."""
    spec: QuotientSpec = family.extras["spec"]
    points = np.asarray(points, dtype=float)
    N = family.bandlimit
    s = np.array([family.scale_factor(rho, r) for r in family.identity.reps])
    shifted = spec.translate(points)
    C = gegenbauer_all(1.0, N, np.clip(shifted[..., 0], -1.0, 1.0))
    vals = np.tensordot((np.arange(N + 1) + 1) * s, C, axes=(0, 0))
    return vals.mean(axis=0)


def central_term(n: int, points) -> np.ndarray:
    """C_n^1(Sc x), the character of t_n."""
    x = np.asarray(points, dtype=float)
    return gegenbauer_all(1.0, n, np.clip(x[..., 0], -1.0, 1.0))[n]


def averaged_term(spec: QuotientSpec, n: int, points) -> np.ndarray:
    """(1/|Gamma|) sum_gamma C_n^1(Sc(x gamma)); vanishes identically when the rank is 0."""
    return central_term(n, spec.translate(points)).mean(axis=0)


# --- invariance ----------------------------------------------------------------------


def _monomial_exponents(degree: int):
    return [e for e in itertools.product(range(degree + 1), repeat=4) if sum(e) <= degree]


def _monomials(points, exps) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    return np.stack([np.prod(x ** np.array(e), axis=-1) for e in exps], axis=-1)


def polynomial_interpolant(samples, grid, degree: int):
    """Weighted least-squares fit by polynomials of degree <= ``degree`` restricted to S^3."""
    if grid.geometry != "s3":
        raise ValueError("interpolation needs an S^3 grid")
    exps = _monomial_exponents(degree)
    A = _monomials(grid.nodes, exps)
    sw = np.sqrt(grid.weights)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], np.asarray(samples) * sw, rcond=1e-12)
    return lambda pts: _monomials(pts, exps) @ coef


@dataclass
class InvarianceReport:
    max_deviation: float
    witness: tuple
    fit_residual: float = 0.0

    def passed(self, tol: float) -> bool:
        return self.max_deviation <= tol


def gamma_invariance_check(f, spec: QuotientSpec, grid=None, points=None, degree: int | None = None,
                           seed: int = 0) -> InvarianceReport:
    """max over gamma and test points of |f(x gamma) - f(x)|.

    ``f`` is a callable on quaternions, or samples on ``grid`` which are first
    resynthesized as a polynomial of degree <= ``degree`` (default: grid band).
    """
    fit_res = 0.0
    if not callable(f):
        if grid is None:
            raise ValueError("samples need their S^3 grid")
        deg = grid.bandlimit if degree is None else degree
        samples = np.asarray(f)
        fn = polynomial_interpolant(samples, grid, deg)
        fit_res = float(np.max(np.abs(fn(grid.nodes) - samples)))
        if points is None:
            points = grid.nodes
    else:
        fn = f
        if points is None:
            points = grids.random_unit_quaternions(np.random.default_rng(seed), 200)
    points = np.asarray(points, dtype=float)
    base = fn(points)
    worst, wit = 0.0, ()
    for k, xg in enumerate(spec.translate(points)):
        dev = np.abs(fn(xg) - base)
        i = int(np.argmax(dev))
        if dev[i] > worst:
            worst, wit = float(dev[i]), (k, tuple(points[i]))
    return InvarianceReport(worst, wit, fit_res)
