"""Diffusive approximate identities, weight functions and wavelet families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .harmonic import (
    RepIndex,
    SpectralCoefficients,
    rep_dim,
    rep_ids,
    rep_index,
    synthesize,
)
from .specfun import gegenbauer_all, gegenbauer_at_one, harmonic_dimension

ALPHA_TAIL_TOL = 1e-12
UNIT_TOL = 1e-12


# --- approximate identities ----------------------------------------------------------


def _lambda_positive(rep: RepIndex) -> bool:
    return rep.lambda_sq > 0


@dataclass(frozen=True)
class DiffusiveIdentity:
    """t -> p_hat_t(pi) on a finite set of representations.

    ``spectral(t, rep)`` returns the matrix; ``derivative`` is optional (central
    differences otherwise). ``profile(t, lambda_sq)`` and ``rate(t, lambda_sq)``
    are set for identities of the form p(t) I with -dp/dt = rate, which is what
    the wavelet constructions need.
    """

    geometry: str
    reps: tuple
    spectral: Callable
    derivative: Callable | None = None
    plus: Callable = _lambda_positive
    profile: Callable | None = None
    rate: Callable | None = None
    rate_sqrt: Callable | None = None

    def rep(self, id: int) -> RepIndex:
        for r in self.reps:
            if r.id == id:
                return r
        raise KeyError(id)

    def p_hat(self, t: float, rep: RepIndex) -> np.ndarray:
        return np.asarray(self.spectral(t, rep), dtype=complex)

    def dp_hat(self, t: float, rep: RepIndex) -> np.ndarray:
        if self.derivative is not None:
            return np.asarray(self.derivative(t, rep), dtype=complex)
        h = 1e-6 * max(t, 1e-12)
        return (self.p_hat(t + h, rep) - self.p_hat(t - h, rep)) / (2 * h)

    def scalar_rate(self, t: float, rep: RepIndex) -> float:
        """m with -d/dt p_hat_t(pi) = m I; raises if the derivative is not scalar."""
        if self.rate is not None:
            return float(self.rate(t, rep.lambda_sq))
        M = -self.dp_hat(t, rep)
        m = np.trace(M).real / rep.dim
        if np.max(np.abs(M - m * np.eye(rep.dim))) > 1e-12 * max(1.0, abs(m)):
            raise ValueError(f"-d/dt p_hat is not a multiple of the identity at id={rep.id}")
        return float(m)

    def sqrt_rate(self, t: float, rep: RepIndex) -> float:
        if self.rate_sqrt is not None:
            return float(self.rate_sqrt(t, rep.lambda_sq))
        return math.sqrt(max(self.scalar_rate(t, rep), 0.0))

    def scalar_value(self, t: float, rep: RepIndex) -> float:
        if self.profile is not None:
            return float(self.profile(t, rep.lambda_sq))
        M = self.p_hat(t, rep)
        return float(np.trace(M).real / rep.dim)


def _heat_profile(t, lam_sq):
    return math.exp(-t * lam_sq)


def _heat_rate(t, lam_sq):
    return lam_sq * math.exp(-t * lam_sq)


def _heat_rate_sqrt(t, lam_sq):
    return math.sqrt(lam_sq) * math.exp(-t * lam_sq / 2)


def make_reps(geometry: str, bandlimit: int, lambda_scale: float = 1.0, lambda_sq=None) -> tuple:
    """RepIndex tuple; ``lambda_sq`` (sequence or callable on ids) overrides the eigenvalues."""
    reps = []
    for i in rep_ids(geometry, bandlimit):
        r = rep_index(geometry, i, lambda_scale)
        if lambda_sq is not None:
            lam = lambda_sq(i) if callable(lambda_sq) else lambda_sq[abs(i)]
            if i != 0 and lam <= 0:
                raise ValueError(f"eigenvalue override must be positive for id={i}")
            r = RepIndex(r.geometry, r.id, r.dim, float(lam) if i != 0 else 0.0, r.rank)
        reps.append(r)
    return tuple(reps)


def heat_identity(geometry: str, bandlimit: int, lambda_scale: float = 1.0, lambda_sq=None) -> DiffusiveIdentity:
    """Spectral heat kernel p_hat_t(pi) = exp(-t lambda_pi^2) I."""
    reps = make_reps(geometry, bandlimit, lambda_scale, lambda_sq)
    return DiffusiveIdentity(
        geometry,
        reps,
        spectral=lambda t, r: math.exp(-t * r.lambda_sq) * np.eye(r.dim),
        derivative=lambda t, r: -r.lambda_sq * math.exp(-t * r.lambda_sq) * np.eye(r.dim),
        profile=_heat_profile,
        rate=_heat_rate,
        rate_sqrt=_heat_rate_sqrt,
    )


@dataclass
class ConditionResult:
    passed: bool
    worst: float
    witness: str = ""


@dataclass
class DiffusiveReport:
    conditions: dict = field(default_factory=dict)
    bound: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "bound": self.bound,
            "conditions": {k: vars(v) for k, v in self.conditions.items()},
        }


def verify_diffusive(identity: DiffusiveIdentity, t_samples=None, tol: float = 1e-12) -> DiffusiveReport:
    """Check the four defining conditions of a diffusive approximate identity.

    (1) sup ||p_hat_t|| does not grow beyond the sampled sup when t is pushed 100x past the samples;
    (2) ||p_hat_t - I|| is nonincreasing as t = 10^-2 .. 10^-12 shrinks and ends below 1e-6;
    (3) on the plus set, ||p_hat_t|| is nonincreasing for t = 1 .. 10^8 and ends below 1e-6;
    (4) on the plus set, -d/dt p_hat_t has eigenvalues >= -tol at the sampled t.
    """
    if t_samples is None:
        t_samples = np.geomspace(1e-4, 10.0, 13)
    t_samples = np.asarray(t_samples, dtype=float)
    if np.any(t_samples <= 0):
        raise ValueError("t samples must be positive")
    rep_list = identity.reps
    report = DiffusiveReport()

    def norm(t, r):
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.linalg.norm(identity.p_hat(t, r), 2)
        return float(v) if np.isfinite(v) else math.inf

    sampled = max(norm(t, r) for t in t_samples for r in rep_list)
    extended_t = np.concatenate([t_samples, t_samples.max() * np.array([10.0, 100.0])])
    worst, wit = -math.inf, ""
    for t in extended_t:
        for r in rep_list:
            v = norm(t, r)
            if v > worst:
                worst, wit = v, f"t={t:g}, id={r.id}"
    report.bound = sampled
    report.conditions["bounded"] = ConditionResult(
        bool(math.isfinite(sampled) and worst <= sampled * (1 + 1e-9) + tol), worst, wit
    )

    small_t = 10.0 ** -np.arange(2, 13)
    ok, worst, wit = True, 0.0, ""
    for r in rep_list:
        with np.errstate(over="ignore", invalid="ignore"):
            errs = [float(np.linalg.norm(identity.p_hat(t, r) - np.eye(r.dim), 2)) for t in small_t]
        if not (all(np.isfinite(errs)) and all(b <= a + tol for a, b in zip(errs, errs[1:])) and errs[-1] < 1e-6):
            ok = False
            wit = wit or f"id={r.id}, errors={errs[0]:.3g}..{errs[-1]:.3g}"
        worst = max(worst, errs[-1] if np.isfinite(errs[-1]) else math.inf)
    report.conditions["identity_limit"] = ConditionResult(ok, worst, wit)

    large_t = 10.0 ** np.arange(0, 9)
    ok, worst, wit = True, 0.0, ""
    for r in rep_list:
        if not identity.plus(r):
            continue
        vals = [norm(t, r) for t in large_t]
        if not (all(b <= a + tol for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-6):
            ok = False
            wit = wit or f"id={r.id}, ||p_hat|| at t=1e8 is {vals[-1]:.3g}"
        worst = max(worst, vals[-1])
    report.conditions["decay"] = ConditionResult(ok, worst, wit)

    ok, worst, wit = True, math.inf, ""
    for t in t_samples:
        for r in rep_list:
            if not identity.plus(r):
                continue
            with np.errstate(over="ignore", invalid="ignore"):
                M = -identity.dp_hat(t, r)
            if not np.all(np.isfinite(M)):
                ok, wit = False, wit or f"t={t:g}, id={r.id}: non-finite derivative"
                worst = -math.inf
                continue
            ev = float(np.min(np.linalg.eigvalsh((M + M.conj().T) / 2)))
            if ev < worst:
                worst = ev
            if ev < -tol:
                ok = False
                wit = wit or f"t={t:g}, id={r.id}, min eigenvalue {ev:.3g}"
    report.conditions["monotone"] = ConditionResult(ok, worst, wit)
    return report


# --- weight functions ------------------------------------------------------------------


@dataclass(frozen=True)
class WeightFunction:
    """alpha(rho) > 0: constant, power law c rho^exponent, or the heat trace -d/drho p_rho(1)."""

    kind: str
    c: float = 1.0
    exponent: float = 0.0
    geometry: str | None = None
    bandlimit: int | None = None
    lambda_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "power-law", "heat-trace"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind != "heat-trace" and self.c <= 0:
            raise ValueError("weight constant must be positive")
        if self.kind == "heat-trace" and (self.geometry is None or self.bandlimit is None):
            raise ValueError("heat-trace weight needs a geometry and a band limit")

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.kind == "constant":
            out = np.full(rho.shape, float(self.c))
        elif self.kind == "power-law":
            out = self.c * rho**self.exponent
        else:
            out = np.vectorize(self._heat_trace, otypes=[float])(rho)
        return float(out) if out.ndim == 0 else out

    def _terms(self, rho: float, ids):
        out = []
        for i in ids:
            d = rep_dim(self.geometry, i)
            lam = rep_index(self.geometry, i, self.lambda_scale).lambda_sq
            mult = 2 if (self.geometry == "torus" and i > 0) else 1
            out.append(mult * d * d * lam * math.exp(-rho * lam))
        return out

    def tail_bound(self, rho: float) -> float:
        """Geometric majorant of the omitted terms beyond the band limit.

        Consecutive-term ratios decrease in the degree for all supported
        geometries, so the first omitted ratio bounds every later one.
        """
        K = self.bandlimit
        f1, f2 = self._terms(rho, [K + 1, K + 2])
        if f1 == 0.0:
            return 0.0
        r = f2 / f1
        if r >= 1.0:
            return math.inf
        return f1 / (1.0 - r)

    def _heat_trace(self, rho: float) -> float:
        if rho <= 0:
            raise ValueError("heat trace needs rho > 0")
        bound = self.tail_bound(rho)
        if bound > ALPHA_TAIL_TOL:
            raise ValueError(
                f"heat-trace band {self.bandlimit} too small at rho={rho:g} (tail bound {bound:.3g})"
            )
        ids = range(1, self.bandlimit + 1)
        return float(math.fsum(self._terms(rho, ids)))


def weight_alpha(kind: str, geometry: str | None = None, bandlimit: int | None = None, c: float = 1.0,
                 exponent: float = 0.0, lambda_scale: float = 1.0) -> WeightFunction:
    return WeightFunction(kind, c, exponent, geometry, bandlimit, lambda_scale)


# --- wavelet families -------------------------------------------------------------------


def _is_unitary(M, tol=1e-10) -> bool:
    return np.allclose(M @ M.conj().T, np.eye(len(M)), atol=tol)


@dataclass(frozen=True)
class WaveletFamily:
    """Spectral generator (rho, pi) -> psi_hat_rho(pi) = sqrt(rate(rho)/alpha(rho)) M_pi.

    ``kind`` is 'group-central' (M = eta_pi), 'zonal' (M = e1 e1^T on S^2),
    'nonzonal' (M = e1 w(k)^T on S^2) or 'quotient' (M = Gamma_hat(t_n) on S^3).
    """

    geometry: str
    kind: str
    identity: DiffusiveIdentity
    alpha: WeightFunction
    structures: dict
    n: int = 2
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def bandlimit(self) -> int:
        return max(abs(r.id) for r in self.identity.reps)

    @property
    def coefficient_geometry(self) -> str:
        return "s2" if self.kind in ("zonal", "nonzonal") else self.geometry

    def plus_reps(self):
        return [r for r in self.identity.reps if self.identity.plus(r)]

    def scale_factor(self, rho: float, rep: RepIndex) -> float:
        if not self.identity.plus(rep):
            return 0.0
        return self.identity.sqrt_rate(rho, rep) / math.sqrt(float(self.alpha(rho)))

    def structure(self, id: int) -> np.ndarray:
        return self.structures[id]

    def coefficient(self, rho: float, id: int) -> np.ndarray:
        rep = self.identity.rep(id)
        return self.scale_factor(rho, rep) * self.structures[id]

    def coefficients(self, rho: float) -> SpectralCoefficients:
        return SpectralCoefficients(
            self.coefficient_geometry,
            self.bandlimit,
            {r.id: self.coefficient(rho, r.id) for r in self.identity.reps},
        )

    def evaluate(self, rho: float, points) -> np.ndarray:
        """psi_rho at sample points (torus angles, quaternions, unit vectors)."""
        if self.kind == "quotient":
            from .quotient import evaluate_quotient_family

            return evaluate_quotient_family(self, rho, points)
        if self.kind == "zonal" and self.n != 2:
            return self.zonal_profile(rho, np.asarray(points, dtype=float)[..., -1])
        return synthesize(self.coefficients(rho), points)

    def zonal_profile(self, rho: float, t) -> np.ndarray:
        """sum_k (2k+n-1)/(n-1) s_k C_k^{(n-1)/2}(t) for zonal families on S^n."""
        if self.kind != "zonal":
            raise ValueError("zonal_profile needs a zonal family")
        n = self.n
        nu = (n - 1) / 2
        K = self.bandlimit
        C = gegenbauer_all(nu, K, t)
        out = np.zeros(np.shape(t))
        for r in self.identity.reps:
            k = r.id
            if k == 0:
                continue
            ratio = harmonic_dimension(k, n) / gegenbauer_at_one(nu, k)
            out = out + ratio * self.scale_factor(rho, r) * C[k]
        return out


def _eta_matrix(eta, rep: RepIndex) -> np.ndarray:
    if eta is None:
        return np.eye(rep.dim, dtype=complex)
    if callable(eta):
        val = eta(rep.id)
    else:
        val = eta.get(rep.id, 1.0)
    M = np.atleast_2d(np.asarray(val, dtype=complex))
    if M.shape == (1, 1) and rep.dim > 1:
        M = M[0, 0] * np.eye(rep.dim)
    if M.shape != (rep.dim, rep.dim) or not _is_unitary(M):
        raise ValueError(f"eta at id={rep.id} is not a {rep.dim}x{rep.dim} unitary")
    return M


def minus_i_sign(k: int) -> complex:
    """eta_k = -i sign(k) on the torus."""
    return -1j * float(np.sign(k)) if k != 0 else 1.0


def heat_wavelet_family(identity: DiffusiveIdentity, alpha: WeightFunction, eta=None) -> WaveletFamily:
    """Group family psi_hat_rho(pi) = alpha^{-1/2} sqrt(-d/drho p_hat) eta_pi.

    ``eta`` maps ids to unit phases or unitaries (default identity) and must
    not depend on rho.
    """
    if identity.geometry not in ("torus", "s3", "so3"):
        raise ValueError(f"group family not available on {identity.geometry!r}")
    structures = {}
    for r in identity.reps:
        identity.scalar_rate(1.0, r)  # rejects non-scalar derivatives
        structures[r.id] = _eta_matrix(eta, r) if identity.plus(r) else np.zeros((r.dim, r.dim), complex)
    return WaveletFamily(identity.geometry, "group-central", identity, alpha, structures)


def _unit_vector(v, d: int, k: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    if v.shape != (d,):
        raise ValueError(f"w({k}) must have length {d}")
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise ValueError(f"w({k}) is not a unit vector (norm {np.linalg.norm(v):.15g})")
    return v


def equidistributed_weights(k: int) -> np.ndarray:
    return np.full(2 * k + 1, 1.0 / math.sqrt(2 * k + 1), dtype=complex)


def first_vector(k: int) -> np.ndarray:
    e = np.zeros(2 * k + 1, complex)
    e[0] = 1.0
    return e


def random_unit_weights(rng: np.random.Generator, k: int) -> np.ndarray:
    v = rng.standard_normal(2 * k + 1) + 1j * rng.standard_normal(2 * k + 1)
    return v / np.linalg.norm(v)


def nonzonal_family(alpha: WeightFunction, w, bandlimit: int, lambda_scale: float = 1.0,
                    lambda_sq=None) -> WaveletFamily:
    """S^2 family psi_hat_rho(k) = alpha^{-1/2} lambda_k e^{-lambda_k^2 rho/2} e1 w(k)^T.

    ``w`` maps degree k to a unit vector in adapted order (or is a callable of k).
    """
    identity = heat_identity("s2", bandlimit, lambda_scale, lambda_sq)
    structures = {}
    for r in identity.reps:
        d = r.dim
        M = np.zeros((d, d), complex)
        if identity.plus(r):
            M[0] = _unit_vector(w(r.id) if callable(w) else w[r.id], d, r.id)
        structures[r.id] = M
    return WaveletFamily("s2", "nonzonal", identity, alpha, structures)


def zonal_family_on_sphere(n: int, alpha: WeightFunction, bandlimit: int, lambda_seq=None,
                           lambda_scale: float = 1.0) -> WaveletFamily:
    """Zonal heat family on S^n, psi = alpha^{-1/2} sum_k (2k+n-1)/(n-1) lambda_k e^{-lambda_k^2 rho/2} C_k(t).

    Default eigenvalues lambda_k^2 = lambda_scale * k (k + n - 1); ``lambda_seq``
    overrides them with any positive sequence indexed by k.
    """
    if n < 2:
        raise ValueError(f"sphere dimension must be >= 2, got {n}")
    if lambda_seq is None:
        lambda_seq = [lambda_scale * k * (k + n - 1) for k in range(bandlimit + 1)]
    identity = heat_identity("s2", bandlimit, 1.0, lambda_seq)
    structures = {}
    for r in identity.reps:
        M = np.zeros((r.dim, r.dim), complex)
        if identity.plus(r):
            M[0, 0] = 1.0
        structures[r.id] = M
    return WaveletFamily("s2", "zonal", identity, alpha, structures, n=n)
