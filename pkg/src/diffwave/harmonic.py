"""Group Fourier analysis on T, S^3 (central functions), SO(3) and S^2 = SO(3)/SO(2).

Conventions
-----------
Fourier coefficients are phi_hat(pi) = int phi(g) pi(g)^* dmu(g) against
probability Haar measure, with synthesis phi(g) = sum_pi d_pi tr(pi(g) phi_hat(pi)).

On SO(3) the representation of degree k is

    D_k(A)_{ij} = int_{S^2} Y_k^i(xi) conj(Y_k^j(A^{-1} xi)) dxi

in the adapted harmonic basis (zonal harmonic first), a genuine unitary
homomorphism. Functions on S^2 are lifted by phi~(A) = phi(A xi0) and their
coefficients occupy the first row only: Y_k^j lifts to E_{1j} / sqrt(4 pi d_k).
The stabilizer projector is then diag(1, 0, ..., 0).

Norms on S^2 use the normalized measure dxi / 4 pi, the one induced from Haar
measure on SO(3).
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from . import grids
from .grids import AREA_S2, QuadratureGrid
from .specfun import (
    adapted_orders,
    cartesian_to_sphere,
    gegenbauer_all,
    gegenbauer_at_one,
    harmonic_blocks,
    sphere_area,
)

GEOMETRIES = ("torus", "s3", "so3", "s2")
S3_LAPLACE_CONSTANT = (2 * math.pi**2) ** (2.0 / 3.0)
CENTRALITY_TOL = 1e-8


# --- representation indices -------------------------------------------------------


@dataclass(frozen=True)
class RepIndex:
    geometry: str
    id: int
    dim: int
    lambda_sq: float
    rank: int


def rep_dim(geometry: str, id: int) -> int:
    if geometry == "torus":
        return 1
    if geometry == "s3":
        return id + 1
    if geometry in ("so3", "s2"):
        return 2 * id + 1
    raise ValueError(f"unknown geometry {geometry!r}")


def eigenvalue(geometry: str, id: int, lambda_scale: float = 1.0) -> float:
    """lambda_pi^2 such that the Laplacian acts on H_pi by -lambda_pi^2."""
    if geometry == "torus":
        base = 4 * math.pi**2 * id * id
    elif geometry == "s3":
        base = S3_LAPLACE_CONSTANT * id * (id + 2)
    elif geometry in ("so3", "s2"):
        base = float(id * (id + 1))
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    return lambda_scale * base


def rep_index(geometry: str, id: int, lambda_scale: float = 1.0) -> RepIndex:
    if geometry != "torus" and id < 0:
        raise ValueError(f"representation index must be >= 0 on {geometry}")
    d = rep_dim(geometry, id)
    rank = 1 if geometry == "s2" else d
    return RepIndex(geometry, id, d, eigenvalue(geometry, id, lambda_scale), rank)


def rep_ids(geometry: str, bandlimit: int) -> list[int]:
    if geometry == "torus":
        return list(range(-bandlimit, bandlimit + 1))
    return list(range(bandlimit + 1))


# --- coefficient container --------------------------------------------------------


@dataclass(frozen=True)
class SpectralCoefficients:
    """Band-limited map id -> d x d complex matrix."""

    geometry: str
    bandlimit: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry!r}")
        for i, m in self.entries.items():
            d = rep_dim(self.geometry, i)
            if m.shape != (d, d):
                raise ValueError(f"entry {i} has shape {m.shape}, expected {(d, d)}")

    @classmethod
    def zeros(cls, geometry: str, bandlimit: int) -> "SpectralCoefficients":
        return cls(
            geometry,
            bandlimit,
            {i: np.zeros((rep_dim(geometry, i),) * 2, complex) for i in rep_ids(geometry, bandlimit)},
        )

    def __getitem__(self, id):
        return self.entries[id]

    def ids(self):
        return sorted(self.entries)

    def map(self, fn, geometry: str | None = None) -> "SpectralCoefficients":
        """Apply ``fn(id, matrix)`` entrywise."""
        return SpectralCoefficients(
            geometry or self.geometry, self.bandlimit, {i: np.asarray(fn(i, m), complex) for i, m in self.entries.items()}
        )

    def norm_sq(self) -> float:
        """Parseval: sum_pi d_pi ||phi_hat(pi)||_HS^2."""
        return float(sum(rep_dim(self.geometry, i) * np.sum(np.abs(m) ** 2) for i, m in self.entries.items()))

    def inner(self, other: "SpectralCoefficients") -> complex:
        """<phi, psi> = sum_pi d_pi tr(psi_hat^* phi_hat)."""
        return complex(
            sum(rep_dim(self.geometry, i) * np.vdot(other.entries[i], m) for i, m in self.entries.items())
        )

    def __add__(self, other):
        return SpectralCoefficients(
            self.geometry, max(self.bandlimit, other.bandlimit),
            {i: self.entries.get(i, 0) + other.entries.get(i, 0) for i in set(self.entries) | set(other.entries)},
        )

    def __sub__(self, other):
        return self + other.map(lambda i, m: -m)

    def max_abs_diff(self, other) -> float:
        ids = set(self.entries) | set(other.entries)
        return max(
            float(np.max(np.abs(self.entries.get(i, 0) - other.entries.get(i, 0)), initial=0.0)) for i in ids
        )

    def without_trivial(self) -> "SpectralCoefficients":
        """Drop representations with lambda = 0 (projection onto L^2_0)."""
        return SpectralCoefficients(
            self.geometry, self.bandlimit, {i: m for i, m in self.entries.items() if eigenvalue(self.geometry, i) > 0}
        )

    def to_json(self) -> str:
        entries = []
        for i in self.ids():
            m = self.entries[i]
            rep = rep_index(self.geometry, i)
            entries.append(
                {
                    "id": i,
                    "dim": rep.dim,
                    "lambda_sq": rep.lambda_sq,
                    "matrix": [[float(z.real), float(z.imag)] for z in m.ravel()],
                }
            )
        return json.dumps({"geometry": self.geometry, "bandlimit": self.bandlimit, "entries": entries})

    @classmethod
    def from_json(cls, text: str) -> "SpectralCoefficients":
        data = json.loads(text)
        entries = {}
        for e in data["entries"]:
            flat = np.array([complex(re, im) for re, im in e["matrix"]])
            entries[int(e["id"])] = flat.reshape(e["dim"], e["dim"])
        return cls(data["geometry"], int(data["bandlimit"]), entries)


# --- SO(3) representation matrices ------------------------------------------------


@functools.lru_cache(maxsize=None)
def _s2_basis(L: int):
    grid = grids.sphere2_grid(max(L, 1))
    Y = harmonic_blocks(L, grid.coords["t"], grid.coords["theta"])
    return grid, Y


def sphere_harmonics_at(L: int, points) -> list[np.ndarray]:
    """Harmonic blocks k = 0..L (adapted order) at unit vectors ``points``."""
    t, theta = cartesian_to_sphere(points)
    return harmonic_blocks(L, t, theta)


def wigner_matrices(L: int, A, chunk: int = 256) -> list[np.ndarray]:
    """[D_k(A) for k = 0..L] by quadrature of the defining integral; shapes (..., d, d)."""
    A = np.asarray(A, dtype=float)
    batch = A.shape[:-2]
    flat = A.reshape(-1, 3, 3)
    grid, Y = _s2_basis(L)
    out = [np.empty((len(flat), 2 * k + 1, 2 * k + 1), complex) for k in range(L + 1)]
    for s in range(0, len(flat), chunk):
        part = flat[s : s + chunk]
        # A^{-1} xi = A^T xi
        rotated = np.einsum("gji,qj->gqi", part, grid.nodes)
        Yr = sphere_harmonics_at(L, rotated)
        for k in range(L + 1):
            out[k][s : s + chunk] = np.einsum("q,qi,gqj->gij", grid.weights, Y[k], np.conj(Yr[k]))
    return [o.reshape(batch + o.shape[1:]) for o in out]


def wigner_matrix(k: int, A) -> np.ndarray:
    return wigner_matrices(k, A)[k]


def _phase(k: int, angle) -> np.ndarray:
    m = np.array(adapted_orders(k))
    return np.exp(-1j * np.multiply.outer(np.asarray(angle), m))


@functools.lru_cache(maxsize=8)
def _grid_wigner(grid_band: int, L: int) -> tuple:
    """D_k on every node of so3_grid(grid_band), via D(R_g) D(S_b) D(R_a) with diagonal D(R)."""
    grid = _so3_grid(grid_band)
    betas = grid.coords["betas"]
    small = wigner_matrices(L, grids.rot_x(betas))
    euler = grid.coords["euler"]
    nb = len(betas)
    M = len(grid.coords["alphas"])
    b_index = np.tile(np.repeat(np.arange(nb), M), M)
    out = []
    for k in range(L + 1):
        pa = _phase(k, euler[:, 0])
        pg = _phase(k, euler[:, 2])
        Dk = pg[:, :, None] * small[k][b_index] * pa[:, None, :]
        Dk.setflags(write=False)
        out.append(Dk)
    return tuple(out)


@functools.lru_cache(maxsize=8)
def _so3_grid(L: int) -> QuadratureGrid:
    return grids.so3_grid(L)


def so3_grid(L: int) -> QuadratureGrid:
    """Cached SO(3) grid; node order is alpha-major, then beta, then gamma."""
    return _so3_grid(L)


def grid_wigner(grid: QuadratureGrid, L: int) -> tuple:
    if grid.geometry != "so3":
        raise ValueError("grid_wigner needs an SO(3) grid")
    if grid is not _so3_grid(grid.bandlimit):
        # foreign grid object: fall back to direct quadrature
        return tuple(wigner_matrices(L, grid.nodes))
    return _grid_wigner(grid.bandlimit, L)


# --- S^2 coefficients -----------------------------------------------------------


def sphere_analysis(samples, grid: QuadratureGrid, L: int) -> list[np.ndarray]:
    """a_k^j = int phi conj(Y_k^j) dxi (Lebesgue) for k <= L, adapted order."""
    if grid.geometry != "s2":
        raise ValueError("sphere_analysis needs an S^2 grid")
    if grid.bandlimit < L:
        raise ValueError(f"grid band {grid.bandlimit} below requested band {L}")
    Y = harmonic_blocks(L, grid.coords["t"], grid.coords["theta"])
    samples = np.asarray(samples)
    return [np.einsum("q,q,qj->j", grid.weights, samples, np.conj(Y[k])) for k in range(L + 1)]


def sphere_synthesis(a: list, points) -> np.ndarray:
    """sum_k sum_j a_k^j Y_k^j at unit vectors ``points``."""
    L = len(a) - 1
    Y = sphere_harmonics_at(L, points)
    return sum(Y[k] @ a[k] for k in range(L + 1))


def coefficients_from_harmonics(a: list) -> SpectralCoefficients:
    """Lifted coefficients of sum a_k^j Y_k^j: first row a_k / sqrt(4 pi d_k)."""
    entries = {}
    for k, ak in enumerate(a):
        d = 2 * k + 1
        m = np.zeros((d, d), complex)
        m[0] = np.asarray(ak) / math.sqrt(AREA_S2 * d)
        entries[k] = m
    return SpectralCoefficients("s2", len(a) - 1, entries)


def harmonics_from_coefficients(c: SpectralCoefficients) -> list[np.ndarray]:
    if c.geometry not in ("s2", "so3"):
        raise ValueError("expected S^2 coefficients")
    L = c.bandlimit
    return [
        c.entries[k][0] * math.sqrt(AREA_S2 * (2 * k + 1)) if k in c.entries else np.zeros(2 * k + 1, complex)
        for k in range(L + 1)
    ]


def first_row_residual(c: SpectralCoefficients) -> float:
    """max |(I - H) phi_hat| -- zero iff the coefficients come from a function on S^2."""
    return max(float(np.max(np.abs(m[1:]), initial=0.0)) for m in c.entries.values())


# --- forward / backward -------------------------------------------------------------


def _require_band(grid: QuadratureGrid, bandlimit: int):
    if grid.bandlimit < bandlimit:
        raise ValueError(f"grid is exact only to band {grid.bandlimit}, requested {bandlimit}")


def s3_shell_deviation(samples, grid: QuadratureGrid) -> float:
    """Largest deviation of samples from their mean over each conjugacy shell x0 = const."""
    x0 = grid.coords["x0"]
    samples = np.asarray(samples)
    _, inv = np.unique(x0, return_inverse=True)
    dev = 0.0
    for s in range(inv.max() + 1):
        v = samples[inv == s]
        dev = max(dev, float(np.max(np.abs(v - v.mean()))))
    return dev


def fourier_forward(geometry: str, samples, grid: QuadratureGrid, bandlimit: int) -> SpectralCoefficients:
    """phi_hat(pi) for pi up to ``bandlimit`` from samples on an exact grid.

    s3 accepts central functions only; s2 returns lifted (first-row) coefficients.
    """
    _require_band(grid, bandlimit)
    samples = np.asarray(samples)
    if geometry == "torus":
        if grid.geometry != "torus":
            raise ValueError("torus transform needs a torus grid")
        ks = np.arange(-bandlimit, bandlimit + 1)
        vals = np.exp(-2j * np.pi * np.outer(ks, grid.nodes)) @ (grid.weights * samples)
        return SpectralCoefficients("torus", bandlimit, {int(k): np.array([[v]]) for k, v in zip(ks, vals)})
    if geometry == "s3":
        if grid.geometry != "s3":
            raise ValueError("S^3 transform needs an S^3 grid")
        scale = max(1.0, float(np.max(np.abs(samples))))
        dev = s3_shell_deviation(samples, grid)
        if dev > CENTRALITY_TOL * scale:
            raise ValueError(f"S^3 input is not central (shell deviation {dev:.3e})")
        chars = gegenbauer_all(1.0, bandlimit, grid.coords["x0"])
        c = chars @ (grid.weights * samples)
        return SpectralCoefficients(
            "s3", bandlimit, {n: (c[n] / (n + 1)) * np.eye(n + 1, dtype=complex) for n in range(bandlimit + 1)}
        )
    if geometry == "s2":
        return coefficients_from_harmonics(sphere_analysis(samples, grid, bandlimit))
    if geometry == "so3":
        if grid.geometry != "so3":
            raise ValueError("SO(3) transform needs an SO(3) grid")
        D = grid_wigner(grid, bandlimit)
        ws = grid.weights * samples
        entries = {k: np.einsum("g,gji->ij", ws, np.conj(D[k])) for k in range(bandlimit + 1)}
        return SpectralCoefficients("so3", bandlimit, entries)
    raise ValueError(f"unknown geometry {geometry!r}")


def central_values(c: SpectralCoefficients) -> np.ndarray:
    """Scalar c_n with phi_hat(t_n) = c_n I; raises if an entry is not scalar."""
    out = np.zeros(c.bandlimit + 1, complex)
    for n, m in c.entries.items():
        s = np.trace(m) / (n + 1)
        if np.max(np.abs(m - s * np.eye(n + 1))) > 1e-12 * max(1.0, abs(s)):
            raise ValueError(f"S^3 coefficient at n={n} is not central")
        out[n] = s
    return out


def synthesize(c: SpectralCoefficients, points) -> np.ndarray:
    """Evaluate sum_pi d_pi tr(pi(g) phi_hat(pi)) at arbitrary points.

    points: torus angles; S^3 quaternions (central coefficients only);
    S^2 unit vectors; SO(3) rotation matrices.
    """
    points = np.asarray(points, dtype=float)
    if c.geometry == "torus":
        ks = np.array(c.ids())
        vals = np.array([c.entries[k][0, 0] for k in ks])
        return np.exp(2j * np.pi * np.multiply.outer(points, ks)) @ vals
    if c.geometry == "s3":
        cn = central_values(c)
        N = c.bandlimit
        chars = gegenbauer_all(1.0, N, points[..., 0])
        return np.tensordot((np.arange(N + 1) + 1) * cn, chars, axes=(0, 0))
    if c.geometry == "s2":
        if first_row_residual(c) > 1e-12:
            raise ValueError("coefficients are not those of a function on S^2")
        return sphere_synthesis(harmonics_from_coefficients(c), points)
    if c.geometry == "so3":
        D = wigner_matrices(c.bandlimit, points)
        return sum((2 * k + 1) * np.einsum("...ij,ji->...", D[k], c.entries[k]) for k in c.ids())
    raise ValueError(f"unknown geometry {c.geometry!r}")


def fourier_backward(c: SpectralCoefficients, grid: QuadratureGrid) -> np.ndarray:
    """Synthesis on the nodes of ``grid``."""
    if c.geometry == "so3" and grid.geometry == "so3":
        D = grid_wigner(grid, c.bandlimit)
        return sum((2 * k + 1) * np.einsum("gij,ji->g", D[k], c.entries[k]) for k in c.ids())
    if c.geometry == "s2" and grid.geometry == "so3":
        return fourier_backward(lift(c), grid)
    return synthesize(c, grid.nodes)


def lift(c: SpectralCoefficients) -> SpectralCoefficients:
    """Coefficients of phi~(A) = phi(A xi0) as a function on SO(3)."""
    if c.geometry != "s2":
        raise ValueError("only S^2 coefficients lift to SO(3)")
    return SpectralCoefficients("so3", c.bandlimit, dict(c.entries))


def descend(c: SpectralCoefficients, tol: float = 1e-10) -> SpectralCoefficients:
    """Inverse of ``lift``; requires first-row structure."""
    if first_row_residual(c) > tol:
        raise ValueError("coefficients are not constant on cosets of the stabilizer")
    return SpectralCoefficients("s2", c.bandlimit, dict(c.entries))


# --- characters and translations ------------------------------------------------------


def character(geometry: str, id: int, g):
    """chi_pi(g) = tr pi(g)."""
    if geometry == "torus":
        return np.exp(2j * np.pi * id * np.asarray(g, dtype=float))
    if geometry == "s3":
        g = np.asarray(g, dtype=float)
        val = gegenbauer_all(1.0, id, g[..., 0])[id]
        return float(val) if np.ndim(val) == 0 else val
    if geometry == "so3":
        return np.trace(wigner_matrix(id, g), axis1=-2, axis2=-1)
    raise ValueError(f"no characters for geometry {geometry!r}")


def _rep_matrix(geometry: str, id: int, g) -> np.ndarray:
    if geometry == "torus":
        return np.array([[np.exp(2j * np.pi * id * float(g))]])
    if geometry in ("so3", "s2"):
        return wigner_matrix(id, g)
    raise ValueError(
        "S^3 translations leave the central class; evaluate the function at translated points instead"
    )


def translate_left(g, c: SpectralCoefficients) -> SpectralCoefficients:
    """Coefficients of T_g phi = phi(g .): phi_hat(pi) pi(g)."""
    return c.map(lambda i, m: m @ _rep_matrix(c.geometry, i, g))


def translate_right(g, c: SpectralCoefficients) -> SpectralCoefficients:
    """Coefficients of T^g phi = phi(. g^{-1}): pi(g)^* phi_hat(pi).

    On S^2 the result lives on SO(3) and is returned with geometry 'so3'.
    """
    geometry = "so3" if c.geometry == "s2" else c.geometry
    return c.map(lambda i, m: _rep_matrix(c.geometry, i, g).conj().T @ m, geometry=geometry)


def check_involution(c: SpectralCoefficients) -> SpectralCoefficients:
    """Coefficients of phi_check(g) = conj(phi(g^{-1})): adjoint matrices."""
    return c.map(lambda i, m: m.conj().T)


# --- stabilizer projector -----------------------------------------------------------------


def adaptation_unitary(k: int) -> np.ndarray:
    """Permutation P with (adapted vector) = P @ (vector ordered j = -k..k)."""
    conventional = list(range(-k, k + 1))
    P = np.zeros((2 * k + 1, 2 * k + 1))
    for row, j in enumerate(adapted_orders(k)):
        P[row, conventional.index(j)] = 1.0
    return P


@dataclass(frozen=True)
class StabilizerProjector:
    """H(k) = int_{SO(2)} D_k(h) dh in the adapted basis, with its rank."""

    matrices: dict
    ranks: dict

    def __getitem__(self, k):
        return self.matrices[k]

    def in_conventional_basis(self, k: int) -> np.ndarray:
        P = adaptation_unitary(k)
        return P.T @ self.matrices[k] @ P


def stabilizer_projector(bandlimit: int, geometry: str = "s2") -> StabilizerProjector:
    """Projector for SO(3)/SO(2); in the adapted basis it is diag(1, 0, ..., 0)."""
    if geometry not in ("s2", "so3/so2"):
        raise ValueError(f"stabilizer projector not implemented for {geometry!r}")
    mats, ranks = {}, {}
    for k in range(bandlimit + 1):
        # Y_k^j(xi0) = sqrt(d/4pi) delta_{j0}; H = (4pi/d) conj(Y(xi0)) Y(xi0)^T
        y0 = np.zeros(2 * k + 1)
        y0[0] = math.sqrt((2 * k + 1) / AREA_S2)
        H = (AREA_S2 / (2 * k + 1)) * np.outer(y0, y0).astype(complex)
        mats[k] = H
        ranks[k] = int(round(np.trace(H).real))
    return StabilizerProjector(mats, ranks)


def zonal_project(c: SpectralCoefficients) -> SpectralCoefficients:
    """Coefficients of the stabilizer average P_X phi: H(k) phi_hat(k)."""
    if c.geometry not in ("s2", "so3"):
        raise ValueError("zonal projection is implemented for SO(3)/SO(2)")
    H = stabilizer_projector(c.bandlimit)
    return c.map(lambda k, m: H[k] @ m, geometry="s2")


def zonal_commutator(c: SpectralCoefficients) -> float:
    """max_k |H phi_hat - phi_hat H|; zero iff phi is zonal."""
    H = stabilizer_projector(c.bandlimit)
    return max(float(np.max(np.abs(H[k] @ m - m @ H[k]))) for k, m in c.entries.items())


# --- Funk-Hecke -------------------------------------------------------------------


def funk_hecke_nodes(n: int, m: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes/weights for the weight (1 - t^2)^{n/2 - 1} on [-1, 1]."""
    a = n / 2 - 1
    return roots_jacobi(m, a, a)


def funk_hecke(f, k: int, n: int, m: int = 64) -> float:
    """Multiplier mu_k with int f(xi.eta) Y_k(xi) dxi = mu_k Y_k(eta) on S^n.

    ``f`` is a callable on [-1, 1] or its samples at ``funk_hecke_nodes(n, m)``.
    """
    if n < 2 or k < 0:
        raise ValueError(f"invalid n={n}, k={k}")
    t, w = funk_hecke_nodes(n, m)
    vals = f(t) if callable(f) else np.asarray(f)
    nu = (n - 1) / 2
    Ck = gegenbauer_all(nu, k, t)[k]
    val = sphere_area(n - 1) / gegenbauer_at_one(nu, k) * np.sum(w * vals * Ck)
    return float(val) if np.isrealobj(val) else complex(val)
