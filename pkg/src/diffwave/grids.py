"""Group elements and quadrature grids on T, S^2, S^3 and SO(3).

Group grids carry probability (Haar) weights; the S^2 grid carries Lebesgue
weights summing to 4 pi. Each grid records the band limit ``L`` for which it
integrates products of two basis functions of degree <= L exactly.

Quaternions are float arrays of shape (..., 4) ordered (x0, x1, x2, x3);
points on S^2 are unit vectors of shape (..., 3); rotations are (..., 3, 3).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .specfun import sphere_area, sphere_to_cartesian

NORTH_POLE = np.array([0.0, 0.0, 1.0])
AREA_S2 = sphere_area(2)  # 4 pi
AREA_S3 = sphere_area(3)  # 2 pi^2


@dataclass(frozen=True)
class QuadratureGrid:
    geometry: str
    nodes: np.ndarray
    weights: np.ndarray
    bandlimit: int
    coords: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)
        for v in self.coords.values():
            if isinstance(v, np.ndarray):
                v.setflags(write=False)

    def __len__(self):
        return len(self.weights)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def integrate(self, values) -> complex | float:
        """Quadrature sum over the leading (node) axis."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))

    def mean(self, values):
        """Integral against the normalized measure (weights divided by their total)."""
        return self.integrate(values) / self.total


def torus_grid(n_points: int) -> QuadratureGrid:
    """Equispaced theta_m = m / n on T with weights 1/n; exact for frequencies |k| < n."""
    if n_points < 1:
        raise ValueError(f"n_points must be >= 1, got {n_points}")
    theta = np.arange(n_points) / n_points
    w = np.full(n_points, 1.0 / n_points)
    return QuadratureGrid("torus", theta, w, (n_points - 1) // 2)


def torus_grid_for_band(bandlimit: int) -> QuadratureGrid:
    return torus_grid(2 * bandlimit + 1)


def sphere2_grid(bandlimit: int) -> QuadratureGrid:
    """Gauss-Legendre in t (L+1 nodes) times 2L+1 equispaced longitudes; weights sum to 4 pi."""
    L = bandlimit
    if L < 1:
        raise ValueError(f"bandlimit must be >= 1, got {L}")
    t, wt = roots_legendre(L + 1)
    M = 2 * L + 1
    theta = -math.pi + 2 * math.pi * np.arange(M) / M
    T, TH = np.meshgrid(t, theta, indexing="ij")
    W = np.outer(wt, np.full(M, 2 * math.pi / M))
    t_flat, th_flat = T.ravel(), TH.ravel()
    nodes = sphere_to_cartesian(t_flat, th_flat)
    return QuadratureGrid("s2", nodes, W.ravel(), L, {"t": t_flat, "theta": th_flat})


def sphere3_grid(bandlimit: int) -> QuadratureGrid:
    """Gauss-Jacobi(1/2, 1/2) in x0 times an S^2 fiber grid; normalized Haar weights."""
    N = bandlimit
    if N < 1:
        raise ValueError(f"bandlimit must be >= 1, got {N}")
    x0, w0 = roots_jacobi(N + 1, 0.5, 0.5)
    fiber = sphere2_grid(N)
    r = np.sqrt(1.0 - x0 * x0)
    nodes = np.concatenate(
        [
            np.repeat(x0, len(fiber))[:, None],
            (r[:, None, None] * fiber.nodes[None, :, :]).reshape(-1, 3),
        ],
        axis=1,
    )
    w = np.outer(w0, fiber.weights).ravel() / AREA_S3
    return QuadratureGrid("s3", nodes, w, N, {"x0": np.repeat(x0, len(fiber))})


# --- rotations ------------------------------------------------------------------


def rot_z(angle):
    """R_angle = [[c, s, 0], [-s, c, 0], [0, 0, 1]] (vectorized)."""
    c, s = np.cos(angle), np.sin(angle)
    z, o = np.zeros_like(c), np.ones_like(c)
    return np.stack([np.stack([c, s, z], -1), np.stack([-s, c, z], -1), np.stack([z, z, o], -1)], -2)


def rot_x(angle):
    """S_angle = [[1, 0, 0], [0, c, s], [0, -s, c]] (vectorized)."""
    c, s = np.cos(angle), np.sin(angle)
    z, o = np.zeros_like(c), np.ones_like(c)
    return np.stack([np.stack([o, z, z], -1), np.stack([z, c, s], -1), np.stack([z, -s, c], -1)], -2)


def euler_to_matrix(alpha, beta, gamma):
    """A(alpha, beta, gamma) = R_gamma S_beta R_alpha."""
    return rot_z(gamma) @ rot_x(beta) @ rot_z(alpha)


def matrix_to_euler(A):
    """Euler angles with beta in [0, pi]; alpha = 0 at the chart poles."""
    A = np.asarray(A, dtype=float)
    beta = np.arccos(np.clip(A[..., 2, 2], -1.0, 1.0))
    sb = np.sin(beta)
    regular = sb > 1e-12
    alpha = np.where(regular, np.arctan2(A[..., 2, 0], -A[..., 2, 1]), 0.0)
    gamma_reg = np.arctan2(A[..., 0, 2], A[..., 1, 2])
    # at the poles S_beta is I or diag(1, -1, -1); put the whole angle into gamma
    pole_angle = np.arctan2(A[..., 0, 1], A[..., 0, 0])
    gamma_pole = np.where(A[..., 2, 2] > 0, pole_angle, -pole_angle)
    gamma = np.where(regular, gamma_reg, gamma_pole)
    return alpha, beta, gamma


@dataclass(frozen=True)
class Rotation3:
    alpha: float
    beta: float
    gamma: float

    @property
    def matrix(self) -> np.ndarray:
        return euler_to_matrix(self.alpha, self.beta, self.gamma)

    @classmethod
    def from_matrix(cls, A) -> "Rotation3":
        A = np.asarray(A, dtype=float)
        if not np.allclose(A.T @ A, np.eye(3), atol=1e-10) or np.linalg.det(A) < 0:
            raise ValueError("matrix is not a rotation")
        a, b, g = matrix_to_euler(A)
        return cls(float(a), float(b), float(g))

    def inverse(self) -> "Rotation3":
        return Rotation3.from_matrix(self.matrix.T)


def rotate_sphere(A, xi):
    """A . xi for rotation matrices or ``Rotation3`` and unit vectors (broadcasting)."""
    if isinstance(A, Rotation3):
        A = A.matrix
    return np.einsum("...ij,...j->...i", np.asarray(A, dtype=float), np.asarray(xi, dtype=float))


def so3_grid(bandlimit: int) -> QuadratureGrid:
    """Euler product grid: equispaced alpha, gamma (2L+1 each) times Gauss-Legendre in cos(beta).

    beta runs over [0, pi]; weights are normalized Haar.
    """
    L = bandlimit
    if L < 1:
        raise ValueError(f"bandlimit must be >= 1, got {L}")
    M = 2 * L + 1
    ang = -math.pi + 2 * math.pi * np.arange(M) / M
    c, wc = roots_legendre(L + 1)
    beta = np.arccos(c)
    A, B, G = np.meshgrid(ang, beta, ang, indexing="ij")
    w = np.einsum("a,b,g->abg", np.full(M, 1.0 / M), wc / 2.0, np.full(M, 1.0 / M))
    euler = np.stack([A.ravel(), B.ravel(), G.ravel()], axis=1)
    mats = euler_to_matrix(euler[:, 0], euler[:, 1], euler[:, 2])
    return QuadratureGrid(
        "so3",
        mats,
        w.ravel(),
        L,
        {"euler": euler, "alphas": ang, "betas": beta, "gammas": ang.copy()},
    )


def so2_grid(n_points: int) -> np.ndarray:
    """Rotations about the north pole, R_{2 pi m / n}; use with uniform weights 1/n."""
    return rot_z(2 * math.pi * np.arange(n_points) / n_points)


# --- quaternions ----------------------------------------------------------------


def quaternion_mul(a, b):
    """Hamilton product of (..., 4) arrays, renormalized to unit length."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    out = np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def quaternion_conj(x):
    x = np.asarray(x, dtype=float)
    return x * np.array([1.0, -1.0, -1.0, -1.0])


def random_unit_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.standard_normal((n, 4))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def random_rotations(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-random rotation matrices via unit quaternions."""
    q = random_unit_quaternions(rng, n)
    w, x, y, z = q.T
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1),
        ],
        -2,
    )


def random_sphere_points(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.standard_normal((n, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


# --- export ---------------------------------------------------------------------

_CSV_COLUMNS = {
    "torus": ["theta"],
    "s2": ["x", "y", "z"],
    "s3": ["x0", "x1", "x2", "x3"],
    "so3": ["alpha", "beta", "gamma"],
}


def export_grid_csv(grid: QuadratureGrid, path) -> None:
    """Write one row per node: coordinates then weight.

    torus: theta; s2: unit vector; s3: quaternion components; so3: Euler angles.
    """
    cols = _CSV_COLUMNS[grid.geometry]
    if grid.geometry == "so3":
        coords = grid.coords["euler"]
    else:
        coords = np.asarray(grid.nodes).reshape(len(grid), -1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols + ["weight"])
        for row, w in zip(coords, grid.weights):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(w))])
