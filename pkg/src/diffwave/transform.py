"""Scale quadrature, wavelet transforms and the three convolution-type products.

All transforms run on the spectral side: coefficients are multiplied per
representation and then synthesized on an exact grid. The ``*_quadrature``
functions evaluate the defining integrals directly and serve as oracles.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from . import grids
from .diffusive import WaveletFamily
from .grids import NORTH_POLE, AREA_S2, QuadratureGrid
from .harmonic import (
    SpectralCoefficients,
    first_row_residual,
    fourier_backward,
    fourier_forward,
    rep_dim,
    so3_grid,
    zonal_commutator,
)

TAIL_MODES = ("analytic", "truncate")
PANEL_ORDER = 16
MEAN_TOL = 1e-12


# --- scale quadrature --------------------------------------------------------------


@dataclass(frozen=True)
class ScaleGrid:
    """Nodes and d(rho) weights on [rho_min, rho_max], plus how the ends are closed.

    ``tail_mode='analytic'`` adds the scales below ``rho_min`` and above
    ``rho_max`` in closed form for families built on a scalar identity;
    ``'truncate'`` drops them.
    """

    rho_min: float
    rho_max: float
    nodes: np.ndarray
    weights: np.ndarray
    tail_mode: str = "analytic"
    rule: str = "gauss"

    def __post_init__(self):
        if not 0 < self.rho_min < self.rho_max:
            raise ValueError(f"need 0 < rho_min < rho_max, got {self.rho_min}, {self.rho_max}")
        if self.tail_mode not in TAIL_MODES:
            raise ValueError(f"tail_mode must be one of {TAIL_MODES}")
        if np.any(self.weights <= 0):
            raise ValueError("scale weights must be positive")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.nodes)

    def alpha_weights(self, alpha) -> np.ndarray:
        """Weights for the integral of f(rho) alpha(rho) d rho."""
        return self.weights * np.asarray(alpha(self.nodes), dtype=float)

    def refined(self) -> "ScaleGrid":
        """Same interval with twice the nodes (half the log step)."""
        return scale_grid(self.rho_min, self.rho_max, 2 * len(self), self.tail_mode, self.rule)


def scale_grid(rho_min: float = 1e-4, rho_max: float = 5.0, n_nodes: int = 64, tail_mode: str = "analytic",
               rule: str = "gauss") -> ScaleGrid:
    """Log-uniform scale quadrature.

    rule='gauss': composite Gauss-Legendre panels (16 nodes each) in log rho;
    rule='trapezoid': log-uniform trapezoid including both endpoints.
    """
    if n_nodes < 2:
        raise ValueError("need at least 2 scale nodes")
    if not 0 < rho_min < rho_max:
        raise ValueError(f"need 0 < rho_min < rho_max, got {rho_min}, {rho_max}")
    a, b = math.log(rho_min), math.log(rho_max)
    if rule == "gauss":
        panels = max(1, round(n_nodes / PANEL_ORDER))
        sizes = [len(s) for s in np.array_split(np.arange(n_nodes), panels)]
        edges = np.linspace(a, b, panels + 1)
        us, ws = [], []
        for lo, hi, m in zip(edges[:-1], edges[1:], sizes):
            x, w = roots_legendre(m)
            us.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
            ws.append(0.5 * (hi - lo) * w)
        u, wu = np.concatenate(us), np.concatenate(ws)
    elif rule == "trapezoid":
        u = np.linspace(a, b, n_nodes)
        wu = np.full(n_nodes, (b - a) / (n_nodes - 1))
        wu[[0, -1]] *= 0.5
    else:
        raise ValueError(f"unknown rule {rule!r}")
    rho = np.exp(u)
    return ScaleGrid(rho_min, rho_max, rho, wu * rho, tail_mode, rule)


def _scale_table(family: WaveletFamily, scale: ScaleGrid):
    """s[i, j] = scale factor at node i, rep j; head and tail masses per rep."""
    reps = family.identity.reps
    S = np.array([[family.scale_factor(r, rep) for rep in reps] for r in scale.nodes])
    head = np.zeros(len(reps))
    tail = np.zeros(len(reps))
    if scale.tail_mode == "analytic":
        for j, rep in enumerate(reps):
            if family.identity.plus(rep):
                head[j] = 1.0 - family.identity.scalar_value(scale.rho_min, rep)
                tail[j] = family.identity.scalar_value(scale.rho_max, rep)
    return S, head, tail


def _end_ratio(mass: float, s: float) -> float:
    # continuation factor mass / s; when s underflows the mass has underflowed too
    if mass == 0.0:
        return 0.0
    if s == 0.0:
        raise ValueError("rho_min too large for the band: wavelet underflows at the first node")
    return mass / s


def admissibility_integral(family: WaveletFamily, id: int, scale: ScaleGrid, include_head: bool = False) -> np.ndarray:
    """int psi_hat psi_hat^* alpha d rho over [rho_min, inf) (or (0, inf) with the head)."""
    rep = family.identity.rep(id)
    M = family.structure(id)
    MM = M @ M.conj().T
    aw = scale.alpha_weights(family.alpha)
    s = np.array([family.scale_factor(r, rep) for r in scale.nodes])
    total = float(np.sum(aw * s * s))
    if scale.tail_mode == "analytic" and family.identity.plus(rep):
        total += family.identity.scalar_value(scale.rho_max, rep)
        if include_head:
            total += 1.0 - family.identity.scalar_value(scale.rho_min, rep)
    return total * MM


# --- coefficient fields ----------------------------------------------------------------


FIELD_DOMAINS = ("group", "space")


@dataclass
class WaveletCoefficientField:
    """W phi(rho_i, node) with the per-node spectral slices."""

    family: WaveletFamily
    scale: ScaleGrid
    domain: str
    grid: QuadratureGrid
    values: np.ndarray
    spectral: list | None = None
    input_norm_sq: float = 0.0
    fingerprint: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def geometry(self) -> str:
        return self.grid.geometry

    def slice_coefficients(self, i: int, from_samples: bool = False) -> SpectralCoefficients:
        if self.spectral is not None and not from_samples:
            return self.spectral[i]
        return fourier_forward(self.geometry, self.values[i], self.grid, self.family.bandlimit)

    def energy(self) -> float:
        """Quadrature of |W phi|^2 alpha over scales and nodes, with analytic ends."""
        aw = self.scale.alpha_weights(self.family.alpha)
        inner = np.array([float(np.real(self.grid.mean(np.abs(v) ** 2))) for v in self.values])
        total = float(np.dot(aw, inner))
        if self.scale.tail_mode == "analytic":
            S, head, tail = _scale_table(self.family, self.scale)
            first = self.slice_coefficients(0)
            last = self.slice_coefficients(len(self.scale) - 1)
            for j, rep in enumerate(self.family.identity.reps):
                d = rep_dim(self.geometry, rep.id)
                if head[j]:
                    total += _end_ratio(head[j], S[0, j] ** 2) * d * np.sum(np.abs(first[rep.id]) ** 2)
                if tail[j] and S[-1, j] > 0:
                    total += tail[j] / S[-1, j] ** 2 * d * np.sum(np.abs(last[rep.id]) ** 2)
        return total


def _field_grid(geometry: str, L: int) -> QuadratureGrid:
    if geometry == "torus":
        return grids.torus_grid_for_band(L)
    if geometry == "s3":
        return grids.sphere3_grid(L)
    if geometry == "s2":
        return grids.sphere2_grid(L)
    if geometry == "so3":
        return so3_grid(L)
    raise ValueError(f"unknown geometry {geometry!r}")


def _coefficients_of(phi, geometry: str, grid: QuadratureGrid | None, L: int) -> SpectralCoefficients:
    if isinstance(phi, SpectralCoefficients):
        if phi.geometry != geometry:
            raise ValueError(f"input lives on {phi.geometry}, family on {geometry}")
        return SpectralCoefficients(geometry, L, {i: phi.entries[i] for i in phi.entries if abs(i) <= L})
    if grid is None:
        raise ValueError("samples need a grid")
    if grid.geometry != geometry:
        raise ValueError(f"grid geometry {grid.geometry} does not match {geometry}")
    return fourier_forward(geometry, phi, grid, L)


def _project_mean_zero(c: SpectralCoefficients, family: WaveletFamily) -> SpectralCoefficients:
    plus = {r.id for r in family.plus_reps()}
    dropped = {i: m for i, m in c.entries.items() if i not in plus}
    scale = max([1.0] + [float(np.max(np.abs(m))) for m in c.entries.values()])
    if any(np.max(np.abs(m)) > MEAN_TOL * scale for m in dropped.values()):
        warnings.warn("input projected to mean-zero", stacklevel=3)
    return SpectralCoefficients(
        c.geometry, c.bandlimit,
        {i: (m if i in plus else np.zeros_like(m)) for i, m in c.entries.items()},
    )


def _forward(phi_hat: SpectralCoefficients, family: WaveletFamily, scale: ScaleGrid, out_geometry: str) -> list:
    reps = family.identity.reps
    S, _, _ = _scale_table(family, scale)
    adj = {r.id: family.structure(r.id).conj().T for r in reps}
    base = {r.id: adj[r.id] @ phi_hat.entries.get(r.id, np.zeros_like(adj[r.id])) for r in reps}
    return [
        SpectralCoefficients(out_geometry, family.bandlimit, {r.id: S[i, j] * base[r.id] for j, r in enumerate(reps)})
        for i in range(len(scale))
    ]


def _inverse(slices: list, family: WaveletFamily, scale: ScaleGrid, synthesis: WaveletFamily | None = None,
             out_geometry: str | None = None) -> SpectralCoefficients:
    synth = family if synthesis is None else synthesis
    if synth.identity is not family.identity or synth.alpha != family.alpha:
        if scale.tail_mode == "analytic":
            raise ValueError("analytic ends need analysis and synthesis families with one identity and weight")
    reps = family.identity.reps
    S, head, tail = _scale_table(synth, scale)
    aw = scale.alpha_weights(family.alpha)
    out = {}
    for j, r in enumerate(reps):
        N = synth.structure(r.id)
        acc = np.zeros_like(N)
        # fixed summation order over scale nodes keeps the result reproducible
        for i in range(len(scale)):
            if S[i, j]:
                acc = acc + (aw[i] * S[i, j]) * (N @ slices[i].entries[r.id])
        if head[j]:
            acc = acc + _end_ratio(head[j], S[0, j]) * (N @ slices[0].entries[r.id])
        if tail[j] and S[-1, j] > 0:
            acc = acc + (tail[j] / S[-1, j]) * (N @ slices[-1].entries[r.id])
        out[r.id] = acc
    geometry = out_geometry or slices[0].geometry
    return SpectralCoefficients(geometry, family.bandlimit, out)


def _build_field(phi_hat, family, scale, domain, field_geometry, grid_out):
    slices = _forward(phi_hat, family, scale, field_geometry)
    values = np.array([fourier_backward(s, grid_out) for s in slices])
    return WaveletCoefficientField(family, scale, domain, grid_out, values, slices, phi_hat.norm_sq())


def wavelet_forward_group(phi, family: WaveletFamily, scale: ScaleGrid, grid: QuadratureGrid | None = None,
                          out_grid: QuadratureGrid | None = None) -> WaveletCoefficientField:
    """W phi(rho, g) = <phi, T_g^* psi_rho> on a group, spectrally psi_hat^* phi_hat.

    ``phi`` is a sample array on ``grid`` or a SpectralCoefficients object.
    """
    if family.kind != "group-central":
        raise ValueError(f"group transform needs a group family, got {family.kind!r}")
    L = family.bandlimit
    phi_hat = _project_mean_zero(_coefficients_of(phi, family.geometry, grid, L), family)
    out_grid = out_grid or (grid if grid is not None else _field_grid(family.geometry, L))
    return _build_field(phi_hat, family, scale, "group", family.geometry, out_grid)


def wavelet_inverse_group(field: WaveletCoefficientField, family: WaveletFamily | None = None,
                          scale: ScaleGrid | None = None, from_samples: bool = False,
                          synthesis: WaveletFamily | None = None) -> SpectralCoefficients:
    """phi_hat = int psi_hat W_hat alpha d rho, restricted to the plus set."""
    family = _check_family(field, family)
    scale = scale or field.scale
    slices = [field.slice_coefficients(i, from_samples) for i in range(len(scale))]
    return _inverse(slices, family, scale, synthesis)


def wavelet_forward_zonal(phi, family: WaveletFamily, scale: ScaleGrid, grid: QuadratureGrid | None = None,
                          out_grid: QuadratureGrid | None = None) -> WaveletCoefficientField:
    """Zonal transform on S^2: W phi(rho, .) = phi . psi_rho, a function on S^2."""
    if family.kind != "zonal" or family.n != 2:
        raise ValueError("zonal transform needs a zonal family on S^2; use wavelet_forward_nonzonal otherwise")
    L = family.bandlimit
    phi_hat = _project_mean_zero(_coefficients_of(phi, "s2", grid, L), family)
    out_grid = out_grid or (grid if grid is not None else _field_grid("s2", L))
    return _build_field(phi_hat, family, scale, "space", "s2", out_grid)


def wavelet_inverse_zonal(field: WaveletCoefficientField, family: WaveletFamily | None = None,
                          from_samples: bool = False) -> SpectralCoefficients:
    family = _check_family(field, family)
    slices = [field.slice_coefficients(i, from_samples) for i in range(len(field.scale))]
    return _inverse(slices, family, field.scale, out_geometry="s2")


def wavelet_forward_nonzonal(phi, family: WaveletFamily, scale: ScaleGrid, grid: QuadratureGrid | None = None,
                             out_grid: QuadratureGrid | None = None) -> WaveletCoefficientField:
    """W phi(rho, g) = phi . psi_rho(g) on SO(3); slices psi_hat^* phi_hat."""
    if family.kind not in ("nonzonal", "zonal") or family.n != 2:
        raise ValueError("non-zonal transform needs an S^2 family")
    L = family.bandlimit
    phi_hat = _project_mean_zero(_coefficients_of(phi, "s2", grid, L), family)
    out_grid = out_grid or _field_grid("so3", L)
    return _build_field(phi_hat, family, scale, "group", "so3", out_grid)


def wavelet_inverse_nonzonal(field: WaveletCoefficientField, family: WaveletFamily | None = None,
                             from_samples: bool = False) -> SpectralCoefficients:
    """Reconstruction on S^2; the synthesized coefficients have first-row structure."""
    family = _check_family(field, family)
    slices = [field.slice_coefficients(i, from_samples) for i in range(len(field.scale))]
    out = _inverse(slices, family, field.scale, out_geometry="so3")
    if first_row_residual(out) > 1e-10 * max(1.0, math.sqrt(out.norm_sq())):
        raise ValueError("reconstruction left the space of functions on S^2")
    return SpectralCoefficients("s2", out.bandlimit, dict(out.entries))


def _check_family(field: WaveletCoefficientField, family: WaveletFamily | None) -> WaveletFamily:
    if family is None:
        return field.family
    if family is not field.family and family != field.family:
        raise ValueError("family mismatch between field and inverse")
    return family


def energy_gap(field: WaveletCoefficientField) -> float:
    """Relative gap between the field energy and the input norm on the plus set."""
    ref = field.input_norm_sq
    return abs(field.energy() - ref) / ref if ref > 0 else abs(field.energy())


# --- export --------------------------------------------------------------------------


def export_field_csv(field: WaveletCoefficientField, path, header: dict | None = None) -> None:
    """Rows (rho, node, re, im), rho ascending then node ascending; header as comment lines."""
    with open(path, "w", newline="") as fh:
        for k, v in (header or {}).items():
            fh.write(f"# {k}: {v}\n")
        writer = csv.writer(fh)
        writer.writerow(["rho", "node", "re", "im"])
        for rho, row in zip(field.scale.nodes, field.values):
            for j, z in enumerate(row):
                writer.writerow([repr(float(rho)), j, repr(float(z.real)), repr(float(z.imag))])


def field_to_json(field: WaveletCoefficientField, header: dict | None = None) -> str:
    return json.dumps(
        {
            "header": header or {},
            "geometry": field.geometry,
            "domain": field.domain,
            "rho": [float(r) for r in field.scale.nodes],
            "weights": [float(w) for w in field.scale.weights],
            "values": [[[float(z.real), float(z.imag)] for z in row] for row in field.values],
        },
        sort_keys=True,
    )


# --- convolution-type products (spectral) ---------------------------------------------


def conv_group(phi: SpectralCoefficients, psi: SpectralCoefficients) -> SpectralCoefficients:
    """phi * psi, spectrally psi_hat phi_hat."""
    _same_band(phi, psi)
    return phi.map(lambda i, m: psi.entries[i] @ m)


def conv_bullet(phi: SpectralCoefficients, psi: SpectralCoefficients, tol: float = 1e-12) -> SpectralCoefficients:
    """phi . psi on SO(3), spectrally psi_hat^* phi_hat.

    ``phi`` may live on S^2 or on SO(3). If ``psi`` is zonal the product is
    constant on cosets and comes back as an S^2 function.
    """
    _same_band(phi, psi)
    out = phi.map(lambda i, m: psi.entries[i].conj().T @ m, geometry="so3")
    if psi.geometry == "s2" and zonal_commutator(psi) < tol and first_row_residual(out) < tol:
        return SpectralCoefficients("s2", out.bandlimit, dict(out.entries))
    return out


def conv_zonal_hat(phi: SpectralCoefficients, psi: SpectralCoefficients) -> SpectralCoefficients:
    """Zonal product of two S^2 functions, spectrally psi_hat phi_hat^*."""
    _same_band(phi, psi)
    return phi.map(lambda i, m: psi.entries[i] @ m.conj().T, geometry="s2")


def check_of(c: SpectralCoefficients) -> SpectralCoefficients:
    """Coefficients of psi_check; on S^2 the input must be zonal."""
    if c.geometry == "s2" and zonal_commutator(c) > 1e-12:
        raise ValueError("the involution stays on S^2 only for zonal functions")
    return c.map(lambda i, m: m.conj().T)


def _same_band(a: SpectralCoefficients, b: SpectralCoefficients):
    if set(a.entries) != set(b.entries):
        raise ValueError("grid mismatch: operands carry different representation sets")


# --- quadrature oracles -----------------------------------------------------------------


def group_convolution_quadrature(phi, psi, points, grid: QuadratureGrid) -> np.ndarray:
    """int_G phi(y) psi(y^{-1} x) dy by quadrature on a group grid."""
    points = np.asarray(points, dtype=float)
    w = grid.weights
    if grid.geometry == "torus":
        y = grid.nodes
        return np.array([np.sum(w * phi(y) * psi(np.mod(x - y, 1.0))) for x in points])
    if grid.geometry == "s3":
        y = grid.nodes
        fy = w * phi(y)
        yinv = grids.quaternion_conj(y)
        return np.array([np.sum(fy * psi(grids.quaternion_mul(yinv, np.broadcast_to(x, y.shape)))) for x in points])
    if grid.geometry == "so3":
        y = grid.nodes
        fy = w * phi(y)
        return np.array([np.sum(fy * psi(np.einsum("gji,jk->gik", y, x))) for x in points])
    raise ValueError(f"no group structure on {grid.geometry!r}")


def space_convolution_quadrature(phi, psi, points, grid: QuadratureGrid) -> np.ndarray:
    """(phi * psi)(x) = int_G phi(g x0) psi(g^{-1} x) dg for S^2 functions."""
    _need(grid, "so3")
    A = grid.nodes
    fa = grid.weights * phi(A @ NORTH_POLE)
    return np.array([np.sum(fa * psi(np.einsum("gji,j->gi", A, x))) for x in np.asarray(points, float)])


def bullet_quadrature(phi, psi, rotations, grid: QuadratureGrid) -> np.ndarray:
    """(phi . psi)(g) = int_X phi(x) conj(psi(g^{-1} x)) dx, dx normalized."""
    _need(grid, "s2")
    xi = grid.nodes
    fx = (grid.weights / AREA_S2) * phi(xi)
    return np.array([np.sum(fx * np.conj(psi(xi @ g))) for g in np.asarray(rotations, float)])


def group_bullet_quadrature(F, chi, rotations, grid: QuadratureGrid) -> np.ndarray:
    """(F . chi)(g) = int_G F(h) conj(chi(g^{-1} h x0)) dh for F on SO(3), chi on S^2."""
    _need(grid, "so3")
    H = grid.nodes
    fh = grid.weights * F(H)
    hx = H @ NORTH_POLE
    return np.array([np.sum(fh * np.conj(chi(hx @ g))) for g in np.asarray(rotations, float)])


def zonal_hat_quadrature(phi, psi, points, grid: QuadratureGrid) -> np.ndarray:
    """(phi zonal-product psi)(x) = int_G conj(phi(g x0)) psi(g x) dg."""
    _need(grid, "so3")
    A = grid.nodes
    fa = grid.weights * np.conj(phi(A @ NORTH_POLE))
    return np.array([np.sum(fa * psi(A @ x)) for x in np.asarray(points, float)])


def _need(grid: QuadratureGrid, geometry: str):
    if grid.geometry != geometry:
        raise ValueError(f"grid mismatch: need an {geometry} grid, got {grid.geometry}")
