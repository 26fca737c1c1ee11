"""Command line: family | transform | reconstruct | verify.

Exit codes: 0 ok, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import diffusive as dv
from . import grids, harmonic as hm, quotient as qt, transform as tf, verify as vf
from .config import PRESETS, ConfigError, RunConfig, load_config, load_preset

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# --- building objects from a config ------------------------------------------------------


def build_alpha(cfg: RunConfig) -> dv.WeightFunction:
    a = cfg.family.alpha
    if a.kind == "heat-trace":
        # the trace runs over the whole dual; grow the cutoff until the tail is negligible
        rho = min((cfg.scale.rho_min,) + tuple(cfg.family.rho))
        K = cfg.bandlimit
        while True:
            w = dv.weight_alpha("heat-trace", cfg.geometry, K, lambda_scale=cfg.family.lambda_scale)
            if w.tail_bound(rho) <= dv.ALPHA_TAIL_TOL:
                return w
            K *= 2
    return dv.weight_alpha(a.kind, c=a.c, exponent=a.exponent)


def build_weights(cfg: RunConfig) -> dict:
    L = cfg.bandlimit
    if cfg.family.w == "equidistributed":
        return {k: dv.equidistributed_weights(k) for k in range(L + 1)}
    if cfg.family.w == "first":
        return {k: dv.first_vector(k) for k in range(L + 1)}
    rng = np.random.default_rng(cfg.family.w_seed)
    return {k: dv.random_unit_weights(rng, k) for k in range(L + 1)}


def build_family(cfg: RunConfig) -> dv.WaveletFamily:
    alpha = build_alpha(cfg)
    f = cfg.family
    if f.kind == "group-central":
        eta = dv.minus_i_sign if f.eta == "minus-i-sign" else None
        return dv.heat_wavelet_family(dv.heat_identity(cfg.geometry, cfg.bandlimit, f.lambda_scale), alpha, eta)
    if f.kind == "zonal":
        return dv.zonal_family_on_sphere(2, alpha, cfg.bandlimit, lambda_scale=f.lambda_scale)
    if f.kind == "nonzonal":
        return dv.nonzonal_family(alpha, build_weights(cfg), cfg.bandlimit, f.lambda_scale)
    return qt.quotient_zonal_family(qt.QuotientSpec(f.quotient_p), alpha, cfg.bandlimit, f.lambda_scale)


def build_scale(cfg: RunConfig) -> tf.ScaleGrid:
    s = cfg.scale
    return tf.scale_grid(s.rho_min, s.rho_max, s.n_nodes, s.tail_mode, s.rule)


def input_grid(cfg: RunConfig) -> grids.QuadratureGrid:
    return {"torus": grids.torus_grid_for_band, "s3": grids.sphere3_grid, "s2": grids.sphere2_grid}[cfg.geometry](
        cfg.bandlimit
    )


def build_input(cfg: RunConfig) -> hm.SpectralCoefficients:
    """Input function as coefficients: builtin test function or a sample file on the input grid."""
    L, geo = cfg.bandlimit, cfg.geometry
    grid = input_grid(cfg)
    src = cfg.input
    if src.file is not None:
        samples = read_samples(src.file, len(grid))
        return hm.fourier_forward(geo, samples, grid, L)
    if src.builtin == "constant":
        return hm.fourier_forward(geo, np.ones(len(grid)), grid, L)
    if src.builtin == "harmonic":
        c = hm.SpectralCoefficients.zeros(geo, L)
        k = src.degree
        if not 0 <= abs(k) <= L:
            raise ConfigError(f"input.degree {k} outside the band")
        m = c.entries[k]
        if geo == "s2":
            if abs(src.order) > k:
                raise ConfigError(f"input.order {src.order} invalid for degree {k}")
            from .specfun import adapted_orders

            m[0, adapted_orders(k).index(src.order)] = 1.0 / math.sqrt(grids.AREA_S2 * (2 * k + 1))
        else:
            m[...] = np.eye(len(m)) / len(m)
        return c
    rng = np.random.default_rng(cfg.seed)
    entries = {}
    for i in hm.rep_ids(geo, L):
        d = hm.rep_dim(geo, i)
        if geo == "s3":
            m = (rng.standard_normal() + 1j * rng.standard_normal()) * np.eye(d)
        else:
            m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            if geo == "s2":
                m[1:] = 0
        if hm.eigenvalue(geo, i) == 0:
            m = np.zeros_like(m)
        entries[i] = m
    return hm.SpectralCoefficients(geo, L, entries)


def read_samples(path, n: int) -> np.ndarray:
    """CSV with columns node, re, im (one row per grid node, '#' comment lines allowed)."""
    rows = [r for r in csv.reader(line for line in open(path) if not line.startswith("#"))]
    if rows and rows[0] and rows[0][0] == "node":
        rows = rows[1:]
    vals = np.zeros(n, complex)
    seen = 0
    for r in rows:
        try:
            j = int(r[0])
        except (ValueError, IndexError):
            raise ConfigError(f"{path}: malformed sample row {','.join(r)!r}") from None
        if not 0 <= j < n:
            raise ConfigError(f"{path}: node index {j} outside the grid (0..{n - 1})")
        try:
            vals[j] = complex(float(r[1]), float(r[2]) if len(r) > 2 else 0.0)
        except (ValueError, IndexError):
            raise ConfigError(f"{path}: malformed sample row {','.join(r)!r}") from None
        seen += 1
    if seen != n:
        raise ConfigError(f"{path}: expected {n} samples, found {seen}")
    return vals


# --- headers and writers -------------------------------------------------------------------


def header(cfg: RunConfig, **extra) -> dict:
    a = cfg.family.alpha
    h = {
        "config_fingerprint": cfg.fingerprint(),
        "family_fingerprint": cfg.family_fingerprint(),
        "name": cfg.name,
        "geometry": cfg.geometry,
        "bandlimit": cfg.bandlimit,
        "family_kind": cfg.family.kind,
        "alpha_kind": a.kind,
        "alpha_c": repr(a.c),
        "alpha_exponent": repr(a.exponent),
        "lambda_scale": repr(cfg.family.lambda_scale),
    }
    if cfg.family.kind == "group-central":
        h["eta"] = cfg.family.eta
    if cfg.family.kind == "nonzonal":
        h["w"] = cfg.family.w
    if cfg.family.kind == "quotient":
        h["quotient_p"] = cfg.family.quotient_p
    if cfg.family.rho:
        h["rho_list"] = "[" + ", ".join(repr(r) for r in cfg.family.rho) + "]"
    h.update(extra)
    return h


def write_csv(path: Path, head: dict, columns: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        for k, v in head.items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(float(x)) if not isinstance(x, (int, np.integer)) else int(x) for x in r])


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def read_csv_header(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("# "):
                break
            k, _, v = line[2:].rstrip("\n").partition(": ")
            out[k] = v
    return out


# --- commands -----------------------------------------------------------------------------


def curve_points(cfg: RunConfig) -> np.ndarray:
    c = cfg.curve
    n = int(round((c.hi - c.lo) * c.points_per_unit))
    return c.lo + (c.hi - c.lo) * np.arange(n + 1) / n


def cmd_family(cfg: RunConfig, out: Path) -> int:
    """One CSV per rho (torus, S^3) or one JSON field (S^2)."""
    fam = build_family(cfg)
    rhos = cfg.family.rho or (0.01,)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if cfg.geometry in ("torus", "s3"):
        x = curve_points(cfg)
        if cfg.geometry == "torus":
            pts, axis = x, "theta"
        else:
            if x.min() < -1 or x.max() > 1:
                raise ConfigError("curve range for s3 must lie in [-1, 1] (x0 = Sc x)")
            pts = np.stack([x, np.sqrt(1 - x * x), 0 * x, 0 * x], axis=1)
            axis = "x0"
        for i, rho in enumerate(rhos):
            vals = fam.evaluate(rho, pts)
            path = out / f"family_{i:02d}.csv"
            write_csv(path, header(cfg, rho=repr(rho), axis=axis), [axis, "re", "im"],
                      zip(x, np.real(vals), np.imag(vals)))
            written.append(path)
    else:
        grid = grids.sphere2_grid(cfg.bandlimit)
        fields = []
        for rho in rhos:
            vals = fam.evaluate(rho, grid.nodes)
            fields.append({"rho": rho, "values": [[float(z.real), float(z.imag)] for z in vals]})
        path = out / "family_field.json"
        write_json(path, {
            "header": header(cfg, grid="gauss-legendre x equispaced", n_nodes=len(grid)),
            "nodes": grid.nodes.tolist(),
            "weights": grid.weights.tolist(),
            "fields": fields,
        })
        written.append(path)
    for p in written:
        print(p)
    return EXIT_OK


def _transform_field(cfg: RunConfig, phi: hm.SpectralCoefficients, fam, scale):
    if cfg.geometry in ("torus", "s3"):
        if fam.kind != "group-central":
            raise ConfigError(f"transform on {cfg.geometry} needs a group-central family")
        return tf.wavelet_forward_group(phi, fam, scale)
    if fam.kind == "zonal":
        return tf.wavelet_forward_zonal(phi, fam, scale)
    return tf.wavelet_forward_nonzonal(phi, fam, scale)


def cmd_transform(cfg: RunConfig, out: Path) -> int:
    fam, scale = build_family(cfg), build_scale(cfg)
    phi = build_input(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        field = _transform_field(cfg, phi, fam, scale)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    plus = {r.id for r in fam.plus_reps()}
    phi0 = hm.SpectralCoefficients(phi.geometry, phi.bandlimit, {i: m for i, m in phi.entries.items() if i in plus})
    norm = phi0.norm_sq()
    energy = field.energy()
    gap = abs(energy - norm) / norm if norm > 0 else abs(energy)
    out.mkdir(parents=True, exist_ok=True)
    head = header(cfg, domain="space" if field.domain == "space" else "group", field_geometry=field.geometry)
    (out / "field.json").write_text(tf.field_to_json(field, head) + "\n")
    (out / "input.json").write_text(phi0.to_json() + "\n")
    summary = {
        "header": head,
        "input_norm": math.sqrt(norm),
        "field_norm": math.sqrt(max(energy, 0.0)),
        "relative_unitarity_gap": gap,
    }
    write_json(out / "summary.json", summary)
    print(json.dumps({k: v for k, v in summary.items() if k != "header"}, sort_keys=True))
    return EXIT_OK


def cmd_reconstruct(cfg: RunConfig, out: Path) -> int:
    path = out / "field.json"
    if not path.exists():
        raise ConfigError(f"no field at {str(path)!r}; run 'transform' first")
    data = json.loads(path.read_text())
    if data["header"].get("family_fingerprint") != cfg.family_fingerprint():
        print("error: family fingerprint mismatch", file=sys.stderr)
        return EXIT_CONFIG
    fam, scale = build_family(cfg), build_scale(cfg)
    geometry = data["geometry"]
    grid = {"torus": grids.torus_grid_for_band, "s3": grids.sphere3_grid, "s2": grids.sphere2_grid,
            "so3": hm.so3_grid}[geometry](cfg.bandlimit)
    values = np.array([[complex(re, im) for re, im in row] for row in data["values"]])
    field = tf.WaveletCoefficientField(fam, scale, data["domain"], grid, values, None)
    if cfg.geometry in ("torus", "s3"):
        rec = tf.wavelet_inverse_group(field, from_samples=True)
    elif fam.kind == "zonal":
        rec = tf.wavelet_inverse_zonal(field, from_samples=True)
    else:
        rec = tf.wavelet_inverse_nonzonal(field, from_samples=True)
    samples = hm.fourier_backward(rec, input_grid(cfg))
    head = header(cfg)
    result = {"header": head, "coefficients": json.loads(rec.to_json()),
              "samples": [[float(z.real), float(z.imag)] for z in samples]}
    src = out / "input.json"
    if src.exists():
        orig = hm.SpectralCoefficients.from_json(src.read_text())
        err = math.sqrt((rec - orig).norm_sq() / orig.norm_sq()) if orig.norm_sq() > 0 else math.sqrt(rec.norm_sq())
        result["relative_error"] = err
        print(json.dumps({"relative_error": err}))
    write_json(out / "reconstruction.json", result)
    return EXIT_OK


def cmd_verify(suite: str, seed: int, out: Path | None, tamper_lambda: float = 1.0) -> int:
    checks = vf.run_suite(suite, seed, tamper_lambda)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        line = f"{status} {c.suite}/{c.name}: {c.value:.3e} (tol {c.tol:.1e})"
        print(line + (f" [{c.witness}]" if c.witness else ""))
    rep = vf.report(checks)
    rep["suite"], rep["seed"] = suite, seed
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / f"verify_{suite}.json", rep)
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return EXIT_OK if rep["passed"] else EXIT_FAIL


# --- entry point --------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diffwave", description="Diffusive wavelets on groups and spheres.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("family", "transform", "reconstruct", "verify"):
        s = sub.add_parser(name)
        s.add_argument("--config", help="YAML run configuration")
        s.add_argument("--preset", choices=PRESETS)
        s.add_argument("--out", help="output directory (default: output.dir of the config)")
        s.add_argument("--seed", type=int, help="override the seed")
        if name == "verify":
            s.add_argument("--suite", default="all", choices=("all",) + vf.SUITES)
            s.add_argument("--tamper-lambda", type=float, default=1.0, help=argparse.SUPPRESS)
    return p


def _resolve_config(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = load_preset(args.preset)
    else:
        cfg = RunConfig()
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be >= 0")
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        out = Path(args.out) if args.out else Path(cfg.output_dir)
        if args.command == "verify":
            return cmd_verify(args.suite, cfg.seed if args.seed is not None else 0,
                              Path(args.out) if args.out else None, args.tamper_lambda)
        if args.command == "family":
            return cmd_family(cfg, out)
        if args.command == "transform":
            return cmd_transform(cfg, out)
        return cmd_reconstruct(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
