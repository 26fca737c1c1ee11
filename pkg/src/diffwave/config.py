"""Run configuration: YAML loading with line-precise errors, presets, fingerprints."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

PRESETS = ("fig1", "fig2", "fig3")
GEOMETRIES = ("torus", "s3", "s2")
FAMILY_KINDS = ("group-central", "zonal", "nonzonal", "quotient")
ALPHA_KINDS = ("constant", "power-law", "heat-trace")
ETA_CHOICES = ("identity", "minus-i-sign")
W_CHOICES = ("equidistributed", "first", "random")
BUILTINS = ("random-bandlimited", "constant", "harmonic")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AlphaConfig:
    kind: str = "constant"
    c: float = 1.0
    exponent: float = 0.0


@dataclass(frozen=True)
class FamilyConfig:
    kind: str = "group-central"
    alpha: AlphaConfig = AlphaConfig()
    eta: str = "identity"
    w: str = "equidistributed"
    w_seed: int = 0
    lambda_scale: float = 1.0
    rho: tuple = ()
    quotient_p: int | None = None


@dataclass(frozen=True)
class ScaleConfig:
    rho_min: float = 1e-4
    rho_max: float = 5.0
    n_nodes: int = 64
    tail_mode: str = "analytic"
    rule: str = "gauss"


@dataclass(frozen=True)
class InputConfig:
    builtin: str = "random-bandlimited"
    file: str | None = None
    degree: int = 1
    order: int = 0


@dataclass(frozen=True)
class CurveConfig:
    lo: float = -1.5
    hi: float = 1.5
    points_per_unit: int = 200


@dataclass(frozen=True)
class RunConfig:
    name: str = "default"
    geometry: str = "torus"
    bandlimit: int = 32
    seed: int = 7
    family: FamilyConfig = FamilyConfig()
    scale: ScaleConfig = ScaleConfig()
    input: InputConfig = InputConfig()
    curve: CurveConfig = CurveConfig()
    output_dir: str = "out"
    source: str = field(default="<default>", compare=False)

    def canonical(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("source")
        d.pop("output_dir")
        return d

    def fingerprint(self) -> str:
        return _hash(self.canonical())

    def family_fingerprint(self) -> str:
        """Hash of everything a coefficient field depends on."""
        d = self.canonical()
        return _hash({k: d[k] for k in ("geometry", "bandlimit", "family", "scale")})


def _hash(d: dict) -> str:
    text = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# --- YAML with positions -------------------------------------------------------------


class _Node:
    """Plain value plus the source position of its YAML node."""

    def __init__(self, value, mark):
        self.value = value
        self.line = mark.line + 1
        self.column = mark.column + 1


def _convert(node):
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = k.value
            if key in out:
                raise ConfigError(f"line {k.start_mark.line + 1}, column {k.start_mark.column + 1}: duplicate key {key!r}")
            out[key] = (_Node(key, k.start_mark), _convert(v))
        return _Node(out, node.start_mark)
    if isinstance(node, yaml.SequenceNode):
        return _Node([_convert(v) for v in node.value], node.start_mark)
    return _Node(yaml.SafeLoader("").construct_object(node), node.start_mark)


def _where(source: str, n: _Node) -> str:
    return f"{source}: line {n.line}, column {n.column}"


def _expect_map(source, node: _Node, allowed: set, what: str) -> dict:
    if not isinstance(node.value, dict):
        raise ConfigError(f"{_where(source, node)}: {what} must be a mapping")
    for key_node, _ in node.value.values():
        if key_node.value not in allowed:
            raise ConfigError(
                f"{_where(source, key_node)}: unknown key {key_node.value!r} in {what} "
                f"(allowed: {', '.join(sorted(allowed))})"
            )
    return {k: v for k, (_, v) in node.value.items()}


def _number(source, n: _Node, what: str, integer=False, positive=False, nonneg=False):
    v = n.value
    if isinstance(v, str):
        try:
            v = float(v)
        except ValueError:
            raise ConfigError(f"{_where(source, n)}: {what} must be a number, got {n.value!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{_where(source, n)}: {what} must be a number, got {n.value!r}")
    if integer:
        if float(v) != int(v):
            raise ConfigError(f"{_where(source, n)}: {what} must be an integer, got {n.value!r}")
        v = int(v)
    else:
        v = float(v)
    if positive and v <= 0:
        raise ConfigError(f"{_where(source, n)}: {what} must be positive, got {v}")
    if nonneg and v < 0:
        raise ConfigError(f"{_where(source, n)}: {what} must be >= 0, got {v}")
    return v


def _choice(source, n: _Node, choices, what: str) -> str:
    if n.value not in choices:
        raise ConfigError(f"{_where(source, n)}: {what} must be one of {', '.join(choices)}, got {n.value!r}")
    return n.value


def parse_config(text: str, source: str = "<string>", base_dir: Path | None = None) -> RunConfig:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        m = exc.problem_mark
        raise ConfigError(f"{source}: line {m.line + 1}, column {m.column + 1}: {exc.problem}") from None
    if root is None:
        raise ConfigError(f"{source}: empty configuration")
    top = _expect_map(
        source, _convert(root),
        {"name", "geometry", "bandlimit", "seed", "family", "scale", "input", "curve", "output", "quotient"},
        "configuration",
    )
    kw = {"source": source}
    if "name" in top:
        kw["name"] = str(top["name"].value)
    if "geometry" in top:
        kw["geometry"] = _choice(source, top["geometry"], GEOMETRIES, "geometry")
    if "bandlimit" in top:
        kw["bandlimit"] = _number(source, top["bandlimit"], "bandlimit", integer=True)
        if kw["bandlimit"] < 1:
            raise ConfigError(f"{_where(source, top['bandlimit'])}: bandlimit must be >= 1")
    if "seed" in top:
        kw["seed"] = _number(source, top["seed"], "seed", integer=True, nonneg=True)

    fam = {}
    if "family" in top:
        f = _expect_map(source, top["family"], {"kind", "alpha", "eta", "w", "w_seed", "lambda_scale", "rho"}, "family")
        if "kind" in f:
            fam["kind"] = _choice(source, f["kind"], FAMILY_KINDS, "family.kind")
        if "alpha" in f:
            a = _expect_map(source, f["alpha"], {"kind", "c", "exponent"}, "family.alpha")
            akw = {}
            if "kind" in a:
                akw["kind"] = _choice(source, a["kind"], ALPHA_KINDS, "family.alpha.kind")
            if "c" in a:
                akw["c"] = _number(source, a["c"], "family.alpha.c", positive=True)
            if "exponent" in a:
                akw["exponent"] = _number(source, a["exponent"], "family.alpha.exponent")
            fam["alpha"] = AlphaConfig(**akw)
        if "eta" in f:
            fam["eta"] = _choice(source, f["eta"], ETA_CHOICES, "family.eta")
        if "w" in f:
            fam["w"] = _choice(source, f["w"], W_CHOICES, "family.w")
        if "w_seed" in f:
            fam["w_seed"] = _number(source, f["w_seed"], "family.w_seed", integer=True, nonneg=True)
        if "lambda_scale" in f:
            fam["lambda_scale"] = _number(source, f["lambda_scale"], "family.lambda_scale", positive=True)
        if "rho" in f:
            node = f["rho"]
            if not isinstance(node.value, list) or not node.value:
                raise ConfigError(f"{_where(source, node)}: family.rho must be a non-empty list")
            fam["rho"] = tuple(_number(source, r, "family.rho entry", positive=True) for r in node.value)
    if "quotient" in top:
        q = _expect_map(source, top["quotient"], {"p"}, "quotient")
        if "p" not in q:
            raise ConfigError(f"{_where(source, top['quotient'])}: quotient needs p")
        fam["quotient_p"] = _number(source, q["p"], "quotient.p", integer=True, positive=True)
    kw["family"] = FamilyConfig(**fam)

    if "scale" in top:
        s = _expect_map(source, top["scale"], {"rho_min", "rho_max", "n_nodes", "tail_mode", "rule"}, "scale")
        skw = {}
        for key in ("rho_min", "rho_max"):
            if key in s:
                skw[key] = _number(source, s[key], f"scale.{key}", positive=True)
        if "n_nodes" in s:
            skw["n_nodes"] = _number(source, s["n_nodes"], "scale.n_nodes", integer=True, positive=True)
        if "tail_mode" in s:
            skw["tail_mode"] = _choice(source, s["tail_mode"], ("analytic", "truncate"), "scale.tail_mode")
        if "rule" in s:
            skw["rule"] = _choice(source, s["rule"], ("gauss", "trapezoid"), "scale.rule")
        sc = ScaleConfig(**skw)
        if sc.rho_min >= sc.rho_max:
            raise ConfigError(f"{_where(source, top['scale'])}: need rho_min < rho_max")
        kw["scale"] = sc

    if "input" in top:
        i = _expect_map(source, top["input"], {"builtin", "file", "degree", "order"}, "input")
        ikw = {}
        if "builtin" in i:
            ikw["builtin"] = _choice(source, i["builtin"], BUILTINS, "input.builtin")
        if "file" in i:
            p = Path(str(i["file"].value))
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            if not p.exists():
                raise ConfigError(f"{_where(source, i['file'])}: input file {str(p)!r} does not exist")
            ikw["file"] = str(p)
        for key in ("degree", "order"):
            if key in i:
                ikw[key] = _number(source, i[key], f"input.{key}", integer=True)
        kw["input"] = InputConfig(**ikw)

    if "curve" in top:
        c = _expect_map(source, top["curve"], {"min", "max", "points_per_unit"}, "curve")
        ckw = {}
        if "min" in c:
            ckw["lo"] = _number(source, c["min"], "curve.min")
        if "max" in c:
            ckw["hi"] = _number(source, c["max"], "curve.max")
        if "points_per_unit" in c:
            ckw["points_per_unit"] = _number(source, c["points_per_unit"], "curve.points_per_unit", integer=True, positive=True)
        kw["curve"] = CurveConfig(**ckw)
    elif kw.get("geometry") == "s3":
        # profiles on S^3 are functions of x0 in [-1, 1]
        kw["curve"] = CurveConfig(lo=-1.0, hi=1.0)

    if "output" in top:
        o = _expect_map(source, top["output"], {"dir"}, "output")
        if "dir" in o:
            kw["output_dir"] = str(o["dir"].value)

    cfg = RunConfig(**kw)
    _check_consistency(cfg, top, source)
    return cfg


def _check_consistency(cfg: RunConfig, top: dict, source: str):
    where = _where(source, top["family"]) if "family" in top else source
    kind = cfg.family.kind
    if cfg.geometry == "s2" and kind not in ("zonal", "nonzonal"):
        raise ConfigError(f"{where}: geometry s2 needs a zonal or nonzonal family")
    if cfg.geometry in ("torus", "s3") and kind in ("zonal", "nonzonal"):
        raise ConfigError(f"{where}: {kind} families live on s2")
    if kind == "quotient" and (cfg.geometry != "s3" or cfg.family.quotient_p is None):
        raise ConfigError(f"{where}: quotient families need geometry s3 and a quotient.p entry")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {str(path)!r} does not exist")
    return parse_config(path.read_text(), str(path), path.parent)


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("diffwave").joinpath("presets", f"{name}.yaml").read_text()
    return parse_config(text, f"preset:{name}")
