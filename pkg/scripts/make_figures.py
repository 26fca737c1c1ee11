"""Regenerate the data behind the three figure presets, with optional PNG plots.

Usage: python scripts/make_figures.py [--out figures] [--plot]

CSV/JSON files come from ``diffwave family --preset figN``. With ``--plot``
and matplotlib available, one PNG per preset is written next to the data.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from diffwave import cli


def _curves(folder):
    out = []
    for path in sorted(folder.glob("family_*.csv")):
        head = cli.read_csv_header(path)
        data = np.loadtxt(path, delimiter=",", skiprows=len(head) + 1)
        out.append((float(head["rho"]), data[:, 0], data[:, 1]))
    return out


def plot(out: Path):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping plots", file=sys.stderr)
        return
    for name, xlabel in (("fig1", "theta"), ("fig2", "x0")):
        fig, ax = plt.subplots(figsize=(6, 4))
        for rho, x, y in _curves(out / name):
            ax.plot(x, y, label=f"rho = {rho:g}")
        ax.set_xlabel(xlabel)
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(out / f"{name}.png", dpi=150)
        plt.close(fig)
    data = json.loads((out / "fig3" / "family_field.json").read_text())
    nodes = np.array(data["nodes"])
    vals = np.array([complex(*z) for z in data["fields"][0]["values"]])
    lon, lat = np.arctan2(nodes[:, 1], nodes[:, 0]), np.arcsin(np.clip(nodes[:, 2], -1, 1))
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, part, title in zip(axes, (vals.real, vals.imag), ("real part", "imaginary part")):
        sc = ax.scatter(lon, lat, c=part, s=4, cmap="RdBu_r")
        ax.set_title(title)
        fig.colorbar(sc, ax=ax)
    fig.tight_layout()
    fig.savefig(out / "fig3.png", dpi=150)
    plt.close(fig)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args(argv)
    out = Path(args.out)
    for name in ("fig1", "fig2", "fig3"):
        code = cli.main(["family", "--preset", name, "--out", str(out / name)])
        if code:
            return code
        print(f"{name}: wrote {out / name}")
    if args.plot:
        plot(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
