"""Energy gap and round-trip error of the wavelet transform across band limits and weights.

Usage: python scripts/unitarity_sweep.py [--seed 0] [--trials 3]

Prints one row per (geometry, family, weight, band limit) with the worst
relative energy gap and relative reconstruction error over random inputs.
"""

import argparse
import math

import numpy as np

from diffwave import diffusive as dv
from diffwave import harmonic as hm
from diffwave import transform as tf

WEIGHTS = {
    "constant": lambda geo, L: dv.weight_alpha("constant"),
    "rho^-1": lambda geo, L: dv.weight_alpha("power-law", exponent=-1.0),
    "rho^-3": lambda geo, L: dv.weight_alpha("power-law", exponent=-3.0),
}


def random_input(rng, geometry, L):
    entries = {}
    for i in hm.rep_ids(geometry, L):
        d = hm.rep_dim(geometry, i)
        if geometry == "s3":
            m = complex(*rng.standard_normal(2)) * np.eye(d)
        else:
            m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            if geometry == "s2":
                m[1:] = 0
        entries[i] = m if hm.eigenvalue(geometry, i) > 0 else np.zeros((d, d), complex)
    return hm.SpectralCoefficients(geometry, L, entries)


def cases(rng):
    for L in (8, 16, 32, 64):
        for wname, w in WEIGHTS.items():
            fam = dv.heat_wavelet_family(dv.heat_identity("torus", L), w("torus", L), eta=dv.minus_i_sign)
            yield "torus", "group", wname, L, fam, tf.wavelet_forward_group, tf.wavelet_inverse_group
    for L in (8, 16, 24):
        for wname, w in WEIGHTS.items():
            fam = dv.heat_wavelet_family(dv.heat_identity("s3", L), w("s3", L))
            yield "s3", "group", wname, L, fam, tf.wavelet_forward_group, tf.wavelet_inverse_group
    for L in (4, 8, 12):
        for wname, w in WEIGHTS.items():
            fam = dv.zonal_family_on_sphere(2, w("s2", L), L)
            yield "s2", "zonal", wname, L, fam, tf.wavelet_forward_zonal, tf.wavelet_inverse_zonal
            wv = {k: dv.random_unit_weights(rng, k) for k in range(L + 1)}
            fam = dv.nonzonal_family(w("s2", L), wv, L)
            yield "s2", "nonzonal", wname, L, fam, tf.wavelet_forward_nonzonal, tf.wavelet_inverse_nonzonal


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    scale = tf.scale_grid()
    print(f"{'geometry':8} {'family':9} {'weight':9} {'L':>3} {'energy gap':>11} {'round trip':>11}")
    for geo, kind, wname, L, fam, fwd, inv in cases(rng):
        gap = err = 0.0
        for _ in range(args.trials):
            phi = random_input(rng, geo, L)
            field = fwd(phi, fam, scale)
            gap = max(gap, tf.energy_gap(field))
            rec = inv(field, from_samples=True)
            err = max(err, math.sqrt((rec - phi).norm_sq() / phi.norm_sq()))
        print(f"{geo:8} {kind:9} {wname:9} {L:3d} {gap:11.2e} {err:11.2e}")


if __name__ == "__main__":
    main()
