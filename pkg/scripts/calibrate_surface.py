"""Reproduce the frozen interaction-surface constants.

Two nested roots pin the default surface:

1. amp0: the T-shaped well depth must be exactly -40 K.
2. c60: the full vibrating-model s-wave scattering length must be
   -2.9 bohr at the unscaled surface.

The shape parameters (wall steepness, anisotropy fractions, bond-length
slopes) are fixed model choices, selected so that

- the repulsive wall at the propagation start (4.1 bohr) is in the
  kilokelvin range, making the log-derivative start condition
  irrelevant at the 1e-6 level,
- rigid-rotor and vibrating models agree at the percent level off
  resonance, and
- scaling the surface into the 90-91 window drags vibrational Feshbach
  states across threshold there.

Run:  python3 scripts/calibrate_surface.py [--fast]

--fast skips the slow verification block (bound counts, window map)
and only reproduces the two roots.
"""
import argparse
import sys

import numpy as np
from scipy.optimize import brentq

from coldcc.pes import InteractionSurface, LegendreTerm, evaluate_surface
from coldcc.scatter.bound import count_bound_states
from coldcc.scatter.grid import PropagationGrid
from coldcc.scatter.runs import make_setup, scattering_length

R_REF = 2.282
DECAY = 3.0
SLOPE = 0.4
F2_AMP = 0.5
F2_C6 = 0.10
DEPTH_TARGET = -40.0
A_TARGET = -2.9


def build(amp0: float, c60: float) -> InteractionSurface:
    return InteractionSurface(
        terms=(
            LegendreTerm(order=0, amp=amp0, amp_slope=SLOPE,
                         decay=DECAY, c6=c60, c6_slope=SLOPE),
            LegendreTerm(order=2, amp=F2_AMP * amp0, amp_slope=SLOPE,
                         decay=DECAY, c6=F2_C6 * c60, c6_slope=SLOPE),
        ),
        r_ref=R_REF,
    )


def t_shape_depth(amp0: float, c60: float) -> float:
    big_r = np.linspace(3.0, 20.0, 8000)
    return float(evaluate_surface(build(amp0, c60), big_r, R_REF,
                                  np.pi / 2).min())


def amp_for_depth(c60: float) -> float:
    return brentq(lambda a0: t_shape_depth(a0, c60) - DEPTH_TARGET,
                  1e5, 1e15, xtol=1e-2, rtol=1e-12)


def a_at_root(c60: float) -> float:
    amp0 = amp_for_depth(c60)
    setup = make_setup(mode="vibrating", v_max=1, surface=build(amp0, c60))
    return scattering_length(setup).value


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fast", action="store_true",
                    help="roots only, skip verification block")
    args = ap.parse_args(argv)

    c60 = brentq(lambda c: a_at_root(c) - A_TARGET, 2.0e6, 3.2e6, xtol=20.0)
    amp0 = amp_for_depth(c60)
    print(f"amp0 = {amp0:.8e}")
    print(f"c60  = {c60:.8e}")

    surf = build(amp0, c60)
    a_vib = scattering_length(
        make_setup(mode="vibrating", v_max=1, surface=surf)).value
    a_rig = scattering_length(
        make_setup(mode="rigid", surface=surf)).value
    print(f"a(vibrating) = {a_vib:+.6f} bohr")
    print(f"a(rigid)     = {a_rig:+.6f} bohr")
    print(f"E->0 rate ratio rigid/vibrating = {(a_rig / a_vib) ** 2:.4f}")

    thetas = np.linspace(0.0, np.pi / 2, 31)
    big_r = np.linspace(3.0, 20.0, 8000)
    mins = [float(evaluate_surface(surf, big_r, R_REF, th).min())
            for th in thetas]
    i_min = int(np.argmin(mins))
    print(f"global minimum {mins[i_min]:.4f} K at "
          f"theta = {np.degrees(thetas[i_min]):.1f} deg")
    wall = float(evaluate_surface(surf, 4.1, R_REF, np.pi / 2))
    print(f"T-shape wall at 4.1 bohr: {wall:.1f} K")

    if args.fast:
        return 0

    for y0 in (1e6, 1e10):
        st = make_setup(mode="vibrating", v_max=1, surface=surf,
                        grid=PropagationGrid(y0=y0))
        print(f"y0 = {y0:.0e}: a = {scattering_length(st).value:.10f}")

    st_full = make_setup(mode="vibrating", v_max=1, surface=surf)
    st_v0 = make_setup(mode="vibrating", v_max=0, n_max_by_v={0: 8},
                       surface=surf)
    st_rig = make_setup(mode="rigid", surface=surf)
    print("bound counts (J_total=1, even parity):")
    for lam in (1.0, 90.0, 91.0, 100.0):
        row = []
        for name, st in (("vib", st_full), ("v0", st_v0), ("rigid", st_rig)):
            n = count_bound_states(st.scaled_to(lam).coupling(1, 1))
            row.append(f"{name}={n}")
        print(f"  lambda={lam:6.1f}: " + "  ".join(row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
