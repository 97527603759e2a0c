"""Approach of z^3 U and z^4 U to their C3, C4 limits for an ideal metal.

For a single-oscillator polarizability alpha ~ 1/xi^2 at high frequency,
so the short-range correction to z^3 U is linear in z, close to
2 omega_a z / (pi c). The table shows how small z must be for a given
agreement.
"""

import argparse
import math

import numpy as np

from lifshitz_audit.constants import CONSTANTS
from lifshitz_audit.lifshitz import AtomModel, IdealMetal, lambda0_for, potential_t0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha0-au", type=float, default=1.383)
    ap.add_argument("--omega-au", type=float, default=1.18)
    args = ap.parse_args()
    atom = AtomModel.from_units(args.alpha0_au, args.omega_au, "au", "au")
    plate = IdealMetal()
    c3 = CONSTANTS.hbar * atom.alpha0 * atom.omega_a / 8
    c4 = 3 * CONSTANTS.hbar * CONSTANTS.c * atom.alpha0 / (8 * math.pi)
    lam = lambda0_for(plate, atom)
    print(f"lambda0 estimate {lam:.4e} m")
    print(f"{'z/lambda0':>10} {'-z^3U/C3':>12} {'linear est.':>12} {'-z^4U/C4':>12}")
    for frac in np.geomspace(1e-4, 1e3, 15):
        z = frac * lam
        u = potential_t0(atom, plate, z)
        lin = 1 - 2 * atom.omega_a * z / (math.pi * CONSTANTS.c)
        print(f"{frac:10.3e} {-u * z**3 / c3:12.6f} {lin:12.6f} {-u * z**4 / c4:12.6f}")


if __name__ == "__main__":
    main()
