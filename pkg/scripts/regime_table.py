"""Regime table for an atom near a Si plate at a few separations."""

import argparse

from lifshitz_audit.regimes import SILICON, MaterialProfile, classify, compare

DEFAULT_Z = [5.45e-10, 1e-9, 3e-9, 6e-9, 2e-8, 7e-8, 1e-7, 1e-6, 3e-6, 1e-5]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--temperature", type=float, default=300.0)
    ap.add_argument("--lambda0", type=float, default=SILICON.absorption_wavelength)
    args = ap.parse_args()
    mat = MaterialProfile("Si", SILICON.lattice_constant, args.lambda0)

    cols = ("continuum", "short", "long", "alt_short", "alt_long")
    print(f"{'z [m]':>10} " + " ".join(f"{c:>10}" for c in cols))
    for z in DEFAULT_Z:
        v = classify(z, mat, args.temperature)
        print(f"{z:10.3e} " + " ".join(f"{v.verdicts[c].value:>10}" for c in cols))
    print()
    for row in compare(DEFAULT_Z, mat, args.temperature):
        for reason in row["reasons"]:
            print(f"{row['z']:.3e} m: {reason}")


if __name__ == "__main__":
    main()
