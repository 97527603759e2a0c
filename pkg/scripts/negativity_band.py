"""Flag the reduced-temperature band where a quadratic fit turns unphysical.

The synthetic fit has gamma'_k(t) - gamma_k = A_k (t - lo)(hi - t), so the
band (lo, hi) is known by construction; the audit should recover it to one
grid cell.
"""

import argparse

import numpy as np

from lifshitz_audit.models import ModelKind, TemperatureFit, TermFit, temperature_of
from lifshitz_audit.validation import audit, flagged_band


def band_fit(lo, hi, strength):
    terms = []
    for a, w, g in ((0.45, 5.2e15, 1.6e14), (0.25, 7.9e15, 4.1e14)):
        amp = strength * g
        terms.append(TermFit(a=(a, 0.0, 0.0), omega_r=(w, 0.0, 0.0), gamma=(g, 0.0, 0.0),
                             gamma_prime=(g - amp * lo * hi, amp * (lo + hi), -amp)))
    return TemperatureFit(ModelKind.CLAUSIUS_MOSSOTTI, tuple(terms))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lo", type=float, default=0.375)
    ap.add_argument("--hi", type=float, default=1.469)
    ap.add_argument("--strength", type=float, default=0.25)
    ap.add_argument("--step", type=float, default=0.01)
    args = ap.parse_args()

    ts = np.arange(0.0, 2.833 + 1e-9, args.step)
    reports = audit(band_fit(args.lo, args.hi, args.strength), ts, grid_size=32, kk_xi=[])
    band = flagged_band(reports)
    if not band:
        print("no negative Im eps anywhere on the grid")
        return
    print(f"constructed band: ({args.lo}, {args.hi})")
    print(f"flagged band:     [{band[0]:.3f}, {band[-1]:.3f}] "
          f"= [{temperature_of(band[0]):.1f}, {temperature_of(band[-1]):.1f}] K")
    for r in reports[:: max(1, len(reports) // 12)]:
        edge = r.numeric_negative_intervals[0][1] if r.negative else 0.0
        print(f"  t_delta {r.t_delta:6.3f}  T {r.temperature_K:6.1f} K  "
              f"negative up to {edge:.3e} rad/s")


if __name__ == "__main__":
    main()
