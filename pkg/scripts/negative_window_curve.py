"""Im eps(omega) of a Clausius-Mossotti model with gamma' > gamma.

Writes a CSV of Re/Im eps on a log grid together with the analytic window
edges, the data behind a plot of the low-frequency negative region.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from lifshitz_audit.models import eps_real_axis, load_model, params_at
from lifshitz_audit.validation import negative_intervals, term_windows

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default=str(HERE / "models" / "cm_negative_window.json"))
    ap.add_argument("--t-delta", type=float, default=None)
    ap.add_argument("--points", type=int, default=600)
    ap.add_argument("--out", default=str(HERE / "out" / "negative_window_curve.csv"))
    args = ap.parse_args()

    fit = load_model(args.model)
    t = fit.t_delta_range[0] if args.t_delta is None else args.t_delta
    model = params_at(fit, t)
    omega = np.geomspace(1e13, 3e16, args.points)
    eps = eps_real_axis(model, omega)

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega_rad_s", "eps_re", "eps_im"])
        for row in zip(omega, eps.real, eps.imag):
            w.writerow([repr(float(x)) for x in row])

    print(f"t_delta = {t}")
    for win in term_windows(model):
        print(f"term {win.term_index}: Im contribution < 0 below {win.omega_upper:.4e} rad/s")
    for lo, hi in negative_intervals(model):
        print(f"Im eps < 0 on [{lo:.4e}, {hi:.4e}] rad/s")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
