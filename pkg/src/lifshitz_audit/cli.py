"""Command-line entry point ``lifshitz-audit``.

Exit status: 0 on success, 1 on operational errors (bad files, bad
arguments, numerical failures), 2 when ``validate`` finds negative Im eps.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from lifshitz_audit import __version__
from lifshitz_audit.errors import LifshitzAuditError, ParseError
from lifshitz_audit.fitting import fit_oscillators, load_dataset
from lifshitz_audit.lifshitz import (
    AtomModel,
    ConstantPermittivity,
    IdealMetal,
    coefficients,
    sensitivity,
    sweep,
)
from lifshitz_audit.models import (
    TemperatureFit,
    dump_model,
    eps_imag_axis,
    eps_real_axis,
    load_model,
    params_at,
)
from lifshitz_audit.regimes import SILICON, MarginSet, MaterialProfile, classify
from lifshitz_audit.validation import audit, eps_poles

EXIT_OK, EXIT_ERROR, EXIT_UNPHYSICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors are operational errors (exit 1); 2 is reserved
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _floats(text: str, n: int | None = None, what: str = "value") -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"cannot parse {what} {text!r}") from None
    if n is not None and len(vals) != n:
        raise ParseError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return vals


def _grid(text: str | None, default) -> list[float]:
    """``"a,b,c"`` list or ``"lo:hi:n"`` linear range."""
    if text is None:
        return list(default)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParseError(f"range must be lo:hi:n, got {text!r}")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        return np.linspace(lo, hi, n).tolist()
    return _floats(text, what="grid")


def _settings(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _header_lines(args) -> list[str]:
    opts = " ".join(f"{k}={v}" for k, v in _settings(args).items())
    return [f"# lifshitz-audit {__version__} {args.command}", f"# {opts}"]


def _write_csv(path, header, rows, args):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        for line in _header_lines(args):
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    finally:
        if path:
            fh.close()


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _write_json(path, doc):
    text = json.dumps(_clean(doc), indent=2, default=_json_default) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load_fit(args) -> TemperatureFit:
    if not args.model:
        raise ParseError("--model is required for this command")
    return load_model(args.model)


def _atom(args) -> AtomModel:
    if not args.atom:
        raise ParseError("--atom alpha0,omega_a is required for this command")
    alpha0, omega_a = _floats(args.atom, 2, "--atom")
    return AtomModel.from_units(alpha0, omega_a, args.alpha_unit)


def _plate(args):
    if args.plate == "ideal_metal":
        return IdealMetal()
    if args.plate.startswith("eps="):
        return ConstantPermittivity(float(args.plate[4:]))
    return params_at(_load_fit(args), _t_single(args), strict=args.strict)


def _t_single(args) -> float:
    default = [0.0]
    if args.t_delta is None and getattr(args, "model", None) and args.plate == "model":
        # fixed-temperature models default to their own t_delta
        lo, hi = _load_fit(args).t_delta_range
        if lo == hi:
            default = [lo]
    ts = _grid(args.t_delta, default)
    if len(ts) != 1:
        raise ParseError("this command takes a single --t-delta")
    return ts[0]


# --------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    fit = _load_fit(args)
    lo, hi = fit.t_delta_range
    default = [lo] if lo == hi else np.linspace(lo, hi, 21).tolist()
    ts = _grid(args.t_delta, default)
    omega_range = (args.omega_min, args.omega_max)
    kk = None if args.kk_points is None else _floats(args.kk_points, what="--kk-points")
    reports = audit(fit, ts, omega_range, args.points_per_decade, kk_xi=kk, strict=args.strict)
    docs = []
    for r in reports:
        d = r.to_dict()
        d["eps_poles_upper_half_plane"] = [
            [p.real, p.imag] for p in eps_poles(params_at(fit, r.t_delta, args.strict)) if p.imag > 0
        ]
        docs.append(d)
    unphysical = any(r.negative for r in reports)
    _write_json(args.out, {"settings": _settings(args), "physical": not unphysical,
                           "reports": docs})
    curve_path = args.curve_out or (str(Path(args.out).with_suffix("")) + "_curve.csv"
                                    if args.out else None)
    if curve_path:
        omegas = np.geomspace(args.omega_min, args.omega_max, args.curve_points)
        rows = []
        for t in ts:
            eps = eps_real_axis(params_at(fit, t, args.strict), omegas)
            rows += [(t, w, e.real, e.imag) for w, e in zip(omegas.tolist(), eps.tolist())]
        _write_csv(curve_path, ["t_delta", "omega_rad_s", "eps_re", "eps_im"], rows, args)
    return EXIT_UNPHYSICAL if unphysical else EXIT_OK


def cmd_eval(args) -> int:
    model = params_at(_load_fit(args), _t_single(args), strict=args.strict)
    if args.xi:
        xs = _grid(args.xi, [])
        vals = np.atleast_1d(eps_imag_axis(model, np.array(xs)))
        _write_csv(args.out, ["xi_rad_s", "eps"], zip(xs, vals.tolist()), args)
    else:
        omegas = np.geomspace(args.omega_min, args.omega_max, args.points)
        eps = eps_real_axis(model, omegas)
        rows = zip(omegas.tolist(), eps.real.tolist(), eps.imag.tolist())
        _write_csv(args.out, ["omega_rad_s", "eps_re", "eps_im"], rows, args)
    return EXIT_OK


def cmd_potential(args) -> int:
    z_max = args.z_max if args.z_max is not None else 100 * args.z_min
    zs = np.geomspace(args.z_min, z_max, args.points)
    rows = sweep(_atom(args), _plate(args), zs, rtol=args.rtol)
    _write_csv(args.out, ["z_m", "U_J", "z3U_Jm3", "z4U_Jm4"], rows, args)
    return EXIT_OK


def cmd_coefficients(args) -> int:
    res = coefficients(_atom(args), _plate(args), _t_single(args), rtol=args.rtol)
    _write_json(args.out, {"settings": _settings(args), **res.to_dict()})
    return EXIT_OK


def cmd_regimes(args) -> int:
    if args.material:
        l, lam0 = _floats(args.material, 2, "--material")
        material = MaterialProfile("custom", l, lam0)
    else:
        material = SILICON
    margins = MarginSet.parse(args.margins) if args.margins else MarginSet()
    z_max = args.z_max if args.z_max is not None else args.z_min
    n = 1 if z_max == args.z_min else args.points
    zs = np.geomspace(args.z_min, z_max, n)
    rows = []
    for z in zs:
        v = classify(float(z), material, args.temperature, margins)
        rows.append((v.z, v.continuum_ok, v.short_range_ok, v.long_range_ok,
                     v.alt_short_ok, v.alt_long_ok, "; ".join(v.notes)))
    _write_csv(args.out, ["z_m", "continuum", "short", "long", "alt_short", "alt_long", "notes"],
               rows, args)
    return EXIT_OK


def cmd_fit(args) -> int:
    if not args.data:
        raise ParseError("--data is required for fit")
    t = _t_single(args)
    data = load_dataset(args.data, t)
    res = fit_oscillators(data, args.kind, args.terms, args.mode, n_starts=args.starts,
                          seed=args.seed)
    fit = TemperatureFit.constant(res.model, (t, t))
    meta = {**res.metadata(), "settings": _clean(_settings(args))}
    if args.out:
        dump_model(fit, args.out, meta)
    else:
        from lifshitz_audit.models import fit_to_dict
        _write_json(None, fit_to_dict(fit, meta))
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    fit = _load_fit(args)
    res = sensitivity(_atom(args), params_at(fit, _t_single(args), args.strict), _t_single(args))
    _write_json(args.out, {"settings": _settings(args), **res})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model definition JSON")
    common.add_argument("--t-delta", help="reduced temperature, list a,b,c or range lo:hi:n")
    common.add_argument("--omega-min", type=float, default=1e10, help="rad/s (default 1e10)")
    common.add_argument("--omega-max", type=float, default=1e17, help="rad/s (default 1e17)")
    common.add_argument("--xi", help="imaginary frequencies (rad/s), list or lo:hi:n")
    common.add_argument("--z-min", type=float, default=1e-9, help="m (default 1e-9)")
    common.add_argument("--z-max", type=float, default=None,
                        help="m (default: 100 z-min for potential, z-min for regimes)")
    common.add_argument("--points", type=int, default=64, help="sweep points (default 64)")
    common.add_argument("--atom", help="alpha0,omega_a (alpha0 in --alpha-unit, omega_a rad/s)")
    common.add_argument("--alpha-unit", choices=("m3", "cm3", "au"), default="m3")
    common.add_argument("--plate", default="model",
                        help="'model' (default), 'ideal_metal' or 'eps=<value>'")
    common.add_argument("--material", help="lattice_constant,lambda0 in m (default Si, 300 nm)")
    common.add_argument("--temperature", type=float, default=0.0, help="K (default 0)")
    common.add_argument("--margins", help="overrides, e.g. continuum=10,short=50,alt=10")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--rtol", type=float, default=1e-8, help="potential quadrature tolerance")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--strict", action="store_true",
                        help="reject t_delta outside the fit range instead of extrapolating")

    parser = _Parser(prog="lifshitz-audit", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common], help="positivity/KK/parity audit")
    p.add_argument("--points-per-decade", type=int, default=512)
    p.add_argument("--kk-points", help="xi values for the KK check (default: automatic)")
    p.add_argument("--curve-out", help="CSV of (omega, Re eps, Im eps) curves")
    p.add_argument("--curve-points", type=int, default=400)
    p.set_defaults(func=cmd_validate)

    sub.add_parser("eval", parents=[common], help="tabulate eps").set_defaults(func=cmd_eval)
    sub.add_parser("potential", parents=[common],
                   help="U(z) sweep CSV").set_defaults(func=cmd_potential)
    sub.add_parser("coefficients", parents=[common],
                   help="C3 and C4 JSON").set_defaults(func=cmd_coefficients)
    sub.add_parser("regimes", parents=[common],
                   help="regime sweep CSV").set_defaults(func=cmd_regimes)

    p = sub.add_parser("fit", parents=[common], help="fit a model to a dataset CSV")
    p.add_argument("--data", help="CSV with omega_rad_s,eps_re,eps_im,weight")
    p.add_argument("--kind", choices=("clausius_mossotti", "lorentz_dirac"),
                   default="lorentz_dirac")
    p.add_argument("--terms", type=int, default=2)
    p.add_argument("--mode", choices=("hard", "penalty", "none"), default="hard")
    p.add_argument("--starts", type=int, default=8)
    p.set_defaults(func=cmd_fit)

    sub.add_parser("sensitivity", parents=[common],
                   help="C3 with clamped vs raw Im eps").set_defaults(func=cmd_sensitivity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("rtol",):
        if getattr(args, name) <= 0:
            parser.error(f"--{name} must be positive")
    try:
        return args.func(args)
    except (LifshitzAuditError, OSError, ValueError) as exc:
        print(f"lifshitz-audit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
