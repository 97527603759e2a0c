"""Constrained least-squares fitting of oscillator models to optical data.

Three constraint modes are offered:

``hard``
    ``a_k = exp(u_k)`` and ``g'_k = g_k * sigmoid(s_k)``, so every fitted
    model satisfies a > 0, 0 <= g' <= g and carries the positivity
    certificate by construction.
``penalty``
    free parameters plus a quadratic penalty on negative Im eps over a dense
    logarithmic grid.
``none``
    free parameters (a real, g' >= 0), i.e. an unconstrained fit that may
    produce negative Im eps.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import optimize, signal
from scipy.special import expit, logit

from lifshitz_audit.errors import LifshitzAuditError, ParseError
from lifshitz_audit.models import (
    ModelKind,
    OscillatorModel,
    OscillatorTerm,
    PARAMETERS,
    TemperatureFit,
    TermFit,
    eps_real_axis,
)
from lifshitz_audit.validation import im_eps, positivity_certificate

CONSTRAINT_MODES = ("hard", "penalty", "none")
DEFAULT_STARTS = 8
PENALTY_POINTS = 1024
PENALTY_WEIGHT = 1e3
# sigmoid argument standing in for g' = 0 at start
_S_FLOOR = -20.0
_FAILED = 1e6


@dataclass
class OpticalDataset:
    omega: np.ndarray
    eps_re: np.ndarray
    eps_im: np.ndarray
    weight: np.ndarray
    t_delta: float = 0.0

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        n = len(self.omega)
        self.eps_re = np.asarray(self.eps_re, dtype=float)
        self.eps_im = np.asarray(self.eps_im, dtype=float)
        w = np.ones(n) if self.weight is None else np.asarray(self.weight, dtype=float)
        self.weight = w
        if not (self.eps_re.shape == self.eps_im.shape == w.shape == (n,)):
            raise ParseError("dataset columns have different lengths")
        if n and (np.any(np.diff(self.omega) <= 0) or self.omega[0] <= 0):
            raise ParseError("omega must be positive and strictly increasing")
        if np.any(w < 0):
            raise ParseError("weights must be non-negative")

    def __len__(self):
        return len(self.omega)

    @property
    def has_negative_im(self) -> bool:
        return bool(np.any(self.eps_im < 0))

    @classmethod
    def from_model(cls, model: OscillatorModel, omega, t_delta: float = 0.0, weight=None):
        """Noiseless synthetic data sampled from ``model``."""
        eps = eps_real_axis(model, np.asarray(omega, dtype=float))
        return cls(omega, eps.real, eps.imag, weight, t_delta)


def load_dataset(path, t_delta: float = 0.0) -> OpticalDataset:
    """Read a CSV with header ``omega_rad_s,eps_re,eps_im,weight``."""
    cols = {"omega_rad_s": [], "eps_re": [], "eps_im": [], "weight": []}
    with open(path, newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        missing = set(cols) - {"weight"} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"{path}: header lacks {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            for name in cols:
                raw = row.get(name)
                if name == "weight" and raw in (None, ""):
                    raw = "1"
                try:
                    cols[name].append(float(raw))
                except (TypeError, ValueError):
                    raise ParseError(f"{path}: line {lineno}, field {name}: {raw!r}") from None
    return OpticalDataset(cols["omega_rad_s"], cols["eps_re"], cols["eps_im"],
                          cols["weight"], t_delta)


def write_dataset(data: OpticalDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["omega_rad_s", "eps_re", "eps_im", "weight"])
        for row in zip(data.omega, data.eps_re, data.eps_im, data.weight):
            writer.writerow([repr(float(x)) for x in row])


@dataclass
class FitResult:
    model: OscillatorModel
    residual_rms: float
    positivity_certified: bool
    iterations: int
    converged: bool
    mode: str
    start_index: int
    seed: int

    def metadata(self) -> dict:
        return {
            "residual_rms": self.residual_rms,
            "positivity_certified": self.positivity_certified,
            "iterations": self.iterations,
            "converged": self.converged,
            "constraint_mode": self.mode,
            "start_index": self.start_index,
            "seed": self.seed,
        }


# --------------------------------------------------------------------------
# initial guesses


def initial_terms(data: OpticalDataset, kind: ModelKind, n_terms: int) -> list[OscillatorTerm]:
    """Guess terms from the absorption peaks.

    Peaks of Im eps (Lorentz-Dirac) or of Im rho computed from the data
    (Clausius-Mossotti) give the resonances, their half widths the damping
    and their heights the amplitudes; g' starts at 0.
    """
    eps = data.eps_re + 1j * data.eps_im
    if kind is ModelKind.CLAUSIUS_MOSSOTTI:
        curve = ((eps - 1) / (eps + 2)).imag
    else:
        curve = eps.imag
    idx = np.arange(len(data))
    peaks, props = signal.find_peaks(curve, prominence=0)
    order = np.argsort(props["prominences"])[::-1][:n_terms] if len(peaks) else []
    chosen = np.sort(peaks[order]) if len(peaks) else np.array([], dtype=int)
    terms = []
    if len(chosen):
        widths, _, left, right = signal.peak_widths(curve, chosen, rel_height=0.5)
        for p, lo, hi in zip(chosen, left, right):
            w_r = data.omega[p]
            gamma = max(np.interp(hi, idx, data.omega) - np.interp(lo, idx, data.omega),
                        1e-3 * w_r)
            a = max(curve[p] * gamma / w_r, 1e-6)
            terms.append(OscillatorTerm(a, w_r, gamma, 0.0))
    # not enough peaks: spread the rest across the band
    extra = n_terms - len(terms)
    if extra > 0:
        for w_r in np.geomspace(data.omega[0], data.omega[-1], extra + 2)[1:-1]:
            terms.append(OscillatorTerm(0.1, w_r, 0.1 * w_r, 0.0))
    terms.sort(key=lambda t: t.omega_r)
    if kind is ModelKind.CLAUSIUS_MOSSOTTI:
        total = sum(t.a for t in terms)
        if total >= 0.95:
            terms = [OscillatorTerm(t.a * 0.9 / total, t.omega_r, t.gamma, 0.0) for t in terms]
    return terms


# --------------------------------------------------------------------------
# parameter maps


def _encode(terms, mode):
    x = []
    for t in terms:
        ratio = t.gamma_prime / t.gamma if t.gamma > 0 else 0.0
        if mode == "hard":
            s = _S_FLOOR if ratio <= expit(_S_FLOOR) else float(logit(min(ratio, 1 - 1e-12)))
            x += [math.log(max(t.a, 1e-12)), math.log(t.omega_r), math.log(t.gamma), s]
        else:
            x += [t.a, math.log(t.omega_r), math.log(t.gamma), ratio]
    return np.array(x)


def _decode(x, kind, mode):
    terms = []
    for u, lw, lg, s in np.reshape(x, (-1, 4)):
        gamma = math.exp(lg)
        if mode == "hard":
            a, ratio = math.exp(u), float(expit(s))
        else:
            a, ratio = float(u), max(float(s), 0.0)
        terms.append(OscillatorTerm(a, math.exp(lw), gamma, gamma * ratio))
    return OscillatorModel(kind, tuple(terms))


def _bounds(n_terms, mode):
    if mode == "hard":
        return -np.inf, np.inf
    lo = np.tile([-np.inf, -np.inf, -np.inf, 0.0], n_terms)
    return lo, np.full(4 * n_terms, np.inf)


# --------------------------------------------------------------------------
# fitting


def _residual_fn(data, kind, mode, n_terms, penalty_weight):
    sw = np.sqrt(data.weight)
    n_res = 2 * len(data)
    grid = None
    if mode == "penalty":
        grid = np.geomspace(data.omega[0] / 10, data.omega[-1], PENALTY_POINTS)
        pen_scale = math.sqrt(penalty_weight * data.weight.mean())
        n_res += PENALTY_POINTS

    def fun(x):
        try:
            model = _decode(x, kind, mode)
            eps = eps_real_axis(model, data.omega)
            r = np.concatenate([sw * (eps.real - data.eps_re), sw * (eps.imag - data.eps_im)])
            if grid is not None:
                r = np.concatenate([r, pen_scale * np.maximum(-np.asarray(im_eps(model, grid)), 0)])
        except (LifshitzAuditError, OverflowError, ValueError):
            return np.full(n_res, _FAILED)
        if not np.all(np.isfinite(r)):
            return np.full(n_res, _FAILED)
        return r

    return fun


def _rms(data, model) -> float:
    eps = eps_real_axis(model, data.omega)
    sq = data.weight * ((eps.real - data.eps_re) ** 2 + (eps.imag - data.eps_im) ** 2)
    return math.sqrt(sq.sum() / data.weight.sum())


def _perturb(x0, rng, mode):
    x = np.array(x0, dtype=float).reshape(-1, 4)
    n = len(x)
    x[:, 1] += rng.normal(0.0, 0.05, n)
    x[:, 2] += rng.normal(0.0, 0.3, n)
    if mode == "hard":
        x[:, 0] += rng.normal(0.0, 0.3, n)
        x[:, 3] = rng.uniform(-8.0, 2.0, n)
    else:
        x[:, 0] *= np.exp(rng.normal(0.0, 0.3, n))
        x[:, 3] = rng.uniform(0.0, 2.0, n)
    return x.ravel()


def fit_oscillators(data: OpticalDataset, kind, n_terms: int = 2,
                    constraint_mode: str = "hard", n_starts: int = DEFAULT_STARTS,
                    seed: int = 0, max_nfev: int = 4000, initial=None,
                    penalty_weight: float = PENALTY_WEIGHT, workers: int = 1) -> FitResult:
    """Fit an ``n_terms`` oscillator model to ``data``.

    Minimizes ``sum w [(Re eps_model - eps_re)^2 + (Im eps_model - eps_im)^2]``
    with trust-region least squares from ``n_starts`` starting points: the
    peak-based guess (or ``initial`` terms) and seeded random perturbations
    of it. The lowest-residual candidate wins, preferring certified ones
    except in ``none`` mode; ties go to the lower start index.
    """
    kind = ModelKind(kind)
    if constraint_mode not in CONSTRAINT_MODES:
        raise ValueError(f"constraint_mode must be one of {CONSTRAINT_MODES}")
    if len(data) < 4 * n_terms:
        raise ParseError(f"{len(data)} points cannot determine {4 * n_terms} parameters")
    guess = list(initial) if initial is not None else initial_terms(data, kind, n_terms)
    x0 = _encode(guess, constraint_mode)
    rng = np.random.default_rng(seed)
    starts = [x0] + [_perturb(x0, rng, constraint_mode) for _ in range(n_starts - 1)]
    fun = _residual_fn(data, kind, constraint_mode, n_terms, penalty_weight)
    lo, hi = _bounds(n_terms, constraint_mode)
    if constraint_mode != "hard":
        starts = [np.clip(s, lo, hi) for s in starts]

    def run(x_start):
        sol = optimize.least_squares(fun, x_start, bounds=(lo, hi), method="trf",
                                     x_scale=1.0, ftol=1e-15, xtol=1e-15, gtol=1e-15,
                                     max_nfev=max_nfev)
        try:
            model = _decode(sol.x, kind, constraint_mode)
            rms = _rms(data, model)
        except LifshitzAuditError:
            return None
        return model, rms, sol.nfev, sol.status > 0

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(run, starts))
    else:
        outcomes = [run(s) for s in starts]

    candidates = []
    for i, out in enumerate(outcomes):
        if out is None:
            continue
        model, rms, nfev, ok = out
        cert = positivity_certificate(model)
        rank = (0 if cert or constraint_mode == "none" else 1, rms, i)
        candidates.append((rank, model, rms, nfev, ok, cert, i))
    if not candidates:
        raise LifshitzAuditError("every start failed to produce a valid model")
    _, model, rms, nfev, ok, cert, i = min(candidates, key=lambda c: c[0])
    return FitResult(model, rms, cert, nfev, ok, constraint_mode, i, seed)


def fit_temperature(points, t_delta_range=None, t0: float = 293.0) -> TemperatureFit:
    """Second stage: ordinary least-squares quadratic in ``t_delta`` per parameter.

    ``points`` is a sequence of ``(t_delta, OscillatorModel)`` (or FitResult)
    pairs of one kind with equal term counts.
    """
    points = [(float(t), m.model if isinstance(m, FitResult) else m) for t, m in points]
    if not points:
        raise ValueError("no per-temperature models given")
    kinds = {m.kind for _, m in points}
    sizes = {len(m.terms) for _, m in points}
    if len(kinds) != 1 or len(sizes) != 1:
        raise ValueError("all models must share kind and number of terms")
    ts = np.array([t for t, _ in points])
    deg = min(2, len(points) - 1)
    terms_fit = []
    for k in range(sizes.pop()):
        coeffs = {}
        for name in PARAMETERS:
            ys = np.array([getattr(m.terms[k], name) for _, m in points])
            c = np.polynomial.polynomial.polyfit(ts, ys, deg)
            coeffs[name] = tuple(np.pad(c, (0, 2 - deg)))
        terms_fit.append(TermFit(**coeffs))
    rng = t_delta_range if t_delta_range is not None else (float(ts.min()), float(ts.max()))
    return TemperatureFit(kinds.pop(), tuple(terms_fit), rng, t0)
