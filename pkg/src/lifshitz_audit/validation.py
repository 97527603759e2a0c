"""Second-law positivity and Kramers-Kronig audits of oscillator models.

The imaginary part of the oscillator sum has the closed form

    Im S(omega) = sum_k a_k omega [w_k^2 (g_k - g'_k) + omega^2 g'_k]
                  / [(w_k^2 - omega^2)^2 + omega^2 g_k^2]

which is Im eps for the Lorentz-Dirac family and Im rho for the
Clausius-Mossotti family. In the latter case

    Im eps = 3 Im rho / ([1 - Re rho]^2 + [Im rho]^2)

so Im eps and Im rho always carry the same sign. A term with a > 0 and
g' > g is negative below ``w sqrt(1 - g/g')``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, optimize

from lifshitz_audit.errors import AccuracyError, LifshitzAuditError, ModelError, SingularityError
from lifshitz_audit.models import (
    INVERSION_TOL,
    ModelKind,
    OscillatorModel,
    OscillatorTerm,
    TemperatureFit,
    as_fit,
    eps_imag_axis,
    eps_real_axis,
    oscillator_sum,
    params_at,
    temperature_of,
)

DEFAULT_OMEGA_RANGE = (1e10, 1e17)
DEFAULT_POINTS_PER_DECADE = 512
KK_RTOL = 1e-6


def _unwrap(values, scalar):
    return values.item() if scalar else values


def im_oscillator_sum(model: OscillatorModel, omega):
    """Closed-form imaginary part of the oscillator sum at real ``omega``."""
    scalar = np.ndim(omega) == 0
    w = np.asarray(omega, dtype=float)[..., None]
    a, wr, g, gp = model.arrays()
    # same expression with numerator and denominator divided by w_k^4
    y = w / wr
    den = ((1.0 - y) * (1.0 + y)) ** 2 + (y * g / wr) ** 2
    if np.any(den == 0):
        raise SingularityError("omega sits on an undamped resonance")
    total = np.sum(a * y * ((g - gp) / wr + y * y * gp / wr) / den, axis=-1)
    return _unwrap(total, scalar)


def im_rho_cm(model: OscillatorModel, omega):
    """Im rho of a Clausius-Mossotti model, evaluated in closed form."""
    if model.kind is not ModelKind.CLAUSIUS_MOSSOTTI:
        raise ModelError("im_rho_cm requires a Clausius-Mossotti model")
    return im_oscillator_sum(model, omega)


def im_eps_cm(model: OscillatorModel, omega, tol: float = INVERSION_TOL):
    """Im eps of a Clausius-Mossotti model from Re rho and the closed-form Im rho."""
    im_rho = im_rho_cm(model, omega)
    re_rho = np.real(oscillator_sum(model, omega))
    den = (1.0 - re_rho) ** 2 + im_rho**2
    if np.any(den < tol**2):
        raise SingularityError(f"Clausius-Mossotti inversion singular near omega={omega}")
    return 3.0 * im_rho / den


def im_eps(model: OscillatorModel, omega, tol: float = INVERSION_TOL):
    """Im eps for either model family."""
    if model.kind is ModelKind.CLAUSIUS_MOSSOTTI:
        return im_eps_cm(model, omega, tol)
    return im_oscillator_sum(model, omega)


@dataclass(frozen=True)
class NegativityWindow:
    """Per-term low-frequency window ``(0, omega_upper)`` of negative Im.

    ``inverted`` marks a non-positive amplitude, for which the sign pattern
    flips: the term is positive inside the window and negative above it.
    """

    term_index: int
    omega_upper: float
    inverted: bool = False


def negativity_window(term: OscillatorTerm, term_index: int = 0) -> NegativityWindow | None:
    if not term.gamma_prime > term.gamma or term.a == 0:
        return None
    upper = term.omega_r * math.sqrt(1.0 - term.gamma / term.gamma_prime)
    return NegativityWindow(term_index, upper, inverted=term.a < 0)


def term_windows(model: OscillatorModel) -> list[NegativityWindow]:
    return [w for k, t in enumerate(model.terms)
            if (w := negativity_window(t, k)) is not None]


def sufficient_all_terms(model: OscillatorModel) -> bool:
    """Every term has a > 0 and g' > g, so Im eps < 0 below the smallest window."""
    return all(t.a > 0 and t.gamma_prime > t.gamma for t in model.terms)


def eps_poles(model: OscillatorModel) -> np.ndarray:
    """Complex frequencies where eps diverges.

    For a causal permittivity all of them lie in the lower half-plane; a
    Clausius-Mossotti model with strong radiation damping can push poles of
    ``1 / (1 - rho)`` into the upper half-plane, which breaks the
    Kramers-Kronig relations.
    """
    P = np.polynomial.Polynomial
    dens = [P([t.omega_r**2, -1j * t.gamma, -1.0]) for t in model.terms]
    if model.kind is ModelKind.LORENTZ_DIRAC:
        return np.concatenate([d.roots() for d in dens])
    poly = P([1.0])
    for d in dens:
        poly = poly * d
    for k, t in enumerate(model.terms):
        part = P([t.a * t.omega_r**2, -1j * t.a * t.gamma_prime])
        for j, d in enumerate(dens):
            if j != k:
                part = part * d
        poly = poly - part
    return poly.roots()


def positivity_certificate(model: OscillatorModel) -> bool:
    """Every term has a >= 0 and 0 <= g' <= g, hence Im eps >= 0 for omega >= 0."""
    return all(t.a >= 0 and t.gamma_prime <= t.gamma for t in model.terms)


def low_frequency_slope(model: OscillatorModel) -> float:
    """d(Im S)/d(omega) at omega = 0; its sign is the sign of Im eps as omega -> 0+."""
    return math.fsum(t.a * (t.gamma - t.gamma_prime) / t.omega_r**2 for t in model.terms)


def _sign_edge(f, lo, hi, neg_at_lo):
    """Bisection for the sign change of ``f`` in log-frequency on [lo, hi]."""
    def g(x):
        v = f(math.exp(x))
        return -1.0 if v < 0 else 1.0

    target = g(math.log(lo))
    if (target < 0) != neg_at_lo:
        raise AccuracyError("sign bracket does not match grid scan")
    x = optimize.bisect(g, math.log(lo), math.log(hi), xtol=1e-12, maxiter=200)
    return math.exp(x)


def negative_intervals(model: OscillatorModel, omega_range=DEFAULT_OMEGA_RANGE,
                       points_per_decade: int = DEFAULT_POINTS_PER_DECADE,
                       tol: float = INVERSION_TOL) -> list[tuple[float, float]]:
    """Intervals of strictly negative Im eps found by a log-grid sign scan.

    The grid covers ``omega_range`` and always includes a probe at
    ``1e-3 * min omega_r``; edges are refined by bisection. An interval that
    extends down to omega -> 0+ is reported with a lower bound of 0, and one
    that is still negative at the top of the range ends at ``omega_range[1]``.
    """
    lo, hi = omega_range
    if not hi > lo >= 0:
        raise ValueError(f"invalid omega range {omega_range}")
    probe = 1e-3 * model.lowest_resonance
    start = min(probe, lo) if lo > 0 else min(probe, hi / 10)
    decades = math.log10(hi / start)
    grid = np.geomspace(start, hi, max(int(math.ceil(decades * points_per_decade)) + 1, 16))

    def f(w):
        return im_eps(model, w, tol)

    neg = np.asarray(f(grid)) < 0
    slope = low_frequency_slope(model)
    intervals = []
    if slope < 0 and not neg[0]:
        # window closing below the first grid point
        tiny = grid[0] * 1e-9
        if f(tiny) < 0:
            intervals.append((0.0, _sign_edge(f, tiny, grid[0], True)))
    idx = np.flatnonzero(np.diff(np.concatenate(([0], neg.astype(np.int8), [0]))))
    for i, j in zip(idx[::2], idx[1::2] - 1):
        if i == 0:
            tiny = grid[0] * 1e-9
            w_lo = 0.0 if slope < 0 or f(tiny) < 0 else _sign_edge(f, tiny, grid[0], False)
        else:
            w_lo = _sign_edge(f, grid[i - 1], grid[i], False)
        w_hi = grid[-1] if j == len(grid) - 1 else _sign_edge(f, grid[j], grid[j + 1], True)
        if w_hi > w_lo:
            intervals.append((w_lo, w_hi))
    return intervals


def parity_ok(model: OscillatorModel, omegas, rtol: float = 1e-12) -> bool:
    """Re eps even and Im eps odd in omega, by direct substitution of -omega."""
    omegas = np.asarray(omegas, dtype=float)
    plus = eps_real_axis(model, omegas)
    minus = eps_real_axis(model, -omegas)
    scale = np.abs(plus) + 1e-300
    return bool(np.all(np.abs(minus.real - plus.real) <= rtol * scale)
                and np.all(np.abs(minus.imag + plus.imag) <= rtol * scale))


@dataclass(frozen=True)
class KKEstimate:
    value: float
    error_bound: float


def _kk_breakpoints(model, xi, cutoff):
    pts = {xi}
    for t in model.terms:
        for m in (-30.0, -3.0, -0.5, 0.0, 0.5, 3.0, 30.0):
            pts.add(t.omega_r + m * t.gamma)
        pts.update((0.1 * t.omega_r, 10 * t.omega_r))
    # decade markers keep every segment well scaled
    pts.update(np.geomspace(cutoff * 1e-8, cutoff, 9))
    return sorted(p for p in pts if 0 < p < cutoff)


def kk_reconstruct(model: OscillatorModel, xi: float, omega_cutoff: float | None = None,
                   rtol: float = KK_RTOL, clamp_negative: bool = False) -> KKEstimate:
    """eps(i xi) from Im eps on the real axis via the Kramers-Kronig integral

        eps(i xi) = 1 + (2/pi) int_0^inf omega Im eps(omega) / (omega^2 + xi^2) d omega

    The integral is computed by adaptive quadrature up to ``omega_cutoff``;
    beyond it Im eps is represented by ``A/omega + B/omega^3`` matched at the
    cutoff and twice the cutoff and integrated analytically. With
    ``clamp_negative`` the negative parts of Im eps are set to zero first.
    """
    if not xi > 0:
        raise ValueError("kk_reconstruct needs xi > 0")
    w_max = max(t.omega_r + 30 * t.gamma for t in model.terms)
    cutoff = omega_cutoff if omega_cutoff is not None else 1e3 * max(w_max, xi)

    def im(w):
        v = im_eps(model, w)
        return max(v, 0.0) if clamp_negative else v

    def integrand(w):
        return w * im(w) / (w * w + xi * xi)

    edges = [0.0, *_kk_breakpoints(model, xi, cutoff), cutoff]
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            val, e = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=rtol * 1e-2, limit=400)
            total += val
            err += e

    # tail: Im eps ~ A/w + B/w^3
    W = cutoff
    m1, m2 = W * im(W), 2 * W * im(2 * W)
    B = (m1 - m2) * W**2 * 4.0 / 3.0
    A = m1 - B / W**2
    atan_rest = (math.pi / 2 - math.atan(W / xi)) / xi
    tail = A * atan_rest + B * (1.0 / W - atan_rest) / xi**2
    tail_one_term = m1 * atan_rest
    err += abs(tail - tail_one_term) * 0.1 + 1e-16 * abs(tail)

    value = 1.0 + 2.0 / math.pi * (total + tail)
    bound = 2.0 / math.pi * err
    if not bound <= max(100 * rtol * abs(value), 1e-300):
        raise AccuracyError(
            f"Kramers-Kronig quadrature at xi={xi} reached only {bound:.3e}",
            estimate=value, error_bound=bound)
    return KKEstimate(value, bound)


@dataclass
class ValidationReport:
    t_delta: float
    temperature_K: float
    kind: str
    windows: list[NegativityWindow]
    sufficient_all_terms: bool
    certified_positive: bool
    numeric_negative_intervals: list[tuple[float, float]]
    kk_max_relative_residual: float
    parity_ok: bool
    kk_points: list[float] = field(default_factory=list)

    @property
    def negative(self) -> bool:
        return bool(self.numeric_negative_intervals)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["numeric_negative_intervals"] = [list(iv) for iv in self.numeric_negative_intervals]
        out["negative"] = self.negative
        if not math.isfinite(self.kk_max_relative_residual):
            out["kk_max_relative_residual"] = None
        return out


def default_kk_points(model: OscillatorModel, omega_range, n: int = 4) -> np.ndarray:
    lo = max(omega_range[0], 1e-2 * model.lowest_resonance)
    hi = min(omega_range[1], 1e2 * max(t.omega_r for t in model.terms))
    if not hi > lo:
        lo, hi = 1e-2 * model.lowest_resonance, 1e2 * model.lowest_resonance
    return np.geomspace(lo, hi, n)


def audit_model(model: OscillatorModel, t_delta: float = 0.0,
                omega_range=DEFAULT_OMEGA_RANGE,
                grid_size: int = DEFAULT_POINTS_PER_DECADE,
                kk_xi=None, T0: float = 293.0) -> ValidationReport:
    """Audit one fixed-temperature model."""
    if grid_size < 16:
        raise ValueError("grid_size must be >= 16 points per decade")
    intervals = negative_intervals(model, omega_range, grid_size)
    xs = default_kk_points(model, omega_range) if kk_xi is None else np.asarray(kk_xi, float)
    residual = float("nan")
    if len(xs):
        residual = 0.0
        for x in xs:
            direct = eps_imag_axis(model, x)
            kk = kk_reconstruct(model, float(x)).value
            residual = max(residual, abs(kk - direct) / abs(direct))
    parity = parity_ok(model, np.geomspace(max(omega_range[0], 1.0), omega_range[1], 33))
    return ValidationReport(
        t_delta=float(t_delta),
        temperature_K=temperature_of(t_delta, T0),
        kind=model.kind.value,
        windows=term_windows(model),
        sufficient_all_terms=sufficient_all_terms(model),
        certified_positive=positivity_certificate(model),
        numeric_negative_intervals=intervals,
        kk_max_relative_residual=residual,
        parity_ok=parity,
        kk_points=[float(x) for x in xs],
    )


def audit(model_fit, t_delta_grid, omega_range=DEFAULT_OMEGA_RANGE,
          grid_size: int = DEFAULT_POINTS_PER_DECADE, kk_xi=None,
          strict: bool = False) -> list[ValidationReport]:
    """Audit a temperature fit at every ``t_delta`` of the grid.

    ``grid_size`` is the sign-scan density in points per decade. Reports come
    back ordered by ``t_delta``. Errors raised while evaluating the model are
    re-raised with the offending ``t_delta`` in the message.
    """
    fit = as_fit(model_fit)
    lo, hi = omega_range
    if not hi > lo >= 0:
        raise ValueError(f"invalid omega range {omega_range}")
    reports = []
    for t in sorted(float(x) for x in t_delta_grid):
        try:
            model = params_at(fit, t, strict=strict)
            reports.append(audit_model(model, t, omega_range, grid_size, kk_xi, fit.t0))
        except LifshitzAuditError as exc:
            raise type(exc)(f"audit at t_delta={t}: {exc}") from exc
    return reports


def flagged_band(reports: list[ValidationReport]) -> list[float]:
    """Reduced temperatures at which a negative interval was found."""
    return [r.t_delta for r in reports if r.negative]
