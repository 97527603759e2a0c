"""Zero-temperature Lifshitz atom-plate potential and its C3, C4 coefficients.

Lengths are in m, frequencies in rad/s and energies in J. The atomic
polarizability is a polarizability *volume* (alpha_SI / 4 pi eps0, in m^3),
so every formula keeps its Gaussian-unit shape. The potential is

    U(z) = -(hbar / 2 pi) int_0^inf d xi alpha(i xi) int_{xi/c}^inf dq e^{-2qz}
           [(2 q^2 - xi^2/c^2) r_TM - (xi^2/c^2) r_TE]

and is evaluated as nested adaptive quadrature in the reduced variables
``kappa = 2 xi z / c`` and ``u = 2 q z``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from lifshitz_audit.constants import CONSTANTS
from lifshitz_audit.errors import AccuracyError, DomainError, ExtractionError
from lifshitz_audit.models import OscillatorModel, TemperatureFit, as_model, eps_imag_axis

HBAR = CONSTANTS.hbar
C_LIGHT = CONSTANTS.c

POTENTIAL_RTOL = 1e-8
C3_RTOL = 1e-9
DRIFT_TOL = 0.01


# --------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class AtomModel:
    """Single-oscillator polarizability ``alpha(i xi) = alpha0 w_a^2 / (w_a^2 + xi^2)``.

    ``alpha0`` is a polarizability volume in m^3.
    """

    alpha0: float
    omega_a: float

    def __post_init__(self):
        if not (self.alpha0 > 0 and self.omega_a > 0):
            raise DomainError("alpha0 and omega_a must be positive")

    @classmethod
    def from_units(cls, alpha0: float, omega_a: float, volume_unit: str = "m3",
                   frequency_unit: str = "rad_s") -> "AtomModel":
        """Build from ``volume_unit`` in {"m3", "cm3", "au"} (au = a0^3) and
        ``frequency_unit`` in {"rad_s", "au"}."""
        scale = {"m3": 1.0, "cm3": 1e-6, "au": CONSTANTS.a0**3}
        fscale = {"rad_s": 1.0, "au": CONSTANTS.au_omega}
        try:
            return cls(alpha0 * scale[volume_unit], omega_a * fscale[frequency_unit])
        except KeyError as exc:
            raise DomainError(f"unknown unit {exc.args[0]!r}") from None

    @property
    def scale(self) -> float:
        return self.omega_a

    def alpha(self, xi):
        return self.alpha0 * self.omega_a**2 / (self.omega_a**2 + np.square(xi))

    def alpha_integral(self) -> float:
        """int_0^inf alpha(i xi) d xi = alpha0 w_a pi / 2."""
        return self.alpha0 * self.omega_a * math.pi / 2


class TabulatedAtom:
    """Polarizability from a table of ``(xi, alpha)`` pairs.

    Interpolation is monotone (PCHIP) in log-log space. Below the table the
    first value is held; above it alpha falls off as ``xi^-2``.
    """

    def __init__(self, xi, alpha):
        xi = np.asarray(xi, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        if xi.ndim != 1 or xi.shape != alpha.shape or len(xi) < 2:
            raise DomainError("tabulated polarizability needs matching 1-d arrays")
        if np.any(np.diff(xi) <= 0) or xi[0] <= 0 or np.any(alpha <= 0):
            raise DomainError("xi must be positive and increasing, alpha positive")
        self.xi, self.values = xi, alpha
        self._interp = PchipInterpolator(np.log(xi), np.log(alpha), extrapolate=False)

    @property
    def alpha0(self) -> float:
        return float(self.values[0])

    @property
    def scale(self) -> float:
        # frequency where alpha has dropped to half its static value
        half = np.flatnonzero(self.values <= 0.5 * self.values[0])
        return float(self.xi[half[0]] if len(half) else self.xi[-1])

    def alpha(self, xi):
        x = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty_like(x)
        low, high = x <= self.xi[0], x >= self.xi[-1]
        mid = ~(low | high)
        out[low] = self.values[0]
        out[high] = self.values[-1] * (self.xi[-1] / x[high]) ** 2
        out[mid] = np.exp(self._interp(np.log(x[mid])))
        return out.item() if np.ndim(xi) == 0 else out


# --------------------------------------------------------------------------
# plates


def fresnel_imag(eps: float, xi: float, q: float):
    """Fresnel coefficients ``(r_TM, r_TE)`` at imaginary frequency ``i xi``."""
    if not eps > 0:
        raise DomainError(f"eps(i xi) = {eps} must be positive")
    q_eps = math.sqrt(q * q + (eps - 1.0) * xi * xi / C_LIGHT**2)
    return (eps * q - q_eps) / (eps * q + q_eps), (q - q_eps) / (q + q_eps)


def _reduced_reflection(eps, kappa, u):
    """Fresnel coefficients in reduced variables (u = 2qz, kappa = 2 xi z / c)."""
    s = np.sqrt(u * u + (eps - 1.0) * kappa * kappa)
    return (eps * u - s) / (eps * u + s), (u - s) / (u + s)


class Plate:
    """Dielectric half-space seen through ``eps(i xi)``."""

    ideal = False
    model: OscillatorModel | None = None
    label = "plate"

    def eps(self, xi: float) -> float:
        raise NotImplementedError

    def resonances(self) -> list[float]:
        return []


class IdealMetal(Plate):
    ideal = True
    label = "ideal_metal"

    def eps(self, xi):
        return math.inf


class ConstantPermittivity(Plate):
    def __init__(self, value: float):
        if not value > 0:
            raise DomainError("constant permittivity must be positive")
        self.value = float(value)
        self.label = f"constant_eps_{value:g}"

    def eps(self, xi):
        return self.value


class ModelPlate(Plate):
    def __init__(self, model: OscillatorModel):
        self.model = model
        self.label = model.kind.value

    def eps(self, xi):
        return float(eps_imag_axis(self.model, xi))

    def resonances(self):
        return [t.omega_r for t in self.model.terms]


class FunctionPlate(Plate):
    """Plate defined by an arbitrary callable ``eps(xi)``."""

    def __init__(self, func, label="function", resonances=()):
        self._func = func
        self._res = list(resonances)
        self.label = label

    def eps(self, xi):
        return float(self._func(xi))

    def resonances(self):
        return self._res


def as_plate(obj, t_delta: float = 0.0, strict: bool = False) -> Plate:
    if isinstance(obj, Plate):
        return obj
    if isinstance(obj, (OscillatorModel, TemperatureFit)):
        return ModelPlate(as_model(obj, t_delta, strict))
    if isinstance(obj, (int, float)):
        return ConstantPermittivity(obj)
    if obj == "ideal_metal":
        return IdealMetal()
    raise TypeError(f"cannot interpret {obj!r} as a plate")


def lambda0_for(plate: Plate, atom) -> float:
    """Characteristic wavelength ``2 pi c / w`` of the atom-plate system.

    ``w`` is the lowest plate resonance; plates without resonances (ideal
    metal, constant eps) fall back to the atomic frequency scale.
    """
    res = plate.resonances()
    w = min(res) if res else atom.scale
    return 2 * math.pi * C_LIGHT / w


# --------------------------------------------------------------------------
# quadrature helpers


def _quad(f, a, b, rtol, points=None, limit=200):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=limit,
                                  points=points)
    return val, err


def _check(val, err, rtol, what):
    if not err <= max(10 * rtol * abs(val), 1e-300):
        raise AccuracyError(f"{what}: quadrature error {err:.3e} exceeds tolerance",
                            estimate=val, error_bound=err)


def _to_unit_interval(scale: float, breaks):
    """Map frequency breakpoints through xi = scale t / (1 - t)."""
    pts = sorted({b / (b + scale) for b in breaks if b > 0})
    return [p for p in pts if 0 < p < 1] or None


def _inner_integral(eps: float, kappa: float, ideal: bool, rtol: float):
    """J = int_0^inf e^-v [(2u^2 - kappa^2) r_TM - kappa^2 r_TE] dv, u = kappa + v."""
    if ideal:
        return 2.0 * (kappa * kappa + 2.0 * kappa + 2.0), 0.0
    if eps == 1.0:
        return 0.0, 0.0
    k2 = kappa * kappa

    def f(v):
        u = kappa + v
        r_tm, r_te = _reduced_reflection(eps, kappa, u)
        return math.exp(-v) * ((2.0 * u * u - k2) * r_tm - k2 * r_te)

    # the reflection coefficients vary on the scale kappa * sqrt(eps)
    knee = kappa * math.sqrt(abs(eps - 1.0))
    val, err = 0.0, 0.0
    edges = [0.0] + [x for x in (knee, 10 * knee) if 1e-12 < x < 40.0] + [math.inf]
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = _quad(f, a, b, rtol)
        val += v
        err += e
    return val, err


# --------------------------------------------------------------------------
# potential


def potential_t0(atom, plate, z: float, t_delta: float = 0.0, rtol: float = POTENTIAL_RTOL,
                 full_output: bool = False):
    """Zero-temperature Casimir-Polder energy U(z) in J (negative: attraction).

    ``plate`` may be an :class:`OscillatorModel`, a :class:`TemperatureFit`
    (evaluated at ``t_delta``), a number (constant eps) or a :class:`Plate`.
    With ``full_output`` the pair ``(U, error_bound)`` is returned.
    """
    if not z > 0:
        raise DomainError("separation must be positive")
    plate = as_plate(plate, t_delta)
    xi_of_kappa = C_LIGHT / (2.0 * z)
    scale = min(atom.scale, xi_of_kappa)
    inner_tol = rtol * 1e-2

    def integrand(t):
        if t >= 1.0:
            return 0.0
        xi = scale * t / (1.0 - t)
        kappa = xi / xi_of_kappa
        if kappa > 745.0:
            return 0.0
        eps = plate.eps(xi)
        j, _ = _inner_integral(eps, kappa, plate.ideal, inner_tol)
        return atom.alpha(xi) * math.exp(-kappa) * j * scale / (1.0 - t) ** 2

    breaks = [atom.scale, xi_of_kappa, *plate.resonances()]
    val, err = _quad(integrand, 0.0, 1.0, rtol, points=_to_unit_interval(scale, breaks))
    _check(val, err, rtol, f"potential at z={z}")
    pref = -HBAR / (2 * math.pi) / (8 * z**3)
    u, u_err = pref * val, abs(pref) * err
    return (u, u_err) if full_output else u


@dataclass
class CPCoefficients:
    c3: float
    c4: float
    t_delta: float
    c3_error: float
    c4_error: float
    units: dict = field(default_factory=lambda: {"c3": "J m^3", "c4": "J m^4"})
    flags: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "c3": self.c3,
            "c4": self.c4,
            "units": dict(self.units),
            "t_delta": self.t_delta,
            "flags": list(self.flags),
            "error_bounds": {"c3": self.c3_error, "c4": self.c4_error},
            "atomic_units": {
                "c3": convert_coefficient(self.c3, 3, "au"),
                "c4": convert_coefficient(self.c4, 4, "au"),
            },
            "diagnostics": self.diagnostics,
        }


def c3_coefficient(atom, plate, t_delta: float = 0.0, rtol: float = C3_RTOL):
    """Short-range coefficient ``C3 = (hbar/4 pi) int alpha (eps-1)/(eps+1) d xi``.

    Returns ``(c3, error_bound)`` in J m^3.
    """
    plate = as_plate(plate, t_delta)
    scale = atom.scale

    def integrand(t):
        if t >= 1.0:
            return 0.0
        xi = scale * t / (1.0 - t)
        if plate.ideal:
            ratio = 1.0
        else:
            eps = plate.eps(xi)
            ratio = (eps - 1.0) / (eps + 1.0)
        return atom.alpha(xi) * ratio * scale / (1.0 - t) ** 2

    val, err = _quad(integrand, 0.0, 1.0, rtol,
                     points=_to_unit_interval(scale, plate.resonances()))
    _check(val, err, rtol, "C3 quadrature")
    pref = HBAR / (4 * math.pi)
    return pref * val, pref * err


def c4_retarded_closed_form(atom, eps0: float, rtol: float = 1e-12) -> float:
    """Retarded limit for a plate with static permittivity ``eps0``:

        C4 = (3 hbar c alpha0 / 16 pi) int_1^inf [(2p^2 - 1) r_TM(p) - r_TE(p)] p^-4 dp
    """
    if math.isinf(eps0):
        return 3 * HBAR * C_LIGHT * atom.alpha0 / (8 * math.pi)

    def f(p):
        s = math.sqrt(p * p + eps0 - 1.0)
        r_tm = (eps0 * p - s) / (eps0 * p + s)
        r_te = (p - s) / (p + s)
        return ((2 * p * p - 1) * r_tm - r_te) / p**4

    val, _ = _quad(f, 1.0, math.inf, rtol)
    return 3 * HBAR * C_LIGHT * atom.alpha0 / (16 * math.pi) * val


@dataclass
class C4Extraction:
    c4: float
    error_bound: float
    z: np.ndarray
    values: np.ndarray
    drift: float


def _richardson_zero(h, f):
    """Polynomial (Neville) extrapolation of f(h) to h = 0."""
    p = list(f)
    h = list(h)
    n = len(p)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i])
    return p[0]


def c4_extract(atom, plate, t_delta: float = 0.0, n_points: int = 7,
               rtol: float = POTENTIAL_RTOL, drift_tol: float = DRIFT_TOL,
               lambda0: float | None = None) -> C4Extraction:
    """Long-range coefficient from the plateau of ``-z^4 U(z)``.

    The ladder runs geometrically from 10 to 1000 characteristic wavelengths
    and the plateau is obtained by Richardson extrapolation in ``1/z`` over
    its three outermost points. The error bound is the spread between the
    linear and quadratic extrapolants plus the quadrature error.
    """
    plate = as_plate(plate, t_delta)
    lam = lambda0 if lambda0 is not None else lambda0_for(plate, atom)
    zs = lam * np.logspace(1.0, 3.0, n_points)
    vals, errs = [], []
    for z in zs:
        u, e = potential_t0(atom, plate, float(z), rtol=rtol, full_output=True)
        vals.append(-u * z**4)
        errs.append(e * z**4)
    vals = np.array(vals)
    if vals[-1] == 0.0:
        return C4Extraction(0.0, float(max(errs)), zs, vals, 0.0)
    drift = float(abs(vals[-1] - vals[-2]) / abs(vals[-1]))
    h = lam / zs[-3:]
    quad_fit = _richardson_zero(h, vals[-3:])
    lin_fit = _richardson_zero(h[1:], vals[-2:])
    bound = float(abs(quad_fit - lin_fit) + errs[-1])
    if drift > drift_tol:
        raise ExtractionError(
            f"no plateau: relative drift {drift:.3e} of -z^4 U(z) between the two "
            f"largest ladder points exceeds {drift_tol}; ladder values {vals.tolist()}",
            estimate=float(quad_fit), error_bound=bound)
    return C4Extraction(float(quad_fit), bound, zs, vals, drift)


def plate_flags(plate: Plate, omega_range=(1e10, 1e17)) -> list[str]:
    """``["unphysical_input"]`` when the plate model has negative Im eps."""
    if plate.model is None:
        return []
    from lifshitz_audit.validation import negative_intervals, positivity_certificate

    if positivity_certificate(plate.model):
        return []
    if negative_intervals(plate.model, omega_range, 64):
        return ["unphysical_input"]
    return []


def coefficients(atom, plate, t_delta: float = 0.0, rtol: float = POTENTIAL_RTOL,
                 n_points: int = 7) -> CPCoefficients:
    """C3 and C4 for one plate at one reduced temperature."""
    plate = as_plate(plate, t_delta)
    c3, c3_err = c3_coefficient(atom, plate)
    ext = c4_extract(atom, plate, rtol=rtol, n_points=n_points)
    return CPCoefficients(
        c3=c3, c4=ext.c4, t_delta=t_delta, c3_error=c3_err, c4_error=ext.error_bound,
        flags=plate_flags(plate),
        diagnostics={"c4_drift": ext.drift, "c4_ladder_z": ext.z.tolist(),
                     "c4_ladder_values": ext.values.tolist(), "plate": plate.label},
    )


def sweep(atom, plate, z_values, t_delta: float = 0.0, rtol: float = POTENTIAL_RTOL):
    """Rows ``(z, U, z^3 U, z^4 U)`` for plotting."""
    plate = as_plate(plate, t_delta)
    rows = []
    for z in z_values:
        u = potential_t0(atom, plate, float(z), rtol=rtol)
        rows.append((float(z), u, u * z**3, u * z**4))
    return rows


def sensitivity(atom, model, t_delta: float = 0.0, rtol: float = 1e-6) -> dict:
    """C3 computed from Im eps clamped at zero versus the raw model.

    Both eps(i xi) curves come from the same Kramers-Kronig route so the
    difference isolates the contribution of the negative-Im regions; the
    analytic-continuation value is reported alongside.
    """
    from lifshitz_audit.validation import kk_reconstruct

    m = as_model(model, t_delta)
    res = [t.omega_r for t in m.terms]
    raw = FunctionPlate(lambda x: kk_reconstruct(m, x).value if x > 0 else eps_imag_axis(m, 0.0),
                        "kk_raw", res)
    clamped = FunctionPlate(
        lambda x: (kk_reconstruct(m, x, clamp_negative=True).value if x > 0
                   else kk_reconstruct(m, 1e-6 * min(res), clamp_negative=True).value),
        "kk_clamped", res)
    c3_analytic, _ = c3_coefficient(atom, ModelPlate(m), rtol=rtol)
    c3_raw, e_raw = c3_coefficient(atom, raw, rtol=rtol)
    c3_clamped, e_cl = c3_coefficient(atom, clamped, rtol=rtol)
    return {
        "t_delta": t_delta,
        "c3_analytic": c3_analytic,
        "c3_kk_raw": c3_raw,
        "c3_kk_clamped": c3_clamped,
        "difference": c3_clamped - c3_raw,
        "relative_difference": (c3_clamped - c3_raw) / c3_raw if c3_raw else math.nan,
        "error_bounds": {"c3_kk_raw": e_raw, "c3_kk_clamped": e_cl},
        "units": "J m^3",
    }


def convert_coefficient(value: float, power: int, unit: str) -> float:
    """Convert a C_n coefficient from J m^n to ``"au"`` (E_h a0^n) or
    ``"gaussian"`` (erg cm^n)."""
    if unit == "si":
        return value
    if unit == "au":
        return value / (CONSTANTS.e_hartree * CONSTANTS.a0**power)
    if unit == "gaussian":
        return value * 1e7 * 100.0**power
    raise DomainError(f"unknown unit system {unit!r}")
