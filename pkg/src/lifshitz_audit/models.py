"""Clausius-Mossotti and Lorentz-Dirac oscillator permittivity models.

Both families share the same oscillator sum

    S(omega) = sum_k a_k (w_k^2 - i g'_k omega) / (w_k^2 - omega^2 - i omega g_k)

where ``w_k`` is the resonance frequency, ``g_k`` the level width and ``g'_k``
the radiation damping constant. The Lorentz-Dirac permittivity is
``eps = 1 + S`` while the Clausius-Mossotti model sets
``rho = (eps - 1) / (eps + 2) = S`` and inverts for ``eps``.

All frequencies are angular frequencies in rad/s. Parameters may depend on
temperature through the reduced temperature ``t_delta = (T - T0) / T0``,
each one as a quadratic polynomial in ``t_delta``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from lifshitz_audit.constants import CONSTANTS
from lifshitz_audit.errors import (
    DomainError,
    ModelError,
    ParseError,
    RangeError,
    SingularityError,
)

T0_KELVIN = 293.0
T_DELTA_RANGE = (0.0, 2.833)
#: Default threshold on |1 - rho| below which the CM inversion is singular.
INVERSION_TOL = 1e-12
PARAMETERS = ("a", "omega_r", "gamma", "gamma_prime")


class RangeWarning(UserWarning):
    """Emitted when a temperature fit is extrapolated outside its range."""


class ModelKind(str, Enum):
    CLAUSIUS_MOSSOTTI = "clausius_mossotti"
    LORENTZ_DIRAC = "lorentz_dirac"


def au_to_rad_s(value):
    """Convert an angular frequency in atomic units to rad/s."""
    return value * CONSTANTS.au_omega


def rad_s_to_au(value):
    return value / CONSTANTS.au_omega


def t_delta_of(T: float, T0: float = T0_KELVIN) -> float:
    """Reduced temperature ``(T - T0) / T0``."""
    if not (T > 0 and T0 > 0):
        raise DomainError(f"temperatures must be positive, got T={T}, T0={T0}")
    return (T - T0) / T0


def temperature_of(t_delta: float, T0: float = T0_KELVIN) -> float:
    """Absolute temperature in K for a reduced temperature."""
    if not T0 > 0:
        raise DomainError(f"reference temperature must be positive, got {T0}")
    T = T0 * (1.0 + t_delta)
    if not T > 0:
        raise DomainError(f"t_delta={t_delta} maps to a non-positive temperature")
    return T


@dataclass(frozen=True)
class OscillatorTerm:
    """One damped oscillator: amplitude, resonance, width and radiation damping."""

    a: float
    omega_r: float
    gamma: float = 0.0
    gamma_prime: float = 0.0

    def __post_init__(self):
        for name in PARAMETERS:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ModelError(f"{name} = {value} is not finite")
        if not self.omega_r > 0:
            raise ModelError(f"omega_r = {self.omega_r} must be > 0")
        if self.gamma < 0:
            raise ModelError(f"gamma = {self.gamma} must be >= 0")
        if self.gamma_prime < 0:
            raise ModelError(f"gamma_prime = {self.gamma_prime} must be >= 0")


@dataclass(frozen=True)
class OscillatorModel:
    """Permittivity model at one fixed temperature."""

    kind: ModelKind
    terms: tuple[OscillatorTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ModelError("a model needs at least one oscillator term")
        if self.kind is ModelKind.CLAUSIUS_MOSSOTTI and not self.static_ratio < 1.0:
            raise ModelError(
                f"static ratio rho(0) = sum(a) = {self.static_ratio} must be < 1"
            )

    @property
    def static_ratio(self) -> float:
        return math.fsum(t.a for t in self.terms)

    @property
    def lowest_resonance(self) -> float:
        return min(t.omega_r for t in self.terms)

    def arrays(self):
        """Parameter columns ``(a, omega_r, gamma, gamma_prime)`` as arrays."""
        return tuple(
            np.array([getattr(t, name) for t in self.terms], dtype=float)
            for name in PARAMETERS
        )

    def replace_terms(self, terms: Iterable[OscillatorTerm]) -> "OscillatorModel":
        return OscillatorModel(self.kind, tuple(terms))


@dataclass(frozen=True)
class TermFit:
    """Quadratic coefficients ``(c0, c1, c2)`` for each parameter of one term."""

    a: tuple[float, float, float]
    omega_r: tuple[float, float, float]
    gamma: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gamma_prime: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in PARAMETERS:
            coeffs = tuple(float(x) for x in getattr(self, name))
            if len(coeffs) != 3:
                raise ModelError(f"{name} needs 3 coefficients, got {len(coeffs)}")
            object.__setattr__(self, name, coeffs)

    @classmethod
    def constant(cls, term: OscillatorTerm) -> "TermFit":
        return cls(**{name: (getattr(term, name), 0.0, 0.0) for name in PARAMETERS})

    def values_at(self, t_delta: float) -> dict[str, float]:
        out = {}
        for name in PARAMETERS:
            c0, c1, c2 = getattr(self, name)
            # parameter = c0 + c1 t + c2 t^2
            out[name] = c0 + t_delta * (c1 + t_delta * c2)
        return out


@dataclass(frozen=True)
class TemperatureFit:
    """Temperature-dependent model: every parameter quadratic in ``t_delta``."""

    kind: ModelKind
    terms_fit: tuple[TermFit, ...]
    t_delta_range: tuple[float, float] = T_DELTA_RANGE
    t0: float = T0_KELVIN

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "terms_fit", tuple(self.terms_fit))
        lo, hi = (float(x) for x in self.t_delta_range)
        if not lo <= hi:
            raise ModelError(f"empty t_delta_range [{lo}, {hi}]")
        object.__setattr__(self, "t_delta_range", (lo, hi))
        if not self.terms_fit:
            raise ModelError("a model needs at least one oscillator term")

    @classmethod
    def constant(cls, model: OscillatorModel, t_delta_range=T_DELTA_RANGE,
                 t0: float = T0_KELVIN) -> "TemperatureFit":
        """Wrap a fixed-temperature model (all c1 = c2 = 0)."""
        return cls(model.kind, tuple(TermFit.constant(t) for t in model.terms),
                   t_delta_range, t0)

    def at(self, t_delta: float, strict: bool = False) -> OscillatorModel:
        return params_at(self, t_delta, strict=strict)


def params_at(fit: TemperatureFit, t_delta: float, strict: bool = False) -> OscillatorModel:
    """Evaluate a temperature fit at ``t_delta``.

    Outside ``fit.t_delta_range`` the polynomials are extrapolated with a
    :class:`RangeWarning`, or a :class:`RangeError` is raised when ``strict``.
    """
    lo, hi = fit.t_delta_range
    if not lo <= t_delta <= hi:
        msg = f"t_delta={t_delta} outside fit range [{lo}, {hi}]"
        if strict:
            raise RangeError(msg)
        warnings.warn(msg + "; extrapolating", RangeWarning, stacklevel=2)
    terms = []
    for k, tf in enumerate(fit.terms_fit):
        try:
            terms.append(OscillatorTerm(**tf.values_at(t_delta)))
        except ModelError as exc:
            raise ModelError(f"term {k} at t_delta={t_delta}: {exc}") from None
    try:
        return OscillatorModel(fit.kind, tuple(terms))
    except ModelError as exc:
        raise ModelError(f"at t_delta={t_delta}: {exc}") from None


# --------------------------------------------------------------------------
# evaluation


def _unwrap(values, scalar: bool):
    return values.item() if scalar else values


def oscillator_sum(model: OscillatorModel, omega):
    """Complex oscillator sum ``S(omega)`` shared by both model families.

    ``omega`` may be real or complex, scalar or array. Exact poles
    (``w_k^2 - omega^2 - i omega g_k == 0``) raise :class:`SingularityError`.
    """
    scalar = np.ndim(omega) == 0
    w = np.asarray(omega, dtype=complex)[..., None]
    a, wr, g, gp = model.arrays()
    # divide numerator and denominator by w_k^2 to keep both O(1)
    x = w / wr
    den = (1.0 - x) * (1.0 + x) - 1j * x * (g / wr)
    if np.any(den == 0):
        bad = np.asarray(omega).ravel()[np.any(den == 0, axis=-1).ravel()][0]
        raise SingularityError(f"omega={bad} sits on an undamped resonance")
    total = np.sum(a * (1.0 - 1j * x * (gp / wr)) / den, axis=-1)
    return _unwrap(total, scalar)


def rho_cm(model: OscillatorModel, omega):
    """Clausius-Mossotti ratio ``rho = (eps - 1) / (eps + 2)`` at real ``omega``."""
    if model.kind is not ModelKind.CLAUSIUS_MOSSOTTI:
        raise ModelError("rho_cm requires a Clausius-Mossotti model")
    return oscillator_sum(model, omega)


def _invert_cm(rho, tol: float, where):
    gap = np.abs(1.0 - np.asarray(rho))
    if np.any(gap < tol):
        locs = np.asarray(where).ravel()[np.ravel(gap < tol)]
        raise SingularityError(
            f"Clausius-Mossotti inversion singular (|1 - rho| < {tol}) at {locs[0]}"
        )
    return (1.0 + 2.0 * rho) / (1.0 - rho)


def eps_complex(model: OscillatorModel, omega, tol: float = INVERSION_TOL):
    """Permittivity at an arbitrary (real or complex) frequency."""
    s = oscillator_sum(model, omega)
    if model.kind is ModelKind.LORENTZ_DIRAC:
        return 1.0 + s
    return _invert_cm(s, tol, omega)


def eps_real_axis(model: OscillatorModel, omega, tol: float = INVERSION_TOL):
    """Complex permittivity ``eps(omega)`` on the real frequency axis."""
    omega = np.asarray(omega, dtype=float) if np.ndim(omega) else float(omega)
    return eps_complex(model, omega, tol)


def imag_axis_sum(model: OscillatorModel, xi):
    """Real oscillator sum at ``omega = i xi``:
    ``sum_k a_k (w_k^2 + g'_k xi) / (w_k^2 + xi^2 + g_k xi)``."""
    scalar = np.ndim(xi) == 0
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0):
        raise DomainError("imaginary-axis frequency must be >= 0")
    x = x[..., None]
    a, wr, g, gp = model.arrays()
    y = x / wr
    total = np.sum(a * (1.0 + y * (gp / wr)) / (1.0 + y * (y + g / wr)), axis=-1)
    return _unwrap(total, scalar)


def eps_imag_axis(model: OscillatorModel, xi, tol: float = INVERSION_TOL):
    """Real permittivity ``eps(i xi)`` on the imaginary frequency axis."""
    s = imag_axis_sum(model, xi)
    if model.kind is ModelKind.LORENTZ_DIRAC:
        return 1.0 + s
    s_arr = np.asarray(s)
    if np.any(s_arr >= 1.0 - tol):
        bad = np.asarray(xi).ravel()[np.ravel(s_arr >= 1.0 - tol)][0]
        raise SingularityError(f"rho(i xi) >= 1 - {tol} at xi={bad}")
    return (1.0 + 2.0 * s) / (1.0 - s)


def lambda0_estimate(model: OscillatorModel) -> float:
    """Rough absorption wavelength ``2 pi c / min_k omega_r`` (an estimate only)."""
    return 2.0 * math.pi * CONSTANTS.c / model.lowest_resonance


# --------------------------------------------------------------------------
# model definition files


_FREQUENCY_PARAMS = ("omega_r", "gamma", "gamma_prime")


def fit_from_dict(doc: dict) -> TemperatureFit:
    """Build a :class:`TemperatureFit` from a parsed model document."""
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    try:
        kind = ModelKind(doc["kind"])
    except KeyError:
        raise ParseError("missing field 'kind'") from None
    except ValueError:
        raise ParseError(f"field 'kind': unknown model kind {doc['kind']!r}") from None
    unit = doc.get("frequency_unit", "rad_s")
    if unit not in ("rad_s", "au"):
        raise ParseError(f"field 'frequency_unit': expected 'rad_s' or 'au', got {unit!r}")
    scale = CONSTANTS.au_omega if unit == "au" else 1.0
    raw_terms = doc.get("terms_fit")
    if not isinstance(raw_terms, list) or not raw_terms:
        raise ParseError("field 'terms_fit' must be a non-empty array")
    terms = []
    for k, raw in enumerate(raw_terms):
        coeffs = {}
        for name in PARAMETERS:
            where = f"terms_fit[{k}].{name}"
            if name not in raw:
                if name in ("gamma", "gamma_prime"):
                    coeffs[name] = (0.0, 0.0, 0.0)
                    continue
                raise ParseError(f"missing field '{where}'")
            value = raw[name]
            if isinstance(value, (int, float)):
                value = [value, 0.0, 0.0]
            if not (isinstance(value, list) and len(value) == 3
                    and all(isinstance(v, (int, float)) for v in value)):
                raise ParseError(f"field '{where}' must be a number or [c0, c1, c2]")
            factor = scale if name in _FREQUENCY_PARAMS else 1.0
            coeffs[name] = tuple(float(v) * factor for v in value)
        terms.append(TermFit(**coeffs))
    rng = doc.get("t_delta_range", list(T_DELTA_RANGE))
    if not (isinstance(rng, list) and len(rng) == 2):
        raise ParseError("field 't_delta_range' must be [lo, hi]")
    try:
        return TemperatureFit(kind, tuple(terms), (float(rng[0]), float(rng[1])),
                              float(doc.get("t0_kelvin", T0_KELVIN)))
    except ModelError as exc:
        raise ParseError(str(exc)) from None


def fit_to_dict(fit: TemperatureFit, metadata: dict | None = None) -> dict:
    """Serialize a fit; frequencies are always written in rad/s."""
    doc = {
        "kind": fit.kind.value,
        "t0_kelvin": fit.t0,
        "t_delta_range": list(fit.t_delta_range),
        "frequency_unit": "rad_s",
        "terms_fit": [
            {name: list(getattr(tf, name)) for name in PARAMETERS}
            for tf in fit.terms_fit
        ],
    }
    if metadata:
        doc["fit_metadata"] = metadata
    return doc


def load_model(path) -> TemperatureFit:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return fit_from_dict(doc)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


def dump_model(fit: TemperatureFit, path, metadata: dict | None = None) -> None:
    Path(path).write_text(json.dumps(fit_to_dict(fit, metadata), indent=2) + "\n")


def as_fit(obj) -> TemperatureFit:
    """Accept either a fixed model or a temperature fit."""
    if isinstance(obj, TemperatureFit):
        return obj
    if isinstance(obj, OscillatorModel):
        return TemperatureFit.constant(obj)
    raise TypeError(f"expected OscillatorModel or TemperatureFit, got {type(obj).__name__}")


def as_model(obj, t_delta: float = 0.0, strict: bool = False) -> OscillatorModel:
    if isinstance(obj, OscillatorModel):
        return obj
    return params_at(as_fit(obj), t_delta, strict=strict)


def make_model(kind, terms: Sequence[Sequence[float]]) -> OscillatorModel:
    """Shorthand: ``make_model("lorentz_dirac", [(a, w, g, gp), ...])``."""
    return OscillatorModel(ModelKind(kind), tuple(OscillatorTerm(*t) for t in terms))
