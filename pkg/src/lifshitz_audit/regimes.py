"""Validity regimes of the Lifshitz atom-plate potential.

Two condition sets are compared:

* material-based: ``l << z`` (continuum), ``z << lambda0`` (short range,
  1/z^3) and ``lambda0 << z << lambda_T`` (long range, 1/z^4);
* atomic-only: ``a0 << z << a0/alpha`` (short range) and ``a0/alpha << z``
  (long range), which ignore the plate material.

Each ``<<`` is a multiplicative margin from :class:`MarginSet`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from lifshitz_audit.constants import CONSTANTS
from lifshitz_audit.errors import DomainError


class Verdict(str, Enum):
    VALID = "valid"
    MARGINAL = "marginal"
    INVALID = "invalid"


@dataclass(frozen=True)
class MaterialProfile:
    name: str
    lattice_constant: float
    absorption_wavelength: float

    def __post_init__(self):
        if not self.lattice_constant > 0:
            raise DomainError("lattice constant must be positive")
        if not self.absorption_wavelength > self.lattice_constant:
            raise DomainError("absorption wavelength must exceed the lattice constant")


#: Si with a representative absorption wavelength of 300 nm.
SILICON = MaterialProfile("Si", 5.45e-10, 300e-9)


@dataclass(frozen=True)
class MarginSet:
    continuum: float = 10.0
    short: float = 50.0
    long_lo: float = 10.0
    long_hi: float = 10.0
    alt: float = 10.0
    # factor around a boundary inside which a verdict is "marginal"
    marginal_factor: float = 2.0

    @classmethod
    def parse(cls, text: str) -> "MarginSet":
        """Parse ``"continuum=10,short=50"`` style overrides."""
        kwargs = {}
        for item in filter(None, (s.strip() for s in text.split(","))):
            key, _, value = item.partition("=")
            if key not in cls.__dataclass_fields__:
                raise DomainError(f"unknown margin {key!r}")
            kwargs[key] = float(value)
        return cls(**kwargs)


@dataclass
class RegimeVerdict:
    z: float
    continuum_ok: bool
    short_range_ok: bool
    long_range_ok: bool
    alt_short_ok: bool
    alt_long_ok: bool
    thermal_wavelength: float
    verdicts: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


def thermal_wavelength(T: float) -> float:
    """``hbar c / (k_B T)`` in m; infinite at T = 0."""
    if T < 0:
        raise DomainError(f"temperature must be >= 0, got {T}")
    if T == 0:
        return math.inf
    return CONSTANTS.hbar * CONSTANTS.c / CONSTANTS.k_B / T


def short_range_upper_bound(material: MaterialProfile, margins: MarginSet = MarginSet()) -> float:
    return material.absorption_wavelength / margins.short


def _grade(z, lo, hi, factor) -> Verdict:
    """Tri-state verdict for ``lo < z < hi`` (either bound may be open)."""
    inside = lo < z < hi
    near = any(b and math.isfinite(b) and b / factor < z < b * factor for b in (lo, hi))
    if near:
        return Verdict.MARGINAL
    return Verdict.VALID if inside else Verdict.INVALID


def classify_alternative(z: float, margins: MarginSet = MarginSet()):
    """``(alt_short_ok, alt_long_ok)`` under the atomic-only conditions."""
    if not z > 0:
        raise DomainError("separation must be positive")
    a0, scale = CONSTANTS.a0, CONSTANTS.a0_over_alpha
    m = margins.alt
    return m * a0 < z < scale / m, z > m * scale


def classify(z: float, material: MaterialProfile, T: float = 0.0,
             margins: MarginSet = MarginSet()) -> RegimeVerdict:
    if not z > 0:
        raise DomainError("separation must be positive")
    lam_t = thermal_wavelength(T)
    l, lam0 = material.lattice_constant, material.absorption_wavelength
    cont_lo = margins.continuum * l
    short_hi = lam0 / margins.short
    long_lo, long_hi = margins.long_lo * lam0, lam_t / margins.long_hi
    continuum = z > cont_lo
    short = continuum and z < short_hi
    long_ = long_lo < z < long_hi
    alt_short, alt_long = classify_alternative(z, margins)
    f = margins.marginal_factor
    a0, scale = CONSTANTS.a0, CONSTANTS.a0_over_alpha
    verdicts = {
        "continuum": _grade(z, cont_lo, math.inf, f),
        "short": _grade(z, cont_lo, short_hi, f) if continuum else Verdict.INVALID,
        "long": _grade(z, long_lo, long_hi, f),
        "alt_short": _grade(z, margins.alt * a0, scale / margins.alt, f),
        "alt_long": _grade(z, margins.alt * scale, math.inf, f),
    }
    verdict = RegimeVerdict(z, continuum, short, long_, alt_short, alt_long, lam_t, verdicts)
    verdict.notes = _discrepancies(verdict, material, margins)
    return verdict


def _discrepancies(v: RegimeVerdict, material: MaterialProfile, margins: MarginSet) -> list[str]:
    notes = []
    lam0 = material.absorption_wavelength
    if v.alt_short_ok and not v.short_range_ok:
        if not v.continuum_ok:
            why = (f"continuum violated: z <= {margins.continuum:g} x lattice constant "
                   f"{material.lattice_constant:.3e} m")
        else:
            why = f"z >= lambda0/{margins.short:g} = {lam0 / margins.short:.3e} m"
        notes.append(f"atomic-only conditions grant short range, material conditions deny it ({why})")
    if v.short_range_ok and not v.alt_short_ok:
        notes.append("material conditions grant short range, atomic-only conditions deny it "
                     f"(z outside ({margins.alt:g} a0, a0/alpha/{margins.alt:g}))")
    if v.alt_long_ok and not v.long_range_ok:
        if v.z <= margins.long_lo * lam0:
            why = f"z <= {margins.long_lo:g} x lambda0 = {margins.long_lo * lam0:.3e} m"
        else:
            why = (f"z >= lambda_T/{margins.long_hi:g} = "
                   f"{v.thermal_wavelength / margins.long_hi:.3e} m")
        notes.append(f"atomic-only conditions grant long range, material conditions deny it ({why})")
    if v.long_range_ok and not v.alt_long_ok:
        notes.append("material conditions grant long range, atomic-only conditions deny it")
    return notes


def compare(z, material: MaterialProfile, T: float = 0.0,
            margins: MarginSet = MarginSet()) -> list[dict]:
    """Discrepancies between the two condition sets at each separation.

    ``z`` may be a single separation or an iterable of them; only
    separations with at least one disagreement are listed.
    """
    zs = [z] if isinstance(z, (int, float)) else list(z)
    out = []
    for zi in zs:
        v = classify(float(zi), material, T, margins)
        if v.notes:
            out.append({"z": v.z, "reasons": list(v.notes)})
    return out


def lambda0_helper(model) -> float:
    """Estimate ``2 pi c / min omega_r`` of a permittivity model (estimate only)."""
    from lifshitz_audit.models import lambda0_estimate

    return lambda0_estimate(model)
