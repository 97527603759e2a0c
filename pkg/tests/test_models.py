import json
import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import models, rel
from lifshitz_audit.constants import CONSTANTS
from lifshitz_audit.errors import DomainError, ModelError, ParseError, RangeError, SingularityError
from lifshitz_audit.models import (
    ModelKind,
    OscillatorModel,
    OscillatorTerm,
    RangeWarning,
    TemperatureFit,
    TermFit,
    dump_model,
    eps_complex,
    eps_imag_axis,
    eps_real_axis,
    fit_from_dict,
    fit_to_dict,
    load_model,
    make_model,
    oscillator_sum,
    params_at,
    rho_cm,
    t_delta_of,
    temperature_of,
)

CM = ModelKind.CLAUSIUS_MOSSOTTI
LD = ModelKind.LORENTZ_DIRAC


def test_constants_consistent():
    C = CONSTANTS
    assert rel(C.a0, C.hbar / (C.m_e * C.c * C.alpha_fs)) < 1e-3
    assert rel(0.16 * C.au_omega, 6.6e15) < 0.01
    assert abs(C.a0 - 0.53e-10) < 0.005e-10


def test_t_delta_identity():
    assert t_delta_of(293.0, 293.0) == 0.0


@pytest.mark.parametrize("t_delta, T", [(0.956, 573.1), (2.833, 1123.1)])
def test_temperature_of(t_delta, T):
    assert abs(temperature_of(t_delta) - T) < 0.05


def test_t_delta_round_trip():
    assert math.isclose(t_delta_of(temperature_of(0.614)), 0.614)


@pytest.mark.parametrize("T, T0", [(0.0, 293.0), (-5.0, 293.0), (300.0, 0.0)])
def test_nonpositive_temperature(T, T0):
    with pytest.raises(DomainError):
        t_delta_of(T, T0)


@pytest.mark.parametrize("kw", [
    {"a": 0.1, "omega_r": 0.0},
    {"a": 0.1, "omega_r": 1e15, "gamma": -1.0},
    {"a": 0.1, "omega_r": 1e15, "gamma_prime": -1.0},
    {"a": math.nan, "omega_r": 1e15},
])
def test_term_invariants(kw):
    with pytest.raises(ModelError):
        OscillatorTerm(**kw)


def test_negative_amplitude_accepted():
    OscillatorModel(CM, (OscillatorTerm(-0.3, 1e15, 1e14, 0.0),))


def test_cm_static_ratio_rejected():
    with pytest.raises(ModelError, match="static ratio"):
        OscillatorModel(CM, (OscillatorTerm(0.6, 1e15), OscillatorTerm(0.4, 2e15)))


# -- temperature fits ------------------------------------------------------


def _fit(kind=LD, **override):
    tf = dict(a=(0.5, 0.0, 0.0), omega_r=(1e15, 0.0, 0.0), gamma=(1e14, 0.0, 0.0),
              gamma_prime=(0.0, 0.0, 0.0))
    tf.update(override)
    return TemperatureFit(kind, (TermFit(**tf),))


@pytest.mark.parametrize("t", [0.0, 0.7, 2.833])
def test_constant_fit(t):
    m = params_at(_fit(), t)
    assert m.terms[0] == OscillatorTerm(0.5, 1e15, 1e14, 0.0)


def test_quadratic_arithmetic():
    m = params_at(_fit(a=(1.0, 1.0, 1.0)), 2.0)
    assert m.terms[0].a == 7.0


def test_random_coefficients_match_polyval(rng):
    coeffs = {name: tuple(rng.uniform(0.1, 1.0, 3) * scale)
              for name, scale in [("a", 0.3), ("omega_r", 1e15), ("gamma", 1e14),
                                  ("gamma_prime", 1e13)]}
    m = params_at(TemperatureFit(LD, (TermFit(**coeffs),)), 0.5)
    for name, c in coeffs.items():
        assert rel(getattr(m.terms[0], name), np.polynomial.polynomial.polyval(0.5, c)) < 1e-12


def test_out_of_range_warns_and_extrapolates():
    with pytest.warns(RangeWarning):
        m = params_at(_fit(a=(0.1, 0.1, 0.0)), 3.5)
    assert math.isclose(m.terms[0].a, 0.45)


def test_out_of_range_strict():
    with pytest.raises(RangeError):
        params_at(_fit(), -0.1, strict=True)


def test_invalid_parameter_named():
    with pytest.raises(ModelError, match="term 0.*gamma_prime"):
        params_at(_fit(gamma_prime=(0.0, -1e14, 0.0)), 1.0)


# -- evaluation ------------------------------------------------------------


def _single(kind, a=0.5, w=1e15, g=1e14, gp=0.0):
    return OscillatorModel(kind, (OscillatorTerm(a, w, g, gp),))


def test_rho_static_limit():
    assert rho_cm(_single(CM), 0.0) == 0.5 + 0j


def test_rho_transparency():
    assert abs(rho_cm(_single(CM), 1e22)) < 1e-12


def test_rho_rationalized_quotient():
    a, w, g, gp, om = 0.5, 1e15, 1e14, 3e13, 5e14
    dr = w**2 - om**2
    den = dr**2 + (om * g) ** 2
    re = a * (w**2 * dr + gp * g * om**2) / den
    im = a * om * (w**2 * g - gp * dr) / den
    got = rho_cm(_single(CM, a, w, g, gp), om)
    assert rel(got.real, re) < 1e-12 and rel(got.imag, im) < 1e-12


def test_rho_requires_cm():
    with pytest.raises(ModelError):
        rho_cm(_single(LD), 1e14)


def test_undamped_pole():
    with pytest.raises(SingularityError):
        rho_cm(_single(CM, g=0.0), 1e15)


@pytest.mark.parametrize("kind, expected", [(CM, 4.0), (LD, 2.0)])
def test_static_eps(kind, expected):
    a = 0.5 if kind is CM else 1.0
    assert eps_real_axis(_single(kind, a=a, g=0.0), 0.0) == expected


def test_cm_eps_high_precision(cm_two_term):
    om = 3e14
    mpmath.mp.dps = 40
    rho = mpmath.mpc(0)
    for t in cm_two_term.terms:
        a, w, g, gp = (mpmath.mpf(x) for x in (t.a, t.omega_r, t.gamma, t.gamma_prime))
        rho += a * (w**2 - 1j * gp * om) / (w**2 - om**2 - 1j * om * g)
    ref = (1 + 2 * rho) / (1 - rho)
    got = eps_real_axis(cm_two_term, om)
    assert abs(got - complex(ref)) / abs(complex(ref)) < 1e-10


def test_cm_inversion_singularity():
    m = _single(CM, a=0.999999999999999, g=0.0)
    with pytest.raises(SingularityError):
        eps_real_axis(m, 0.0, tol=1e-12)


def test_imag_axis_ld_value():
    assert eps_imag_axis(_single(LD, a=1.0, g=0.0), 1e15) == 1.5


@pytest.mark.parametrize("kind", [CM, LD])
def test_imag_axis_transparency(kind):
    assert abs(eps_imag_axis(_single(kind, gp=1e13), 1e25) - 1.0) < 1e-9


def test_imag_axis_cm_singularity():
    # rho(i xi) grows above 1 when g' is large
    m = _single(CM, a=0.9, w=1e15, g=1e13, gp=1e17)
    with pytest.raises(SingularityError, match="xi="):
        eps_imag_axis(m, 1e15)


def test_imag_axis_negative_xi():
    with pytest.raises(DomainError):
        eps_imag_axis(_single(LD), -1.0)


def test_vectorized_matches_scalar(cm_two_term):
    om = np.geomspace(1e13, 1e17, 7)
    vec = eps_real_axis(cm_two_term, om)
    assert np.allclose(vec, [eps_real_axis(cm_two_term, float(w)) for w in om], rtol=1e-15)


@given(models(), st.floats(12.0, 17.0))
def test_parity(model, log_w):
    w = 10**log_w
    try:
        plus, minus = eps_real_axis(model, w), eps_real_axis(model, -w)
    except SingularityError:
        return
    assert minus.real == pytest.approx(plus.real, rel=1e-12, abs=1e-300)
    assert minus.imag == pytest.approx(-plus.imag, rel=1e-12, abs=1e-300)


@given(models(kind=CM), st.floats(-3.0, 3.0))
def test_static_cm_limit(model, log_g):
    s = model.static_ratio
    assert eps_real_axis(model, 0.0).real == pytest.approx((1 + 2 * s) / (1 - s), rel=1e-12)


@given(models(), st.floats(11.0, 18.0))
def test_imag_axis_real_and_matches_complex_path(model, log_xi):
    xi = 10**log_xi
    try:
        value = eps_imag_axis(model, xi)
    except SingularityError:
        return
    assert isinstance(value, float)
    ref = eps_complex(model, 1j * xi)
    assert abs(ref.imag) <= 1e-12 * abs(ref)
    assert value == pytest.approx(ref.real, rel=1e-12)


@given(models(positive=True, certified=True))
def test_imag_axis_monotone_for_physical(model):
    xs = np.geomspace(1e10, 1e24, 600)
    vals = eps_imag_axis(model, xs)
    assert np.all(np.diff(vals) <= 1e-12 * vals[:-1])
    assert abs(vals[-1] - 1) < 1e-3


@given(models(kind=CM), st.floats(12.0, 17.0))
def test_cm_ld_structural_identity(model, log_w):
    ld = OscillatorModel(LD, model.terms)
    w = 10**log_w
    try:
        rho, eps_ld = rho_cm(model, w), eps_real_axis(ld, w)
    except SingularityError:
        return
    assert rho == oscillator_sum(model, w)
    assert abs(rho - (eps_ld - 1.0)) <= 4e-16 * abs(eps_ld)


# -- model files -----------------------------------------------------------


def _doc(**override):
    doc = {
        "kind": "clausius_mossotti",
        "t0_kelvin": 293.0,
        "t_delta_range": [0.0, 2.833],
        "frequency_unit": "rad_s",
        "terms_fit": [{"a": [0.3, 0.01, 0.0], "omega_r": [2e15, -1e13, 0.0],
                       "gamma": [1e14, 0.0, 1e12], "gamma_prime": [5e13, 0.0, 0.0]}],
    }
    doc.update(override)
    return doc


def test_au_frequency_unit():
    doc = _doc(frequency_unit="au", terms_fit=[{"a": [0.3, 0, 0], "omega_r": [0.16, 0, 0],
                                                "gamma": [0.01, 0, 0], "gamma_prime": [0, 0, 0]}])
    m = params_at(fit_from_dict(doc), 0.0)
    assert rel(m.terms[0].omega_r, 0.16 * CONSTANTS.au_omega) < 1e-15


def test_json_round_trip(tmp_path):
    fit = fit_from_dict(_doc())
    path = tmp_path / "m.json"
    dump_model(fit, path, {"note": "x"})
    back = load_model(path)
    assert back == fit
    assert json.loads(path.read_text())["fit_metadata"] == {"note": "x"}


@pytest.mark.parametrize("override, msg", [
    ({"kind": "drude"}, "kind"),
    ({"frequency_unit": "Hz"}, "frequency_unit"),
    ({"terms_fit": []}, "terms_fit"),
    ({"terms_fit": [{"a": [0.1, 0.0], "omega_r": [1e15, 0, 0]}]}, r"terms_fit\[0\]\.a"),
    ({"terms_fit": [{"a": [0.1, 0, 0]}]}, "omega_r"),
])
def test_parse_errors(override, msg):
    with pytest.raises(ParseError, match=msg):
        fit_from_dict(_doc(**override))


def test_malformed_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "kind": \n}')
    with pytest.raises(ParseError, match="line 3"):
        load_model(p)


def test_make_model():
    m = make_model("lorentz_dirac", [(1.0, 1e15, 1e14, 0.0)])
    assert m.kind is LD and m.terms[0].gamma == 1e14
