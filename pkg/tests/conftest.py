import math

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from lifshitz_audit.models import ModelKind, OscillatorModel, OscillatorTerm

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


log_freq = st.floats(13.0, 16.5)


@st.composite
def terms(draw, positive=False, certified=False, window=False):
    a = draw(st.floats(0.01, 0.45) if positive or certified or window else st.floats(-0.4, 0.45))
    w = 10 ** draw(log_freq)
    g = w * 10 ** draw(st.floats(-3.0, 0.0))
    if certified:
        gp = g * draw(st.floats(0.0, 1.0))
    elif window:
        gp = g * draw(st.floats(1.01, 20.0))
    else:
        gp = g * draw(st.floats(0.0, 5.0))
    return OscillatorTerm(a, w, g, gp)


@st.composite
def models(draw, kind=None, n=None, **kw):
    kind = kind or draw(st.sampled_from(list(ModelKind)))
    n = n or draw(st.integers(1, 3))
    ts = [draw(terms(**kw)) for _ in range(n)]
    if kind is ModelKind.CLAUSIUS_MOSSOTTI:
        total = sum(t.a for t in ts)
        if total >= 0.9:
            ts = [OscillatorTerm(t.a * 0.9 / total, t.omega_r, t.gamma, t.gamma_prime) for t in ts]
    return OscillatorModel(kind, tuple(ts))


def random_term(rng, window=False, certified=False):
    w = 10 ** rng.uniform(13.5, 16.0)
    g = w * 10 ** rng.uniform(-2.5, -0.3)
    if window:
        gp = g * rng.uniform(1.05, 10.0)
    elif certified:
        gp = g * rng.uniform(0.0, 1.0)
    else:
        gp = g * rng.uniform(0.0, 5.0)
    return OscillatorTerm(rng.uniform(0.02, 0.4), w, g, gp)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cm_two_term():
    return OscillatorModel(ModelKind.CLAUSIUS_MOSSOTTI, (
        OscillatorTerm(0.45, 2.0e15, 1.0e14, 4.0e13),
        OscillatorTerm(0.25, 6.5e15, 5.0e14, 2.0e14),
    ))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)
