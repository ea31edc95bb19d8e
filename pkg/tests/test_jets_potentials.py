import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudomodes.jets import Jet
from pseudomodes.potentials import CATALOG, PotentialError, make_builtin, plateau, smooth_step, split_singular

finite = st.floats(min_value=-3, max_value=3, allow_nan=False)


@given(finite)
@settings(max_examples=50, deadline=None)
def test_jet_composition_matches_closed_form(x):
    z = Jet.variable([x], 3)
    d = (z.sin() * z.exp()).derivatives()[:, 0]
    s, c, e = np.sin(x), np.cos(x), np.exp(x)
    want = [s * e, (s + c) * e, 2 * c * e, 2 * (c - s) * e]
    assert np.allclose(d, want, rtol=1e-12, atol=1e-12)


@given(st.floats(min_value=0.2, max_value=3))
@settings(max_examples=50, deadline=None)
def test_jet_power_and_arctan(x):
    z = Jet.variable([x], 2)
    d = z.power(1.5).derivatives()[:, 0]
    assert np.allclose(d, [x**1.5, 1.5 * x**0.5, 0.75 * x**-0.5], rtol=1e-12)
    a = z.arctan().derivatives()[:, 0]
    assert np.allclose(a, [np.arctan(x), 1 / (1 + x**2), -2 * x / (1 + x**2) ** 2], rtol=1e-12)


CASES = [
    ("monomial_imag", {"gamma": 3}),
    ("monomial_imag", {"gamma": 1}),
    ("poly_like", {"gamma": 2}),
    ("cosh_sinh", {}),
    ("arctan_imag", {}),
    ("arctan_plus_sin", {}),
    ("decaying", {"gamma": 0.5}),
    ("inv_singularity", {"alpha": 3.0}),
    ("constant", {"V0": 2 + 1j}),
    ("custom_polynomial", {"coeffs": [1, [0, 1], 0.5]}),
]


def _points(p):
    if p.domain == "half-line-negative":
        return np.array([-2.3, -1.1, -0.6])
    if p.domain == "half-line-positive":
        return np.array([0.6, 1.1, 2.3])
    return np.array([-1.7, -0.4, 0.35, 1.3])


@pytest.mark.parametrize("name,params", CASES)
def test_derivatives_agree_with_finite_differences(name, params):
    p = make_builtin(name, params)
    x = _points(p)
    h = 1e-4
    D = p.derivatives(x, 4)
    for m in range(3):
        fd = (p.derivatives(x + h, m)[m] - p.derivatives(x - h, m)[m]) / (2 * h)
        scale = np.max(np.abs(D[m + 1])) + np.max(np.abs(D[m]))
        assert np.max(np.abs(fd - D[m + 1])) <= 1e-6 * max(scale, 1.0)


def test_catalog_complete():
    assert set(n for n, _ in CASES) == set(CATALOG)


def test_errors():
    with pytest.raises(PotentialError):
        make_builtin("nope")
    with pytest.raises(PotentialError):
        make_builtin("monomial_imag", {"bogus": 1})
    p = make_builtin("monomial_imag", {"gamma": 2})
    with pytest.raises(PotentialError):
        p.derivatives([0.0], p.max_order + 1)
    with pytest.raises(PotentialError):
        make_builtin("inv_singularity").eval(0, 1.0)


def test_overrides_apply():
    p = make_builtin("poly_like", {"gamma": 2, "eps1": 1.6})
    assert p.eps1 == 1.6


@given(st.floats(min_value=-0.5, max_value=1.5))
def test_smooth_step_range(t):
    v = float(smooth_step(np.array([t]))[0])
    assert 0.0 <= v <= 1.0
    if t <= 0:
        assert v == 0.0
    if t >= 1:
        assert v == 1.0


def test_plateau_shape():
    x = np.array([0.0, 0.4, 3.0])
    v = plateau(x, 0.5, 1.0)
    assert v[0] == 1.0 and v[1] == 1.0 and v[2] == 0.0


def test_sgn_split_reassembles():
    s = split_singular("sgn_imag_split")
    x = np.array([-3.0, -0.7, -0.2, 0.2, 0.7, 3.0])
    assert np.allclose(s.full(x), 1j * np.sign(x), atol=1e-14)
    assert s.w2.support is not None


@given(st.floats(min_value=-6, max_value=6).filter(lambda v: abs(v - round(v)) > 1e-3))
@settings(max_examples=60, deadline=None)
def test_floor_split_reassembles(x):
    s = split_singular("floor_steps", {"gamma": 2.0})
    want = 1j * np.sign(x) * np.floor(abs(x)) ** 2
    assert abs(complex(s.full(np.array([x]))[0]) - want) <= 1e-10 * max(1.0, abs(want))
