import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from pseudomodes.mollify import (
    BUMP_MASS,
    MollifyError,
    MollifySpec,
    bump,
    bump_l1_norms,
    convolve,
    lp_norm,
    modulus_continuity,
    mollified_potential,
    mollified_w,
    mollifier_inequalities,
    size_bound_ratio,
)
from pseudomodes.potentials import RoughPart, split_singular

HAT = RoughPart(lambda x: np.maximum(1.0 - np.abs(x), 0.0) + 0j, breakpoints=(-1.0, 0.0, 1.0))
SGN = RoughPart(lambda x: 1j * np.where(x >= 0, 1.0, -1.0), breakpoints=(0.0,))


def test_bump_mass_and_norms_independent():
    m = quad(lambda t: np.exp(-1 / (1 - t * t)), -1, 1, epsabs=1e-15, epsrel=1e-13)[0]
    assert BUMP_MASS == pytest.approx(m, rel=1e-12)
    t = sp.symbols("t")
    w = sp.exp(-1 / (1 - t**2)) / BUMP_MASS
    for order in (1, 2):
        f = sp.lambdify(t, sp.diff(w, t, order), "math")
        zeros = {1: [0.0], 2: [-1 / np.sqrt(3), 1 / np.sqrt(3)]}[order]
        edges = [-1.0] + zeros + [1.0]
        l1 = sum(quad(lambda s: abs(f(s)), a, b, epsabs=1e-14, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))
        assert bump_l1_norms(order) == pytest.approx(l1, rel=1e-8)


def test_bump_derivatives_fd():
    t = np.linspace(-0.95, 0.95, 191)
    h = 1e-6
    assert np.allclose((bump(t + h) - bump(t - h)) / (2 * h), bump(t, 1), atol=1e-6)
    assert np.allclose((bump(t + h, 1) - bump(t - h, 1)) / (2 * h), bump(t, 2), atol=1e-4)
    with pytest.raises(MollifyError):
        bump(t, 3)


@given(st.floats(min_value=-2, max_value=2), st.floats(min_value=1e-3, max_value=0.5))
@settings(max_examples=40, deadline=None)
def test_convolution_matches_quad(x, eps):
    got = convolve(HAT, eps, np.array([x]))[0]
    f = lambda y: float(bump(np.array([y / eps]))[0]) / eps * max(1 - abs(x - y), 0.0)
    pts = [p for p in (x - 1, x, x + 1) if -eps < p < eps]
    want = quad(f, -eps, eps, points=pts or None, epsabs=1e-14, limit=200)[0]
    assert abs(got - want) <= 1e-10


@given(st.floats(min_value=1e-3, max_value=0.3))
@settings(max_examples=20, deadline=None)
def test_convolution_reproduces_away_from_jump(eps):
    x = np.array([-1.0, -2 * eps, 2 * eps, 1.0])
    assert np.allclose(convolve(SGN, eps, x), SGN(x), atol=1e-12)
    assert np.allclose(convolve(SGN, eps, x, order=1), 0.0, atol=1e-12)


@given(st.floats(min_value=1e-3, max_value=0.3), st.sampled_from([1.0, 2.0]))
@settings(max_examples=15, deadline=None)
def test_modulus_of_jump(eps, p):
    # ||sgn(. + t) - sgn||_p = 2 |t|^{1/p}
    assert modulus_continuity(SGN, eps, p, (-2.0, 2.0)) == pytest.approx(2 * eps ** (1 / p), rel=1e-8)


def test_lp_norm_hat():
    assert lp_norm(HAT, (-2.0, 2.0), 2.0) == pytest.approx(np.sqrt(2 / 3), rel=1e-10)
    assert lp_norm(HAT, (-2.0, 2.0), 1.0) == pytest.approx(1.0, rel=1e-10)


@given(st.sampled_from([1e-1, 1e-2, 1e-3]), st.sampled_from([1.0, 2.0]), st.sampled_from(["hat", "sgn"]))
@settings(max_examples=12, deadline=None)
def test_mollifier_inequalities_hold(eps, p, which):
    W = HAT if which == "hat" else SGN
    rows = mollifier_inequalities(W, eps, p, (-2.0, 2.0))
    assert all(ok for _, _, ok in rows.values()), rows


def test_spec_validation_and_eps():
    with pytest.raises(MollifyError):
        MollifySpec(alpha_zero=1.5)
    assert MollifySpec().eps(1e4) == pytest.approx((1e-2, 1e-2, 1e-2))


def test_mollified_potential_sgn():
    split = split_singular("sgn_imag_split")
    lam = 1e4
    pm = mollified_potential(split, lam)
    x = np.array([-3.0, -0.5, 0.5, 3.0])
    assert np.allclose(pm.eval(0, x), split.full(x), atol=1e-12)
    xs = np.linspace(-0.05, 0.05, 21)
    h = 1e-6
    fd = (pm.derivatives(xs + h, 0)[0] - pm.derivatives(xs - h, 0)[0]) / (2 * h)
    assert np.allclose(fd, pm.derivatives(xs, 1)[1], rtol=1e-5, atol=1e-5)
    with pytest.raises(Exception):
        pm.derivatives(xs, 3)
    wt = mollified_w(split, lam)(x)
    assert np.allclose(wt, split.w(x), atol=1e-12)


def test_size_bound_ratio_floor_steps():
    split = split_singular("floor_steps", {"gamma": 2.0})
    r = size_bound_ratio(split, 1e4, np.linspace(-6, 6, 601))
    assert 0 < r < 1
