import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from pseudomodes.cutoff import CutoffSpec, widths_real_axis
from pseudomodes.expansion import (
    BranchCutError,
    ExpansionConfig,
    ExpansionError,
    assemble,
    cumulative_psi,
    eval_termsum,
    sqrt_res,
)
from pseudomodes.potentials import make_builtin
from pseudomodes.residual import FitError, ResidualReport, l2_norm, log_l2_norm, rate_fit, report
from pseudomodes.symbolic_wkb import gen_psi_prime

P = make_builtin("custom_polynomial", {"coeffs": [0.3, [0, 0.5], -0.25, [0, 1]]})


@pytest.mark.parametrize("k", [-1, 0, 1, 2])
def test_cumulative_psi_matches_scipy_quad(k):
    lam = 60.0 + 3.0j
    cfg = ExpansionConfig(n=3, base_point=0.2)
    nodes = np.linspace(-1.5, 1.5, 41)
    got = cumulative_psi(P, lam, cfg, k, nodes)
    f = lambda t: eval_termsum(gen_psi_prime(k), P, t, lam)
    for x, g in zip(nodes[::8], got[::8]):
        re = quad(lambda t: f(t).real, 0.2, x, epsabs=1e-13, epsrel=1e-12)[0]
        im = quad(lambda t: f(t).imag, 0.2, x, epsabs=1e-13, epsrel=1e-12)[0]
        want = re + 1j * im
        assert abs(g - want) <= 1e-9 * max(1.0, abs(want))


def test_sqrt_res_branch():
    R = sqrt_res(10.0, np.array([1j, -1j, 2.0]))
    assert np.all(R.real > 0)
    with pytest.raises(BranchCutError):
        sqrt_res(1.0, np.array([2.0 + 0j]))


def _uniform_grid(n=2):
    p = make_builtin("poly_like", {"gamma": 2, "eps1": 1.6})
    lam = 400.0
    cut = widths_real_axis(p, lam)
    lo, hi = cut.J
    x = np.linspace(lo, hi, 200001)
    return p, lam, assemble(p, lam, ExpansionConfig(n=n), cut, nodes=x)


def test_exponent_derivative_consistent_with_exponent():
    _, _, g = _uniform_grid()
    x = g.nodes
    dE = np.gradient(g.E, x)
    sel = slice(10, -10)
    assert np.max(np.abs(dE[sel] - g.Ep[sel])) <= 1e-5 * np.max(np.abs(g.Ep))


def test_residual_matches_direct_operator_application():
    p, lam, g = _uniform_grid()
    x = g.nodes
    f = g.f_vals
    hx = x[1] - x[0]
    d2 = (f[2:] - 2 * f[1:-1] + f[:-2]) / hx**2
    V = p.derivatives(x, 0)[0]
    direct = -d2 + (V[1:-1] - lam) * f[1:-1]
    res = g.residual_integrand[1:-1]
    err = np.linalg.norm(direct - res) / np.linalg.norm(f)
    assert err <= 1e-3 * np.linalg.norm(res) / np.linalg.norm(f) + 1e-6


def test_constant_potential_plateau_residual_vanishes():
    p = make_builtin("constant", {"V0": 2 + 1.5j})
    cut = CutoffSpec("manual", 5.0, 5.0, 1.0, 1.0)
    for n in range(5):
        g = assemble(p, 100.0, ExpansionConfig(n=n), cut)
        lo, hi = cut.J_inner
        m = (g.nodes >= lo) & (g.nodes <= hi)
        assert np.max(np.abs(g.residual_integrand[m])) == 0.0


def test_order_guard():
    p = make_builtin("constant", {"V0": 1.0})
    p = p.with_overrides(max_order=2)
    with pytest.raises(ExpansionError):
        assemble(p, 100.0, ExpansionConfig(n=2), CutoffSpec("manual", 1.0, 1.0, 0.5, 0.5))


def test_config_validation():
    with pytest.raises(ValueError):
        ExpansionConfig(n=-1)
    with pytest.raises(ValueError):
        ExpansionConfig(quad_tol=0.1)


def test_report_triangle_and_row():
    p = make_builtin("poly_like", {"gamma": 2, "eps1": 1.6})
    lam = 1e3
    rep = report(assemble(p, lam, ExpansionConfig(n=2), widths_real_axis(p, lam)))
    assert rep.triangle_ok()
    assert rep.ratio <= rep.kappa + rep.sigma + rep.extra
    row = rep.as_row()
    assert list(row)[:2] == ["lambda_re", "lambda_im"]
    assert row["delta_minus"] == row["delta_plus"]
    assert np.isclose(np.log(rep.ratio), rep.log_ratio)


@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-500, max_value=200))
@settings(max_examples=40, deadline=None)
def test_log_norm_matches_direct_norm(a, shift):
    x = np.linspace(-2, 2, 801)
    la = -((x - a) ** 2) + shift
    got = log_l2_norm(x, la)
    ref = np.log(l2_norm(x, np.exp(la + 500.0))) - 500.0
    assert got == pytest.approx(ref, abs=1e-10)


@given(st.floats(min_value=-3, max_value=1), st.floats(min_value=-5, max_value=5))
@settings(max_examples=40, deadline=None)
def test_rate_fit_recovers_power_law(slope, c):
    xs = np.logspace(2, 5, 8)
    fit = rate_fit([(x, np.exp(c) * x**slope) for x in xs])
    assert fit.slope == pytest.approx(slope, abs=1e-10)
    assert fit.intercept == pytest.approx(c, abs=1e-8)
    assert not fit.transient_dropped


def test_rate_fit_drops_transient():
    xs = np.logspace(2, 5, 8)
    ys = xs**-1.5 * np.where(xs < 1e3, 50.0, 1.0)
    fit = rate_fit([(x, y) for x, y in zip(xs, ys)])
    assert fit.transient_dropped and fit.points_used == 4
    assert fit.slope == pytest.approx(-1.5, abs=1e-10)
    assert fit.to_json()["schema_version"] == 1


def test_rate_fit_errors():
    with pytest.raises(FitError):
        rate_fit([(1.0, 1.0)] * 3)
    with pytest.raises(FitError):
        rate_fit([(1.0, 0.0)] * 4)
