import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudomodes.curves import (
    LambdaPath,
    PathError,
    PathPoint,
    admissible_a_range,
    assemble_on_path,
    assemble_point,
    head_term,
    make_path,
    semiclassical_ratios,
    singular_exponent_window,
    turning_sign_profile,
)
from pseudomodes.cutoff import widths_curve
from pseudomodes.expansion import ExpansionConfig
from pseudomodes.potentials import make_builtin, split_singular
from pseudomodes.residual import report
from pseudomodes.symbolic_wkb import gen_remainder


def _window_exponents(p, bs):
    rows = []
    for b in bs:
        spec = widths_curve(p, b)
        rows.append(admissible_a_range(p, b, spec.x_b, spec.delta_plus))
    lo, hi = np.array(rows).T
    lb = np.log(bs)
    return np.polyfit(lb, np.log(lo), 1)[0], np.polyfit(lb, np.log(hi), 1)[0]


@pytest.mark.parametrize("gamma", [2, 3])
def test_admissible_window_exponents(gamma):
    p = make_builtin("monomial_imag", {"gamma": gamma})
    lo, hi = _window_exponents(p, np.logspace(3, 4, 5))
    assert lo == pytest.approx((2 / 3) * (gamma - 1) / gamma, rel=0.05)
    assert hi == pytest.approx(2 * (gamma + 1) / gamma - 4 * p.eps1 / gamma, rel=0.05)


def test_singular_window_alpha3():
    lo, hi = singular_exponent_window(3.0, 0.1)
    assert lo == pytest.approx(8 / 9 + 0.1)
    assert hi == pytest.approx(4 / 3 - 0.1)


@given(st.floats(min_value=1e2, max_value=1e5), st.floats(min_value=0.5, max_value=2.5))
@settings(max_examples=30, deadline=None)
def test_turning_sign_changes_at_xb(b, expo):
    p = make_builtin("monomial_imag", {"gamma": 2})
    xb = widths_curve(p, b).x_b
    lam = complex(b**expo, b)
    left = turning_sign_profile(p, lam, xb, xb * np.array([0.5, 0.9]))
    right = turning_sign_profile(p, lam, xb, xb * np.array([1.1, 1.5]))
    assert np.all(left < 0) and np.all(right > 0)


def test_curve_path_admissible_and_sorted():
    p = make_builtin("monomial_imag", {"gamma": 2})
    path = make_path("curve", p, {"b_min": 1e2, "b_max": 1e5, "num": 6, "a_exponent": 1.0})
    assert len(path) == 6
    assert np.all(np.diff(np.abs(path.lambdas)) > 0)
    for q in path.points:
        assert q.a == pytest.approx(q.b)


def test_path_errors():
    p = make_builtin("inv_singularity", {"alpha": 3.0})
    with pytest.raises(PathError):
        make_path("singular", p, {"b_min": 1e2, "b_max": 1e3, "a_exponent": 2.0})
    with pytest.raises(PathError):
        make_path("decaying", make_builtin("decaying"), {"a_min": 1e2, "a_max": 1e4, "b_exponent": 0.2})
    with pytest.raises(PathError):
        make_path("semiclassical", None, {"h_list": [0.1]})
    with pytest.raises(PathError):
        make_path("warp", None, {})
    with pytest.raises(PathError):
        make_path("real-axis", None, {"lambdas": []})
    with pytest.raises(PathError):
        LambdaPath("nope", [])


def test_decaying_exponent_grows_along_path():
    p = make_builtin("decaying", {"gamma": 0.5})
    path = make_path("decaying", p, {"a_min": 1e2, "a_max": 1e4, "num": 4})
    assert path.points[0].b == pytest.approx(1e2**-0.75)
    grids = assemble_on_path(path, p, ExpansionConfig(n=2))
    peaks = [float(np.max(g.E.real)) for g in grids]
    assert np.all(np.diff(peaks) > 0)


@pytest.mark.parametrize("h", [2.0**-3, 2.0**-5, 2.0**-7])
def test_semiclassical_residual_scales_by_h2(h):
    U = make_builtin("monomial_imag", {"gamma": 1})
    r_h, r_scaled, _ = semiclassical_ratios(U, 1.0, h, ExpansionConfig(n=2))
    assert r_h == pytest.approx(h**2 * r_scaled, rel=1e-12)


def test_workers_do_not_change_results():
    p = make_builtin("poly_like", {"gamma": 2, "eps1": 1.6})
    path = make_path("real-axis", None, {"lam_min": 1e2, "lam_max": 1e3, "num": 4})
    a = [report(g).ratio for g in assemble_on_path(path, p, ExpansionConfig(n=2), workers=1)]
    b = [report(g).ratio for g in assemble_on_path(path, p, ExpansionConfig(n=2), workers=4)]
    assert a == b


def test_extra_term_mode_splits_remainder():
    p = make_builtin("poly_like", {"gamma": 2, "eps1": 1.6})
    path = make_path("real-axis", None, {"lambdas": [1e3]})
    q = path.points[0]
    plain = assemble_point(path, q, p, ExpansionConfig(n=2), "plain")
    extra = assemble_point(path, q, p, ExpansionConfig(n=2), "extra-term")
    assert np.allclose(extra.r_n + extra.extra_factor, plain.r_n, rtol=1e-12, atol=0)
    assert report(extra).triangle_ok()
    head = head_term(2)
    assert len(head.data) > 0 and len(head.data) < len(gen_remainder(2).data)


def test_mode_validation():
    p = make_builtin("poly_like")
    path = make_path("real-axis", None, {"lambdas": [1e3]})
    with pytest.raises(PathError):
        assemble_point(path, path.points[0], p, ExpansionConfig(n=1), "ignore-W")
    with pytest.raises(PathError):
        assemble_point(path, path.points[0], p, ExpansionConfig(n=1), "sideways")


def test_ignore_w_extra_is_w():
    split = split_singular("sgn_imag_split", {"eps2": 1.0})
    path = make_path("real-axis", None, {"lambdas": [1e3]})
    g = assemble_point(path, path.points[0], split, ExpansionConfig(n=1), "ignore-W")
    assert np.allclose(g.extra_factor, split.w(g.nodes))
    rep = report(g)
    assert rep.extra > 0 and rep.triangle_ok()
