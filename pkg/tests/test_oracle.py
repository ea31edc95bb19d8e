import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudomodes.cutoff import widths_real_axis
from pseudomodes.expansion import ExpansionConfig, assemble
from pseudomodes.oracle import (
    OracleError,
    ResolutionError,
    cross_check,
    dirichlet_ground_state,
    disc_residual,
    discretize,
    resample_pchip,
    sample_pseudomode,
    sigma_min_probe,
)
from pseudomodes.potentials import make_builtin

P = make_builtin("poly_like", {"gamma": 2, "eps1": 1.6})


def test_discretize_shape_and_matvec():
    A = discretize(P, (-1.0, 1.0), 0.01)
    assert A.size == 199
    assert A.nodes[0] == pytest.approx(-0.99)
    rng = np.random.default_rng(1)
    f = rng.standard_normal(A.size) + 1j * rng.standard_normal(A.size)
    M = A.shifted(0.0)
    assert np.allclose(A.matvec(f), M @ f)
    with pytest.raises(OracleError):
        A.matvec(f[:-1])


def test_discretize_validation():
    with pytest.raises(ResolutionError):
        discretize(P, (-1.0, 1.0), 0.1, lam=1e4)
    with pytest.raises(OracleError):
        discretize(P, (-1.0, 1.0), 0.3)
    with pytest.raises(OracleError):
        discretize(P, (1.0, -1.0), 0.1)


def test_ground_state_matches_closed_form():
    h = np.pi / 1000
    # entries are O(1/h^2) ~ 4e5, so eigensolver rounding is ~ eps * 4e5
    assert dirichlet_ground_state(h) == pytest.approx((2 - 2 * np.cos(h)) / h**2, abs=1e-9)
    assert abs(dirichlet_ground_state() - 1.0) < 1e-5


@given(st.floats(min_value=-5, max_value=30), st.floats(min_value=-5, max_value=5), st.integers(0, 10))
@settings(max_examples=15, deadline=None)
def test_sigma_min_matches_dense_svd(re, im, seed):
    A = discretize(P, (-2.0, 2.0), 0.05)
    lam = complex(re, im)
    s = np.linalg.svd(A.shifted(lam).toarray(), compute_uv=False)[-1]
    got = sigma_min_probe(A, lam, tol=1e-12, max_iter=5000, seed=seed)
    assert got.value >= s * (1 - 1e-12)
    if got.converged:
        assert got.value == pytest.approx(s, rel=1e-4)


def test_disc_residual_of_eigenvector_is_small():
    A = discretize(make_builtin("constant", {"V0": 0.0}), (0.0, np.pi), np.pi / 200)
    f = np.sin(A.nodes)
    lam = (2 - 2 * np.cos(A.h)) / A.h**2
    assert disc_residual(A, f, lam) < 1e-10


def test_sampling_and_pchip_agree():
    lam = 100.0
    cut = widths_real_axis(P, lam)
    cfg = ExpansionConfig(n=2)
    lo, hi = cut.J
    A = discretize(P, (lo - 1.0, lo - 1.0 + 0.005 * int(np.ceil((hi - lo + 2) / 0.005))), 0.005, lam)
    direct = sample_pseudomode(P, lam, cfg, cut, A)
    grid = assemble(P, lam, cfg, cut)
    interp = resample_pchip(grid, A)
    assert np.linalg.norm(direct - interp) <= 1e-4 * np.linalg.norm(direct)


def test_cross_check_agrees_with_analytic_ratio():
    from pseudomodes.residual import report

    lam = 200.0
    cfg = ExpansionConfig(n=2, quad_tol=1e-13)
    cut = widths_real_axis(P, lam)
    r = report(assemble(P, lam, cfg, cut)).ratio
    res = cross_check(P, lam, cfg, cut, analytic_ratio=r)
    assert res.agrees(0.01)
    assert res.observed_order == pytest.approx(2.0, abs=0.1)
    assert res.sigma_min <= res.ratio_h * (1 + 1e-9)
