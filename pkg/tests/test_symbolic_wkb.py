from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudomodes.expansion import eval_termsum
from pseudomodes.potentials import make_builtin
from pseudomodes.symbolic_wkb import (
    GaussianRational,
    TermSum,
    format_termsum,
    gen_exponent_derivative,
    gen_psi_derivative,
    gen_psi_prime,
    gen_remainder,
    structure_check,
)
from pseudomodes.verify import expected_remainders

COEFFS = (0.3, 0.5j, -0.25, 1j)  # V = 0.3 + 0.5i x - x^2/4 + i x^3


def _riccati_oracle(n):
    """Independent symbolic WKB: y_{-1} = iR, -2 y_{-1} y_k = -y_{k-1}' + sum_{i+j=k-1} y_i y_j.

    Returns (E', r_n) as sympy expressions in x, lam for the fixed cubic V.
    """
    x, lam = sp.symbols("x lam")
    V = sum(sp.nsimplify(c) * x**k for k, c in enumerate(COEFFS))
    R = sp.sqrt(lam - V)
    ys = {-1: sp.I * R}
    for k in range(0, n):
        rhs = -sp.diff(ys[k - 1], x) + sum(ys[i] * ys[k - 1 - i] for i in range(0, k))
        ys[k] = rhs / (-2 * ys[-1])
    Ep = sum(ys.values())
    r = sp.diff(Ep, x) - Ep**2 - (lam - V)
    return x, lam, Ep, r


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_remainder_matches_riccati_oracle(n):
    x, lam, Ep, r = _riccati_oracle(n)
    p = make_builtin("custom_polynomial", {"coeffs": list(COEFFS)})
    f_r = sp.lambdify((x, lam), r, "numpy")
    f_e = sp.lambdify((x, lam), Ep, "numpy")
    for xv, lv in [(0.3, 50.0), (-1.1, 200.0), (0.7, 20.0 + 5.0j)]:
        got = eval_termsum(gen_remainder(n), p, xv, lv)
        want = complex(f_r(xv, complex(lv)))
        assert abs(got - want) <= 1e-10 * max(1.0, abs(want))
        got_e = eval_termsum(gen_exponent_derivative(n), p, xv, lv)
        assert abs(got_e - complex(f_e(xv, complex(lv)))) <= 1e-11 * abs(got_e)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_remainders_equal_frozen_table(n):
    assert gen_remainder(n) == expected_remainders()[n]


def test_r0_coefficient():
    r0 = gen_remainder(0)
    (mono, coeff), = list(r0.data)
    assert coeff == GaussianRational(Fraction(0), Fraction(-1, 2))


@pytest.mark.parametrize("k", range(-1, 4))
def test_structure_holds(k):
    for m in range(1, 5 - max(k, 0)):
        rep = structure_check(gen_psi_derivative(k, m), k, m)
        assert rep.ok, rep.violations


def test_psi_derivative_m1_is_psi_prime():
    for k in range(-1, 4):
        assert gen_psi_derivative(k, 1) == gen_psi_prime(k)


@given(st.integers(min_value=0, max_value=3), st.floats(min_value=-2, max_value=2), st.floats(min_value=30, max_value=1e4))
@settings(max_examples=30, deadline=None)
def test_remainder_decays_with_lambda(n, x, lam):
    # |r_n| ~ lam^{-(n+1)/2} up to a V-dependent constant: doubling lam shrinks it
    p = make_builtin("custom_polynomial", {"coeffs": list(COEFFS)})
    a = abs(eval_termsum(gen_remainder(n), p, x, lam))
    b = abs(eval_termsum(gen_remainder(n), p, x, 16 * lam))
    assert b < a


def test_format_is_stable():
    s = format_termsum(gen_remainder(1))
    assert s == format_termsum(gen_remainder(1))
    assert "V^(2)" in s
    assert format_termsum(TermSum(())) == "0"
