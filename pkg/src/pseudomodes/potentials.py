"""Complex potentials with derivative evaluators and asymptotic metadata.

Builtins are written once as formulas on truncated Taylor jets, so
``eval(m, x)`` returns closed-form derivatives without finite differences.
Rough potentials are represented by a :class:`SingularSplit` holding a smooth
part and the rough pieces W1 (tail part) and W2 (compactly supported).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .jets import Jet

__all__ = [
    "Potential",
    "RoughPart",
    "SingularSplit",
    "PotentialError",
    "eval_derivative",
    "make_builtin",
    "split_singular",
    "smooth_step",
    "plateau",
    "CATALOG",
    "SPLITS",
]

DOMAINS = ("full-line", "half-line-positive", "half-line-negative")


class PotentialError(ValueError):
    """Invalid potential request (unknown name, bad parameter, bad order)."""


def _sigma(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t, order: int = 0):
    """S(t) = sigma(t) / (sigma(t) + sigma(1 - t)) and its first two derivatives.

    S = 0 for t <= 0, S = 1 for t >= 1, C-infinity in between.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    if order == 0:
        out[t >= 1] = 1.0
    inside = (t > 0) & (t < 1)
    u = t[inside]
    # log-derivatives of sigma(u) and sigma(1-u)
    a = np.exp(-1.0 / u)
    b = np.exp(-1.0 / (1.0 - u))
    s = a + b
    if order == 0:
        out[inside] = a / s
        return out
    da = a / u**2
    db = -b / (1.0 - u) ** 2
    dda = a * (1.0 - 2.0 * u) / u**4
    ddb = b * (1.0 - 2.0 * (1.0 - u)) / (1.0 - u) ** 4
    ds = da + db
    if order == 1:
        out[inside] = (da * s - a * ds) / s**2
        return out
    if order == 2:
        dds = dda + ddb
        # (a/s)'' = a''/s - 2 a' s'/s^2 - a s''/s^2 + 2 a s'^2/s^3
        out[inside] = dda / s - 2 * da * ds / s**2 - a * dds / s**2 + 2 * a * ds**2 / s**3
        return out
    raise ValueError("order must be 0, 1 or 2")


def plateau(x, inner: float, outer: float, order: int = 0):
    """Even bump eta: 1 on [-inner, inner], 0 outside (-outer, outer)."""
    x = np.asarray(x, dtype=float)
    w = outer - inner
    t = (outer - np.abs(x)) / w
    if order == 0:
        return smooth_step(t, 0)
    sgn = np.sign(x)
    if order == 1:
        return -sgn * smooth_step(t, 1) / w
    if order == 2:
        return smooth_step(t, 2) / w**2
    raise ValueError("order must be <= 2")


@dataclass(frozen=True)
class Potential:
    """Complex potential with derivatives up to ``max_order``.

    ``func(m, x)`` is vectorised over ``x`` and returns V^(m)(x).
    """

    name: str
    func: Callable[[int, np.ndarray], np.ndarray]
    max_order: int
    domain: str = "full-line"
    nu_minus: float = -1.0
    nu_plus: float = -1.0
    bounded_minus: bool = False
    bounded_plus: bool = False
    eps1: float = 0.05
    eps2: float = 0.25
    gamma_im: Optional[float] = None
    gamma_pm: Optional[Tuple[float, float]] = None
    beta_re: Optional[float] = None
    params: Dict = field(default_factory=dict)
    breakpoints: Tuple[float, ...] = ()
    jet: Optional[Callable[[Jet], Jet]] = None

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise PotentialError(f"unknown domain {self.domain!r}")
        if self.max_order < 1:
            raise PotentialError("max_order must be >= 1")

    def eval(self, m: int, x):
        return eval_derivative(self, m, x)

    def derivatives(self, x, upto: int) -> np.ndarray:
        """Stack V^(0..upto)(x), shape (upto + 1, len(x))."""
        if upto > self.max_order:
            raise PotentialError(f"order {upto} exceeds max_order {self.max_order}")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.jet is not None:
            return self.jet(Jet.variable(x, upto)).derivatives()
        return np.array([np.asarray(self.func(m, x), dtype=complex) * np.ones_like(x) for m in range(upto + 1)])

    def with_overrides(self, **kw) -> "Potential":
        from dataclasses import replace

        return replace(self, **kw)

    def in_domain(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.domain == "half-line-positive":
            return x > 0
        if self.domain == "half-line-negative":
            return x < 0
        return np.isfinite(x)


def eval_derivative(p: Potential, m: int, x):
    """V^(m)(x); scalar in, scalar out."""
    if not 0 <= m <= p.max_order:
        raise PotentialError(f"order {m} exceeds max_order {p.max_order}")
    arr = np.asarray(x, dtype=float)
    if not np.all(p.in_domain(arr)):
        raise PotentialError(f"point outside domain {p.domain}")
    flat = np.atleast_1d(arr).ravel()
    vals = p.derivatives(flat, m)[m] if p.jet is not None else np.asarray(p.func(m, flat), dtype=complex) * np.ones_like(flat)
    if arr.ndim == 0:
        return complex(vals[0])
    return vals.reshape(arr.shape)


def _from_jet(name: str, jetf: Callable[[Jet], Jet], max_order: int, **meta) -> Potential:
    def func(m, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return jetf(Jet.variable(x, m)).derivatives()[m]

    return Potential(name=name, func=func, max_order=max_order, jet=jetf, **meta)


def _bracket(z: Jet) -> Jet:
    """<x> = (1 + x^2)^{1/2}."""
    return (z * z + 1.0).power(0.5)


def _falling(g: float, m: int) -> float:
    out = 1.0
    for k in range(m):
        out *= g - k
    return out


# ---------------------------------------------------------------------------
# catalog

MAX_ORDER = 12


def _monomial_imag(gamma: float = 2.0, odd: bool = False, coeff: float = 1.0):
    gamma = float(gamma)
    if gamma < 0:
        raise PotentialError("gamma must be >= 0")
    integer = gamma.is_integer()
    use_odd = odd or not integer

    def func(m, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c = _falling(gamma, m)
        if not use_odd:
            if m > gamma:
                return np.zeros_like(x, dtype=complex)
            return 1j * coeff * c * x ** int(gamma - m)
        ax = np.abs(x)
        sg = np.where(x >= 0, 1.0, -1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            mag = np.where(ax > 0, ax ** (gamma - m), 0.0 if gamma > m else (1.0 if gamma == m else np.inf))
        if c == 0:
            return np.zeros_like(x, dtype=complex)
        return 1j * coeff * c * sg ** (m + 1) * mag

    label = f"i*sgn(x)|x|^{gamma:g}" if use_odd else f"i*x^{gamma:g}"
    return Potential(
        name="monomial_imag",
        func=func,
        max_order=MAX_ORDER,
        nu_minus=-1.0,
        nu_plus=-1.0,
        bounded_minus=gamma == 0,
        bounded_plus=gamma == 0,
        gamma_im=gamma,
        gamma_pm=(gamma, gamma),
        params={"gamma": gamma, "odd": use_odd, "coeff": coeff, "label": label},
        breakpoints=(0.0,) if (use_odd and not integer) else (),
    )


def _poly_like(gamma: float = 2.0, beta: Optional[float] = None, re_coeff: float = 1.0, im_coeff: float = 1.0):
    """re_coeff <x>^beta + i im_coeff x <x>^{gamma-1}: smooth, odd imaginary part."""
    gamma = float(gamma)
    if gamma < 0:
        raise PotentialError("gamma must be >= 0")
    if beta is not None and not gamma > (beta - 2) / 2:
        raise PotentialError("need gamma > (beta - 2)/2")

    def jetf(z: Jet) -> Jet:
        br = _bracket(z)
        v = 1j * im_coeff * z * br.power(gamma - 1.0)
        if beta is not None:
            v = v + re_coeff * br.power(float(beta))
        return v

    return _from_jet(
        "poly_like",
        jetf,
        MAX_ORDER,
        nu_minus=-1.0,
        nu_plus=-1.0,
        bounded_minus=gamma == 0 and (beta is None or beta <= 0),
        bounded_plus=gamma == 0 and (beta is None or beta <= 0),
        gamma_im=gamma,
        gamma_pm=(gamma, gamma),
        beta_re=beta,
        params={"gamma": gamma, "beta": beta, "re_coeff": re_coeff, "im_coeff": im_coeff},
    )


def _cosh_sinh():
    return _from_jet(
        "cosh_sinh",
        lambda z: z.cosh() + 1j * z.sinh(),
        MAX_ORDER,
        nu_minus=0.0,
        nu_plus=0.0,
    )


def _arctan_imag():
    return _from_jet(
        "arctan_imag",
        lambda z: 1j * z.arctan(),
        MAX_ORDER,
        nu_minus=-2.0,
        nu_plus=-2.0,
        bounded_minus=True,
        bounded_plus=True,
        gamma_im=0.0,
        gamma_pm=(0.0, 0.0),
    )


def _arctan_plus_sin(mu: float = 0.5):
    if not 0 < mu < 1:
        raise PotentialError("mu must lie in (0, 1)")

    def jetf(z):
        return 2j * z.arctan() + 1j * _bracket(z).power(1.0 + mu).sin()

    return _from_jet(
        "arctan_plus_sin",
        jetf,
        MAX_ORDER,
        nu_minus=mu,
        nu_plus=mu,
        bounded_minus=True,
        bounded_plus=True,
        gamma_im=0.0,
        params={"mu": mu},
    )


def _decaying(gamma: float = 0.5):
    """i x <x>^{-gamma-1}, a smooth version of i sgn(x)/<x>^gamma."""
    if not 0 < gamma < 1:
        raise PotentialError("gamma must lie in (0, 1)")
    return _from_jet(
        "decaying",
        lambda z: 1j * z * _bracket(z).power(-gamma - 1.0),
        MAX_ORDER,
        nu_minus=-1.0,
        nu_plus=-1.0,
        bounded_minus=True,
        bounded_plus=True,
        params={"gamma": gamma},
    )


def _inv_singularity(alpha: float = 3.0, c: float = 0.0):
    """c/x^2 + i/|x|^alpha on the negative half-line."""
    if not alpha > 2:
        raise PotentialError("alpha must be > 2")

    def jetf(z):
        ax = -z  # |x| for x < 0
        v = 1j * ax.power(-float(alpha))
        if c:
            v = v + c * ax.power(-2.0)
        return v

    return _from_jet(
        "inv_singularity",
        jetf,
        MAX_ORDER,
        domain="half-line-negative",
        nu_minus=-1.0,
        nu_plus=-1.0,
        params={"alpha": float(alpha), "c": float(c)},
    )


def _constant(V0: complex = 0.0):
    V0 = complex(V0)

    def func(m, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.full(x.shape, V0 if m == 0 else 0.0, dtype=complex)

    return Potential(
        name="constant",
        func=func,
        max_order=MAX_ORDER,
        nu_minus=-1.0,
        nu_plus=-1.0,
        bounded_minus=True,
        bounded_plus=True,
        gamma_im=0.0,
        params={"V0": V0},
    )


def _parse_complex(c):
    if isinstance(c, (list, tuple)) and len(c) == 2:
        return complex(float(c[0]), float(c[1]))
    return complex(c)


def _custom_polynomial(coeffs=(0.0, 1j)):
    """sum_k coeffs[k] x^k with complex coefficients."""
    cs = np.array([_parse_complex(c) for c in coeffs], dtype=complex)
    if cs.size == 0:
        raise PotentialError("empty coefficient list")
    poly = np.polynomial.Polynomial(cs)

    def func(m, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return poly.deriv(m)(x) if m else poly(x)

    deg = cs.size - 1
    return Potential(
        name="custom_polynomial",
        func=func,
        max_order=MAX_ORDER,
        nu_minus=-1.0,
        nu_plus=-1.0,
        bounded_minus=deg == 0,
        bounded_plus=deg == 0,
        params={"coeffs": [complex(c) for c in cs]},
    )


CATALOG: Dict[str, Callable[..., Potential]] = {
    "monomial_imag": _monomial_imag,
    "poly_like": _poly_like,
    "cosh_sinh": _cosh_sinh,
    "arctan_imag": _arctan_imag,
    "arctan_plus_sin": _arctan_plus_sin,
    "decaying": _decaying,
    "inv_singularity": _inv_singularity,
    "constant": _constant,
    "custom_polynomial": _custom_polynomial,
}


# ---------------------------------------------------------------------------
# rough potentials


@dataclass(frozen=True)
class RoughPart:
    """A piecewise smooth function with declared breakpoints.

    ``func(x)`` returns values; ``support`` is None for unbounded support.
    """

    func: Callable[[np.ndarray], np.ndarray]
    breakpoints: Tuple[float, ...] = ()
    support: Optional[Tuple[float, float]] = None
    beta_pm: Optional[Tuple[float, float]] = None
    gamma_pm: Optional[Tuple[float, float]] = None
    integer_breaks: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.func(x), dtype=complex)

    def is_zero(self) -> bool:
        return self.support == (0.0, 0.0)

    def breaks(self, lo: float, hi: float):
        """Breakpoints inside [lo, hi]."""
        pts = [b for b in self.breakpoints if lo <= b <= hi]
        if self.integer_breaks:
            pts += list(np.arange(np.ceil(lo), np.floor(hi) + 1.0))
        return sorted(set(float(p) for p in pts))


ZERO_PART = RoughPart(lambda x: np.zeros_like(np.asarray(x, dtype=float), dtype=complex), (), (0.0, 0.0))


@dataclass(frozen=True)
class SingularSplit:
    """U = V + W1 + W2 with V smooth and W2 compactly supported."""

    name: str
    v_regular: Potential
    w1: RoughPart
    w2: RoughPart
    margin: float = 0.5
    params: Dict = field(default_factory=dict)

    def full(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.v_regular.eval(0, x) + self.w1(x) + self.w2(x)

    def w(self, x) -> np.ndarray:
        return self.w1(x) + self.w2(x)


def _sgn(x):
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def _sgn_imag_split():
    inner, outer = 0.5, 1.0

    def jet_v(z: Jet) -> Jet:
        # i (1 - eta) sgn: smooth, identically zero on [-1/2, 1/2]
        x = z.c[0].real
        M = z.order
        cols = np.zeros((M + 1, x.size), dtype=complex)
        sg = _sgn(x)
        for m in range(min(M, 2) + 1):
            e = plateau(x, inner, outer, m)
            cols[m] = 1j * sg * ((1.0 - e) if m == 0 else -e)
        for m in range(3, M + 1):
            cols[m] = 1j * sg * -_plateau_high(x, inner, outer, m)
        fac = np.array([factorial(k) for k in range(M + 1)], dtype=float)
        return Jet(cols / fac[:, None])

    v = Potential(
        name="sgn_regular",
        func=lambda m, x: jet_v(Jet.variable(x, m)).derivatives()[m],
        max_order=MAX_ORDER,
        nu_minus=-1.0,
        nu_plus=-1.0,
        bounded_minus=True,
        bounded_plus=True,
        gamma_im=0.0,
        gamma_pm=(0.0, 0.0),
        jet=jet_v,
    )
    w2 = RoughPart(
        lambda x: 1j * plateau(x, inner, outer) * _sgn(x),
        breakpoints=(0.0,),
        support=(-outer, outer),
    )
    return SingularSplit("sgn_imag_split", v, ZERO_PART, w2, margin=0.5, params={})


def _plateau_high(x, inner, outer, m):
    """Higher derivatives of the plateau via jets of S on each side."""
    x = np.asarray(x, dtype=float)
    w = outer - inner
    out = np.zeros_like(x)
    t = (outer - np.abs(x)) / w
    inside = (t > 0) & (t < 1)
    if not np.any(inside):
        return out
    u = Jet.variable(t[inside], m)
    a = (-1.0 / u).exp()
    b = (-1.0 / (1.0 - u)).exp()
    s = (a / (a + b)).derivatives()[m].real
    sg = _sgn(x[inside])
    out[inside] = s * (-sg / w) ** m
    return out


def _floor_steps(gamma: float = 2.0):
    """i |x|^gamma sgn(x) split around the integer staircase floor(|x|)^gamma."""
    gamma = float(gamma)
    if gamma <= 0:
        raise PotentialError("gamma must be > 0")
    inner, outer = gamma + 1.0, gamma + 2.0

    def jet_v(z: Jet) -> Jet:
        x = z.c[0].real
        M = z.order
        sg = _sgn(x)
        ax = np.abs(x)
        # g(x) = |x|^gamma sgn(x) derivatives, zero where eta == 1 anyway
        with np.errstate(divide="ignore", invalid="ignore"):
            gd = [
                np.where(ax > 0, _falling(gamma, k) * sg ** (k + 1) * ax ** (gamma - k), 0.0)
                for k in range(M + 1)
            ]
        ed = []
        for k in range(M + 1):
            if k <= 2:
                ed.append(plateau(x, inner, outer, k))
            else:
                ed.append(_plateau_high(x, inner, outer, k))
        one_minus = [1.0 - ed[0]] + [-e for e in ed[1:]]
        cols = np.zeros((M + 1, x.size), dtype=complex)
        for m in range(M + 1):
            acc = np.zeros_like(x)
            for k in range(m + 1):
                binom = factorial(m) / (factorial(k) * factorial(m - k))
                acc = acc + binom * np.nan_to_num(one_minus[k] * gd[m - k])
            cols[m] = 1j * acc
        fac = np.array([factorial(k) for k in range(M + 1)], dtype=float)
        return Jet(cols / fac[:, None])

    v = Potential(
        name="floor_regular",
        func=lambda m, x: jet_v(Jet.variable(x, m)).derivatives()[m],
        max_order=MAX_ORDER,
        nu_minus=-1.0,
        nu_plus=-1.0,
        gamma_im=gamma,
        gamma_pm=(gamma, gamma),
        jet=jet_v,
        params={"gamma": gamma},
    )

    def w1(x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        e = plateau(x, inner, outer)
        return 1j * (1.0 - e) * (np.floor(ax) ** gamma - ax**gamma) * _sgn(x)

    def w2(x):
        x = np.asarray(x, dtype=float)
        e = plateau(x, inner, outer)
        return 1j * e * np.floor(np.abs(x)) ** gamma * _sgn(x)

    nb = int(np.ceil(outer)) + 1
    bps2 = tuple(float(k) for k in range(-nb, nb + 1))
    w1p = RoughPart(
        w1, support=None, beta_pm=(0.0, 0.0), gamma_pm=(gamma - 1.0, gamma - 1.0), integer_breaks=True
    )
    w2p = RoughPart(w2, breakpoints=bps2, support=(-outer, outer))
    return SingularSplit("floor_steps", v, w1p, w2p, margin=1.0 / (gamma + 1.0), params={"gamma": gamma})


SPLITS: Dict[str, Callable[..., SingularSplit]] = {
    "sgn_imag_split": _sgn_imag_split,
    "floor_steps": _floor_steps,
}


def make_builtin(name: str, params: Optional[Dict] = None):
    """Build a catalog potential; split names return a :class:`SingularSplit`."""
    params = dict(params or {})
    if name in SPLITS:
        return split_singular(name, params)
    if name not in CATALOG:
        raise PotentialError(f"unknown potential {name!r}")
    overrides = {k: params.pop(k) for k in ("eps1", "eps2") if k in params}
    try:
        p = CATALOG[name](**params)
    except TypeError as exc:
        raise PotentialError(f"bad parameters for {name}: {exc}") from exc
    return p.with_overrides(**overrides) if overrides else p


def split_singular(name: str, params: Optional[Dict] = None) -> SingularSplit:
    params = dict(params or {})
    if name not in SPLITS:
        raise PotentialError(f"unknown split {name!r}")
    overrides = {k: params.pop(k) for k in ("eps1", "eps2") if k in params}
    try:
        s = SPLITS[name](**params)
    except TypeError as exc:
        raise PotentialError(f"bad parameters for {name}: {exc}") from exc
    if overrides:
        from dataclasses import replace

        s = replace(s, v_regular=s.v_regular.with_overrides(**overrides))
    return s
