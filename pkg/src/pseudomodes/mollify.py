"""lambda-dependent mollification of rough potential parts.

The mollifier is the normalised bump w(t) = C exp(-1/(1 - t^2)) on (-1, 1)
with w_eps(y) = w(y/eps)/eps.  Convolutions use fixed Gauss-Legendre rules
on the pieces of [-eps, eps] cut at the declared breakpoints of W.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad, simpson

from .potentials import Potential, RoughPart, SingularSplit

__all__ = [
    "MollifySpec",
    "MollifyError",
    "bump",
    "bump_l1_norms",
    "BUMP_MASS",
    "convolve",
    "lp_norm",
    "modulus_continuity",
    "mollified_potential",
    "mollifier_inequalities",
    "size_bound_ratio",
]


class MollifyError(ValueError):
    pass


def _raw_bump(t):
    t = np.asarray(t, dtype=float)
    u = 1.0 - t * t
    out = np.zeros_like(t)
    inside = u > 0
    out[inside] = np.exp(-1.0 / u[inside])
    return out


# int_{-1}^{1} exp(-1/(1-t^2)) dt
BUMP_MASS = 0.44399381616807937
_GL_T, _GL_W = np.polynomial.legendre.leggauss(64)


def bump(t, order: int = 0) -> np.ndarray:
    """w^(order)(t) for order in {0, 1, 2}; w >= 0, int w = 1, max w = e^{-1}/BUMP_MASS < 1."""
    t = np.asarray(t, dtype=float)
    w = _raw_bump(t) / BUMP_MASS
    if order == 0:
        return w
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    ti, wi = t[inside], w[inside]
    u = 1.0 - ti * ti
    if order == 1:
        out[inside] = -2.0 * ti * wi / u**2
    elif order == 2:
        out[inside] = wi * (4.0 * ti**2 / u**4 - 2.0 / u**2 - 8.0 * ti**2 / u**3)
    else:
        raise MollifyError("bump derivatives are supported up to order 2")
    return out


def _l1(order: int) -> float:
    # split at the interior zeros of w^(order) so quad sees smooth pieces
    pts = {0: [], 1: [0.0], 2: [-0.5773502691896258, 0.5773502691896258]}[order]
    f = lambda t: abs(float(bump(np.array([t]), order)[0]))
    edges = [-1.0] + pts + [1.0]
    return float(sum(quad(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0] for a, b in zip(edges[:-1], edges[1:])))


_L1_CACHE: Dict[int, float] = {}


def bump_l1_norms(order: int) -> float:
    """||w^(order)||_1 (cached)."""
    if order not in _L1_CACHE:
        if order == 1:
            # w' changes sign once at 0: ||w'||_1 = 2 max w
            _L1_CACHE[1] = 2.0 * np.exp(-1.0) / BUMP_MASS
        else:
            _L1_CACHE[order] = _l1(order)
    return _L1_CACHE[order]


@dataclass(frozen=True)
class MollifySpec:
    """Exponents alpha_iota with eps_iota(lam) = lam^{-alpha_iota}, iota in {-, +, 0}."""

    alpha_minus: float = 0.5
    alpha_plus: float = 0.5
    alpha_zero: float = 0.5

    def __post_init__(self):
        for a in (self.alpha_minus, self.alpha_plus, self.alpha_zero):
            if not 0.0 < a < 1.0:
                raise MollifyError("alpha must lie in (0, 1)")

    def eps(self, lam: float) -> Tuple[float, float, float]:
        lam = abs(lam)
        return lam ** -self.alpha_minus, lam ** -self.alpha_plus, lam ** -self.alpha_zero


Evaluator = Union[RoughPart, Callable[[np.ndarray], np.ndarray]]


def _breaks_of(W: Evaluator, lo: float, hi: float, extra: Sequence[float] = ()) -> np.ndarray:
    pts = list(W.breaks(lo, hi)) if isinstance(W, RoughPart) else []
    pts += [b for b in extra if lo <= b <= hi]
    return np.unique(np.asarray(pts, dtype=float))


def _call(W: Evaluator, x: np.ndarray) -> np.ndarray:
    return np.asarray(W(x), dtype=complex)


def convolve(
    W: Evaluator,
    eps: float,
    x,
    order: int = 0,
    extra_breaks: Sequence[float] = (),
    chunk: int = 4096,
) -> np.ndarray:
    """(w_eps^(order) * W)(x) = int w_eps^(order)(y) W(x - y) dy, vectorised over x.

    The window [-eps, eps] is cut at every y = x - b with b a breakpoint of W
    and each piece integrated by 64-point Gauss-Legendre.
    """
    if eps <= 0:
        raise MollifyError("eps must be positive")
    if order not in (0, 1, 2):
        raise MollifyError("mollified derivatives are supported up to order 2")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.size, dtype=complex)
    B = _breaks_of(W, float(xs.min()) - eps, float(xs.max()) + eps, extra_breaks) if xs.size else np.empty(0)
    scale = eps ** -(order + 1)
    for s in range(0, xs.size, chunk):
        xc = xs[s : s + chunk]
        lo_i = np.searchsorted(B, xc - eps, side="right")
        hi_i = np.searchsorted(B, xc + eps, side="left")
        K = int(np.max(hi_i - lo_i)) if B.size and xc.size else 0
        edges = np.full((xc.size, K + 2), eps)
        edges[:, 0] = -eps
        for j in range(K):
            idx = lo_i + j
            ok = idx < hi_i
            edges[ok, j + 1] = xc[ok] - B[idx[ok]]
        edges = np.sort(edges, axis=1)
        a, b = edges[:, :-1], edges[:, 1:]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        y = mid[..., None] + half[..., None] * _GL_T
        vals = bump(y / eps, order) * _call(W, xc[:, None, None] - y)
        out[s : s + chunk] = scale * np.sum(vals * _GL_W * half[..., None], axis=(1, 2))
    return out if np.ndim(x) else out[0]


def lp_norm(W: Evaluator, J: Tuple[float, float], p: float, shift: float = 0.0, subtract: bool = False) -> float:
    """||W(. + shift) - W||_{L^p(J)} if subtract else ||W||_{L^p(J)}, by quad split at breakpoints."""
    lo, hi = J
    pts = set(_breaks_of(W, lo, hi).tolist())
    if subtract:
        pts |= set((_breaks_of(W, lo + shift, hi + shift) - shift).tolist())
    pts = sorted(b for b in pts if lo < b < hi)
    edges = [lo] + pts + [hi]

    def integrand(t):
        xv = np.array([t])
        v = _call(W, xv + shift)[0]
        if subtract:
            v = v - _call(W, xv)[0]
        return abs(v) ** p

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            total += quad(integrand, a, b, epsabs=1e-15, epsrel=1e-11, limit=400)[0]
    return float(total ** (1.0 / p))


def modulus_continuity(W: Evaluator, eps: float, p: float, J: Tuple[float, float]) -> float:
    """sup over t in +-{eps, eps/2, eps/4, eps/8} of ||W(. + t) - W||_{L^p(J)}."""
    shifts = [s * eps / 2**k for k in range(4) for s in (1.0, -1.0)]
    return max(lp_norm(W, J, p, shift=t, subtract=True) for t in shifts)


def _eval_grid(W: Evaluator, J: Tuple[float, float], eps: float, base: int = 4001, cluster: int = 801) -> np.ndarray:
    """Uniform grid on J refined within 2 eps of each breakpoint."""
    lo, hi = J
    pieces = [np.linspace(lo, hi, base)]
    for b in _breaks_of(W, lo - eps, hi + eps):
        pieces.append(np.clip(np.linspace(b - 2 * eps, b + 2 * eps, cluster), lo, hi))
    return np.unique(np.concatenate(pieces))


def _grid_norm(x: np.ndarray, v: np.ndarray, p: float) -> float:
    return float(simpson(np.abs(v) ** p, x=x) ** (1.0 / p))


def mollifier_inequalities(W: Evaluator, eps: float, p: float, J: Tuple[float, float], slack: float = 0.01) -> Dict[str, Tuple[float, float, bool]]:
    """The four mollifier inequalities on J as {name: (lhs, rhs, lhs <= (1 + slack) rhs)}.

    stability:  ||phi^eps||_{p,J} <= ||phi||_{p,J_eps}
    sup:        ||phi^eps||_{inf,J} <= eps^{-1/p} ||phi||_{p,J_eps}
    approx:     ||phi - phi^eps||_{p,J} <= omega_p(eps; phi, J)
    derivative: ||(phi^eps)'||_{p,J} <= eps^{-1} omega_p(eps; phi, J) ||w'||_1
    """
    lo, hi = J
    Je = (lo - eps, hi + eps)
    x = _eval_grid(W, J, eps)
    pe = convolve(W, eps, x)
    dpe = convolve(W, eps, x, order=1)
    phi = _call(W, x)
    norm_Je = lp_norm(W, Je, p)
    om = modulus_continuity(W, eps, p, J)
    rows = {
        "stability": (_grid_norm(x, pe, p), norm_Je),
        "sup": (float(np.max(np.abs(pe))), eps ** (-1.0 / p) * norm_Je),
        "approx": (_grid_norm(x, phi - pe, p), om),
        "derivative": (_grid_norm(x, dpe, p), om / eps * bump_l1_norms(1)),
    }
    return {k: (a, b, bool(a <= (1.0 + slack) * b + 1e-14)) for k, (a, b) in rows.items()}


def _side_part(W: RoughPart, side: int) -> RoughPart:
    """chi_{+-} W as a rough part with 0 added as a breakpoint."""
    f = W.func
    if side > 0:
        g = lambda x: np.where(np.asarray(x) >= 0, f(np.asarray(x, dtype=float)), 0.0)
    else:
        g = lambda x: np.where(np.asarray(x) < 0, f(np.asarray(x, dtype=float)), 0.0)
    return RoughPart(
        g,
        breakpoints=tuple(sorted(set(W.breakpoints) | {0.0})),
        support=W.support,
        beta_pm=W.beta_pm,
        gamma_pm=W.gamma_pm,
        integer_breaks=W.integer_breaks,
    )


def _near_support(W: RoughPart, x: np.ndarray, eps: float) -> np.ndarray:
    if W.support is None:
        return np.ones(x.shape, dtype=bool)
    a, b = W.support
    return (x > a - eps) & (x < b + eps)


def mollified_pieces(split: SingularSplit, lam: float, spec: MollifySpec):
    """[(rough part, eps)] for chi_- W1, chi_+ W1 and W2 (zero parts dropped)."""
    em, ep, e0 = spec.eps(lam)
    out = []
    if not split.w1.is_zero():
        out.append((_side_part(split.w1, -1), em))
        out.append((_side_part(split.w1, +1), ep))
    if not split.w2.is_zero():
        out.append((split.w2, e0))
    return out


def mollified_potential(split: SingularSplit, lam: float, spec: Optional[MollifySpec] = None) -> Potential:
    """V~ = V + (chi_- W1)^{eps_-} + (chi_+ W1)^{eps_+} + W2^{eps_0}, derivatives up to order 2."""
    spec = spec or MollifySpec()
    v = split.v_regular
    pieces = mollified_pieces(split, lam, spec)

    def func(m, x):
        if m > 2:
            raise MollifyError("mollified parts support derivatives up to order 2")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        val = np.asarray(v.eval(m, x), dtype=complex).copy()
        for W, e in pieces:
            near = _near_support(W, x, e)
            if np.any(near):
                val[near] += convolve(W, e, x[near], order=m)
        return val

    em, ep, e0 = spec.eps(lam)
    return Potential(
        name=f"{split.name}_mollified",
        func=func,
        max_order=2,
        domain=v.domain,
        nu_minus=v.nu_minus,
        nu_plus=v.nu_plus,
        bounded_minus=v.bounded_minus,
        bounded_plus=v.bounded_plus,
        eps1=v.eps1,
        eps2=v.eps2,
        gamma_im=v.gamma_im,
        gamma_pm=v.gamma_pm,
        beta_re=v.beta_re,
        params={"lam": float(abs(lam)), "eps": (em, ep, e0), **split.params},
        breakpoints=tuple(b for W, _ in pieces for b in W.breakpoints),
    )


def mollified_w(split: SingularSplit, lam: float, spec: Optional[MollifySpec] = None) -> Callable[[np.ndarray], np.ndarray]:
    """x -> W~(x), the mollified rough part alone."""
    spec = spec or MollifySpec()
    pieces = mollified_pieces(split, lam, spec)

    def wt(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape, dtype=complex)
        for W, e in pieces:
            near = _near_support(W, x, e)
            if np.any(near):
                out[near] += convolve(W, e, x[near])
        return out

    return wt


def size_bound_ratio(split: SingularSplit, lam: float, x, spec: Optional[MollifySpec] = None) -> float:
    """max over x of |Im (chi W1)^eps(x)| / |Im V(x)| where Im V != 0 (0 when W1 vanishes)."""
    spec = spec or MollifySpec()
    if split.w1.is_zero():
        return 0.0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    em, ep, _ = spec.eps(lam)
    w = np.where(x < 0, convolve(_side_part(split.w1, -1), em, x), convolve(_side_part(split.w1, +1), ep, x))
    iv = np.abs(split.v_regular.eval(0, x).imag)
    ok = iv > 0
    return float(np.max(np.abs(w.imag[ok]) / iv[ok])) if np.any(ok) else 0.0
