"""Cut-off functions and the lambda-dependent widths delta, Delta."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .potentials import Potential, smooth_step

__all__ = [
    "CutoffSpec",
    "CutoffError",
    "widths_real_axis",
    "widths_curve",
    "widths_semiclassical",
    "widths_decaying",
    "bump_eval",
    "bump_constants",
    "find_crossing",
]

# Frozen sup-norm constants of this particular bump: |xi'| Delta and |xi''| Delta^2.
BUMP_C1 = 2.5
BUMP_C2 = 12.0


class CutoffError(ValueError):
    """No admissible width could be determined."""


@dataclass(frozen=True)
class CutoffSpec:
    """Plateau xi = 1 on J' and xi = 0 outside J = (center - dm, center + dp)."""

    regime: str
    delta_minus: float
    delta_plus: float
    Delta_minus: float
    Delta_plus: float
    center: float = 0.0
    bump_constants: Tuple[float, float] = (BUMP_C1, BUMP_C2)
    x_b: Optional[float] = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 < self.Delta_minus < self.delta_minus and 0 < self.Delta_plus < self.delta_plus):
            raise CutoffError("need 0 < Delta < delta on both sides")

    @property
    def J(self) -> Tuple[float, float]:
        return (self.center - self.delta_minus, self.center + self.delta_plus)

    @property
    def J_inner(self) -> Tuple[float, float]:
        return (
            self.center - self.delta_minus + self.Delta_minus,
            self.center + self.delta_plus - self.Delta_plus,
        )

    def xi(self, x, order: int = 0):
        return bump_eval(self, x, order)


def bump_eval(spec: CutoffSpec, x, order: int = 0):
    """xi^(order)(x), order in {0, 1, 2}, product of two smooth steps."""
    x = np.asarray(x, dtype=float)
    lo = spec.center - spec.delta_minus
    hi = spec.center + spec.delta_plus
    tl = (x - lo) / spec.Delta_minus
    tr = (hi - x) / spec.Delta_plus
    a0, b0 = smooth_step(tl, 0), smooth_step(tr, 0)
    if order == 0:
        return a0 * b0
    a1 = smooth_step(tl, 1) / spec.Delta_minus
    b1 = -smooth_step(tr, 1) / spec.Delta_plus
    if order == 1:
        return a1 * b0 + a0 * b1
    if order == 2:
        a2 = smooth_step(tl, 2) / spec.Delta_minus**2
        b2 = smooth_step(tr, 2) / spec.Delta_plus**2
        return a2 * b0 + 2 * a1 * b1 + a0 * b2
    raise ValueError("order must be 0, 1 or 2")


def bump_constants(npts: int = 200001) -> Tuple[float, float]:
    """max |S'| and max |S''| on a dense grid of (0, 1)."""
    t = np.linspace(0.0, 1.0, npts)[1:-1]
    return float(np.max(np.abs(smooth_step(t, 1)))), float(np.max(np.abs(smooth_step(t, 2))))


def _bracket_x(x) -> np.ndarray:
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


def find_crossing(fun, target: float, start: float = 1.0, rtol: float = 1e-10, max_doublings: int = 200):
    """Smallest-scale crossing fun(d) = target found by doubling then bisection.

    Scans d = start, 2 start, ... until fun(d) >= target, then bisects on the
    last doubling interval (or on (0, start] if already exceeded at start).
    """
    lo, hi = 0.0, start
    if fun(hi) < target:
        for _ in range(max_doublings):
            lo, hi = hi, 2 * hi
            if fun(hi) >= target:
                break
        else:
            raise CutoffError("no crossing found")
    else:
        # already above at start: halve to find a bracket
        for _ in range(max_doublings):
            if fun(hi / 2) < target:
                lo = hi / 2
                break
            hi = hi / 2
        else:
            raise CutoffError("defining function exceeds target arbitrarily close to 0")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if fun(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def widths_real_axis(p: Potential, lam: float, eps1: Optional[float] = None, eps2: Optional[float] = None) -> CutoffSpec:
    """Widths for lambda > 0 centred at 0.

    Unbounded side: smallest delta with |Im V(+-delta)|^2 / <delta>^{4 nu + 2 eps1 + 2} = lam,
    Delta = delta^{-nu}/4.  Bounded side: delta = lam^{(1 + eps2)/2}, Delta = delta / 4.
    """
    lam = float(np.real(lam))
    if lam <= 0:
        raise CutoffError("lambda must be positive on the real axis")
    e1 = p.eps1 if eps1 is None else eps1
    e2 = p.eps2 if eps2 is None else eps2
    out = {}
    for side, sgn, nu, bounded in (("minus", -1.0, p.nu_minus, p.bounded_minus), ("plus", 1.0, p.nu_plus, p.bounded_plus)):
        if bounded:
            d = lam ** ((1.0 + e2) / 2.0)
            out[side] = (d, d / 4.0)
            continue

        def fun(dd, sgn=sgn, nu=nu):
            v = p.eval(0, sgn * dd)
            return abs(v.imag) ** 2 / _bracket_x(dd) ** (4 * nu + 2 * e1 + 2)

        try:
            d = find_crossing(fun, lam)
        except CutoffError as exc:
            raise CutoffError(f"no crossing on the {side} side for lambda={lam:g}") from exc
        D = d ** (-nu) / 4.0
        if D >= d:
            D = d / 4.0
        out[side] = (d, D)
    return CutoffSpec(
        regime="real-axis",
        delta_minus=out["minus"][0],
        delta_plus=out["plus"][0],
        Delta_minus=out["minus"][1],
        Delta_plus=out["plus"][1],
        center=0.0,
        info={"eps1": e1, "eps2": e2},
    )


def _monotone_root(fun, lo: float, hi: float, rtol: float = 1e-14):
    flo, fhi = fun(lo), fun(hi)
    if np.sign(flo) == np.sign(fhi):
        raise CutoffError("bracket invalid: no sign change")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
        if abs(hi - lo) <= rtol * max(abs(lo), abs(hi), 1e-300):
            break
    return 0.5 * (lo + hi)


def turning_point(p: Potential, b: float) -> float:
    """Solve Im V(x_b) = b on the monotone tail.

    For the negative half-line (singular at 0-) the tail is x -> 0-.
    """
    f = lambda x: p.eval(0, x).imag - b
    if p.domain == "half-line-negative":
        # Im V increases towards 0-; bracket in (-1, 0)
        hi = -1e-300
        lo = -1.0
        while f(lo) > 0:
            lo *= 2
            if lo < -1e12:
                raise CutoffError("no crossing")
        hi = lo / 2
        while f(hi) < 0:
            hi /= 2
            if hi > -1e-300:
                raise CutoffError("no crossing")
        return _monotone_root(f, lo, hi)
    lo = 1.0 if p.domain != "half-line-negative" else -1.0
    if f(lo) > 0:
        lo = 0.0 if p.domain == "full-line" else 1e-12
        if f(lo) > 0:
            raise CutoffError("Im V exceeds b at the start of the tail")
    hi = max(2 * lo, 2.0)
    while f(hi) < 0:
        lo, hi = hi, 2 * hi
        if hi > 1e300:
            raise CutoffError("no crossing")
    # verify monotonicity on the bracket
    xs = np.linspace(lo, hi, 65)
    im = np.array([p.eval(0, x).imag for x in xs])
    if np.any(np.diff(im) < -1e-12 * np.max(np.abs(im))):
        raise CutoffError("non-monotone tail detected")
    return _monotone_root(f, lo, hi)


def widths_curve(p: Potential, b: float, singular: Optional[bool] = None) -> CutoffSpec:
    """Turning point x_b with delta = x_b^{-nu}/2 (or |x_b|/2 for the singular case), Delta = delta/4."""
    xb = turning_point(p, b)
    sing = p.domain == "half-line-negative" if singular is None else singular
    if sing:
        d = abs(xb) / 2.0
    else:
        d = abs(xb) ** (-p.nu_plus) / 2.0
    return CutoffSpec(
        regime="singular" if sing else "curve",
        delta_minus=d,
        delta_plus=d,
        Delta_minus=d / 4.0,
        Delta_plus=d / 4.0,
        center=xb,
        x_b=xb,
        info={"b": b},
    )


def widths_semiclassical(h: float, x0: float = 0.0, eps: float = 0.5) -> CutoffSpec:
    """delta = h^{(1 - eps)/2} around x0, Delta = delta/4."""
    d = h ** ((1.0 - eps) / 2.0)
    return CutoffSpec(
        regime="semiclassical",
        delta_minus=d,
        delta_plus=d,
        Delta_minus=d / 4.0,
        Delta_plus=d / 4.0,
        center=x0,
        x_b=x0,
        info={"h": h, "eps": eps},
    )


def widths_decaying(a: float, b: float, gamma: float) -> CutoffSpec:
    """delta at the log-midpoint of the window a^{1/(2(1-gamma))} << delta << b^{-1/gamma}."""
    lo = a ** (1.0 / (2.0 * (1.0 - gamma)))
    hi = b ** (-1.0 / gamma) if b > 0 else lo * 1e6
    if hi <= lo:
        raise CutoffError("empty decaying window (need b a^{gamma/(2(1-gamma))} < 1)")
    d = float(np.sqrt(lo * hi))
    return CutoffSpec(
        regime="decaying",
        delta_minus=d,
        delta_plus=d,
        Delta_minus=d / 4.0,
        Delta_plus=d / 4.0,
        center=0.0,
        info={"window": (lo, hi)},
    )
