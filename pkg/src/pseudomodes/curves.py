"""lambda-paths for each regime and pseudomode assembly along them.

Regimes: real-axis (lambda -> +infinity), curve (lambda = a + ib with a
turning point x_b), decaying potentials, semiclassical rescaling
V = U/h^2, lambda = z/h^2, and a strong local singularity on the negative
half-line.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cutoff import (
    CutoffSpec,
    turning_point,
    widths_curve,
    widths_decaying,
    widths_real_axis,
    widths_semiclassical,
)
from .expansion import (
    CompiledTermSum,
    ExpansionConfig,
    PseudomodeGrid,
    assemble,
    cumulative_psi,
    sqrt_res,
)
from .mollify import MollifySpec, mollified_pieces, mollified_potential, mollified_w
from .potentials import Potential, SingularSplit
from .residual import log_l2_norm
from .symbolic_wkb import TermSum, gen_exponent_derivative, gen_remainder, mono_factors

__all__ = [
    "REGIMES",
    "MODES",
    "PathPoint",
    "LambdaPath",
    "PathError",
    "admissible_a_range",
    "singular_exponent_window",
    "make_path",
    "cutoff_for",
    "assemble_point",
    "assemble_on_path",
    "head_term",
    "semiclassical_ratios",
    "turning_sign_profile",
]

REGIMES = ("real-axis", "curve", "decaying", "semiclassical", "singular")
MODES = ("plain", "ignore-W", "extra-term", "mollified")


class PathError(ValueError):
    """Invalid regime parameters or a lambda outside the admissible window."""


@dataclass(frozen=True)
class PathPoint:
    lam: complex
    a: float
    b: float
    x_b: Optional[float] = None
    h: Optional[float] = None


@dataclass
class LambdaPath:
    regime: str
    points: List[PathPoint]
    params: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise PathError(f"unknown regime {self.regime!r}")
        self.points = sorted(self.points, key=lambda q: abs(q.lam))

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([q.lam for q in self.points])

    def __len__(self):
        return len(self.points)


# ---------------------------------------------------------------------------
# admissible windows


def singular_exponent_window(alpha: float, eps: float = 0.1) -> Tuple[float, float]:
    """Exponents (lo, hi) with b^lo <~ a <~ b^hi for c/x^2 + i/|x|^alpha."""
    return (2.0 / 3.0) * (1.0 + 1.0 / alpha) + eps, 2.0 * (1.0 - 1.0 / alpha) - eps


def admissible_a_range(
    p: Potential,
    b: float,
    x_b: float,
    delta: float,
    singular: bool = False,
    eps: float = 0.1,
) -> Tuple[float, float]:
    """Window for a = Re lambda with unit implicit constants.

    Regular: b^{2/3} |x_b|^{2 nu/3} <= a - max_J Re V <= b^2 |x_b|^{-4 nu - 4 eps1 - 2}.
    Singular (c/x^2 + i/|x|^alpha): b^{(2/3)(1 + 1/alpha) + eps} to b^{2(1 - 1/alpha) - eps}.
    """
    if singular:
        alpha = float(p.params.get("alpha", 3.0))
        e_lo, e_hi = singular_exponent_window(alpha, eps)
        lo, hi = b**e_lo, b**e_hi
    else:
        nu = p.nu_plus if x_b >= 0 else p.nu_minus
        ax = max(abs(x_b), 1.0)
        lo = b ** (2.0 / 3.0) * ax ** (2.0 * nu / 3.0)
        hi = b**2 * ax ** (-4.0 * nu - 4.0 * p.eps1 - 2.0)
    xs = np.linspace(x_b - delta, x_b + delta, 257)
    if p.domain == "half-line-negative":
        xs = xs[xs < 0]
    re_max = float(np.max(p.eval(0, xs).real))
    lo = lo + max(re_max, 0.0)
    if not lo < hi:
        raise PathError(f"empty admissible window for b={b:g}")
    return lo, hi


# ---------------------------------------------------------------------------
# paths


def _logspace(lo: float, hi: float, num: int) -> np.ndarray:
    if not (0 < lo < hi) or num < 2:
        raise PathError("need 0 < lo < hi and at least 2 points")
    return np.logspace(np.log10(lo), np.log10(hi), int(num))


def make_path(regime: str, p: Optional[Potential], params: Dict) -> LambdaPath:
    """Log-spaced lambda-path for the regime.

    real-axis: lam_min, lam_max, num (or an explicit list ``lambdas``).
    curve / singular: b_min, b_max, num, a_exponent (a = a_coeff b^a_exponent).
    decaying: a_min, a_max, num, b_exponent (b = a^{-b_exponent}), gamma.
    semiclassical: h_list (or h_exp_min/h_exp_max for h = 2^-k), z, x0.
    """
    params = dict(params)
    if regime == "real-axis":
        if "lambdas" in params:
            lams = [float(l) for l in params["lambdas"]]
            if not lams or any(l <= 0 for l in lams):
                raise PathError("lambdas must be a non-empty list of positive values")
        else:
            lams = _logspace(params["lam_min"], params["lam_max"], params.get("num", 8))
        return LambdaPath(regime, [PathPoint(complex(l), float(l), 0.0) for l in lams], params)
    if regime in ("curve", "singular"):
        if p is None:
            raise PathError("curve regimes need a potential")
        bs = _logspace(params["b_min"], params["b_max"], params.get("num", 8))
        ex = float(params.get("a_exponent", 1.0))
        coef = float(params.get("a_coeff", 1.0))
        sing = regime == "singular"
        if sing:
            lo, hi = singular_exponent_window(float(p.params.get("alpha", 3.0)), params.get("eps", 0.1))
            if not lo < ex < hi:
                raise PathError(f"a-exponent {ex} outside ({lo:.4g}, {hi:.4g})")
        pts = []
        for b in bs:
            spec = widths_curve(p, float(b), singular=sing)
            a = coef * b**ex
            a_lo, a_hi = admissible_a_range(p, float(b), spec.x_b, spec.delta_plus, singular=sing, eps=params.get("eps", 0.1))
            if not a_lo <= a <= a_hi:
                raise PathError(f"a={a:.4g} outside admissible window [{a_lo:.4g}, {a_hi:.4g}] at b={b:.4g}")
            pts.append(PathPoint(complex(a, b), float(a), float(b), spec.x_b))
        return LambdaPath(regime, pts, params)
    if regime == "decaying":
        gamma = float(params.get("gamma", p.params.get("gamma", 0.5) if p is not None else 0.5))
        if not 0 < gamma < 1:
            raise PathError("decaying regime needs gamma in (0, 1)")
        q = float(params.get("b_exponent", 0.75))
        if q <= gamma / (2.0 * (1.0 - gamma)):
            raise PathError("b a^{gamma/(2(1-gamma))} must tend to 0: b_exponent too small")
        a_s = _logspace(params["a_min"], params["a_max"], params.get("num", 8))
        params["gamma"] = gamma
        return LambdaPath(regime, [PathPoint(complex(a, a**-q), float(a), float(a**-q)) for a in a_s], params)
    if regime == "semiclassical":
        if "h_list" in params:
            hs = [float(h) for h in params["h_list"]]
        else:
            hs = [2.0**-k for k in range(int(params.get("h_exp_min", 3)), int(params.get("h_exp_max", 10)) + 1)]
        if any(h <= 0 for h in hs) or len(hs) < 2:
            raise PathError("need at least two positive h values")
        z = complex(params.get("z", 1.0))
        x0 = float(params.get("x0", 0.0))
        pts = [PathPoint(z / h**2, (z / h**2).real, (z / h**2).imag, x0, h) for h in hs]
        return LambdaPath(regime, pts, params)
    raise PathError(f"unknown regime {regime!r}")


# ---------------------------------------------------------------------------
# assembly


def scaled_potential(U: Potential, h: float) -> Potential:
    """V = U / h^2 with the same metadata."""
    f = U.func
    jet = U.jet
    return replace(
        U,
        name=f"{U.name}/h^2",
        func=lambda m, x: np.asarray(f(m, x), dtype=complex) / h**2,
        jet=(lambda z: jet(z) * (1.0 / h**2)) if jet is not None else None,
        params={**U.params, "h": h},
    )


def cutoff_for(path: LambdaPath, point: PathPoint, p: Potential) -> CutoffSpec:
    r = path.regime
    if r == "real-axis":
        return widths_real_axis(p, point.lam.real, path.params.get("eps1"), path.params.get("eps2"))
    if r in ("curve", "singular"):
        return widths_curve(p, point.b, singular=(r == "singular"))
    if r == "decaying":
        return widths_decaying(point.a, point.b, path.params["gamma"])
    if r == "semiclassical":
        return widths_semiclassical(point.h, point.x_b or 0.0, path.params.get("eps", 0.5))
    raise PathError(f"unknown regime {r!r}")


def head_term(n: int) -> TermSum:
    """The part of r_n containing V^(n+1)."""
    r = gen_remainder(n)
    return TermSum(tuple((k, c) for k, c in r.data if any(o == n + 1 for o, _ in k[0])))


def _split_features(split: SingularSplit, lo: float, hi: float, width: float = 1e-3):
    """Grid features resolving the compact supports and breakpoints of W1, W2."""
    feats = []
    for W in (split.w1, split.w2):
        if W.is_zero():
            continue
        if W.support is not None:
            a, b = W.support
            feats.append((0.5 * (a + b), (b - a) / 40.0))
        feats += [(x, width) for x in W.breaks(max(lo, -1e3), min(hi, 1e3))]
    return feats


def assemble_point(
    path: LambdaPath,
    point: PathPoint,
    pot: Union[Potential, SingularSplit],
    cfg: ExpansionConfig,
    mode: str = "plain",
    mollify: Optional[MollifySpec] = None,
) -> PseudomodeGrid:
    """One pseudomode grid; the extra factor carries W (ignore-W), W - W~ (mollified)
    or the V^(n+1) head of r_n (extra-term)."""
    if mode not in MODES:
        raise PathError(f"unknown mode {mode!r}")
    split = pot if isinstance(pot, SingularSplit) else None
    if mode in ("ignore-W", "mollified") and split is None:
        raise PathError(f"mode {mode} needs a singular split")
    base = split.v_regular if split is not None else pot
    if path.regime == "semiclassical":
        base = scaled_potential(base, point.h)
    cutoff = cutoff_for(path, point, base)
    if path.regime in ("curve", "singular", "semiclassical"):
        cfg = replace(cfg, base_point=float(point.x_b))
    lam = point.lam
    if mode == "plain" or (mode == "extra-term" and split is None):
        g = assemble(base, lam, cfg, cutoff)
        g.mode = mode
        if mode == "extra-term":
            D = base.derivatives(g.nodes, cfg.n + 1)
            head = CompiledTermSum(head_term(cfg.n))(D, np.sqrt(complex(lam)), sqrt_res(complex(lam), D[0]))
            g.r_n = g.r_n - head
            g.extra_factor = head
        return g
    if mode == "ignore-W":
        g = assemble(base, lam, cfg, cutoff, features=_split_features(split, *cutoff.J))
        g.extra_factor = split.w(g.nodes)
        g.mode = mode
        return g
    if mode == "mollified":
        spec = mollify or MollifySpec()
        pm = mollified_potential(split, abs(lam), spec)
        lo, hi = cutoff.J
        feats = _split_features(split, lo, hi) + [
            (b, e)
            for W, e in mollified_pieces(split, abs(lam), spec)
            for b in (W.breaks(lo - e, hi + e))
        ]
        g = assemble(pm, lam, cfg, cutoff, features=feats)
        g.extra_factor = split.w(g.nodes) - mollified_w(split, abs(lam), spec)(g.nodes)
        g.mode = mode
        g.info["eps"] = spec.eps(abs(lam))
        return g
    raise PathError(f"mode {mode} not supported for this input")


def assemble_on_path(
    path: LambdaPath,
    pot: Union[Potential, SingularSplit],
    cfg: ExpansionConfig,
    mode: str = "plain",
    mollify: Optional[MollifySpec] = None,
    workers: int = 1,
) -> List[PseudomodeGrid]:
    """One grid per path point, in path order; points run on a thread pool."""
    job = lambda q: assemble_point(path, q, pot, cfg, mode, mollify)
    if workers <= 1:
        return [job(q) for q in path.points]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(job, path.points))


# ---------------------------------------------------------------------------
# semiclassical h-native evaluation


def _h_power_split(s: TermSum) -> Dict[int, CompiledTermSum]:
    """Group terms by the power of h they acquire under V = U/h^2, lam = z/h^2."""
    groups: Dict[int, list] = {}
    for k, c in s.data:
        mono, lp, rp = k
        groups.setdefault(-2 * mono_factors(mono) - lp - rp, []).append((k, c))
    return {e: CompiledTermSum(TermSum(tuple(v))) for e, v in groups.items()}


def _h_eval(s: TermSum, D: np.ndarray, sz: complex, R: np.ndarray, h: float, extra_power: int = 0) -> np.ndarray:
    out = np.zeros(R.shape, dtype=complex)
    for e, c in sorted(_h_power_split(s).items()):
        out += h ** (e + extra_power) * c(D, sz, R)
    return out


def semiclassical_ratios(
    U: Potential,
    z: complex,
    h: float,
    cfg: ExpansionConfig,
    x0: float = 0.0,
    eps: float = 0.5,
) -> Tuple[float, float, PseudomodeGrid]:
    """(h-problem ratio, scaled-problem ratio, scaled grid).

    The h-problem -h^2 f'' + (U - z) f is evaluated directly from U, z and
    powers of h on the nodes of the scaled problem (V = U/h^2, lam = z/h^2).
    """
    path = LambdaPath("semiclassical", [PathPoint(z / h**2, 0.0, 0.0, x0, h)], {"eps": eps})
    grid = assemble_point(path, path.points[0], U, cfg)
    x = grid.nodes
    z = complex(z)
    sz = np.sqrt(z)
    c0 = replace(cfg, base_point=x0)
    # E from U, z:  E = sum_k h^k z^{-k/2} psi_k[U, z]
    E = np.zeros(x.shape, dtype=complex)
    for k in range(-1, cfg.n):
        E = E + h**k * sz ** (-k) * cumulative_psi(U, z, c0, k, x)
    D = U.derivatives(x, cfg.n + 1)
    R = sqrt_res(z, D[0])
    Ep = _h_eval(gen_exponent_derivative(cfg.n), D, sz, R, h)
    h2r = _h_eval(gen_remainder(cfg.n), D, sz, R, h, extra_power=2)
    xi, xp, xpp = grid.xi, grid.xi_p, grid.xi_pp
    bracket = h**2 * (-xpp + 2.0 * xp * Ep) + xi * h2r
    lg = -E.real
    with np.errstate(divide="ignore"):
        lf = log_l2_norm(x, lg + np.log(np.abs(xi)))
        lres = log_l2_norm(x, lg + np.log(np.abs(bracket)))
        lf_s = log_l2_norm(x, grid.log_abs_g + np.log(np.abs(grid.xi)))
        lres_s = log_l2_norm(x, grid.log_abs_g + np.log(np.abs(grid.bracket)))
    return float(np.exp(lres - lf)), float(np.exp(lres_s - lf_s)), grid


def turning_sign_profile(p: Potential, lam: complex, x_b: float, xs) -> np.ndarray:
    """Re(lam^{1/2} psi'_{-1}(x)) = Re(i (lam - V)^{1/2}) = -Im (lam - V)^{1/2} on xs."""
    V = p.eval(0, np.asarray(xs, dtype=float))
    return -np.sqrt(complex(lam) - V).imag
