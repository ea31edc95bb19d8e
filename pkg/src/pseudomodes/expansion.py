"""Numerical evaluation of the WKB expansion on graded grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cutoff import CutoffSpec, bump_eval
from .potentials import Potential
from .symbolic_wkb import TermSum, gen_exponent_derivative, gen_psi_prime, gen_remainder

__all__ = [
    "ExpansionConfig",
    "PseudomodeGrid",
    "ExpansionError",
    "BranchCutError",
    "QuadratureError",
    "CompiledTermSum",
    "compiled",
    "eval_termsum",
    "cumulative_psi",
    "graded_nodes",
    "assemble",
    "sqrt_res",
]


class ExpansionError(RuntimeError):
    pass


class BranchCutError(ExpansionError):
    """lambda - V(x) touches the negative real axis."""


class QuadratureError(ExpansionError):
    pass


@dataclass(frozen=True)
class ExpansionConfig:
    """n: number of psi terms beyond psi_{-1}; base_point: x0 with psi_k(x0) = 0."""

    n: int = 2
    base_point: float = 0.0
    quad_tol: float = 1e-10
    min_nodes: int = 2000
    nodes_per_unit: float = 40.0
    max_nodes: int = 400_000
    gl_order: int = 8
    max_refine: int = 30

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if not 1e-14 < self.quad_tol < 1e-3:
            raise ValueError("quad_tol must lie in (1e-14, 1e-3)")


class CompiledTermSum:
    """Vectorised numeric evaluator for a TermSum."""

    def __init__(self, s: TermSum):
        self.terms = [(complex(t.coeff), t.mono, t.lam_half_pow, t.res_half_pow) for t in s]
        self.max_order = s.max_derivative()

    def __call__(self, D: np.ndarray, sqrt_lam: complex, R: np.ndarray, scale: Optional[np.ndarray] = None) -> np.ndarray:
        """Sum over terms of c prod D[i]^a * sqrt_lam^p * R^q.

        ``D`` holds V^(0..M) at the points, shape (M + 1, npts).
        """
        out = np.zeros(R.shape, dtype=complex)
        rpow: Dict[int, np.ndarray] = {}
        dpow: Dict[Tuple[int, int], np.ndarray] = {}
        for c, mono, p, q in self.terms:
            if q not in rpow:
                rpow[q] = R**q if q >= 0 else 1.0 / R ** (-q)
            term = c * (sqrt_lam**p) * rpow[q]
            for i, a in mono:
                key = (i, a)
                if key not in dpow:
                    dpow[key] = D[i] ** a
                term = term * dpow[key]
            out += term
        return out


@lru_cache(maxsize=None)
def _compiled_psi(k: int) -> CompiledTermSum:
    return CompiledTermSum(gen_psi_prime(k))


@lru_cache(maxsize=None)
def _compiled_rem(n: int) -> CompiledTermSum:
    return CompiledTermSum(gen_remainder(n))


@lru_cache(maxsize=None)
def _compiled_exp(n: int) -> CompiledTermSum:
    return CompiledTermSum(gen_exponent_derivative(n))


def compiled(s: TermSum) -> CompiledTermSum:
    return CompiledTermSum(s)


def sqrt_res(lam: complex, V: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Principal (lam - V)^{1/2}, rejecting points on the negative real axis."""
    w = lam - np.asarray(V, dtype=complex)
    bad = (w.real <= 0) & (np.abs(w.imag) <= tol * np.maximum(np.abs(w), 1e-300))
    if np.any(bad):
        raise BranchCutError(f"lambda - V(x) on the branch cut at {int(np.sum(bad))} points")
    return np.sqrt(w)


def eval_termsum(s: TermSum, p: Potential, x, lam: complex):
    """Numeric value of a term sum at x (scalar or array)."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    D = p.derivatives(arr, max(s.max_derivative(), 0))
    R = sqrt_res(complex(lam), D[0])
    val = CompiledTermSum(s)(D, np.sqrt(complex(lam)), R)
    return complex(val[0]) if np.ndim(x) == 0 else val


# ---------------------------------------------------------------------------
# quadrature


def _integrand_factory(p: Potential, lam: complex, k: int):
    """Return F(x) with psi_k(x) = int F; k = -1 returns lam^{1/2} psi'_{-1} minus its linear part."""
    sl = np.sqrt(complex(lam))
    if k == -1:

        def F(x):
            V = p.derivatives(x, 0)[0]
            R = sqrt_res(lam, V)
            return 1j * (-V) / (R + sl)

        return F
    c = _compiled_psi(k)
    order = max(c.max_order, 0)

    def F(x):
        D = p.derivatives(x, order)
        R = sqrt_res(lam, D[0])
        return c(D, sl, R)

    return F


def _panel_integrals(F, a: np.ndarray, b: np.ndarray, m: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre m and 2m point estimates on panels [a, b], plus int |F|."""
    t1, w1 = np.polynomial.legendre.leggauss(m)
    t2, w2 = np.polynomial.legendre.leggauss(2 * m)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x1 = mid[:, None] + half[:, None] * t1[None, :]
    x2 = mid[:, None] + half[:, None] * t2[None, :]
    f1 = F(x1.ravel()).reshape(x1.shape)
    f2 = F(x2.ravel()).reshape(x2.shape)
    i1 = half * (f1 @ w1)
    i2 = half * (f2 @ w2)
    iabs = half * (np.abs(f2) @ w2)
    return i1, i2, iabs


def _adaptive_panels(F, a: np.ndarray, b: np.ndarray, tol: float, m: int, max_refine: int) -> np.ndarray:
    """Integral of F over each [a_i, b_i] with local bisection until GL(m) and GL(2m) agree.

    A panel is accepted when the estimates agree to ``tol`` relative to its own
    int |F|, or to tol * 1e-3 of the global int |F| prorated by panel length;
    the latter stops endless bisection where F is exponentially small.
    """
    result = np.zeros(a.shape, dtype=complex)
    owner = np.arange(a.size)
    aa, bb = a.copy(), b.copy()
    scale = None
    length = float(np.sum(b - a)) or 1.0
    for level in range(max_refine + 1):
        if aa.size == 0:
            return result
        i1, i2, iabs = _panel_integrals(F, aa, bb, m)
        if scale is None:
            scale = float(np.sum(iabs)) / length
        err = np.abs(i2 - i1)
        ok = err <= tol * np.maximum(iabs, 1e-3 * scale * (bb - aa)) + 1e-300
        np.add.at(result, owner[ok], i2[ok])
        bad = ~ok
        if not np.any(bad):
            return result
        if level == max_refine:
            worst = int(np.argmax(np.where(bad, err, -1)))
            raise QuadratureError(
                f"quadrature did not converge on [{aa[worst]:.6g}, {bb[worst]:.6g}] (err {err[worst]:.3g})"
            )
        mid = 0.5 * (aa[bad] + bb[bad])
        owner = np.concatenate([owner[bad], owner[bad]])
        aa, bb = np.concatenate([aa[bad], mid]), np.concatenate([mid, bb[bad]])
    return result


def _cumulative_from(nodes: np.ndarray, base_idx: int, panel_vals: np.ndarray) -> np.ndarray:
    cum = np.concatenate([[0.0 + 0.0j], np.cumsum(panel_vals)])
    return cum - cum[base_idx]


def _with_base(nodes: np.ndarray, x0: float) -> Tuple[np.ndarray, int, np.ndarray]:
    """Insert x0 into sorted nodes; return (extended nodes, index of x0, mask of original nodes)."""
    nodes = np.asarray(nodes, dtype=float)
    idx = int(np.searchsorted(nodes, x0))
    if idx < nodes.size and nodes[idx] == x0:
        return nodes, idx, np.ones(nodes.size, dtype=bool)
    ext = np.insert(nodes, idx, x0)
    mask = np.ones(ext.size, dtype=bool)
    mask[idx] = False
    return ext, idx, mask


def cumulative_psi(p: Potential, lam: complex, cfg: ExpansionConfig, k: int, nodes) -> np.ndarray:
    """psi_k(node) = int_{x0}^{node} psi'_k, with psi_k(x0) = 0.

    k = 0 uses the closed form (1/4) log((lam - V(x)) / (lam - V(x0))) with a
    continuous branch along the nodes; other k use panel Gauss-Legendre
    quadrature with local refinement.  For k = -1 the returned array is
    psi_{-1} itself (not multiplied by lam^{1/2}).
    """
    lam = complex(lam)
    x0 = cfg.base_point
    ext, bidx, mask = _with_base(np.asarray(nodes, dtype=float), x0)
    if k == 0:
        V = p.derivatives(ext, 0)[0]
        w = lam - V
        sqrt_res(lam, V)
        logs = np.log(np.abs(w)) + 1j * np.unwrap(np.angle(w))
        return (0.25 * (logs - logs[bidx]))[mask]
    F = _integrand_factory(p, lam, k)
    panels = _adaptive_panels(F, ext[:-1], ext[1:], cfg.quad_tol, cfg.gl_order, cfg.max_refine)
    cum = _cumulative_from(ext, bidx, panels)
    if k == -1:
        sl = np.sqrt(lam)
        cum = (1j * sl * (ext - x0) + cum) / sl
    return cum[mask]


# ---------------------------------------------------------------------------
# grids


def _exponent_rate(p: Potential, lam: complex, x: np.ndarray) -> np.ndarray:
    V = p.derivatives(x, 0)[0]
    R = np.sqrt(lam - V)
    return np.abs(R.imag)


def graded_nodes(
    p: Potential,
    lam: complex,
    cutoff: CutoffSpec,
    cfg: ExpansionConfig,
    features: Sequence[Tuple[float, float]] = (),
) -> np.ndarray:
    """Nodes on the closure of J with density set by the local decay rate.

    Density is the max of: uniform (min_nodes over J), nodes_per_unit times
    |Re E'(x)| ~ |Im (lam - V)^{1/2}|, 400 per transition width Delta, and
    40 per declared feature width.
    """
    lo, hi = cutoff.J
    L = hi - lo
    pieces = [np.linspace(lo, hi, 20001)]
    Dm, Dp = cutoff.Delta_minus, cutoff.Delta_plus
    pieces.append(np.linspace(lo, lo + Dm, 2001))
    pieces.append(np.linspace(hi - Dp, hi, 2001))
    for c, w in features:
        pieces.append(np.clip(np.linspace(c - 20 * w, c + 20 * w, 4001), lo, hi))
    pieces.append([cfg.base_point] if lo <= cfg.base_point <= hi else [])
    pilot = np.unique(np.concatenate(pieces))
    rate = _exponent_rate(p, lam, pilot)
    rho = np.full(pilot.shape, cfg.min_nodes / L)
    rho = np.maximum(rho, cfg.nodes_per_unit * rate)
    in_left = pilot <= lo + Dm
    in_right = pilot >= hi - Dp
    rho[in_left] = np.maximum(rho[in_left], 400.0 / Dm)
    rho[in_right] = np.maximum(rho[in_right], 400.0 / Dp)
    for c, w in features:
        near = np.abs(pilot - c) <= 20 * w
        rho[near] = np.maximum(rho[near], 40.0 / w)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(pilot))])
    total = cum[-1]
    N = int(min(max(np.ceil(total) + 1, cfg.min_nodes), cfg.max_nodes))
    if N % 2 == 0:
        N += 1
    nodes = np.interp(np.linspace(0.0, total, N), cum, pilot)
    nodes[0], nodes[-1] = lo, hi
    return np.unique(nodes)


# ---------------------------------------------------------------------------
# assembly


@dataclass
class PseudomodeGrid:
    """Sampled pseudomode f = xi g with g = exp(-E) and the residual pieces.

    ``bracket`` is the factor with residual_integrand = g * bracket, so that
    |residual| can be formed in log space even where g underflows.
    """

    lam: complex
    nodes: np.ndarray
    psi: Dict[int, np.ndarray]
    E: np.ndarray
    Ep: np.ndarray
    r_n: np.ndarray
    xi: np.ndarray
    xi_p: np.ndarray
    xi_pp: np.ndarray
    meta: CutoffSpec
    n: int
    extra_factor: Optional[np.ndarray] = None
    mode: str = "plain"
    info: dict = field(default_factory=dict)

    @property
    def log_abs_g(self) -> np.ndarray:
        return -self.E.real

    @property
    def g_vals(self) -> np.ndarray:
        return np.exp(-self.E)

    @property
    def g_prime_vals(self) -> np.ndarray:
        return -self.Ep * self.g_vals

    @property
    def f_vals(self) -> np.ndarray:
        return self.xi * self.g_vals

    @property
    def cut_bracket(self) -> np.ndarray:
        return -self.xi_pp + 2.0 * self.xi_p * self.Ep

    @property
    def rem_bracket(self) -> np.ndarray:
        return self.xi * self.r_n

    @property
    def extra_bracket(self) -> np.ndarray:
        if self.extra_factor is None:
            return np.zeros_like(self.E)
        return self.xi * self.extra_factor

    @property
    def bracket(self) -> np.ndarray:
        return self.cut_bracket + self.rem_bracket + self.extra_bracket

    @property
    def residual_integrand(self) -> np.ndarray:
        return self.g_vals * self.bracket


def _needed_order(n: int) -> int:
    return n + 1


def assemble(
    p: Potential,
    lam: complex,
    cfg: ExpansionConfig,
    cutoff: CutoffSpec,
    nodes: Optional[np.ndarray] = None,
    features: Sequence[Tuple[float, float]] = (),
    restrict_to_J: bool = True,
) -> PseudomodeGrid:
    """Build g, g', xi and the residual integrand on a graded grid over J.

    g' is taken from the analytic identity g' = -E' g; the residual is
    -xi'' g - 2 xi' g' + xi r_n g.
    """
    lam = complex(lam)
    if _needed_order(cfg.n) > p.max_order:
        raise ExpansionError(f"n={cfg.n} needs V^({cfg.n + 1}) but max_order={p.max_order}")
    if nodes is None:
        nodes = graded_nodes(p, lam, cutoff, cfg, features)
    else:
        nodes = np.asarray(nodes, dtype=float)
        if restrict_to_J:
            lo, hi = cutoff.J
            nodes = nodes[(nodes >= lo) & (nodes <= hi)]
    sl = np.sqrt(lam)
    psi: Dict[int, np.ndarray] = {}
    E = np.zeros(nodes.shape, dtype=complex)
    for k in range(-1, cfg.n):
        psi[k] = cumulative_psi(p, lam, cfg, k, nodes)
        E = E + sl ** (-k) * psi[k]
    D = p.derivatives(nodes, cfg.n + 1)
    R = sqrt_res(lam, D[0])
    Ep = _compiled_exp(cfg.n)(D, sl, R)
    r = _compiled_rem(cfg.n)(D, sl, R)
    return PseudomodeGrid(
        lam=lam,
        nodes=nodes,
        psi=psi,
        E=E,
        Ep=Ep,
        r_n=r,
        xi=bump_eval(cutoff, nodes, 0),
        xi_p=bump_eval(cutoff, nodes, 1),
        xi_pp=bump_eval(cutoff, nodes, 2),
        meta=cutoff,
        n=cfg.n,
    )
