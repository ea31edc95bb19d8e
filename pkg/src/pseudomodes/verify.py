"""Acceptance checks grouped into suites, shared by the CLI and the test-suite.

Each check returns a :class:`Check` with the measured values and the
required tolerance; nothing here is tuned per outcome.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

import numpy as np

from .curves import assemble_on_path, make_path, semiclassical_ratios
from .cutoff import CutoffSpec, widths_real_axis
from .expansion import ExpansionConfig, assemble
from .mollify import modulus_continuity, mollifier_inequalities
from .oracle import cross_check, dirichlet_ground_state
from .potentials import RoughPart, make_builtin, split_singular
from .residual import ResidualReport, rate_fit, report
from .symbolic_wkb import (
    GaussianRational,
    TermSum,
    gen_psi_derivative,
    gen_remainder,
    structure_check,
)

__all__ = ["Check", "SUITES", "run_suite", "timed", "SWEEP_POTENTIALS", "real_axis_sweep", "expected_remainders"]


@dataclass
class Check:
    name: str
    passed: bool
    measured: str
    required: str
    seconds: float = 0.0
    details: Dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.measured} | required {self.required} [{self.seconds:.1f}s]"


def timed(fn: Callable[[], Check]) -> Check:
    t = time.perf_counter()
    c = fn()
    c.seconds = time.perf_counter() - t
    return c


# ---------------------------------------------------------------------------
# symbolic


def expected_remainders() -> Dict[int, TermSum]:
    """Frozen r_0, r_1, r_2 as exact term sums (derivative order, power) pairs over R = (lam - V)^{1/2}."""
    from fractions import Fraction as F

    def t(re, im, mono, res):
        return TermSum.single(GaussianRational(F(re), F(im)), mono, 0, res)

    r0 = t(0, F(-1, 2), ((1, 1),), -1)
    r1 = t(F(-1, 4), 0, ((2, 1),), -2) + t(F(-5, 16), 0, ((1, 2),), -4)
    r2 = (
        t(0, F(1, 8), ((3, 1),), -3)
        + t(0, F(9, 16), ((1, 1), (2, 1)), -5)
        + t(0, F(15, 32), ((1, 3),), -7)
        + t(F(1, 64), 0, ((2, 2),), -6)
        + t(F(5, 128), 0, ((1, 2), (2, 1)), -8)
        + t(F(25, 1024), 0, ((1, 4),), -10)
    )
    return {0: r0, 1: r1, 2: r2}


def check_symbolic_exactness() -> Check:
    exp = expected_remainders()
    ok = {n: gen_remainder(n) == exp[n] for n in range(3)}
    return Check(
        "symbolic-exactness",
        all(ok.values()),
        "r0,r1,r2 exact match: " + ", ".join(f"r{n}={'yes' if v else 'no'}" for n, v in ok.items()),
        "exact equality of Gaussian-rational term sums, < 1 s",
    )


def check_structure() -> Check:
    bad = []
    count = 0
    for k in range(-1, 5):
        for m in range(1, 7 - k):
            rep = structure_check(gen_psi_derivative(k, m), k, m)
            count += rep.checked
            if not rep.ok:
                bad.append((k, m, len(rep.violations)))
    return Check(
        "structure",
        not bad,
        f"{count} terms checked over k in [-1,4], m in [1,6-k]; violations: {bad or 'none'}",
        "template and constant-monomial exclusion hold everywhere, < 5 s",
    )


# ---------------------------------------------------------------------------
# envelopes


def check_constant_potential() -> Check:
    V0 = 2.0 + 1.5j
    p = make_builtin("constant", {"V0": V0})
    lam = 100.0
    cut = CutoffSpec("manual", 5.0, 5.0, 1.0, 1.0)
    worst = 0.0
    for n in range(7):
        g = assemble(p, lam, ExpansionConfig(n=n, min_nodes=4001), cut)
        lo, hi = cut.J_inner
        plateau = (g.nodes >= lo) & (g.nodes <= hi)
        val = np.abs(g.g_vals[plateau] * g.bracket[plateau])
        worst = max(worst, float(np.max(val)))
    return Check(
        "constant-potential",
        worst <= 1e-10,
        f"sup |residual integrand| on xi=1 over n=0..6: {worst:.3e}",
        "<= 1e-10",
    )


# Potentials of the real-axis sweeps: odd representatives of i x^gamma with
# per-potential cut-off exponent eps1 (see README).
SWEEP_POTENTIALS: Dict[int, Tuple[str, Dict, float]] = {
    1: ("monomial_imag", {"gamma": 1}, 1.0),
    2: ("poly_like", {"gamma": 2}, 1.6),
    3: ("monomial_imag", {"gamma": 3}, 2.25),
}
SWEEP_LAMBDAS = tuple(np.logspace(2, 5, 8))


@lru_cache(maxsize=None)
def real_axis_sweep(gamma: int, n: int = 2) -> Tuple[ResidualReport, ...]:
    name, prm, e1 = SWEEP_POTENTIALS[gamma]
    p = make_builtin(name, {**prm, "eps1": e1})
    cfg = ExpansionConfig(n=n)
    return tuple(report(assemble(p, lam, cfg, widths_real_axis(p, lam))) for lam in SWEEP_LAMBDAS)


def check_norm_scaling() -> Check:
    parts, ok = [], True
    for gamma in (1, 2):
        reps = [r for r in real_axis_sweep(gamma) if r.lam.real >= 1e3 * (1 - 1e-12)]
        s = rate_fit(reps, "f_norm").slope
        target = 1.0 / (4 * (gamma + 1))
        good = abs(s - target) <= 0.05
        ok &= good
        parts.append(f"gamma={gamma}: {s:.4f} (target {target:.4f})")
    return Check("norm-scaling", ok, "; ".join(parts), "|exponent - 1/(4(gamma+1))| <= 0.05 over lambda in [1e3, 1e5]")


def check_g_envelope() -> Check:
    name, prm, e1 = SWEEP_POTENTIALS[2]
    p = make_builtin(name, {**prm, "eps1": e1})
    lam = 1e4
    g = assemble(p, lam, ExpansionConfig(n=2), widths_real_axis(p, lam))
    x = g.nodes
    sel = np.abs(x) >= 1.0
    ax = np.abs(x[sel])
    # int_0^{|x|} |Im V| for Im V = x <x>
    integral = ((1.0 + ax**2) ** 1.5 - 1.0) / 3.0
    q = g.log_abs_g[sel] / (lam**-0.5 * integral)
    c1, c2 = float(-q.min()), float(-q.max())
    ok = 0 < c2 <= c1 <= 5
    return Check(
        "g-envelope",
        ok,
        f"log|g| / (lam^-1/2 int|Im V|) in [{-c1:.4f}, {-c2:.4f}] on {int(sel.sum())} nodes",
        "within [-C1, -C2] with 0 < C2 <= C1 <= 5",
    )


# ---------------------------------------------------------------------------
# rates


def check_polynomial_rates() -> Check:
    parts, ok = [], True
    for gamma in (1, 2, 3):
        s = rate_fit(real_axis_sweep(gamma), "sigma").slope
        good = -1.65 <= s <= -1.35
        ok &= good
        parts.append(f"gamma={gamma}: {s:.3f}{'' if good else ' (out)'}")
    return Check("polynomial-rates", ok, "sigma slopes " + "; ".join(parts), "each in [-1.65, -1.35]")


def check_cutoff_negligible() -> Check:
    parts, ok = [], True
    for gamma in (1, 2, 3):
        reps = real_axis_sweep(gamma)
        q = float(np.exp(reps[-1].log_kappa - reps[-1].log_sigma))
        sk = rate_fit(reps, "kappa").slope
        ss = rate_fit(reps, "sigma").slope
        good = q < 1e-3 and sk <= 3 * ss
        ok &= good
        parts.append(f"gamma={gamma}: kappa/sigma={q:.2e}, slopes {sk:.2f} vs {ss:.2f}")
    return Check("cutoff-negligible", ok, "; ".join(parts), "kappa/sigma < 1e-3 at 1e5 and kappa-slope <= 3 sigma-slope")


@lru_cache(maxsize=None)
def _sgn_sweep(mode: str) -> Tuple[ResidualReport, ...]:
    sp = split_singular("sgn_imag_split", {"eps2": 1.0})
    path = make_path("real-axis", None, {"lam_min": 1e2, "lam_max": 1e5, "num": 8})
    return tuple(report(g) for g in assemble_on_path(path, sp, ExpansionConfig(n=1), mode))


def check_discontinuous() -> Check:
    si = rate_fit(_sgn_sweep("ignore-W")).slope
    sm = rate_fit(_sgn_sweep("mollified")).slope
    ok = -0.35 <= si <= -0.15 and -0.60 <= sm <= -0.40 and sm < si
    return Check(
        "discontinuous",
        ok,
        f"ignore-W slope {si:.3f}, mollified slope {sm:.3f}",
        "ignore-W in [-0.35, -0.15], mollified in [-0.60, -0.40], mollified steeper",
    )


# ---------------------------------------------------------------------------
# mollifier


def _hat() -> RoughPart:
    return RoughPart(lambda x: np.maximum(1.0 - np.abs(np.asarray(x, dtype=float)), 0.0) + 0j, breakpoints=(-1.0, 0.0, 1.0))


def check_mollifier() -> Check:
    sgn_split = split_singular("sgn_imag_split")
    floor_split = split_singular("floor_steps", {"gamma": 2.0})
    cases = [("i sgn eta", sgn_split.w2, (-2.0, 2.0)), ("floor W1", floor_split.w1, (-8.0, 8.0)), ("hat", _hat(), (-2.0, 2.0))]
    failures = []
    worst = 0.0
    for label, W, J in cases:
        for eps in (1e-1, 1e-2, 1e-3):
            for p in (2, 4):
                for key, (lhs, rhs, good) in mollifier_inequalities(W, eps, p, J).items():
                    worst = max(worst, lhs / rhs if rhs > 0 else 0.0)
                    if not good:
                        failures.append(f"{label}/{key}/eps={eps:g}/p={p}")
    sgn = RoughPart(lambda x: 1j * np.where(np.asarray(x) >= 0, 1.0, -1.0), breakpoints=(0.0,))
    om = [modulus_continuity(sgn, e, 2, (-1.0, 1.0)) / np.sqrt(e) for e in (1e-1, 1e-2, 1e-3)]
    om_ok = all(abs(v - 2.0) <= 0.04 for v in om)
    return Check(
        "mollifier-inequalities",
        not failures and om_ok,
        f"72 inequalities, max lhs/rhs {worst:.4f}, failures {failures or 'none'}; omega2(sgn)/sqrt(eps) = "
        + ", ".join(f"{v:.4f}" for v in om),
        "all lhs <= 1.01 rhs; omega ratio within 2% of 2",
    )


# ---------------------------------------------------------------------------
# curves


def check_curve_regime() -> Check:
    p = make_builtin("monomial_imag", {"gamma": 2})
    path = make_path("curve", p, {"b_min": 1e2, "b_max": 10**4.5, "num": 8, "a_exponent": 1.0})
    reps = [report(g) for g in assemble_on_path(path, p, ExpansionConfig(n=3))]
    ratios = np.array([r.ratio for r in reps])
    mono = bool(np.all(np.diff(ratios) < 0))
    slope = rate_fit(reps, abscissa=[q.b for q in path.points]).slope
    xb_err = max(abs(q.x_b / np.sqrt(q.b) - 1.0) for q in path.points)
    ok = mono and slope <= -0.4 and xb_err <= 1e-8
    return Check(
        "curve-regime",
        ok,
        f"monotone={mono}, slope vs b {slope:.3f}, max |x_b/sqrt(b) - 1| = {xb_err:.1e}",
        "monotone decrease, slope <= -0.4, x_b to 1e-8",
    )


def check_strong_singularity() -> Check:
    p = make_builtin("inv_singularity", {"alpha": 3.0})
    path = make_path("singular", p, {"b_min": 1e3, "b_max": 1e6, "num": 8, "a_exponent": 1.1})
    reps = [report(g) for g in assemble_on_path(path, p, ExpansionConfig(n=3))]
    drop = reps[0].ratio / reps[-1].ratio
    return Check(
        "strong-singularity",
        drop >= 10.0,
        f"ratio {reps[0].ratio:.3e} -> {reps[-1].ratio:.3e} (decrease factor {drop:.3g}); "
        f"kappa {reps[0].kappa:.3e} -> {reps[-1].kappa:.3e}, sigma {reps[0].sigma:.3e} -> {reps[-1].sigma:.3e}",
        "decrease >= 10x across b in [1e3, 1e6]",
    )


def check_semiclassical() -> Check:
    U = make_builtin("monomial_imag", {"gamma": 1})
    cfg = ExpansionConfig(n=2)
    hs = [2.0**-k for k in range(3, 11)]
    rel, pts = 0.0, []
    for h in hs:
        rh, rs, _ = semiclassical_ratios(U, 1.0, h, cfg)
        rel = max(rel, abs(rh - h**2 * rs) / abs(rh))
        pts.append((1.0 / h, rh))
    slope = rate_fit(pts).slope
    ok = rel <= 1e-12 and slope <= -0.5
    return Check(
        "semiclassical",
        ok,
        f"max |r_h - h^2 r_scaled|/r_h = {rel:.1e}, slope vs 1/h {slope:.3f}",
        "<= 1e-12 relative; slope <= -0.5",
    )


# ---------------------------------------------------------------------------
# oracle


def check_oracle() -> Check:
    rows, ok = [], True
    for gamma in (1, 2):
        name, prm, e1 = SWEEP_POTENTIALS[gamma]
        p = make_builtin(name, {**prm, "eps1": e1})
        for lam in (1e2, 1e3):
            cut = widths_real_axis(p, lam)
            res = None
            for n in (2, 1):
                cfg = ExpansionConfig(n=n, quad_tol=1e-13)
                a = report(assemble(p, lam, cfg, cut)).ratio
                res = cross_check(p, lam, cfg, cut, analytic_ratio=a)
                if not res.floor_limited:
                    break
            agree = res.agrees(0.1)
            smin_ok = res.sigma_min <= res.ratio_h
            ok &= bool(agree) and smin_ok
            rows.append(
                f"gamma={gamma} lam={lam:g} n={n}: rel err {res.rel_error:.1e}, order {res.observed_order:.2f}, "
                f"sigma_min {res.sigma_min:.2e} <= {res.ratio_h:.2e}"
            )
    e0 = dirichlet_ground_state()
    ok &= abs(e0 - 1.0) <= 1e-5
    rows.append(f"Dirichlet ground state {e0:.8f}")
    return Check("oracle", ok, "; ".join(rows), "within 10% after extrapolation; sigma_min <= disc residual; ground state 1 +- 1e-5")


SUITES: Dict[str, List[Callable[[], Check]]] = {
    "symbolic": [check_symbolic_exactness, check_structure],
    "envelopes": [check_constant_potential, check_norm_scaling, check_g_envelope],
    "rates": [check_polynomial_rates, check_cutoff_negligible, check_discontinuous],
    "mollify": [check_mollifier],
    "curves": [check_curve_regime, check_strong_singularity, check_semiclassical],
    "oracle": [check_oracle],
}


def run_suite(name: str) -> List[Check]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return [timed(f) for f in SUITES[name]]
