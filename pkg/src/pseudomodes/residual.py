"""L2 norms, residual ratios with their decomposition, and rate fits."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import simpson

from .expansion import PseudomodeGrid

__all__ = [
    "ResidualReport",
    "RateFit",
    "FitError",
    "l2_norm",
    "log_l2_norm",
    "report",
    "rate_fit",
]


class FitError(ValueError):
    pass


def _simpson(y: np.ndarray, x: np.ndarray) -> float:
    if x.size == 2:
        return float(0.5 * (y[0] + y[1]) * (x[1] - x[0]))
    return float(simpson(y, x=x))


def log_l2_norm(nodes, log_abs: np.ndarray) -> float:
    """log of the L2 norm of a function given by log|u| on the nodes.

    Composite Simpson on the (possibly non-uniform) grid after factoring out
    the maximum, so that tiny norms do not underflow.
    """
    x = np.asarray(nodes, dtype=float)
    la = np.asarray(log_abs, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 nodes")
    finite = np.isfinite(la)
    if not np.any(finite):
        return -np.inf
    M = float(np.max(la[finite]))
    y = np.where(finite, np.exp(2.0 * (la - M)), 0.0)
    val = _simpson(y, x)
    if val <= 0:
        # Simpson can dip below zero on extremely peaked data; fall back to trapezoid
        val = float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))
    return M + 0.5 * np.log(val) if val > 0 else -np.inf


def l2_norm(nodes, values) -> float:
    """||u||_2 by composite Simpson on the given nodes."""
    v = np.abs(np.asarray(values))
    with np.errstate(divide="ignore"):
        return float(np.exp(log_l2_norm(nodes, np.log(v))))


def _log_abs(z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z))


@dataclass
class ResidualReport:
    lam: complex
    f_norm: float
    residual_norm: float
    ratio: float
    kappa: float
    sigma: float
    extra: float
    widths: tuple
    log_ratio: float = 0.0
    log_kappa: float = 0.0
    log_sigma: float = 0.0
    log_extra: float = -np.inf
    log_f_norm: float = 0.0
    x_b: Optional[float] = None
    mode: str = "plain"
    oracle_ratio: Optional[float] = None
    floor_limited: Optional[bool] = None
    info: dict = field(default_factory=dict)

    def triangle_ok(self, slack: float = 1e-10) -> bool:
        return self.ratio <= self.kappa + self.sigma + self.extra + slack * max(1.0, self.ratio)

    def as_row(self) -> dict:
        return {
            "lambda_re": self.lam.real,
            "lambda_im": self.lam.imag,
            "ratio": self.ratio,
            "kappa": self.kappa,
            "sigma": self.sigma,
            "extra": self.extra,
            "f_norm": self.f_norm,
            "delta_minus": self.widths[0],
            "delta_plus": self.widths[1],
            "x_b": self.x_b,
            "oracle_ratio": self.oracle_ratio,
            "floor_limited": self.floor_limited,
        }


def report(grid: PseudomodeGrid) -> ResidualReport:
    """Residual ratio and its components on the grid's own nodes.

    kappa = (||xi'' g|| + 2 ||xi' g'||) / ||f||, sigma = ||xi r_n g|| / ||f||,
    extra = ||xi W_extra g|| / ||f|| (mode dependent).  The factor 2 keeps
    ratio <= kappa + sigma + extra an exact triangle inequality.
    """
    x = grid.nodes
    lg = grid.log_abs_g
    lf = log_l2_norm(x, lg + _log_abs(grid.xi))
    ltot = log_l2_norm(x, lg + _log_abs(grid.bracket))
    l_xpp = log_l2_norm(x, lg + _log_abs(grid.xi_pp))
    l_xpgp = log_l2_norm(x, lg + _log_abs(grid.xi_p * grid.Ep))
    lsig = log_l2_norm(x, lg + _log_abs(grid.rem_bracket))
    lext = log_l2_norm(x, lg + _log_abs(grid.extra_bracket)) if grid.extra_factor is not None else -np.inf
    lkap = np.logaddexp(l_xpp, np.log(2.0) + l_xpgp)
    m = grid.meta
    return ResidualReport(
        lam=grid.lam,
        f_norm=float(np.exp(lf)),
        residual_norm=float(np.exp(ltot)),
        ratio=float(np.exp(ltot - lf)),
        kappa=float(np.exp(lkap - lf)),
        sigma=float(np.exp(lsig - lf)),
        extra=float(np.exp(lext - lf)),
        widths=(m.delta_minus, m.delta_plus, m.Delta_minus, m.Delta_plus),
        log_ratio=ltot - lf,
        log_kappa=lkap - lf,
        log_sigma=lsig - lf,
        log_extra=lext - lf,
        log_f_norm=lf,
        x_b=m.x_b,
        mode=grid.mode,
    )


@dataclass
class RateFit:
    slope: float
    intercept: float
    fit_residual: float
    points_used: int
    transient_dropped: bool = False
    field: str = "ratio"

    def to_json(self) -> dict:
        d = asdict(self)
        d["schema_version"] = 1
        return d


_LOG_FIELDS = {"ratio": "log_ratio", "kappa": "log_kappa", "sigma": "log_sigma", "extra": "log_extra", "f_norm": "log_f_norm"}


def _lsq(lx: np.ndarray, ly: np.ndarray):
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res**2)))


def rate_fit(
    reports: Sequence[Union[ResidualReport, tuple]],
    field: Union[str, Callable] = "ratio",
    abscissa: Optional[Sequence[float]] = None,
    allow_drop: bool = True,
) -> RateFit:
    """Least-squares slope of log(field) against log|lambda| (or a given abscissa).

    The leading half of the points is dropped when that reduces the fit
    residual at least 2x and leaves >= 4 points (and the full fit is not
    already exact to 1e-9); the result records it.
    ``reports`` may also be (x, y) pairs.
    """
    if len(reports) < 4:
        raise FitError("need at least 4 points")
    if isinstance(reports[0], ResidualReport):
        if callable(field):
            ly = np.array([np.log(field(r)) for r in reports], dtype=float)
        else:
            ly = np.array([getattr(r, _LOG_FIELDS[field]) if field in _LOG_FIELDS else np.log(getattr(r, field)) for r in reports])
        xs = np.array([abs(r.lam) for r in reports]) if abscissa is None else np.asarray(abscissa, dtype=float)
    else:
        xs = np.array([r[0] for r in reports], dtype=float)
        ys = np.array([r[1] for r in reports], dtype=float)
        if np.any(ys <= 0):
            raise FitError("non-positive values in fit field")
        ly = np.log(ys)
        if abscissa is not None:
            xs = np.asarray(abscissa, dtype=float)
    lx = np.log(xs)
    if not np.all(np.isfinite(ly)):
        raise FitError("non-finite values in fit field")
    order = np.argsort(lx)
    lx, ly = lx[order], ly[order]
    s, b, res = _lsq(lx, ly)
    fit = RateFit(s, b, res, lx.size, False, field if isinstance(field, str) else "custom")
    half = lx.size // 2
    if allow_drop and lx.size - half >= 4:
        s2, b2, res2 = _lsq(lx[half:], ly[half:])
        # an exact power law (res at rounding level) never triggers the drop
        if res > 1e-9 and res2 * 2.0 <= res:
            fit = RateFit(s2, b2, res2, lx.size - half, True, fit.field)
    return fit
