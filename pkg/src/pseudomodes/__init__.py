"""WKB pseudomodes for 1D Schrodinger operators with complex potentials."""

from .curves import LambdaPath, PathPoint, assemble_on_path, assemble_point, make_path
from .cutoff import CutoffSpec, widths_curve, widths_decaying, widths_real_axis, widths_semiclassical
from .expansion import ExpansionConfig, PseudomodeGrid, assemble
from .mollify import MollifySpec, mollified_potential
from .oracle import cross_check, sigma_min_probe
from .potentials import Potential, SingularSplit, make_builtin, split_singular
from .residual import RateFit, ResidualReport, rate_fit, report
from .symbolic_wkb import TermSum, gen_exponent_derivative, gen_psi_prime, gen_remainder

__version__ = "0.1.0"

__all__ = [
    "LambdaPath",
    "PathPoint",
    "assemble_on_path",
    "assemble_point",
    "make_path",
    "CutoffSpec",
    "widths_curve",
    "widths_decaying",
    "widths_real_axis",
    "widths_semiclassical",
    "ExpansionConfig",
    "PseudomodeGrid",
    "assemble",
    "MollifySpec",
    "mollified_potential",
    "cross_check",
    "sigma_min_probe",
    "Potential",
    "SingularSplit",
    "make_builtin",
    "split_singular",
    "RateFit",
    "ResidualReport",
    "rate_fit",
    "report",
    "TermSum",
    "gen_exponent_derivative",
    "gen_psi_prime",
    "gen_remainder",
]
