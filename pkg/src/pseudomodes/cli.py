"""Batch runner: ``run <config>``, ``verify <suite>``, ``dump-terms --n <k>``.

Exit codes: 0 ok, 1 check failed, 2 config error, 3 numerical error.
The worker count comes from ``--workers``, else ``PSEUDOMODES_WORKERS``,
else the machine's CPU count.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema
import yaml

from .curves import MODES, REGIMES, PathError, assemble_point, cutoff_for, make_path, scaled_potential
from .cutoff import CutoffError
from .expansion import ExpansionConfig, ExpansionError
from .mollify import MollifyError, MollifySpec
from .oracle import OracleError, cross_check
from .potentials import PotentialError, SingularSplit, make_builtin
from .residual import FitError, ResidualReport, rate_fit, report
from .symbolic_wkb import format_termsum, gen_exponent_derivative, gen_psi_prime, gen_remainder

__all__ = ["RunConfig", "ConfigError", "load_config", "run", "main", "CSV_COLUMNS", "FIT_SCHEMA_VERSION"]

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

CSV_COLUMNS = (
    "lambda_re",
    "lambda_im",
    "ratio",
    "kappa",
    "sigma",
    "extra",
    "f_norm",
    "delta_minus",
    "delta_plus",
    "x_b",
    "oracle_ratio",
    "floor_limited",
)
FIT_SCHEMA_VERSION = 1

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT = {"type": "integer", "minimum": 0}

CONFIG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["potential", "path"],
    "properties": {
        "potential": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
        },
        "regime": {"enum": list(REGIMES)},
        "mode": {"enum": list(MODES)},
        "n": _INT,
        "path": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lambdas": {"type": "array", "items": _POS, "minItems": 1},
                "lam_min": _POS,
                "lam_max": _POS,
                "num": {"type": "integer", "minimum": 1},
                "b_min": _POS,
                "b_max": _POS,
                "a_exponent": _NUM,
                "a_coeff": _POS,
                "a_min": _POS,
                "a_max": _POS,
                "b_exponent": _POS,
                "gamma": _POS,
                "eps": _POS,
                "h_list": {"type": "array", "items": _POS, "minItems": 2},
                "h_exp_min": {"type": "integer"},
                "h_exp_max": {"type": "integer"},
                "z": {"type": ["number", "string"]},
                "x0": _NUM,
            },
        },
        "cutoff": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"eps1": _POS, "eps2": _POS},
        },
        "mollify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"alpha_minus": _POS, "alpha_plus": _POS, "alpha_zero": _POS},
        },
        "expansion": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "quad_tol": _POS,
                "min_nodes": _INT,
                "nodes_per_unit": _POS,
                "max_nodes": _INT,
                "gl_order": {"type": "integer", "minimum": 2},
                "max_refine": _INT,
            },
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"enabled": {"type": "boolean"}, "h": _POS, "floor_factor": _POS},
        },
        "fit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"field": {"enum": ["ratio", "kappa", "sigma", "extra"]}, "allow_drop": {"type": "boolean"}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "termdump": {"type": "boolean"}},
        },
    },
}


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot (1e5)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+][0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


class ConfigError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


@dataclass
class RunConfig:
    potential: Dict[str, Any]
    path: Dict[str, Any]
    regime: str = "real-axis"
    mode: str = "plain"
    n: int = 2
    cutoff: Dict[str, float] = field(default_factory=dict)
    mollify: Dict[str, float] = field(default_factory=dict)
    expansion: Dict[str, Any] = field(default_factory=dict)
    oracle: Dict[str, Any] = field(default_factory=dict)
    fit: Dict[str, Any] = field(default_factory=dict)
    output: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Any) -> "RunConfig":
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"{where}: {exc.message}") from None
        cfg = cls(**data)
        p = cfg.path
        if cfg.regime == "real-axis" and "lambdas" not in p and not {"lam_min", "lam_max"} <= p.keys():
            raise ConfigError("path: real-axis needs lambdas or lam_min/lam_max")
        if cfg.regime in ("curve", "singular") and not {"b_min", "b_max"} <= p.keys():
            raise ConfigError("path: curve regimes need b_min and b_max")
        if cfg.regime == "decaying" and not {"a_min", "a_max"} <= p.keys():
            raise ConfigError("path: decaying regime needs a_min and a_max")
        return cfg

    def expansion_config(self) -> ExpansionConfig:
        try:
            return ExpansionConfig(n=self.n, **self.expansion)
        except ValueError as exc:
            raise ConfigError(f"expansion: {exc}") from None

    def mollify_spec(self) -> MollifySpec:
        try:
            return MollifySpec(**self.mollify)
        except MollifyError as exc:
            raise ConfigError(f"mollify: {exc}") from None


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        data = json.loads(text) if str(path).endswith(".json") else yaml.load(text, Loader=_Loader)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    return RunConfig.from_dict(data)


def worker_count(flag: Optional[int] = None) -> int:
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get("PSEUDOMODES_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PSEUDOMODES_WORKERS={env!r} is not an integer") from None
    return os.cpu_count() or 1


def _build_inputs(cfg: RunConfig):
    params = dict(cfg.potential.get("params", {}))
    try:
        pot = make_builtin(cfg.potential["name"], params)
    except PotentialError as exc:
        raise ConfigError(f"potential: {exc}") from None
    if cfg.mode in ("ignore-W", "mollified") and not isinstance(pot, SingularSplit):
        raise ConfigError(f"mode {cfg.mode} needs a singular split potential")
    base = pot.v_regular if isinstance(pot, SingularSplit) else pot
    path_params = dict(cfg.path)
    path_params.update(cfg.cutoff)
    try:
        path = make_path(cfg.regime, base, path_params)
    except (PathError, CutoffError) as exc:
        raise ConfigError(f"path: {exc}") from None
    if len(path) == 0:
        raise ConfigError("path: empty lambda list")
    return pot, base, path


def _point_job(cfg: RunConfig, pot, base, path, ecfg, mspec):
    ocfg = cfg.oracle

    def job(point) -> ResidualReport:
        try:
            grid = assemble_point(path, point, pot, ecfg, cfg.mode, mspec)
            rep = report(grid)
            if ocfg.get("enabled", False):
                p = scaled_potential(base, point.h) if path.regime == "semiclassical" else base
                res = cross_check(
                    p,
                    point.lam,
                    ecfg,
                    cutoff_for(path, point, p),
                    h=ocfg.get("h"),
                    analytic_ratio=rep.ratio,
                    floor_factor=ocfg.get("floor_factor", 5.0),
                    probe_sigma=False,
                )
                rep.oracle_ratio = res.ratio_extrapolated
                rep.floor_limited = res.floor_limited
        except (ExpansionError, CutoffError, PathError, PotentialError, MollifyError, OracleError, FloatingPointError, ValueError) as exc:
            raise NumericalError(f"lambda={point.lam:.6g}: {type(exc).__name__}: {exc}") from exc
        vals = (rep.ratio, rep.kappa, rep.sigma, rep.f_norm)
        if not all(math.isfinite(v) for v in vals):
            raise NumericalError(f"lambda={point.lam:.6g}: non-finite residual report")
        return rep

    return job


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(float(v))


def write_reports(reports: Sequence[ResidualReport], path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in reports:
            row = r.as_row()
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def run(cfg: RunConfig, out_dir: Optional[str] = None, workers: Optional[int] = None) -> Dict[str, Any]:
    """Execute a run-config; returns the fit dict and the report list.

    Raises ConfigError for invalid input and NumericalError naming the
    lambda point for any module failure during the sweep.
    """
    ecfg = cfg.expansion_config()
    mspec = cfg.mollify_spec()
    pot, base, path = _build_inputs(cfg)
    job = _point_job(cfg, pot, base, path, ecfg, mspec)
    nw = worker_count(workers)
    if nw <= 1:
        reports = [job(q) for q in path.points]
    else:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            reports = list(ex.map(job, path.points))

    fcfg = cfg.fit
    abscissa = [q.h for q in path.points] if path.regime == "semiclassical" else None
    try:
        fit = rate_fit(reports, fcfg.get("field", "ratio"), abscissa=abscissa, allow_drop=fcfg.get("allow_drop", True)).to_json()
    except FitError as exc:
        fit = {"slope": None, "intercept": None, "fit_residual": None, "points_used": len(reports), "transient_dropped": False, "error": str(exc)}
    fit["schema_version"] = FIT_SCHEMA_VERSION
    fit["abscissa"] = "h" if abscissa is not None else "abs_lambda"

    out = Path(out_dir or cfg.output.get("dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    write_reports(reports, out / "reports.csv")
    (out / "fit.json").write_text(json.dumps(fit, indent=2, sort_keys=True) + "\n")
    if cfg.output.get("termdump", False):
        (out / "termdump.txt").write_text(f"r_{cfg.n}:\n{format_termsum(gen_remainder(cfg.n))}\n")
    return {"fit": fit, "reports": reports, "out_dir": str(out)}


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        res = run(cfg, args.out, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    fit = res["fit"]
    slope = "n/a" if fit.get("slope") is None else f"{fit['slope']:.4f}"
    print(f"{len(res['reports'])} points -> {res['out_dir']}; slope {slope}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import SUITES, run_suite

    if args.suite not in SUITES:
        print(f"config error: unknown suite {args.suite!r}; choose from {', '.join(sorted(SUITES))}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        checks = run_suite(args.suite)
    except (ExpansionError, OracleError, FloatingPointError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def _cmd_dump(args) -> int:
    if args.n < 0:
        print("config error: --n must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    if args.kind == "remainder":
        s = gen_remainder(args.n)
    elif args.kind == "psi":
        s = gen_psi_prime(args.n)
    else:
        s = gen_exponent_derivative(args.n)
    print(format_termsum(s))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pseudomodes", description="WKB pseudomode residual sweeps")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a config file (YAML or JSON)")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    r.add_argument("--workers", type=int, default=None)
    r.set_defaults(func=_cmd_run)
    v = sub.add_parser("verify", help="run an acceptance suite")
    v.add_argument("suite")
    v.set_defaults(func=_cmd_verify)
    d = sub.add_parser("dump-terms", help="print symbolic terms")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--kind", choices=("remainder", "psi", "exponent"), default="remainder")
    d.set_defaults(func=_cmd_dump)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
