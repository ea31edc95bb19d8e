"""Finite-difference cross-check of the analytic residual ratio at a few lambdas."""

import argparse
import json
import sys

from pseudomodes.cutoff import widths_real_axis
from pseudomodes.expansion import ExpansionConfig, assemble
from pseudomodes.oracle import cross_check
from pseudomodes.potentials import make_builtin
from pseudomodes.residual import report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--potential", default="poly_like")
    ap.add_argument("--params", default='{"gamma": 2, "eps1": 1.6}', help="JSON parameters")
    ap.add_argument("--lam", type=float, nargs="+", default=[1e2, 1e3])
    ap.add_argument("--n", type=int, default=2)
    args = ap.parse_args()
    p = make_builtin(args.potential, json.loads(args.params))
    cfg = ExpansionConfig(n=args.n, quad_tol=1e-13)
    for lam in args.lam:
        cut = widths_real_axis(p, lam)
        r = report(assemble(p, lam, cfg, cut)).ratio
        o = cross_check(p, lam, cfg, cut, analytic_ratio=r)
        print(
            f"lam={lam:g}: analytic {r:.6e}, extrapolated {o.ratio_extrapolated:.6e}, rel err {o.rel_error:.2e}, "
            f"floor {o.floor:.1e}{' (floor-limited)' if o.floor_limited else ''}, order {o.observed_order:.2f}, "
            f"sigma_min {o.sigma_min:.3e}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
