"""Curve-regime sweep lambda = a + i b with a = a_coeff b^p for a catalog potential."""

import argparse
import json
import sys

from pseudomodes.curves import assemble_on_path, make_path
from pseudomodes.expansion import ExpansionConfig
from pseudomodes.potentials import make_builtin
from pseudomodes.residual import rate_fit, report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--potential", default="monomial_imag")
    ap.add_argument("--params", default='{"gamma": 2}', help="JSON parameters")
    ap.add_argument("--regime", default="curve", choices=["curve", "singular"])
    ap.add_argument("--b-min", type=float, default=1e2)
    ap.add_argument("--b-max", type=float, default=10**4.5)
    ap.add_argument("--num", type=int, default=8)
    ap.add_argument("--a-exponent", type=float, default=1.0)
    ap.add_argument("--n", type=int, default=3)
    args = ap.parse_args()
    p = make_builtin(args.potential, json.loads(args.params))
    path = make_path(args.regime, p, {"b_min": args.b_min, "b_max": args.b_max, "num": args.num, "a_exponent": args.a_exponent})
    reps = [report(g) for g in assemble_on_path(path, p, ExpansionConfig(n=args.n), workers=4)]
    for q, r in zip(path.points, reps):
        print(f"b={q.b:10.4g} a={q.a:10.4g} x_b={q.x_b:+.6g} ratio={r.ratio:.4e} kappa={r.kappa:.3e} sigma={r.sigma:.3e}")
    fit = rate_fit(reps, abscissa=[q.b for q in path.points], allow_drop=False)
    print(f"slope vs b: {fit.slope:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
