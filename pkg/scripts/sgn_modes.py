"""i sgn(x): residual slopes with W ignored versus mollified, on a shared lambda grid."""

import argparse
import sys

from pseudomodes.curves import assemble_on_path, make_path
from pseudomodes.expansion import ExpansionConfig
from pseudomodes.potentials import split_singular
from pseudomodes.residual import rate_fit, report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam-min", type=float, default=1e2)
    ap.add_argument("--lam-max", type=float, default=1e5)
    ap.add_argument("--num", type=int, default=8)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    split = split_singular("sgn_imag_split", {"eps2": 1.0})
    path = make_path("real-axis", None, {"lam_min": args.lam_min, "lam_max": args.lam_max, "num": args.num})
    for mode in ("ignore-W", "mollified"):
        reps = [report(g) for g in assemble_on_path(path, split, ExpansionConfig(n=1), mode, workers=args.workers)]
        print(f"{mode:10s} slope {rate_fit(reps).slope:.3f}")
        for r in reps:
            print(f"  lam={r.lam.real:10.4g} ratio={r.ratio:.4e} kappa={r.kappa:.3e} sigma={r.sigma:.3e} extra={r.extra:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
