"""Print the BMOA ring profile of dilations f_r: best area integral per |xi| ring.

Shows where the sup over xi sits as r -> 1 and whether it reaches the cutoff ring.

    python scripts/ring_profile.py --fn log1mz --k 2 6 10
"""

import argparse
import warnings

from bphi_lab.functions import dilate, parse_function
from bphi_lab.norms import bmoa_garsia_norm
from bphi_lab.quadrature import QuadratureSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--fn", default="log1mz")
    ap.add_argument("--k", type=int, nargs="+", default=[2, 6, 10])
    ap.add_argument("--delta", type=float, default=1e-3)
    args = ap.parse_args()

    f = parse_function(args.fn)
    spec = QuadratureSpec(delta=args.delta)
    for k in args.k:
        r = 1.0 - 2.0**-k
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = bmoa_garsia_norm(dilate(f, r), spec)
        print(f"{args.fn} r = 1 - 2^-{k}: norm {est.value:.6f} at xi = {est.witness:.6f}"
              f" (unconverged xi: {est.meta['unconverged']}, cutoff: {est.meta['on_cutoff']})")
        for rho, val in est.meta["ring_profile"]:
            print(f"    |xi| = {rho:.6f}  {val:.6f}")


if __name__ == "__main__":
    main()
