"""Approach sequence of the E-potential derivative toward a moving boundary.

Prints offset, value and distance to the predicted one-sided limit for both
sides, then the extrapolated limits.
"""
import argparse

from fracpot.multiterm import MultiTermSpec
from fracpot.potentials import MovingBoundary, WeightedDensity, approach_offsets, jump_limit_E


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orders", type=float, nargs="+", default=[0.3, 0.7])
    ap.add_argument("--weights", type=float, nargs="+", default=None)
    ap.add_argument("--beta", type=float, default=0.9, help="boundary s(t) = t**beta")
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--n", type=int, default=10, help="number of halvings")
    args = ap.parse_args()
    spec = MultiTermSpec(tuple(args.orders), tuple(args.weights or [1.0] * len(args.orders)))
    phi = WeightedDensity.weighted(1.0, spec.alpha_m)
    s = MovingBoundary.power(0.0, 1.0, args.beta)
    for side in ("left", "right"):
        offs = approach_offsets(args.t, spec, n=args.n, side=side)
        rep = jump_limit_E(phi, s, args.t, spec, side=side, approach=offs, strict=False)
        print(f"# side={side} predicted={rep.predicted:.12g} direct={rep.direct:.12g}")
        for d, v, e in zip(rep.offsets, rep.values, rep.discrepancies):
            print(f"{d: .3e}  {v: .12e}  {e:.3e}")
        print(f"# limit={rep.limit:.12g} discrepancy={rep.discrepancy:.2e} monotone={rep.monotone}")


if __name__ == "__main__":
    main()
