"""Residual of the forward solution under time-grid refinement.

The solution is evaluated on graded time grids and plugged back into the
equation with the L1 scheme and central differences in x.
"""
import argparse
import math

import numpy as np

from fracpot.fractional import TimeGrid
from fracpot.multiterm import MultiTermSpec
from fracpot.solver import data_from_dict, residual, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orders", type=float, nargs="+", default=[0.3, 0.7])
    ap.add_argument("--Ns", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--nx", type=int, default=61)
    ap.add_argument("--grading", type=float, default=None)
    args = ap.parse_args()
    spec = MultiTermSpec(tuple(args.orders), (1.0,) * len(args.orders))
    data, _ = data_from_dict({"u0": {"kind": "gauss_cos", "a": 1.0, "k": 1.0}}, spec)
    xs = np.linspace(-3.0, 3.0, args.nx)
    grading = args.grading or 2.0 / spec.alpha_m
    prev = None
    print("N  max_residual  rate")
    for N in args.Ns:
        grid = TimeGrid.graded(1.0, N, grading)
        u = np.vstack([data.u0(xs), solve(data, spec, xs, grid.nodes[1:]).value])
        r = residual(u, data, spec, grid, xs).max_residual
        rate = "" if prev is None else f"{math.log2(prev / r):.2f}"
        print(f"{N:<3d} {r:.4e}  {rate}")
        prev = r


if __name__ == "__main__":
    main()
