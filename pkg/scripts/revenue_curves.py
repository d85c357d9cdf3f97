"""Seller objective b (1 - F_B(b)) and bidder payment as functions of the reserve.

Writes one CSV per strategy (uniform values, one truthful rival) for plotting.
"""

import argparse
from pathlib import Path

import numpy as np

from auctionlab.dist import Uniform, max_of_truthful
from auctionlab.seller import payment_curve, revenue_objective_curve, write_curve_csv
from auctionlab.strategy import ThresholdedParams, bid_distribution, linear, make_thresholded, truthful


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/curves")
    ap.add_argument("--grid-size", type=int, default=201)
    args = ap.parse_args()
    u = Uniform(0.0, 1.0)
    G = max_of_truthful(u, 1)
    out = Path(args.out)
    plays = {"truthful": truthful(), "linear_0.7": linear(0.7),
             "thresholded_0.5": make_thresholded(u, ThresholdedParams(0.5)),
             "thresholded_0.75": make_thresholded(u, ThresholdedParams(0.75))}
    for name, s in plays.items():
        bd = bid_distribution(u, s)
        grid = np.linspace(bd.min_bid, bd.max_bid, args.grid_size)
        obj = revenue_objective_curve(bd, grid)
        write_curve_csv(out / f"{name}_objective.csv", obj, ("reserve", "objective"))
        write_curve_csv(out / f"{name}_payment.csv", payment_curve(u, s, G, grid), ("reserve", "payment"))
        # thresholded curves are flat below the threshold; report the left edge of the plateau
        k = int(np.argmax(obj[:, 1] >= obj[:, 1].max() - 1e-12))
        print(f"{name:18s} objective peaks at b={obj[k, 0]:.4f} with value {obj[k, 1]:.5f}")


if __name__ == "__main__":
    main()
