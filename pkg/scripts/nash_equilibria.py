"""Symmetric threshold equilibria for uniform(0,1) values and K = 2..8 bidders.

For each K prints the equilibrium threshold, the seller's reserve price at
equilibrium, revenue and buyer utility next to the no-reserve auction.
"""

import argparse

from auctionlab.dist import Uniform
from auctionlab.optimize import deviation_utility, nash_revenue_equivalence_check, nash_threshold
from auctionlab.seller import exact_reserve
from auctionlab.strategy import ThresholdedParams, bid_distribution, make_thresholded


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=8)
    args = ap.parse_args()
    u = Uniform(0.0, 1.0)
    print(" K   r*        reserve   revenue   no-res    utility   no-res    best deviation gain")
    for K in range(2, args.kmax + 1):
        r = nash_threshold(u, K).value
        price = exact_reserve(bid_distribution(u, make_thresholded(u, ThresholdedParams(r)))).reserve_price
        rn, rf, un, uf = nash_revenue_equivalence_check(u, K)
        at = deviation_utility(u, K, r, r)
        gain = max(deviation_utility(u, K, r, r + dr) - at for dr in (-0.05, -0.01, 0.01, 0.05))
        print(f"{K:2d}  {r:.6f}  {price:.6f}  {rn:.6f}  {rf:.6f}  {un:.6f}  {uf:.6f}  {gain:+.2e}")


if __name__ == "__main__":
    main()
