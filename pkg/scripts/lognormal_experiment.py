"""Lognormal(0.25, 1) values, one strategic bidder against one truthful rival.

Compares truthful play under monopoly reserves, thresholding at the monopoly
price, and truthful play with the strategic bidder's reserve removed.
"""

import argparse

from auctionlab.auction import ReservePolicy, mc_simulate, one_strategic, outcome_quadrature
from auctionlab.dist import LogNormal, monopoly_price
from auctionlab.strategy import ThresholdedParams, make_thresholded, truthful


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rounds", type=int, default=10 ** 6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    d = LogNormal(0.25, 1.0)
    m = monopoly_price(d)
    print(f"monopoly price {m:.6f}")
    cfgs = {"truthful": one_strategic(d, 2, truthful()),
            "thresholded": one_strategic(d, 2, make_thresholded(d, ThresholdedParams(m))),
            "no reserve": one_strategic(d, 2, truthful(), policy=ReservePolicy("fixed", reserves=(0.0, m)))}
    for name, cfg in cfgs.items():
        q = outcome_quadrature(cfg)
        mc = mc_simulate(cfg, args.rounds, args.seed)
        print(f"{name:12s} U={q.utility[0]:.5f}  MC {mc.utility[0]:.5f} +- {mc.stderr['utility'][0]:.1e}  "
              f"revenue={q.seller_revenue:.5f}")


if __name__ == "__main__":
    main()
