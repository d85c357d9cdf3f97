"""One strategic bidder against a truthful rival, uniform(0,1) values, lazy second price.

Prints utility and welfare for truthful, thresholded-at-monopoly and optimally
thresholded play, by quadrature and by Monte Carlo.
"""

import argparse

from auctionlab.auction import mc_simulate, one_strategic, outcome_quadrature
from auctionlab.dist import Uniform, max_of_truthful
from auctionlab.optimize import one_strategic_threshold, optimal_linear_alpha
from auctionlab.strategy import ThresholdedParams, make_thresholded, truthful


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rounds", type=int, default=10 ** 6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    u = Uniform(0.0, 1.0)
    G = max_of_truthful(u, 1)
    r_star = one_strategic_threshold(u, G).value
    print(f"alpha* = {optimal_linear_alpha(u, G).value:.8f}   r* = {r_star:.8f}")
    plays = {"truthful": truthful(), "thresholded r=0.5": make_thresholded(u, ThresholdedParams(0.5)),
             f"thresholded r={r_star:.5f}": make_thresholded(u, ThresholdedParams(r_star))}
    base = None
    for name, s in plays.items():
        cfg = one_strategic(u, 2, s)
        q = outcome_quadrature(cfg)
        mc = mc_simulate(cfg, args.rounds, args.seed)
        base = q.utility[0] if base is None else base
        print(f"{name:24s} U={q.utility[0]:.6f} (MC {mc.utility[0]:.6f} +- {mc.stderr['utility'][0]:.1e})  "
              f"welfare={q.welfare:.5f}  uplift={100 * (q.utility[0] / base - 1):5.1f}%")


if __name__ == "__main__":
    main()
