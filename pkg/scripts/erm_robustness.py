"""Reserve learned by ERM against a thresholded bidder: x_hat versus n and epsilon."""

import argparse

import numpy as np

from auctionlab.dist import Uniform
from auctionlab.robustness import (ErmExperimentConfig, erm_experiment, infeasible_fraction, violation_frequency,
                                   write_erm_csv)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replications", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", default=None, help="optional path for per-replication rows")
    args = ap.parse_args()
    u = Uniform(0.0, 1.0)
    rows = []
    print("schedule     n        median x_hat  bound      violated  infeasible")
    for label, schedule in (("n^-1/3", None), ("eps=0.01", lambda n: 0.01), ("eps=0.1", lambda n: 0.1)):
        for n in (10 ** 3, 10 ** 4, 10 ** 5):
            kw = {} if schedule is None else {"epsilon_schedule": schedule}
            res = erm_experiment(ErmExperimentConfig(u, 0.5, n, 0.05, args.replications, args.seed, **kw))
            rows += res
            med = np.median([r.reserve_value_hat for r in res])
            print(f"{label:10s} {n:7d}  {med:.6e}  {res[0].bound:9.4g}  {violation_frequency(res):8.3f}  "
                  f"{infeasible_fraction(res):8.3f}")
    if args.csv:
        write_erm_csv(args.csv, rows)


if __name__ == "__main__":
    main()
