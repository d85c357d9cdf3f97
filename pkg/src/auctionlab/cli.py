"""auctionlab command line: reproduce, simulate, solve, curves, erm."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .auction import AuctionConfig, load_json, mc_simulate, outcome_quadrature
from .dist import from_json as dist_from_json
from .dist import max_of_strategies, max_of_truthful
from .errors import AuctionLabError, ConfigError
from .optimize import SolverConfig, nash_threshold, one_strategic_threshold, optimal_linear_alpha
from .reproduce import TABLES, build_table, write_table
from .robustness import ErmExperimentConfig, cube_root_schedule, erm_experiment, write_erm_csv
from .seller import payment_curve, revenue_objective_curve, write_curve_csv
from .strategy import bid_distribution


def _dump(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _manifest(args, out: Path) -> None:
    _dump(out / "manifest.json", {"command": args.command, "config_path": getattr(args, "config", None),
                                  "seed": args.seed, "output_dir": str(out), "version": __version__})


def cmd_reproduce(args, out: Path) -> int:
    tables = TABLES if args.table == "all" else (args.table,)
    ok = True
    for t in tables:
        rows = build_table(t, seed=args.seed)
        write_table(out / f"reproduce_{t}.csv", rows)
        for r in rows:
            ok &= r.passed
            print(f"{t:26s} {r.quantity:36s} reference={r.paper_value:<12.6g} computed={r.computed_value:<14.8g} "
                  f"{'PASS' if r.passed else 'FAIL'}")
    return 0 if ok else 1


def cmd_simulate(args, out: Path) -> int:
    if args.rounds < 1:
        raise ConfigError("--rounds must be at least 1")
    cfg = AuctionConfig.load(args.config)
    mc = mc_simulate(cfg, args.rounds, args.seed, threads=args.threads)
    quad = outcome_quadrature(cfg, reserves=mc.reserves)
    result = {"monte_carlo": mc.to_json(), "quadrature": quad.to_json()}
    _dump(out / "outcome.json", result)
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def cmd_solve(args, out: Path) -> int:
    spec = load_json(args.config)
    try:
        d = dist_from_json(spec["dist"])
    except KeyError as exc:
        raise ConfigError("solve config needs a 'dist' entry") from exc
    br = spec.get("bracket", [None, None])
    cfg = SolverConfig(br[0], br[1], float(spec.get("abs_tol", 1e-10)))
    if args.what == "nash":
        res = nash_threshold(d, int(spec.get("K", 2)), cfg)
    else:
        G = max_of_truthful(d, int(spec.get("opponents", 1)))
        res = optimal_linear_alpha(d, G, cfg) if args.what == "linear" else one_strategic_threshold(d, G, cfg)
    _dump(out / f"solve_{args.what}.json", res.to_json())
    print(json.dumps(res.to_json(), sort_keys=True))
    return 0


def cmd_curves(args, out: Path) -> int:
    if args.grid_size < 2:
        raise ConfigError("--grid-size must be at least 2")
    cfg = AuctionConfig.load(args.config)
    for i, b in enumerate(cfg.bidders):
        bd = bid_distribution(b.dist, b.strategy)
        grid = np.linspace(bd.min_bid, bd.max_bid, args.grid_size)
        rivals = [(o.dist, o.strategy) for j, o in enumerate(cfg.bidders) if j != i]
        G = max_of_strategies(rivals)
        name = f"{i}_{b.strategy.kind}"
        write_curve_csv(out / f"curves_{name}.csv", revenue_objective_curve(bd, grid), ("reserve", "objective"))
        write_curve_csv(out / f"curves_{name}_payment.csv", payment_curve(b.dist, b.strategy, G, grid),
                        ("reserve", "payment"))
        print(f"wrote curves_{name}.csv and curves_{name}_payment.csv")
    return 0


def cmd_erm(args, out: Path) -> int:
    spec = load_json(args.config) if args.config else {}
    d = dist_from_json(spec.get("dist", {"kind": "uniform", "lo": 0, "hi": 1}))
    eps = spec.get("epsilon", "n^-1/3")
    schedule = cube_root_schedule if eps == "n^-1/3" else (lambda n, e=float(eps): e)
    results = []
    for n in spec.get("n", [10 ** 4]):
        cfg = ErmExperimentConfig(d, float(spec.get("r", 0.5)), int(n), float(spec.get("delta", 0.05)),
                                  int(spec.get("replications", 200)), args.seed, schedule)
        res = erm_experiment(cfg)
        results += res
        freq = sum(r.violated for r in res) / len(res)
        print(f"n={n}: median x_hat={np.median([r.reserve_value_hat for r in res]):.6g} "
              f"bound={res[0].bound:.6g} violation_frequency={freq:.4f}")
    write_erm_csv(out / "erm.csv", results)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (AUCTIONLAB_OUT overrides)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    p = argparse.ArgumentParser(prog="auctionlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("reproduce", parents=[common])
    r.add_argument("--table", choices=(*TABLES, "all"), default="all")
    s = sub.add_parser("simulate", parents=[common])
    s.add_argument("--config", required=True)
    s.add_argument("--rounds", type=int, default=10 ** 6)
    v = sub.add_parser("solve", parents=[common])
    v.add_argument("what", choices=("linear", "threshold", "nash"))
    v.add_argument("--config", required=True)
    c = sub.add_parser("curves", parents=[common])
    c.add_argument("--config", required=True)
    c.add_argument("--grid-size", type=int, default=256)
    e = sub.add_parser("erm", parents=[common])
    e.add_argument("--config", default=None)
    return p


COMMANDS = {"reproduce": cmd_reproduce, "simulate": cmd_simulate, "solve": cmd_solve,
            "curves": cmd_curves, "erm": cmd_erm}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(os.environ.get("AUCTIONLAB_OUT") or args.out)
    try:
        code = COMMANDS[args.command](args, out)
    except (AuctionLabError, OSError) as exc:
        print(f"auctionlab: error: {exc}", file=sys.stderr)
        return 2
    _manifest(args, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
