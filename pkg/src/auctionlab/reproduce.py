"""Reference tables: each row pairs a published number with the value computed here."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .auction import ReservePolicy, myerson_uplift_closed_form, one_strategic, outcome_quadrature
from .dist import LogNormal, Uniform, max_of_truthful, monopoly_price
from .optimize import nash_revenue_equivalence_check, nash_threshold, one_strategic_threshold, optimal_linear_alpha
from .robustness import ErmExperimentConfig, erm_experiment, violation_frequency
from .seller import exact_reserve
from .strategy import ThresholdedParams, bid_distribution, make_thresholded, truthful

TABLES = ("uniform_one_strategic", "lognormal_one_strategic", "nash_uniform", "myerson_uplift", "erm_robustness")


@dataclass
class Row:
    quantity: str
    paper_value: float
    computed_value: float
    tolerance: float
    upper_bound: bool = False  # row passes when computed <= paper_value + tolerance

    @property
    def abs_error(self) -> float:
        if self.upper_bound:
            return max(0.0, self.computed_value - self.paper_value)
        return abs(self.computed_value - self.paper_value)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.computed_value) and self.abs_error <= self.tolerance)


def _thresholded_at(d, r):
    return make_thresholded(d, ThresholdedParams(r))


def uniform_one_strategic() -> list[Row]:
    u = Uniform(0.0, 1.0)
    G = max_of_truthful(u, 1)
    base = outcome_quadrature(one_strategic(u, 2, truthful()))
    thr = outcome_quadrature(one_strategic(u, 2, _thresholded_at(u, 0.5)))
    r_star = one_strategic_threshold(u, G).value
    best = outcome_quadrature(one_strategic(u, 2, _thresholded_at(u, r_star)))
    alpha = optimal_linear_alpha(u, G).value
    return [
        Row("truthful_utility", 1 / 12, base.utility[0], 1e-6),
        Row("thresholded_utility", 0.1316, thr.utility[0], 5e-4),
        Row("optimal_threshold_utility", 0.1468, best.utility[0], 5e-4),
        Row("welfare_truthful", 0.583, base.welfare, 1e-3),
        Row("welfare_thresholded", 0.632, thr.welfare, 1e-3),
        Row("truthful_opponent_utility", 0.0833, thr.utility[1], 1e-4),
        Row("percent_increase_thresholded", 57.0, 100 * (thr.utility[0] / base.utility[0] - 1), 1.0),
        Row("percent_increase_optimal", 76.0, 100 * (best.utility[0] / base.utility[0] - 1), 1.0),
        Row("alpha_star", 0.7, alpha, 1e-6),
        Row("r_star_one_strategic", 0.79681, r_star, 1e-4),
    ]


def lognormal_one_strategic() -> list[Row]:
    d = LogNormal(0.25, 1.0)
    base = outcome_quadrature(one_strategic(d, 2, truthful()))
    thr = outcome_quadrature(one_strategic(d, 2, _thresholded_at(d, monopoly_price(d))))
    free = outcome_quadrature(one_strategic(d, 2, truthful(), policy=ReservePolicy("fixed", reserves=(d.support_lo, monopoly_price(d)))))
    return [
        Row("truthful_utility", 0.791, base.utility[0], 0.01),
        Row("thresholded_utility", 1.025, thr.utility[0], 0.01),
        Row("no_reserve_utility", 1.100, free.utility[0], 0.01),
        Row("percent_increase_thresholded", 29.5, 100 * (thr.utility[0] / base.utility[0] - 1), 3.0),
    ]


def nash_uniform() -> list[Row]:
    u = Uniform(0.0, 1.0)
    rows = [Row(f"nash_r_star_K{K}", ref, nash_threshold(u, K).value, 1e-8)
            for K, ref in ((2, 0.75), (3, 2 / 3), (4, 0.625), (5, 0.6))]
    for K, rev, util in ((2, 1 / 3, 1 / 6), (3, 1 / 2, 1 / 12)):
        rn, rf, un, uf = nash_revenue_equivalence_check(u, K)
        rows += [Row(f"nash_revenue_K{K}", rev, rn, 1e-8), Row(f"no_reserve_revenue_K{K}", rev, rf, 1e-8),
                 Row(f"nash_buyer_utility_K{K}", util, un, 1e-8), Row(f"no_reserve_buyer_utility_K{K}", util, uf, 1e-8)]
    r2 = nash_threshold(u, 2).value
    rows.append(Row("nash_reserve_price_K2", 0.1875, exact_reserve(bid_distribution(u, _thresholded_at(u, r2))).reserve_price, 1e-8))
    return rows


def myerson_uplift() -> list[Row]:
    u = Uniform(0.0, 1.0)
    thr = _thresholded_at(u, 0.5)
    my_t = outcome_quadrature(one_strategic(u, 2, thr, "myerson"))
    my_b = outcome_quadrature(one_strategic(u, 2, truthful(), "myerson"))
    return [
        Row("myerson_thresholded_utility", 7 / 48, my_t.utility[0], 1e-6),
        Row("myerson_uplift_quadrature", 1 / 16, my_t.utility[0] - my_b.utility[0], 1e-6),
        Row("myerson_uplift_closed_form_K2", 1 / 16, myerson_uplift_closed_form(u, 2), 1e-10),
        Row("myerson_uplift_closed_form_K3", 1 / 32, myerson_uplift_closed_form(u, 3), 1e-10),
        Row("myerson_total_revenue_invariance", my_b.seller_revenue, my_t.seller_revenue, 1e-8),
    ]


def erm_robustness(seed: int = 0) -> list[Row]:
    u = Uniform(0.0, 1.0)
    res = erm_experiment(ErmExperimentConfig(u, 0.5, 10 ** 4, 0.05, 200, seed))
    medians = [float(np.median([r.reserve_value_hat for r in erm_experiment(
        ErmExperimentConfig(u, 0.5, n, 0.05, 200, seed))])) for n in (10 ** 3, 10 ** 4, 10 ** 5)]
    decreasing = float(medians[0] > medians[1] > medians[2])
    return [
        Row("violation_frequency_n1e4", 0.10, violation_frequency(res), 0.0, upper_bound=True),
        Row("median_x_hat_decreasing_in_n", 1.0, decreasing, 0.0),
    ]


BUILDERS = {"uniform_one_strategic": uniform_one_strategic, "lognormal_one_strategic": lognormal_one_strategic,
            "nash_uniform": nash_uniform, "myerson_uplift": myerson_uplift, "erm_robustness": erm_robustness}


def build_table(table_id: str, seed: int = 0) -> list[Row]:
    if table_id == "erm_robustness":
        return erm_robustness(seed)
    return BUILDERS[table_id]()


def write_table(path: str | Path, rows: list[Row]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "paper_value", "computed_value", "abs_error", "tolerance", "pass"])
        for r in rows:
            w.writerow([r.quantity, f"{r.paper_value:.17g}", f"{r.computed_value:.17g}",
                        f"{r.abs_error:.17g}", f"{r.tolerance:.17g}", int(r.passed)])
    return path
