"""Finite-sample robustness of thresholding when the seller learns reserves by ERM."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .dist import ValueDistribution, hazard_rate
from .errors import ConfigError
from .seller import erm_reserve
from .strategy import BidStrategy, ThresholdedParams, make_thresholded


EPS_CLIP = 1.0 - 1e-6


def cube_root_schedule(n: int) -> float:
    return n ** (-1.0 / 3.0)


@dataclass(frozen=True)
class ErmExperimentConfig:
    d: ValueDistribution
    r: float
    n: int
    delta: float = 0.05
    replications: int = 200
    seed: int = 0
    epsilon_schedule: Callable[[int], float] = field(default=cube_root_schedule)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.n < 1 or self.replications < 1:
            raise ConfigError("n and replications must be positive")
        if not self.epsilon_schedule(self.n) > 0:
            raise ConfigError("epsilon_n must be positive")


@dataclass(frozen=True)
class ErmResult:
    replication: int
    n: int
    epsilon: float
    reserve_price_hat: float
    reserve_value_hat: float
    bound: float
    c_n: float
    x_max: float
    epsilon_feasible: bool
    violated: bool

    def to_json(self) -> dict:
        return asdict(self)


def dkw_width(n: int, delta: float) -> float:
    """C_n(delta) = sqrt(log(2/delta) / 2) / sqrt(n)."""
    return math.sqrt(math.log(2.0 / delta) / 2.0) / math.sqrt(n)


def gamma_F(d: ValueDistribution, r: float, grid: int = 1024) -> float:
    """Smallest density on a grid of [lo, r]: a lower slope bound for F there."""
    xs = np.linspace(d.support_lo, r, grid)
    return float(np.min(d.pdf(xs)))


def erm_experiment(cfg: ErmExperimentConfig) -> list[ErmResult]:
    d, r, n = cfg.d, float(cfg.r), cfg.n
    # a schedule value at or above gamma(r) (tiny n) is clipped just below it
    eps = min(float(cfg.epsilon_schedule(n)), EPS_CLIP * r)
    s = make_thresholded(d, ThresholdedParams(r, eps))
    c_n = dkw_width(n, cfg.delta)
    bound = 2 * r * c_n / (eps * gamma_F(d, r))
    F_r = float(d.cdf(r))
    out = []
    for k, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.replications)):
        x = d.sample(np.random.Generator(np.random.Philox(child)), n)
        price = erm_reserve(s(x))
        x_hat = float(np.clip(s.inverse_fn(price), d.support_lo, d.support_hi))
        x_max = float(x.max())
        out.append(ErmResult(k, n, eps, price, x_hat, bound, c_n, x_max,
                             bool(eps > x_max * c_n / F_r), bool(x_hat >= bound)))
    return out


def violation_frequency(results: list[ErmResult]) -> float:
    return sum(r.violated for r in results) / len(results)


def infeasible_fraction(results: list[ErmResult]) -> float:
    """Empirical delta_1: share of draws where epsilon misses the feasibility threshold."""
    return sum(not r.epsilon_feasible for r in results) / len(results)


def write_erm_csv(path: str | Path, results: list[ErmResult]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replication", "n", "epsilon", "x_hat", "bound", "feasible", "violated"])
        for r in results:
            w.writerow([r.replication, r.n, f"{r.epsilon:.17g}", f"{r.reserve_value_hat:.17g}",
                        f"{r.bound:.17g}", int(r.epsilon_feasible), int(r.violated)])
    return path


def perceived_virtual_value_gap(dF: ValueDistribution, dG: ValueDistribution, s: BidStrategy, x):
    """beta'(x) (1/lambda_G(x) - 1/lambda_F(x)).

    A seller who believes values follow G sees psi_{B,F}(beta(x)) minus this gap.
    """
    return np.asarray(s.derivative(x)) * (1.0 / np.asarray(hazard_rate(dG, x)) - 1.0 / np.asarray(hazard_rate(dF, x)))
