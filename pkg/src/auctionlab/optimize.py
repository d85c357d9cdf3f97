"""First-order machinery for the strategic bidder.

Covers directional derivatives of the utility, the optimal linear shading
factor, the best threshold for one strategic bidder, and the symmetric
threshold equilibrium.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .auction import AuctionConfig, Bidder, ReservePolicy, outcome_quadrature
from .dist import CompetitionDistribution, ValueDistribution, max_of_strategies, max_of_truthful, monopoly_price
from .errors import ConfigError, DegenerateCrossingError, NoRootError
from .integrals import expected_utility_quadrature
from .numerics import find_sign_change, fixed_gauss_legendre
from .seller import exact_reserve
from .strategy import (BidStrategy, ThresholdedParams, bid_distribution, h_beta, linear,
                       make_thresholded, truthful)

ROOT_OFFSET = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    bracket_lo: float | None = None
    bracket_hi: float | None = None
    abs_tol: float = 1e-10
    max_iter: int = 200
    scan_points: int = 4096

    def __post_init__(self):
        if self.bracket_lo is not None and self.bracket_hi is not None and not self.bracket_lo < self.bracket_hi:
            raise ConfigError("bracket_lo must be below bracket_hi")
        if not self.abs_tol > 0:
            raise ConfigError("abs_tol must be positive")


@dataclass
class SolverResult:
    name: str
    value: float
    residual: float
    iterations: int
    bracket: tuple
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {self.name: self.value, "residual": self.residual, "iterations": self.iterations,
               "bracket": list(self.bracket)}
        out.update(self.extra)
        return out


def _solve(residual: Callable[[float], float], scan: np.ndarray, values: np.ndarray, rising: bool,
           name: str, cfg: SolverConfig) -> SolverResult:
    k = find_sign_change(values, rising=rising)
    if k is None:
        raise NoRootError(f"{name}: residual has no sign change on [{scan[0]}, {scan[-1]}]")
    a, b = float(scan[k]), float(scan[k + 1])
    if values[k + 1] == 0:
        return SolverResult(name, b, 0.0, 0, (a, b))
    root, info = brentq(residual, a, b, xtol=cfg.abs_tol * 1e-2, rtol=4 * np.finfo(float).eps,
                        maxiter=cfg.max_iter, full_output=True)
    return SolverResult(name, float(root), float(residual(root)), int(info.iterations), (a, b))


# ---------------------------------------------------------------- directional derivative

def reserve_value(d: ValueDistribution, s: BidStrategy) -> float:
    return exact_reserve(bid_distribution(d, s)).reserve_value


def directional_derivative(d: ValueDistribution, s: BidStrategy, rho: Callable, G: CompetitionDistribution,
                           rho_deriv: Callable | None = None, x_beta: float | None = None) -> float:
    """d/dt U(beta + t rho) at t = 0 for the lazy auction with a monopoly reserve.

    Interior term E[g(beta)(X - beta) rho 1(X >= x_beta)] plus the boundary
    terms from the moving reserve value x_beta, where h_beta crosses zero.
    """
    if rho_deriv is None:
        step = 1e-6 * d.span
        rho_deriv = lambda x: (rho(x + step) - rho(x - step)) / (2 * step)
    x_b = reserve_value(d, s) if x_beta is None else float(x_beta)
    pts = [k for k in s.kinks if d.support_lo < k < d.support_hi]

    def integrand(x):
        b = np.asarray(s(x))
        return np.asarray(G.g(b)) * (x - b) * np.asarray(rho(x))

    interior = d.expect(integrand, lo=x_b, points=pts, rtol=1e-11)
    if x_b <= d.support_lo and float(h_beta(d, s, d.support_lo)) > 0:
        return interior
    step = 1e-5 * d.span
    lo_pt = max(x_b - step, d.support_lo)
    hi_pt = min(x_b + step, d.support_hi)
    h_prime = (float(h_beta(d, s, hi_pt)) - float(h_beta(d, s, lo_pt))) / (hi_pt - lo_pt)
    if abs(h_prime) < 1e-7:
        raise DegenerateCrossingError("h_beta is flat where it crosses zero")
    Gx = float(G.G(float(s(x_b))))
    f, sf = float(d.pdf(x_b)), float(d.sf(x_b))
    r0, r1 = float(np.asarray(rho(np.array([x_b])))[0]), float(np.asarray(rho_deriv(np.array([x_b])))[0])
    return interior + Gx * (x_b * f / h_prime - sf) * r0 - r1 * x_b * sf * Gx / h_prime


def thresholded_directional_derivative(d: ValueDistribution, p: ThresholdedParams, rho: Callable,
                                       G: CompetitionDistribution) -> float:
    """d/dt U for the thresholded strategy with continuation gamma + t rho.

    The overbidding branch below r follows the continuation, so only rho on
    [r, hi] and rho(r) matter.
    """
    r, gamma = float(p.r), p.gamma
    if p.epsilon != 0:
        raise ConfigError("the thresholded derivative is implemented for epsilon = 0")

    def interior(x):
        b = np.asarray(gamma(x))
        return (x - b) * np.asarray(G.g(b)) * np.asarray(rho(x))

    first = d.expect(interior, lo=r, points=gamma.kinks, rtol=1e-11)
    return first + float(np.asarray(rho(np.array([r])))[0]) * float(d.sf(r)) * _threshold_balance(d, G, gamma, r)


def _threshold_balance(d: ValueDistribution, G: CompetitionDistribution, gamma: BidStrategy, r: float) -> float:
    """E[X/(1-F(X)) g(gamma(r)(1-F(r))/(1-F(X))) 1(X <= r)] - G(gamma(r))."""
    c = float(gamma(r)) * float(d.sf(r))
    pts = [b for b in G.breakpoints]

    def integrand(x):
        sf = np.asarray(d.sf(x))
        return x / sf * np.asarray(G.g(c / sf))

    # kinks of g show up where c/sf(x) hits a breakpoint of G
    xs = [float(d.quantile(1.0 - c / b)) for b in pts if b > c]
    return d.expect(integrand, hi=r, points=[x for x in xs if d.support_lo < x < r], rtol=1e-12) - float(G.G(float(gamma(r))))


# ---------------------------------------------------------------- solvers

def linear_residual(d: ValueDistribution, G: CompetitionDistribution, alpha: float, m: float | None = None) -> float:
    """(1 - a) E[g(a X) X^2 1(X >= m)] - m (1 - F(m)) G(a m), m the monopoly price."""
    m = monopoly_price(d) if m is None else m
    lhs = d.expect(lambda x: np.asarray(G.g(alpha * x)) * x * x, lo=m, rtol=1e-12)
    return (1 - alpha) * lhs - m * float(d.sf(m)) * float(G.G(alpha * m))


def optimal_linear_alpha(d: ValueDistribution, G: CompetitionDistribution, cfg: SolverConfig = SolverConfig()) -> SolverResult:
    m = monopoly_price(d)
    lo = 1e-3 if cfg.bracket_lo is None else cfg.bracket_lo
    hi = 1.0 if cfg.bracket_hi is None else cfg.bracket_hi
    scan = np.linspace(lo, hi, min(cfg.scan_points, 512))
    res = lambda a: linear_residual(d, G, a, m)
    vals = np.array([res(a) for a in scan])
    return _solve(res, scan, vals, rising=False, name="alpha_star", cfg=cfg)


def _threshold_scan(d: ValueDistribution, G: CompetitionDistribution, rs: np.ndarray) -> np.ndarray:
    """Vectorized fixed-rule residual of the one-strategic threshold equation (truthful continuation)."""
    c = rs * np.asarray(d.sf(rs))
    ua = np.zeros_like(rs)
    ub = np.asarray(d.cdf(rs))

    def integrand(u):
        x = np.asarray(d.quantile(u))
        sf = np.maximum(1.0 - u, np.asarray(d.sf(x)))
        return x / sf * np.asarray(G.g(c[:, None] / sf))

    return fixed_gauss_legendre(integrand, ua, ub, panels=8) - np.asarray(G.G(rs))


def threshold_residual(d: ValueDistribution, G: CompetitionDistribution, r: float) -> float:
    return _threshold_balance(d, G, truthful(), float(r))


def one_strategic_threshold(d: ValueDistribution, G: CompetitionDistribution,
                            cfg: SolverConfig = SolverConfig()) -> SolverResult:
    """Best threshold r* for a bidder continuing truthfully beyond r."""
    m = monopoly_price(d)
    lo = m + ROOT_OFFSET * d.span if cfg.bracket_lo is None else cfg.bracket_lo
    hi = float(d.quantile(1 - 1e-9)) if cfg.bracket_hi is None else cfg.bracket_hi
    scan = np.linspace(lo, hi, cfg.scan_points)
    vals = _threshold_scan(d, G, scan)
    try:
        return _solve(lambda r: threshold_residual(d, G, r), scan, vals, rising=True, name="r_star", cfg=cfg)
    except NoRootError as exc:
        raise NoRootError("no interior threshold solves the first-order condition") from exc


def nash_residual(d: ValueDistribution, K: int, r) -> float:
    """(K-1) E[X F^{K-2} (1-F) 1(X <= r)] - r (1-F(r)) F(r)^{K-1}."""
    r = float(r)
    integral = d.expect(lambda x: x * np.asarray(d.cdf(x)) ** (K - 2) * np.asarray(d.sf(x)), hi=r, rtol=1e-13)
    return (K - 1) * integral - r * float(d.sf(r)) * float(d.cdf(r)) ** (K - 1)


def _nash_scan(d: ValueDistribution, K: int, rs: np.ndarray) -> np.ndarray:
    ub = np.asarray(d.cdf(rs))

    def integrand(u):
        x = np.asarray(d.quantile(u))
        return x * u ** (K - 2) * (1.0 - u)

    integral = fixed_gauss_legendre(integrand, np.zeros_like(rs), ub, panels=4)
    return (K - 1) * integral - rs * np.asarray(d.sf(rs)) * ub ** (K - 1)


def nash_threshold(d: ValueDistribution, K: int, cfg: SolverConfig = SolverConfig()) -> SolverResult:
    """Common threshold of the symmetric equilibrium among K thresholding bidders."""
    if K < 2:
        raise NoRootError("the symmetric equilibrium needs K >= 2")
    m = monopoly_price(d)
    lo = m + ROOT_OFFSET * d.span if cfg.bracket_lo is None else cfg.bracket_lo
    hi = float(d.quantile(1 - 1e-9)) if cfg.bracket_hi is None else cfg.bracket_hi
    scan = np.linspace(lo, hi, cfg.scan_points)
    vals = _nash_scan(d, K, scan)
    out = _solve(lambda r: nash_residual(d, K, r), scan, vals, rising=True, name="r_star", cfg=cfg)
    out.extra["K"] = K
    return out


def nash_config(d: ValueDistribution, K: int, r: float, mechanism: str = "lazy_sp") -> AuctionConfig:
    s = make_thresholded(d, ThresholdedParams(r))
    return AuctionConfig(mechanism, tuple(Bidder(d, s) for _ in range(K)), ReservePolicy())


def nash_revenue_equivalence_check(d: ValueDistribution, K: int, cfg: SolverConfig = SolverConfig()):
    """(revenue at Nash, revenue without reserve, buyer utility at Nash, buyer utility without reserve)."""
    r = nash_threshold(d, K, cfg).value
    nash = outcome_quadrature(nash_config(d, K, r))
    plain = AuctionConfig("lazy_sp", tuple(Bidder(d, truthful()) for _ in range(K)),
                          ReservePolicy("fixed", reserves=(d.support_lo,) * K))
    free = outcome_quadrature(plain)
    return nash.seller_revenue, free.seller_revenue, nash.utility[0], free.utility[0]


def deviation_utility(d: ValueDistribution, K: int, r_common: float, r_dev: float) -> float:
    """Utility of one bidder thresholding at r_dev while K-1 others threshold at r_common."""
    rival = make_thresholded(d, ThresholdedParams(r_common))
    G = max_of_strategies([(d, rival)] * (K - 1))
    s = make_thresholded(d, ThresholdedParams(r_dev))
    return expected_utility_quadrature(d, s, G, reserve_value(d, s))


def affine_grid_search(d: ValueDistribution, K: int, alphas, cs, n_rounds: int = 20000,
                       seed: int = 0) -> dict:
    """Experimental: Monte Carlo grid search over affine strategies a x + c for one strategic bidder."""
    from .auction import mc_simulate, one_strategic
    from .strategy import affine

    best = {"alpha": None, "c": None, "utility": -np.inf}
    for a in alphas:
        for c in cs:
            s = affine(float(a), float(c))
            try:
                if float(s(d.support_lo)) < 0:
                    continue
                stats = mc_simulate(one_strategic(d, K, s), n_rounds, seed)
            except (ValueError, ZeroDivisionError):
                continue
            if stats.utility[0] > best["utility"]:
                best = {"alpha": float(a), "c": float(c), "utility": stats.utility[0],
                        "stderr": stats.stderr["utility"][0]}
    best["experimental"] = True
    return best


def competition_truthful(d: ValueDistribution, K: int) -> CompetitionDistribution:
    return max_of_truthful(d, K - 1)


def linear_strategy(alpha: float) -> BidStrategy:
    return linear(alpha)
