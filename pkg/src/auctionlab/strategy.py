"""Bidding strategies, the induced virtual-value map h_beta, and bid distributions.

For a strategy beta and value law F, h_beta(x) = beta(x) - beta'(x)(1-F(x))/f(x)
is the virtual value the seller sees at the bid beta(x).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .dist import ValueDistribution, _check_support, _scalar_or_array, monopoly_price
from .errors import (ConfigError, DomainError, InfeasibleEpsilonError,
                     NonIncreasingStrategyError, SingularDensityError)
from .numerics import bisect_increasing

FD_REL_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class BidStrategy:
    """A strictly increasing map from values to bids.

    ``deriv_fn(x, side)`` is the analytic derivative when known; at a kink the
    one-sided value for ``side`` ("left" or "right") is returned. ``h_fn`` is
    an exact h-transform valid for ``dist`` only (used where rounding would
    blur a flat virtual value).
    """

    bid_fn: Callable[[np.ndarray], np.ndarray]
    deriv_fn: Callable[..., np.ndarray] | None = None
    descriptor: dict = field(default_factory=lambda: {"kind": "custom"})
    kinks: tuple = ()
    inverse_fn: Callable[[np.ndarray], np.ndarray] | None = None
    h_fn: Callable[[np.ndarray], np.ndarray] | None = None
    dist: ValueDistribution | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.asarray(self.bid_fn(x), dtype=float))

    bid = __call__

    def derivative(self, x, side: str = "left"):
        x = np.asarray(x, dtype=float)
        if self.deriv_fn is not None:
            out = np.asarray(self.deriv_fn(x, side), dtype=float)
        else:
            step = FD_REL_STEP * np.maximum(1.0, np.abs(x))
            out = (self.bid_fn(x + step) - self.bid_fn(x - step)) / (2 * step)
            if self.kinks:
                # one-sided differences within a step of a kink
                near = np.zeros(np.shape(x), dtype=bool)
                for k in self.kinks:
                    near |= np.abs(x - k) < step
                if side == "left":
                    one = (self.bid_fn(x) - self.bid_fn(x - step)) / step
                else:
                    one = (self.bid_fn(x + step) - self.bid_fn(x)) / step
                out = np.where(near, one, out)
        return _scalar_or_array(x, out)

    @property
    def kind(self) -> str:
        return self.descriptor.get("kind", "custom")

    def to_json(self) -> dict:
        return dict(self.descriptor)


def truthful() -> BidStrategy:
    return BidStrategy(lambda x: x, lambda x, side="left": np.ones(np.shape(x)),
                       {"kind": "truthful"}, inverse_fn=lambda b: b)


def linear(alpha: float) -> BidStrategy:
    if not alpha > 0:
        raise DomainError("linear shading factor must be positive")
    return BidStrategy(lambda x: alpha * x, lambda x, side="left": np.full(np.shape(x), alpha),
                       {"kind": "linear", "alpha": alpha}, inverse_fn=lambda b: b / alpha)


def affine(alpha: float, c: float) -> BidStrategy:
    if not alpha > 0:
        raise DomainError("affine slope must be positive")
    return BidStrategy(lambda x: alpha * x + c, lambda x, side="left": np.full(np.shape(x), alpha),
                       {"kind": "affine", "alpha": alpha, "c": c}, inverse_fn=lambda b: (b - c) / alpha)


def custom(bid: Callable, derivative: Callable | None = None, name: str = "custom",
           kinks: tuple = ()) -> BidStrategy:
    deriv = None if derivative is None else (lambda x, side="left": derivative(x))
    return BidStrategy(bid, deriv, {"kind": "custom", "name": name}, kinks=kinks)


def perturbed(s: BidStrategy, rho: Callable, rho_deriv: Callable, t: float) -> BidStrategy:
    """beta + t rho, with derivative beta' + t rho'."""
    return BidStrategy(lambda x: s.bid_fn(x) + t * rho(x),
                       lambda x, side="left": s.derivative(x, side) + t * rho_deriv(x),
                       {"kind": "custom", "name": f"{s.kind}+t*rho", "t": t}, kinks=s.kinks)


@dataclass(frozen=True, eq=False)
class ThresholdedParams:
    r: float
    epsilon: float = 0.0
    gamma: BidStrategy = field(default_factory=truthful)


def h_beta(d: ValueDistribution, s: BidStrategy, x, side: str = "left"):
    """beta(x) - beta'(x)(1 - F(x))/f(x), the seller-side virtual value at beta(x)."""
    x = _check_support(d, x)
    if s.h_fn is not None and s.dist is d:
        return _scalar_or_array(x, np.asarray(s.h_fn(x), dtype=float))
    f = np.asarray(d.pdf(x))
    if np.any(f <= 0):
        raise SingularDensityError("density is zero where h_beta was requested")
    out = np.asarray(s(x)) - np.asarray(s.derivative(x, side)) * np.asarray(d.sf(x)) / f
    return _scalar_or_array(x, out)


def make_thresholded(d: ValueDistribution, p: ThresholdedParams) -> BidStrategy:
    """Overbid below r so that h_beta = epsilon there; follow gamma from r on.

    beta(x) = (gamma(r) - eps)(1 - F(r))/(1 - F(x)) + eps for x < r, gamma(x) otherwise.
    """
    r, eps, gamma = float(p.r), float(p.epsilon), p.gamma
    if not d.support_lo < r < d.support_hi:
        raise DomainError(f"threshold {r} must lie inside the support")
    if eps < 0:
        raise InfeasibleEpsilonError("epsilon must be nonnegative")
    g_r = float(gamma(r))
    if not g_r > eps:
        raise InfeasibleEpsilonError(f"gamma(r) = {g_r} must exceed epsilon = {eps}")
    sf_r = float(d.sf(r))
    c = (g_r - eps) * sf_r

    def bid(x):
        with np.errstate(divide="ignore"):
            low = c / np.asarray(d.sf(np.minimum(x, r))) + eps
        return np.where(x < r, low, gamma.bid_fn(x))

    def deriv(x, side="left"):
        below = x <= r if side == "left" else x < r
        xm = np.minimum(x, r)
        sf = np.asarray(d.sf(xm))
        return np.where(below, c * np.asarray(d.pdf(xm)) / sf ** 2, gamma.derivative(x, side))

    def inverse(b):
        b = np.asarray(b, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            low = np.asarray(d.quantile(1.0 - c / np.maximum(b - eps, c)))
        if gamma.inverse_fn is not None:
            high = gamma.inverse_fn(b)
        else:
            high = bisect_increasing(gamma.bid_fn, b, r, d.support_hi)
        return np.where(b < g_r, low, high)

    def h_exact(x):
        return np.where(x < r, eps, h_beta(d, gamma, np.maximum(x, r), side="right"))

    desc = {"kind": "thresholded", "r": r, "epsilon": eps, "gamma": gamma.to_json()}
    return BidStrategy(bid, deriv, desc, kinks=(r, *gamma.kinks), inverse_fn=inverse,
                       h_fn=h_exact, dist=d)


def beta_from_target(d: ValueDistribution, g: Callable, x0: float, C: float,
                     validate: bool = True, region: tuple[float, float] | None = None) -> BidStrategy:
    """Strategy whose h-transform equals g, anchored at beta(x0) = C.

    beta(x) = [C(1 - F(x0)) - int_{x0}^x g f] / (1 - F(x)).
    """
    sf0 = float(d.sf(x0))
    if not sf0 > 0:
        raise DomainError("anchor x0 must have 1 - F(x0) > 0")

    def one(x):
        if x == x0:
            return C
        area = d.expect(g, min(x, x0), max(x, x0), rtol=1e-12)
        area = area if x > x0 else -area
        sf = float(d.sf(x))
        if sf <= 0:
            return np.inf
        return (C * sf0 - area) / sf

    def bid(x):
        x = np.asarray(x, dtype=float)
        return np.array([one(v) for v in x.ravel()]).reshape(x.shape)

    def deriv(x, side="left"):
        x = np.asarray(x, dtype=float)
        return (bid(x) - np.asarray(g(x))) * np.asarray(d.pdf(x)) / np.asarray(d.sf(x))

    s = BidStrategy(bid, deriv, {"kind": "from_target", "x0": x0, "C": C})
    if validate:
        lo, hi = region if region is not None else (d.support_lo, float(d.quantile(1.0 - 1e-6)))
        check_increasing(s, d, lo=lo, hi=hi, n=256)
    return s


def check_increasing(s: BidStrategy, d: ValueDistribution, lo: float | None = None,
                     hi: float | None = None, n: int = 1024) -> None:
    lo = d.support_lo if lo is None else lo
    hi = d.support_hi if hi is None else hi
    xs = np.linspace(lo, hi, n)
    delta = 1e-6 * (d.support_hi - d.support_lo)
    xs = xs[xs + delta <= hi]
    if not np.all(np.asarray(s(xs + delta)) > np.asarray(s(xs))):
        raise NonIncreasingStrategyError(f"{s.kind} strategy is not strictly increasing on the grid")


class BidDistribution:
    """Push-forward of a value law through a strictly increasing strategy."""

    def __init__(self, d: ValueDistribution, s: BidStrategy):
        self.dist, self.strategy = d, s
        self.min_bid = float(s(d.support_lo))
        self.max_bid = float(s(d.support_hi))
        self.kink_bids = tuple(float(s(k)) for k in s.kinks if d.support_lo < k < d.support_hi)

    def inverse(self, b):
        """beta^{-1}(b), clamped to the value support."""
        b = np.asarray(b, dtype=float)
        d, s = self.dist, self.strategy
        if s.inverse_fn is not None:
            x = np.clip(np.asarray(s.inverse_fn(b), dtype=float), d.support_lo, d.support_hi)
        else:
            x = bisect_increasing(s.bid_fn, b, d.support_lo, d.support_hi)
        x = np.where(b <= self.min_bid, d.support_lo, np.where(b >= self.max_bid, d.support_hi, x))
        return _scalar_or_array(b, x)

    def cdf(self, b):
        b = np.asarray(b, dtype=float)
        out = np.where(b <= self.min_bid, 0.0,
                       np.where(b >= self.max_bid, 1.0, self.dist.cdf(self.inverse(b))))
        return _scalar_or_array(b, out)

    def sf(self, b):
        b = np.asarray(b, dtype=float)
        out = np.where(b <= self.min_bid, 1.0,
                       np.where(b >= self.max_bid, 0.0, self.dist.sf(self.inverse(b))))
        return _scalar_or_array(b, out)

    def pdf(self, b):
        b = np.asarray(b, dtype=float)
        x = np.asarray(self.inverse(b))
        inside = (b >= self.min_bid) & (b <= self.max_bid)
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.asarray(self.dist.pdf(x)) / np.asarray(self.strategy.derivative(x))
        return _scalar_or_array(b, np.where(inside, dens, 0.0))

    def virtual_value(self, b):
        """psi_B(b) = b - (1 - F_B(b)) / f_B(b)."""
        b = np.asarray(b, dtype=float)
        f = np.asarray(self.pdf(b))
        if np.any(f <= 0):
            raise SingularDensityError("bid density is zero here")
        return _scalar_or_array(b, b - np.asarray(self.sf(b)) / f)

    def quantile(self, u):
        return self.strategy(self.dist.quantile(u))


def bid_distribution(d: ValueDistribution, s: BidStrategy) -> BidDistribution:
    return BidDistribution(d, s)


def from_json(desc: dict[str, Any], d: ValueDistribution | None = None) -> BidStrategy:
    """Strategy from a descriptor; thresholded strategies need the value law ``d``.

    ``"r": "monopoly"`` thresholds at the monopoly price of ``d``.
    """
    kind = desc.get("kind")
    try:
        if kind == "truthful":
            return truthful()
        if kind == "linear":
            return linear(float(desc["alpha"]))
        if kind == "affine":
            return affine(float(desc["alpha"]), float(desc.get("c", 0.0)))
        if kind == "thresholded":
            if d is None:
                raise ConfigError("thresholded strategy needs a value distribution")
            r = desc.get("r", "monopoly")
            r = monopoly_price(d) if r == "monopoly" else float(r)
            gamma = from_json(desc.get("gamma", {"kind": "truthful"}), d)
            return make_thresholded(d, ThresholdedParams(r, float(desc.get("epsilon", 0.0)), gamma))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad strategy descriptor {desc!r}: {exc}") from exc
    raise ConfigError(f"unknown strategy kind {kind!r}")
