"""Mechanism evaluation: lazy and eager second price with reserves, and the Myerson auction.

Every mechanism is evaluated two ways. ``outcome_quadrature`` integrates each
bidder's interim allocation A_i against the integrated Myerson lemma
(utility E[(X - h) A], payment E[h A], welfare E[X A]); ``mc_simulate`` plays
i.i.d. rounds with counter-based substreams so results depend only on the seed.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import dist as dist_mod
from . import strategy as strategy_mod
from .dist import ValueDistribution, is_regular, monopoly_price
from .errors import ConfigError, UnsupportedDistributionError
from .integrals import QUAD_RTOL, expected_payment_quadrature, expected_utility_quadrature
from .seller import erm_reserve, exact_reserve
from .strategy import BidStrategy, bid_distribution, h_beta

MECHANISMS = ("lazy_sp", "eager_sp", "myerson")
RESERVE_KINDS = ("exact_monopoly_per_bidder", "erm_per_bidder", "fixed")
CHUNK_ROUNDS = 1 << 16
LEVEL_ITERS = 64

__all__ = ["Bidder", "ReservePolicy", "AuctionConfig", "OutcomeStats", "resolve_reserves",
           "outcome_quadrature", "mc_simulate", "myerson_uplift_closed_form", "one_strategic",
           "expected_utility_quadrature", "expected_payment_quadrature"]


@dataclass(frozen=True)
class Bidder:
    dist: ValueDistribution
    strategy: BidStrategy


@dataclass(frozen=True)
class ReservePolicy:
    kind: str = "exact_monopoly_per_bidder"
    n_samples: int = 0
    seed: int | None = None
    reserves: tuple = ()

    def __post_init__(self):
        if self.kind not in RESERVE_KINDS:
            raise ConfigError(f"unknown reserve policy {self.kind!r}")
        if self.kind == "erm_per_bidder" and self.n_samples < 1:
            raise ConfigError("erm_per_bidder needs n_samples >= 1")


@dataclass(frozen=True)
class AuctionConfig:
    mechanism: str
    bidders: tuple
    reserve_policy: ReservePolicy = field(default_factory=ReservePolicy)
    seller_welfare_benevolent: bool = True

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ConfigError(f"unknown mechanism {self.mechanism!r}")
        if len(self.bidders) < 1:
            raise ConfigError("an auction needs at least one bidder")
        if self.reserve_policy.kind == "fixed" and len(self.reserve_policy.reserves) != len(self.bidders):
            raise ConfigError("fixed reserves must match the number of bidders")

    @property
    def K(self) -> int:
        return len(self.bidders)

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "AuctionConfig":
        try:
            bidders = []
            for entry in obj["bidders"]:
                d = dist_mod.from_json(entry["dist"])
                s = strategy_mod.from_json(entry.get("strategy", {"kind": "truthful"}), d)
                bidders.extend([Bidder(d, s)] * int(entry.get("copies", 1)))
            rp = dict(obj.get("reserve_policy", {"kind": "exact_monopoly_per_bidder"}))
            policy = ReservePolicy(rp.pop("kind"), int(rp.get("n_samples", 0)), rp.get("seed"),
                                   tuple(float(r) for r in rp.get("reserves", ())))
            return cls(obj["mechanism"], tuple(bidders), policy,
                       bool(obj.get("seller_welfare_benevolent", True)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad auction config: {exc!r}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "AuctionConfig":
        return cls.from_json(load_json(path))


def load_json(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


@dataclass
class OutcomeStats:
    utility: list
    payment: list
    seller_revenue: float
    welfare: float
    allocation_probability: float
    stderr: dict
    method: str = "quadrature"
    n_rounds: int = 0
    reserves: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def resolve_reserves(cfg: AuctionConfig, seed_seq: np.random.SeedSequence | None = None) -> np.ndarray:
    """Stage 1: per-bidder reserve prices in bid space."""
    p = cfg.reserve_policy
    if p.kind == "fixed":
        return np.asarray(p.reserves, dtype=float)
    if p.kind == "exact_monopoly_per_bidder":
        return np.array([exact_reserve(bid_distribution(b.dist, b.strategy)).reserve_price
                         for b in cfg.bidders])
    root = np.random.SeedSequence(p.seed) if p.seed is not None else (seed_seq or np.random.SeedSequence(0))
    out = []
    for b, child in zip(cfg.bidders, root.spawn(cfg.K)):
        rng = np.random.Generator(np.random.Philox(child))
        out.append(erm_reserve(b.strategy(b.dist.sample(rng, p.n_samples))))
    return np.asarray(out)


# ---------------------------------------------------------------- h-level sets

def _level_point(d: ValueDistribution, s: BidStrategy, v, strict: bool) -> np.ndarray:
    """Smallest x with h(x) >= v (or > v when strict), h assumed nondecreasing."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    lo = np.full(v.shape, d.support_lo)
    hi = np.full(v.shape, d.support_hi)
    hit = (lambda h, t: h > t) if strict else (lambda h, t: h >= t)
    at_lo = hit(np.asarray(h_beta(d, s, lo)), v)
    never = ~hit(np.asarray(h_beta(d, s, hi)), v)
    for _ in range(LEVEL_ITERS):
        mid = 0.5 * (lo + hi)
        ok = hit(np.asarray(h_beta(d, s, mid)), v)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    out = np.where(at_lo, d.support_lo, hi)
    return np.where(never, np.inf, out)


def _prob_h_below(b: Bidder, v, strict: bool) -> np.ndarray:
    """P(h(X) < v) if strict else P(h(X) <= v)."""
    x = _level_point(b.dist, b.strategy, v, strict=not strict)
    return np.where(np.isinf(x), 1.0, np.asarray(b.dist.cdf(np.minimum(x, b.dist.support_hi))))


def _h_levels(b: Bidder) -> list[float]:
    d, s = b.dist, b.strategy
    xs = [d.support_lo, d.support_hi, *[k for k in s.kinks if d.support_lo < k < d.support_hi]]
    out = [float(h_beta(d, s, x, side="left")) for x in xs]
    out += [float(h_beta(d, s, x, side="right")) for x in xs[2:]]
    return out


# ---------------------------------------------------------------- quadrature

def _allocation(cfg: AuctionConfig, i: int, reserves: np.ndarray):
    """Interim allocation A_i(x) as a vectorized function of bidder i's value, plus its kinks."""
    me = cfg.bidders[i]
    others = [(j, b) for j, b in enumerate(cfg.bidders) if j != i]
    bds = {j: bid_distribution(b.dist, b.strategy) for j, b in others}
    my_bd = bid_distribution(me.dist, me.strategy)

    if cfg.mechanism in ("lazy_sp", "eager_sp"):
        eager = cfg.mechanism == "eager_sp"
        r_i = reserves[i]

        def alloc(x):
            b = np.asarray(me.strategy(x))
            out = (b >= r_i).astype(float)
            for j, _ in others:
                out = out * np.asarray(bds[j].cdf(np.maximum(b, reserves[j]) if eager else b))
            return out

        levels = [r_i]
        for j, _ in others:
            levels += [bds[j].min_bid, bds[j].max_bid, *bds[j].kink_bids, reserves[j]]
        pts = [float(my_bd.inverse(l)) for l in levels if my_bd.min_bid < l < my_bd.max_bid]
        start = float(my_bd.inverse(r_i)) if r_i > my_bd.min_bid else me.dist.support_lo
        return alloc, pts, start

    benevolent = cfg.seller_welfare_benevolent

    def alloc(x):
        v = np.asarray(h_beta(me.dist, me.strategy, x))
        out = (v >= 0 if benevolent else v > 0).astype(float)
        for j, b in others:
            out = out * _prob_h_below(b, v, strict=j < i)
        return out

    levels = [0.0] + [l for _, b in others for l in _h_levels(b)]
    pts = []
    for l in levels:
        for strict in (False, True):
            x = float(_level_point(me.dist, me.strategy, l, strict)[0])
            if me.dist.support_lo < x < me.dist.support_hi:
                pts.append(x)
    return alloc, sorted(set(pts)), me.dist.support_lo


def outcome_quadrature(cfg: AuctionConfig, reserves=None, rtol: float = QUAD_RTOL) -> OutcomeStats:
    """Exact interim-allocation integrals for every bidder."""
    reserves = resolve_reserves(cfg) if reserves is None else np.asarray(reserves, dtype=float)
    util, pay, welf, alloc_p = [], [], [], []
    for i, b in enumerate(cfg.bidders):
        d, s = b.dist, b.strategy
        A, pts, start = _allocation(cfg, i, reserves)
        pts = sorted(set(pts) | {float(k) for k in s.kinks if d.support_lo < k < d.support_hi})
        h = lambda x: np.asarray(h_beta(d, s, x))
        util.append(d.expect(lambda x: (x - h(x)) * A(x), lo=start, points=pts, rtol=rtol))
        pay.append(d.expect(lambda x: h(x) * A(x), lo=start, points=pts, rtol=rtol))
        welf.append(d.expect(lambda x: x * A(x), lo=start, points=pts, rtol=rtol))
        alloc_p.append(d.expect(A, lo=start, points=pts, rtol=rtol))
    zero = {"utility": [0.0] * cfg.K, "payment": [0.0] * cfg.K, "seller_revenue": 0.0,
            "welfare": 0.0, "allocation_probability": 0.0}
    sold = min(1.0, max(0.0, float(sum(alloc_p))))  # clip quadrature rounding
    return OutcomeStats(util, pay, float(sum(pay)), float(sum(welf)), sold, zero,
                        "quadrature", 0, [float(r) for r in reserves])


# ---------------------------------------------------------------- Monte Carlo

def _play(cfg: AuctionConfig, reserves: np.ndarray, rng: np.random.Generator, m: int) -> np.ndarray:
    """Play m rounds; return per-quantity [sum, sum of squares] rows.

    Quantities: utility_1..K, payment_1..K, revenue, welfare, sale.
    """
    K = cfg.K
    X = np.empty((K, m))
    for i, b in enumerate(cfg.bidders):
        X[i] = b.dist.sample(rng, m)
    B = np.vstack([np.asarray(b.strategy(X[i])) for i, b in enumerate(cfg.bidders)])
    rows = np.arange(m)
    price = np.zeros(m)

    if cfg.mechanism in ("lazy_sp", "eager_sp"):
        if cfg.mechanism == "lazy_sp":
            w = np.argmax(B, axis=0)
            sale = B[w, rows] >= reserves[w]
            live = B
        else:
            clears = B >= reserves[:, None]
            live = np.where(clears, B, -np.inf)
            w = np.argmax(live, axis=0)
            sale = clears.any(axis=0)
        rest = live.copy()
        rest[w, rows] = -np.inf
        second = rest.max(axis=0) if K > 1 else np.full(m, -np.inf)
        price = np.maximum(second, reserves[w])
    else:
        V = np.vstack([np.asarray(h_beta(b.dist, b.strategy, X[i])) for i, b in enumerate(cfg.bidders)])
        ok = V >= 0 if cfg.seller_welfare_benevolent else V > 0
        live = np.where(ok, V, -np.inf)
        w = np.argmax(live, axis=0)
        sale = ok.any(axis=0)
        rest = live.copy()
        rest[w, rows] = -np.inf
        runner = np.argmax(rest, axis=0)
        v2 = rest[runner, rows]
        # beating a lower index needs a strict win; the zero floor is strict only for a strict seller
        strict = np.where(v2 >= 0, runner < w, not cfg.seller_welfare_benevolent)
        v2 = np.maximum(v2, 0.0)
        for i, b in enumerate(cfg.bidders):
            for flag in (False, True):
                sel = sale & (w == i) & (strict == flag)
                if np.any(sel):
                    xc = _level_point(b.dist, b.strategy, v2[sel], strict=flag)
                    price[sel] = np.asarray(b.strategy(np.minimum(xc, b.dist.support_hi)))

    out = np.zeros((2 * K + 3, m))
    price = np.where(sale, price, 0.0)
    xw = np.where(sale, X[w, rows], 0.0)
    for i in range(K):
        mine = sale & (w == i)
        out[i] = np.where(mine, xw - price, 0.0)
        out[K + i] = np.where(mine, price, 0.0)
    out[2 * K] = price
    out[2 * K + 1] = xw
    out[2 * K + 2] = sale
    return np.column_stack([out.sum(axis=1), (out * out).sum(axis=1)])


def mc_simulate(cfg: AuctionConfig, n_rounds: int, seed: int, threads: int = 1,
                reserves=None, chunk: int = CHUNK_ROUNDS) -> OutcomeStats:
    """Two-stage Monte Carlo: fix reserves, then play ``n_rounds`` independent auctions.

    Rounds are cut into fixed chunks, each with its own Philox substream; chunk
    sums are added in chunk order, so ``threads`` never changes the result.
    """
    if n_rounds < 1:
        raise ConfigError("n_rounds must be at least 1")
    stage1, stage2 = np.random.SeedSequence(seed).spawn(2)
    reserves = resolve_reserves(cfg, stage1) if reserves is None else np.asarray(reserves, dtype=float)
    n_chunks = math.ceil(n_rounds / chunk)
    streams = stage2.spawn(n_chunks)

    def run(k):
        m = min(chunk, n_rounds - k * chunk)
        return _play(cfg, reserves, np.random.Generator(np.random.Philox(streams[k])), m)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, range(n_chunks)))
    else:
        parts = [run(k) for k in range(n_chunks)]
    total = parts[0].copy()
    for p in parts[1:]:
        total += p
    K, n = cfg.K, n_rounds
    mean = total[:, 0] / n
    var = np.maximum(total[:, 1] / n - mean ** 2, 0.0) * (n / (n - 1) if n > 1 else 0.0)
    se = np.sqrt(var / n)
    stderr = {"utility": se[:K].tolist(), "payment": se[K:2 * K].tolist(),
              "seller_revenue": float(se[2 * K]), "welfare": float(se[2 * K + 1]),
              "allocation_probability": float(se[2 * K + 2])}
    return OutcomeStats(mean[:K].tolist(), mean[K:2 * K].tolist(), float(mean[2 * K]),
                        float(mean[2 * K + 1]), float(mean[2 * K + 2]), stderr, "monte_carlo",
                        n_rounds, [float(r) for r in reserves])


def myerson_uplift_closed_form(d: ValueDistribution, K: int) -> float:
    """F(m)^{K-1} E[X 1(X <= m)], m the monopoly price of a regular d."""
    if not is_regular(d):
        raise UnsupportedDistributionError("closed-form uplift needs a regular distribution")
    m = monopoly_price(d)
    return float(d.cdf(m)) ** (K - 1) * d.expect(lambda x: x, hi=m)


def one_strategic(d: ValueDistribution, K: int, strategy: BidStrategy, mechanism: str = "lazy_sp",
                  policy: ReservePolicy | None = None, benevolent: bool = True) -> AuctionConfig:
    """Bidder 0 plays ``strategy``; the other K - 1 bid truthfully; all values i.i.d. d."""
    bidders = (Bidder(d, strategy),) + tuple(Bidder(d, strategy_mod.truthful()) for _ in range(K - 1))
    return AuctionConfig(mechanism, bidders, policy or ReservePolicy(), benevolent)
