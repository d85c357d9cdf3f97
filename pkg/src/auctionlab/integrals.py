"""Integrated Myerson-lemma quadratures for one bidder against a competition law G.

Both integrals run over values X >= x_beta in u = F(x) space, where the
integrands stay bounded even for thresholded strategies near the support top.
"""

from __future__ import annotations

import numpy as np

from .dist import CompetitionDistribution, ValueDistribution
from .strategy import BidStrategy, bid_distribution, h_beta

QUAD_RTOL = 1e-10


def value_breakpoints(d: ValueDistribution, s: BidStrategy, bids=()) -> list[float]:
    """Kinks of s plus the preimages of the given bid levels, inside the support."""
    bd = bid_distribution(d, s)
    pts = [float(k) for k in s.kinks]
    for b in bids:
        if bd.min_bid < b < bd.max_bid:
            pts.append(float(bd.inverse(float(b))))
    return sorted(p for p in set(pts) if d.support_lo < p < d.support_hi)


def _G_at_bids(G: CompetitionDistribution | None, s: BidStrategy, x):
    if G is None or G.degenerate:
        return np.ones(np.shape(x))
    return np.asarray(G.G(np.asarray(s(x))))


def expected_utility_quadrature(d: ValueDistribution, s: BidStrategy, G: CompetitionDistribution | None,
                                reserve_value: float, rtol: float = QUAD_RTOL) -> float:
    """E[(X - h_beta(X)) G(beta(X)) 1(X >= x_beta)]."""
    reserve_value = float(reserve_value)
    if reserve_value >= d.support_hi:
        return 0.0
    bids = () if G is None else G.breakpoints
    pts = value_breakpoints(d, s, bids)

    def integrand(x):
        return (x - np.asarray(h_beta(d, s, x))) * _G_at_bids(G, s, x)

    return d.expect(integrand, lo=reserve_value, points=pts, rtol=rtol)


def expected_payment_value(d: ValueDistribution, s: BidStrategy, G: CompetitionDistribution | None,
                           reserve_value: float, rtol: float = QUAD_RTOL) -> float:
    """E[h_beta(X) G(beta(X)) 1(X >= x_beta)] with the threshold given in value space."""
    reserve_value = float(reserve_value)
    if reserve_value >= d.support_hi:
        return 0.0
    bids = () if G is None else G.breakpoints
    pts = value_breakpoints(d, s, bids)

    def integrand(x):
        return np.asarray(h_beta(d, s, x)) * _G_at_bids(G, s, x)

    return d.expect(integrand, lo=reserve_value, points=pts, rtol=rtol)


def expected_payment_quadrature(d: ValueDistribution, s: BidStrategy, G: CompetitionDistribution | None,
                                reserve_price: float, rtol: float = QUAD_RTOL) -> float:
    """Expected payment E[psi_B(B) G(B) 1(B >= r)] for a reserve price r in bid space."""
    bd = bid_distribution(d, s)
    if reserve_price > bd.max_bid:
        return 0.0
    x_beta = float(bd.inverse(float(reserve_price)))
    return expected_payment_value(d, s, G, x_beta, rtol)
