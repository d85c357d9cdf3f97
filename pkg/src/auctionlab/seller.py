"""Seller side: monopoly reserves of bid distributions, ERM reserves, revenue curves."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .dist import CompetitionDistribution, ValueDistribution
from .errors import DomainError, SingularDensityError
from .integrals import expected_payment_quadrature
from .numerics import grid_argmax
from .strategy import BidDistribution, BidStrategy

RESERVE_GRID = 4096


@dataclass(frozen=True)
class ReserveResult:
    reserve_price: float
    reserve_value: float
    objective_at_reserve: float

    def to_json(self) -> dict:
        return asdict(self)


def exact_reserve(bd: BidDistribution, grid: int = RESERVE_GRID) -> ReserveResult:
    """Smallest global maximizer of b (1 - F_B(b)) over the bid range."""
    obj = lambda b: b * np.asarray(bd.sf(b))

    def polish(a, b):
        # the curve's slope is -psi_B f_B; only a strict sign change of psi_B pins an interior peak
        try:
            pa, pb = bd.virtual_value(a), bd.virtual_value(b)
        except SingularDensityError:
            return None
        if pa < 0 < pb:
            return brentq(bd.virtual_value, a, b, xtol=1e-15, rtol=1e-15)
        return None

    price, value = grid_argmax(obj, bd.min_bid, bd.max_bid, n=grid, polish=polish)
    return ReserveResult(price, float(bd.inverse(price)), value)


def erm_reserve(bids) -> float:
    """Sample point b maximizing b * #{bids >= b} / n; ties go to the smallest b."""
    b = np.sort(np.asarray(bids, dtype=float).ravel())
    n = b.size
    if n == 0:
        raise DomainError("ERM reserve needs at least one bid")
    cleared = n - np.searchsorted(b, b, side="left")
    return float(b[int(np.argmax(b * cleared))])


def revenue_objective_curve(bd: BidDistribution, grid) -> np.ndarray:
    """Rows (b, b (1 - F_B(b)))."""
    grid = np.asarray(grid, dtype=float)
    return np.column_stack([grid, grid * np.asarray(bd.sf(grid))])


def payment_curve(d: ValueDistribution, s: BidStrategy, G: CompetitionDistribution | None, grid) -> np.ndarray:
    """Rows (r, expected payment of the bidder at reserve price r)."""
    grid = np.asarray(grid, dtype=float)
    pay = [expected_payment_quadrature(d, s, G, r) for r in grid]
    return np.column_stack([grid, pay])


def write_curve_csv(path: str | Path, rows: np.ndarray, header: tuple[str, str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for a, b in rows:
            w.writerow([f"{a:.17g}", f"{b:.17g}"])
    return path
