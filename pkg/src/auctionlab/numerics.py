"""Quadrature, bracketing and one-dimensional maximization used by every module.

All integrands and objectives are vectorized: they receive a 1-D float array
and must return an array of the same shape.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np
from numpy.polynomial.legendre import leggauss

Vectorized = Callable[[np.ndarray], np.ndarray]

GL_ORDER = 64
_NODES, _WEIGHTS = leggauss(GL_ORDER)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _panel(func: Vectorized, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    return half * float(np.dot(_WEIGHTS, func(x)))


def _adapt(func, a, b, whole, rtol, atol, depth):
    mid = 0.5 * (a + b)
    left = _panel(func, a, mid)
    right = _panel(func, mid, b)
    both = left + right
    if depth <= 0 or abs(both - whole) <= max(rtol * abs(both), atol):
        return both
    return (_adapt(func, a, mid, left, rtol, atol, depth - 1)
            + _adapt(func, mid, b, right, rtol, atol, depth - 1))


def gauss_legendre(func: Vectorized, a: float, b: float, points: Iterable[float] = (),
                   rtol: float = 1e-8, atol: float = 1e-14, max_depth: int = 40) -> float:
    """Adaptive composite Gauss-Legendre integral of ``func`` over [a, b].

    Each panel uses a 64-node rule and is bisected until the two halves agree
    with the whole to ``rtol`` (or ``atol``). ``points`` are known kinks or
    jumps of the integrand; panels are split there first.
    """
    if b < a:
        return -gauss_legendre(func, b, a, points, rtol, atol, max_depth)
    if not b > a:
        return 0.0
    cuts = sorted({a, b, *(float(p) for p in points if a < p < b)})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi > lo:
            total += _adapt(func, lo, hi, _panel(func, lo, hi), rtol, atol, max_depth)
    return total


def fixed_gauss_legendre(func: Vectorized, a: np.ndarray, b: np.ndarray, panels: int = 8) -> np.ndarray:
    """Non-adaptive composite rule applied to many intervals at once.

    ``func`` receives a 2-D array (intervals x nodes). Used for cheap sign scans.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    edges = a[:, None] + (b - a)[:, None] * np.linspace(0.0, 1.0, panels + 1)[None, :]
    lo, hi = edges[:, :-1], edges[:, 1:]
    half = 0.5 * (hi - lo)
    x = (0.5 * (lo + hi))[..., None] + half[..., None] * _NODES
    vals = func(x.reshape(len(a), -1)).reshape(x.shape)
    return np.sum(half * np.einsum("ijk,k->ij", vals, _WEIGHTS), axis=1)


def bisect_increasing(func: Vectorized, target, lo: float, hi: float,
                      xtol: float = 0.0, max_iter: int = 200) -> np.ndarray:
    """Elementwise smallest x in [lo, hi] with func(x) >= target, func nondecreasing.

    Targets below func(lo) map to lo, targets above func(hi) map to hi. With
    the default ``xtol = 0`` the bracket is halved until it stops shrinking.
    """
    target = np.asarray(target, dtype=float)
    shape = target.shape
    t = target.ravel()
    left = np.full(t.shape, float(lo))
    right = np.full(t.shape, float(hi))
    at_lo = func(left) >= t
    tol = xtol * max(1.0, abs(hi - lo))
    for _ in range(max_iter):
        if np.all(right - left <= tol):
            break
        mid = 0.5 * (left + right)
        if np.all((mid == left) | (mid == right)):
            break
        ok = func(mid) >= t
        right = np.where(ok, mid, right)
        left = np.where(ok, left, mid)
    out = np.where(at_lo, float(lo), right)
    return out.reshape(shape)


def golden_max(obj: Callable[[float], float], a: float, b: float,
               tol: float = 1e-10, max_iter: int = 200) -> tuple[float, float]:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = obj(c), obj(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = obj(d)
    x = 0.5 * (a + b)
    return x, obj(x)


def grid_argmax(obj: Vectorized, lo: float, hi: float, n: int = 4096, tie_tol: float = 1e-10,
                polish: Callable[[float, float], float | None] | None = None) -> tuple[float, float]:
    """Global maximizer of ``obj`` on [lo, hi]; ties go to the smallest point.

    A uniform grid brackets the maximum, golden-section search refines it,
    and ``polish(a, b)`` may return a sharper maximizer inside the final
    bracket (e.g. the root of the derivative). A grid point left of the
    bracket whose value is within ``tie_tol`` of the maximum marks a plateau
    or a tie, and the left edge of that superlevel set is returned instead.
    A maximum in the first grid cell snaps to ``lo`` when the curve is flat
    there or the refinement converged onto the endpoint.
    """
    xs = np.linspace(lo, hi, n)
    ys = np.asarray(obj(xs), dtype=float)
    i = int(np.argmax(ys))
    scalar = lambda x: float(obj(np.array([x]))[0])
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    x_best, y_best = golden_max(scalar, a, b)
    if ys[i] > y_best:
        x_best, y_best = xs[i], ys[i]
    if polish is not None:
        xp = polish(a, b)
        if xp is not None and a <= xp <= b:
            yp = scalar(xp)
            # the polished root is exact; accept it unless clearly worse than the grid/golden value
            if yp >= y_best - 1e-12 * max(1.0, abs(y_best)):
                x_best, y_best = xp, max(yp, y_best)
    tie = tie_tol * max(1.0, abs(y_best))
    if i == 0:
        flat = n > 1 and ys[1] >= y_best - tie
        if flat or ys[0] >= y_best or x_best - xs[0] <= 1e-9 * (hi - lo):
            return float(xs[0]), float(ys[0])
        return float(x_best), float(y_best)
    # a smooth peak can put its left neighbour within the tie band; only a
    # point two or more steps to the left signals a genuine plateau
    earlier = np.nonzero(ys[:max(i - 1, 0)] >= y_best - tie)[0]
    if earlier.size:
        j = int(earlier[0])
        if j == 0:
            return float(xs[0]), float(ys[0])
        level = y_best - tie
        edge = float(bisect_increasing(lambda x: (obj(x) >= level).astype(float), 1.0,
                                       xs[j - 1], xs[j])[()])
        return edge, scalar(edge)
    return float(x_best), float(y_best)


def find_sign_change(values: np.ndarray, rising: bool = True) -> int | None:
    """Index k of the first sign change values[k] -> values[k+1] (negative to positive if rising)."""
    v = np.asarray(values)
    if rising:
        hits = np.nonzero((v[:-1] < 0) & (v[1:] >= 0))[0]
    else:
        hits = np.nonzero((v[:-1] > 0) & (v[1:] <= 0))[0]
    return int(hits[0]) if hits.size else None
