"""Value distributions, virtual values, monopoly prices and competition laws.

Unbounded laws (exponential, lognormal) are truncated at their 1 - 1e-9
quantile and renormalized, so every distribution has a finite support and
1 - F reaches exactly zero at ``support_hi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import special

from .errors import (ConfigError, DomainError, SingularDensityError,
                     TailSingularityError, UnsupportedDistributionError)
from .numerics import gauss_legendre, grid_argmax

TAIL_MASS = 1e-9
MONOPOLY_GRID = 4096


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


class ValueDistribution:
    """Base class. Subclasses provide vectorized ``_cdf``, ``_sf``, ``_pdf``, ``_ppf``."""

    kind: str = ""
    support_lo: float
    support_hi: float

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x <= self.support_lo, 0.0,
                       np.where(x >= self.support_hi, 1.0, self._cdf(np.clip(x, self.support_lo, self.support_hi))))
        return _scalar_or_array(x, out)

    def sf(self, x):
        """Survival function 1 - F, evaluated without cancellation near the top."""
        x = np.asarray(x, dtype=float)
        out = np.where(x <= self.support_lo, 1.0,
                       np.where(x >= self.support_hi, 0.0, self._sf(np.clip(x, self.support_lo, self.support_hi))))
        return _scalar_or_array(x, out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.support_lo) & (x <= self.support_hi)
        out = np.where(inside, self._pdf(np.clip(x, self.support_lo, self.support_hi)), 0.0)
        return _scalar_or_array(x, out)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        out = np.where(u <= 0.0, self.support_lo,
                       np.where(u >= 1.0, self.support_hi, self._ppf(np.clip(u, 0.0, 1.0))))
        return _scalar_or_array(u, out)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return np.asarray(self.quantile(rng.random(size)))

    @property
    def span(self) -> float:
        return self.support_hi - self.support_lo

    def expect(self, func: Callable[[np.ndarray], np.ndarray], lo: float | None = None,
               hi: float | None = None, points=(), rtol: float = 1e-10) -> float:
        """E[func(X) 1(lo <= X <= hi)], integrated in u = F(x) so the integrand stays bounded."""
        lo = self.support_lo if lo is None else max(lo, self.support_lo)
        hi = self.support_hi if hi is None else min(hi, self.support_hi)
        if hi <= lo:
            return 0.0
        u_points = [float(self.cdf(p)) for p in points if lo < p < hi]
        ua, ub = float(self.cdf(lo)), float(self.cdf(hi))
        return gauss_legendre(lambda u: func(np.asarray(self.quantile(u))), ua, ub,
                              points=u_points, rtol=rtol)

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_json()})"


@dataclass(frozen=True, repr=False)
class Uniform(ValueDistribution):
    lo: float = 0.0
    hi: float = 1.0
    kind = "uniform"

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError(f"uniform needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def support_lo(self):
        return self.lo

    @property
    def support_hi(self):
        return self.hi

    def _cdf(self, x):
        return (x - self.lo) / (self.hi - self.lo)

    def _sf(self, x):
        return (self.hi - x) / (self.hi - self.lo)

    def _pdf(self, x):
        return np.full(np.shape(x), 1.0 / (self.hi - self.lo))

    def _ppf(self, u):
        return self.lo + u * (self.hi - self.lo)

    def to_json(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True, repr=False)
class Exponential(ValueDistribution):
    rate: float = 1.0
    truncation_quantile: float = 1.0 - TAIL_MASS
    kind = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError("exponential rate must be positive")

    @property
    def _tail(self):
        return 1.0 - self.truncation_quantile

    @property
    def support_lo(self):
        return 0.0

    @property
    def support_hi(self):
        return -math.log(self._tail) / self.rate

    def _cdf(self, x):
        return -np.expm1(-self.rate * x) / self.truncation_quantile

    def _sf(self, x):
        return np.maximum(np.exp(-self.rate * x) - self._tail, 0.0) / self.truncation_quantile

    def _pdf(self, x):
        return self.rate * np.exp(-self.rate * x) / self.truncation_quantile

    def _ppf(self, u):
        return -np.log1p(-u * self.truncation_quantile) / self.rate

    def to_json(self):
        return {"kind": "exponential", "rate": self.rate}


@dataclass(frozen=True, repr=False)
class LogNormal(ValueDistribution):
    mu: float = 0.0
    sigma: float = 1.0
    truncation_quantile: float = 1.0 - TAIL_MASS
    kind = "lognormal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("lognormal sigma must be positive")

    @property
    def _tail(self):
        return 1.0 - self.truncation_quantile

    @property
    def support_lo(self):
        return 0.0

    @property
    def support_hi(self):
        return math.exp(self.mu + self.sigma * float(special.ndtri(self.truncation_quantile)))

    def _z(self, x):
        with np.errstate(divide="ignore"):
            return (np.log(x) - self.mu) / self.sigma

    def _cdf(self, x):
        return special.ndtr(self._z(x)) / self.truncation_quantile

    def _sf(self, x):
        return np.maximum(special.ndtr(-self._z(x)) - self._tail, 0.0) / self.truncation_quantile

    def _pdf(self, x):
        z = self._z(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.exp(-0.5 * z * z) / (x * self.sigma * math.sqrt(2.0 * math.pi))
        return np.where(x > 0, dens, 0.0) / self.truncation_quantile

    def _ppf(self, u):
        return np.exp(self.mu + self.sigma * special.ndtri(u * self.truncation_quantile))

    def to_json(self):
        return {"kind": "lognormal", "mu": self.mu, "sigma": self.sigma}


class PiecewiseLinear(ValueDistribution):
    """Continuous cdf interpolated linearly between knots; density is piecewise constant."""

    def __init__(self, xs, Fs, kind: str):
        xs = np.asarray(xs, dtype=float)
        Fs = np.asarray(Fs, dtype=float)
        if xs.ndim != 1 or xs.shape != Fs.shape or xs.size < 2:
            raise DomainError("need at least two (x, F) knots of equal length")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("knots must be strictly increasing (repeated values are atoms)")
        if np.any(np.diff(Fs) < 0) or abs(Fs[0]) > 1e-12 or abs(Fs[-1] - 1.0) > 1e-12:
            raise DomainError("cdf values must be nondecreasing from 0 to 1")
        Fs = Fs.copy()
        Fs[0], Fs[-1] = 0.0, 1.0
        self.xs, self.Fs, self.kind = xs, Fs, kind
        self._dens = np.diff(Fs) / np.diff(xs)
        self.support_lo, self.support_hi = float(xs[0]), float(xs[-1])

    def _cdf(self, x):
        return np.interp(x, self.xs, self.Fs)

    def _sf(self, x):
        return 1.0 - self._cdf(x)

    def _pdf(self, x):
        k = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self._dens.size - 1)
        return self._dens[k]

    def _ppf(self, u):
        k = np.clip(np.searchsorted(self.Fs, u, side="left") - 1, 0, self._dens.size - 1)
        k = np.where(self._dens[k] > 0, k, np.minimum(k + 1, self._dens.size - 1))
        dens = self._dens[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            x = self.xs[k] + (u - self.Fs[k]) / dens
        return np.where(dens > 0, x, self.xs[k])


class Empirical(PiecewiseLinear):
    """Linearly interpolated ECDF through the sorted sample; F(x_(i)) = (i-1)/(n-1)."""

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float))
        if s.size < 2:
            raise DomainError("empirical distribution needs at least two samples")
        super().__init__(s, np.linspace(0.0, 1.0, s.size), "empirical")

    def to_json(self):
        return {"kind": "empirical", "samples": self.xs.tolist()}


class Tabulated(PiecewiseLinear):
    def __init__(self, xs, Fs):
        super().__init__(xs, Fs, "tabulated")

    def to_json(self):
        return {"kind": "tabulated", "x": self.xs.tolist(), "F": self.Fs.tolist()}


def from_json(desc: dict[str, Any]) -> ValueDistribution:
    """Build a distribution from a descriptor such as {"kind": "uniform", "lo": 0, "hi": 1}."""
    try:
        kind = desc["kind"]
        if kind == "uniform":
            return Uniform(float(desc.get("lo", 0.0)), float(desc.get("hi", 1.0)))
        if kind == "exponential":
            return Exponential(float(desc.get("rate", 1.0)))
        if kind == "lognormal":
            q = float(desc.get("truncation_quantile", 1.0 - TAIL_MASS))
            return LogNormal(float(desc.get("mu", 0.0)), float(desc.get("sigma", 1.0)), q)
        if kind == "empirical":
            return Empirical(desc["samples"])
        if kind == "tabulated":
            return Tabulated(desc["x"], desc["F"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad distribution descriptor {desc!r}: {exc}") from exc
    raise ConfigError(f"unknown distribution kind {desc.get('kind')!r}")


def _check_support(d: ValueDistribution, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < d.support_lo) or np.any(x > d.support_hi):
        raise DomainError(f"x outside support [{d.support_lo}, {d.support_hi}]")
    return x


def virtual_value(d: ValueDistribution, x):
    """psi(x) = x - (1 - F(x)) / f(x)."""
    x = _check_support(d, x)
    f = np.asarray(d.pdf(x))
    if np.any(f <= 0):
        raise SingularDensityError("density is zero where the virtual value was requested")
    return _scalar_or_array(x, x - np.asarray(d.sf(x)) / f)


def hazard_rate(d: ValueDistribution, x):
    """lambda(x) = f(x) / (1 - F(x))."""
    x = _check_support(d, x)
    sf = np.asarray(d.sf(x))
    if np.any(sf <= 1e-12):
        raise TailSingularityError("1 - F(x) is zero; hazard rate undefined")
    return _scalar_or_array(x, np.asarray(d.pdf(x)) / sf)


def monopoly_price(d: ValueDistribution, grid: int = MONOPOLY_GRID) -> float:
    """Smallest global maximizer of r (1 - F(r)) over the support."""
    obj = lambda r: r * np.asarray(d.sf(r))

    def polish(a, b):
        # revenue-curve derivative is -psi(r) f(r); a bracketed sign change of psi pins the peak
        from scipy.optimize import brentq
        try:
            pa, pb = virtual_value(d, a), virtual_value(d, b)
        except (SingularDensityError, DomainError):
            return None
        if pa < 0 < pb:
            return brentq(lambda r: virtual_value(d, r), a, b, xtol=1e-14, rtol=1e-15)
        return None

    r, _ = grid_argmax(obj, d.support_lo, d.support_hi, n=grid, polish=polish)
    return r


def is_regular(d: ValueDistribution, grid: int = 1024) -> bool:
    xs = np.linspace(d.support_lo, d.support_hi, grid + 2)[1:-1]
    f = np.asarray(d.pdf(xs))
    if np.any(f <= 0):
        return False
    psi = xs - np.asarray(d.sf(xs)) / f
    return bool(np.all(np.diff(psi) >= -1e-12 * np.maximum(1.0, np.abs(psi[1:]))))


@dataclass(frozen=True)
class CompetitionDistribution:
    """Law G of the highest competing bid, with density g."""

    cdf: Callable[[np.ndarray], np.ndarray]
    pdf: Callable[[np.ndarray], np.ndarray]
    support_lo: float
    support_hi: float
    provenance: str = "explicit"
    degenerate: bool = False
    breakpoints: tuple = field(default=())

    def G(self, b):
        b = np.asarray(b, dtype=float)
        return _scalar_or_array(b, np.asarray(self.cdf(b), dtype=float))

    def g(self, b):
        b = np.asarray(b, dtype=float)
        return _scalar_or_array(b, np.asarray(self.pdf(b), dtype=float))


def max_of_truthful(d: ValueDistribution, m: int) -> CompetitionDistribution:
    """Law of the maximum of m independent truthful bids drawn from d."""
    if m < 0:
        raise DomainError("number of competitors must be nonnegative")
    if m == 0:
        return CompetitionDistribution(lambda b: np.ones(np.shape(b)), lambda b: np.zeros(np.shape(b)),
                                       d.support_lo, d.support_lo, "max_of_k_truthful", degenerate=True)

    def cdf(b):
        return np.asarray(d.cdf(b)) ** m

    def pdf(b):
        return m * np.asarray(d.cdf(b)) ** (m - 1) * np.asarray(d.pdf(b))

    return CompetitionDistribution(cdf, pdf, d.support_lo, d.support_hi, "max_of_k_truthful",
                                   breakpoints=(d.support_lo, d.support_hi))


def max_of_strategies(pairs) -> CompetitionDistribution:
    """Law of max_j beta_j(X_j) for independent (distribution, strategy) pairs."""
    from .strategy import bid_distribution

    bds = [bid_distribution(d, s) for d, s in pairs]
    if not bds:
        return CompetitionDistribution(lambda b: np.ones(np.shape(b)), lambda b: np.zeros(np.shape(b)),
                                       0.0, 0.0, "max_of_strategies", degenerate=True)

    def cdf(b):
        out = np.ones(np.shape(b))
        for bd in bds:
            out = out * np.asarray(bd.cdf(b))
        return out

    def pdf(b):
        cdfs = [np.asarray(bd.cdf(b)) for bd in bds]
        total = np.zeros(np.shape(b))
        for j, bd in enumerate(bds):
            term = np.asarray(bd.pdf(b))
            for k, c in enumerate(cdfs):
                if k != j:
                    term = term * c
            total = total + term
        return total

    pts = tuple(sorted({p for bd in bds for p in (bd.min_bid, bd.max_bid, *bd.kink_bids)}))
    return CompetitionDistribution(cdf, pdf, min(bd.min_bid for bd in bds), max(bd.max_bid for bd in bds),
                                   "max_of_strategies", breakpoints=pts)


def explicit(cdf, pdf, lo: float, hi: float) -> CompetitionDistribution:
    return CompetitionDistribution(cdf, pdf, lo, hi, "explicit", breakpoints=(lo, hi))
