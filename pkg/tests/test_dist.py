import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auctionlab.dist import (Empirical, Exponential, LogNormal, Tabulated, Uniform, from_json, hazard_rate,
                             is_regular, max_of_truthful, monopoly_price, virtual_value)
from auctionlab.errors import DomainError, SingularDensityError, TailSingularityError
from auctionlab.numerics import gauss_legendre

REGULAR = [Uniform(0, 1), Uniform(1, 2), Exponential(1.0), Exponential(2.5), LogNormal(0.25, 1.0), LogNormal(0.0, 0.5)]
ALL = REGULAR + [Tabulated([0, 0.5, 1.0], [0, 0.3, 1.0]), Empirical(np.linspace(0, 1, 11) ** 2)]


def ids(d):
    return repr(d)


# ---- documented examples

def test_virtual_value_examples():
    assert virtual_value(Uniform(0, 1), 0.5) == 0.0
    assert virtual_value(Uniform(0, 1), 1.0) == 1.0
    # truncation at 1 - 1e-9 moves the exponential hazard by ~1e-8
    assert virtual_value(Exponential(1.0), 2.0) == pytest.approx(1.0, abs=1e-6)


def test_hazard_rate_examples():
    assert hazard_rate(Exponential(1.0), 3.0) == pytest.approx(1.0, abs=1e-6)
    assert hazard_rate(Uniform(0, 1), 0.5) == pytest.approx(2.0)
    assert hazard_rate(Uniform(0, 1), 0.0) == pytest.approx(1.0)


def test_monopoly_price_examples():
    assert monopoly_price(Uniform(0, 1)) == pytest.approx(0.5, abs=1e-10)
    assert monopoly_price(Uniform(1, 2)) == 1.0
    assert monopoly_price(Exponential(1.0)) == pytest.approx(1.0, abs=1e-6)


def test_max_of_truthful_examples():
    u = Uniform(0, 1)
    xs = np.linspace(0, 1, 11)
    np.testing.assert_allclose(max_of_truthful(u, 1).G(xs), xs)
    assert max_of_truthful(u, 2).G(0.5) == pytest.approx(0.25)
    for d in REGULAR:
        assert max_of_truthful(d, 1).G(d.quantile(0.3)) == pytest.approx(0.3, abs=1e-10)


def test_zero_competitors_is_flagged_degenerate():
    G = max_of_truthful(Uniform(0, 1), 0)
    assert G.degenerate and G.G(0.3) == 1.0


# ---- errors

def test_domain_and_singularity_errors():
    u = Uniform(0, 1)
    with pytest.raises(DomainError):
        virtual_value(u, 1.5)
    with pytest.raises(DomainError):
        hazard_rate(u, -0.1)
    with pytest.raises(TailSingularityError):
        hazard_rate(u, 1.0)
    gap = Tabulated([0, 0.4, 0.6, 1.0], [0, 0.5, 0.5, 1.0])
    with pytest.raises(SingularDensityError):
        virtual_value(gap, 0.5)


def test_atoms_are_rejected():
    with pytest.raises(DomainError):
        Empirical([0.1, 0.2, 0.2, 0.5])


def test_bad_parameters_rejected():
    with pytest.raises(DomainError):
        Uniform(1, 1)
    with pytest.raises(DomainError):
        Exponential(-1)
    with pytest.raises(DomainError):
        LogNormal(0, 0)


# ---- invariants

@pytest.mark.parametrize("d", ALL, ids=ids)
def test_cdf_endpoints_monotone_and_density_normalized(d):
    xs = np.linspace(d.support_lo, d.support_hi, 2001)
    F = d.cdf(xs)
    assert abs(F[0]) <= 1e-12 and abs(F[-1] - 1) <= 1e-12
    assert np.all(np.diff(F) >= 0)
    pts = getattr(d, "xs", ())
    total = gauss_legendre(d.pdf, d.support_lo, d.support_hi, points=list(pts)[1:-1], rtol=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("d", ALL, ids=ids)
def test_quantile_inverts_cdf(d):
    xs = np.asarray(d.quantile(np.linspace(0.01, 0.99, 99)))
    np.testing.assert_allclose(d.quantile(d.cdf(xs)), xs, atol=1e-8)


@pytest.mark.parametrize("d", REGULAR, ids=ids)
def test_virtual_value_is_x_minus_inverse_hazard(d):
    xs = np.asarray(d.quantile(np.linspace(0.01, 0.99, 64)))
    np.testing.assert_allclose(virtual_value(d, xs), xs - 1 / hazard_rate(d, xs), atol=1e-10)


@pytest.mark.parametrize("d", ALL, ids=ids)
def test_monopoly_price_beats_the_grid(d):
    r = monopoly_price(d)
    xs = np.linspace(d.support_lo, d.support_hi, 4096)
    assert r * d.sf(r) >= np.max(xs * d.sf(xs)) - 1e-9


@pytest.mark.parametrize("d", REGULAR, ids=ids)
def test_regular_laws_have_monotone_psi_and_psi_root_at_monopoly(d):
    from scipy.optimize import brentq

    assert is_regular(d)
    r = monopoly_price(d)
    a = float(d.quantile(1e-6))
    if virtual_value(d, a) < 0:
        root = brentq(lambda x: virtual_value(d, x), a, float(d.quantile(1 - 1e-6)), xtol=1e-13)
        assert r == pytest.approx(root, abs=1e-6)


@pytest.mark.parametrize("m", [1, 2, 3, 5])
@pytest.mark.parametrize("d", REGULAR[:4], ids=ids)
def test_max_of_truthful_density_integrates_to_one(d, m):
    G = max_of_truthful(d, m)
    assert d.expect(lambda x: G.g(x) / d.pdf(x)) == pytest.approx(1.0, abs=1e-6)
    xs = np.linspace(d.support_lo, d.support_hi, 50)
    np.testing.assert_allclose(G.G(xs), d.cdf(xs) ** m, atol=1e-12)


@settings(max_examples=40)
@given(st.floats(-3, 3), st.floats(0.1, 5), st.floats(0, 1))
def test_uniform_virtual_value_closed_form(lo, width, t):
    d = Uniform(lo, lo + width)
    x = lo + t * width
    assert virtual_value(d, x) == pytest.approx(2 * x - (lo + width), abs=1e-9)


@settings(max_examples=30)
@given(st.floats(0.2, 5.0), st.floats(0.01, 0.95))
def test_exponential_monopoly_price_is_inverse_rate(rate, u):
    d = Exponential(rate)
    assert monopoly_price(d) == pytest.approx(1 / rate, rel=1e-6)
    x = float(d.quantile(u))
    assert hazard_rate(d, x) == pytest.approx(rate, rel=1e-6)


def test_json_round_trip():
    for d in REGULAR:
        again = from_json(json.loads(json.dumps(d.to_json())))
        assert again.cdf(d.quantile(0.42)) == pytest.approx(0.42, abs=1e-12)
    assert from_json({"kind": "lognormal", "mu": 0.25, "sigma": 1.0}).support_hi > 0


def test_empirical_distribution_is_piecewise_linear():
    d = Empirical([3.0, 1.0, 2.0])
    assert d.cdf(1.5) == pytest.approx(0.25)
    assert d.quantile(0.5) == pytest.approx(2.0)


def test_sampling_matches_cdf():
    d = LogNormal(0.25, 1.0)
    x = d.sample(np.random.default_rng(1), 200000)
    assert np.mean(x <= 1.0) == pytest.approx(d.cdf(1.0), abs=5e-3)
