import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auctionlab.dist import Exponential, LogNormal, Uniform, monopoly_price, virtual_value
from auctionlab.errors import ConfigError, DomainError, InfeasibleEpsilonError, NonIncreasingStrategyError
from auctionlab.strategy import (ThresholdedParams, affine, beta_from_target, bid_distribution, check_increasing,
                                 custom, from_json, h_beta, linear, make_thresholded, truthful)

U = Uniform(0, 1)
LAWS = [Uniform(0, 1), Exponential(1.0), LogNormal(0.25, 1.0)]


def interior(d, n):
    return np.asarray(d.quantile(np.linspace(0.01, 0.97, n)))


def strategies_for(d):
    m = monopoly_price(d)
    return [truthful(), linear(0.6), affine(0.8, 0.05),
            make_thresholded(d, ThresholdedParams(m)),
            make_thresholded(d, ThresholdedParams(m, 1e-3)),
            make_thresholded(d, ThresholdedParams(float(d.quantile(0.8)), 0.0, linear(0.9)))]


def test_h_beta_examples():
    assert h_beta(U, truthful(), 0.75) == pytest.approx(0.5)
    assert h_beta(U, make_thresholded(U, ThresholdedParams(0.5)), 0.3) == pytest.approx(0.0, abs=1e-12)
    assert h_beta(U, linear(0.5), 0.75) == pytest.approx(0.25)


def test_make_thresholded_examples():
    s = make_thresholded(U, ThresholdedParams(0.5))
    assert s(0.0) == pytest.approx(0.25)
    assert s(0.5) == pytest.approx(0.5)
    assert s(0.25) == pytest.approx(1 / 3)


def test_make_thresholded_errors():
    with pytest.raises(InfeasibleEpsilonError):
        make_thresholded(U, ThresholdedParams(0.5, 0.5))
    with pytest.raises(InfeasibleEpsilonError):
        make_thresholded(U, ThresholdedParams(0.5, -0.1))
    with pytest.raises(DomainError):
        make_thresholded(U, ThresholdedParams(1.0))


def test_beta_from_target_examples():
    s = beta_from_target(U, lambda x: 0 * x, 0.5, 0.5)
    assert s(0.0) == pytest.approx(0.25, abs=1e-12)
    xs = np.linspace(0, 0.99, 50)
    s = beta_from_target(U, lambda x: 2 * x - 1, 0.5, 0.5)
    np.testing.assert_allclose(s(xs), xs, atol=1e-10)


def test_beta_from_target_rejects_non_increasing_result():
    with pytest.raises(NonIncreasingStrategyError):
        beta_from_target(U, lambda x: 3 - 10 * x, 0.5, 0.1)


@pytest.mark.parametrize("d", LAWS, ids=repr)
def test_h_of_beta_from_target_reproduces_the_target(d):
    g = lambda x: 0.5 * np.asarray(virtual_value(d, x)) - 0.1
    x0 = float(d.quantile(0.5))
    s = beta_from_target(d, g, x0, x0)
    xs = interior(d, 64)
    fd = custom(s.bid_fn)  # finite-difference derivative path
    np.testing.assert_allclose(h_beta(d, fd, xs), g(xs), atol=1e-6 * max(1.0, float(np.max(xs))))
    np.testing.assert_allclose(h_beta(d, s, xs), g(xs), atol=1e-8 * max(1.0, float(np.max(xs))))


@pytest.mark.parametrize("d", LAWS, ids=repr)
def test_round_trip_beta_to_h_to_beta(d):
    s = linear(0.7)
    x0 = float(d.quantile(0.4))
    again = beta_from_target(d, lambda x: h_beta(d, s, x), x0, float(s(x0)))
    xs = interior(d, 40)
    np.testing.assert_allclose(again(xs), s(xs), atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(-0.5, 0.0), st.floats(0.2, 0.8))
def test_round_trip_on_affine_targets(a, c, x0):
    g = lambda x: a * (2 * x - 1) + c
    s = beta_from_target(U, g, x0, x0)
    xs = np.linspace(0.02, 0.95, 16)
    np.testing.assert_allclose(h_beta(U, s, xs), g(xs), atol=1e-6)


@pytest.mark.parametrize("d", LAWS, ids=repr)
def test_bid_virtual_value_equals_h_beta_on_256_points(d):
    xs = interior(d, 256)
    for s in strategies_for(d):
        xk = xs[~np.isin(xs, s.kinks)]
        bd = bid_distribution(d, s)
        np.testing.assert_allclose(bd.virtual_value(s(xk)), h_beta(d, s, xk), atol=1e-5,
                                   err_msg=s.kind)


@pytest.mark.parametrize("d", LAWS, ids=repr)
def test_thresholding_at_monopoly_zeroes_negative_virtual_values(d):
    s = make_thresholded(d, ThresholdedParams(monopoly_price(d)))
    xs = interior(d, 200)
    bd = bid_distribution(d, s)
    np.testing.assert_allclose(bd.virtual_value(s(xs)), np.maximum(0.0, virtual_value(d, xs)), atol=1e-6)


@pytest.mark.parametrize("eps", [0.0, 1e-3])
@pytest.mark.parametrize("d", LAWS, ids=repr)
def test_thresholded_has_flat_h_below_r_by_finite_differences(d, eps):
    r = float(d.quantile(0.6))
    s = make_thresholded(d, ThresholdedParams(r, eps))
    fd = custom(s.bid_fn, kinks=s.kinks)
    xs = np.asarray(d.quantile(np.linspace(0.02, 0.55, 30)))
    np.testing.assert_allclose(h_beta(d, fd, xs), eps, atol=1e-8 * max(1.0, r))
    assert s(np.nextafter(r, 0)) == pytest.approx(r, abs=1e-10)


@pytest.mark.parametrize("d", LAWS, ids=repr)
def test_strategies_are_strictly_increasing(d):
    for s in strategies_for(d):
        check_increasing(s, d)


@pytest.mark.parametrize("d", LAWS, ids=repr)
def test_analytic_derivative_matches_finite_differences(d):
    xs = interior(d, 100)
    for s in strategies_for(d):
        xk = xs[np.min(np.abs(xs[:, None] - np.asarray(s.kinks or (np.inf,))[None, :]), axis=1) > 1e-3]
        step = 1e-6 * np.maximum(1.0, np.abs(xk))
        fd = (s(xk + step) - s(xk - step)) / (2 * step)
        an = s.derivative(xk)
        assert np.all(np.abs(an - fd) <= np.maximum(1e-5, 1e-4 * np.abs(an))), s.kind


def test_kink_derivative_sides():
    s = make_thresholded(U, ThresholdedParams(0.5, 0.0, linear(0.8)))
    assert s.derivative(0.5, "left") == pytest.approx(0.4 * 0.5 / 0.25)
    assert s.derivative(0.5, "right") == pytest.approx(0.8)


def test_bid_distribution_examples():
    assert bid_distribution(U, truthful()).cdf(0.3) == pytest.approx(0.3)
    assert bid_distribution(U, linear(0.5)).cdf(0.25) == pytest.approx(0.5)
    assert bid_distribution(U, make_thresholded(U, ThresholdedParams(0.5))).min_bid == pytest.approx(0.25)


@pytest.mark.parametrize("d", LAWS, ids=repr)
def test_pushforward_identity(d):
    xs = interior(d, 128)
    for s in strategies_for(d) + [custom(lambda x: x ** 3 + x)]:
        bd = bid_distribution(d, s)
        np.testing.assert_allclose(bd.cdf(s(xs)), d.cdf(xs), atol=1e-10)


def test_bid_cdf_clamps_outside_bid_range():
    bd = bid_distribution(U, linear(0.5))
    assert bd.cdf(-1.0) == 0.0 and bd.cdf(0.9) == 1.0
    assert bd.pdf(0.9) == 0.0


def test_strategy_json():
    s = from_json({"kind": "thresholded", "r": 0.5, "epsilon": 0.0, "gamma": {"kind": "truthful"}}, U)
    assert s(0.0) == pytest.approx(0.25)
    assert from_json({"kind": "thresholded", "r": "monopoly"}, U)(0.0) == pytest.approx(0.25)
    assert from_json({"kind": "affine", "alpha": 2, "c": 1})(1.0) == 3.0
    assert s.to_json()["gamma"] == {"kind": "truthful"}
    with pytest.raises(ConfigError):
        from_json({"kind": "mystery"})
    with pytest.raises(ConfigError):
        from_json({"kind": "linear"})
