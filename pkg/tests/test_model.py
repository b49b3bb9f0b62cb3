"""Parameter validation, regime classification, and the derived constants."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perpcall import (
    ContractParams,
    DerivedConstants,
    MarketParams,
    Regime,
    classify_regime,
    derive_constants,
)

import _tabledata as td


# -- validation ---------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(r=0.0, d=0.01, sigma=0.2),
    dict(r=-0.01, d=0.01, sigma=0.2),
    dict(r=0.02, d=-0.001, sigma=0.2),
    dict(r=0.02, d=0.01, sigma=0.0),
    dict(r=0.02, d=0.01, sigma=-0.3),
    dict(r=math.nan, d=0.01, sigma=0.2),
    dict(r=0.02, d=0.01, sigma=math.inf),
])
def test_market_rejects_bad_inputs(kwargs):
    with pytest.raises(ValueError):
        MarketParams(**kwargs)


@pytest.mark.parametrize("strike,penalty", [
    (0.0, 10.0), (-100.0, 10.0), (100.0, 0.0), (100.0, -1.0), (math.inf, 10.0),
])
def test_contract_rejects_bad_inputs(strike, penalty):
    with pytest.raises(ValueError):
        ContractParams(strike=strike, penalty=penalty)


def test_params_are_frozen():
    market = MarketParams(r=0.02, d=0.01, sigma=0.2)
    with pytest.raises(AttributeError):
        market.r = 0.05


def test_int_inputs_coerced_to_float():
    market = MarketParams(r=1, d=0, sigma=1)
    assert isinstance(market.r, float) and isinstance(market.sigma, float)
    contract = ContractParams(strike=100, penalty=10)
    assert isinstance(contract.strike, float)


# -- regime -------------------------------------------------------------------

def test_regime_classification():
    assert classify_regime(MarketParams(0.01, 0.09, 0.2)) is Regime.RleD
    assert classify_regime(MarketParams(0.02, 0.01, 0.2)) is Regime.RgtD
    # equality goes to the single-boundary branch
    assert classify_regime(MarketParams(0.03, 0.03, 0.2)) is Regime.RleD


# -- derived constants --------------------------------------------------------

def test_constants_frozen_values():
    for sigma, (lam, kappa, eta, nu) in td.CONSTANTS_FULL.items():
        cons = derive_constants(td.family_market(sigma))
        assert cons.lam == pytest.approx(lam, rel=1e-14)
        assert cons.kappa == pytest.approx(kappa, rel=1e-14)
        assert cons.eta == pytest.approx(eta, rel=1e-14)
        assert cons.nu == pytest.approx(nu, rel=1e-14)
    lam, kappa, eta, nu = td.SINGLE_CONSTANTS_FULL
    cons = derive_constants(td.single_market())
    assert (cons.lam, cons.kappa, cons.eta, cons.nu) == pytest.approx((lam, kappa, eta, nu), rel=1e-14)


def test_constants_deterministic():
    market = MarketParams(0.02, 0.01, 0.2)
    assert derive_constants(market) == derive_constants(market)


market_st = st.builds(
    MarketParams,
    r=st.floats(0.001, 0.2),
    d=st.floats(0.0, 0.2),
    sigma=st.floats(0.05, 1.0),
)


@given(market_st)
@settings(max_examples=200, deadline=None)
def test_exponents_solve_the_characteristic_quadratic(market):
    """eta and nu are the roots of sigma^2 y(y-1)/2 + (r-d) y - r = 0."""
    cons = derive_constants(market)
    s2 = 0.5 * market.sigma**2
    for y in (cons.eta, cons.nu):
        resid = s2 * y * (y - 1.0) + (market.r - market.d) * y - market.r
        # normalize by the quadratic's scale at y
        scale = abs(s2 * y * y) + abs((market.r - market.d) * y) + market.r
        assert abs(resid) <= 1e-12 * scale


@given(market_st)
@settings(max_examples=200, deadline=None)
def test_vieta_and_sign_structure(market):
    cons = derive_constants(market)
    s2 = market.sigma**2
    assert cons.eta + cons.nu == pytest.approx(1.0 - 2.0 * (market.r - market.d) / s2, rel=1e-10, abs=1e-10)
    assert cons.eta * cons.nu == pytest.approx(-2.0 * market.r / s2, rel=1e-10)
    assert cons.lam > 0.0
    assert cons.nu < 0.0
    # eta exceeds 1 exactly when the asset pays dividends (strictly testable
    # only once d clears float resolution around eta = 1)
    if market.d > 1e-8:
        assert cons.eta > 1.0


def test_eta_equals_one_without_dividends():
    cons = derive_constants(MarketParams(r=0.05, d=0.0, sigma=0.3))
    assert cons.eta == pytest.approx(1.0, abs=1e-12)


@given(market_st)
@settings(max_examples=100, deadline=None)
def test_lambda_links_exponents_to_kappa(market):
    """eta = lam/sigma - kappa and nu = -(lam/sigma + kappa)."""
    cons = derive_constants(market)
    assert cons.eta == pytest.approx(cons.lam / market.sigma - cons.kappa, rel=1e-12)
    assert cons.nu == pytest.approx(-(cons.lam / market.sigma + cons.kappa), rel=1e-12)


def test_constants_container_is_plain_data():
    cons = derive_constants(MarketParams(0.02, 0.01, 0.2))
    assert isinstance(cons, DerivedConstants)
    with pytest.raises(AttributeError):
        cons.eta = 2.0
