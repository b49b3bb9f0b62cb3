"""Acceptance suite: one test per advertised guarantee, each announcing its
verdict on a single ACCEPTANCE line and enforcing the stated tolerance and
time budget. Budgets are wall-clock on a warm process (the session fixture in
conftest.py has already paid the JIT cost)."""

import json
import time
import warnings

import numpy as np
import pytest

from perpcall import (
    AmericanCall,
    ContractParams,
    MarketParams,
    McConfig,
    Regime,
    american_value,
    cli,
    delta_of_k,
    integral_residuals,
    mc_saddle_check,
    penalty_cap,
    price,
    psor_solve,
    solve_boundaries,
    solve_pair_gt,
)
from perpcall.closedform import is_american_degenerate, value_from_solution
from perpcall.diffusion import DiffusionKernel
from perpcall.errors import NoInteriorCancellation
from perpcall.psor import default_config

import _tabledata as td


def report(capfd, number, name, ok, detail=""):
    with capfd.disabled():
        tail = f" ({detail})" if detail else ""
        print(f"ACCEPTANCE {number} {name}: {'PASS' if ok else 'FAIL'}{tail}")
    assert ok, f"criterion {number} {name}: {detail}"


def test_criterion_1_boundary_pairs(capfd):
    start = time.perf_counter()
    worst = 0.0
    for sigma in td.SIGMAS:
        sol = solve_pair_gt(td.family_market(sigma), td.family_contract())
        want_h, want_k = td.PAIRS[sigma]
        worst = max(worst, abs(sol.hstar - want_h), abs(sol.kstar - want_k))
    elapsed = time.perf_counter() - start
    ok = worst <= 0.01 and elapsed < 1.0
    report(capfd, 1, "interval-boundary-pairs", ok,
           f"max dev {worst:.2e}, {elapsed:.3f}s")


def test_criterion_2_single_boundary(capfd):
    start = time.perf_counter()
    sol = solve_boundaries(td.single_market(), td.single_contract())
    elapsed = time.perf_counter() - start
    dev = abs(sol.kstar - td.KSTAR_SINGLE)
    ok = sol.regime is Regime.RleD and dev <= 0.01 and elapsed < 0.1
    report(capfd, 2, "single-boundary-root", ok,
           f"kstar {sol.kstar:.6f}, dev {dev:.2e}, {elapsed:.4f}s")


def test_criterion_3_price_table(capfd):
    start = time.perf_counter()
    rc = cli.main(["table", "--format", "json"])
    out, _ = capfd.readouterr()
    payload = json.loads(out)
    worst_price = 0.0
    worst_identity = 0.0
    for row in payload["rows"]:
        want_c, want_a, _ = td.TABLE[(row["spot"], row["sigma"])]
        worst_price = max(worst_price, abs(row["cancellable"] - want_c),
                          abs(row["american"] - want_a))
        worst_identity = max(worst_identity, abs(
            row["savings"] - (row["american"] - row["cancellable"])))
    elapsed = time.perf_counter() - start
    ok = (rc == 0 and len(payload["rows"]) == 18
          and worst_price <= 0.02 and worst_identity <= 1e-9 and elapsed < 1.0)
    report(capfd, 3, "price-table", ok,
           f"max price dev {worst_price:.2e}, savings identity "
           f"{worst_identity:.1e}, {elapsed:.3f}s")


def test_criterion_4_volatility_monotonicity(capfd):
    contract = td.family_contract()
    ok = True
    for spot in (120.0, 130.0, 140.0, 150.0):
        vals = [price(spot, td.family_market(s), contract).value for s in td.SIGMAS]
        ok = ok and vals[0] > vals[1] > vals[2]
    for spot in (280.0, 290.0):
        vals = [price(spot, td.family_market(s), contract).value for s in td.SIGMAS]
        ok = ok and vals[0] < vals[1] < vals[2]
    report(capfd, 4, "volatility-monotonicity", ok,
           "decreasing at 120-150, increasing at 280-290")


def test_criterion_5_grid_oracle_agreement(capfd):
    start = time.perf_counter()
    cases = [(td.family_market(s), td.family_contract()) for s in td.SIGMAS]
    cases.append((td.single_market(), td.single_contract()))
    worst = 0.0
    for market, contract in cases:
        sol = solve_boundaries(market, contract)
        config = default_config(market, contract, nodes=8001)
        grid = psor_solve(market, contract, config)
        K = contract.strike
        window = (grid.grid >= 0.2 * K) & (grid.grid <= 1.2 * sol.kstar)
        exact = np.asarray(
            value_from_solution(grid.grid[window], market, contract, sol), dtype=float)
        rel = np.abs(grid.values[window] - exact) / np.maximum(np.abs(exact), 1e-300)
        worst = max(worst, float(rel.max()))
    elapsed = time.perf_counter() - start
    ok = worst <= 5e-3 and elapsed < 30.0
    report(capfd, 5, "psor-agreement", ok,
           f"sup rel err {worst:.3e} over 4 parameter sets, {elapsed:.1f}s")


def test_criterion_6_mc_saddle(capfd):
    start = time.perf_counter()
    market = td.family_market(0.2)
    contract = td.family_contract()
    sol = solve_boundaries(market, contract)
    config = McConfig(paths=1_000_000, dt=1.0 / 500.0, horizon=600.0, seed=0)
    details = []
    ok = True
    for spot in (120.0, 150.0):
        rep = mc_saddle_check(spot, market, contract, sol, config, pad=0.1)
        ok = ok and rep.passed
        dev = (rep.optimal.mean - rep.value) / rep.optimal.stderr
        details.append(f"x={spot:g}: optimal dev {dev:+.2f} stderr, "
                       f"holder {'ok' if rep.holder_ok else 'BEAT'}, "
                       f"writer {'ok' if rep.writer_ok else 'BEAT'}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 60.0
    report(capfd, 6, "mc-saddle", ok, "; ".join(details) + f", {elapsed:.1f}s")


# -- criterion 7: the property sweep -------------------------------------------------

def _grid_checks(market, contract, sol, hi):
    """Obstacle bounds and the unit slope band on a log grid up to ``hi``."""
    K, delt = contract.strike, contract.penalty
    xs = np.geomspace(0.3 * K, hi, 600)
    vals = np.asarray(value_from_solution(xs, market, contract, sol), dtype=float)
    g1 = np.maximum(xs - K, 0.0)
    scale = max(1.0, float(vals.max()))
    assert np.all(vals >= g1 - 1e-9 * scale)
    assert np.all(vals <= g1 + delt + 1e-9 * scale)
    slopes = np.diff(vals) / np.diff(xs)
    assert np.all(slopes >= -1e-9)
    assert np.all(slopes <= 1.0 + 1e-9)
    return xs, vals


def _pasting_slope(market, contract, sol, x0, side):
    eps = 1e-6 * x0
    a = x0 + (eps if side > 0 else -3.0 * eps)
    b = x0 + (3.0 * eps if side > 0 else -eps)
    va = float(value_from_solution(a, market, contract, sol))
    vb = float(value_from_solution(b, market, contract, sol))
    return (vb - va) / (b - a)


def _wronskian_constant(market, strike):
    kernel = DiffusionKernel.build(market)
    w = kernel.wronskian()
    for x in (0.7 * strike, strike, 2.0 * strike):
        got = (kernel.dpsi(x) * kernel.phi(x) - kernel.psi(x) * kernel.dphi(x)) \
            * kernel.scale_density(x) ** -1
        assert got == pytest.approx(w, rel=1e-9)


def test_criterion_7_property_sweep(capfd):
    start = time.perf_counter()
    rng = np.random.default_rng(20260816)

    # regime r <= d: single boundary everywhere
    n_single = 0
    for _ in range(52):
        r = rng.uniform(0.005, 0.1)
        market = MarketParams(r=r, d=r + rng.uniform(0.0, 0.1),
                              sigma=rng.uniform(0.1, 0.5))
        K = rng.uniform(50.0, 200.0)
        cap = penalty_cap(market, ContractParams(K, 1.0))
        contract = ContractParams(K, rng.uniform(0.05, 0.95) * cap)
        sol = solve_boundaries(market, contract)
        assert sol.regime is Regime.RleD and not sol.heuristic

        _, vals = _grid_checks(market, contract, sol, 1.4 * sol.kstar)
        assert _pasting_slope(market, contract, sol, sol.kstar, -1) == pytest.approx(
            1.0, abs=2e-4)
        _wronskian_constant(market, K)

        # the penalty-matching function is increasing with pinned endpoints
        b = AmericanCall.from_params(market, K).b
        ks = np.linspace(K * (1.0 + 1e-4), b * (1.0 - 1e-4), 30)
        deltas = np.array([delta_of_k(market, contract, float(k)) for k in ks])
        assert np.all(np.diff(deltas) > 0.0)
        assert delta_of_k(market, contract, K * (1.0 + 1e-8)) < 1e-3 * cap
        assert delta_of_k(market, contract, b * (1.0 - 1e-8)) > cap * (1.0 - 1e-3)

        # global convexity in this regime
        xs = np.linspace(0.5 * K, 1.3 * sol.kstar, 800)
        v = np.asarray(value_from_solution(xs, market, contract, sol), dtype=float)
        assert np.all(np.diff(v, 2) >= -1e-7 * max(1.0, float(v.max())))
        n_single += 1

    # regime r > d: coupled pair where it exists, {K}-collapse fallback where
    # it does not (both are valid parameter sets of the regime; the h*-scoped
    # properties apply when h* is present). The first block draws from the
    # corner where the interval structure dominates (small d/r, low sigma,
    # modest penalty); the second covers the rest of the box, where the
    # cancellation region usually collapses to the strike.
    n_pair = 0
    n_fallback = 0

    def run_r_gt_d_set(market, contract):
        nonlocal n_pair, n_fallback
        K, delt = contract.strike, contract.penalty
        cap = penalty_cap(market, contract)
        try:
            sol = solve_pair_gt(market, contract)
        except NoInteriorCancellation:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                fb = solve_boundaries(market, contract)
            assert fb.heuristic and fb.hstar is None and fb.kstar > K
            _grid_checks(market, contract, fb, 1.4 * fb.kstar)
            assert _pasting_slope(market, contract, fb, fb.kstar, -1) == pytest.approx(
                1.0, abs=2e-4)
            n_fallback += 1
            return

        h, k = sol.hstar, sol.kstar
        assert K < h < market.r * (K - delt) / market.d - 1e-9
        assert k > (market.r / market.d) * K + 1e-9
        _grid_checks(market, contract, sol, 1.4 * k)
        assert _pasting_slope(market, contract, sol, h, +1) == pytest.approx(1.0, abs=2e-4)
        assert _pasting_slope(market, contract, sol, k, -1) == pytest.approx(1.0, abs=2e-4)
        _wronskian_constant(market, K)

        # independent integral route agrees at the solved pair
        i1, i2 = integral_residuals(market, contract, h, k)
        assert abs(i1) < 1e-6 * delt and abs(i2) < 1e-6 * delt

        # value rolls off the cancellation payoff with negative curvature
        eps = 1e-4 * h
        x0 = h + 5.0 * eps
        f = lambda xx: float(value_from_solution(xx, market, contract, sol))
        assert f(x0 + eps) - 2.0 * f(x0) + f(x0 - eps) < 0.0

        # penalty-matching endpoints are regime-free
        b = AmericanCall.from_params(market, K).b
        assert abs(delta_of_k(market, contract, K * (1.0 + 1e-8))) < 1e-3 * cap
        assert delta_of_k(market, contract, b * (1.0 - 1e-8)) > cap * (1.0 - 1e-3)
        n_pair += 1

    for spread_rng, sigma_rng, frac_rng, n_draws in (
        ((0.2, 0.5), (0.12, 0.25), (0.05, 0.35), 35),
        ((0.25, 0.9), (0.12, 0.45), (0.08, 0.85), 20),
    ):
        for _ in range(n_draws):
            r = rng.uniform(0.01, 0.08)
            market = MarketParams(r=r, d=r * rng.uniform(*spread_rng),
                                  sigma=rng.uniform(*sigma_rng))
            K = rng.uniform(60.0, 180.0)
            cap = penalty_cap(market, ContractParams(K, 1.0))
            interior_max = K * (1.0 - market.d / market.r)
            delt = rng.uniform(*frac_rng) * min(cap, interior_max)
            run_r_gt_d_set(market, ContractParams(K, delt))

    # penalties above the cap collapse to the plain call
    n_degenerate = 0
    for _ in range(10):
        r = rng.uniform(0.01, 0.08)
        market = MarketParams(r=r, d=r * rng.uniform(0.25, 0.9),
                              sigma=rng.uniform(0.12, 0.45))
        K = rng.uniform(60.0, 180.0)
        contract = ContractParams(K, 1.25 * penalty_cap(market, ContractParams(K, 1.0)))
        sol = solve_boundaries(market, contract)
        assert is_american_degenerate(market, contract, sol)
        assert price(1.15 * K, market, contract).value == pytest.approx(
            american_value(1.15 * K, market, contract), rel=1e-12)
        n_degenerate += 1

    elapsed = time.perf_counter() - start
    ok = (n_single >= 50 and n_pair + n_fallback >= 50 and n_pair >= 25
          and n_degenerate == 10 and elapsed < 60.0)
    report(capfd, 7, "property-sweep", ok,
           f"{n_single} single-boundary sets, {n_pair} pair sets, "
           f"{n_fallback} validated fallbacks, {n_degenerate} degenerations, "
           f"{elapsed:.1f}s")
