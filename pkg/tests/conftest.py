"""Session fixtures: one tiny solve per jit kernel so compilation cost never
lands inside a timed test."""

import pytest

from perpcall import (
    ContractParams,
    MarketParams,
    McConfig,
    PsorConfig,
    mc_strategy_value,
    psor_solve,
)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    market = MarketParams(r=0.02, d=0.01, sigma=0.20)
    contract = ContractParams(strike=100.0, penalty=10.0)
    psor_solve(market, contract, PsorConfig(x_min=10.0, x_max=500.0, nodes=64))
    mc_strategy_value(
        150.0, market, contract, 107.0, 330.0,
        McConfig(paths=64, dt=0.01, horizon=600.0, seed=1),
    )
    mc_strategy_value(
        105.0, MarketParams(r=0.01, d=0.09, sigma=0.20), ContractParams(100.0, 2.25),
        100.0, 111.7, McConfig(paths=64, dt=0.01, horizon=800.0, seed=1),
    )
