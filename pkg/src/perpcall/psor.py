"""Finite-difference oracle: projected SOR for the double obstacle problem.

The stationary variational inequality g1 <= V <= g2 with the generator
residual sign-constrained on each active set is discretized by central
differences on a log-uniform price grid, which makes the tridiagonal
coefficients constant, and solved by projected successive over-relaxation.
Entirely independent of the closed forms except for the below-strike
Dirichlet value at the left edge (where the solution shape is forced).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from . import closedform
from .errors import (
    BracketExhausted,
    NoInteriorCancellation,
    NotConverged,
    UnsupportedParameters,
)
from .model import ContractParams, MarketParams, Regime, classify_regime, derive_constants


@dataclass(frozen=True)
class PsorConfig:
    """Grid endpoints, size, and iteration controls for the obstacle solver.

    ``relaxation=None`` selects the near-optimal over-relaxation factor
    2/(1+sin(pi/(nodes-1))) for the model tridiagonal operator.
    """

    x_min: float
    x_max: float
    nodes: int = 8001
    relaxation: Optional[float] = None
    tolerance: float = 1e-9
    max_sweeps: int = 200_000

    def __post_init__(self):
        if not (0.0 < self.x_min < self.x_max):
            raise ValueError(f"need 0 < x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.nodes < 3:
            raise ValueError("need at least 3 grid nodes")
        if self.relaxation is not None and not (1.0 <= self.relaxation < 2.0):
            raise ValueError("relaxation factor must lie in [1, 2)")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be positive")

    @property
    def omega(self) -> float:
        if self.relaxation is not None:
            return self.relaxation
        return 2.0 / (1.0 + math.sin(math.pi / (self.nodes - 1)))


@dataclass(frozen=True, eq=False)
class OracleGrid:
    """PSOR solution: log-uniform nodes, values, and per-node region labels.

    Labels are 'cancel' where the upper obstacle binds, 'exercise' where the
    lower one does, 'continue' elsewhere. ``sweeps`` and ``final_diff`` record
    the iteration count and the last successive-sweep sup-norm.
    """

    grid: np.ndarray
    values: np.ndarray
    region_labels: np.ndarray
    sweeps: int
    final_diff: float


@njit(cache=True)
def _psor_kernel(v, g1, g2, sub, dia, sup, omega, tol, max_sweeps):
    n = v.shape[0]
    diff = 0.0
    for sweep in range(max_sweeps):
        diff = 0.0
        for i in range(1, n - 1):
            y = (sub * v[i - 1] + sup * v[i + 1]) / dia
            y = v[i] + omega * (y - v[i])
            if y < g1[i]:
                y = g1[i]
            elif y > g2[i]:
                y = g2[i]
            d = y - v[i]
            if d < 0.0:
                d = -d
            if d > diff:
                diff = d
            v[i] = y
        if diff < tol:
            return sweep + 1, diff
    return max_sweeps, diff


def psor_solve(market: MarketParams, contract: ContractParams,
               config: PsorConfig) -> OracleGrid:
    """Solve the discretized double obstacle problem on [x_min, x_max].

    Dirichlet data: the below-strike closed form delta*(x/K)^eta on the left,
    intrinsic x - K on the right. Works in both drift regimes and for
    penalties above the cap (the upper obstacle then never binds).
    """
    K, delt = contract.strike, contract.penalty
    if not (config.x_min < K < config.x_max):
        raise ValueError(
            f"grid [{config.x_min}, {config.x_max}] must straddle the strike {K}"
        )
    cons = derive_constants(market)
    n = config.nodes
    y = np.linspace(math.log(config.x_min), math.log(config.x_max), n)
    grid = np.exp(y)
    step = y[1] - y[0]

    s2 = 0.5 * market.sigma**2
    m1 = market.r - market.d - s2
    sub = s2 / step**2 - m1 / (2.0 * step)
    sup = s2 / step**2 + m1 / (2.0 * step)
    dia = 2.0 * s2 / step**2 + market.r

    g1 = np.maximum(grid - K, 0.0)
    g2 = g1 + delt
    v = g1.copy()
    v[0] = delt * (config.x_min / K) ** cons.eta
    v[-1] = config.x_max - K

    sweeps, final_diff = _psor_kernel(v, g1, g2, sub, dia, sup,
                                      config.omega, config.tolerance,
                                      config.max_sweeps)
    if final_diff >= config.tolerance:
        raise NotConverged(
            f"PSOR hit the {config.max_sweeps}-sweep cap with sup-norm "
            f"diff {final_diff:.3e} >= tolerance {config.tolerance:.3e}"
        )

    labels = np.full(n, "continue", dtype="<U8")
    labels[v >= g2] = "cancel"
    labels[v <= g1] = "exercise"
    return OracleGrid(grid=grid, values=v, region_labels=labels,
                      sweeps=int(sweeps), final_diff=float(final_diff))


def operator_residual(result: OracleGrid, market: MarketParams) -> np.ndarray:
    """Central-difference generator residual (sigma^2 x^2/2)V'' + (r-d)xV' - rV at interior nodes.

    Same discretization as the solver, so the returned array is exactly the
    quantity PSOR drives to zero off the active sets; used by the
    complementarity checks.
    """
    y = np.log(result.grid)
    step = y[1] - y[0]
    s2 = 0.5 * market.sigma**2
    m1 = market.r - market.d - s2
    sub = s2 / step**2 - m1 / (2.0 * step)
    sup = s2 / step**2 + m1 / (2.0 * step)
    dia = 2.0 * s2 / step**2 + market.r
    v = result.values
    return sub * v[:-2] + sup * v[2:] - dia * v[1:-1]


def default_config(market: MarketParams, contract: ContractParams,
                   nodes: int = 8001) -> PsorConfig:
    """Standard verification grid [K/100, 4*kstar] around the solved boundaries."""
    kstar = reference_kstar(market, contract)
    return PsorConfig(x_min=contract.strike / 100.0, x_max=4.0 * kstar, nodes=nodes)


def reference_kstar(market: MarketParams, contract: ContractParams) -> float:
    """Exercise boundary for domain sizing, covering every parameter regime.

    Falls back to the plain-call boundary when the penalty exceeds the cap and
    to the single-boundary construction when no interior cancel boundary
    exists; only d = 0 has no finite reference.
    """
    from . import boundaries as bnd

    if market.d <= 0.0:
        raise UnsupportedParameters(
            "no finite exercise boundary without dividends; give explicit grid endpoints"
        )
    if contract.penalty > closedform.penalty_cap(market, contract):
        return closedform.AmericanCall.from_params(market, contract.strike).b
    if classify_regime(market) is Regime.RleD:
        return bnd.solve_kstar_le(market, contract).kstar
    try:
        return bnd.solve_pair_gt(market, contract).kstar
    except (NoInteriorCancellation, BracketExhausted):
        return bnd.solve_single_boundary(market, contract).kstar
