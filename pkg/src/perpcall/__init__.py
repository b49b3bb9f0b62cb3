"""Perpetual cancellable (penalty) call options on a dividend-paying asset.

Closed-form prices and optimal exercise/cancellation boundaries under
geometric Brownian motion, verified by two independent numerical oracles:
a projected-SOR double obstacle solver and a Monte Carlo strategy evaluator.
"""

from .boundaries import (
    BoundarySolution,
    delta_of_k,
    integral_residuals,
    residual_E1,
    residual_E2,
    solve_kstar_le,
    solve_pair_gt,
    solve_single_boundary,
)
from .closedform import (
    AmericanCall,
    PriceResult,
    Region,
    american_value,
    classify_from_solution,
    delta,
    is_american_degenerate,
    penalty_cap,
    price,
    solve_boundaries,
    value_from_solution,
    value_r_gt_d,
    value_r_le_d,
    vega,
)
from .diffusion import DiffusionKernel
from .errors import (
    BracketExhausted,
    InvalidBoundaries,
    NoInteriorCancellation,
    NotConverged,
    OracleMismatch,
    PenaltyAboveCap,
    PerpcallError,
    RegimeMismatch,
    UnsupportedParameters,
)
from .mc import McConfig, McEstimate, SaddleReport, mc_saddle_check, mc_strategy_value
from .model import (
    ContractParams,
    DerivedConstants,
    MarketParams,
    Regime,
    classify_regime,
    derive_constants,
)
from .psor import OracleGrid, PsorConfig, default_config, operator_residual, psor_solve

__version__ = "0.1.0"

__all__ = [
    "AmericanCall",
    "BoundarySolution",
    "BracketExhausted",
    "ContractParams",
    "DerivedConstants",
    "DiffusionKernel",
    "InvalidBoundaries",
    "MarketParams",
    "McConfig",
    "McEstimate",
    "NoInteriorCancellation",
    "NotConverged",
    "OracleGrid",
    "OracleMismatch",
    "PenaltyAboveCap",
    "PerpcallError",
    "PriceResult",
    "PsorConfig",
    "Region",
    "Regime",
    "RegimeMismatch",
    "SaddleReport",
    "UnsupportedParameters",
    "american_value",
    "classify_from_solution",
    "classify_regime",
    "default_config",
    "delta",
    "delta_of_k",
    "derive_constants",
    "integral_residuals",
    "is_american_degenerate",
    "mc_saddle_check",
    "mc_strategy_value",
    "operator_residual",
    "penalty_cap",
    "price",
    "psor_solve",
    "residual_E1",
    "residual_E2",
    "solve_boundaries",
    "solve_kstar_le",
    "solve_pair_gt",
    "solve_single_boundary",
    "value_from_solution",
    "value_r_gt_d",
    "value_r_le_d",
    "vega",
    "__version__",
]
