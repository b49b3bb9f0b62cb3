"""Free-boundary solvers.

Two jobs: invert the penalty-vs-boundary relation for the single exercise
boundary when the cancellation region is the point {K}, and solve the coupled
smooth-pasting system for the (cancel, exercise) pair when it is an interval.
All searches are bracketing (Brent), justified by the monotone/unimodal shape
of the residuals, so the solvers are deterministic and derivative-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from . import closedform
from .diffusion import DiffusionKernel, power
from .errors import (
    BracketExhausted,
    InvalidBoundaries,
    NoInteriorCancellation,
    PenaltyAboveCap,
    RegimeMismatch,
    UnsupportedParameters,
)
from .model import (
    ContractParams,
    DerivedConstants,
    MarketParams,
    Regime,
    classify_regime,
    derive_constants,
)

_RTOL = 4.0 * float(np.finfo(float).eps)
_OUTER_CAP = float(2**20)


@dataclass(frozen=True)
class BoundarySolution:
    """Solved free boundaries plus solver diagnostics.

    ``hstar`` is present only when the cancellation region is a genuine
    interval [K, hstar]; otherwise the region is {K} and ``hstar`` is None.
    ``residuals`` holds per-equation absolute residuals, ``bracket_report``
    the intervals each root was isolated in.
    """

    regime: Regime
    kstar: float
    hstar: Optional[float]
    residuals: Dict[str, float] = field(default_factory=dict)
    bracket_report: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    note: Optional[str] = None
    heuristic: bool = False


def delta_of_k(market: MarketParams, contract: ContractParams, k: float) -> float:
    """Penalty level for which ``k`` is the optimal exercise boundary ({K}-cancellation case).

    Strictly increasing from 0 at k=K up to the penalty cap at the plain-call
    boundary b, which is what makes the single-boundary solve a clean bracket.
    """
    K = contract.strike
    if k < K:
        raise InvalidBoundaries(f"boundary must not be below the strike, got k={k} < K={K}")
    cons = derive_constants(market)
    eta, nu = cons.eta, cons.nu
    g = power(K / k, nu)
    q = power(K / k, eta - nu)
    return g * (((k - K) * eta - k) + q * (k - (k - K) * nu)) / (eta - nu)


def _single_smooth_fit_residual(market, contract, kstar) -> float:
    """v'(kstar-) - 1 for the {K}-cancellation value function."""
    cons = derive_constants(market)
    K, delt = contract.strike, contract.penalty
    slope = closedform._interior_derivative(cons, K, delt, kstar, kstar - K, kstar)
    return slope - 1.0


def solve_single_boundary(market: MarketParams, contract: ContractParams,
                          *, note: Optional[str] = None,
                          heuristic: bool = False) -> BoundarySolution:
    """Bracketed solve of delta_of_k(k) = penalty on [K, b]."""
    K, delt = contract.strike, contract.penalty
    dstar = closedform.penalty_cap(market, contract)
    if delt > dstar * (1.0 + 1e-12):
        raise PenaltyAboveCap(
            f"penalty {delt} exceeds the cancellation cap {dstar}; contract is a plain call"
        )
    b = closedform.AmericanCall.from_params(market, K).b
    f = lambda k: delta_of_k(market, contract, k) - delt
    kstar = brentq(f, K, b, xtol=1e-12 * K, rtol=_RTOL)
    residuals = {
        "boundary_condition": abs(delta_of_k(market, contract, kstar) - delt),
        "smooth_fit": abs(_single_smooth_fit_residual(market, contract, kstar))
        if kstar > K
        else 0.0,
    }
    return BoundarySolution(
        regime=classify_regime(market),
        kstar=float(kstar),
        hstar=None,
        residuals=residuals,
        bracket_report={"kstar": (K, b)},
        note=note,
        heuristic=heuristic,
    )


def solve_kstar_le(market: MarketParams, contract: ContractParams) -> BoundarySolution:
    """Exercise boundary for r <= d (cancellation region {K})."""
    if classify_regime(market) is not Regime.RleD:
        raise RegimeMismatch("solve_kstar_le called with r > d")
    return solve_single_boundary(market, contract)


# -- interval-cancellation pair (r > d) ---------------------------------------


def residual_E1(market: MarketParams, contract: ContractParams, h: float, k: float,
                scale_anchor: float = 1.0) -> float:
    """Smooth-pasting residual at the cancel boundary, via the diffusion primitives.

    Multiplied by S'(1) so the reported value is invariant to the scale anchor
    (the Wronskian and 1/S' carry a joint anchor factor that cancels here).
    """
    _check_pair(contract.strike, h, k)
    kern = DiffusionKernel.build(market, scale_anchor)
    K, delt = contract.strike, contract.penalty
    sph = kern.scale_density(h)
    g2h = (h - K) + delt
    raw = (
        kern.phi_hat(k, h) / sph
        - kern.dphi_hat(k, h) / sph * g2h
        - kern.wronskian() * (k - K) / kern.psi(k)
    )
    return float(raw * kern.scale_density(1.0))


def residual_E2(market: MarketParams, contract: ContractParams, h: float, k: float,
                scale_anchor: float = 1.0) -> float:
    """Smooth-pasting residual at the exercise boundary, anchor-invariant as residual_E1."""
    _check_pair(contract.strike, h, k)
    kern = DiffusionKernel.build(market, scale_anchor)
    K, delt = contract.strike, contract.penalty
    spk = kern.scale_density(k)
    g2h = (h - K) + delt
    raw = (
        kern.psi_hat(h, k) / spk
        - kern.dpsi_hat(h, k) / spk * (k - K)
        + kern.wronskian() * g2h / kern.phi(h)
    )
    return float(raw * kern.scale_density(1.0))


def _check_pair(K: float, h: float, k: float) -> None:
    if not (K < h < k):
        raise InvalidBoundaries(f"need K < h < k, got K={K}, h={h}, k={k}")


def _e1_scaled(cons: DerivedConstants, K: float, delt: float, h: float, k: float) -> float:
    # residual_E1 * psi(h) * S'(1): same sign and roots, every power has base <= 1
    eta, nu = cons.eta, cons.nu
    w = power(h / k, eta - nu)
    g2 = (h - K) + delt
    return h - nu * g2 - w * (h - eta * g2) - (eta - nu) * (k - K) * power(h / k, eta)


def _e2_scaled(cons: DerivedConstants, K: float, delt: float, h: float, k: float) -> float:
    # residual_E2 * phi(k) * S'(1), same normalization idea as _e1_scaled
    eta, nu = cons.eta, cons.nu
    w = power(h / k, eta - nu)
    g2 = (h - K) + delt
    return k - eta * (k - K) - w * (k - nu * (k - K)) + (eta - nu) * g2 * power(h / k, -nu)


def solve_pair_gt(market: MarketParams, contract: ContractParams,
                  scale_anchor: float = 1.0) -> BoundarySolution:
    """Solve the coupled smooth-pasting system for the pair (hstar, kstar), r > d.

    Nested bracketing: for fixed k the cancel-boundary residual rises then
    falls on (K, r(K-penalty)/d) and is positive at k, so it has at most one
    root below its mode, found by Brent; the exercise boundary is then the
    sign change of the outer residual along k, with the bracket grown
    geometrically from (r/d)K.
    """
    if classify_regime(market) is not Regime.RgtD:
        raise RegimeMismatch("solve_pair_gt called with r <= d")
    if market.d <= 0.0:
        raise UnsupportedParameters("interval cancellation requires d > 0")
    K, delt = contract.strike, contract.penalty
    r, d = market.r, market.d
    dstar = closedform.penalty_cap(market, contract)
    if delt > dstar * (1.0 + 1e-12):
        raise PenaltyAboveCap(
            f"penalty {delt} exceeds the cancellation cap {dstar}; contract is a plain call"
        )
    hbar = r * (K - delt) / d
    if hbar <= K * (1.0 + 1e-12):
        raise NoInteriorCancellation(
            f"r(K-penalty)/d = {hbar} does not exceed K = {K}: "
            "no cancellation boundary above the strike exists"
        )
    cons = derive_constants(market)
    xtol = 1e-12 * K

    def inner(k: float) -> Optional[float]:
        lo = K * (1.0 + 1e-12)
        hi = min(hbar, k * (1.0 - 1e-12))
        if hi <= lo:
            return None
        if _e1_scaled(cons, K, delt, lo, k) >= 0.0:
            return None
        if _e1_scaled(cons, K, delt, hi, k) <= 0.0:
            return None
        return brentq(lambda h: _e1_scaled(cons, K, delt, h, k), lo, hi,
                      xtol=xtol, rtol=_RTOL)

    def outer(k: float) -> Optional[float]:
        h = inner(k)
        return None if h is None else _e2_scaled(cons, K, delt, h, k)

    # The set of k for which the cancel equation has a root is a window whose
    # membership is cheap to test in the h -> K limit; locate a point of it
    # first, then grow a sign-change bracket that backs off geometrically
    # whenever a probe overshoots the window's edge.
    k_floor = (r / d) * K * (1.0 + 1e-9)
    k0, f0 = _find_window_point(outer,
                                lambda k: _e1_scaled(cons, K, delt, K * (1.0 + 1e-12), k),
                                k_floor, _OUTER_CAP * K)
    bracket = _hunt_sign_change(outer, k0, f0, k_floor, _OUTER_CAP * K)
    if bracket[0] == bracket[1]:
        kstar = bracket[0]
    else:
        kstar = brentq(_require(outer), bracket[0], bracket[1], xtol=xtol, rtol=_RTOL)

    hstar = inner(kstar)
    if hstar is None:
        raise BracketExhausted("cancel-boundary root lost at the solved exercise boundary")

    residuals = {
        "E1": abs(residual_E1(market, contract, hstar, kstar, scale_anchor)),
        "E2": abs(residual_E2(market, contract, hstar, kstar, scale_anchor)),
        "E1_scaled": abs(_e1_scaled(cons, K, delt, hstar, kstar)) / K,
        "E2_scaled": abs(_e2_scaled(cons, K, delt, hstar, kstar)) / K,
    }
    return BoundarySolution(
        regime=Regime.RgtD,
        kstar=float(kstar),
        hstar=float(hstar),
        residuals=residuals,
        bracket_report={
            "hstar": (K * (1.0 + 1e-12), min(hbar, kstar)),
            "kstar": bracket,
        },
    )


def _find_window_point(outer: Callable[[float], Optional[float]],
                       edge_test: Callable[[float], float],
                       k_floor: float, k_cap: float) -> Tuple[float, float]:
    """First k (geometric scan) at which the cancel equation has a root.

    ``edge_test`` is the residual in the cancel boundary's h -> K limit; it is
    negative exactly where a root can exist, and costs one closed-form
    evaluation, so the scan is cheap even when the window opens far from the
    starting point.
    """
    f = outer(k_floor)
    if f is not None:
        return k_floor, f
    k = k_floor
    while k <= k_cap:
        k *= 1.05
        if edge_test(k) < 0.0:
            f = outer(k)
            if f is not None:
                return k, f
    raise NoInteriorCancellation(
        "cancel-boundary equation has no root at any searched exercise boundary"
    )


def _hunt_sign_change(outer: Callable[[float], Optional[float]],
                      k0: float, f0: float,
                      k_floor: float, k_cap: float) -> Tuple[float, float]:
    """Bracket a sign change of ``outer`` around a point where it is defined.

    Probes grow (or halve) geometrically; a probe where ``outer`` is undefined
    marks an edge of the definedness window and the step backs off toward its
    geometric midpoint. Tries upward first, then downward to ``k_floor``.
    """
    if f0 == 0.0:
        return (k0, k0)

    def hunt(direction: int) -> Optional[Tuple[float, float]]:
        anchor, limit = k0, (k_cap if direction > 0 else k_floor)
        edge = None  # nearest probe beyond which outer was undefined
        for _ in range(300):
            if edge is None:
                probe = anchor * 2.0 if direction > 0 else max(anchor * 0.5, limit)
                if direction > 0 and probe > k_cap:
                    raise BracketExhausted(
                        f"no sign change of the exercise residual up to {_OUTER_CAP:g}*K"
                    )
            else:
                probe = float(np.sqrt(anchor * edge))
            if abs(probe / anchor - 1.0) < 1e-13:
                return None  # window edge reached without a sign change
            f = outer(probe)
            if f is None:
                edge = probe
            elif f == 0.0:
                return (probe, probe)
            elif (f > 0.0) != (f0 > 0.0):
                return (min(anchor, probe), max(anchor, probe))
            else:
                anchor = probe
                if direction < 0 and probe <= limit:
                    return None
        return None

    found = hunt(+1)
    if found is None:
        found = hunt(-1)
    if found is None:
        raise BracketExhausted(
            "exercise residual keeps one sign on the whole window where the "
            "cancel equation is solvable"
        )
    return found


def _require(f: Callable[[float], Optional[float]]) -> Callable[[float], float]:
    def g(x: float) -> float:
        v = f(x)
        if v is None:
            raise BracketExhausted(f"residual undefined inside the bracket at {x}")
        return v

    return g


def integral_residuals(market: MarketParams, contract: ContractParams,
                       h: float, k: float) -> Tuple[float, float]:
    """Integral re-expression of the smooth-pasting system, evaluated in closed form.

    Both integrands are power functions times affine drift terms, so the
    antiderivatives are explicit. Returns the two integrals minus their
    targets (penalty, -penalty); both components vanish at the solved pair.
    """
    K, delt = contract.strike, contract.penalty
    if not (K < h <= k):
        raise InvalidBoundaries(f"need K < h <= k, got K={K}, h={h}, k={k}")
    if market.d <= 0.0:
        raise UnsupportedParameters("integral form requires d > 0 (exponent 1 is resonant)")
    cons = derive_constants(market)
    eta, nu = cons.eta, cons.nu
    r, d, sigma = market.r, market.d, market.sigma
    lam = cons.lam

    def upper_part(x: float) -> float:
        # antiderivative of (rK - r*penalty - d*x) * psi(k) phi_hat_k(x) m'(x) / B
        A = r * K - r * delt
        return power(k / x, eta) * (-A / eta - d * x / (1.0 - eta)) - power(k / x, nu) * (
            -A / nu - d * x / (1.0 - nu)
        )

    def lower_part(x: float) -> float:
        # antiderivative of (rK - d*x) * phi(h) psi_hat_h(x) m'(x) / B
        A = r * K
        return power(h / x, nu) * (-A / nu - d * x / (1.0 - nu)) - power(h / x, eta) * (
            -A / eta - d * x / (1.0 - eta)
        )

    i1 = (upper_part(k) - upper_part(h)) / (sigma * lam)
    i2 = (lower_part(k) - lower_part(h)) / (sigma * lam)
    return (i1 - delt, i2 + delt)
