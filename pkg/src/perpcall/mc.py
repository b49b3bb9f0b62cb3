"""Monte Carlo oracle: strategy evaluation for the cancellable call.

Simulates exact lognormal steps at fixed monitoring times. The writer cancels
at the first monitor with the price in [K, h]; the holder exercises at the
first monitor at or above k; ties go to the holder. When the cancellation
region is the single point {K} (h = K), a discrete path almost surely never
lands on it, so the stop is taken at the first monitor on the far side of K
from the start, i.e. the first observed crossing.

Paths are advanced in log space, and monitors that provably (to ~8.5 sigma)
cannot trigger a stop are consumed in one aggregated normal increment, which
is what makes a million 500-steps-per-year paths affordable. Each 65536-path
block draws from its own counter-based substream, so results are bit-identical
for a fixed seed regardless of buffering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import closedform
from .model import ContractParams, MarketParams

_BLOCK = 1 << 16
_BUFFER = 1 << 20


@dataclass(frozen=True)
class McConfig:
    """Path count, monitoring step, truncation horizon, and RNG seed.

    The horizon must make the truncated tail negligible; that depends on the
    exercise boundary, so it is enforced when a simulation is run, as
    e^(-r*horizon)*(k + penalty) < 1e-3 * K.
    """

    paths: int = 1_000_000
    dt: float = 1.0 / 500.0
    horizon: float = 600.0
    seed: int = 0

    def __post_init__(self):
        if self.paths < 1:
            raise ValueError("need at least one path")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if self.horizon < self.dt:
            raise ValueError("horizon shorter than one monitoring step")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    paths_used: int


@dataclass(frozen=True)
class SaddleReport:
    """Three-strategy Monte Carlo check of the saddle property at one spot.

    ``optimal`` plays both solved boundaries; ``holder_perturbed`` exercises
    early at 0.9k; ``writer_perturbed`` cancels on the extended interval up to
    1.2h. The booleans compare each estimate against the closed-form value
    with a 3-standard-error band widened by ``pad`` for monitoring bias.
    """

    value: float
    optimal: McEstimate
    holder_perturbed: McEstimate
    writer_perturbed: McEstimate
    optimal_ok: bool
    holder_ok: bool
    writer_ok: bool
    passed: bool
    pad: float


@njit(cache=True)
def _run_block(y, steps, done, pay, z, start, n_steps, mu, sd, rdt,
               strike, penalty, lk, lh, lkk, mode, sqrtm,
               skip_c, drift_cap, max_skip):
    """Advance paths [start:] until the normal buffer z is exhausted.

    ``mode``: 0 = writer cancels on the band [K,h]; +1/-1 = cancel region is
    {K} and the path starts above/below it, stopping at the first observed
    crossing; 2 = writer never cancels (plain-call degeneration).

    Path-major: each path runs to its stop (or the horizon) before the next
    one starts, so a path's normals are a contiguous slice of the block's
    stream no matter how the buffer is sized. Returns the index of the first
    unfinished path (== len(y) when the block is complete).
    """
    n = y.shape[0]
    nz = z.shape[0]
    zi = 0
    p = start
    while p < n:
        if done[p] == 1:
            p += 1
            continue
        yy = y[p]
        j = steps[p]
        while True:
            if j >= n_steps:
                xv = math.exp(yy)
                g = xv - strike
                if g < 0.0:
                    g = 0.0
                pay[p] = g * math.exp(-rdt * n_steps)
                done[p] = 1
                break
            # log-distance to the nearest monitor state that could stop us
            if mode == 0:
                if yy > lh:
                    dist = yy - lh
                    du = lkk - yy
                    if du < dist:
                        dist = du
                else:
                    dist = lk - yy
            elif mode == 1:
                dist = yy - lk
                du = lkk - yy
                if du < dist:
                    dist = du
            elif mode == -1:
                dist = lk - yy
            else:
                dist = lkk - yy
            # aggregate m monitors into one normal when a crossing inside the
            # block is an >8 sigma event (union bound over both barriers,
            # with a drift allowance folded into the 0.95/0.05 split)
            m = 1
            if dist > 0.0:
                mr = skip_c * dist * dist
                md = drift_cap * dist
                if mr > md:
                    mr = md
                if mr > 1.0:
                    m = int(mr)
                    if m > max_skip:
                        m = max_skip
            tl = n_steps - j
            if m > tl:
                m = tl
            if zi >= nz:
                y[p] = yy
                steps[p] = j
                return p
            zz = z[zi]
            zi += 1
            yy += mu * m + sd * sqrtm[m] * zz
            j += m
            if j >= n_steps:
                continue
            if yy >= lkk:  # holder first on ties
                pay[p] = (math.exp(yy) - strike) * math.exp(-rdt * j)
                done[p] = 1
                break
            writer_stop = False
            if mode == 0:
                writer_stop = yy >= lk and yy <= lh
            elif mode == 1:
                writer_stop = yy <= lk
            elif mode == -1:
                writer_stop = yy >= lk
            if writer_stop:
                xv = math.exp(yy)
                g = xv - strike
                if g < 0.0:
                    g = 0.0
                pay[p] = (g + penalty) * math.exp(-rdt * j)
                done[p] = 1
                break
        p += 1
    return n


def mc_strategy_value(x, market: MarketParams, contract: ContractParams,
                      h, k: float, config: McConfig,
                      *, max_skip: int = 256) -> McEstimate:
    """Discounted value of the strategy pair (cancel on [K,h], exercise at k).

    ``h=None`` means the writer never cancels (the plain-call degeneration).
    Exact when the start is already in a stopping set; otherwise a simulation
    over round(horizon/dt) monitors, truncation paying the call intrinsic.
    Deterministic for a fixed config.
    """
    x, k = float(x), float(k)
    K, delt = contract.strike, contract.penalty
    if x <= 0.0:
        raise ValueError("spot must be positive")
    if h is None:
        if k <= K:
            raise ValueError(f"need k > K, got k={k}, K={K}")
    else:
        h = float(h)
        if not (K <= h < k):
            raise ValueError(f"need K <= h < k, got K={K}, h={h}, k={k}")
    if x >= k:
        return McEstimate(mean=x - K, stderr=0.0, paths_used=config.paths)
    if h is not None and K <= x <= h:
        return McEstimate(mean=(x - K) + delt, stderr=0.0, paths_used=config.paths)

    tail = math.exp(-market.r * config.horizon) * (k + delt)
    if tail >= 1e-3 * K:
        raise ValueError(
            f"horizon {config.horizon} leaves a truncated tail of {tail:.3g} "
            f"(> 0.1% of the strike); raise McConfig.horizon"
        )

    n_steps = max(1, int(round(config.horizon / config.dt)))
    dt = config.dt
    mu = (market.r - market.d - 0.5 * market.sigma**2) * dt
    sd = market.sigma * math.sqrt(dt)
    rdt = market.r * dt
    if h is None:
        mode = 2
    elif h > K:
        mode = 0
    else:
        mode = 1 if x > K else -1
    lk, lkk = math.log(K), math.log(k)
    lh = math.log(h) if h is not None else lk
    if max_skip < 1:
        max_skip = 1
    sqrtm = np.sqrt(np.arange(max_skip + 1, dtype=np.float64))
    skip_c = (0.95 / (8.5 * sd)) ** 2
    drift_cap = 0.05 / abs(mu) if mu != 0.0 else np.inf

    n = config.paths
    n_blocks = (n + _BLOCK - 1) // _BLOCK
    children = np.random.SeedSequence(config.seed).spawn(n_blocks)
    z = np.empty(_BUFFER)
    total = 0.0
    total_sq = 0.0
    for b in range(n_blocks):
        nb = min(_BLOCK, n - b * _BLOCK)
        gen = np.random.Generator(np.random.Philox(children[b]))
        y = np.full(nb, math.log(x))
        steps = np.zeros(nb, np.int64)
        done = np.zeros(nb, np.uint8)
        pay = np.zeros(nb)
        start = 0
        while start < nb:
            gen.standard_normal(out=z)
            start = _run_block(y, steps, done, pay, z, start, n_steps,
                               mu, sd, rdt, K, delt, lk, lh, lkk,
                               mode, sqrtm, skip_c, drift_cap, max_skip)
        total += float(pay.sum())
        total_sq += float((pay * pay).sum())

    mean = total / n
    var = (total_sq - n * mean * mean) / (n - 1) if n > 1 else 0.0
    stderr = math.sqrt(max(var, 0.0) / n)
    return McEstimate(mean=mean, stderr=stderr, paths_used=n)


def mc_saddle_check(x, market: MarketParams, contract: ContractParams,
                    solution, config: McConfig, *, pad: float = 0.1,
                    value=None) -> SaddleReport:
    """Check the saddle property of the solved boundaries by perturbation.

    Optimal-vs-optimal must reproduce the closed-form value; a holder who
    exercises at 0.9k must not do better; a writer who cancels on the wider
    interval [K, 1.2h] must not do better (i.e. not push the value below).
    ``value`` overrides the reference (used to test deliberately corrupted
    boundaries against the true price); by default it is computed from the
    given solution.
    """
    x = float(x)
    K = contract.strike
    kstar = solution.kstar
    if closedform.is_american_degenerate(market, contract, solution):
        h_opt = None  # the writer never cancels
    else:
        h_opt = solution.hstar if solution.hstar is not None else K
    if value is None:
        value = float(closedform.value_from_solution(x, market, contract, solution))
    else:
        value = float(value)

    # 0.9k / 1.2h perturbations, pulled to the boundary midpoint when the
    # boundaries are close enough that the literal factor would cross over
    h_floor = h_opt if h_opt is not None else K
    mid = 0.5 * (h_floor + kstar)
    k_pert = max(0.9 * kstar, mid)
    h_pert = min(1.2 * h_floor, mid)

    optimal = mc_strategy_value(x, market, contract, h_opt, kstar, config)
    holder_pert = mc_strategy_value(x, market, contract, h_opt, k_pert, config)
    writer_pert = mc_strategy_value(x, market, contract, h_pert, kstar, config)

    optimal_ok = abs(optimal.mean - value) <= 3.0 * optimal.stderr + pad
    holder_ok = holder_pert.mean <= value + 3.0 * holder_pert.stderr + pad
    writer_ok = writer_pert.mean >= value - 3.0 * writer_pert.stderr - pad
    return SaddleReport(
        value=value,
        optimal=optimal,
        holder_perturbed=holder_pert,
        writer_perturbed=writer_pert,
        optimal_ok=optimal_ok,
        holder_ok=holder_ok,
        writer_ok=writer_ok,
        passed=optimal_ok and holder_ok and writer_ok,
        pad=pad,
    )
