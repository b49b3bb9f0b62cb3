"""Check the closed forms against two independent oracles.

Oracle 1 discretizes the double obstacle problem (intrinsic below, intrinsic
plus penalty above) on a log grid and solves it by projected SOR - no closed
form enters except the far-left boundary value. Oracle 2 plays the solved
boundaries as literal trading strategies on simulated paths and checks the
saddle property: the optimal pair reproduces the price, and neither player
gains by deviating.

Runtime: a few seconds. Crank the node/path counts for tighter bands.
"""

import time

import numpy as np

from perpcall import (
    ContractParams,
    MarketParams,
    McConfig,
    mc_saddle_check,
    price,
    psor_solve,
    solve_boundaries,
)
from perpcall.psor import default_config

market = MarketParams(r=0.02, d=0.01, sigma=0.20)
contract = ContractParams(strike=100.0, penalty=10.0)
sol = solve_boundaries(market, contract)

# ---------------------------------------------------------------- grid oracle
t0 = time.perf_counter()
config = default_config(market, contract, nodes=4001)
grid = psor_solve(market, contract, config)
window = (grid.grid >= 20.0) & (grid.grid <= 1.2 * sol.kstar)
exact = np.array([price(float(x), market, contract).value
                  for x in grid.grid[window]])
rel = np.abs(grid.values[window] - exact) / np.abs(exact)
print(f"PSOR vs closed form ({config.nodes} nodes, {grid.sweeps} sweeps, "
      f"{time.perf_counter() - t0:.2f}s)")
print(f"  sup relative error on [20, 1.2 k*]: {rel.max():.2e}")

# the grid's own idea of the active sets should bracket the solved boundaries
cancel = grid.grid[grid.region_labels == "cancel"]
exercise = grid.grid[grid.region_labels == "exercise"]
print(f"  grid cancel set  [{cancel.min():.4f}, {cancel.max():.4f}]"
      f"   vs h* = {sol.hstar:.4f}")
print(f"  grid exercise from {exercise.min():.4f}           vs k* = {sol.kstar:.4f}")

# ---------------------------------------------------------- simulation oracle
t0 = time.perf_counter()
mc = McConfig(paths=100_000, dt=1.0 / 500.0, horizon=600.0, seed=0)
report = mc_saddle_check(120.0, market, contract, sol, mc)
elapsed = time.perf_counter() - t0

print(f"\nMonte Carlo saddle check at spot 120 ({mc.paths} paths, {elapsed:.2f}s)")
print(f"  closed form          {report.value:9.4f}")
print(f"  optimal strategies   {report.optimal.mean:9.4f} +- {report.optimal.stderr:.4f}"
      f"   {'ok' if report.optimal_ok else 'MISMATCH'}")
print(f"  holder exercises 10% early  {report.holder_perturbed.mean:9.4f}"
      f"   {'does not beat it' if report.holder_ok else 'BEATS IT'}")
print(f"  writer cancels 20% wider    {report.writer_perturbed.mean:9.4f}"
      f"   {'does not beat it' if report.writer_ok else 'BEATS IT'}")
print(f"  verdict: {'PASS' if report.passed else 'FAIL'}")

# --------------------------------------------------- catching a wrong answer
# Feed the checker a corrupted cancel boundary but keep the true reference
# value: the "optimal" strategy now stops too eagerly and the check fails.
import dataclasses

bad = dataclasses.replace(sol, hstar=150.0)
bad_report = mc_saddle_check(120.0, market, contract, bad,
                             McConfig(paths=1000, seed=0), value=report.value)
print(f"\nsame check with h* corrupted to 150: "
      f"{'PASS' if bad_report.passed else 'FAIL (as it should be)'}")
assert not bad_report.passed
