#!/usr/bin/env python3
"""Dynamic sparse regression: track a drifting ground truth online.

The design matrix and the q-sparse truth drift every step; observations
carry Gaussian noise. One solver pass per step is compared against the
per-step offline optimum and against the truth itself.
"""

import numpy as np

from dynadmm.lasso import assemble
from dynadmm.metrics import sparsity_deviation
from dynadmm.oracle import OracleConfig, solve_static_admm
from dynadmm.solver import SolverConfig, initial_state, step
from dynadmm.synth import LassoStreamConfig, RngStream, lasso_stream

SEED = 3
STEPS = 50
M, P, Q = 10, 30, 2

rng = RngStream(SEED)
pairs = lasso_stream(
    LassoStreamConfig(m=M, p=P, q=Q, eta=0.05, sigma=0.1, gamma=0.2), STEPS, rng
)
truths = [truth for _, truth in pairs]
instances = [assemble(lp, k) for k, (lp, _) in enumerate(pairs, start=1)]
support = truths[0].support

oracle_cfg = OracleConfig(method="static_admm")
optimum = None
optima = []
for inst in instances:
    optimum = solve_static_admm(inst, oracle_cfg, optimum)
    optima.append(optimum)

state = initial_state(P, P)
solver_cfg = SolverConfig(rho=1.0)
print(f"lasso stream: m={M}, p={P}, support={support.tolist()}, {STEPS} steps")
print(f"{'k':>4}  {'|x - x*|':>9}  {'|x - truth|':>11}  {'|x* - truth|':>12}  "
      f"{'off-support |x|':>15}")
for k, (inst, opt, truth) in enumerate(zip(instances, optima, truths), start=1):
    state = step(state, inst, solver_cfg)
    if k in (1, 2, 5, 10, 25, 50):
        err_opt = np.linalg.norm(state.x - opt.x)
        err_truth = np.linalg.norm(state.x - truth.values)
        oracle_truth = np.linalg.norm(opt.x - truth.values)
        spurious = sparsity_deviation(state.x, support)
        print(f"{k:>4}  {err_opt:>9.4f}  {err_truth:>11.4f}  {oracle_truth:>12.4f}  "
              f"{spurious:>15.5f}")

print("\nfinal step, support coordinates (tracked / offline / truth):")
for j in support:
    print(f"  x[{j}] = {state.x[j]:+.4f} / {optima[-1].x[j]:+.4f} / "
          f"{truths[-1].values[j]:+.4f}")
