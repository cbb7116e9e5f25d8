"""Elastic net over an l1 ball: stochastic FW against variance-reduced baselines.

Uses an offline regression dataset of the same shape as a real benchmark,
standardized, with the ball radius set to half the l1 norm of the
unconstrained minimizer so that the constraint binds.

    python3 demos/elastic_net_comparison.py [seconds_per_run]
"""

import sys

import numpy as np

from stochfw import RunConfig, build_elastic_net, reference_optimum, run
from stochfw.problems import binding_alpha, elastic_net_ls, synthetic_regression
from stochfw.traceio import time_to_threshold

budget = float(sys.argv[1]) if len(sys.argv) > 1 else 10.0

A, b = synthetic_regression(20000, 90, seed=0)
A = (A - A.mean(0)) / A.std(0)
b = b - b.mean()
mu = 0.1
alpha = binding_alpha(elastic_net_ls(A, b, mu), 0.5)
obj, poly = build_elastic_net(A, b, mu, alpha)
f_star, _ = reference_optimum(obj, poly)
print(f"alpha={alpha:.4f}  F*={f_star:.10g}")

target = 1e-3
for cfg in (RunConfig("ASFW"), RunConfig("PSFW"), RunConfig("SVRF"), RunConfig("ProxSVRG"),
            RunConfig("ASFW", "ExactLineSearch", label="ASFW-exact")):
    cfg.max_iterations = 10**7
    cfg.time_budget = budget
    cfg.gap_tolerance = target * abs(f_star)
    tr = run(obj, poly, cfg)
    best = (np.nanmin(tr.objectives) - f_star) / abs(f_star)
    hit = time_to_threshold(tr, f_star, target)
    when = f"{hit:.3f}s" if hit is not None else "not reached"
    print(f"{cfg.label:<11}{tr.status:<14}best={best:.2e}  time to {target:g}: {when}")
