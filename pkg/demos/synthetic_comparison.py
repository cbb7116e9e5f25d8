"""Desk-scale comparison on the ordered-box least squares problem.

Runs ASFW and PSFW with the adaptive step and the geometric batch schedule,
plus their exact line search variants, and reports the relative gap reached
and the time to a few thresholds.

    python3 demos/synthetic_comparison.py [n] [p]
"""

import sys

import numpy as np

from stochfw import BatchSchedule, RunConfig, generate_synthetic, reference_optimum, run
from stochfw.diagnostics import rate_fit, tally_cases
from stochfw.traceio import time_to_threshold

n = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
p = int(sys.argv[2]) if len(sys.argv) > 2 else 50

obj, poly = generate_synthetic(n, p, seed=1)
f_star, ref = reference_optimum(obj, poly)
print(f"n={n} p={p}  F*={f_star:.10g}  reference iterations={ref.iterations}")

configs = [
    RunConfig("ASFW", max_iterations=10_000, seed=0),
    RunConfig("PSFW", max_iterations=10_000, seed=0),
    RunConfig("ASFW", "ExactLineSearch", max_iterations=10_000, seed=0, label="ASFW-exact"),
    RunConfig("PSFW", "ExactLineSearch", max_iterations=10_000, seed=0, label="PSFW-exact"),
    RunConfig("AFW", "ExactLineSearch", max_iterations=10_000, label="AFW"),
]

thresholds = (1e-2, 1e-4, 1e-6)
print(f"{'run':<12}{'status':<14}{'iters':>7}{'best gap':>11}" + "".join(f"{t:>10.0e}" for t in thresholds))
for cfg in configs:
    cfg.batch_schedule = BatchSchedule()
    tr = run(obj, poly, cfg)
    best = (np.nanmin(tr.objectives) - f_star) / abs(f_star)
    times = [time_to_threshold(tr, f_star, t) for t in thresholds]
    cells = "".join(f"{t:>9.3f}s" if t is not None else f"{'-':>10}" for t in times)
    print(f"{cfg.label:<12}{tr.status:<14}{tr.iterations:>7}{best:>11.2e}{cells}")

    if cfg.algorithm in ("ASFW", "PSFW") and tr.iterations >= 40:
        t = tally_cases(tr)
        fit = rate_fit(tr, f_star - 1e-12 * abs(f_star), min_records=10)
        print(f"{'':<12}cases A={t.A} B={t.B} C={t.C} D={t.D} drops={t.drops}"
              f"  slope={fit.slope_per_iteration:.2e} R2={fit.r_squared:.3f}")
