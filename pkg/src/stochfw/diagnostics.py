"""Convergence diagnostics for Frank-Wolfe traces.

Step classification follows the four-way split used in the linear-rate
argument for away-step methods:

    A: gamma_max >= 1 and gamma < 1
    B: gamma_max >= 1 and gamma >= 1
    C: gamma_max < 1 and gamma < gamma_max
    D: gamma_max < 1 and gamma == gamma_max   (drop/swap steps)
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .algorithms import RunTrace
from .problems import ObjectiveFamily, SampleBatch, sample_batch

logger = logging.getLogger(__name__)

EQ_TOL = 1e-12


@dataclass(frozen=True)
class RateFit:
    slope_per_iteration: float
    r_squared: float
    window: tuple[int, int]
    implied_factor: float


@dataclass
class CaseTally:
    A: int = 0
    B: int = 0
    C: int = 0
    D: int = 0
    drops: int = 0
    swaps: int = 0
    iterations: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def classify_step(gamma: float, gamma_max: float) -> str:
    if gamma < -EQ_TOL or gamma > gamma_max + EQ_TOL:
        raise ValueError(f"step {gamma} outside [0, {gamma_max}]")
    if gamma_max >= 1.0:
        return "B" if gamma >= 1.0 else "A"
    return "D" if abs(gamma - gamma_max) <= EQ_TOL else "C"


def tally_cases(trace: RunTrace, upto: int | None = None) -> CaseTally:
    """Count step cases over the iterations ``1..upto`` of a trace."""
    tally = CaseTally()
    for rec in trace.records:
        if rec.k == 0 or rec.step_kind is None:
            continue
        if upto is not None and rec.k > upto:
            break
        case = classify_step(rec.gamma, rec.gamma_max)
        setattr(tally, case, getattr(tally, case) + 1)
        tally.drops += rec.step_kind.is_drop
        tally.swaps += rec.step_kind.is_swap
        tally.iterations += 1
    return tally


def drop_step_audit(tally: CaseTally, k: int, algorithm: str = "ASFW",
                    num_vertices: int | None = None) -> bool:
    """Check the drop-step budget after ``k`` iterations.

    Away-step runs may take at most ``(k + 1) / 2`` drop steps.  For
    pairwise runs drops plus swaps are compared with
    ``(1 - 1 / (3 |V|! + 1)) k``; that bound is reported but never failed
    once ``|V| > 4``, where it is essentially vacuous.
    """
    if algorithm in ("PSFW", "PFW"):
        if num_vertices is None:
            return True
        if num_vertices > 4:
            bound = k  # 1 - 1/(3|V|!+1) rounds to 1 in double precision for |V| >= 19
            if tally.drops + tally.swaps > bound:
                logger.warning("pairwise drop/swap count %d exceeds k=%d", tally.drops + tally.swaps, k)
            return True
        bound = (1.0 - 1.0 / (3 * math.factorial(num_vertices) + 1)) * k
        return tally.drops + tally.swaps <= bound
    return tally.drops <= (k + 1) / 2


def drop_step_violations(trace: RunTrace, algorithm: str | None = None,
                         num_vertices: int | None = None) -> list[int]:
    """Iteration counts ``k`` whose prefix breaks the drop-step budget."""
    algorithm = algorithm or trace.metadata.get("algorithm", "ASFW")
    bad = []
    running = CaseTally()
    for rec in trace.records:
        if rec.k == 0 or rec.step_kind is None:
            continue
        running.drops += rec.step_kind.is_drop
        running.swaps += rec.step_kind.is_swap
        running.iterations += 1
        if not drop_step_audit(running, rec.k, algorithm, num_vertices):
            bad.append(rec.k)
    return bad


def rate_fit_values(ks, gaps, tail_fraction: float = 0.5, min_records: int = 20) -> RateFit:
    """Least-squares fit of ``log(gap)`` against ``k`` over the tail."""
    ks = np.asarray(ks, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    keep = np.isfinite(gaps) & (gaps > 0)
    ks, gaps = ks[keep], gaps[keep]
    if len(ks) < max(min_records, 2):
        raise ValueError(
            f"only {len(ks)} records with positive gap; need {max(min_records, 2)} "
            "(shrink the window or stop earlier)"
        )
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must be in (0, 1]")
    start = min(len(ks) - 2, int(math.floor(len(ks) * (1.0 - tail_fraction))))
    ks, y = ks[start:], np.log(gaps[start:])
    slope, intercept = np.polyfit(ks, y, 1)
    resid = y - (slope * ks + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
        slope = 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFit(float(slope), r2, (int(ks[0]), int(ks[-1])), float(math.exp(slope)))


def rate_fit(trace: RunTrace, f_star: float, tail_fraction: float = 0.5,
             min_records: int = 20) -> RateFit:
    """Fit the per-iteration linear rate of ``F(x_k) - f_star``."""
    ks = trace.column("k")
    gaps = trace.objectives - f_star
    return rate_fit_values(ks, gaps, tail_fraction, min_records)


def empirical_sup_deviation(obj: ObjectiveFamily, m: int, probe_points, replications: int = 50,
                            seed: int = 0, exact: bool = False) -> float:
    """Monte-Carlo estimate of ``E max_probe |F_batch(x) - F(x)|``.

    ``F_batch`` averages ``m`` terms drawn with replacement.  With
    ``exact=True`` and ``m >= n`` each term is used once, so the deviation
    vanishes.
    """
    P = np.atleast_2d(np.asarray(probe_points, dtype=np.float64))
    if P.size == 0 or P.shape[0] == 0:
        raise ValueError("empty probe set")
    if P.shape[1] != obj.p:
        raise ValueError(f"probe points must have {obj.p} coordinates")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    R = P @ obj.A.T - obj.b  # probes x n residuals
    terms = obj.row_scale * R * R + obj.ridge * np.einsum("ij,ij->i", P, P)[:, None]
    full = terms.mean(axis=1)
    if exact and m >= obj.n:
        return float(np.max(np.abs(terms.mean(axis=1) - full)))
    children = np.random.SeedSequence(seed).spawn(replications)
    devs = np.empty(replications)
    for r, child in enumerate(children):
        batch: SampleBatch = sample_batch(np.random.default_rng(child), obj.n, m)
        w = batch.counts / batch.size
        approx = terms[:, batch.indices] @ w
        devs[r] = np.max(np.abs(approx - full))
    return float(devs.mean())


def concentration_envelope(m: float) -> float:
    """Shape ``sqrt(log m / m)`` of the sup-deviation bound (constant omitted)."""
    return math.sqrt(math.log(m) / m)


def audit_report(trace: RunTrace, f_star: float | None = None,
                 num_vertices: int | None = None) -> dict:
    """JSON-ready summary of cases, drop budget and (if possible) the rate."""
    algorithm = trace.metadata.get("algorithm", "")
    out: dict = {"algorithm": algorithm, "status": trace.status, "iterations": trace.iterations}
    if algorithm in ("ASFW", "PSFW", "AFW", "PFW", "FW"):
        out["cases"] = tally_cases(trace).to_dict()
        out["drop_step_violations"] = len(drop_step_violations(trace, algorithm, num_vertices))
    if f_star is not None:
        try:
            fit = rate_fit(trace, f_star)
            out["rate_fit"] = asdict(fit)
        except ValueError as exc:
            out["rate_fit"] = {"error": str(exc)}
    return out
