"""Stochastic and deterministic Frank-Wolfe solvers plus comparators.

All solvers share one driver, :func:`run`, which produces a :class:`RunTrace`
with one record per iteration (record ``k = 0`` is the starting vertex).
Timing in the trace counts algorithm work only; objective and duality-gap
monitoring is excluded from ``wall_seconds``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .active_set import AWAY, FRANK_WOLFE, PAIRWISE, StepKind, VertexRepresentation
from .polytope import GeometryConstants, Polytope
from .problems import ObjectiveFamily, SampleBatch, sample_batch

logger = logging.getLogger(__name__)

ALGORITHMS = ("FW", "AFW", "PFW", "ASFW", "PSFW", "SVRF", "ProxSVRG")
STEP_RULES = ("Adaptive", "ExactLineSearch", "Harmonic")
SCHEDULES = ("Experimental", "Theoretical", "FullBatch")

GAP_CONVERGED = "GapConverged"
MAX_ITERATIONS = "MaxIterations"
TIME_BUDGET = "TimeBudget"
BATCH_LIMIT = "BatchLimit"

MAX_BATCH = 2**53


class BatchSizeOverflow(OverflowError):
    pass


@dataclass(frozen=True)
class BatchSchedule:
    kind: str = "Experimental"
    c0: float = 100.0
    base: float = 1.04
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in SCHEDULES:
            raise ValueError(f"unknown batch schedule {self.kind!r}")
        if self.kind == "Experimental" and not self.base > 1:
            raise ValueError(f"schedule base must exceed 1, got {self.base}")
        if self.kind == "Theoretical" and (self.rho is None or not 0 < self.rho < 1):
            raise ValueError(f"Theoretical schedule needs rho in (0, 1), got {self.rho}")

    def to_dict(self) -> dict:
        if self.kind == "Experimental":
            return {"kind": self.kind, "c0": self.c0, "base": self.base}
        if self.kind == "Theoretical":
            return {"kind": self.kind, "rho": self.rho}
        return {"kind": self.kind}


@dataclass
class RunConfig:
    algorithm: str = "ASFW"
    step_rule: str = "Adaptive"
    batch_schedule: BatchSchedule = field(default_factory=BatchSchedule)
    max_iterations: int = 10_000
    time_budget: float = math.inf
    gap_tolerance: float = 0.0
    seed: int = 0
    gap_check_period: int = 50
    label: str | None = None
    exact_full_batch: bool = False
    record_objective: bool = True
    record_surrogate: bool = False
    record_every: int | None = None

    def __post_init__(self):
        if isinstance(self.batch_schedule, dict):
            self.batch_schedule = BatchSchedule(**self.batch_schedule)
        if self.label is None:
            self.label = self.algorithm

    def validate(self) -> "RunConfig":
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm: unknown algorithm {self.algorithm!r}")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule: unknown step rule {self.step_rule!r}")
        if self.step_rule == "Harmonic" and self.algorithm != "FW":
            raise ValueError("step_rule: Harmonic steps are only defined for classic FW")
        if self.max_iterations < 0:
            raise ValueError("max_iterations: must be >= 0")
        if not self.time_budget > 0:
            raise ValueError("time_budget: must be positive")
        if self.gap_tolerance < 0:
            raise ValueError("gap_tolerance: must be >= 0")
        if self.gap_check_period < 1:
            raise ValueError("gap_check_period: must be >= 1")
        if self.record_every is not None and self.record_every < 1:
            raise ValueError("record_every: must be >= 1")
        return self

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["batch_schedule"] = self.batch_schedule.to_dict()
        if math.isinf(self.time_budget):
            out["time_budget"] = None
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"{sorted(unknown)[0]}: unknown RunConfig field")
        data = dict(data)
        if data.get("time_budget") is None:
            data.pop("time_budget", None)
        if "batch_schedule" in data and isinstance(data["batch_schedule"], dict):
            try:
                data["batch_schedule"] = BatchSchedule(**data["batch_schedule"])
            except TypeError as exc:
                raise ValueError(f"batch_schedule: {exc}") from None
        return cls(**data).validate()


@dataclass
class IterationRecord:
    k: int
    wall_seconds: float
    objective: float = math.nan
    step_kind: StepKind | None = None
    gamma: float = math.nan
    gamma_max: float = math.nan
    batch_size: int = 0
    cum_stoch_grads: int = 0
    active_set_size: int = 0
    duality_gap: float = math.nan
    g_dot_d: float = math.nan
    surrogate_before: float = math.nan
    surrogate_after: float = math.nan


@dataclass
class RunTrace:
    records: list[IterationRecord] = field(default_factory=list)
    status: str = MAX_ITERATIONS
    metadata: dict = field(default_factory=dict)
    final_point: np.ndarray | None = None
    final_representation: list | None = None

    @property
    def iterations(self) -> int:
        return self.records[-1].k if self.records else 0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def objectives(self) -> np.ndarray:
        return self.column("objective")

    @property
    def final_objective(self) -> float:
        return float(self.records[-1].objective)


# ---------------------------------------------------------------------------
# schedules and step sizes

def batch_size(schedule: BatchSchedule, k: int, n: int) -> int:
    """Number of sampled terms at iteration ``k >= 1``."""
    if k < 1:
        raise ValueError(f"iteration index must be >= 1, got {k}")
    if schedule.kind == "FullBatch":
        return int(n)
    try:
        if schedule.kind == "Theoretical":
            raw = (1.0 - schedule.rho) ** (-(2 * k + 2))
        else:
            raw = schedule.c0 + schedule.base**k
    except OverflowError:
        raise BatchSizeOverflow(f"batch size at iteration {k} overflows") from None
    if not math.isfinite(raw) or raw > MAX_BATCH:
        raise BatchSizeOverflow(f"batch size {raw:.3g} at iteration {k} exceeds 2^53")
    return int(math.ceil(raw))


def step_size(g, d, L_batch: float, gamma_max: float, rule: str = "Adaptive",
              curvature=None, k: int | None = None) -> float:
    """Step length along ``d``, clipped to ``[0, gamma_max]``.

    ``curvature`` must return ``d^T H d`` for the sampled objective when
    ``rule == "ExactLineSearch"``; ``k`` is the iteration for ``"Harmonic"``.
    """
    g = np.asarray(g, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    dd = float(d @ d)
    if dd == 0.0:
        raise ValueError("zero search direction")
    gd = float(g @ d)
    if rule == "Adaptive":
        if not L_batch > 0:
            raise ValueError("Lipschitz estimate must be positive")
        raw = -gd / (L_batch * dd)
    elif rule == "ExactLineSearch":
        if curvature is None:
            raise ValueError("ExactLineSearch needs a curvature callback")
        h = float(curvature(d))
        raw = -gd / h if h > 0 else math.inf
    elif rule == "Harmonic":
        if k is None:
            raise ValueError("Harmonic steps need the iteration index")
        raw = 2.0 / (k + 2.0)
    else:
        raise ValueError(f"unknown step rule {rule!r}")
    return min(max(raw, 0.0), gamma_max)


def theoretical_rho(obj: ObjectiveFamily, constants: GeometryConstants | None, N: int) -> float:
    """Contraction constant for the away-step schedule."""
    if constants is None:
        raise ValueError("geometry constants are required")
    return min(0.5, constants.omega**2 * obj.sigma_F / (16.0 * N**2 * obj.L_F * constants.diameter**2))


def theoretical_kappa(obj: ObjectiveFamily, constants: GeometryConstants | None, N: int) -> float:
    """Contraction constant for the pairwise schedule (8 in place of 16)."""
    if constants is None:
        raise ValueError("geometry constants are required")
    return min(0.5, constants.omega**2 * obj.sigma_F / (8.0 * N**2 * obj.L_F * constants.diameter**2))


def rho_from_values(omega, sigma_F, N, L_F, D, factor=16.0) -> float:
    return min(0.5, omega**2 * sigma_F / (factor * N**2 * L_F * D**2))


# ---------------------------------------------------------------------------
# per-iteration state

@dataclass
class RunState:
    rep: VertexRepresentation
    rng: np.random.Generator
    cum_grads: int = 0

    @property
    def x(self) -> np.ndarray:
        return self.rep.point


def _draw(state: RunState, obj: ObjectiveFamily, config: RunConfig, m: int) -> SampleBatch:
    if config.batch_schedule.kind == "FullBatch" or (config.exact_full_batch and m >= obj.n):
        return SampleBatch.full(obj.n)
    return sample_batch(state.rng, obj.n, m)


def _gamma(config, g, d, L, gmax, obj, batch, k):
    if config.step_rule == "ExactLineSearch":
        if batch is None:
            curv = obj.curvature
        else:
            curv = lambda v: obj.batch_curvature(v, batch)  # noqa: E731
        return step_size(g, d, L, gmax, "ExactLineSearch", curvature=curv)
    return step_size(g, d, L, gmax, config.step_rule, k=k)


def _apply(state, obj, config, k, tag, g, d, gamma, gmax, p_vtx, u_vtx, batch, m):
    """Update the representation and build the iteration record."""
    rep = state.rep
    x_before = rep.point.copy()
    p_was_active = p_vtx is not None and p_vtx.id in rep
    is_drop = is_swap = False
    if gamma > 0:
        if tag == AWAY and gamma >= gmax:
            gamma = gmax
        rep.update(tag, gamma, p_vtx, u_vtx)
        if tag in (AWAY, PAIRWISE) and u_vtx.id not in rep:
            gamma = gmax
            if tag == PAIRWISE and not p_was_active:
                is_swap = True
            else:
                is_drop = True
    rec = IterationRecord(
        k=k,
        wall_seconds=0.0,
        step_kind=StepKind(tag, is_drop, is_swap),
        gamma=float(gamma),
        gamma_max=float(gmax),
        batch_size=int(m),
        active_set_size=len(rep),
        g_dot_d=float(g @ d),
    )
    if config.record_surrogate:
        if batch is None:
            rec.surrogate_before = obj.value(x_before)
            rec.surrogate_after = obj.value(rep.point)
        else:
            rec.surrogate_before = obj.batch_value(x_before, batch)
            rec.surrogate_after = obj.batch_value(rep.point, batch)
    return rec


def _skip(state, k, tag, g, gmax, m):
    return IterationRecord(
        k=k, wall_seconds=0.0, step_kind=StepKind(tag), gamma=0.0, gamma_max=float(gmax),
        batch_size=int(m), active_set_size=len(state.rep), g_dot_d=0.0,
    )


def _away_choice(g, x, p_vtx, u_vtx, away_max):
    """Direction test shared by the away-step variants.

    ``away_max`` is the away step limit of ``u_vtx``; it is infinite when
    ``u_vtx`` is the only active vertex, in which case FW is forced.
    """
    if not np.isfinite(away_max) or float(g @ (p_vtx.coords + u_vtx.coords - 2.0 * x)) <= 0.0:
        return FRANK_WOLFE, p_vtx.coords - x, 1.0
    return AWAY, x - u_vtx.coords, away_max


def asfw_step(state: RunState, obj: ObjectiveFamily, poly: Polytope, config: RunConfig,
              k: int) -> IterationRecord:
    """One away-step stochastic FW iteration."""
    m = batch_size(config.batch_schedule, k, obj.n)
    batch = _draw(state, obj, config, m)
    state.cum_grads += batch.size
    g, L, _ = obj.batch_gradient(state.x, batch)
    p_vtx = poly.lmo(g)
    u_vtx, mu_u = state.rep.away_vertex(g)
    x = state.x
    tag, d, gmax = _away_choice(g, x, p_vtx, u_vtx, state.rep.away_limit(u_vtx.id))
    if not np.any(d):
        return _skip(state, k, tag, g, gmax, batch.size)
    gamma = _gamma(config, g, d, L, gmax, obj, batch, k)
    return _apply(state, obj, config, k, tag, g, d, gamma, gmax,
                  p_vtx if tag == FRANK_WOLFE else None,
                  u_vtx if tag == AWAY else None, batch, batch.size)


def psfw_step(state: RunState, obj: ObjectiveFamily, poly: Polytope, config: RunConfig,
              k: int) -> IterationRecord:
    """One pairwise stochastic FW iteration."""
    m = batch_size(config.batch_schedule, k, obj.n)
    batch = _draw(state, obj, config, m)
    state.cum_grads += batch.size
    g, L, _ = obj.batch_gradient(state.x, batch)
    p_vtx = poly.lmo(g)
    u_vtx, mu_u = state.rep.away_vertex(g)
    if p_vtx.id == u_vtx.id:
        return _skip(state, k, PAIRWISE, g, mu_u, batch.size)
    d = p_vtx.coords - u_vtx.coords
    gamma = _gamma(config, g, d, L, mu_u, obj, batch, k)
    return _apply(state, obj, config, k, PAIRWISE, g, d, gamma, mu_u, p_vtx, u_vtx,
                  batch, batch.size)


# -- deterministic baselines ------------------------------------------------

def _full_L(obj: ObjectiveFamily) -> float:
    # Lipschitz bound implied by the per-term decomposition, mean of L_i
    return float(obj.lip_terms.mean())


def fw_step(state, obj, poly, config, k):
    """Classic FW with the exact gradient."""
    g = obj.gradient(state.x)
    state.cum_grads += obj.n
    p_vtx = poly.lmo(g)
    d = p_vtx.coords - state.x
    if not np.any(d):
        return _skip(state, k, FRANK_WOLFE, g, 1.0, obj.n)
    gamma = _gamma(config, g, d, _full_L(obj), 1.0, obj, None, k)
    return _apply(state, obj, config, k, FRANK_WOLFE, g, d, gamma, 1.0, p_vtx, None, None, obj.n)


def afw_step(state, obj, poly, config, k):
    """Away-step FW with the exact gradient."""
    g = obj.gradient(state.x)
    state.cum_grads += obj.n
    x = state.x
    p_vtx = poly.lmo(g)
    u_vtx, mu_u = state.rep.away_vertex(g)
    forward = p_vtx.coords - x
    away = x - u_vtx.coords
    away_max = state.rep.away_limit(u_vtx.id)
    if np.isfinite(away_max) and g @ forward > g @ away:
        tag, d, gmax = AWAY, away, away_max
    else:
        tag, d, gmax = FRANK_WOLFE, forward, 1.0
    if not np.any(d):
        return _skip(state, k, tag, g, gmax, obj.n)
    gamma = _gamma(config, g, d, _full_L(obj), gmax, obj, None, k)
    return _apply(state, obj, config, k, tag, g, d, gamma, gmax,
                  p_vtx if tag == FRANK_WOLFE else None,
                  u_vtx if tag == AWAY else None, None, obj.n)


def pfw_step(state, obj, poly, config, k):
    """Pairwise FW with the exact gradient."""
    g = obj.gradient(state.x)
    state.cum_grads += obj.n
    p_vtx = poly.lmo(g)
    u_vtx, mu_u = state.rep.away_vertex(g)
    if p_vtx.id == u_vtx.id:
        return _skip(state, k, PAIRWISE, g, mu_u, obj.n)
    d = p_vtx.coords - u_vtx.coords
    gamma = _gamma(config, g, d, _full_L(obj), mu_u, obj, None, k)
    return _apply(state, obj, config, k, PAIRWISE, g, d, gamma, mu_u, p_vtx, u_vtx, None, obj.n)


STEPPERS = {
    "FW": fw_step,
    "AFW": afw_step,
    "PFW": pfw_step,
    "ASFW": asfw_step,
    "PSFW": psfw_step,
}


# ---------------------------------------------------------------------------
# drivers

def duality_gap(obj: ObjectiveFamily, poly: Polytope, x) -> float:
    """Exact FW gap ``max_v <grad F(x), x - v>``."""
    grad = obj.gradient(x)
    v = poly.lmo(grad)
    return float(grad @ (x - v.coords))


class _Monitor:
    """Objective/gap bookkeeping and stopping logic shared by all drivers."""

    def __init__(self, obj, poly, config, trace):
        self.obj, self.poly, self.config, self.trace = obj, poly, config, trace
        self.elapsed = 0.0
        self.last_gap_k = None

    def observe(self, rec: IterationRecord, x, cum_grads, force_gap=False) -> bool:
        """Fill monitoring fields, append, and return True when converged."""
        cfg = self.config
        rec.wall_seconds = self.elapsed
        rec.cum_stoch_grads = int(cum_grads)
        if cfg.record_objective:
            rec.objective = self.obj.value(x)
        converged = False
        if force_gap or rec.k % cfg.gap_check_period == 0:
            rec.duality_gap = duality_gap(self.obj, self.poly, x)
            converged = rec.duality_gap <= cfg.gap_tolerance
        self.trace.records.append(rec)
        return converged

    def out_of_time(self) -> bool:
        return self.elapsed >= self.config.time_budget


def _metadata(obj, poly, config, start):
    return {
        "algorithm": config.algorithm,
        "label": config.label,
        "config": config.to_dict(),
        "n": obj.n,
        "p": obj.p,
        "objective_kind": obj.kind,
        "objective_metadata": dict(obj.metadata),
        "polytope": poly.to_dict() if poly.p <= 64 or poly.kind != "ExplicitHRep" else {"kind": poly.kind},
        "start_vertex": _id_json(start.id),
        "timing": "monotonic wall clock of algorithm work, monitoring excluded",
    }


def _id_json(vid):
    if isinstance(vid, tuple):
        return [int(v) for v in vid]
    return int(vid)


def run(obj: ObjectiveFamily, poly: Polytope, config: RunConfig, start=None) -> RunTrace:
    """Run the configured algorithm from the smallest-id vertex of ``poly``."""
    config.validate()
    if obj.p != poly.p:
        raise ValueError(f"objective has p={obj.p} but polytope has p={poly.p}")
    if config.algorithm == "SVRF":
        return svrf_run(obj, poly, config, start)
    if config.algorithm == "ProxSVRG":
        return prox_svrg_run(obj, poly, config, start)
    start = poly.start_vertex() if start is None else start
    trace = RunTrace(metadata=_metadata(obj, poly, config, start))
    if config.algorithm in ("ASFW", "PSFW") and not obj.strongly_convex:
        logger.warning("objective terms are not strongly convex; linear rate is not guaranteed")
        trace.metadata["strong_convexity_warning"] = True
    state = RunState(VertexRepresentation(start), np.random.default_rng(config.seed))
    stepper = STEPPERS[config.algorithm]
    mon = _Monitor(obj, poly, config, trace)
    init = IterationRecord(k=0, wall_seconds=0.0, active_set_size=1)
    status = MAX_ITERATIONS
    if mon.observe(init, state.x, 0):
        status = GAP_CONVERGED
    else:
        for k in range(1, config.max_iterations + 1):
            t0 = time.perf_counter()
            try:
                rec = stepper(state, obj, poly, config, k)
            except BatchSizeOverflow as exc:
                status = BATCH_LIMIT
                trace.metadata["batch_limit"] = str(exc)
                logger.warning("stopping: %s", exc)
                break
            mon.elapsed += time.perf_counter() - t0
            if mon.observe(rec, state.x, state.cum_grads):
                status = GAP_CONVERGED
                break
            if mon.out_of_time():
                status = TIME_BUDGET
                break
    trace.status = status
    trace.final_point = state.x.copy()
    trace.final_representation = state.rep.snapshot()
    return trace


def svrf_run(obj: ObjectiveFamily, poly: Polytope, config: RunConfig, start=None) -> RunTrace:
    """Stochastic variance-reduced FW.

    Epoch ``t`` recomputes the exact gradient at the anchor and runs
    ``2^(t+3) - 2`` inner steps; inner step ``k`` uses ``96 (k + 1)`` samples
    and step length ``2 / (k + 1)``.  The anchor of the next epoch is the
    last inner iterate.
    """
    config.validate()
    start = poly.start_vertex() if start is None else start
    trace = RunTrace(metadata=_metadata(obj, poly, config, start))
    trace.metadata["svrf"] = {"epoch_length": "2^(t+3) - 2", "batch": "96(k+1)", "step": "2/(k+1)"}
    rng = np.random.default_rng(config.seed)
    x = start.coords.astype(np.float64).copy()
    mon = _Monitor(obj, poly, config, trace)
    cum = 0
    status = MAX_ITERATIONS
    if mon.observe(IterationRecord(k=0, wall_seconds=0.0), x, cum):
        status = GAP_CONVERGED
    it = 0
    t = 0
    done = status == GAP_CONVERGED or config.max_iterations == 0
    while not done:
        t += 1
        t0 = time.perf_counter()
        anchor = x.copy()
        anchor_grad = obj.gradient(anchor)
        cum += obj.n
        mon.elapsed += time.perf_counter() - t0
        for k in range(1, svrf_epoch_length(t) + 1):
            t0 = time.perf_counter()
            m = svrf_batch_size(k)
            batch = sample_batch(rng, obj.n, m)
            g = variance_reduced_gradient(obj, x, anchor, anchor_grad, batch)
            cum += 2 * m
            v = poly.lmo(g)
            gamma = 2.0 / (k + 1.0)
            d = v.coords - x
            x = x + gamma * d
            mon.elapsed += time.perf_counter() - t0
            it += 1
            rec = IterationRecord(k=it, wall_seconds=0.0, step_kind=StepKind(FRANK_WOLFE),
                                  gamma=gamma, gamma_max=1.0, batch_size=m, g_dot_d=float(g @ d))
            if mon.observe(rec, x, cum):
                status, done = GAP_CONVERGED, True
            elif it >= config.max_iterations:
                status, done = MAX_ITERATIONS, True
            elif mon.out_of_time():
                status, done = TIME_BUDGET, True
            if done:
                break
    trace.status = status
    trace.final_point = x
    return trace


def svrf_epoch_length(t: int) -> int:
    return 2 ** (t + 3) - 2


def svrf_batch_size(k: int) -> int:
    return 96 * (k + 1)


def variance_reduced_gradient(obj: ObjectiveFamily, x, anchor, anchor_grad, batch: SampleBatch):
    """``grad f_B(x) - grad f_B(anchor) + grad F(anchor)``.

    The objectives are quadratic, so the first two terms combine into one
    sampled Hessian-vector product.
    """
    diff = np.asarray(x, dtype=np.float64) - anchor
    if not np.any(diff):
        return np.array(anchor_grad, dtype=np.float64, copy=True)
    A = obj.A if batch.indices.size == obj.n else obj.A[batch.indices]
    w = batch.counts / batch.size
    return 2.0 * obj.row_scale * (A.T @ (w * (A @ diff))) + 2.0 * obj.ridge * diff + anchor_grad


def prox_svrg_run(obj: ObjectiveFamily, poly: Polytope, config: RunConfig, start=None) -> RunTrace:
    """Proximal SVRG with projection onto ``poly``.

    Epochs have ``2n`` single-sample steps of length ``0.1 / L`` where ``L``
    is the gradient Lipschitz constant of ``F`` (power iteration).  The next
    anchor is the average of the epoch's iterates.
    """
    config.validate()
    if not poly.has_projection:
        raise ValueError(f"Prox-SVRG needs a projection onto {poly.kind}")
    start = poly.start_vertex() if start is None else start
    trace = RunTrace(metadata=_metadata(obj, poly, config, start))
    L = obj.smoothness()
    eta = prox_svrg_step(L)
    epoch_len = prox_svrg_epoch_length(obj.n)
    every = config.record_every or max(1, obj.n // 10)
    trace.metadata["prox_svrg"] = {"L": L, "L_estimator": "power iteration, 100 steps",
                                   "step": eta, "epoch_length": epoch_len, "record_every": every}
    rng = np.random.default_rng(config.seed)
    A, b, s, c = obj.A, obj.b, obj.row_scale, obj.ridge
    x = start.coords.astype(np.float64).copy()
    mon = _Monitor(obj, poly, config, trace)
    cum = 0
    status = MAX_ITERATIONS
    if mon.observe(IterationRecord(k=0, wall_seconds=0.0), x, cum):
        status = GAP_CONVERGED
    it = 0
    done = status == GAP_CONVERGED or config.max_iterations == 0
    project = poly.project
    while not done:
        t0 = time.perf_counter()
        anchor = x.copy()
        anchor_grad = obj.gradient(anchor)
        cum += obj.n
        draws = rng.integers(0, obj.n, size=epoch_len)
        acc = np.zeros(obj.p)
        mon.elapsed += time.perf_counter() - t0
        for j in range(epoch_len):
            t0 = time.perf_counter()
            i = draws[j]
            diff = x - anchor
            a = A[i]
            v = (2.0 * s * (a @ diff)) * a + (2.0 * c) * diff + anchor_grad
            x = project(x - eta * v)
            acc += x
            cum += 2
            it += 1
            if j == epoch_len - 1:
                x = acc / epoch_len
            mon.elapsed += time.perf_counter() - t0
            if it % every == 0 or j == epoch_len - 1 or it >= config.max_iterations:
                rec = IterationRecord(k=it, wall_seconds=0.0, gamma=eta, batch_size=1)
                if mon.observe(rec, x, cum, force_gap=True):
                    status, done = GAP_CONVERGED, True
                elif mon.out_of_time():
                    status, done = TIME_BUDGET, True
            if not done and it >= config.max_iterations:
                status, done = MAX_ITERATIONS, True
            if done:
                break
    trace.status = status
    trace.final_point = x
    return trace


def prox_svrg_step(L: float) -> float:
    return 0.1 / L


def prox_svrg_epoch_length(n: int) -> int:
    return 2 * n


def reference_optimum(obj: ObjectiveFamily, poly: Polytope, gap_tolerance: float = 1e-10,
                      max_iterations: int = 200_000, config: RunConfig | None = None):
    """Reference optimal value from deterministic AFW with exact line search.

    Returns ``(f_star, trace)``.  The value is the smallest objective seen,
    which is the last one because exact line search is monotone.
    """
    if config is None:
        config = RunConfig(algorithm="AFW", step_rule="ExactLineSearch",
                           max_iterations=max_iterations, gap_tolerance=gap_tolerance,
                           gap_check_period=1, label="reference")
    trace = run(obj, poly, config)
    f_star = float(np.nanmin(trace.objectives))
    trace.metadata["f_star"] = f_star
    return f_star, trace


def config_replace(config: RunConfig, **changes) -> RunConfig:
    data = asdict(config)
    data["batch_schedule"] = config.batch_schedule
    data.update(changes)
    return RunConfig(**data)
