"""Finite-sum least-squares objectives and data sources.

Both families share the per-term form

    f_i(x) = s * (a_i @ x - b_i)**2 + c * ||x||**2

so that ``F = mean_i f_i``.  For the ordered-box experiment ``s = n`` and
``c = 1/2`` (recovering ``||Ax - b||^2 + ||x||^2 / 2``); for the elastic net
``s = 1`` and ``c = mu``.  Each term is then ``2c``-strongly convex with a
``2 s ||a_i||^2 + 2c``-Lipschitz gradient.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .polytope import L1Ball, OrderedBox

logger = logging.getLogger(__name__)

ORDERED_LEAST_SQUARES = "OrderedLeastSquares"
ELASTIC_NET_LS = "ElasticNetLS"

# full-scale configuration of the simulated ordered-box experiment
FULL_SCALE_SYNTHETIC = {"n": 1_000_000, "p": 1000, "l": -1.0, "u": 1.0}


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """A multiset of term indices, stored as distinct indices with counts."""

    indices: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        if self.indices.shape != self.counts.shape or self.indices.size == 0:
            raise ValueError("a batch needs at least one index")

    @property
    def size(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_indices(cls, indices) -> "SampleBatch":
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise ValueError("empty batch")
        uniq, cnt = np.unique(idx, return_counts=True)
        return cls(uniq, cnt)

    @classmethod
    def full(cls, n: int) -> "SampleBatch":
        return cls(np.arange(n), np.ones(n, dtype=np.int64))


def sample_batch(rng: np.random.Generator, n: int, m: int) -> SampleBatch:
    """Draw ``m`` indices uniformly from ``range(n)`` with replacement.

    Large draws are taken as a multinomial count vector, which has the same
    distribution but costs O(n) instead of O(m).
    """
    if m < 1:
        raise ValueError(f"batch size must be >= 1, got {m}")
    if m < n:
        return SampleBatch.from_indices(rng.integers(0, n, size=m))
    counts = rng.multinomial(m, np.full(n, 1.0 / n))
    nz = np.flatnonzero(counts)
    return SampleBatch(nz, counts[nz])


@dataclass(eq=False)
class ObjectiveFamily:
    """Finite-sum quadratic ``F(x) = (1/n) sum_i f_i(x)``."""

    kind: str
    A: np.ndarray
    b: np.ndarray
    row_scale: float
    ridge: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = np.ascontiguousarray(self.A, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64).ravel()
        if self.A.ndim != 2 or self.A.shape[0] != self.b.shape[0]:
            raise ValueError(f"A {self.A.shape} and b {self.b.shape} are incompatible")
        if self.A.shape[0] < 1 or self.A.shape[1] < 1:
            raise ValueError("A must be non-empty")
        if self.ridge < 0:
            raise ValueError("ridge coefficient must be nonnegative")
        row_sq = np.einsum("ij,ij->i", self.A, self.A)
        self.sigma_terms = np.full(self.n, 2.0 * self.ridge)
        self.lip_terms = 2.0 * self.row_scale * row_sq + 2.0 * self.ridge
        self._full_L: float | None = None

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.A.shape[1]

    @property
    def sigma_F(self) -> float:
        return float(self.sigma_terms.min())

    @property
    def L_F(self) -> float:
        return float(self.lip_terms.max())

    @property
    def strongly_convex(self) -> bool:
        return self.sigma_F > 0

    def _x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.p,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.p},)")
        return x

    # -- exact quantities ---------------------------------------------------

    def value(self, x) -> float:
        x = self._x(x)
        r = self.A @ x - self.b
        return float(self.row_scale * (r @ r) / self.n + self.ridge * (x @ x))

    def term_values(self, x) -> np.ndarray:
        x = self._x(x)
        r = self.A @ x - self.b
        return self.row_scale * r * r + self.ridge * (x @ x)

    def gradient(self, x) -> np.ndarray:
        x = self._x(x)
        r = self.A @ x - self.b
        return (2.0 * self.row_scale / self.n) * (self.A.T @ r) + 2.0 * self.ridge * x

    def curvature(self, d) -> float:
        """``d^T H d`` for the (constant) Hessian ``H`` of ``F``."""
        d = self._x(d)
        Ad = self.A @ d
        return float(2.0 * self.row_scale * (Ad @ Ad) / self.n + 2.0 * self.ridge * (d @ d))

    def smoothness(self, iterations: int = 100, seed: int = 0) -> float:
        """Gradient Lipschitz constant of ``F`` by power iteration on A^T A."""
        if self._full_L is None:
            v = np.random.default_rng(seed).standard_normal(self.p)
            v /= np.linalg.norm(v)
            lam = 0.0
            for _ in range(iterations):
                w = self.A.T @ (self.A @ v)
                lam = float(np.linalg.norm(w))
                if lam == 0.0:
                    break
                v = w / lam
            self._full_L = 2.0 * self.row_scale * lam / self.n + 2.0 * self.ridge
        return self._full_L

    def unconstrained_minimizer(self) -> np.ndarray:
        H = (self.row_scale / self.n) * (self.A.T @ self.A) + self.ridge * np.eye(self.p)
        return np.linalg.solve(H, (self.row_scale / self.n) * (self.A.T @ self.b))

    # -- sampled quantities -------------------------------------------------

    def _rows(self, batch: SampleBatch):
        if batch.indices.size == self.n:
            return self.A, self.b
        if batch.indices.min() < 0 or batch.indices.max() >= self.n:
            raise ValueError("batch index out of range")
        return self.A[batch.indices], self.b[batch.indices]

    def batch_gradient(self, x, batch: SampleBatch):
        """Averaged gradient, Lipschitz and strong-convexity constants."""
        x = self._x(x)
        A, b = self._rows(batch)
        w = batch.counts / batch.size
        r = A @ x - b
        g = 2.0 * self.row_scale * (A.T @ (w * r)) + 2.0 * self.ridge * x
        L = float(w @ self.lip_terms[batch.indices])
        sigma = float(w @ self.sigma_terms[batch.indices])
        return g, L, sigma

    def batch_value(self, x, batch: SampleBatch) -> float:
        x = self._x(x)
        A, b = self._rows(batch)
        w = batch.counts / batch.size
        r = A @ x - b
        return float(self.row_scale * (w @ (r * r)) + self.ridge * (x @ x))

    def batch_curvature(self, d, batch: SampleBatch) -> float:
        d = self._x(d)
        A, _ = self._rows(batch)
        w = batch.counts / batch.size
        Ad = A @ d
        return float(2.0 * self.row_scale * (w @ (Ad * Ad)) + 2.0 * self.ridge * (d @ d))

    def term_gradients(self, x, indices) -> np.ndarray:
        """Rows are ``grad f_i(x)`` for the given indices."""
        x = self._x(x)
        idx = np.asarray(indices)
        r = self.A[idx] @ x - self.b[idx]
        return 2.0 * self.row_scale * r[:, None] * self.A[idx] + 2.0 * self.ridge * x


def ordered_least_squares(A, b) -> ObjectiveFamily:
    A = np.asarray(A, dtype=np.float64)
    return ObjectiveFamily(
        ORDERED_LEAST_SQUARES, A, b, row_scale=float(A.shape[0]), ridge=0.5,
        metadata={"decomposition": "f_i(x) = n (a_i x - b_i)^2 + ||x||^2 / 2"},
    )


def elastic_net_ls(A, b, mu: float) -> ObjectiveFamily:
    return ObjectiveFamily(
        ELASTIC_NET_LS, A, b, row_scale=1.0, ridge=float(mu),
        metadata={"decomposition": "f_i(x) = (a_i x - b_i)^2 + mu ||x||^2", "mu": float(mu)},
    )


# functional aliases
def evaluate(obj: ObjectiveFamily, x) -> float:
    return obj.value(x)


def full_gradient(obj: ObjectiveFamily, x) -> np.ndarray:
    return obj.gradient(x)


def stochastic_gradient(obj: ObjectiveFamily, x, batch: SampleBatch):
    return obj.batch_gradient(x, batch)


def generate_synthetic(n: int, p: int, l: float = -1.0, u: float = 1.0, seed: int = 0):
    """Random ordered-box least squares with standard normal ``A`` and ``b``.

    Returns ``(objective, polytope)``.
    """
    if n < 1 or p < 1:
        raise ValueError(f"n and p must be >= 1, got n={n}, p={p}")
    if not l < u:
        raise ValueError(f"need l < u, got l={l}, u={u}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, p))
    b = rng.standard_normal(n)
    obj = ordered_least_squares(A, b)
    obj.metadata.update(
        {"generator": "standard_normal", "n": n, "p": p, "l": l, "u": u, "seed": seed,
         "full_scale": dict(FULL_SCALE_SYNTHETIC)}
    )
    return obj, OrderedBox(l, u, p)


def load_csv_dataset(path, target_column: int = 0, standardize: bool = False,
                     skip_header: bool = False, max_rows: int | None = None):
    """Read a dense numeric CSV into ``(A, b, n, p)``.

    Column ``target_column`` becomes ``b``; the rest, in order, become ``A``.
    With ``standardize`` each feature column is centred and scaled to unit
    population variance (constant columns are only centred).
    """
    rows: list[list[float]] = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, rec in enumerate(reader, start=1):
            if skip_header and lineno == 1:
                continue
            if not rec or all(not c.strip() for c in rec):
                continue
            if width is None:
                width = len(rec)
                if not -width <= target_column < width or width < 2:
                    raise ValueError(f"target_column {target_column} invalid for {width} columns")
            elif len(rec) != width:
                raise ValueError(f"line {lineno}: expected {width} fields, got {len(rec)}")
            try:
                rows.append([float(c) for c in rec])
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric cell") from None
            if max_rows is not None and len(rows) >= max_rows:
                break
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows)
    tc = target_column % width
    b = data[:, tc].copy()
    A = np.delete(data, tc, axis=1)
    if standardize:
        A = A - A.mean(axis=0)
        std = A.std(axis=0)
        nz = std > 0
        A[:, nz] /= std[nz]
    return A, b, A.shape[0], A.shape[1]


def build_elastic_net(A, b, mu: float, alpha: float):
    """Elastic-net least squares paired with the l1-ball of radius ``alpha``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if mu < 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    obj = elastic_net_ls(A, b, mu)
    if mu == 0:
        obj.metadata["strong_convexity_warning"] = True
        logger.warning("mu = 0: the objective terms are not strongly convex")
    return obj, L1Ball(alpha, obj.p)


def synthetic_regression(n: int, p: int, seed: int = 0, noise: float = 1.0):
    """Dense regression data shaped like a real dataset, for offline use.

    Features are standard normal; the target is a sparse linear signal plus
    Gaussian noise.
    """
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, p))
    beta = np.zeros(p)
    k = max(1, p // 5)
    beta[rng.choice(p, size=k, replace=False)] = rng.standard_normal(k) * 3.0
    b = A @ beta + noise * rng.standard_normal(n)
    return A, b


def binding_alpha(obj: ObjectiveFamily, fraction: float = 0.5) -> float:
    """A radius strictly inside the l1 norm of the unconstrained minimizer."""
    radius = float(np.abs(obj.unconstrained_minimizer()).sum())
    if not math.isfinite(radius) or radius <= 0:
        raise ValueError("unconstrained minimizer is zero; no binding radius exists")
    return fraction * radius
