"""Polytopes with exact linear minimization oracles.

Four constraint families are supported: the ordered box
``l <= x_1 <= ... <= x_p <= u``, the l1-ball, the probability simplex and a
small explicit H-representation ``{x : Cx <= d}``.  Each exposes an exact
LMO, a membership test, vertex enumeration and (where cheap) a Euclidean
projection.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Hashable

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import pdist

HREP_MAX_DIM = 15


@dataclass(frozen=True, eq=False)
class Vertex:
    """An extreme point together with its canonical identifier."""

    id: Hashable
    coords: np.ndarray

    def __repr__(self) -> str:
        return f"Vertex(id={self.id!r}, coords={np.array2string(self.coords, precision=4)})"


@dataclass(frozen=True)
class GeometryConstants:
    omega: float
    zeta: float
    phi: float
    diameter: float
    num_vertices: int


def _check_vector(x, p: int, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p,):
        raise ValueError(f"{name} has shape {x.shape}, expected ({p},)")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def _sign(v: float) -> int:
    return -1 if v < 0 else 1


class Polytope:
    """Base class. Subclasses implement the oracle for one family."""

    kind: str = ""
    p: int

    def lmo(self, g) -> Vertex:
        raise NotImplementedError

    def contains(self, x, tol: float = 0.0) -> bool:
        raise NotImplementedError

    def vertex(self, vid) -> Vertex:
        """Materialize the vertex with canonical id ``vid``."""
        raise NotImplementedError

    def vertex_ids(self) -> list:
        raise NotImplementedError

    def vertices(self) -> list[Vertex]:
        return [self.vertex(v) for v in self.vertex_ids()]

    def start_vertex(self) -> Vertex:
        """Vertex with the smallest canonical id, used as the common start."""
        return self.lmo(np.zeros(self.p))

    def diameter(self) -> float:
        pts = np.array([v.coords for v in self.vertices()])
        if len(pts) < 2:
            return 0.0
        return float(pdist(pts).max())

    def hrep(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        raise NotImplementedError(f"no Euclidean projection for {self.kind}")

    @property
    def has_projection(self) -> bool:
        return False

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class OrderedBox(Polytope):
    """The chain ``l <= x_1 <= x_2 <= ... <= x_p <= u``.

    Vertex ``j`` (``j = 0..p``) has its first ``j`` coordinates at ``l`` and
    the remaining ones at ``u``.
    """

    l: float
    u: float
    p: int
    kind: str = field(default="OrderedBox", init=False)

    def __post_init__(self):
        if not (np.isfinite(self.l) and np.isfinite(self.u)) or not self.l < self.u:
            raise ValueError(f"OrderedBox needs finite l < u, got l={self.l}, u={self.u}")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")

    def lmo(self, g) -> Vertex:
        g = _check_vector(g, self.p, "g")
        # <g, v_j> = u*sum(g) + (l - u)*S_j with S_j the j-th prefix sum,
        # so the minimizer maximizes S_j; argmax returns the first (smallest j).
        prefix = np.concatenate(([0.0], np.cumsum(g)))
        return self.vertex(int(np.argmax(prefix)))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _check_vector(x, self.p)
        return bool(
            x[0] >= self.l - tol
            and x[-1] <= self.u + tol
            and np.all(np.diff(x) >= -tol)
        )

    def vertex(self, vid) -> Vertex:
        j = int(vid)
        if not 0 <= j <= self.p:
            raise ValueError(f"invalid OrderedBox vertex id {vid!r}")
        coords = np.full(self.p, float(self.u))
        coords[:j] = self.l
        return Vertex(j, coords)

    def vertex_ids(self) -> list:
        return list(range(self.p + 1))

    def diameter(self) -> float:
        # |v_i - v_j| = (u - l) sqrt(|i - j|), maximal between v_0 and v_p
        return float((self.u - self.l) * np.sqrt(self.p))

    def hrep(self):
        p = self.p
        C = np.zeros((p + 1, p))
        d = np.zeros(p + 1)
        C[0, 0] = -1.0
        d[0] = -self.l
        for i in range(p - 1):
            C[i + 1, i] = 1.0
            C[i + 1, i + 1] = -1.0
        C[p, p - 1] = 1.0
        d[p] = self.u
        return C, d

    @property
    def has_projection(self) -> bool:
        return True

    def project(self, x) -> np.ndarray:
        return project_ordered_box(x, self.l, self.u)

    def to_dict(self):
        return {"kind": self.kind, "l": float(self.l), "u": float(self.u), "p": int(self.p)}


@dataclass(frozen=True, eq=False)
class L1Ball(Polytope):
    """``{x : ||x||_1 <= alpha}``.

    Vertex ids are pairs ``(i, s)`` with ``s`` in ``{-1, +1}`` standing for
    ``s * alpha * e_i``.  Ids order lexicographically, so for a zero gradient
    the LMO returns ``-alpha * e_0``.
    """

    alpha: float
    p: int
    kind: str = field(default="L1Ball", init=False)

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")

    def lmo(self, g) -> Vertex:
        g = _check_vector(g, self.p, "g")
        i = int(np.argmax(np.abs(g)))
        return self.vertex((i, -_sign(g[i])))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _check_vector(x, self.p)
        return bool(np.abs(x).sum() <= self.alpha + tol)

    def vertex(self, vid) -> Vertex:
        i, s = vid
        i, s = int(i), int(s)
        if not 0 <= i < self.p or s not in (-1, 1):
            raise ValueError(f"invalid L1Ball vertex id {vid!r}")
        coords = np.zeros(self.p)
        coords[i] = s * self.alpha
        return Vertex((i, s), coords)

    def vertex_ids(self) -> list:
        return [(i, s) for i in range(self.p) for s in (-1, 1)]

    def hrep(self):
        if self.p > HREP_MAX_DIM:
            raise ValueError(f"L1Ball H-representation needs 2^p rows; p={self.p} exceeds {HREP_MAX_DIM}")
        C = np.array(list(itertools.product((-1.0, 1.0), repeat=self.p)))
        return C, np.full(len(C), float(self.alpha))

    @property
    def has_projection(self) -> bool:
        return True

    def project(self, x) -> np.ndarray:
        return project_l1(x, self.alpha)

    def to_dict(self):
        return {"kind": self.kind, "alpha": float(self.alpha), "p": int(self.p)}


@dataclass(frozen=True, eq=False)
class Simplex(Polytope):
    """Probability simplex in R^p; vertex ``i`` is ``e_i``."""

    p: int
    kind: str = field(default="Simplex", init=False)

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")

    def lmo(self, g) -> Vertex:
        g = _check_vector(g, self.p, "g")
        return self.vertex(int(np.argmin(g)))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _check_vector(x, self.p)
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)

    def vertex(self, vid) -> Vertex:
        i = int(vid)
        if not 0 <= i < self.p:
            raise ValueError(f"invalid Simplex vertex id {vid!r}")
        coords = np.zeros(self.p)
        coords[i] = 1.0
        return Vertex(i, coords)

    def vertex_ids(self) -> list:
        return list(range(self.p))

    def hrep(self):
        p = self.p
        # equality sum(x) = 1 as a pair of opposing inequalities
        C = np.vstack([-np.eye(p), np.ones((1, p)), -np.ones((1, p))])
        d = np.concatenate([np.zeros(p), [1.0, -1.0]])
        return C, d

    def to_dict(self):
        return {"kind": self.kind, "p": int(self.p)}


class ExplicitHRep(Polytope):
    """Bounded polytope ``{x : Cx <= d}`` with ``p <= 15``.

    Vertices are found once at construction by enumerating basic solutions;
    the LMO then scans them.
    """

    kind = "ExplicitHRep"

    def __init__(self, C, d, tol: float = 1e-9):
        C = np.atleast_2d(np.asarray(C, dtype=np.float64))
        d = np.asarray(d, dtype=np.float64).ravel()
        if C.shape[0] != d.shape[0]:
            raise ValueError(f"C has {C.shape[0]} rows but d has {d.shape[0]} entries")
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(d))):
            raise ValueError("C and d must be finite")
        self.C, self.d, self.tol = C, d, tol
        self.p = C.shape[1]
        if self.p > HREP_MAX_DIM:
            raise ValueError(f"explicit H-representations are limited to p <= {HREP_MAX_DIM}, got {self.p}")
        if _has_recession_direction(C):
            raise ValueError("polyhedron {x : Cx <= d} is unbounded")
        self._vertices = _enumerate_basic_solutions(C, d, tol)
        if not self._vertices:
            raise ValueError("polyhedron {x : Cx <= d} is empty")
        self._matrix = np.array(self._vertices)

    def lmo(self, g) -> Vertex:
        g = _check_vector(g, self.p, "g")
        return self.vertex(int(np.argmin(self._matrix @ g)))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _check_vector(x, self.p)
        return bool(np.all(self.C @ x <= self.d + tol))

    def vertex(self, vid) -> Vertex:
        i = int(vid)
        if not 0 <= i < len(self._vertices):
            raise ValueError(f"invalid vertex id {vid!r}")
        return Vertex(i, self._vertices[i].copy())

    def vertex_ids(self) -> list:
        return list(range(len(self._vertices)))

    def hrep(self):
        return self.C.copy(), self.d.copy()

    def to_dict(self):
        return {"kind": self.kind, "C": self.C.tolist(), "d": self.d.tolist()}


def _has_recession_direction(C: np.ndarray) -> bool:
    # bounded iff {y : Cy <= 0} = {0}; probe each coordinate direction
    p = C.shape[1]
    zeros = np.zeros(C.shape[0])
    for i in range(p):
        for s in (-1.0, 1.0):
            c = np.zeros(p)
            c[i] = -s
            res = linprog(c, A_ub=C, b_ub=zeros, bounds=[(-1, 1)] * p, method="highs")
            if res.status == 0 and -res.fun > 1e-9:
                return True
    return False


def _enumerate_basic_solutions(C, d, tol) -> list[np.ndarray]:
    m, p = C.shape
    found: list[np.ndarray] = []
    keys = set()
    scale = max(1.0, float(np.abs(d).max(initial=0.0)))
    for rows in itertools.combinations(range(m), p):
        sub = C[list(rows)]
        if np.linalg.matrix_rank(sub) < p:
            continue
        x = np.linalg.solve(sub, d[list(rows)])
        if np.all(C @ x <= d + tol * scale):
            key = tuple(np.round(x / (tol * scale)).astype(np.int64))
            if key not in keys:
                keys.add(key)
                found.append(x)
    return found


# ---------------------------------------------------------------------------
# module-level operations

def lmo(poly: Polytope, g) -> Vertex:
    return poly.lmo(g)


def contains(poly: Polytope, x, tol: float = 0.0) -> bool:
    return poly.contains(x, tol)


def enumerate_vertices(poly: Polytope) -> list[Vertex]:
    return poly.vertices()


def diameter(poly: Polytope) -> float:
    return poly.diameter()


def omega_constant(poly: Polytope, slack_tol: float = 1e-9) -> GeometryConstants:
    """Geometry constant ``Omega = zeta / phi`` of a small polytope.

    ``zeta`` is the smallest strictly positive slack ``d_i - C_i v`` over all
    vertices ``v`` and rows ``i``; ``phi`` is the largest row norm taken over
    all rows of the H-representation.
    """
    if poly.p > HREP_MAX_DIM:
        raise ValueError(f"omega_constant is limited to p <= {HREP_MAX_DIM}, got {poly.p}")
    C, d = poly.hrep()
    V = np.array([v.coords for v in poly.vertices()])
    slack = d[None, :] - V @ C.T
    positive = slack[slack > slack_tol * max(1.0, float(np.abs(d).max()))]
    if positive.size == 0:
        raise ValueError("no strictly slack (vertex, row) pair; zeta is undefined")
    zeta = float(positive.min())
    phi = float(np.linalg.norm(C, axis=1).max())
    return GeometryConstants(
        omega=zeta / phi,
        zeta=zeta,
        phi=phi,
        diameter=poly.diameter(),
        num_vertices=len(V),
    )


# ---------------------------------------------------------------------------
# projections

def project_l1(x, alpha: float) -> np.ndarray:
    """Euclidean projection onto the l1-ball of radius ``alpha``.

    Sort-based soft thresholding, O(p log p).
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("x contains non-finite entries")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    a = np.abs(x)
    if a.sum() <= alpha:
        return x.copy()
    srt = np.sort(a)[::-1]
    css = np.cumsum(srt)
    k = np.arange(1, len(srt) + 1)
    # largest k with srt[k-1] > (css[k-1] - alpha)/k
    rho = np.nonzero(srt * k > css - alpha)[0][-1]
    theta = (css[rho] - alpha) / (rho + 1.0)
    return np.sign(x) * np.maximum(a - theta, 0.0)


def isotonic_regression(y) -> np.ndarray:
    """Least-squares non-decreasing fit by pool-adjacent-violators."""
    y = np.asarray(y, dtype=np.float64)
    sums: list[float] = []
    counts: list[int] = []
    for v in y:
        sums.append(float(v))
        counts.append(1)
        while len(sums) > 1 and sums[-2] * counts[-1] > sums[-1] * counts[-2]:
            s, c = sums.pop(), counts.pop()
            sums[-1] += s
            counts[-1] += c
    return np.repeat(np.array(sums) / np.array(counts), counts)


def project_ordered_box(y, l: float, u: float) -> np.ndarray:
    """Projection onto ``{l <= x_1 <= ... <= x_p <= u}``.

    Clipping the isotonic fit to ``[l, u]`` keeps it monotone and satisfies
    the KKT conditions of the chain-plus-box problem, so it is exact.
    """
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite entries")
    return np.clip(isotonic_regression(y), l, u)


# ---------------------------------------------------------------------------
# serialization

def polytope_from_dict(params: dict) -> Polytope:
    kind = params.get("kind")
    try:
        if kind == "OrderedBox":
            return OrderedBox(float(params["l"]), float(params["u"]), int(params["p"]))
        if kind == "L1Ball":
            return L1Ball(float(params["alpha"]), int(params["p"]))
        if kind == "Simplex":
            return Simplex(int(params["p"]))
        if kind == "ExplicitHRep":
            return ExplicitHRep(params["C"], params["d"])
    except KeyError as exc:
        raise ValueError(f"polytope description for {kind} is missing field {exc.args[0]!r}") from None
    raise ValueError(f"unknown polytope kind {kind!r}")
