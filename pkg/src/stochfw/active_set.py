"""Active-vertex representation of Frank-Wolfe iterates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .polytope import Vertex

FRANK_WOLFE = "FrankWolfe"
AWAY = "Away"
PAIRWISE = "Pairwise"

DROP_THRESHOLD = 1e-12
RENORMALIZE_EVERY = 100


@dataclass(frozen=True)
class StepKind:
    tag: str
    is_drop: bool = False
    is_swap: bool = False

    def __post_init__(self):
        if self.tag not in (FRANK_WOLFE, AWAY, PAIRWISE):
            raise ValueError(f"unknown step tag {self.tag!r}")
        if self.is_swap and self.tag != PAIRWISE:
            raise ValueError("only pairwise steps can be swaps")


class VertexRepresentation:
    """Convex weights over active vertices, with the cached iterate.

    Vertices are keyed by canonical id.  Insertion order is kept, and ties in
    :meth:`away_vertex` go to the smallest id.
    """

    def __init__(self, vertex: Vertex):
        self.weights: dict = {vertex.id: 1.0}
        self._coords: dict = {vertex.id: vertex.coords.copy()}
        self.point = vertex.coords.astype(np.float64).copy()
        self.updates = 0

    def __len__(self) -> int:
        return len(self.weights)

    def __contains__(self, vid) -> bool:
        return vid in self.weights

    def copy(self) -> "VertexRepresentation":
        new = object.__new__(VertexRepresentation)
        new.weights = dict(self.weights)
        new._coords = dict(self._coords)
        new.point = self.point.copy()
        new.updates = self.updates
        return new

    def vertex(self, vid) -> Vertex:
        return Vertex(vid, self._coords[vid])

    def weight(self, vid) -> float:
        return self.weights.get(vid, 0.0)

    def recompute_point(self) -> np.ndarray:
        return sum(w * self._coords[v] for v, w in self.weights.items())

    def snapshot(self) -> list:
        return [[_jsonable(v), w] for v, w in self.weights.items()]

    def rest_weight(self, vid) -> float:
        """Total weight of the active vertices other than ``vid``."""
        return math.fsum(w for v, w in self.weights.items() if v != vid)

    def away_limit(self, vid) -> float:
        """Largest away step from ``vid``: ``mu / (1 - mu)``, inf for a singleton."""
        rest = self.rest_weight(vid)
        return self.weights[vid] / rest if rest > 0 else math.inf

    def away_vertex(self, g) -> tuple[Vertex, float]:
        """Active vertex maximizing ``<g, v>`` and its weight."""
        if not self.weights:
            raise ValueError("empty representation")
        g = np.asarray(g, dtype=np.float64)
        best_id, best_val = None, -np.inf
        for vid in self.weights:
            val = float(g @ self._coords[vid])
            if val > best_val or (val == best_val and vid < best_id):
                best_id, best_val = vid, val
        return self.vertex(best_id), self.weights[best_id]

    # -- updates ------------------------------------------------------------

    def update(self, tag: str, gamma: float, p_vtx: Vertex | None,
               u_vtx: Vertex | None = None) -> "VertexRepresentation":
        """Apply one step of length ``gamma`` in place.

        ``FrankWolfe`` moves toward ``p_vtx``, ``Away`` moves away from
        ``u_vtx`` and ``Pairwise`` shifts weight ``gamma`` from ``u_vtx`` to
        ``p_vtx``.
        """
        if not np.isfinite(gamma) or gamma < 0:
            raise ValueError(f"invalid step length {gamma}")
        if tag == FRANK_WOLFE:
            self._fw(gamma, p_vtx)
        elif tag == AWAY:
            self._away(gamma, self._active(u_vtx))
        elif tag == PAIRWISE:
            self._pairwise(gamma, p_vtx, self._active(u_vtx))
        else:
            raise ValueError(f"unknown step tag {tag!r}")
        self.updates += 1
        if self.updates % RENORMALIZE_EVERY == 0:
            self.renormalize()
        return self

    def _active(self, u_vtx):
        if u_vtx is None or u_vtx.id not in self.weights:
            raise ValueError("away vertex is not in the active set")
        return u_vtx

    def _fw(self, gamma, p_vtx):
        if gamma > 1.0 + 1e-12:
            raise ValueError(f"FW step length {gamma} exceeds 1")
        if gamma == 0.0:
            return
        if gamma >= 1.0:
            self.weights = {p_vtx.id: 1.0}
            self._coords = {p_vtx.id: p_vtx.coords.copy()}
            self.point = p_vtx.coords.astype(np.float64).copy()
            return
        for v in self.weights:
            self.weights[v] *= 1.0 - gamma
        self.weights[p_vtx.id] = self.weights.get(p_vtx.id, 0.0) + gamma
        self._coords.setdefault(p_vtx.id, p_vtx.coords.copy())
        self.point = (1.0 - gamma) * self.point + gamma * p_vtx.coords
        self._prune(keep=p_vtx.id)

    def _away(self, gamma, u_vtx):
        uid = u_vtx.id
        mu_u = self.weights[uid]
        rest = self.rest_weight(uid)
        if rest == 0.0:
            if gamma == 0.0:
                return
            raise ValueError("away step from the only active vertex")
        gmax = mu_u / rest
        if gamma > gmax * (1.0 + 1e-12):
            raise ValueError(f"away step length {gamma} exceeds {gmax}")
        if gamma >= gmax:
            # drop step: the others are rescaled by 1 / (1 - mu_u) exactly
            del self.weights[uid]
            del self._coords[uid]
            for v in self.weights:
                self.weights[v] /= rest
            self.point = (self.point - mu_u * u_vtx.coords) / rest
            self._prune()
            return
        for v in self.weights:
            if v != uid:
                self.weights[v] *= 1.0 + gamma
        # mu (1 + gamma) - gamma, written to avoid cancellation when mu is near 1
        self.weights[uid] = mu_u - gamma * rest
        self.point = (1.0 + gamma) * self.point - gamma * u_vtx.coords
        self._prune()

    def _pairwise(self, gamma, p_vtx, u_vtx):
        mu_u = self.weights[u_vtx.id]
        if gamma > mu_u * (1.0 + 1e-12):
            raise ValueError(f"pairwise step length {gamma} exceeds {mu_u}")
        if gamma == 0.0 or p_vtx.id == u_vtx.id:
            return
        self.weights[u_vtx.id] = mu_u - gamma
        self.weights[p_vtx.id] = self.weights.get(p_vtx.id, 0.0) + gamma
        self._coords.setdefault(p_vtx.id, p_vtx.coords.copy())
        self.point = self.point + gamma * (p_vtx.coords - u_vtx.coords)
        self._prune(keep=p_vtx.id)

    def _prune(self, keep=None):
        dead = [v for v, w in self.weights.items() if w <= DROP_THRESHOLD and v != keep]
        for v in dead:
            del self.weights[v]
            del self._coords[v]
        if len(self.weights) == 1:
            (v,) = self.weights
            self.weights[v] = 1.0
            self.point = self._coords[v].astype(np.float64).copy()

    def renormalize(self):
        total = sum(self.weights.values())
        for v in self.weights:
            self.weights[v] /= total
        self.point = self.recompute_point()


def away_vertex(rep: VertexRepresentation, g) -> tuple[Vertex, float]:
    return rep.away_vertex(g)


def vru_update(rep: VertexRepresentation, step: StepKind | str, gamma: float,
               p_vtx: Vertex | None, u_vtx: Vertex | None = None) -> VertexRepresentation:
    tag = step.tag if isinstance(step, StepKind) else step
    return rep.update(tag, gamma, p_vtx, u_vtx)


def _jsonable(vid):
    if isinstance(vid, tuple):
        return [_jsonable(v) for v in vid]
    if isinstance(vid, np.integer):
        return int(vid)
    return vid
