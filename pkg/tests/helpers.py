"""Shared fixtures-as-functions for the test modules."""

import numpy as np

from stochfw.active_set import AWAY, FRANK_WOLFE, PAIRWISE, VertexRepresentation
from stochfw.polytope import contains
from stochfw.problems import elastic_net_ls


def random_walk(poly, steps, seed=0, check=None):
    """Apply ``steps`` random valid updates from the start vertex.

    About a fifth of away and pairwise steps use the full ``gamma_max`` so
    that drops and swaps are exercised.  ``check(rep)`` runs after each step.
    """
    rng = np.random.default_rng(seed)
    verts = poly.vertices()
    rep = VertexRepresentation(poly.start_vertex())
    for _ in range(steps):
        tag = (FRANK_WOLFE, AWAY, PAIRWISE)[rng.integers(3)]
        full = rng.random() < 0.2
        p_vtx = verts[rng.integers(len(verts))]
        active = list(rep.weights)
        u_vtx = rep.vertex(active[rng.integers(len(active))])
        mu = rep.weight(u_vtx.id)
        gmax = rep.away_limit(u_vtx.id)
        if tag == FRANK_WOLFE:
            rep.update(tag, rng.uniform(0, 1), p_vtx)
        elif tag == AWAY:
            if not np.isfinite(gmax):
                continue
            rep.update(tag, gmax if full else rng.uniform(0, gmax), None, u_vtx)
        else:
            rep.update(tag, mu if full else rng.uniform(0, mu), p_vtx, u_vtx)
        if check is not None:
            check(rep)
    return rep


def invariant_violations(rep, poly):
    """Names of the representation invariants that fail."""
    bad = []
    w = np.array(list(rep.weights.values()))
    if abs(w.sum() - 1.0) > 1e-9:
        bad.append("sum")
    if np.any(w <= 0):
        bad.append("positive")
    if np.linalg.norm(rep.point - rep.recompute_point()) > 1e-8:
        bad.append("cached_point")
    if not contains(poly, rep.point, 1e-8):
        bad.append("feasible")
    return bad


def simplex_quadratic(p=5, seed=0):
    """Small strongly convex quadratic whose simplex minimizer sits on a face."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3 * p, p))
    target = np.r_[rng.dirichlet(np.ones(p - 2)), -0.1, -0.05]
    b = A @ target + 0.01 * rng.standard_normal(3 * p)
    return elastic_net_ls(A, b, 0.05)
