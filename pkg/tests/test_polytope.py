import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochfw.polytope import (
    ExplicitHRep,
    L1Ball,
    OrderedBox,
    Simplex,
    contains,
    diameter,
    enumerate_vertices,
    isotonic_regression,
    lmo,
    omega_constant,
    polytope_from_dict,
    project_l1,
    project_ordered_box,
)

floats = st.floats(-1e3, 1e3, allow_nan=False)


def _coords(vs):
    return sorted(tuple(v.coords.tolist()) for v in vs)


# -- lmo ----------------------------------------------------------------------

def test_lmo_examples():
    v = lmo(L1Ball(1.0, 3), [3.0, -1.0, 2.0])
    np.testing.assert_array_equal(v.coords, [-1.0, 0.0, 0.0])
    # id (i, s) stands for s * alpha * e_i
    assert v.id == (0, -1)

    box = OrderedBox(-1.0, 1.0, 3)
    g = np.array([1.0, -2.0, 1.0])
    v = lmo(box, g)
    np.testing.assert_array_equal(v.coords, [-1.0, 1.0, 1.0])
    assert g @ v.coords == -2.0

    np.testing.assert_array_equal(lmo(Simplex(3), [0.5, -0.2, 0.1]).coords, [0.0, 1.0, 0.0])
    np.testing.assert_array_equal(lmo(L1Ball(2.0, 2), [0.0, 0.0]).coords, [-2.0, 0.0])


def test_lmo_ties_take_smallest_id():
    assert lmo(Simplex(4), [1.0, 0.0, 0.0, 0.0]).id == 1
    assert lmo(OrderedBox(0.0, 1.0, 3), np.zeros(3)).id == 0
    # |g_0| == |g_1|: index 0 wins, and the sign is taken from g_0
    assert lmo(L1Ball(1.0, 2), [-1.0, 1.0]).id == (0, 1)


@pytest.mark.parametrize("poly", [
    OrderedBox(-1.0, 1.0, 7), OrderedBox(0.5, 2.0, 12), L1Ball(1.5, 12), Simplex(9),
    ExplicitHRep(np.vstack([np.eye(3), -np.eye(3), [[1.0, 1.0, 1.0]]]), np.r_[np.ones(3), np.zeros(3), 2.0]),
])
def test_lmo_matches_vertex_scan(poly):
    V = [v.coords for v in enumerate_vertices(poly)]
    rng = np.random.default_rng(11)
    for _ in range(200):
        g = rng.standard_normal(poly.p)
        assert g @ lmo(poly, g).coords == min(g @ v for v in V)


@given(st.lists(floats, min_size=4, max_size=4))
def test_lmo_output_is_feasible_vertex(g):
    for poly in (OrderedBox(-1.0, 1.0, 4), L1Ball(2.0, 4), Simplex(4)):
        v = lmo(poly, g)
        assert contains(poly, v.coords, 1e-12)
        np.testing.assert_array_equal(poly.vertex(v.id).coords, v.coords)


def test_lmo_rejects_bad_gradient():
    with pytest.raises(ValueError):
        lmo(Simplex(3), [1.0, 2.0])
    with pytest.raises(ValueError):
        lmo(Simplex(2), [np.nan, 0.0])


# -- membership, vertices, diameter -------------------------------------------

def test_contains_examples():
    box = OrderedBox(-1.0, 1.0, 3)
    assert contains(box, [-1.0, 0.0, 1.0], 0.0)
    assert not contains(box, [0.0, -0.5, 1.0], 0.0)
    assert contains(L1Ball(1.0, 2), [0.5, 0.5], 0.0)
    assert not contains(L1Ball(1.0, 2), [0.5, 0.6], 0.0)
    assert contains(L1Ball(1.0, 2), [0.5, 0.6], 0.2)


def test_vertex_enumeration_examples():
    assert _coords(enumerate_vertices(OrderedBox(-1.0, 1.0, 2))) == sorted([(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0)])
    assert _coords(enumerate_vertices(Simplex(2))) == [(0.0, 1.0), (1.0, 0.0)]
    assert _coords(enumerate_vertices(L1Ball(1.0, 2))) == sorted([(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)])


def test_explicit_hrep_recovers_builtin_vertices():
    for poly in (OrderedBox(-1.0, 2.0, 4), Simplex(4), L1Ball(1.0, 3)):
        C, d = poly.hrep()
        assert _coords(enumerate_vertices(ExplicitHRep(C, d))) == pytest.approx(_coords(poly.vertices()))


def test_diameter_examples():
    assert diameter(L1Ball(1.0, 2)) == 2.0
    assert diameter(OrderedBox(-1.0, 1.0, 2)) == pytest.approx(2 * math.sqrt(2), abs=1e-15)
    assert diameter(Simplex(3)) == pytest.approx(math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("poly", [OrderedBox(-1.0, 3.0, 6), L1Ball(0.7, 5), Simplex(5)])
def test_diameter_matches_pairwise_scan(poly):
    V = np.array([v.coords for v in enumerate_vertices(poly)])
    brute = max(np.linalg.norm(a - b) for a in V for b in V)
    assert diameter(poly) == pytest.approx(brute, rel=1e-14)


def test_explicit_hrep_errors():
    with pytest.raises(ValueError, match="unbounded"):
        ExplicitHRep(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError, match="empty"):
        ExplicitHRep(np.array([[1.0], [-1.0]]), np.array([0.0, -1.0]))
    with pytest.raises(ValueError):
        ExplicitHRep(np.zeros((1, 16)), np.zeros(1))


# -- geometry constant --------------------------------------------------------

def test_omega_unit_square():
    C = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    g = omega_constant(ExplicitHRep(C, np.array([1.0, 1.0, 0.0, 0.0])))
    assert (g.zeta, g.phi, g.omega) == (1.0, 1.0, 1.0)


def test_omega_interval():
    g = omega_constant(OrderedBox(-1.0, 1.0, 1))
    assert (g.zeta, g.phi, g.omega) == (2.0, 1.0, 2.0)


def test_omega_simplex2_regression():
    # Rows -x1<=0, -x2<=0, x1+x2<=1, -x1-x2<=-1.  At e_1 only -x2<=0 is slack (by 1);
    # the largest row norm is sqrt(2).
    g = omega_constant(Simplex(2))
    assert g.zeta == 1.0
    assert g.phi == pytest.approx(math.sqrt(2), abs=1e-15)
    assert g.omega == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_omega_l1_ball_by_hand():
    # rows (+-1, +-1) . x <= 1; at e_1 the two rows with first sign -1 are slack by 2
    g = omega_constant(L1Ball(1.0, 2))
    assert g.zeta == 2.0 and g.omega == pytest.approx(math.sqrt(2), abs=1e-15)


# -- projections --------------------------------------------------------------

def _l1_oracle(x, alpha):
    """Threshold found by grid search then bisection on sum(max(|x|-t, 0)) = alpha."""
    a = np.abs(x)
    if a.sum() <= alpha:
        return x.copy(), 0.0
    h = lambda t: np.maximum(a - t, 0.0).sum() - alpha  # noqa: E731
    grid = np.linspace(0.0, a.max(), 2001)
    vals = np.array([h(t) for t in grid])
    j = np.flatnonzero(vals <= 0)[0]
    lo, hi = grid[j - 1], grid[j]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if h(mid) > 0 else (lo, mid)
    t = 0.5 * (lo + hi)
    return np.sign(x) * np.maximum(a - t, 0.0), t


def test_project_l1_examples():
    np.testing.assert_array_equal(project_l1([0.5, 0.5], 1.0), [0.5, 0.5])
    np.testing.assert_array_equal(project_l1([2.0, 0.0], 1.0), [1.0, 0.0])
    np.testing.assert_allclose(project_l1([1.0, 1.0], 1.0), [0.5, 0.5], atol=1e-15)


def test_project_l1_matches_threshold_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        p = int(rng.integers(1, 40))
        x = rng.standard_normal(p) * rng.uniform(0.1, 10)
        alpha = rng.uniform(0.05, 5)
        y = project_l1(x, alpha)
        ref, theta = _l1_oracle(x, alpha)
        worst = max(worst, np.abs(y - ref).max())
        # KKT: x - y = theta * s with s in the subdifferential of ||.||_1 at y
        if theta > 0:
            r = x - y
            on = y != 0
            assert np.allclose(r[on], theta * np.sign(y[on]), atol=1e-9)
            assert np.all(np.abs(r[~on]) <= theta + 1e-9)
    assert worst <= 1e-8


@settings(max_examples=50)
@given(st.lists(floats, min_size=1, max_size=12), st.floats(0.01, 100))
def test_project_l1_properties(x, alpha):
    y = project_l1(x, alpha)
    assert np.abs(y).sum() <= alpha * (1 + 1e-12) + 1e-12
    np.testing.assert_allclose(project_l1(y, alpha), y, rtol=1e-12, atol=1e-12)


def test_isotonic_regression_examples():
    np.testing.assert_allclose(isotonic_regression([3.0, 1.0, 2.0]), [2.0, 2.0, 2.0])
    np.testing.assert_allclose(isotonic_regression([1.0, 3.0, 2.0, 4.0]), [1.0, 2.5, 2.5, 4.0])
    np.testing.assert_array_equal(isotonic_regression([]), [])


def test_ordered_box_projection_matches_qp():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 11))
        l, u = sorted(rng.uniform(-2, 2, size=2))
        y0 = rng.standard_normal(p) * 2
        x = cp.Variable(p)
        cons = [x[0] >= l, x[p - 1] <= u] + [x[i] <= x[i + 1] for i in range(p - 1)]
        cp.Problem(cp.Minimize(cp.sum_squares(x - y0)), cons).solve(
            solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
        worst = max(worst, np.abs(project_ordered_box(y0, l, u) - x.value).max())
    assert worst <= 1e-6


@settings(max_examples=50)
@given(st.lists(floats, min_size=1, max_size=10))
def test_ordered_box_projection_feasible_and_idempotent(y):
    box = OrderedBox(-1.0, 1.0, len(y))
    z = box.project(y)
    assert contains(box, z, 1e-12)
    np.testing.assert_array_equal(box.project(z), z)


# -- serialization ------------------------------------------------------------

@pytest.mark.parametrize("poly", [OrderedBox(-1.0, 1.0, 3), L1Ball(2.0, 4), Simplex(5)])
def test_dict_round_trip(poly):
    again = polytope_from_dict(poly.to_dict())
    assert again.to_dict() == poly.to_dict()
    assert _coords(again.vertices()) == _coords(poly.vertices())


def test_constructor_validation():
    with pytest.raises(ValueError):
        OrderedBox(1.0, -1.0, 3)
    with pytest.raises(ValueError):
        L1Ball(0.0, 3)
    with pytest.raises(ValueError):
        Simplex(0)
