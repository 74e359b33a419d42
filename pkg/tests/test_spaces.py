import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starmeasure.errors import DomainError, GroupError, MapRangeError
from starmeasure.spaces import (
    FiniteSpace,
    GridSpace,
    PermGroup,
    SymPowerSpace,
    hausdorff,
    orbit_rep,
    power_distance,
    project_HG,
    snap,
    sym_distance,
)


def random_space(rng, n):
    pts = rng.random((n, 2))
    return FiniteSpace.from_points(pts)


def test_finite_space_validation():
    with pytest.raises(DomainError):
        FiniteSpace([[0, 1], [2, 0]])
    with pytest.raises(DomainError):
        FiniteSpace([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(DomainError):
        FiniteSpace([[0, 0], [0, 0]])
    X = FiniteSpace([[0, 1], [1, 0]])
    assert X.diameter() == 1.0 and X.cell() == 1.0
    with pytest.raises(DomainError):
        X.distance(0, 2)


def test_grid_basics():
    g = GridSpace([[0, 1], [0, 2]], [5, 3])
    assert g.size == 15
    assert g.coordinates(g.size - 1).tolist() == [1.0, 2.0]
    assert g.distance(0, g.size - 1) == 2.0
    assert g.diameter() == 2.0
    assert g.cell() == 1.0
    assert g.index_of([0.25, 1.0]) == 1 * 3 + 1
    e = GridSpace([[0, 3], [0, 4]], [2, 2], metric="euclidean")
    assert e.diameter() == 5.0
    with pytest.raises(DomainError):
        GridSpace([[0, 1]], [1])


def test_snap_ties_and_range():
    g = GridSpace([[0.0, 1.0]], [5])
    assert snap(g, [0.125]) == 0  # exact midpoint goes to the lower node
    assert snap(g, [0.126]) == 1
    assert snap(g, [1.0 + 5e-10]) == 4
    with pytest.raises(MapRangeError) as err:
        snap(g, [1.01], map_index=2, source=(3,))
    assert err.value.map_index == 2


def test_grid_matches_finite_table():
    g = GridSpace([[0, 1], [0, 1]], [4, 3])
    table = FiniteSpace.from_points(g.coords)
    assert np.allclose(g.distance_matrix(), table.table)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31))
def test_metric_axioms_finite(n, seed):
    X = random_space(np.random.default_rng(seed), n)
    D = X.table
    assert np.all(D == D.T)
    assert np.all(D[:, None, :] <= D[:, :, None] + D[None, :, :] + 1e-12)


def test_group_constructors():
    assert PermGroup.symmetric(3).order == 6
    assert PermGroup.cyclic(4).order == 4
    assert PermGroup.trivial(3).is_trivial()
    g = PermGroup.generated(3, [[2, 1, 3]], one_based=True)
    assert g.order == 2
    assert g.issubgroup(PermGroup.symmetric(3))
    assert PermGroup.generated(4, [[1, 2, 3, 0], [1, 0, 2, 3]]) == PermGroup.symmetric(4)
    with pytest.raises(GroupError):
        PermGroup.generated(2, [[1, 2, 3]], one_based=True)
    with pytest.raises(GroupError):
        PermGroup.symmetric(7)
    with pytest.raises(GroupError):
        PermGroup(3, [(0, 1, 2), (1, 2, 0)])


def test_orbit_rep():
    assert orbit_rep(PermGroup.symmetric(3), (2, 0, 1)) == (0, 1, 2)
    assert orbit_rep(PermGroup.cyclic(3), (2, 0, 1)) == (0, 1, 2)
    assert orbit_rep(PermGroup.cyclic(3), (1, 0, 2)) == (0, 2, 1)
    assert orbit_rep(PermGroup.trivial(3), (2, 0, 1)) == (2, 0, 1)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("kind", ["trivial", "symmetric", "cyclic"])
def test_sym_distance_is_a_metric_exhaustive(m, kind):
    g = GridSpace([[0.0, 1.0]], [4])
    sym = SymPowerSpace(g, m, getattr(PermGroup, kind)(m))
    pts = sym.points()
    D = np.array([[sym_distance(sym, a, b) for b in pts] for a in pts])
    assert np.all(np.diag(D) == 0)
    off = D[~np.eye(len(pts), dtype=bool)]
    assert off.size == 0 or off.min() > 0
    assert np.array_equal(D, D.T)
    assert np.all(D[:, None, :] <= D[:, :, None] + D[None, :, :] + 1e-12)


def test_sym_distance_examples():
    g = GridSpace([[0.0, 1.0]], [5])
    s2 = SymPowerSpace(g, 2, PermGroup.symmetric(2))
    e = SymPowerSpace(g, 2, PermGroup.trivial(2))
    assert sym_distance(s2, (0, 4), (4, 0)) == 0.0
    assert sym_distance(e, (0, 4), (4, 0)) == 1.0
    assert power_distance(g, 2, (0, 4), (1, 4)) == 0.25
    assert len(s2.points()) == math.comb(6, 2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=3, max_size=3), st.lists(st.integers(0, 4), min_size=3, max_size=3))
def test_projection_is_nonexpanding(a, b):
    g = GridSpace([[0.0, 1.0]], [5])
    H, G = PermGroup.cyclic(3), PermGroup.symmetric(3)
    sh, sg = SymPowerSpace(g, 3, H), SymPowerSpace(g, 3, G)
    a, b = orbit_rep(H, a), orbit_rep(H, b)
    assert sym_distance(sg, project_HG(H, G, a), project_HG(H, G, b)) <= sym_distance(sh, a, b)


def test_project_requires_subgroup():
    H = PermGroup.generated(3, [[1, 0, 2]])
    with pytest.raises(GroupError):
        project_HG(PermGroup.cyclic(3), H, (0, 1, 2))


def test_hausdorff():
    g = GridSpace([[0.0, 1.0]], [5])
    assert hausdorff(g, [0, 1], [0, 1]) == 0.0
    assert hausdorff(g, [0], [0, 4]) == 1.0
    X = FiniteSpace([[0, 2], [2, 0]])
    assert hausdorff(X, [0], [1]) == 2.0
    with pytest.raises(DomainError):
        hausdorff(g, [], [1])


def test_product_space():
    X = FiniteSpace([[0, 1], [1, 0]])
    Y = FiniteSpace([[0, 3], [3, 0]])
    P = X.product(Y)
    assert P.size == 4
    assert P.distance(0, 3) == 3.0  # (0,0) to (1,1)
    assert P.distance(0, 2) == 1.0  # (0,0) to (1,0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31))
def test_equal_projection_sets_are_close(seed):
    # sets over X x Y with the same Y-shadow sit within diam(X) of each other
    rng = np.random.default_rng(seed)
    X, Y = random_space(rng, 3), random_space(rng, 4)
    P = X.product(Y)
    ys = rng.choice(4, size=rng.integers(1, 5), replace=False)
    A = [int(rng.integers(3)) * 4 + y for y in ys] + [int(rng.integers(3)) * 4 + int(rng.choice(ys))]
    B = [int(rng.integers(3)) * 4 + y for y in ys]
    assert hausdorff(P, A, B) <= X.diameter()
