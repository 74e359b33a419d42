import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starmeasure.errors import DomainError, MapRangeError
from starmeasure.measures import (
    StarMeasure,
    TestFunction,
    WeightFunction,
    dirac,
    distance,
    evaluate,
    from_support,
    hypograph,
    join,
    measure_from_hypograph,
    pushforward,
    quantize,
    read_csv,
    scale,
    support,
    sym_tensor_value,
    verify_measure_axioms,
    weakstar_dictionary,
    write_csv,
)
from starmeasure.spaces import FiniteSpace, GridSpace
from starmeasure.tnorms import TNorm

LINE = GridSpace([[0.0, 1.0]], [9])


def normal_values(n, q=16):
    return st.lists(st.integers(0, q), min_size=n, max_size=n).map(
        lambda ks: np.array([k / q for k in ks[:-1]] + [1.0])
    )


def brute_hypograph_hausdorff(space, u, v, q):
    """Hausdorff distance of the two level-q hypographs as explicit point sets."""
    D = space.distance_matrix()
    uq, vq = quantize(u, q), quantize(v, q)
    A = [(x, k) for x in range(space.size) for k in range(uq[x] + 1)]
    B = [(x, k) for x in range(space.size) for k in range(vq[x] + 1)]

    def directed(P, Q):
        return max(min(max(D[x, y], abs(k - j) / q) for y, j in Q) for x, k in P)

    return max(directed(A, B), directed(B, A))


def test_normality_enforced():
    with pytest.raises(DomainError):
        StarMeasure(LINE, np.full(9, 0.5))
    with pytest.raises(DomainError):
        WeightFunction(LINE, np.full(9, 1.5))
    with pytest.raises(DomainError):
        WeightFunction(LINE, np.ones(4))


def test_dirac_and_support():
    mu = dirac(LINE, 3)
    assert mu[3] == 1.0 and mu.values.sum() == 1.0
    assert support(from_support(LINE, [1, 5])).tolist() == [1, 5]
    with pytest.raises(DomainError):
        from_support(LINE, [])


@pytest.mark.parametrize("t", list(TNorm))
def test_evaluate_examples(t):
    mu = dirac(LINE, 2)
    phi = np.linspace(0, 1, 9)
    assert evaluate(mu, phi, t) == pytest.approx(phi[2])
    u = np.zeros(9)
    u[[0, 8]] = [1.0, 0.5]
    assert evaluate(StarMeasure(LINE, u), np.full(9, 0.3), t) == pytest.approx(0.3)


@pytest.mark.parametrize("t", list(TNorm))
def test_measure_axioms_on_lattice(t):
    worst = verify_measure_axioms(t, instances=200, n_points=4, q=256, seed=3)
    tol = 1e-12 if t is TNorm.PRODUCT else 0.0
    assert max(worst.values()) <= tol


@settings(max_examples=50, deadline=None)
@given(normal_values(9), normal_values(9), st.sampled_from(list(TNorm)))
def test_join_is_maxitive(u, v, t):
    mu, nu = StarMeasure(LINE, u), StarMeasure(LINE, v)
    phi = TestFunction(LINE, np.linspace(0.1, 0.9, 9))
    assert evaluate(join(mu, nu), phi, t) == max(evaluate(mu, phi, t), evaluate(nu, phi, t))


def test_scale():
    mu = StarMeasure(LINE, np.r_[np.zeros(8), 1.0])
    assert scale(1.0, mu, TNorm.PRODUCT) is mu
    s = scale(0.5, mu, TNorm.PRODUCT)
    assert not isinstance(s, StarMeasure) and s.values.max() == 0.5
    assert scale(0.5, mu, TNorm.LUKASIEWICZ).values.max() == 0.5
    with pytest.raises(DomainError):
        scale(1.5, mu, TNorm.MINIMUM)


def test_pushforward_takes_max_over_preimage():
    u = np.array([0.2, 1.0, 0.7, 0.0, 0.0, 0.0, 0.0, 0.0, 0.4])
    mu = StarMeasure(LINE, u)
    half = pushforward(lambda x: [LINE.coords[x][0] / 2], mu, LINE)
    # node 1 lands on the 0/1 midpoint and ties go down, so node 0 takes max(0.2, 1.0)
    assert isinstance(half, StarMeasure)
    assert half.values.max() == 1.0
    assert half[0] == 1.0 and half[1] == 0.7 and half[4] == 0.4
    with pytest.raises(MapRangeError):
        pushforward(lambda x: [LINE.coords[x][0] + 0.5], mu, LINE, map_index=0)


def test_sym_tensor_value():
    mu = StarMeasure(LINE, np.r_[0.5, 1.0, np.zeros(7)])
    assert sym_tensor_value(mu, TNorm.PRODUCT, (0, 0)) == 0.25
    assert sym_tensor_value(mu, TNorm.MINIMUM, (0, 1)) == 0.5
    assert sym_tensor_value(mu, TNorm.LUKASIEWICZ, (0, 0)) == 0.0


def test_hypograph_roundtrip_and_validity():
    u = np.array([0.0, 0.25, 1.0, 0.5, 0.75, 0, 0, 0, 0])
    H = hypograph(StarMeasure(LINE, u), 4)
    assert H.is_valid()
    assert measure_from_hypograph(LINE, H) == StarMeasure(LINE, u)
    broken = type(H)(H.points, H.q, H.pairs - {(2, 3)}, H.levels)
    assert "not saturated at (2, 4)" in " ".join(broken.violations())


def test_distance_modes():
    a, b = dirac(LINE, 0), dirac(LINE, 8)
    assert distance(a, b, "sup") == 1.0
    assert distance(a, b) == 1.0
    assert distance(a, a) == 0.0
    c = StarMeasure(LINE, np.r_[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5])
    assert distance(a, c, "hypograph-hausdorff", q=256) == pytest.approx(0.5)
    d = weakstar_dictionary(LINE, seed=0)
    assert distance(a, b, "weakstar", dictionary=d) == 1.0
    with pytest.raises(DomainError):
        distance(a, b, "weakstar")
    with pytest.raises(DomainError):
        distance(a, b, "l2")


@settings(max_examples=60, deadline=None)
@given(normal_values(9, q=8), normal_values(9, q=8), st.sampled_from([1, 4, 8, 16]))
def test_hypograph_distance_matches_brute_force(u, v, q):
    got = distance(StarMeasure(LINE, u), StarMeasure(LINE, v), "hypograph-hausdorff", q=q)
    assert got == pytest.approx(brute_hypograph_hausdorff(LINE, u, v, q), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(normal_values(5, q=8), normal_values(5, q=8))
def test_hypograph_distance_on_table_space(u, v):
    X = FiniteSpace.from_points(np.array([[0, 0], [1, 0], [0, 2], [3, 1], [2, 2]]) / 3.0)
    got = distance(StarMeasure(X, u), StarMeasure(X, v), q=8)
    assert got == pytest.approx(brute_hypograph_hausdorff(X, u, v, 8), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(normal_values(9, q=64), normal_values(9, q=64))
def test_hypograph_distance_bounded_by_sup(u, v):
    mu, nu = StarMeasure(LINE, u), StarMeasure(LINE, v)
    assert distance(mu, nu, q=256) <= distance(mu, nu, "sup") + 1 / 256


def test_csv_roundtrip(tmp_path):
    u = np.r_[1.0, 1 / 3, np.zeros(6), 0.1]
    mu = StarMeasure(LINE, u)
    text = write_csv(mu, tmp_path / "m.csv")
    assert text.splitlines()[0] == "point_index,value"
    assert read_csv(LINE, tmp_path / "m.csv") == mu
    assert read_csv(LINE, text) == mu
    with pytest.raises(DomainError):
        read_csv(LINE, "index,value\n0,1.0\n")
    with pytest.raises(OSError):
        read_csv(LINE, str(tmp_path / "missing.csv"))
