from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from starmeasure.errors import DomainError, GroupError, SizeCapError
from starmeasure.oracle import (
    LevelAlgebra,
    QuantizedMeasure,
    check_isomorphism,
    check_monad_laws,
    check_projection_compat,
    check_tensor,
    eta_bar,
    hypograph_of,
    monadic_tensor,
    pointwise_tensor,
    run_suite,
    zeta_bar,
)
from starmeasure.spaces import PermGroup
from starmeasure.tnorms import TNorm

MIN2 = LevelAlgebra.lattice(TNorm.MINIMUM, 2)
LUK4 = LevelAlgebra.lattice(TNorm.LUKASIEWICZ, 4)


def test_level_algebra():
    assert LUK4.op(3, 2) == 1 and LUK4.op(1, 2) == 0
    assert MIN2.op(1, 2) == 1
    prod = LevelAlgebra.rational(TNorm.PRODUCT, 2)
    assert prod.op(Fraction(1, 2), Fraction(1, 2)) == Fraction(1, 4)
    with pytest.raises(DomainError):
        LevelAlgebra.lattice(TNorm.PRODUCT, 2)


def test_eta_and_flatten_of_unit():
    X = (0, 1)
    d0 = eta_bar(X, 0, MIN2)
    assert d0.is_valid() and d0.top() == {0: 2, 1: 0}
    # flattening the Dirac at a hypograph returns it
    A = hypograph_of(X, (2, 1), MIN2)
    assert zeta_bar(eta_bar((A,), A, MIN2), MIN2).pairs == A.pairs


def test_flatten_scales_by_meta_level():
    X = (0, 1)
    A = hypograph_of(X, (4, 2), LUK4)
    B = hypograph_of(X, (0, 4), LUK4)
    meta = hypograph_of((A, B), (4, 3), LUK4)
    flat = zeta_bar(meta, LUK4)
    # point 1 gets max(2 * 4, 4 * 3) = max(2, 3) under Lukasiewicz on L_4
    assert flat.top() == {0: 4, 1: 3}


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(0, 4), min_size=1, max_size=3),
    st.lists(st.integers(0, 4), min_size=1, max_size=3),
    st.sampled_from([TNorm.MINIMUM, TNorm.LUKASIEWICZ]),
)
def test_tensor_matches_pointwise(u, v, t):
    alg = LevelAlgebra.lattice(t, 4)
    u[0], v[-1] = 4, 4
    mu = QuantizedMeasure(tuple(range(len(u))), tuple(u), alg)
    nu = QuantizedMeasure(tuple(f"y{i}" for i in range(len(v))), tuple(v), alg)
    assert monadic_tensor(mu, nu).as_dict() == pointwise_tensor(mu, nu).as_dict()


def test_oracle_detects_a_wrong_formula():
    # negative control: the pointwise min formula is wrong for Lukasiewicz
    mu = QuantizedMeasure((0, 1), (4, 2), LUK4)
    nu = QuantizedMeasure(("a",), (4,), LUK4)
    mu_min = QuantizedMeasure((0, 1), (4, 2), LevelAlgebra.lattice(TNorm.MINIMUM, 4))
    nu_min = QuantizedMeasure(("a",), (4,), LevelAlgebra.lattice(TNorm.MINIMUM, 4))
    assert monadic_tensor(mu, nu).as_dict() == pointwise_tensor(mu_min, nu_min).as_dict()
    nu2 = QuantizedMeasure(("a", "b"), (4, 3), LUK4)
    nu2_min = QuantizedMeasure(("a", "b"), (4, 3), LevelAlgebra.lattice(TNorm.MINIMUM, 4))
    assert monadic_tensor(mu, nu2).as_dict() != pointwise_tensor(mu_min, nu2_min).as_dict()


@pytest.mark.parametrize("t", [TNorm.MINIMUM, TNorm.LUKASIEWICZ])
def test_small_families(t):
    assert check_tensor(2, 2, t).ok
    assert check_isomorphism(2, 2, t).ok
    assert check_projection_compat(2, 2, PermGroup.trivial(2), PermGroup.symmetric(2), 2, t).ok
    rep = check_monad_laws(2, 1, t)
    assert rep.ok and rep.instances > 10


def test_product_tensor_in_rationals():
    rep = check_tensor(2, 2, TNorm.PRODUCT)
    assert rep.ok and rep.params["tnorm"] == "product"


def test_caps_and_group_errors():
    with pytest.raises(SizeCapError):
        check_tensor(5, 2, TNorm.MINIMUM)
    with pytest.raises(SizeCapError):
        check_monad_laws(4, 2, TNorm.MINIMUM)
    with pytest.raises(GroupError):
        check_projection_compat(2, 3, PermGroup.cyclic(3), PermGroup.generated(3, [[1, 0, 2]]), 1, TNorm.MINIMUM)
    with pytest.raises(DomainError):
        run_suite("everything")


def test_run_suite_projection():
    reports = run_suite("projection")
    assert len(reports) == 3 and all(r.ok for r in reports)
    assert reports[-1].params["m"] == 3


def test_flatten_one_point_example():
    X = (0,)
    A = hypograph_of(X, (1,), MIN2)  # levels {0, 1/2}
    B = hypograph_of(X, (2,), MIN2)  # levels {0, 1/2, 1}
    meta = hypograph_of((A, B), (1, 2), MIN2)
    flat = zeta_bar(meta, MIN2)
    assert flat.is_valid() and flat.top() == {0: 2}


def test_tensor_of_diracs_and_full():
    X, Y = (0, 1, 2), ("a", "b")
    dx = QuantizedMeasure(X, (0, 2, 0), MIN2)
    dy = QuantizedMeasure(Y, (2, 0), MIN2)
    t = monadic_tensor(dx, dy).as_dict()
    assert t[(1, "a")] == 2 and sum(t.values()) == 2
    mu = QuantizedMeasure(X, (2, 1, 0), MIN2)
    full = QuantizedMeasure(Y, (2, 2), MIN2)
    t = monadic_tensor(mu, full).as_dict()
    assert all(t[(x, y)] == mu.values[x] for x in X for y in Y)


def test_degenerate_laws_and_s3_projection():
    assert check_monad_laws(1, 1, TNorm.MINIMUM).ok
    rep = check_projection_compat(2, 3, PermGroup.trivial(3), PermGroup.symmetric(3), 1, TNorm.MINIMUM)
    assert rep.ok and rep.instances > 0
    S2 = PermGroup.symmetric(2)
    assert check_projection_compat(2, 2, S2, S2, 2, TNorm.LUKASIEWICZ).ok
