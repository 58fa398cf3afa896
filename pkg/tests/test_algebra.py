import itertools
import json

import numpy as np
import pytest

from endotrace.algebra import (AlgebraError, FinAlgebra, catalog, group_power_automorphism,
                               inner_automorphism, integers, is_automorphism, is_commutative,
                               make_algebra, opposite)

from helpers import ints

CATALOG = [("cyclic", 6), ("cyclic", 0), ("matrix", 2, 5), ("matrix", 2, 3),
           ("group-algebra", 4, 2), ("group-algebra", 2, 3), ("upper-triangular", 4),
           ("integers",)]


def matrix_units(k=2, m=5, broken=None):
    n = k * k
    mul = [[[0] * n for _ in range(n)] for _ in range(n)]
    for a, b, c in itertools.product(range(k), repeat=3):
        mul[a * k + b][b * k + c][a * k + c] = 1
    if broken:
        i, j = broken
        mul[i][j] = [0] * n
    one = [1 if i // k == i % k else 0 for i in range(n)]
    return make_algebra([m] * n, mul, one)


def test_cyclic_six_is_commutative():
    R = make_algebra([6], [[[1]]], [1])
    assert R.is_commutative()
    assert ints(R.multiply([5], [5])) == [1]


def test_matrix_units_valid_and_noncommutative():
    R = matrix_units()
    assert not is_commutative(R)
    E12, E21 = R.basis(1), R.basis(2)
    assert ints(R.multiply(E12, E21)) != ints(R.multiply(E21, E12))


def test_broken_matrix_units_rejected():
    # E12 E21 = 0 breaks (E11 E12) E21 = E11 (E12 E21)
    with pytest.raises(AlgebraError, match="not associative"):
        matrix_units(broken=(1, 2))


def test_bad_unit_and_ill_defined_constants():
    with pytest.raises(AlgebraError, match="unit law fails"):
        make_algebra([6], [[[1]]], [2])
    with pytest.raises(AlgebraError, match="ill-defined"):
        # b0 has order 2 but b0*b0 = b1 of order 4 is not killed by 2
        make_algebra([2, 4], [[[0, 1], [0, 0]], [[0, 0], [0, 0]]], [0, 0])


def test_group_algebra_commutative_by_exhaustive_pairs():
    R = catalog("group-algebra", 4, 2)
    for i, j in itertools.product(range(R.rank), repeat=2):
        assert ints(R.multiply(R.basis(i), R.basis(j))) == ints(R.multiply(R.basis(j), R.basis(i)))
    assert is_commutative(R)


def test_catalog_shapes():
    assert catalog("cyclic", 6).factors == (6,)
    M = catalog("matrix", 2, 3)
    assert M.rank == 4 and M.factors == (3, 3, 3, 3)
    assert catalog("group-algebra", 2, 3).rank == 3
    assert catalog("upper-triangular", 5).rank == 3
    assert catalog("integers") == integers() == catalog("integers-truncated")
    assert integers().factors == (0,)


def test_catalog_errors():
    with pytest.raises(AlgebraError, match="unknown"):
        catalog("quaternions", 3)
    with pytest.raises(AlgebraError):
        catalog("cyclic", 2, 3)
    with pytest.raises(AlgebraError):
        catalog("cyclic", -4)


@pytest.mark.parametrize("params", CATALOG)
def test_catalog_rings_validate_and_round_trip(params):
    R = catalog(*params)
    data = json.loads(json.dumps(R.to_json()))
    S = FinAlgebra.from_json(data)
    assert S == R
    assert json.dumps(S.to_json()) == json.dumps(R.to_json())


@pytest.mark.parametrize("params", CATALOG)
def test_opposite_is_an_involution(params):
    R = catalog(*params)
    Rop = opposite(R)
    assert opposite(Rop) == R
    assert (Rop == R) == R.is_commutative()


def test_inverse_and_automorphisms():
    R = catalog("matrix", 2, 3)
    u = R.reduce([1, 1, 0, 1])          # [[1,1],[0,1]]
    inv = R.inverse(u)
    assert ints(R.multiply(u, inv)) == ints(R.reduce(R.one))
    A = inner_automorphism(R, u)
    assert is_automorphism(R, A)
    G = catalog("group-algebra", 3, 3)
    assert is_automorphism(G, group_power_automorphism(G, 3, 2))
    assert not is_automorphism(G, np.zeros((3, 3), dtype=object))
    assert R.inverse(R.zero()) is None
