import random

import pytest

from endotrace.algebra import catalog, integers
from endotrace.classical import (block_sum, block_triangular, classical_endo,
                                 classical_frobenius, classical_verschiebung, ghost_via_traces,
                                 kronecker)
from endotrace.shadow import trace_sequence
from endotrace.witt import (WittError, ch, matrix_power_traces, truncate, witt_add,
                            witt_frobenius, witt_mul, witt_verschiebung)

from helpers import ints

BASES = [("cyclic", 6), ("cyclic", 4), ("group-algebra", 2, 2), ("integers",)]


def random_matrix(A, k, rng):
    return [[ints(A.random_element(rng, 4)) for _ in range(k)] for _ in range(k)]


@pytest.mark.parametrize("params", BASES)
def test_traces_through_shadows_match_matrix_powers(params):
    A = catalog(*params)
    rng = random.Random(str(params))
    for k in (1, 2, 3):
        f = random_matrix(A, k, rng)
        via_shadows = [ints(x) for x in ghost_via_traces(A, f, 4)]
        direct = [ints(x) for x in matrix_power_traces(A, f, 4)]
        assert via_shadows == direct


def test_classical_swap_traces():
    Z = integers()
    seq = trace_sequence(classical_endo(Z, [[0, 1], [1, 0]]), 4)
    assert [ints(g.matrix)[0][0] for g in seq] == [0, 2, 0, 2]


@pytest.mark.parametrize("params", BASES[:3])
def test_ch_is_additive_on_sums_and_extensions(params):
    A = catalog(*params)
    rng = random.Random(1)
    f, g = random_matrix(A, 2, rng), random_matrix(A, 1, rng)
    corner = [[ints(A.random_element(rng))] for _ in range(2)]
    total = witt_add(ch(A, f, 5), ch(A, g, 5))
    assert ch(A, block_sum(A, f, g), 5) == total
    assert ch(A, block_triangular(A, f, g, corner), 5) == total


@pytest.mark.parametrize("params", BASES[:3])
def test_ch_is_multiplicative_on_tensor_products(params):
    A = catalog(*params)
    rng = random.Random(2)
    f, g = random_matrix(A, 2, rng), random_matrix(A, 2, rng)
    assert ch(A, kronecker(A, f, g), 5) == witt_mul(ch(A, f, 5), ch(A, g, 5))


@pytest.mark.parametrize("n", [2, 3])
def test_ch_intertwines_frobenius_and_verschiebung(n):
    A = catalog("cyclic", 6)
    rng = random.Random(n)
    f = random_matrix(A, 2, rng)
    N = 6
    assert ch(A, classical_frobenius(A, f, n), N // n) == witt_frobenius(ch(A, f, N), n)
    assert ch(A, classical_verschiebung(A, f, n), N) == witt_verschiebung(ch(A, f, N), n)
    assert truncate(ch(A, f, N), 2) == ch(A, f, 2)


def test_verschiebung_block_shape():
    Z = integers()
    V = classical_verschiebung(Z, [[2]], 3)
    assert [[int(x[0]) for x in row] for row in V] == [[0, 2, 0], [0, 0, 1], [1, 0, 0]]


def test_noncommutative_base_rejected():
    with pytest.raises(WittError):
        classical_endo(catalog("matrix", 2, 2), [[[1, 0, 0, 1]]])
