import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from endotrace.lattice import (FinAbGroup, cokernel, cokernel_of, diagonal_of, imat, matmul,
                               smith_normal_form, solve, torsion_relations)

from helpers import determinant_divisors, det_fraction, ints


def matrices(max_rows=5, max_cols=5, lo=-9, hi=9):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c),
                               min_size=r, max_size=r)))


def _check_snf(rows):
    A = imat(rows)
    U, D, V = smith_normal_form(A)
    assert ints(matmul(matmul(U, A), V)) == ints(D)
    assert abs(det_fraction(ints(U))) == 1
    assert abs(det_fraction(ints(V))) == 1
    d = diagonal_of(D)
    off = [int(D[i, j]) for i in range(D.shape[0]) for j in range(D.shape[1]) if i != j]
    assert not any(off)
    return d


def test_snf_diag_2_3():
    assert _check_snf([[2, 0], [0, 3]]) == [1, 6]


def test_snf_zero_and_one():
    assert _check_snf([[0, 0], [0, 0]]) == [0, 0]
    U, D, V = smith_normal_form([[1]])
    assert ints(U) == ints(D) == ints(V) == [[1]]


def test_snf_round_trip_500_random():
    rng = random.Random(2024)
    for _ in range(500):
        r, c = rng.randint(1, 8), rng.randint(1, 8)
        rows = [[rng.randint(-50, 50) for _ in range(c)] for _ in range(r)]
        d = _check_snf(rows)
        nz = [abs(x) for x in d if x]
        assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
        assert all(x == 0 for x in d[len(nz):])


def test_snf_large_intermediates_stay_exact():
    rows = [[10 ** 12 + 7, 3 * 10 ** 11], [5 * 10 ** 13, 10 ** 15 + 1]]
    d = _check_snf(rows)
    assert [abs(x) for x in d] == [abs(x) for x in determinant_divisors(rows)]


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_invariant_factors_match_determinant_divisors(rows):
    d = _check_snf(rows)
    assert [abs(x) for x in d] == determinant_divisors(rows)


def test_cokernel_examples():
    g, _ = cokernel([[4]])
    assert g.invariant_factors == (4,)
    g, _ = cokernel([[2, 0], [0, 3]])
    assert g.invariant_factors == (6,)
    g, _ = cokernel([], n=2)
    assert g.invariant_factors == (0, 0)


@settings(max_examples=100, deadline=None)
@given(matrices(4, 4, -6, 6), st.randoms(use_true_random=False))
def test_cokernel_round_trips(rows, rnd):
    A = imat(rows)
    g, pres = cokernel(A)
    n = A.shape[0]
    # to_normal kills the relations
    assert all(g.is_zero(matmul(pres.to_normal, A[:, [j]])[:, 0]) for j in range(A.shape[1]))
    # to_normal . from_normal = identity on the group
    for i in range(g.rank):
        e = np.zeros(g.rank, dtype=object)
        e[i] = 1
        back = matmul(pres.to_normal, matmul(pres.from_normal, e.reshape(-1, 1)))[:, 0]
        assert ints(g.reduce(back)) == ints(g.reduce(e))
    # from_normal . to_normal = identity modulo the relations
    v = [rnd.randint(-5, 5) for _ in range(n)]
    w = matmul(pres.from_normal, matmul(pres.to_normal, imat([v]).T))[:, 0]
    diff = [int(a) - int(b) for a, b in zip(w, v)]
    sol = solve(A, diff)
    assert sol.solvable


def test_cokernel_unit_elimination_matches_plain_snf():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(1, 6)
        rels = [[rng.choice([0, 0, 1, -1, 2, 3, 6]) for _ in range(n)]
                for _ in range(rng.randint(0, 7))]
        g, _ = cokernel_of(n, rels)
        if rels:
            A = [[rels[j][i] for j in range(len(rels))] for i in range(n)]
            d = [abs(x) for x in determinant_divisors(A)] + [0] * max(0, n - len(rels))
        else:
            d = [0] * n
        assert g.invariant_factors == tuple(x for x in sorted(d, key=lambda x: (x == 0, x))
                                            if x != 1)


def test_solve_parity_has_no_solution():
    assert not solve([[2]], [1], [0]).solvable


def test_solve_mod_4_matches_exhaustive_search():
    sol = solve([[2]], [0], [4])
    assert sol.solvable
    found = set()
    for coeffs in itertools.product(range(-3, 4), repeat=sol.lattice.shape[1]):
        x = int(sol.particular[0]) + sum(c * int(sol.lattice[0, j]) for j, c in enumerate(coeffs))
        found.add(x % 4)
    assert found == {x for x in range(4) if (2 * x) % 4 == 0} == {0, 2}


def test_solve_identity_returns_b():
    sol = solve([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [4, -7, 9])
    assert ints(sol.particular) == [4, -7, 9]
    assert sol.lattice.shape[1] == 0


@settings(max_examples=100, deadline=None)
@given(matrices(3, 4, -5, 5), st.lists(st.integers(-5, 5), min_size=3, max_size=3),
       st.lists(st.sampled_from([0, 2, 3, 4, 6]), min_size=3, max_size=3))
def test_solve_solutions_satisfy_system(rows, b, moduli):
    r = len(rows)
    b, moduli = b[:r], moduli[:r]
    sol = solve(rows, b, moduli)
    A = imat(rows)
    if sol.solvable:
        got = matmul(A, sol.particular.reshape(-1, 1))[:, 0]
        for i in range(r):
            diff = int(got[i]) - b[i]
            assert diff == 0 if moduli[i] == 0 else diff % moduli[i] == 0
    for j in range(sol.lattice.shape[1]):
        got = matmul(A, sol.lattice[:, [j]])[:, 0]
        for i in range(r):
            assert int(got[i]) == 0 if moduli[i] == 0 else int(got[i]) % moduli[i] == 0


def test_solve_unsolvable_agrees_with_brute_force():
    rng = random.Random(11)
    for _ in range(100):
        m = rng.choice([2, 4, 6])
        a = [[rng.randrange(m) for _ in range(2)] for _ in range(2)]
        b = [rng.randrange(m) for _ in range(2)]
        brute = any(all((a[i][0] * x + a[i][1] * y - b[i]) % m == 0 for i in range(2))
                    for x in range(m) for y in range(m))
        assert solve(a, b, [m, m]).solvable == brute


def test_fin_ab_group_invariants():
    assert FinAbGroup((2, 6, 0)).rank == 3
    for bad in [(3, 2), (1,), (0, 2), (-2,)]:
        with pytest.raises(ValueError):
            FinAbGroup(bad)
    g = FinAbGroup((2, 4))
    assert g.order == 8 and g.exponent == 4
    assert ints(g.reduce([5, -1])) == [1, 3]
    assert len(list(g.elements())) == 8
    assert torsion_relations((2, 0)) == [[2, 0]]
