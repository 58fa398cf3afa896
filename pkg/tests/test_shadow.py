import itertools
import random

import pytest

from endotrace import shadow as sh
from endotrace.algebra import catalog, group_power_automorphism, inner_automorphism, integers
from endotrace.bimodule import direct_sum, power, ring_bimodule, twisted_ring
from endotrace.dualizable import (duality, free_presentation, generic_duality, make_presentation,
                                  random_presentation)
from endotrace.endo import (Context, TwistedEndo, endo_from_carrier_map, frobenius, make_endo,
                            random_endo, untwisted, verschiebung)
from endotrace.shadow import (ShadowError, b_map, forget_quotient, is_equivariant, shadow,
                              theta, trace, trace_forget_left, trace_sequence, transfer,
                              varsigma, varsigma_power, verschiebung_trace_sequence)

from helpers import ints

Z = integers()
ZZ = untwisted(Z, Z)


def scalars(seq):
    return [ints(g.matrix)[0][0] for g in seq]


def commutator_quotient_order(M) -> int:
    """|M| / |span of r m - m r| by enumerating the subgroup."""
    R = M.left_ring
    gens = []
    for u in range(R.rank):
        for j in range(M.rank):
            b = [int(i == j) for i in range(M.rank)]
            d = [int(x) - int(y) for x, y in zip(M.act_left(R.basis(u), b), M.act_right(b, R.basis(u)))]
            gens.append(tuple(ints(M.reduce(d))))
    seen = {tuple([0] * M.rank)}
    frontier = list(seen)
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = tuple(ints(M.reduce([a + b for a, b in zip(x, g)])))
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    total = 1
    for d in M.factors:
        total *= d
    return total // len(seen)


def test_shadow_of_matrix_ring_is_its_trace():
    S = catalog("matrix", 2, 5)
    sS = shadow(ring_bimodule(S))
    assert sS.group.invariant_factors == (5,)
    # the class of a matrix only depends on its trace
    rng = random.Random(0)
    by_trace = {}
    for _ in range(40):
        x = ints(S.random_element(rng))
        t = (x[0] + x[3]) % 5
        cls = tuple(ints(sS.project(x)))
        assert by_trace.setdefault(t, cls) == cls
    assert len(set(by_trace.values())) == len(by_trace)


@pytest.mark.parametrize("make", [
    lambda: ring_bimodule(catalog("group-algebra", 3, 2)),
    lambda: twisted_ring(catalog("group-algebra", 2, 3),
                         group_power_automorphism(catalog("group-algebra", 2, 3), 3, 2)),
    lambda: twisted_ring(catalog("matrix", 2, 3),
                         inner_automorphism(catalog("matrix", 2, 3), [1, 1, 0, 1])),
    lambda: ring_bimodule(catalog("upper-triangular", 4)),
])
def test_shadow_order_matches_enumeration(make):
    M = make()
    g = shadow(M).group
    assert g.order == commutator_quotient_order(M)


def test_shadow_needs_matching_rings():
    from endotrace.dualizable import materialize
    P = materialize(make_presentation(Z, catalog("cyclic", 4), 1, [[[1]]], [[[[1]]]]))
    with pytest.raises(ShadowError, match="ring mismatch"):
        shadow(P)


def test_theta_twice_is_identity():
    R = catalog("matrix", 2, 3)
    U = ring_bimodule(R)
    X = direct_sum(U, U).module
    Y = twisted_ring(R, inner_automorphism(R, [1, 1, 0, 1]))
    loop = theta(Y, X) @ theta(X, Y)
    assert loop == loop.source.identity()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_varsigma_has_order_n(n):
    R = catalog("cyclic", 4)
    M = direct_sum(ring_bimodule(R), ring_bimodule(R)).module
    v = varsigma(M, n)
    assert v.power(n) == v.source.identity()
    assert varsigma_power(M, n, -1) @ v == v.source.identity()


def test_varsigma_is_nontrivial_on_a_sum():
    R = catalog("cyclic", 3)
    M = direct_sum(ring_bimodule(R), ring_bimodule(R)).module
    v = varsigma(M, 2)
    assert v != v.source.identity()
    assert v.power(2) == v.source.identity()


def test_iterated_traces_of_two_and_of_swap():
    two = make_endo(ZZ, 1, free_presentation(Z, 1), [[2]])
    assert scalars(trace_sequence(two, 4)) == [2, 4, 8, 16]
    swap = endo_from_carrier_map(ZZ, free_presentation(Z, 2), [[[0], [1]], [[1], [0]]])
    assert scalars(trace_sequence(swap, 4)) == [0, 2, 0, 2]
    with pytest.raises(ShadowError):
        trace_sequence(two, 0)


def test_trace_of_identity_on_corner_is_its_rank():
    S = catalog("matrix", 2, 3)
    e = [[[1, 0, 0, 0]]]
    pp = make_presentation(catalog("cyclic", 3), S, 1, e, [e])
    f = endo_from_carrier_map(untwisted(catalog("cyclic", 3), S), pp, [[[1, 0, 0, 0]]])
    tr = trace(f)
    sS = shadow(ring_bimodule(S))
    one = shadow(ring_bimodule(catalog("cyclic", 3))).project([1])
    assert ints(sS.group.reduce(tr.matrix @ one)) == ints(sS.project([1, 0, 0, 0]))


def test_trace_independent_of_duality_data():
    S = catalog("upper-triangular", 3)
    rng = random.Random(6)
    for _ in range(4):
        D = duality(random_presentation(S, 2, rng))
        G = generic_duality(D.P)
        f = random_endo(untwisted(S, S), 1, D, rng)
        g = TwistedEndo(f.context, 1, f.carrier, G, f.map)
        assert trace(f) == trace(g)


def test_trace_is_equivariant_with_sum_twist():
    R = catalog("cyclic", 3)
    U = ring_bimodule(R)
    M = direct_sum(U, U).module
    ctx = Context(R, R, M, U)
    D = generic_duality(U)
    f = random_endo(ctx, 2, D, random.Random(3))
    assert is_equivariant(trace(f), M, U, 2)


def test_transfer_of_trivial_rotation_is_multiplication():
    R = catalog("cyclic", 7)
    U = ring_bimodule(R)
    g = shadow(power(U, 3)).identity()
    assert transfer(g, U, U, 3, 1) == g.scale(3)
    assert transfer(g, U, U, 1, 3) == g


def test_transfer_rejects_non_equivariant_input():
    R = catalog("cyclic", 3)
    U = ring_bimodule(R)
    M = direct_sum(U, U).module
    s = shadow(power(M, 4))
    rows = [[0] * 16 for _ in range(16)]
    rows[0][1] = 1
    bad = sh.ShadowMap(s, s, rows)
    assert not is_equivariant(bad, M, M, 4, 2)
    with pytest.raises(ShadowError, match="not equivariant"):
        transfer(bad, M, M, 2, 2)


def test_b_map_is_zero_off_multiples():
    U = ring_bimodule(Z)
    g = shadow(U).identity()
    out = b_map(2, [g, g.scale(3)], U, U)
    assert scalars(out) == [0, 2, 0, 6]
    with pytest.raises(ShadowError):
        b_map(2, [g], U, U, 6)


def test_verschiebung_traces_of_two():
    e = make_endo(ZZ, 2, free_presentation(Z, 1), [[2]])
    assert scalars(verschiebung_trace_sequence(e, 2, 4)) == [0, 4, 0, 8]
    assert scalars(trace_sequence(verschiebung(e), 4)) == [0, 4, 0, 8]
    assert ints(trace(frobenius(verschiebung(e), 2)).matrix) == [[4]]


def test_forget_left_exhaustive_over_matrix_ring():
    # every right-linear endomorphism of M_2(Z/3), viewed over the centre Z/3
    R, S = catalog("cyclic", 3), catalog("matrix", 2, 3)
    one = [[ints(S.one)]]
    pp = make_presentation(R, S, 1, one, [one])
    ctx = untwisted(R, S)
    sR, sS = shadow(ring_bimodule(R)), shadow(ring_bimodule(S))
    q = forget_quotient(ring_bimodule(R), 1)
    for x in itertools.product(range(3), repeat=4):
        f = endo_from_carrier_map(ctx, pp, [[list(x)]])
        tr = trace(f)
        assert trace_forget_left(f) == tr @ q
        # the trace sends the class of 1 to the class of x
        assert ints(sS.group.reduce(tr.matrix @ sR.project([1]))) == ints(sS.project(list(x)))
