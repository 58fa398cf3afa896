import json
import random

import pytest

from endotrace.algebra import catalog, group_power_automorphism, integers
from endotrace.bimodule import (make_bimodule, make_map, ring_bimodule, tensor, twisted_ring)
from endotrace.dualizable import duality, free_presentation, generic_duality, random_presentation
from endotrace.endo import (Context, EndoError, TupleMorphism, TwistedTuple, all_bracketings,
                            diagonal, endo_from_carrier_map, endo_from_json, endo_sum,
                            frobenius, frobenius_of_frobenius, fv_formula, gamma, is_exact,
                            make_endo, make_ses, random_endo, random_tuple, rotate, sigma,
                            tuple_from_json, tuple_sum, untwisted, verschiebung,
                            verschiebung_tuple)
from endotrace.shadow import trace

from helpers import ints

Z = integers()
ZZ = untwisted(Z, Z)
ZP = ring_bimodule(Z)


def zmap(a: int):
    return make_map(tensor(ZZ.M, ZP).module, tensor(ZP, ZZ.N).module, [[a]])


def ztuple(*values) -> TwistedTuple:
    return TwistedTuple(ZZ, (ZP,) * len(values), tuple(zmap(a) for a in values))


def swap():
    return endo_from_carrier_map(ZZ, free_presentation(Z, 2), [[[0], [1]], [[1], [0]]])


def test_gamma_of_two_integers_multiplies():
    g = gamma(ztuple(2, 3))
    assert g.exponent == 2
    assert ints(g.map.matrix) == [[6]]


def test_gamma_of_length_one_is_the_map_itself():
    g = gamma(ztuple(5))
    assert g.exponent == 1 and ints(g.map.matrix) == [[5]]


@pytest.mark.parametrize("params", [("cyclic", 6), ("group-algebra", 2, 3), ("matrix", 2, 2)])
def test_every_bracketing_agrees(params):
    S = catalog(*params)
    rng = random.Random(str(params))
    D = generic_duality(ring_bimodule(S))
    t = random_tuple(untwisted(S, S), [D] * 4, rng)
    results = all_bracketings(t.twisted_maps())
    assert len(results) == 5
    assert all(r.map == results[0].map for r in results)


def test_bracketings_agree_with_a_twist():
    R = catalog("group-algebra", 3, 3)
    M = twisted_ring(R, group_power_automorphism(R, 3, 2))
    ctx = Context(R, R, M, ring_bimodule(R))
    D = generic_duality(ring_bimodule(R))
    t = random_tuple(ctx, [D] * 3, random.Random(8))
    results = all_bracketings(t.twisted_maps())
    assert all(r.map == results[0].map for r in results)


def test_diagonal_and_its_rotation():
    f = make_endo(ZZ, 1, free_presentation(Z, 1), [[2]])
    d = diagonal(f, 3)
    assert d.length == 3 and all(ints(m.matrix) == [[2]] for m in d.maps)
    r = rotate(d)
    assert all(a == b for a, b in zip(r.maps, d.maps))
    with pytest.raises(EndoError):
        diagonal(make_endo(ZZ, 2, free_presentation(Z, 1), [[2]]), 2)


def test_rotation_cycles_and_has_order_n():
    t = ztuple(2, 3, 5)
    r = rotate(t)
    assert [ints(m.matrix)[0][0] for m in r.maps] == [3, 5, 2]
    assert all(a == b for a, b in zip(rotate(rotate(r)).maps, t.maps))


def test_frobenius_of_swap_squares_to_identity():
    s = swap()
    assert frobenius(s, 1) is s
    F2 = frobenius(s, 2)
    assert F2.exponent == 2
    assert ints(F2.map.matrix) == [[1, 0], [0, 1]]
    assert ints(frobenius(s, 3).map.matrix) == [[0, 1], [1, 0]]


@pytest.mark.parametrize("n,m", [(2, 3), (3, 2), (2, 2)])
def test_frobenius_iterates_over_z6(n, m):
    S = catalog("cyclic", 6)
    D = duality(random_presentation(S, 2, random.Random(n * 10 + m)))
    f = random_endo(untwisted(S, S), 1, D, random.Random(m))
    assert frobenius_of_frobenius(f, n, m).map == frobenius(f, n * m).map


def test_sum_of_endomorphisms_is_block_diagonal():
    a = make_endo(ZZ, 1, free_presentation(Z, 1), [[2]])
    b = make_endo(ZZ, 1, free_presentation(Z, 1), [[3]])
    s, inj, proj = endo_sum(a, b)
    assert ints(s.map.matrix) == [[2, 0], [0, 3]]
    assert all(h.commutes() for h in inj + proj)
    assert ints(trace(s).matrix) == [[5]]


def test_tuple_sum_morphisms_commute():
    s, inj, proj = tuple_sum(ztuple(2, 3), ztuple(5, 7))
    assert s.length == 2
    assert all(h.commutes() for h in inj + proj)
    assert ints(gamma(s).map.matrix) == [[6, 0], [0, 35]]


def test_sigma_is_block_diagonal():
    assert ints(sigma(ztuple(2, 3)).matrix) == [[2, 0], [0, 3]]


def test_verschiebung_of_two_and_identity():
    v = verschiebung_tuple(ztuple(2, 1))
    assert ints(v.map.matrix) == [[0, 2], [1, 0]]
    assert ints(trace(v).matrix) == [[0]]
    assert ints(verschiebung_tuple(ztuple(4)).map.matrix) == [[4]]


def test_verschiebung_of_a_single_endomorphism():
    e = make_endo(ZZ, 2, free_presentation(Z, 1), [[2]])
    assert ints(verschiebung(e).map.matrix) == [[0, 2], [1, 0]]
    e3 = make_endo(ZZ, 3, free_presentation(Z, 1), [[2]])
    v3 = verschiebung(e3)
    assert ints(trace(frobenius(v3, 3)).matrix) == [[6]]
    assert ints(trace(v3).matrix) == [[0]]


def test_verschiebung_needs_a_trivial_side():
    R = catalog("group-algebra", 3, 3)
    M = twisted_ring(R, group_power_automorphism(R, 3, 2))
    ctx = Context(R, R, M, M)
    D = generic_duality(ring_bimodule(R))
    f = random_endo(ctx, 2, D, random.Random(1))
    with pytest.raises(EndoError, match="Γ-inverse unavailable"):
        verschiebung(f)


def test_fv_closed_form_on_integers():
    t = ztuple(2, 3)
    closed = fv_formula(t, 2)
    direct = frobenius(verschiebung_tuple(t), 2)
    assert closed.map == direct.map
    assert ints(trace(closed).matrix) == [[12]]


@pytest.mark.parametrize("n,m", [(2, 3), (3, 2), (3, 3)])
def test_fv_closed_form_random_over_z6(n, m):
    S = catalog("cyclic", 6)
    D = generic_duality(ring_bimodule(S))
    t = random_tuple(untwisted(S, S), [D] * n, random.Random(n + 7 * m))
    assert fv_formula(t, m).map == frobenius(verschiebung_tuple(t), m).map


def test_make_ses_is_exact():
    S = catalog("upper-triangular", 3)
    rng = random.Random(5)
    ctx = untwisted(S, S)
    a = random_endo(ctx, 1, duality(random_presentation(S, 1, rng)), rng)
    b = random_endo(ctx, 1, duality(random_presentation(S, 1, rng)), rng)
    ses = make_ses(a, b, rng=rng)
    assert is_exact(ses.inclusion, ses.projection)
    assert trace(ses.middle) == trace(a) + trace(b)


def test_non_projective_carrier_rejected():
    Z2 = make_bimodule(Z, Z, [2], [[[1]]], [[[1]]])
    with pytest.raises(EndoError, match="not projective"):
        make_endo(ZZ, 1, Z2, [[1]])


def test_wrong_shapes_rejected():
    with pytest.raises(EndoError):
        TwistedTuple(ZZ, (ZP, ZP), (zmap(1),))
    a = make_endo(ZZ, 1, free_presentation(Z, 1), [[2]])
    b = make_endo(ZZ, 2, free_presentation(Z, 1), [[2]])
    with pytest.raises(EndoError):
        endo_sum(a, b)


def test_morphism_that_does_not_commute():
    a = make_endo(ZZ, 1, free_presentation(Z, 1), [[2]])
    b = make_endo(ZZ, 1, free_presentation(Z, 1), [[3]])
    h = make_map(a.carrier, b.carrier, [[1]])
    assert not TupleMorphism(a, b, (h,)).commutes()
    assert TupleMorphism(a, a, (h,)).commutes()


def test_json_round_trips():
    f = swap()
    back = endo_from_json(json.loads(json.dumps(f.to_json())))
    assert back == f
    t = ztuple(2, 3, 5)
    tb = tuple_from_json(json.loads(json.dumps(t.to_json())))
    assert all(a == b for a, b in zip(tb.maps, t.maps))
