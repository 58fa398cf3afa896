"""Twisted endomorphisms, cyclic tuples of twisted maps, and their operators.

A context fixes rings R, S, an R-R-bimodule M and an S-S-bimodule N. A
twisted endomorphism of exponent n on a carrier P is a bimodule map

    power(M, n) (x) P  ->  P (x) power(N, n)

and a tuple of length n is a family ``f_j: M (x) P_{j+1} -> P_j (x) N``
with indices read mod n. ``gamma`` composes a tuple into an endomorphism
of ``P_0``; Frobenius is ``gamma`` of the diagonal tuple; Verschiebung
assembles a tuple into one endomorphism of ``P_0 + ... + P_{n-1}``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algebra import FinAlgebra
from .bimodule import (Bimodule, BimoduleError, BimoduleMap, DirectSum, add,
                       associator, associator_inverse, check_map,
                       collapse_unit_power, compose, compose_all, direct_sum,
                       invert, is_exact_at, is_injective, is_surjective,
                       left_unitor, left_unitor_inverse, make_map,
                       nested_power_iso, power, power_iso, power_iso_inverse,
                       random_map, right_unitor, right_unitor_inverse,
                       ring_bimodule, tensor, tensor_maps)
from .dualizable import (DualityData, ProjectivePresentation, _left_block,
                         duality, generic_duality, materialize_full, smat,
                         sum_duality)
from .lattice import imat, matmul


class EndoError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Context:
    R: FinAlgebra
    S: FinAlgebra
    M: Bimodule
    N: Bimodule

    def __post_init__(self):
        if self.M.left_ring != self.R or self.M.right_ring != self.R:
            raise EndoError("M must be an R-R-bimodule")
        if self.N.left_ring != self.S or self.N.right_ring != self.S:
            raise EndoError("N must be an S-S-bimodule")

    def __eq__(self, other) -> bool:
        return (isinstance(other, Context) and self.R == other.R and self.S == other.S
                and self.M == other.M and self.N == other.N)

    def __hash__(self) -> int:
        return hash((self.R, self.S, self.M, self.N))

    @property
    def left_trivial(self) -> bool:
        return self.M == ring_bimodule(self.R)

    @property
    def right_trivial(self) -> bool:
        return self.N == ring_bimodule(self.S)

    def powered(self, n: int) -> "Context":
        return Context(self.R, self.S, power(self.M, n), power(self.N, n))

    def to_json(self) -> dict:
        return {"R": self.R.to_json(), "S": self.S.to_json(),
                "M": self.M.to_json(), "N": self.N.to_json()}

    @staticmethod
    def from_json(data: dict) -> "Context":
        R = FinAlgebra.from_json(data["R"])
        S = FinAlgebra.from_json(data["S"])
        return Context(R, S, Bimodule.from_json(data["M"]), Bimodule.from_json(data["N"]))


def untwisted(R: FinAlgebra, S: FinAlgebra) -> Context:
    return Context(R, S, ring_bimodule(R), ring_bimodule(S))


# ---------------------------------------------------------------------------
# the objects


@dataclass(frozen=True, eq=False)
class TwistedMap:
    """``power(M, a) (x) X -> Y (x) power(N, a)``."""

    context: Context
    exponent: int
    source: Bimodule
    target: Bimodule
    map: BimoduleMap

    def __post_init__(self):
        c, a = self.context, self.exponent
        if a < 1:
            raise EndoError("exponent must be positive")
        if self.map.source != tensor(power(c.M, a), self.source).module:
            raise EndoError("map source is not power(M, a) (x) carrier")
        if self.map.target != tensor(self.target, power(c.N, a)).module:
            raise EndoError("map target is not carrier (x) power(N, a)")


@dataclass(frozen=True, eq=False)
class TwistedEndo:
    context: Context
    exponent: int
    carrier: Bimodule
    duality: DualityData
    map: BimoduleMap
    presentation: Optional[ProjectivePresentation] = None

    def __post_init__(self):
        TwistedMap(self.context, self.exponent, self.carrier, self.carrier, self.map)
        if self.duality.P != self.carrier:
            raise EndoError("duality data belongs to a different carrier")

    def as_map(self) -> TwistedMap:
        return TwistedMap(self.context, self.exponent, self.carrier, self.carrier, self.map)

    def with_map(self, m: BimoduleMap) -> "TwistedEndo":
        return TwistedEndo(self.context, self.exponent, self.carrier, self.duality, m,
                           self.presentation)

    def __eq__(self, other) -> bool:
        return (isinstance(other, TwistedEndo) and self.context == other.context
                and self.exponent == other.exponent and self.carrier == other.carrier
                and self.map == other.map)

    __hash__ = object.__hash__

    def to_json(self) -> dict:
        carrier = ({"presentation": self.presentation.to_json()} if self.presentation is not None
                   else {"bimodule": self.carrier.to_json()})
        return {"kind": "endo", **self.context.to_json(), "exponent": self.exponent,
                "carrier": carrier,
                "matrix": [[int(x) for x in row] for row in self.map.matrix]}


@dataclass(frozen=True, eq=False)
class TwistedTuple:
    context: Context
    carriers: tuple
    maps: tuple            # f_j: M (x) P_{j+1} -> P_j (x) N
    dualities: tuple = ()

    def __post_init__(self):
        n = len(self.carriers)
        if n < 1 or len(self.maps) != n:
            raise EndoError("a tuple needs one map per carrier")
        for j, f in enumerate(self.maps):
            TwistedMap(self.context, 1, self.carriers[(j + 1) % n], self.carriers[j], f)
        if self.dualities and len(self.dualities) != n:
            raise EndoError("one duality per carrier")

    @property
    def length(self) -> int:
        return len(self.carriers)

    def twisted_maps(self) -> list[TwistedMap]:
        n = self.length
        return [TwistedMap(self.context, 1, self.carriers[(j + 1) % n], self.carriers[j], f)
                for j, f in enumerate(self.maps)]

    def duality_of(self, j: int) -> DualityData:
        if self.dualities:
            return self.dualities[j]
        D = generic_duality(self.carriers[j])
        if D is None:
            raise EndoError(f"carrier {j} is not projective")
        return D

    def to_json(self) -> dict:
        return {"kind": "tuple", **self.context.to_json(),
                "carriers": [P.to_json() for P in self.carriers],
                "maps": [[[int(x) for x in row] for row in f.matrix] for f in self.maps]}


@dataclass(frozen=True, eq=False)
class TupleMorphism:
    """Componentwise carrier maps between two tuples (or two endomorphisms)."""

    source: object
    target: object
    components: tuple

    def commutes(self) -> bool:
        a, b, h = self.source, self.target, self.components
        if isinstance(a, TwistedEndo):
            (h0,) = h
            Nn = power(a.context.N, a.exponent)
            Mn = power(a.context.M, a.exponent)
            lhs = compose(tensor_maps(h0, Nn.identity()), a.map)
            rhs = compose(b.map, tensor_maps(Mn.identity(), h0))
            return lhs == rhs
        n = a.length
        N, M = a.context.N, a.context.M
        for j in range(n):
            lhs = compose(tensor_maps(h[j], N.identity()), a.maps[j])
            rhs = compose(b.maps[j], tensor_maps(M.identity(), h[(j + 1) % n]))
            if lhs != rhs:
                return False
        return True


def _carriers_of(x) -> list[Bimodule]:
    return [x.carrier] if isinstance(x, TwistedEndo) else list(x.carriers)


# ---------------------------------------------------------------------------
# constructors


def make_endo(context: Context, exponent: int, carrier, matrix,
              duality_data: Optional[DualityData] = None, validate: bool = True) -> TwistedEndo:
    """Build a twisted endomorphism on a presentation or an explicit carrier."""
    pp = None
    if isinstance(carrier, ProjectivePresentation):
        pp = carrier
        D = duality_data or duality(pp)
        P = D.P
    else:
        P = carrier
        D = duality_data or generic_duality(P)
        if D is None:
            raise EndoError("carrier is not projective (no duality data exists)")
    src = tensor(power(context.M, exponent), P).module
    tgt = tensor(P, power(context.N, exponent)).module
    m = make_map(src, tgt, imat(matrix, (tgt.rank, src.rank)), validate=validate)
    return TwistedEndo(context, exponent, P, D, m, pp)


def endo_from_carrier_map(context: Context, pp: ProjectivePresentation, f) -> TwistedEndo:
    """Untwisted endomorphism from a k x k matrix over S acting on columns.

    Requires M = R and N = S; the map is ``R (x) P -> P -> P -> P (x) S``.
    """
    if not (context.left_trivial and context.right_trivial):
        raise EndoError("carrier maps only define endomorphisms in the untwisted context")
    S = pp.right_ring
    F = f if isinstance(f, np.ndarray) and f.ndim == 3 else smat(S, f, pp.k)
    mat = materialize_full(pp)
    D = duality(pp)
    P = D.P
    inner = matmul(mat.projection, matmul(_left_block(S, F), mat.inclusion))
    g = make_map(P, P, inner)
    m = compose_all(right_unitor_inverse(P), g, left_unitor(P))
    return TwistedEndo(context, 1, P, D, m, pp)


def endo_from_json(data: dict) -> TwistedEndo:
    ctx = Context.from_json(data)
    car = data["carrier"]
    if "presentation" in car:
        carrier = ProjectivePresentation.from_json(car["presentation"])
    else:
        carrier = Bimodule.from_json(car["bimodule"])
    return make_endo(ctx, int(data["exponent"]), carrier, data["matrix"])


def tuple_from_json(data: dict) -> TwistedTuple:
    ctx = Context.from_json(data)
    carriers = [Bimodule.from_json(c) for c in data["carriers"]]
    n = len(carriers)
    maps = []
    for j, m in enumerate(data["maps"]):
        src = tensor(ctx.M, carriers[(j + 1) % n]).module
        tgt = tensor(carriers[j], ctx.N).module
        maps.append(make_map(src, tgt, imat(m, (tgt.rank, src.rank))))
    return TwistedTuple(ctx, tuple(carriers), tuple(maps))


# ---------------------------------------------------------------------------
# Gamma


def gamma_prime(f0: TwistedMap, f1: TwistedMap) -> TwistedMap:
    """Compose ``f0: M^a X0 -> Y0 N^a`` after ``f1: M^b X1 -> Y1 N^b``.

    Needs ``X0 == Y1``. The result ``M^(a+b) X1 -> Y0 N^(a+b)`` applies
    ``id (x) f1``, moves ``N^b`` past ``M^a`` by associators, then applies
    ``f0 (x) id``.
    """
    c = f0.context
    if f1.context != c:
        raise EndoError("maps live in different contexts")
    if f0.source != f1.target:
        raise EndoError("shape mismatch: f0 must start where f1 ends")
    a, b = f0.exponent, f1.exponent
    M, N = c.M, c.N
    Ma, Mb, Na, Nb = power(M, a), power(M, b), power(N, a), power(N, b)
    X1, X0, Y0 = f1.source, f0.source, f0.target
    m = compose_all(
        tensor_maps(Y0.identity(), power_iso(N, a, b)),
        associator(Y0, Na, Nb),
        tensor_maps(f0.map, Nb.identity()),
        associator_inverse(Ma, X0, Nb),
        tensor_maps(Ma.identity(), f1.map),
        associator(Ma, Mb, X1),
        tensor_maps(power_iso_inverse(M, a, b), X1.identity()),
    )
    return TwistedMap(c, a + b, X1, Y0, m)


def gamma_chain(maps: Sequence[TwistedMap]) -> TwistedMap:
    """Right-nested ``gamma_prime(f0, gamma_prime(f1, ...))``."""
    out = maps[-1]
    for f in reversed(maps[:-1]):
        out = gamma_prime(f, out)
    return out


def gamma(t: TwistedTuple) -> TwistedEndo:
    g = gamma_chain(t.twisted_maps())
    return TwistedEndo(t.context, t.length, t.carriers[0], t.duality_of(0), g.map)


def all_bracketings(maps: Sequence[TwistedMap]) -> list[TwistedMap]:
    """``gamma_prime`` applied under every binary bracketing."""
    if len(maps) == 1:
        return [maps[0]]
    out = []
    for split in range(1, len(maps)):
        for left in all_bracketings(maps[:split]):
            for right in all_bracketings(maps[split:]):
                out.append(gamma_prime(left, right))
    return out


# ---------------------------------------------------------------------------
# diagonal, Frobenius, rotation


def diagonal(f: TwistedEndo, k: int) -> TwistedTuple:
    if f.exponent != 1:
        raise EndoError("diagonal needs an endomorphism of exponent 1")
    if k < 1:
        raise EndoError("length must be positive")
    return TwistedTuple(f.context, (f.carrier,) * k, (f.map,) * k, (f.duality,) * k)


def frobenius(f: TwistedEndo, k: int) -> TwistedEndo:
    """``gamma(diagonal(f, k))``; the carrier stays ``P``."""
    if k == 1:
        return f
    out = gamma(diagonal(f, k))
    return TwistedEndo(out.context, k, f.carrier, f.duality, out.map, f.presentation)


def rotate(t: TwistedTuple) -> TwistedTuple:
    """``(f_0, ..., f_{n-1}) -> (f_1, ..., f_{n-1}, f_0)``."""
    car = t.carriers[1:] + t.carriers[:1]
    maps = t.maps[1:] + t.maps[:1]
    dual = (t.dualities[1:] + t.dualities[:1]) if t.dualities else ()
    return TwistedTuple(t.context, car, maps, dual)


# ---------------------------------------------------------------------------
# biproducts


def _sum_map(c: Context, a_exp: int, parts: Sequence[BimoduleMap], src: DirectSum,
             tgt: DirectSum, src_index: Sequence[int]) -> BimoduleMap:
    """``sum_i (inj_i (x) id) part_i (id (x) proj_{src_index[i]})``."""
    Ma, Na = power(c.M, a_exp), power(c.N, a_exp)
    out = tensor(Ma, src.module).module.zero_map(tensor(tgt.module, Na).module)
    for i, f in enumerate(parts):
        term = compose_all(tensor_maps(tgt.injections[i], Na.identity()), f,
                           tensor_maps(Ma.identity(), src.projections[src_index[i]]))
        out = add(out, term)
    return out


def endo_sum(a: TwistedEndo, b: TwistedEndo):
    """Pointwise biproduct; returns ``(sum, injections, projections)``."""
    if a.context != b.context or a.exponent != b.exponent:
        raise EndoError("summands must share context and exponent")
    ds = direct_sum(a.carrier, b.carrier)
    m = _sum_map(a.context, a.exponent, [a.map, b.map], ds, ds, [0, 1])
    D = sum_duality([a.duality, b.duality], ds)
    s = TwistedEndo(a.context, a.exponent, ds.module, D, m)
    inj = (TupleMorphism(a, s, (ds.injections[0],)), TupleMorphism(b, s, (ds.injections[1],)))
    proj = (TupleMorphism(s, a, (ds.projections[0],)), TupleMorphism(s, b, (ds.projections[1],)))
    return s, inj, proj


def tuple_sum(a: TwistedTuple, b: TwistedTuple):
    if a.context != b.context or a.length != b.length:
        raise EndoError("summands must share context and length")
    n = a.length
    sums = [direct_sum(a.carriers[j], b.carriers[j]) for j in range(n)]
    maps = []
    for j in range(n):
        src, tgt = sums[(j + 1) % n], sums[j]
        maps.append(_sum_map(a.context, 1, [a.maps[j], b.maps[j]], src, tgt, [0, 1]))
    duals = tuple(sum_duality([a.duality_of(j), b.duality_of(j)], sums[j]) for j in range(n))
    s = TwistedTuple(a.context, tuple(d.module for d in sums), tuple(maps), duals)
    inj = (TupleMorphism(a, s, tuple(d.injections[0] for d in sums)),
           TupleMorphism(b, s, tuple(d.injections[1] for d in sums)))
    proj = (TupleMorphism(s, a, tuple(d.projections[0] for d in sums)),
            TupleMorphism(s, b, tuple(d.projections[1] for d in sums)))
    return s, inj, proj


# ---------------------------------------------------------------------------
# sigma and Verschiebung


def _carrier_sum(t: TwistedTuple) -> DirectSum:
    return direct_sum(*t.carriers)


def _shifted_sum(t: TwistedTuple, shift: int = 1) -> DirectSum:
    n = t.length
    return direct_sum(*(t.carriers[(j + shift) % n] for j in range(n)))


def sigma(t: TwistedTuple) -> BimoduleMap:
    """``M (x) (+_j P_{j+1}) -> (+_j P_j) (x) N``.

    The composite of the distributivity isomorphism, the block map with
    blocks ``f_j`` and the inverse distributivity; written as a sum over
    inclusions and projections.
    """
    C = _carrier_sum(t)
    D = _shifted_sum(t, 1)
    return _sum_map(t.context, 1, list(t.maps), D, C, list(range(t.length)))


def twist_rotation(t: TwistedTuple, shift: int = 1) -> BimoduleMap:
    """``+_j P_j -> +_j P_{j+shift}``; summand ``j + shift`` moves to slot ``j``."""
    n = t.length
    C = _carrier_sum(t)
    D = _shifted_sum(t, shift)
    out = C.module.zero_map(D.module)
    for j in range(n):
        out = add(out, compose(D.injections[j], C.projections[(j + shift) % n]))
    return out


def verschiebung_tuple(t: TwistedTuple) -> TwistedEndo:
    """``sigma(t) after (id_M (x) rotation)`` on ``P_0 + ... + P_{n-1}``."""
    if t.length == 1:
        return TwistedEndo(t.context, 1, t.carriers[0], t.duality_of(0), t.maps[0])
    C = _carrier_sum(t)
    m = compose(sigma(t), tensor_maps(t.context.M.identity(), twist_rotation(t, 1)))
    D = sum_duality([t.duality_of(j) for j in range(t.length)], C)
    return TwistedEndo(t.context, 1, C.module, D, m)


def padded_tuple(f: TwistedEndo) -> TwistedTuple:
    """``(f, id, ..., id)`` with the trivial twist absorbed by unitors.

    With N = S the carriers are ``P, M^(n-1) P, ..., M P``; otherwise
    (M = R) they are ``P N^(n-1), P, P N, ..., P N^(n-2)``.
    """
    c, n, P = f.context, f.exponent, f.carrier
    M, N = c.M, c.N
    if n == 1:
        return TwistedTuple(c, (P,), (f.map,), (f.duality,))
    if c.right_trivial:
        carriers = [P] + [tensor(power(M, n - j), P).module for j in range(1, n)]
        S = c.S
        f0 = compose_all(tensor_maps(P.identity(), collapse_unit_power(S, n)), f.map,
                         associator_inverse(M, power(M, n - 1), P))
        maps = [f0]
        for j in range(1, n):
            if j + 1 <= n - 1:
                step = associator_inverse(M, power(M, n - j - 1), P)
            else:
                step = tensor(M, P).module.identity()
            maps.append(compose(right_unitor_inverse(carriers[j]), step))
        duals = [f.duality] + [None] * (n - 1)
    elif c.left_trivial:
        R = c.R
        carriers = [tensor(P, power(N, n - 1)).module, P] + [
            tensor(P, power(N, j - 1)).module for j in range(2, n)]
        expand = invert(collapse_unit_power(R, n))
        tail = compose(associator_inverse(P, power(N, n - 1), N),
                       tensor_maps(P.identity(), power_iso_inverse(N, n - 1, 1)))
        f0 = compose_all(tail, f.map, tensor_maps(expand, P.identity()))
        maps = [f0]
        for j in range(1, n):
            src_carrier = tensor(P, power(N, j)).module          # P_{j+1}
            step = left_unitor(src_carrier)
            if j > 1:
                step = compose_all(associator_inverse(P, power(N, j - 1), N),
                                   tensor_maps(P.identity(), power_iso_inverse(N, j - 1, 1)),
                                   step)
            maps.append(step)
        duals = [None, f.duality] + [None] * (n - 2)
    else:
        raise EndoError("Γ-inverse unavailable: Verschiebung of a single endomorphism needs "
                        "M = R or N = S; supply a tuple instead")
    duals = tuple(D if D is not None else _generic(carriers[j]) for j, D in enumerate(duals))
    return TwistedTuple(c, tuple(carriers), tuple(maps), duals)


def _generic(P: Bimodule) -> DualityData:
    D = generic_duality(P)
    if D is None:
        raise EndoError("carrier is not projective")
    return D


def verschiebung(f: TwistedEndo) -> TwistedEndo:
    """n-Verschiebung of an exponent-n endomorphism (needs M = R or N = S)."""
    if f.exponent == 1:
        return f
    return verschiebung_tuple(padded_tuple(f))


def fv_formula(t: TwistedTuple, m: int) -> TwistedEndo:
    """Closed form of ``frobenius(verschiebung_tuple(t), m)``.

    First the rotation ``t^m`` on ``power(M, m) (x) (+P_j)``, then the
    block map with blocks ``gamma(f_i, ..., f_{i+m-1})``.
    """
    n = t.length
    if m == 1:
        return verschiebung_tuple(t)
    c = t.context
    C = _carrier_sum(t)
    tm = t.twisted_maps()
    blocks = [gamma_chain([tm[(i + s) % n] for s in range(m)]).map for i in range(n)]
    if n == 1:
        D = t.duality_of(0)
        return TwistedEndo(c, m, t.carriers[0], D, blocks[0])
    Dm = _shifted_sum(t, m)
    sig = _sum_map(c, m, blocks, Dm, C, list(range(n)))
    rot = tensor_maps(power(c.M, m).identity(), twist_rotation(t, m))
    D = sum_duality([t.duality_of(j) for j in range(n)], C)
    return TwistedEndo(c, m, C.module, D, compose(sig, rot))


# ---------------------------------------------------------------------------
# regrouping exponents


def as_exponent_one(f: TwistedEndo) -> TwistedEndo:
    """View an exponent-n endomorphism over (M, N) as exponent 1 over (M^n, N^n)."""
    return TwistedEndo(f.context.powered(f.exponent), 1, f.carrier, f.duality, f.map,
                       f.presentation)


_NESTED_INV: dict = {}


def nested_power_iso_inverse(M: Bimodule, n: int, k: int) -> BimoduleMap:
    ck = (M.key, n, k)
    hit = _NESTED_INV.get(ck)
    if hit is None:
        hit = invert(nested_power_iso(M, n, k))
        _NESTED_INV[ck] = hit
    return hit


def flatten_nested(g: TwistedEndo, base: Context, m: int) -> TwistedEndo:
    """Exponent-k endomorphism over (M^m, N^m) as exponent-(mk) over (M, N)."""
    k = g.exponent
    P = g.carrier
    into = tensor_maps(nested_power_iso_inverse(base.M, m, k), P.identity())
    out = tensor_maps(P.identity(), nested_power_iso(base.N, m, k))
    return TwistedEndo(base, m * k, P, g.duality, compose_all(out, g.map, into), g.presentation)


def frobenius_of_frobenius(f: TwistedEndo, n: int, m: int) -> TwistedEndo:
    """``F^n(F^m f)`` re-expressed over (M, N) with exponent nm."""
    inner = as_exponent_one(frobenius(f, m))
    return flatten_nested(frobenius(inner, n), f.context, m)


# ---------------------------------------------------------------------------
# exact sequences


def is_morphism(h: TupleMorphism) -> bool:
    return h.commutes()


def is_exact(h1: TupleMorphism, h2: TupleMorphism) -> bool:
    """``0 -> A -> B -> C -> 0`` exact in every component, squares commuting."""
    if h1.target is not h2.source:
        if not (isinstance(h1.target, TwistedEndo) and h1.target == h2.source):
            raise EndoError("morphisms are not composable")
    if not (h1.commutes() and h2.commutes()):
        return False
    for a, b in zip(h1.components, h2.components):
        if not (is_injective(a) and is_surjective(b) and is_exact_at(a, b)):
            return False
    return True


@dataclass(frozen=True, eq=False)
class ShortExact:
    sub: TwistedEndo
    middle: TwistedEndo
    quotient: TwistedEndo
    inclusion: TupleMorphism
    projection: TupleMorphism


def make_ses(a: TwistedEndo, b: TwistedEndo, corner: Optional[BimoduleMap] = None,
             rng: Optional[random.Random] = None) -> ShortExact:
    """Block upper-triangular extension ``[[a, c], [0, b]]`` on ``P' + P''``.

    ``c: M^n P'' -> P' N^n`` is drawn from the Hom lattice when not given.
    """
    if a.context != b.context or a.exponent != b.exponent:
        raise EndoError("ends must share context and exponent")
    for e in (a, b):
        if e.duality is None:
            raise EndoError("carrier is not projective")
    c, n = a.context, a.exponent
    Mn, Nn = power(c.M, n), power(c.N, n)
    src_c = tensor(Mn, b.carrier).module
    tgt_c = tensor(a.carrier, Nn).module
    if corner is None:
        corner = random_map(src_c, tgt_c, rng or random.Random(0))
    if corner.source != src_c or corner.target != tgt_c:
        raise EndoError("corner has the wrong shape")
    ds = direct_sum(a.carrier, b.carrier)
    m = _sum_map(c, n, [a.map, b.map], ds, ds, [0, 1])
    m = add(m, compose_all(tensor_maps(ds.injections[0], Nn.identity()), corner,
                           tensor_maps(Mn.identity(), ds.projections[1])))
    D = sum_duality([a.duality, b.duality], ds)
    mid = TwistedEndo(c, n, ds.module, D, m)
    return ShortExact(a, mid, b, TupleMorphism(a, mid, (ds.injections[0],)),
                      TupleMorphism(mid, b, (ds.projections[1],)))


def random_endo_map(context: Context, exponent: int, P: Bimodule, rng: random.Random,
                    coeff: int = 3) -> BimoduleMap:
    src = tensor(power(context.M, exponent), P).module
    tgt = tensor(P, power(context.N, exponent)).module
    return random_map(src, tgt, rng, coeff)


def random_endo(context: Context, exponent: int, D: DualityData, rng: random.Random,
                presentation: Optional[ProjectivePresentation] = None) -> TwistedEndo:
    m = random_endo_map(context, exponent, D.P, rng)
    return TwistedEndo(context, exponent, D.P, D, m, presentation)


def random_tuple(context: Context, dualities: Sequence[DualityData], rng: random.Random) -> TwistedTuple:
    n = len(dualities)
    carriers = tuple(D.P for D in dualities)
    maps = tuple(random_map(tensor(context.M, carriers[(j + 1) % n]).module,
                            tensor(carriers[j], context.N).module, rng) for j in range(n))
    return TwistedTuple(context, carriers, maps, tuple(dualities))
