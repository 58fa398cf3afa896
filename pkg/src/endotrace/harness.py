"""Random instance generation and the property suites.

Every property draws its cases from its own random stream, seeded from
``sha256(f"{seed}:{suite}:{property}:{case}")``, so adding or reordering
suites never changes another property's instances. A failing case is
shrunk greedily over its shape parameters before it is reported.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .algebra import (catalog, group_power_automorphism, inner_automorphism,
                      integers, random_unit)
from .bimodule import (Bimodule, add, compose_all, direct_sum, power, random_map,
                       ring_bimodule, tensor, tensor_maps, twisted_ring)
from .classical import (block_sum, block_triangular, classical_frobenius,
                        classical_verschiebung, ghost_via_traces, kronecker)
from .dualizable import (DualityData, duality, generic_duality,
                         materialize, random_presentation)
from .endo import (Context, TwistedEndo, TwistedTuple, all_bracketings,
                   as_exponent_one, endo_sum, fv_formula, frobenius,
                   frobenius_of_frobenius, gamma, is_exact, make_ses,
                   random_tuple, rotate, tuple_sum, verschiebung,
                   verschiebung_tuple)
from .lattice import determinant, smith_normal_form
from . import shadow as sh
from .witt import (ch, ghost, matrix_power_traces, truncate, witt_add,
                   witt_frobenius, witt_mul, witt_verschiebung, make_witt,
                   torsion_free_lift)


class HarnessError(ValueError):
    """Malformed configuration (exit status 2)."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class Caps:
    ring_rank: int = 6
    carrier_k: int = 3
    tuple_len: int = 4
    trace_bound: int = 8
    exp_product: int = 8

    def __post_init__(self):
        for name, value in asdict(self).items():
            if int(value) < 1:
                raise HarnessError(f"cap {name} must be positive")


def parse_caps(items) -> Caps:
    """``"ring_rank=4,trace_bound=6"`` (possibly several strings) -> Caps."""
    values = {}
    for item in items or []:
        for part in str(item).split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise HarnessError(f"malformed cap {part!r}; expected name=value")
            key, val = part.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in Caps.__dataclass_fields__:
                raise HarnessError(f"unknown cap {key!r}")
            try:
                values[key] = int(val)
            except ValueError:
                raise HarnessError(f"cap {key} needs an integer value") from None
    return Caps(**values)


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    cases: int = 20
    caps: Caps = field(default_factory=Caps)
    suite: str = "all"

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2 ** 64):
            raise HarnessError("seed must be an unsigned 64-bit integer")
        if int(self.cases) < 1:
            raise HarnessError("cases must be positive")


def stream(seed: int, *labels) -> random.Random:
    text = ":".join([str(seed)] + [str(x) for x in labels])
    digest = hashlib.sha256(text.encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


# ---------------------------------------------------------------------------
# instance generation


# ordered from small to large so shrinking the index shrinks the ring
RINGS = [
    ("cyclic", 2), ("cyclic", 3), ("cyclic", 4), ("cyclic", 6),
    ("group-algebra", 2, 2), ("upper-triangular", 2), ("group-algebra", 2, 3),
    ("group-algebra", 3, 3), ("upper-triangular", 3), ("matrix", 2, 2), ("matrix", 2, 3),
]
COMMUTATIVE_RINGS = [r for r in RINGS if r[0] in ("cyclic", "group-algebra")]


def ring_from_index(i: int, caps: Caps, commutative: bool = False):
    pool = COMMUTATIVE_RINGS if commutative else RINGS
    pool = [r for r in pool if catalog(*r).rank <= caps.ring_rank] or pool[:1]
    return catalog(*pool[i % len(pool)])


def _exponent(S) -> int:
    e = 1
    for d in S.factors:
        if d == 0:
            return 0
        e = e * d // np.gcd(e, d)
    return int(e)


def automorphism_of(R, rng: random.Random, outer: bool):
    """An outer automorphism when the ring offers one, else an inner one."""
    name = R.name or ""
    if outer and name.startswith("Z/") and "[C_" in name:
        order = int(name.split("[C_")[1].rstrip("]"))
        units = [a for a in range(2, order) if np.gcd(a, order) == 1]
        if units:
            return group_power_automorphism(R, order, rng.choice(units))
    return inner_automorphism(R, random_unit(R, rng))


class Generator:
    """Draws rings, twists, carriers and maps from one random stream."""

    def __init__(self, rng: random.Random, caps: Caps, coeff: int = 3):
        self.rng = rng
        self.caps = caps
        self.coeff = coeff

    def twist(self, R, kind: int) -> Bimodule:
        """0: the ring, 1: inner twist, 2: outer twist if any, 3: free of
        rank 2, 4: the ring plus an outer twist."""
        if kind <= 0:
            return ring_bimodule(R)
        if kind == 3:
            return direct_sum(ring_bimodule(R), ring_bimodule(R)).module
        if kind == 4:
            T = twisted_ring(R, automorphism_of(R, self.rng, outer=True))
            return direct_sum(ring_bimodule(R), T).module
        return twisted_ring(R, automorphism_of(R, self.rng, outer=kind == 2))

    def pair(self, S, kind: int):
        """Left ring and images of its basis: 0 R = S, 1 R = S through an
        automorphism, 2 R = Z/exp(S) acting by scalars."""
        if kind == 1:
            a = automorphism_of(S, self.rng, outer=True)
            return S, [a[:, u] for u in range(S.rank)]
        if kind == 2:
            e = _exponent(S)
            R = catalog("cyclic", e) if e else integers()
            return R, [S.reduce(S.one)]
        return S, None

    def presentation(self, R, S, images, k: int):
        return random_presentation(S, k, self.rng, R=R, images=images)

    def duality(self, R, S, images, k: int) -> DualityData:
        return duality(self.presentation(R, S, images, k))

    def map(self, X: Bimodule, Y: Bimodule):
        return random_map(X, Y, self.rng, self.coeff)

    def endo(self, ctx: Context, n: int, D: DualityData) -> TwistedEndo:
        src = tensor(power(ctx.M, n), D.P).module
        tgt = tensor(D.P, power(ctx.N, n)).module
        return TwistedEndo(ctx, n, D.P, D, self.map(src, tgt))

    def tuple(self, ctx: Context, Ds) -> TwistedTuple:
        n = len(Ds)
        car = tuple(D.P for D in Ds)
        maps = tuple(self.map(tensor(ctx.M, car[(j + 1) % n]).module,
                              tensor(car[j], ctx.N).module) for j in range(n))
        return TwistedTuple(ctx, car, maps, tuple(Ds))


@dataclass
class Instance:
    gen: Generator
    ctx: Context
    images: Optional[list]

    def duality(self, k: int) -> DualityData:
        return self.gen.duality(self.ctx.R, self.ctx.S, self.images, k)


def setup(rng: random.Random, caps: Caps, shape: dict, twist_left=None, twist_right=None
          ) -> Instance:
    gen = Generator(rng, caps, shape.get("coeff", 3))
    S = ring_from_index(shape.get("ring", 0), caps)
    R, images = gen.pair(S, shape.get("pair", 0))
    kl = shape.get("twist_m", 0) if twist_left is None else twist_left
    kr = shape.get("twist_n", 0) if twist_right is None else twist_right
    M = gen.twist(R, kl)
    N = gen.twist(S, kr)
    return Instance(gen, Context(R, S, M, N), images)


# ---------------------------------------------------------------------------
# properties


@dataclass
class Outcome:
    ok: bool
    witness: Callable[[], dict] = lambda: {}


def _ok(flag: bool, witness: Callable[[], dict]) -> Outcome:
    return Outcome(bool(flag), witness)


SUM_TWISTS = (3, 4)
TWIST_WEIGHTS = [(0, 2), (1, 1), (2, 2), (3, 2), (4, 3)]


def _draw_twist(rng: random.Random) -> int:
    total = sum(w for _, w in TWIST_WEIGHTS)
    x = rng.randrange(total)
    for kind, w in TWIST_WEIGHTS:
        if x < w:
            return kind
        x -= w
    return 0


def _shape_common(rng: random.Random, caps: Caps, twists: bool = True) -> dict:
    shape = {"ring": rng.randrange(len(RINGS)), "pair": rng.randrange(3),
             "k": rng.randint(1, min(2, caps.carrier_k)), "coeff": 3}
    if twists:
        shape["twist_m"] = _draw_twist(rng)
        shape["twist_n"] = _draw_twist(rng)
    return shape


SMALL_RINGS = 5   # RINGS[:5] have rank at most 2
RANK_ONE_RINGS = 4


def _fit(shape: dict, power_needed: int) -> dict:
    """Keep tensor powers of sum-type twists small.

    A sum-type twist doubles the rank with every tensor factor, so it
    comes with rank-one carriers. Cubes use rings of rank at most 2,
    fourth powers use rank-one rings and higher powers drop to invertible
    twists.
    """
    sums = [key for key in ("twist_m", "twist_n") if shape.get(key) in SUM_TWISTS]
    if not sums:
        return shape
    shape["k"] = 1
    if power_needed > 4:
        for key in sums:
            shape[key] = 2
    elif power_needed == 4:
        shape["ring"] = shape["ring"] % RANK_ONE_RINGS
    elif power_needed == 3:
        shape["ring"] = shape["ring"] % SMALL_RINGS
    return shape


def _tuple_json(t: TwistedTuple) -> dict:
    return t.to_json()


# suite: lattice ------------------------------------------------------------


def shape_snf(rng, caps):
    return {"rows": rng.randint(1, 8), "cols": rng.randint(1, 8), "entry": 50}


def prop_snf_round_trip(rng, caps, shape):
    r, c, b = shape["rows"], shape["cols"], shape["entry"]
    A = np.array([[rng.randint(-b, b) for _ in range(c)] for _ in range(r)], dtype=object)
    U, D, V = smith_normal_form(A)
    ok = (U.dot(A).dot(V) == D).all() and abs(determinant(U)) == 1 and abs(determinant(V)) == 1
    diag = [int(D[i, i]) for i in range(min(r, c))]
    ok = ok and all((diag[i + 1] % diag[i] == 0) if diag[i] else diag[i + 1] == 0
                    for i in range(len(diag) - 1))
    return _ok(ok, lambda: {"matrix": A.tolist()})


# suite: coherence ---------------------------------------------------------


def shape_coherence(rng, caps):
    s = _shape_common(rng, caps)
    s["length"] = rng.randint(2, min(4, caps.tuple_len))
    s["k"] = 1 if s["ring"] >= 8 else s["k"]
    return _fit(s, s["length"])


def prop_gamma_coherence(rng, caps, shape):
    inst = setup(rng, caps, shape)
    Ds = [inst.duality(shape["k"]) for _ in range(shape["length"])]
    t = inst.gen.tuple(inst.ctx, Ds)
    maps = all_bracketings(t.twisted_maps())
    ok = all(m.map == maps[0].map for m in maps[1:])
    return _ok(ok, lambda: _tuple_json(t))


def prop_rotation_order(rng, caps, shape):
    inst = setup(rng, caps, shape)
    Ds = [inst.duality(shape["k"]) for _ in range(shape["length"])]
    t = inst.gen.tuple(inst.ctx, Ds)
    r = t
    for _ in range(t.length):
        r = rotate(r)
    ok = all(a == b for a, b in zip(r.maps, t.maps)) and r.carriers == t.carriers
    return _ok(ok, lambda: _tuple_json(t))


# suite: frobenius ---------------------------------------------------------


def shape_frobenius(rng, caps):
    s = _shape_common(rng, caps)
    pairs = [(n, m) for n in range(1, 9) for m in range(1, 9)
             if n * m <= caps.exp_product and n > 1 and m > 1] or [(1, 1)]
    s["n"], s["m"] = rng.choice(pairs)
    s["k"] = 1 if s["ring"] >= 8 else s["k"]
    return _fit(s, s["n"] * s["m"])


def prop_frobenius_iterate(rng, caps, shape):
    inst = setup(rng, caps, shape)
    f = inst.gen.endo(inst.ctx, 1, inst.duality(shape["k"]))
    n, m = shape["n"], shape["m"]
    ok = frobenius_of_frobenius(f, n, m) == frobenius(f, n * m)
    return _ok(ok, lambda: f.to_json())


# suite: additivity --------------------------------------------------------


def shape_additivity(rng, caps):
    s = _shape_common(rng, caps)
    s["n"] = rng.randint(1, 2)
    s["k"] = 1 if s["ring"] >= 8 else s["k"]
    return _fit(s, s["n"] + 1)


def prop_trace_additivity(rng, caps, shape):
    inst = setup(rng, caps, shape)
    n = shape["n"]
    a = inst.gen.endo(inst.ctx, n, inst.duality(shape["k"]))
    b = inst.gen.endo(inst.ctx, n, inst.duality(shape["k"]))
    ses = make_ses(a, b, rng=inst.gen.rng)
    ok = is_exact(ses.inclusion, ses.projection)
    ok = ok and sh.trace(ses.middle) == sh.trace(a) + sh.trace(b)
    return _ok(ok, lambda: {"sub": a.to_json(), "quotient": b.to_json(),
                            "middle": ses.middle.to_json()})


def prop_summand_additivity(rng, caps, shape):
    inst = setup(rng, caps, shape)
    n = shape["n"]
    Da, Db = inst.duality(shape["k"]), inst.duality(shape["k"])
    ds = direct_sum(Da.P, Db.P)
    from .dualizable import sum_duality
    D = sum_duality([Da, Db], ds)
    g = inst.gen.endo(inst.ctx, n, D)
    Mn, Nn = power(inst.ctx.M, n), power(inst.ctx.N, n)
    corners = []
    for i, Di in enumerate((Da, Db)):
        m = compose_all(tensor_maps(ds.projections[i], Nn.identity()), g.map,
                        tensor_maps(Mn.identity(), ds.injections[i]))
        corners.append(TwistedEndo(inst.ctx, n, Di.P, Di, m))
    ok = sh.trace(g) == sh.trace(corners[0]) + sh.trace(corners[1])
    return _ok(ok, lambda: g.to_json())


def prop_sum_trace(rng, caps, shape):
    inst = setup(rng, caps, shape)
    n = shape["n"]
    a = inst.gen.endo(inst.ctx, n, inst.duality(shape["k"]))
    b = inst.gen.endo(inst.ctx, n, inst.duality(shape["k"]))
    s, _, _ = endo_sum(a, b)
    ok = sh.trace(s) == sh.trace(a) + sh.trace(b)
    return _ok(ok, lambda: {"a": a.to_json(), "b": b.to_json()})


# suite: frobenius-ghost ---------------------------------------------------


def shape_frobenius_ghost(rng, caps):
    s = _shape_common(rng, caps)
    pairs = [(n, i) for n in range(2, 9) for i in range(1, 9)
             if n * i <= min(caps.exp_product, caps.trace_bound)] or [(1, 1)]
    s["n"], s["i"] = rng.choice(pairs)
    s["k"] = 1 if s["ring"] >= 8 else s["k"]
    return _fit(s, s["n"] * s["i"])


def prop_frobenius_ghost(rng, caps, shape):
    inst = setup(rng, caps, shape)
    f = inst.gen.endo(inst.ctx, 1, inst.duality(shape["k"]))
    n, i = shape["n"], shape["i"]
    lhs = sh.trace(frobenius(as_exponent_one(frobenius(f, n)), i))
    rhs = sh.phi(inst.ctx.M, inst.ctx.N, n, i, sh.iterated_trace(f, n * i))
    return _ok(lhs == rhs, lambda: f.to_json())


# suite: verschiebung-ghost ------------------------------------------------


def shape_verschiebung_ghost(rng, caps):
    s = _shape_common(rng, caps)
    s["n"] = rng.randint(2, min(4, caps.trace_bound))
    s["bound"] = min(caps.trace_bound, 8)
    s["trivial_side"] = rng.randrange(2)
    s["k"] = 1
    side = "twist_n" if s["trivial_side"] == 0 else "twist_m"
    if s[side] in SUM_TWISTS:
        # sum-type twists double in rank per factor: n = 2, a short sequence
        # and a rank-one ring keep F^bound of the padded tuple affordable
        s["bound"] = min(s["bound"], 4)
        s["n"] = 2
        s["ring"] = s["ring"] % RANK_ONE_RINGS
    return _fit(s, s["bound"])


def prop_verschiebung_ghost(rng, caps, shape):
    left = 0 if shape["trivial_side"] == 0 else None
    right = 0 if shape["trivial_side"] == 1 else None
    inst = setup(rng, caps, shape, twist_left=left, twist_right=right)
    n, bound = shape["n"], shape["bound"]
    f = inst.gen.endo(inst.ctx, n, inst.duality(shape["k"]))
    v = verschiebung(f)
    ok = sh.trace_sequence(v, bound) == sh.verschiebung_trace_sequence(f, n, bound)
    return _ok(ok, lambda: f.to_json())


def prop_verschiebung_vanishing(rng, caps, shape):
    """Iterated traces of V^n at indices prime to n vanish."""
    left = 0 if shape["trivial_side"] == 0 else None
    right = 0 if shape["trivial_side"] == 1 else None
    inst = setup(rng, caps, shape, twist_left=left, twist_right=right)
    n = shape["n"]
    f = inst.gen.endo(inst.ctx, n, inst.duality(shape["k"]))
    v = verschiebung(f)
    ok = all(sh.iterated_trace(v, j).is_zero() for j in range(1, n))
    return _ok(ok, lambda: f.to_json())


# suite: fnvn --------------------------------------------------------------


def shape_fnvn(rng, caps):
    s = _shape_common(rng, caps)
    s["length"] = rng.randint(1, min(4, caps.tuple_len))
    s["k"] = 1
    return _fit(s, s["length"])


def prop_fnvn(rng, caps, shape):
    inst = setup(rng, caps, shape)
    n = shape["length"]
    t = inst.gen.tuple(inst.ctx, [inst.duality(shape["k"]) for _ in range(n)])
    lhs = sh.trace(frobenius(verschiebung_tuple(t), n))
    rhs = sh.transfer(sh.trace(gamma(t)), inst.ctx.M, inst.ctx.N, n, 1)
    return _ok(lhs == rhs, lambda: _tuple_json(t))


def prop_fv_formula(rng, caps, shape):
    inst = setup(rng, caps, shape)
    n = shape["length"]
    t = inst.gen.tuple(inst.ctx, [inst.duality(shape["k"]) for _ in range(n)])
    m = 1 + inst.gen.rng.randrange(3)
    ok = fv_formula(t, m).map == frobenius(verschiebung_tuple(t), m).map
    return _ok(ok, lambda: {"tuple": _tuple_json(t), "m": m})


# suite: equivariance ------------------------------------------------------


def shape_equivariance(rng, caps):
    s = _shape_common(rng, caps)
    s["length"] = rng.randint(2, min(4, caps.tuple_len))
    s["k"] = 1
    return _fit(s, s["length"])


def prop_varsigma_order(rng, caps, shape):
    inst = setup(rng, caps, shape)
    n = shape["length"]
    ok = True
    for M in (inst.ctx.M, inst.ctx.N):
        ok = ok and sh.varsigma(M, n).power(n) == sh.shadow(power(M, n)).identity()
    return _ok(ok, lambda: {"M": inst.ctx.M.to_json(), "N": inst.ctx.N.to_json(), "n": n})


def prop_trace_equivariance(rng, caps, shape):
    inst = setup(rng, caps, shape)
    n = shape["length"]
    t = inst.gen.tuple(inst.ctx, [inst.duality(shape["k"]) for _ in range(n)])
    M, N = inst.ctx.M, inst.ctx.N
    lhs = sh.varsigma(N, n) @ sh.trace(gamma(t))
    rhs = sh.trace(gamma(rotate(t))) @ sh.varsigma(M, n)
    return _ok(lhs == rhs, lambda: _tuple_json(t))


def prop_iterated_trace_equivariant(rng, caps, shape):
    inst = setup(rng, caps, shape)
    n = shape["length"]
    f = inst.gen.endo(inst.ctx, 1, inst.duality(shape["k"]))
    g = sh.iterated_trace(f, n)
    return _ok(sh.is_equivariant(g, inst.ctx.M, inst.ctx.N, n), lambda: f.to_json())


# suite: classical ---------------------------------------------------------


def shape_classical(rng, caps):
    return {"size": rng.randint(1, 5), "entry": 3, "n": rng.randint(2, 4),
            "bound": min(8, caps.trace_bound)}


def _int_matrix(rng, k, b):
    return [[rng.randint(-b, b) for _ in range(k)] for _ in range(k)]


def prop_ghost_ch_traces(rng, caps, shape):
    Z = integers()
    f = _int_matrix(rng, shape["size"], shape["entry"])
    N = shape["bound"]
    via_ch = ghost(ch(Z, f, N)).scalars()
    via_trace = [int(x[0]) for x in ghost_via_traces(Z, f, N)]
    direct = [int(x[0]) for x in matrix_power_traces(Z, f, N)]
    return _ok(via_ch == via_trace == direct, lambda: {"matrix": f, "N": N})


def prop_ch_frobenius_verschiebung(rng, caps, shape):
    Z = integers()
    k = min(shape["size"], 3)
    f = _int_matrix(rng, k, shape["entry"])
    n, N = shape["n"], shape["bound"]
    Ff = [[int(x[0]) for x in row] for row in classical_frobenius(Z, f, n)]
    Vf = [[int(x[0]) for x in row] for row in classical_verschiebung(Z, f, n)]
    w = ch(Z, f, N)
    ok = ghost(ch(Z, Ff, N // n)).scalars() == ghost(witt_frobenius(w, n)).scalars()
    ok = ok and ghost(ch(Z, Vf, N)).scalars() == ghost(witt_verschiebung(w, n)).scalars()
    return _ok(ok, lambda: {"matrix": f, "n": n, "N": N})


def prop_ch_ring_map(rng, caps, shape):
    Z = integers()
    a = rng.randint(1, 3)
    b = rng.randint(1, 3)
    f, g = _int_matrix(rng, a, shape["entry"]), _int_matrix(rng, b, shape["entry"])
    c = [[rng.randint(-3, 3) for _ in range(b)] for _ in range(a)]
    N = shape["bound"]
    tri = [[int(x[0]) for x in row] for row in block_triangular(Z, f, g, c)]
    kr = [[int(x[0]) for x in row] for row in kronecker(Z, f, g)]
    ok = ch(Z, tri, N) == witt_add(ch(Z, f, N), ch(Z, g, N))
    ok = ok and ch(Z, kr, N) == witt_mul(ch(Z, f, N), ch(Z, g, N))
    return _ok(ok, lambda: {"f": f, "g": g, "corner": c, "N": N})


def prop_ch_torsion_base(rng, caps, shape):
    """Over commutative torsion rings: ring-map property and lift independence."""
    A = ring_from_index(rng.randrange(len(COMMUTATIVE_RINGS)), caps, commutative=True)
    a = rng.randint(1, 2)
    b = rng.randint(1, 2)
    f = [[A.random_element(rng) for _ in range(a)] for _ in range(a)]
    g = [[A.random_element(rng) for _ in range(b)] for _ in range(b)]
    N = min(shape["bound"], 6)
    kr = kronecker(A, f, g)
    u, v = ch(A, f, N), ch(A, g, N)
    ok = ch(A, block_sum(A, f, g), N) == witt_add(u, v)
    ok = ok and ch(A, kr, N) == witt_mul(u, v) == witt_mul(u, v, shift=(1, -1, 2))
    ghost_a = ghost(ch(A, f, N)).components
    ok = ok and [tuple(int(x) for x in c) for c in ghost_a] == [
        tuple(int(x) for x in c) for c in matrix_power_traces(A, f, N)]
    return _ok(ok, lambda: {"ring": A.to_json(), "f": [[list(map(int, x)) for x in r] for r in f],
                            "g": [[list(map(int, x)) for x in r] for r in g]})


# suite: duality -----------------------------------------------------------


def shape_duality(rng, caps):
    s = _shape_common(rng, caps, twists=False)
    s["k"] = rng.randint(1, min(3, caps.carrier_k)) if s["ring"] < 6 else rng.randint(1, 2)
    return s


def prop_triangles(rng, caps, shape):
    inst = setup(rng, caps, shape)
    pp = inst.gen.presentation(inst.ctx.R, inst.ctx.S, inst.images, shape["k"])
    D = duality(pp)
    return _ok(D.triangles_hold(), lambda: pp.to_json())


def prop_duality_independence(rng, caps, shape):
    inst = setup(rng, caps, shape)
    k = min(shape["k"], 2)
    pp = inst.gen.presentation(inst.ctx.R, inst.ctx.S, inst.images, k)
    D = duality(pp)
    G = generic_duality(D.P)
    if G is None or not G.triangles_hold():
        return _ok(False, lambda: pp.to_json())
    f = inst.gen.endo(inst.ctx, 1, D)
    ok = sh.trace(f) == sh.trace(TwistedEndo(f.context, 1, f.carrier, G, f.map))
    return _ok(ok, lambda: f.to_json())


# suite: forget-left -------------------------------------------------------


def shape_forget(rng, caps):
    s = _shape_common(rng, caps)
    s["n"] = rng.randint(1, 2)
    s["k"] = 1
    return _fit(s, s["n"] + 1)


def prop_forget_left(rng, caps, shape):
    inst = setup(rng, caps, shape)
    n = shape["n"]
    f = inst.gen.endo(inst.ctx, n, inst.duality(shape["k"]))
    lhs = sh.trace_forget_left(f)
    rhs = sh.trace(f) @ sh.forget_quotient(inst.ctx.M, n)
    return _ok(lhs == rhs, lambda: f.to_json())


# suite: witt --------------------------------------------------------------


def shape_witt(rng, caps):
    return {"ring": rng.randrange(len(COMMUTATIVE_RINGS) + 1), "bound": min(8, caps.trace_bound),
            "n": rng.randint(1, 3)}


def prop_witt_ghost(rng, caps, shape):
    if shape["ring"] == 0:
        A = integers()
    else:
        A = ring_from_index(shape["ring"] - 1, caps, commutative=True)
    N = shape["bound"]
    u = make_witt(A, [A.random_element(rng) for _ in range(N)])
    v = make_witt(A, [A.random_element(rng) for _ in range(N)])
    gu, gv = ghost(u).components, ghost(v).components
    s = ghost(witt_add(u, v)).components
    ok = all(tuple(A.add(x, y)) == tuple(A.reduce(z)) for x, y, z in zip(gu, gv, s))
    p = ghost(witt_mul(u, v)).components
    ok = ok and all(tuple(A.multiply(x, y)) == tuple(A.reduce(z)) for x, y, z in zip(gu, gv, p))
    n = shape["n"]
    gV = ghost(witt_verschiebung(u, n)).components
    for m in range(1, N + 1):
        want = A.times(n, gu[m // n - 1]) if m % n == 0 else A.zero()
        ok = ok and tuple(A.reduce(gV[m - 1])) == tuple(want)
    gF = ghost(witt_frobenius(u, n)).components
    ok = ok and all(tuple(A.reduce(gF[m - 1])) == tuple(A.reduce(gu[m * n - 1]))
                    for m in range(1, N // n + 1))
    return _ok(ok, lambda: {"u": u.to_json(), "v": v.to_json(), "n": n})


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class Property:
    name: str
    shape: Callable
    check: Callable
    theorem: str
    minimum: dict = field(default_factory=dict)


_MIN = {"ring": 0, "pair": 0, "k": 1, "coeff": 0, "twist_m": 0, "twist_n": 0,
        "length": 1, "n": 1, "m": 1, "i": 1, "size": 1, "entry": 0, "rows": 1,
        "cols": 1, "bound": 1, "trivial_side": 0}

SUITES: dict[str, list[Property]] = {
    "lattice": [Property("snf-round-trip", shape_snf, prop_snf_round_trip, "Smith normal form")],
    "coherence": [
        Property("gamma-bracketings", shape_coherence, prop_gamma_coherence,
                 "gamma coherence: all bracketings agree"),
        Property("rotation-order", shape_coherence, prop_rotation_order,
                 "rotating n times is the identity"),
    ],
    "frobenius": [Property("frobenius-iterate", shape_frobenius, prop_frobenius_iterate,
                           "F^n F^m = F^(nm)", {"n": 2, "m": 2})],
    "additivity": [
        Property("exact-sequence", shape_additivity, prop_trace_additivity,
                 "trace is additive on exact sequences"),
        Property("summand-corners", shape_additivity, prop_summand_additivity,
                 "trace of a block endomorphism is the sum of its corners"),
        Property("biproduct", shape_additivity, prop_sum_trace, "trace of a biproduct"),
    ],
    "frobenius-ghost": [Property("trace-frobenius", shape_frobenius_ghost, prop_frobenius_ghost,
                                 "tr_i(F^n f) = Phi(tr_(ni) f)", {"n": 2})],
    "verschiebung-ghost": [
        Property("trace-verschiebung", shape_verschiebung_ghost, prop_verschiebung_ghost,
                 "tr(V^n f) = B_n(tr f)", {"n": 2}),
        Property("vanishing", shape_verschiebung_ghost, prop_verschiebung_vanishing,
                 "tr_j(V^n f) = 0 for 0 < j < n", {"n": 2}),
    ],
    "fnvn": [
        Property("transfer", shape_fnvn, prop_fnvn, "tr(F^n V^n gamma(t)) = transfer"),
        Property("fv-formula", shape_fnvn, prop_fv_formula, "F^m V closed form"),
    ],
    "equivariance": [
        Property("varsigma-order", shape_equivariance, prop_varsigma_order, "varsigma^n = id"),
        Property("rotation", shape_equivariance, prop_trace_equivariance,
                 "varsigma tr(gamma t) = tr(gamma(rotate t)) varsigma"),
        Property("iterated-trace", shape_equivariance, prop_iterated_trace_equivariant,
                 "tr_n(f) is Z/n-equivariant"),
    ],
    "classical": [
        Property("ghost-ch-trace", shape_classical, prop_ghost_ch_traces, "ghost(ch f) = tr_*(f)"),
        Property("ch-frobenius-verschiebung", shape_classical, prop_ch_frobenius_verschiebung,
                 "ch intertwines F^n and V^n"),
        Property("ch-ring-map", shape_classical, prop_ch_ring_map,
                 "ch is additive and multiplicative"),
        Property("ch-torsion-base", shape_classical, prop_ch_torsion_base,
                 "ch over torsion bases"),
    ],
    "duality": [
        Property("triangles", shape_duality, prop_triangles, "triangle identities"),
        Property("independence", shape_duality, prop_duality_independence,
                 "trace independent of duality data"),
    ],
    "forget-left": [Property("forget-left", shape_forget, prop_forget_left,
                             "tr(forgotten f) = tr(f) q")],
    "witt": [Property("ghost-homomorphism", shape_witt, prop_witt_ghost,
                      "ghost is a ring map intertwining F and V")],
}

SUITE_NAMES = list(SUITES)


# ---------------------------------------------------------------------------
# running


def _run_case(prop: Property, seed: int, suite: str, case: int, caps: Caps, shape: dict):
    rng = stream(seed, suite, prop.name, case, "instance")
    try:
        return prop.check(rng, caps, shape)
    except Exception as exc:  # a crash is a failure, reported with its message
        message = f"{type(exc).__name__}: {exc}"
        return Outcome(False, lambda: {"error": message})


def shrink(prop: Property, seed: int, suite: str, case: int, caps: Caps, shape: dict,
           max_steps: int = 40):
    """Greedily lower shape parameters while the case keeps failing."""
    best = dict(shape)
    outcome = _run_case(prop, seed, suite, case, caps, best)
    steps = 0
    improved = True
    while improved and steps < max_steps:
        improved = False
        for key in sorted(best):
            low = prop.minimum.get(key, _MIN.get(key))
            if low is None or not isinstance(best[key], int) or best[key] <= low:
                continue
            trial = dict(best)
            trial[key] -= 1
            steps += 1
            result = _run_case(prop, seed, suite, case, caps, trial)
            if not result.ok:
                best, outcome, improved = trial, result, True
                break
    return best, outcome


@dataclass
class PropertyReport:
    suite: str
    name: str
    theorem: str
    passed: int = 0
    failed: int = 0
    counterexample: Optional[dict] = None
    seconds: float = 0.0

    def to_json(self) -> dict:
        out = {"suite": self.suite, "property": self.name, "theorem": self.theorem,
               "passed": self.passed, "failed": self.failed}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class Report:
    seed: int
    cases: int
    caps: Caps
    properties: list

    @property
    def ok(self) -> bool:
        return all(p.failed == 0 for p in self.properties)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def to_json(self) -> dict:
        """Machine-readable report; wall-clock times are left out so equal seeds
        give byte-identical output."""
        return {"seed": self.seed, "cases": self.cases, "caps": asdict(self.caps),
                "ok": self.ok,
                "properties": [p.to_json() for p in sorted(
                    self.properties, key=lambda p: (p.suite, p.name))]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def human(self) -> str:
        lines = []
        for p in self.properties:
            status = "PASS" if p.failed == 0 else "FAIL"
            lines.append(f"{status} {p.suite}/{p.name}: {p.passed} passed, {p.failed} failed "
                         f"({p.seconds:.2f}s) -- {p.theorem}")
            if p.counterexample is not None:
                shape = p.counterexample.get("shape")
                lines.append(f"     counterexample case {p.counterexample.get('case')} "
                             f"shape {shape}")
                if "error" in p.counterexample.get("instance", {}):
                    lines.append(f"     error: {p.counterexample['instance']['error']}")
        lines.append("all properties passed" if self.ok else "some properties FAILED")
        return "\n".join(lines)


def resolve_suites(name: str) -> list[str]:
    if name == "all":
        return list(SUITE_NAMES)
    names = [n.strip() for n in name.split(",") if n.strip()]
    for n in names:
        if n not in SUITES:
            raise HarnessError(f"unknown suite {n!r}; choose from {', '.join(SUITE_NAMES)} or all")
    return names


def run_property(prop: Property, suite: str, config: SuiteConfig) -> PropertyReport:
    rep = PropertyReport(suite, prop.name, prop.theorem)
    start = time.perf_counter()
    for case in range(config.cases):
        shape = prop.shape(stream(config.seed, suite, prop.name, case, "shape"), config.caps)
        outcome = _run_case(prop, config.seed, suite, case, config.caps, shape)
        if outcome.ok:
            rep.passed += 1
            continue
        rep.failed += 1
        if rep.counterexample is None:
            small, small_outcome = shrink(prop, config.seed, suite, case, config.caps, shape)
            rep.counterexample = {"case": case, "original_shape": shape, "shape": small,
                                  "instance": _jsonable(small_outcome.witness())}
    rep.seconds = time.perf_counter() - start
    return rep


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def run_suite(config: SuiteConfig) -> Report:
    props = []
    for suite in resolve_suites(config.suite):
        for prop in SUITES[suite]:
            props.append(run_property(prop, suite, config))
    return Report(config.seed, config.cases, config.caps, props)
