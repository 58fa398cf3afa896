"""Bimodules over FinAlgebras, their maps, tensor products and biproducts.

Every module is stored on a FinAbGroup in normal form. A tensor product
``M (x)_S N`` is the cokernel of torsion and balancing relations on the
free group with one generator per pair of basis elements; the
:class:`TensorWitness` keeps the conversion matrices, so maps out of a
tensor can be specified on pairs of basis elements.

Iterated tensors are right-associated: ``power(M, 3)`` is
``M (x) (M (x) M)``. Other bracketings are reached through associators.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from typing import Callable, Optional, Sequence

import numpy as np

from .algebra import FinAlgebra, integers
from .lattice import (FinAbGroup, Presentation, cokernel_of, echelon_basis,
                      freeze, identity, imat, ivec, lattice_coordinates,
                      matmul, reduce_rows, reduce_vec, solve, tensordot, torsion_relations,
                      zeros, zvec)


class BimoduleError(ValueError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b) if a and b else 0


# ---------------------------------------------------------------------------
# bimodules and maps


@dataclass(frozen=True, eq=False)
class Bimodule:
    """An R-S-bimodule on ``additive``.

    ``left_action[u]`` is the matrix of ``m -> b_u m`` for the u-th basis
    element of R; ``right_action[v]`` is the matrix of ``m -> m b_v``.
    """

    left_ring: FinAlgebra
    right_ring: FinAlgebra
    additive: FinAbGroup
    left_action: tuple
    right_action: tuple
    label: str = field(default="", compare=False)

    @property
    def rank(self) -> int:
        return self.additive.rank

    @property
    def factors(self) -> tuple[int, ...]:
        return self.additive.invariant_factors

    @cached_property
    def key(self) -> tuple:
        return (self.left_ring.key, self.right_ring.key, self.factors,
                tuple(freeze(m) for m in self.left_action),
                tuple(freeze(m) for m in self.right_action))

    def __eq__(self, other) -> bool:
        return isinstance(other, Bimodule) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"<Bimodule {self.label or ''} on {self.additive}>".replace("  ", " ")

    def reduce(self, v) -> np.ndarray:
        return reduce_vec(ivec(v, self.rank), self.factors)

    def left_matrix(self, r) -> np.ndarray:
        """Action matrix of an arbitrary element of the left ring."""
        r = ivec(r, self.left_ring.rank)
        out = zeros(self.rank, self.rank)
        for u, x in enumerate(r):
            if x:
                out = out + x * self.left_action[u]
        return reduce_rows(out, self.factors)

    def right_matrix(self, s) -> np.ndarray:
        s = ivec(s, self.right_ring.rank)
        out = zeros(self.rank, self.rank)
        for v, x in enumerate(s):
            if x:
                out = out + x * self.right_action[v]
        return reduce_rows(out, self.factors)

    def act_left(self, r, m) -> np.ndarray:
        return self.reduce(matmul(self.left_matrix(r), ivec(m, self.rank).reshape(-1, 1))[:, 0])

    def act_right(self, m, s) -> np.ndarray:
        return self.reduce(matmul(self.right_matrix(s), ivec(m, self.rank).reshape(-1, 1))[:, 0])

    def random_element(self, rng: random.Random, bound: int = 3) -> np.ndarray:
        return ivec([rng.randrange(d) if d else rng.randint(-bound, bound)
                     for d in self.factors], self.rank)

    def identity(self) -> "BimoduleMap":
        return BimoduleMap(self, self, identity(self.rank))

    def zero_map(self, target: "Bimodule") -> "BimoduleMap":
        return BimoduleMap(self, target, zeros(target.rank, self.rank))

    def to_json(self) -> dict:
        return {
            "left_ring": self.left_ring.to_json(),
            "right_ring": self.right_ring.to_json(),
            "orders": list(self.factors),
            "left_action": [[[int(x) for x in row] for row in m] for m in self.left_action],
            "right_action": [[[int(x) for x in row] for row in m] for m in self.right_action],
        }

    @staticmethod
    def from_json(data: dict) -> "Bimodule":
        R = FinAlgebra.from_json(data["left_ring"])
        S = FinAlgebra.from_json(data["right_ring"])
        n = len(data["orders"])
        return make_bimodule(R, S, data["orders"],
                             [imat(m, (n, n)) for m in data["left_action"]],
                             [imat(m, (n, n)) for m in data["right_action"]])


def _descends(m: np.ndarray, src: Sequence[int], tgt: Sequence[int]) -> bool:
    for j, d in enumerate(src):
        if d and any(reduce_vec(d * m[:, j], tgt)):
            return False
    return True


def _eq_mod(a: np.ndarray, b: np.ndarray, fs: Sequence[int]) -> bool:
    return bool(np.array_equal(reduce_rows(a - b, fs), zeros(*a.shape)))


def check_bimodule(M: Bimodule) -> None:
    """Raise ``BimoduleError`` unless the actions are lawful."""
    R, S, fs, n = M.left_ring, M.right_ring, M.factors, M.rank
    if len(M.left_action) != R.rank or len(M.right_action) != S.rank:
        raise BimoduleError("one action matrix per ring basis element is required")
    for mat in (*M.left_action, *M.right_action):
        if mat.shape != (n, n):
            raise BimoduleError("action matrix has the wrong shape")
        if not _descends(mat, fs, fs):
            raise BimoduleError("action matrix does not respect the invariant factors")
    for ring, acts, side in ((R, M.left_action, "left"), (S, M.right_action, "right")):
        one = M.left_matrix(ring.one) if side == "left" else M.right_matrix(ring.one)
        if not _eq_mod(one, identity(n), fs):
            raise BimoduleError(f"{side} action of 1 is not the identity")
        for i in range(ring.rank):
            for j in range(ring.rank):
                prod = ring.mul[i, j]
                if side == "left":
                    lhs = matmul(acts[i], acts[j])
                    rhs = M.left_matrix(prod)
                else:
                    lhs = matmul(acts[j], acts[i])
                    rhs = M.right_matrix(prod)
                if not _eq_mod(lhs, rhs, fs):
                    raise BimoduleError(f"{side} action is not multiplicative at ({i}, {j})")
    for i, a in enumerate(M.left_action):
        for j, b in enumerate(M.right_action):
            if not _eq_mod(matmul(a, b), matmul(b, a), fs):
                raise BimoduleError(f"left and right actions do not commute at ({i}, {j})")


def make_bimodule(R: FinAlgebra, S: FinAlgebra, orders, left_action, right_action,
                  label: str = "", validate: bool = True) -> Bimodule:
    additive = FinAbGroup(tuple(int(d) for d in orders))
    fs = additive.invariant_factors
    n = additive.rank
    la = tuple(reduce_rows(imat(m, (n, n)), fs) for m in left_action)
    ra = tuple(reduce_rows(imat(m, (n, n)), fs) for m in right_action)
    M = Bimodule(R, S, additive, la, ra, label)
    if validate:
        check_bimodule(M)
    return M


@dataclass(frozen=True, eq=False)
class BimoduleMap:
    """A homomorphism of bimodules given on normal coordinates."""

    source: Bimodule
    target: Bimodule
    matrix: np.ndarray

    def __post_init__(self):
        m = imat(self.matrix, (self.target.rank, self.source.rank))
        object.__setattr__(self, "matrix", reduce_rows(m, self.target.factors))

    def __eq__(self, other) -> bool:
        return (isinstance(other, BimoduleMap) and self.source == other.source
                and self.target == other.target
                and bool(np.array_equal(self.matrix, other.matrix)))

    def __hash__(self) -> int:
        return hash((self.source, self.target, freeze(self.matrix)))

    def __repr__(self) -> str:
        return f"BimoduleMap({[[int(x) for x in r] for r in self.matrix]})"

    def __matmul__(self, other: "BimoduleMap") -> "BimoduleMap":
        return compose(self, other)

    def __add__(self, other: "BimoduleMap") -> "BimoduleMap":
        return add(self, other)

    def __sub__(self, other: "BimoduleMap") -> "BimoduleMap":
        return add(self, other.scale(-1))

    def __neg__(self) -> "BimoduleMap":
        return self.scale(-1)

    def scale(self, k: int) -> "BimoduleMap":
        return BimoduleMap(self.source, self.target, int(k) * self.matrix)

    def apply(self, v) -> np.ndarray:
        v = ivec(v, self.source.rank)
        return self.target.reduce(matmul(self.matrix, v.reshape(-1, 1))[:, 0])

    def is_zero(self) -> bool:
        return not self.matrix.any()

    def is_identity(self) -> bool:
        return self.source == self.target and self == self.source.identity()

    def to_json(self) -> dict:
        return {"source": self.source.to_json(), "target": self.target.to_json(),
                "matrix": [[int(x) for x in row] for row in self.matrix]}

    @staticmethod
    def from_json(data: dict) -> "BimoduleMap":
        src = Bimodule.from_json(data["source"])
        tgt = Bimodule.from_json(data["target"])
        return make_map(src, tgt, imat(data["matrix"], (tgt.rank, src.rank)))


def check_map(f: BimoduleMap) -> None:
    X, Y = f.source, f.target
    if X.left_ring != Y.left_ring or X.right_ring != Y.right_ring:
        raise BimoduleError("source and target live over different rings")
    if not _descends(f.matrix, X.factors, Y.factors):
        raise BimoduleError("matrix does not descend to the quotient")
    for a, b in zip(X.left_action, Y.left_action):
        if not _eq_mod(matmul(f.matrix, a), matmul(b, f.matrix), Y.factors):
            raise BimoduleError("map is not left linear")
    for a, b in zip(X.right_action, Y.right_action):
        if not _eq_mod(matmul(f.matrix, a), matmul(b, f.matrix), Y.factors):
            raise BimoduleError("map is not right linear")


def make_map(source: Bimodule, target: Bimodule, matrix, validate: bool = True) -> BimoduleMap:
    f = BimoduleMap(source, target, imat(matrix, (target.rank, source.rank)))
    if validate:
        check_map(f)
    return f


def compose(g: BimoduleMap, f: BimoduleMap) -> BimoduleMap:
    """``g after f``."""
    if f.target != g.source:
        raise BimoduleError("maps are not composable")
    return BimoduleMap(f.source, g.target, matmul(g.matrix, f.matrix))


def compose_all(*maps: BimoduleMap) -> BimoduleMap:
    """``compose_all(h, g, f) = h after g after f``."""
    out = maps[-1]
    for g in reversed(maps[:-1]):
        out = compose(g, out)
    return out


def add(f: BimoduleMap, g: BimoduleMap) -> BimoduleMap:
    if f.source != g.source or f.target != g.target:
        raise BimoduleError("maps have different source or target")
    return BimoduleMap(f.source, f.target, f.matrix + g.matrix)


def invert(f: BimoduleMap) -> BimoduleMap:
    """Inverse of an isomorphism."""
    X, Y = f.source, f.target
    cols = []
    for i in range(Y.rank):
        e = zvec(Y.rank)
        e[i] = 1
        sol = solve(f.matrix, e, Y.factors)
        if sol.particular is None:
            raise BimoduleError("map is not surjective")
        cols.append(X.reduce(sol.particular))
    inv = zeros(X.rank, Y.rank)
    for i, c in enumerate(cols):
        inv[:, i] = c
    g = BimoduleMap(Y, X, inv)
    if not compose(g, f).is_identity():
        raise BimoduleError("map is not injective")
    return g


# ---------------------------------------------------------------------------
# rings as bimodules


_RING_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()


def ring_bimodule(R: FinAlgebra) -> Bimodule:
    """R as an R-R-bimodule."""
    hit = _RING_CACHE.get(R.key)
    if hit is not None:
        return hit
    la = [R.left_matrix(R.basis(u)) for u in range(R.rank)]
    ra = [R.right_matrix(R.basis(u)) for u in range(R.rank)]
    M = make_bimodule(R, R, R.factors, la, ra, label=R.name, validate=False)
    with _CACHE_LOCK:
        _RING_CACHE.setdefault(R.key, M)
    return _RING_CACHE[R.key]


def twisted_ring(R: FinAlgebra, automorphism: np.ndarray, label: str = "") -> Bimodule:
    """R with the right action twisted: ``m . r = m alpha(r)``."""
    ra = [R.right_matrix(automorphism[:, u]) for u in range(R.rank)]
    la = [R.left_matrix(R.basis(u)) for u in range(R.rank)]
    return make_bimodule(R, R, R.factors, la, ra, label=label or f"{R.name}_twisted")


def restrict(M: Bimodule, left: Optional[tuple] = None, right: Optional[tuple] = None) -> Bimodule:
    """Restrict scalars along ring homomorphisms.

    ``left = (R0, images)`` where ``images[u]`` is the element of the old
    left ring that the u-th basis element of ``R0`` maps to; likewise for
    the right side.
    """
    R, la = M.left_ring, M.left_action
    S, ra = M.right_ring, M.right_action
    if left is not None:
        R, imgs = left
        la = tuple(M.left_matrix(x) for x in imgs)
    if right is not None:
        S, imgs = right
        ra = tuple(M.right_matrix(x) for x in imgs)
    return Bimodule(R, S, M.additive, la, ra, M.label)


def forget_left(M: Bimodule) -> Bimodule:
    """Restrict the left action along the unit map from the integers."""
    Z = integers()
    return restrict(M, left=(Z, [M.left_ring.one]))


def forget_right(M: Bimodule) -> Bimodule:
    Z = integers()
    return restrict(M, right=(Z, [M.right_ring.one]))


# ---------------------------------------------------------------------------
# tensor products


@dataclass(frozen=True, eq=False)
class TensorWitness:
    """``left (x) right`` with the presentation on pairs of basis elements.

    Pair ``(i, j)`` has presentation index ``i * right.rank + j``.
    """

    left: Bimodule
    right: Bimodule
    module: Bimodule
    to_normal: np.ndarray
    from_normal: np.ndarray

    def pure(self, m, n) -> np.ndarray:
        """Normal coordinates of ``m (x) n``."""
        m = ivec(m, self.left.rank)
        n = ivec(n, self.right.rank)
        flat = np.outer(m, n).reshape(-1)
        return self.module.reduce(matmul(self.to_normal, flat.reshape(-1, 1))[:, 0])

    def pair_column(self, i: int, j: int) -> np.ndarray:
        return self.to_normal[:, i * self.right.rank + j]

    def lift(self) -> np.ndarray:
        """``from_normal`` reshaped to ``(left.rank, right.rank, module.rank)``."""
        return self.from_normal.reshape(self.left.rank, self.right.rank, self.module.rank)

    def projection3(self) -> np.ndarray:
        """``to_normal`` reshaped to ``(module.rank, left.rank, right.rank)``."""
        return self.to_normal.reshape(self.module.rank, self.left.rank, self.right.rank)

    def map_from_pairs(self, target: Bimodule, images: np.ndarray) -> BimoduleMap:
        """Map out of the tensor given the image of every basis pair.

        ``images`` has one column per pair, in presentation order. The
        caller is responsible for the assignment being balanced.
        """
        return BimoduleMap(self.module, target, matmul(images, self.from_normal))


_TENSOR_CACHE: dict = {}


def _tensor_presentation(M: Bimodule, N: Bimodule):
    a, b = M.rank, N.rank
    n = a * b
    rels: list[list[int]] = []
    modulus = 1
    for i, di in enumerate(M.factors):
        for j, dj in enumerate(N.factors):
            g = gcd(di, dj)
            if g:
                v = [0] * n
                v[i * b + j] = g
                rels.append(v)
            modulus = _lcm(modulus, g) if modulus else 0
    if n == 0:
        modulus = 0
    for k in range(M.right_ring.rank):
        rt = M.right_action[k]
        lt = N.left_action[k]
        for i in range(a):
            col_r = [(x, int(rt[x, i])) for x in range(a) if rt[x, i]]
            for j in range(b):
                v = [0] * n
                for x, c in col_r:
                    v[x * b + j] += c
                for y in range(b):
                    c = lt[y, j]
                    if c:
                        v[i * b + y] -= int(c)
                if any(v):
                    rels.append(v)
    return cokernel_of(n, rels, modulus)


def _apply_pair_ops(F3: np.ndarray, A: Optional[np.ndarray], B: Optional[np.ndarray]) -> np.ndarray:
    """Apply ``A`` on axis 0 and ``B`` on axis 1 of a (a, b, r) array."""
    out = F3
    if A is not None:
        out = tensordot(A, out, axes=([1], [0])) if A.shape[1] else np.zeros(
            (A.shape[0],) + out.shape[1:], dtype=object)
    if B is not None:
        if B.shape[1]:
            out = tensordot(B, out, axes=([1], [1])).transpose(1, 0, 2)
        else:
            out = np.zeros((out.shape[0], B.shape[0], out.shape[2]), dtype=object)
    return out


def tensor(M: Bimodule, N: Bimodule) -> TensorWitness:
    """Balanced tensor product ``M (x)_S N``."""
    if M.right_ring != N.left_ring:
        raise BimoduleError("ring mismatch: right ring of the left factor must be "
                            "the left ring of the right factor")
    ck = (M.key, N.key)
    hit = _TENSOR_CACHE.get(ck)
    if hit is not None:
        return hit
    group, pres = _tensor_presentation(M, N)
    a, b, r = M.rank, N.rank, group.rank
    to_n, from_n = pres.to_normal, pres.from_normal
    F3 = from_n.reshape(a, b, r)
    la = []
    for u in range(M.left_ring.rank):
        img = _apply_pair_ops(F3, M.left_action[u], None).reshape(a * b, r)
        la.append(matmul(to_n, img))
    ra = []
    for v in range(N.right_ring.rank):
        img = _apply_pair_ops(F3, None, N.right_action[v]).reshape(a * b, r)
        ra.append(matmul(to_n, img))
    label = f"({M.label})(x)({N.label})" if (M.label or N.label) else ""
    T = make_bimodule(M.left_ring, N.right_ring, group.invariant_factors, la, ra,
                      label=label, validate=False)
    W = TensorWitness(M, N, T, to_n, from_n)
    with _CACHE_LOCK:
        _TENSOR_CACHE.setdefault(ck, W)
    return _TENSOR_CACHE[ck]


def tensor_maps(f: BimoduleMap, g: BimoduleMap) -> BimoduleMap:
    """``f (x) g`` between the tensor products of sources and targets."""
    Ts = tensor(f.source, g.source)
    Tt = tensor(f.target, g.target)
    F3 = Ts.lift()
    img = _apply_pair_ops(F3, f.matrix, g.matrix)
    img = img.reshape(f.target.rank * g.target.rank, Ts.module.rank)
    return BimoduleMap(Ts.module, Tt.module, matmul(Tt.to_normal, img))


def power(M: Bimodule, n: int) -> Bimodule:
    """Right-associated tensor power; ``power(M, 0)`` is the ring."""
    if n < 0:
        raise BimoduleError("negative tensor power")
    if n == 0:
        return ring_bimodule(M.left_ring)
    out = M
    for _ in range(n - 1):
        out = tensor(M, out).module
    return out


# ---------------------------------------------------------------------------
# structural isomorphisms


def associator(A: Bimodule, B: Bimodule, C: Bimodule) -> BimoduleMap:
    """``(A (x) B) (x) C -> A (x) (B (x) C)``."""
    T1 = tensor(A, B)
    T2 = tensor(T1.module, C)
    T3 = tensor(B, C)
    T4 = tensor(A, T3.module)
    F1 = T1.lift()                 # (a, b, ab)
    P3 = T3.projection3()          # (bc, b, c)
    if B.rank == 0:
        X = np.zeros((A.rank, T3.module.rank, T1.module.rank, C.rank), dtype=object)
    else:
        X = tensordot(F1, P3, axes=([1], [1]))   # (a, ab, bc, c)
        X = X.transpose(0, 2, 1, 3)
    X = X.reshape(A.rank * T3.module.rank, T1.module.rank * C.rank)
    return BimoduleMap(T2.module, T4.module, matmul(T4.to_normal, matmul(X, T2.from_normal)))


def associator_inverse(A: Bimodule, B: Bimodule, C: Bimodule) -> BimoduleMap:
    """``A (x) (B (x) C) -> (A (x) B) (x) C``."""
    T1 = tensor(A, B)
    T2 = tensor(T1.module, C)
    T3 = tensor(B, C)
    T4 = tensor(A, T3.module)
    P1 = T1.projection3()          # (ab, a, b)
    F3 = T3.lift()                 # (b, c, bc)
    if B.rank == 0:
        X = np.zeros((T1.module.rank, C.rank, A.rank, T3.module.rank), dtype=object)
    else:
        X = tensordot(P1, F3, axes=([2], [0]))   # (ab, a, c, bc)
        X = X.transpose(0, 2, 1, 3)
    X = X.reshape(T1.module.rank * C.rank, A.rank * T3.module.rank)
    return BimoduleMap(T4.module, T2.module, matmul(T2.to_normal, matmul(X, T4.from_normal)))


def left_unitor(M: Bimodule) -> BimoduleMap:
    """``R (x) M -> M``."""
    R = M.left_ring
    T = tensor(ring_bimodule(R), M)
    images = zeros(M.rank, R.rank * M.rank)
    for u in range(R.rank):
        images[:, u * M.rank:(u + 1) * M.rank] = M.left_action[u]
    return T.map_from_pairs(M, images)


def left_unitor_inverse(M: Bimodule) -> BimoduleMap:
    R = M.left_ring
    T = tensor(ring_bimodule(R), M)
    mat = zeros(T.module.rank, M.rank)
    for u in range(R.rank):
        c = R.one[u]
        if c:
            mat = mat + c * T.to_normal[:, u * M.rank:(u + 1) * M.rank]
    return BimoduleMap(M, T.module, mat)


def right_unitor(M: Bimodule) -> BimoduleMap:
    """``M (x) S -> M``."""
    S = M.right_ring
    T = tensor(M, ring_bimodule(S))
    images = zeros(M.rank, M.rank * S.rank)
    for i in range(M.rank):
        for v in range(S.rank):
            images[:, i * S.rank + v] = M.right_action[v][:, i]
    return T.map_from_pairs(M, images)


def right_unitor_inverse(M: Bimodule) -> BimoduleMap:
    S = M.right_ring
    T = tensor(M, ring_bimodule(S))
    mat = zeros(T.module.rank, M.rank)
    for i in range(M.rank):
        col = zvec(T.module.rank)
        for v in range(S.rank):
            c = S.one[v]
            if c:
                col = col + c * T.to_normal[:, i * S.rank + v]
        mat[:, i] = col
    return BimoduleMap(M, T.module, mat)


def unitors(M: Bimodule) -> tuple[BimoduleMap, BimoduleMap]:
    return left_unitor(M), right_unitor(M)


_POWER_ISO: dict = {}


def power_iso(M: Bimodule, a: int, b: int) -> BimoduleMap:
    """``power(M, a) (x) power(M, b) -> power(M, a + b)`` for ``a, b >= 1``."""
    if a < 1 or b < 1:
        raise BimoduleError("power_iso needs positive exponents")
    ck = (M.key, a, b)
    hit = _POWER_ISO.get(ck)
    if hit is not None:
        return hit
    if a == 1:
        # power(M, 1 + b) is literally tensor(M, power(M, b))
        out = power(M, 1 + b).identity()
    else:
        Ma1 = power(M, a - 1)
        Mb = power(M, b)
        step1 = associator(M, Ma1, Mb)                   # (M Ma1) Mb -> M (Ma1 Mb)
        step2 = tensor_maps(M.identity(), power_iso(M, a - 1, b))
        out = compose(step2, step1)
    _POWER_ISO[ck] = out
    return out


def power_iso_inverse(M: Bimodule, a: int, b: int) -> BimoduleMap:
    ck = (M.key, a, b, "inv")
    hit = _POWER_ISO.get(ck)
    if hit is not None:
        return hit
    if a == 1:
        out = power(M, 1 + b).identity()
    else:
        Ma1 = power(M, a - 1)
        Mb = power(M, b)
        step1 = tensor_maps(M.identity(), power_iso_inverse(M, a - 1, b))
        step2 = associator_inverse(M, Ma1, Mb)
        out = compose(step2, step1)
    _POWER_ISO[ck] = out
    return out


def nested_power_iso(M: Bimodule, n: int, k: int) -> BimoduleMap:
    """``power(power(M, n), k) -> power(M, n * k)``."""
    ck = (M.key, n, k, "nested")
    hit = _POWER_ISO.get(ck)
    if hit is not None:
        return hit
    Mn = power(M, n)
    if k == 1:
        out = Mn.identity()
    else:
        inner = nested_power_iso(M, n, k - 1)              # Mn^(k-1) -> M^(n(k-1))
        step1 = tensor_maps(Mn.identity(), inner)
        out = compose(power_iso(M, n, n * (k - 1)), step1)
    _POWER_ISO[ck] = out
    return out


def collapse_unit_power(R: FinAlgebra, n: int) -> BimoduleMap:
    """``power(R, n) -> R`` by repeated unitors (identity for n = 1)."""
    U = ring_bimodule(R)
    if n == 1:
        return U.identity()
    if n == 0:
        return U.identity()
    inner = collapse_unit_power(R, n - 1)
    step = tensor_maps(U.identity(), inner)       # R (x) R^(n-1) -> R (x) R
    return compose(left_unitor(U), step)


# ---------------------------------------------------------------------------
# direct sums


@dataclass(frozen=True, eq=False)
class DirectSum:
    summands: tuple
    module: Bimodule
    injections: tuple
    projections: tuple


_SUM_CACHE: dict = {}


def direct_sum(*modules: Bimodule) -> DirectSum:
    """Biproduct of bimodules over a common ring pair, in normal form."""
    if not modules:
        raise BimoduleError("empty direct sum")
    R, S = modules[0].left_ring, modules[0].right_ring
    for X in modules:
        if X.left_ring != R or X.right_ring != S:
            raise BimoduleError("summands live over different rings")
    ck = tuple(X.key for X in modules)
    hit = _SUM_CACHE.get(ck)
    if hit is not None:
        return hit
    factors = [d for X in modules for d in X.factors]
    n = len(factors)
    group, pres = cokernel_of(n, torsion_relations(factors))
    to_n, from_n = pres.to_normal, pres.from_normal
    offsets = []
    o = 0
    for X in modules:
        offsets.append(o)
        o += X.rank

    def block(mats):
        out = zeros(n, n)
        for X, off, m in zip(modules, offsets, mats):
            out[off:off + X.rank, off:off + X.rank] = m
        return out

    la = [matmul(to_n, matmul(block([X.left_action[u] for X in modules]), from_n))
          for u in range(R.rank)]
    ra = [matmul(to_n, matmul(block([X.right_action[v] for X in modules]), from_n))
          for v in range(S.rank)]
    label = " + ".join(X.label for X in modules if X.label)
    total = make_bimodule(R, S, group.invariant_factors, la, ra, label=label, validate=False)
    inj = tuple(BimoduleMap(X, total, to_n[:, off:off + X.rank])
                for X, off in zip(modules, offsets))
    proj = tuple(BimoduleMap(total, X, from_n[off:off + X.rank, :])
                 for X, off in zip(modules, offsets))
    out = DirectSum(tuple(modules), total, inj, proj)
    _SUM_CACHE[ck] = out
    return out


def zero_module(R: FinAlgebra, S: FinAlgebra) -> Bimodule:
    return Bimodule(R, S, FinAbGroup(()), tuple(zeros(0, 0) for _ in range(R.rank)),
                    tuple(zeros(0, 0) for _ in range(S.rank)), "0")


def free_bimodule(R: FinAlgebra, k: int) -> DirectSum:
    """``R^k`` as an R-R-bimodule."""
    return direct_sum(*([ring_bimodule(R)] * k))


def block_map(rows: Sequence[Sequence[BimoduleMap]], src: DirectSum, tgt: DirectSum) -> BimoduleMap:
    """Assemble ``sum_ij inj_i . f_ij . proj_j`` from a block matrix of maps."""
    out = src.module.zero_map(tgt.module)
    for i, row in enumerate(rows):
        for j, f in enumerate(row):
            if f is None:
                continue
            out = add(out, compose(tgt.injections[i], compose(f, src.projections[j])))
    return out


# ---------------------------------------------------------------------------
# kernels and cokernels


@dataclass(frozen=True, eq=False)
class Kernel:
    module: Bimodule
    inclusion: BimoduleMap
    basis: np.ndarray  # columns: echelon lattice basis of integer kernel vectors


def _subgroup_of(factors: Sequence[int], basis: np.ndarray):
    """Normal form of ``lattice / torsion`` for a lattice containing the torsion."""
    n, r = basis.shape
    rels = []
    for v in torsion_relations(factors):
        c = lattice_coordinates(basis, v)
        if c is None:
            raise BimoduleError("lattice does not contain the torsion subgroup")
        rels.append([int(x) for x in c])
    group, pres = cokernel_of(r, rels)
    return group, pres


def kernel(f: BimoduleMap) -> Kernel:
    """Kernel of ``f`` with its inclusion."""
    X, Y = f.source, f.target
    sol = solve(f.matrix, zvec(Y.rank), Y.factors)
    basis = sol.lattice
    group, pres = _subgroup_of(X.factors, basis)
    incl = matmul(basis, pres.from_normal)

    def induced(mat):
        out = zeros(group.rank, group.rank)
        for w in range(group.rank):
            img = matmul(mat, incl[:, w].reshape(-1, 1))[:, 0]
            c = lattice_coordinates(basis, img)
            if c is None:
                raise BimoduleError("action does not preserve the kernel")
            out[:, w] = matmul(pres.to_normal, c.reshape(-1, 1))[:, 0]
        return out

    la = [induced(m) for m in X.left_action]
    ra = [induced(m) for m in X.right_action]
    K = make_bimodule(X.left_ring, X.right_ring, group.invariant_factors, la, ra,
                      label="ker", validate=False)
    return Kernel(K, BimoduleMap(K, X, incl), basis)


@dataclass(frozen=True, eq=False)
class Cokernel:
    module: Bimodule
    projection: BimoduleMap
    section: np.ndarray  # lifts of normal generators


def cokernel_map(f: BimoduleMap) -> Cokernel:
    X, Y = f.source, f.target
    rels = torsion_relations(Y.factors)
    for j in range(X.rank):
        rels.append([int(x) for x in f.matrix[:, j]])
    group, pres = cokernel_of(Y.rank, rels)
    la = [matmul(pres.to_normal, matmul(m, pres.from_normal)) for m in Y.left_action]
    ra = [matmul(pres.to_normal, matmul(m, pres.from_normal)) for m in Y.right_action]
    Q = make_bimodule(Y.left_ring, Y.right_ring, group.invariant_factors, la, ra,
                      label="coker", validate=False)
    return Cokernel(Q, BimoduleMap(Y, Q, pres.to_normal), pres.from_normal)


def factor_through(f: BimoduleMap, incl: BimoduleMap) -> Optional[BimoduleMap]:
    """Solve ``incl . g = f`` for ``g`` (``None`` if ``f`` does not factor)."""
    X, K, Y = f.source, incl.source, incl.target
    cols = []
    for j in range(X.rank):
        sol = solve(incl.matrix, f.matrix[:, j], Y.factors)
        if sol.particular is None:
            return None
        cols.append(sol.particular)
    mat = zeros(K.rank, X.rank)
    for j, c in enumerate(cols):
        mat[:, j] = c
    return BimoduleMap(X, K, mat)


# ---------------------------------------------------------------------------
# exactness on additive groups


def is_injective(f: BimoduleMap) -> bool:
    sol = solve(f.matrix, zvec(f.target.rank), f.target.factors)
    for j in range(sol.lattice.shape[1]):
        if not f.source.additive.is_zero(sol.lattice[:, j]):
            return False
    return True


def is_surjective(f: BimoduleMap) -> bool:
    for i in range(f.target.rank):
        e = zvec(f.target.rank)
        e[i] = 1
        if solve(f.matrix, e, f.target.factors).particular is None:
            return False
    return True


def is_exact_at(f: BimoduleMap, g: BimoduleMap) -> bool:
    """``image(f) == kernel(g)`` for ``f: A -> B``, ``g: B -> C``."""
    if f.target != g.source:
        raise BimoduleError("maps are not composable")
    if not compose(g, f).is_zero():
        return False
    sol = solve(g.matrix, zvec(g.target.rank), g.target.factors)
    for j in range(sol.lattice.shape[1]):
        if solve(f.matrix, sol.lattice[:, j], f.target.factors).particular is None:
            return False
    return True


# ---------------------------------------------------------------------------
# homomorphism lattices and random maps


_HOM_CACHE: dict = {}


def hom_lattice(X: Bimodule, Y: Bimodule) -> np.ndarray:
    """Columns span all integer matrices defining bimodule maps ``X -> Y``."""
    if X.left_ring != Y.left_ring or X.right_ring != Y.right_ring:
        raise BimoduleError("source and target live over different rings")
    ck = (X.key, Y.key)
    hit = _HOM_CACHE.get(ck)
    if hit is not None:
        return hit
    p, q = Y.rank, X.rank
    nvar = p * q
    rows, mods = [], []

    def var(i, j):
        return i * q + j

    for j, d in enumerate(X.factors):
        if d:
            for i in range(p):
                if Y.factors[i] == 0 or d % Y.factors[i]:
                    v = [0] * nvar
                    v[var(i, j)] = d
                    rows.append(v)
                    mods.append(Y.factors[i])
    for ax, ay in list(zip(X.left_action, Y.left_action)) + list(zip(X.right_action, Y.right_action)):
        for i in range(p):
            for j in range(q):
                v = [0] * nvar
                for k in range(p):
                    c = ay[i, k]
                    if c:
                        v[var(k, j)] += int(c)
                for k in range(q):
                    c = ax[k, j]
                    if c:
                        v[var(i, k)] -= int(c)
                if any(v):
                    rows.append(v)
                    mods.append(Y.factors[i])
    if rows:
        sol = solve(imat(rows, (len(rows), nvar)), [0] * len(rows), mods)
        basis = sol.lattice
    else:
        basis = identity(nvar)
    _HOM_CACHE[ck] = basis
    return basis


def hom_basis(X: Bimodule, Y: Bimodule) -> list[BimoduleMap]:
    """Generators of ``Hom(X, Y)`` (nonzero ones only, deduplicated)."""
    basis = hom_lattice(X, Y)
    out, seen = [], set()
    for t in range(basis.shape[1]):
        f = BimoduleMap(X, Y, basis[:, t].reshape(Y.rank, X.rank))
        k = freeze(f.matrix)
        if not f.is_zero() and k not in seen:
            seen.add(k)
            out.append(f)
    return out


def random_map(X: Bimodule, Y: Bimodule, rng: random.Random, coeff: int = 3) -> BimoduleMap:
    """Random integer combination of the Hom lattice basis, coefficients in [-coeff, coeff]."""
    gens = hom_basis(X, Y)
    mat = zeros(Y.rank, X.rank)
    for f in gens:
        c = rng.randint(-coeff, coeff)
        if c:
            mat = mat + c * f.matrix
    return BimoduleMap(X, Y, mat)


def clear_caches() -> None:
    for cache in (_RING_CACHE, _TENSOR_CACHE, _POWER_ISO, _SUM_CACHE, _HOM_CACHE):
        cache.clear()
