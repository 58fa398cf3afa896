"""Shadows, the cyclic rotation, bicategorical traces and transfers.

``shadow(M)`` is ``M / (r m - m r)`` for an R-R-bimodule. A trace of a
twisted endomorphism ``f: M^n P -> P N^n`` is a homomorphism
``<M^n> -> <N^n>``, built from the coevaluation, ``f``, the swap
``theta`` and the evaluation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .algebra import integers
from .bimodule import (Bimodule, BimoduleError, BimoduleMap, _apply_pair_ops,
                       associator_inverse, compose_all, forget_left,
                       forget_right, left_unitor, nested_power_iso, power,
                       power_iso, restrict, right_unitor_inverse, ring_bimodule,
                       tensor, tensor_maps)
from .dualizable import DualityData
from .endo import (Context, EndoError, TwistedEndo, as_exponent_one, frobenius,
                   nested_power_iso_inverse)
from .lattice import (FinAbGroup, cokernel_of, freeze, identity, imat, ivec,
                      matmul, reduce_rows, torsion_relations, zeros)


class ShadowError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Shadow:
    source: Bimodule
    group: FinAbGroup
    to_normal: np.ndarray      # group.rank x source.rank
    from_normal: np.ndarray    # source.rank x group.rank

    @property
    def rank(self) -> int:
        return self.group.rank

    @cached_property
    def key(self) -> tuple:
        return (self.source.key, self.group.invariant_factors)

    def project(self, m) -> np.ndarray:
        v = ivec(np.asarray(m, dtype=object).reshape(-1), self.source.rank).reshape(-1, 1)
        return self.group.reduce(matmul(self.to_normal, v)[:, 0])

    def identity(self) -> "ShadowMap":
        return ShadowMap(self, self, identity(self.rank))

    def zero_map(self, target: "Shadow") -> "ShadowMap":
        return ShadowMap(self, target, zeros(target.rank, self.rank))


@dataclass(frozen=True, eq=False)
class ShadowMap:
    source: Shadow
    target: Shadow
    matrix: np.ndarray

    def __post_init__(self):
        m = reduce_rows(imat(self.matrix, (self.target.rank, self.source.rank)),
                        self.target.group.invariant_factors)
        object.__setattr__(self, "matrix", m)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ShadowMap) and self.source.key == other.source.key
                and self.target.key == other.target.key
                and freeze(self.matrix) == freeze(other.matrix))

    def __hash__(self) -> int:
        return hash(freeze(self.matrix))

    def __repr__(self) -> str:
        return f"ShadowMap({self.source.group} -> {self.target.group}, {self.matrix.tolist()})"

    def __matmul__(self, other: "ShadowMap") -> "ShadowMap":
        if other.target.key != self.source.key:
            raise ShadowError("shadow maps are not composable")
        return ShadowMap(other.source, self.target, matmul(self.matrix, other.matrix))

    def __add__(self, other: "ShadowMap") -> "ShadowMap":
        self._same_shape(other)
        return ShadowMap(self.source, self.target, self.matrix + other.matrix)

    def __sub__(self, other: "ShadowMap") -> "ShadowMap":
        self._same_shape(other)
        return ShadowMap(self.source, self.target, self.matrix - other.matrix)

    def _same_shape(self, other: "ShadowMap") -> None:
        if self.source.key != other.source.key or self.target.key != other.target.key:
            raise ShadowError("shadow maps have different shapes")

    def scale(self, k: int) -> "ShadowMap":
        return ShadowMap(self.source, self.target, self.matrix * k)

    def is_zero(self) -> bool:
        return all(int(x) == 0 for x in self.matrix.flat)

    def power(self, k: int) -> "ShadowMap":
        out = self.source.identity()
        for _ in range(k):
            out = self @ out
        return out

    def to_json(self) -> dict:
        return {"source": list(self.source.group.invariant_factors),
                "target": list(self.target.group.invariant_factors),
                "matrix": [[int(x) for x in row] for row in self.matrix]}


_LOCK = threading.Lock()
_SHADOWS: dict = {}


def shadow(M: Bimodule) -> Shadow:
    """Zeroth Hochschild homology ``M / (r m - m r)``."""
    if M.left_ring != M.right_ring:
        raise ShadowError("ring mismatch: shadows need an R-R-bimodule")
    hit = _SHADOWS.get(M.key)
    if hit is not None:
        return hit
    n = M.rank
    rels = torsion_relations(M.factors)
    for u in range(M.left_ring.rank):
        diff = M.left_action[u] - M.right_action[u]
        for j in range(n):
            col = [int(x) for x in diff[:, j]]
            if any(col):
                rels.append(col)
    modulus = 0
    if n and all(M.factors):
        modulus = 1
        for d in M.factors:
            modulus = modulus * d // np.gcd(modulus, d)
        modulus = int(modulus)
    group, pres = cokernel_of(n, rels, modulus)
    sh = Shadow(M, group, pres.to_normal, pres.from_normal)
    with _LOCK:
        _SHADOWS.setdefault(M.key, sh)
    return _SHADOWS[M.key]


def shadow_of_additive(X: Bimodule, Y: Bimodule, matrix: np.ndarray) -> ShadowMap:
    """Map of shadows induced by an additive map that respects commutators."""
    sx, sy = shadow(X), shadow(Y)
    return ShadowMap(sx, sy, matmul(sy.to_normal, matmul(matrix, sx.from_normal)))


def shadow_map(g: BimoduleMap) -> ShadowMap:
    return shadow_of_additive(g.source, g.target, g.matrix)


def theta(X: Bimodule, Y: Bimodule) -> ShadowMap:
    """``<X (x) Y> -> <Y (x) X>`` induced by ``x (x) y -> y (x) x``."""
    Txy, Tyx = tensor(X, Y), tensor(Y, X)
    F3 = Txy.lift().transpose(1, 0, 2).reshape(X.rank * Y.rank, Txy.module.rank)
    swap = matmul(Tyx.to_normal, F3)
    return shadow_of_additive(Txy.module, Tyx.module, swap)


_VARSIGMA: dict = {}


def varsigma(M: Bimodule, n: int) -> ShadowMap:
    """Rotation of ``<M^n>`` moving the first tensor factor to the end."""
    if n < 1:
        raise ShadowError("n must be positive")
    if n == 1:
        return shadow(M).identity()
    # keyed on the building blocks so a patched one is never served stale
    ck = (M.key, n, theta, power_iso)
    hit = _VARSIGMA.get(ck)
    if hit is not None:
        return hit
    rest = power(M, n - 1)
    out = shadow_map(power_iso(M, n - 1, 1)) @ theta(M, rest)
    _VARSIGMA[ck] = out
    return out


def varsigma_power(M: Bimodule, n: int, k: int) -> ShadowMap:
    """``varsigma(M, n)^k`` with negative k read mod n."""
    return varsigma(M, n).power(k % n)


# ---------------------------------------------------------------------------
# traces


def trace(f: TwistedEndo) -> ShadowMap:
    """Bicategorical trace ``<M^n> -> <N^n>``.

    ``<Q> -> <Q (P P*)> -> <(P N^n) P*> -> <P* (P N^n)> -> <N^n>`` with
    ``Q = M^n``.
    """
    D = f.duality
    if D is None:
        raise ShadowError("missing duality data")
    c, n, P = f.context, f.exponent, f.carrier
    Q, Nn = power(c.M, n), power(c.N, n)
    Ps = D.P_star
    into = compose_all(
        tensor_maps(f.map, Ps.identity()),
        associator_inverse(Q, P, Ps),
        tensor_maps(Q.identity(), D.eta),
        right_unitor_inverse(Q),
    )
    out = compose_all(
        left_unitor(Nn),
        tensor_maps(D.eps, Nn.identity()),
        associator_inverse(Ps, P, Nn),
    )
    PN = tensor(P, Nn).module
    return shadow_map(out) @ theta(PN, Ps) @ shadow_map(into)


def iterated_trace(f: TwistedEndo, k: int) -> ShadowMap:
    if f.exponent != 1:
        raise ShadowError("iterated traces need an endomorphism of exponent 1")
    return trace(frobenius(f, k))


def trace_sequence(f: TwistedEndo, bound: int) -> list[ShadowMap]:
    if bound < 1:
        raise ShadowError("bound must be at least 1")
    return [iterated_trace(f, k) for k in range(1, bound + 1)]


def is_equivariant(g: ShadowMap, M: Bimodule, N: Bimodule, length: int, step: int = 1) -> bool:
    """``g`` commutes with ``varsigma^step`` on ``<M^length>`` and ``<N^length>``."""
    return (varsigma_power(N, length, step) @ g) == (g @ varsigma_power(M, length, step))


# ---------------------------------------------------------------------------
# regrouping, transfer, Phi and B


def flatten_shadow_map(g: ShadowMap, M: Bimodule, N: Bimodule, n: int, k: int) -> ShadowMap:
    """``<(M^n)^k> -> <(N^n)^k>`` seen as ``<M^(nk)> -> <N^(nk)>``."""
    if n == 1:
        return g
    return (shadow_map(nested_power_iso(N, n, k)) @ g
            @ shadow_map(nested_power_iso_inverse(M, n, k)))


def phi(M: Bimodule, N: Bimodule, n: int, i: int, g: ShadowMap) -> ShadowMap:
    """``<M^(ni)> -> <N^(ni)>`` re-bracketed as ``<(M^n)^i> -> <(N^n)^i>``."""
    if n == 1:
        return g
    return (shadow_map(nested_power_iso_inverse(N, n, i)) @ g
            @ shadow_map(nested_power_iso(M, n, i)))


def transfer(g: ShadowMap, M: Bimodule, N: Bimodule, n: int, k: int) -> ShadowMap:
    """Sum of the ``n`` rotated conjugates of a ``Z/k``-equivariant map.

    ``g: <(M^n)^k> -> <(N^n)^k>``; the result is a map
    ``<M^(nk)> -> <N^(nk)>``.
    """
    flat = flatten_shadow_map(g, M, N, n, k)
    total = n * k
    if n == 1:
        return flat
    if not is_equivariant(flat, M, N, total, n):
        raise ShadowError("not equivariant: the input does not commute with the rotation")
    out = flat.source.zero_map(flat.target)
    for i in range(n):
        out = out + (varsigma_power(N, total, i) @ flat @ varsigma_power(M, total, -i))
    return out


def zero_shadow_map(M: Bimodule, N: Bimodule, j: int) -> ShadowMap:
    return shadow(power(M, j)).zero_map(shadow(power(N, j)))


def b_map(n: int, seq: Sequence[ShadowMap], M: Bimodule, N: Bimodule,
          bound: Optional[int] = None) -> list[ShadowMap]:
    """Transfers of ``seq[k-1]`` at index ``nk``, zero maps elsewhere.

    ``seq[k-1]`` is a map ``<(M^n)^k> -> <(N^n)^k>``.
    """
    if bound is None:
        bound = n * len(seq)
    if len(seq) < bound // n:
        raise ShadowError("sequence too short for the requested bound")
    out = []
    for j in range(1, bound + 1):
        if j % n:
            out.append(zero_shadow_map(M, N, j))
        else:
            out.append(transfer(seq[j // n - 1], M, N, n, j // n))
    return out


def verschiebung_trace_sequence(f: TwistedEndo, n: int, bound: int) -> list[ShadowMap]:
    """Iterated traces of an exponent-n endomorphism pushed through B_n."""
    if f.exponent != n:
        raise ShadowError("exponent does not match n")
    base = as_exponent_one(f)
    seq = trace_sequence(base, bound // n) if bound >= n else []
    return b_map(n, seq, f.context.M, f.context.N, bound)


# ---------------------------------------------------------------------------
# forgetting the left base ring


def _pair_map(Ts, Tt, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Additive matrix ``Ts -> Tt`` sending ``x (x) y`` to ``Ax (x) By``."""
    img = _apply_pair_ops(Ts.lift(), A, B)
    img = img.reshape(A.shape[0] * B.shape[0], Ts.module.rank)
    return matmul(Tt.to_normal, img)


def _integral_twist(M: Bimodule) -> Bimodule:
    Z = integers()
    R = M.left_ring
    return restrict(M, left=(Z, [R.one]), right=(Z, [R.one]))


def forget_quotient_matrix(M: Bimodule, n: int) -> np.ndarray:
    """Additive quotient ``M_Z^(n, over Z) -> M^(n, over R)``."""
    Mi = _integral_twist(M)
    if n == 1:
        return identity(M.rank)
    inner = forget_quotient_matrix(M, n - 1)
    Ts = tensor(Mi, power(Mi, n - 1))
    Tt = tensor(M, power(M, n - 1))
    return _pair_map(Ts, Tt, identity(M.rank), inner)


def forget_quotient(M: Bimodule, n: int) -> ShadowMap:
    """``<M_Z^n> -> <M^n>`` on shadows."""
    Mi = _integral_twist(M)
    return shadow_of_additive(power(Mi, n), power(M, n), forget_quotient_matrix(M, n))


def forget_left_endo(f: TwistedEndo) -> TwistedEndo:
    """Restrict ``f`` to the integers on the left, with the induced duality."""
    c, n, P, D = f.context, f.exponent, f.carrier, f.duality
    Z = integers()
    R, S = c.R, c.S
    Mi = _integral_twist(c.M)
    Pi, Psi = forget_left(P), forget_right(D.P_star)
    rho = forget_quotient_matrix(c.M, n)
    src = tensor(power(Mi, n), Pi)
    rho_total = _pair_map(src, tensor(power(c.M, n), P), rho, identity(P.rank))
    tgt = tensor(Pi, power(c.N, n)).module
    m = BimoduleMap(src.module, tgt, matmul(f.map.matrix, rho_total))
    eta_col = matmul(D.eta.matrix, np.array(R.one, dtype=object).reshape(-1, 1))
    eta = BimoduleMap(ring_bimodule(Z), tensor(Pi, Psi).module, eta_col)
    pairing = _pair_map(tensor(Psi, Pi), tensor(D.P_star, P), identity(Psi.rank),
                        identity(P.rank))
    eps = BimoduleMap(tensor(Psi, Pi).module, ring_bimodule(S), matmul(D.eps.matrix, pairing))
    Di = DualityData(Pi, Psi, eta, eps)
    return TwistedEndo(Context(Z, S, Mi, c.N), n, Pi, Di, m)


def trace_forget_left(f: TwistedEndo) -> ShadowMap:
    """Trace over the integers of the left-forgotten endomorphism."""
    return trace(forget_left_endo(f))


def clear_caches() -> None:
    _SHADOWS.clear()
    _VARSIGMA.clear()
