"""Endomorphisms of free modules over a commutative ring.

Here a twisted endomorphism is just a square matrix over A. Frobenius is
the matrix power; Verschiebung is the block companion
``(p_0, ..., p_{n-1}) -> (f p_1, p_2, ..., p_{n-1}, p_0)``. The helpers
below also read iterated traces of the general machinery back as
elements of A.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .algebra import FinAlgebra
from .bimodule import collapse_unit_power, invert, ring_bimodule
from .dualizable import free_presentation
from .endo import TwistedEndo, endo_from_carrier_map, untwisted
from .shadow import ShadowMap, shadow, shadow_map, trace_sequence
from .witt import WittError, _as_matrix


def _mat(A: FinAlgebra, f) -> list[list[np.ndarray]]:
    return _as_matrix(A, f)


def _mul(A: FinAlgebra, X, Y):
    k = len(X)
    return [[A.reduce(sum((A.multiply(X[i][t], Y[t][j]) for t in range(k)), A.zero()))
             for j in range(k)] for i in range(k)]


def classical_frobenius(A: FinAlgebra, f, n: int):
    """``f^n``."""
    F = _mat(A, f)
    k = len(F)
    out = [[A.reduce(A.one) if i == j else A.zero() for j in range(k)] for i in range(k)]
    for _ in range(n):
        out = _mul(A, out, F)
    return out


def classical_verschiebung(A: FinAlgebra, f, n: int):
    """Block matrix on ``A^(kn)`` sending ``(p_0..p_{n-1})`` to ``(f p_1, p_2, .., p_0)``."""
    F = _mat(A, f)
    k = len(F)
    size = k * n
    out = [[A.zero() for _ in range(size)] for _ in range(size)]
    if n == 1:
        return [row[:] for row in F]
    for i in range(k):
        for j in range(k):
            out[i][k + j] = F[i][j]
    for b in range(1, n):
        src = (b + 1) % n
        for i in range(k):
            out[b * k + i][src * k + i] = A.reduce(A.one)
    return out


def block_sum(A: FinAlgebra, f, g):
    F, G = _mat(A, f), _mat(A, g)
    a, b = len(F), len(G)
    out = [[A.zero() for _ in range(a + b)] for _ in range(a + b)]
    for i in range(a):
        for j in range(a):
            out[i][j] = F[i][j]
    for i in range(b):
        for j in range(b):
            out[a + i][a + j] = G[i][j]
    return out


def block_triangular(A: FinAlgebra, f, g, corner):
    out = block_sum(A, f, g)
    a = len(out) - len(list(g))
    C = [[A.reduce(x) if not isinstance(x, (int, np.integer)) else A.reduce([int(x)])
          for x in row] for row in corner]
    for i, row in enumerate(C):
        for j, x in enumerate(row):
            out[i][a + j] = x
    return out


def kronecker(A: FinAlgebra, f, g):
    F, G = _mat(A, f), _mat(A, g)
    a, b = len(F), len(G)
    return [[A.multiply(F[i // b][j // b], G[i % b][j % b]) for j in range(a * b)]
            for i in range(a * b)]


def classical_endo(A: FinAlgebra, f) -> TwistedEndo:
    """The matrix as an untwisted endomorphism of the free module ``A^k``."""
    if not A.is_commutative():
        raise WittError("classical endomorphisms need a commutative ring")
    F = _mat(A, f)
    k = len(F)
    return endo_from_carrier_map(untwisted(A, A), free_presentation(A, k),
                                 [[list(x) for x in row] for row in F])


def scalar_of(g: ShadowMap, A: FinAlgebra, k: int) -> np.ndarray:
    """The element of A by which ``g: <A^k> -> <A^k>`` multiplies.

    ``<A^k>`` is identified with ``<A> = A`` by the unitors; the value is
    the image of the unit.
    """
    U = ring_bimodule(A)
    collapse = collapse_unit_power(A, k)
    expand = invert(collapse)
    h = shadow_map(collapse) @ g @ shadow_map(expand)
    sh = shadow(U)
    one = np.array(A.reduce(A.one), dtype=object).reshape(-1, 1)
    img = h.matrix.dot(sh.to_normal.dot(one)) if h.matrix.size else np.zeros((0, 1), dtype=object)
    out = sh.from_normal.dot(img)[:, 0] if sh.rank else np.zeros(A.rank, dtype=object)
    return A.reduce(out)


def ghost_via_traces(A: FinAlgebra, f, N: int) -> list[np.ndarray]:
    """``(tr_1, ..., tr_N)`` of the general trace machinery, read in A."""
    e = classical_endo(A, f)
    return [scalar_of(g, A, k) for k, g in enumerate(trace_sequence(e, N), start=1)]
