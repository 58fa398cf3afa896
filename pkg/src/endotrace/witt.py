"""Truncated big Witt vectors over a commutative base ring.

A Witt vector of length N is the series ``1 + a_1 t + ... + a_N t^N``.
Addition is the series product; the ghost components are the
coefficients of ``t w'(t) / w(t)``. Multiplication and Frobenius are
computed in ghost coordinates over a torsion-free lift of the base and
then reduced.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra import AlgebraError, FinAlgebra, catalog, integers, make_algebra
from .lattice import ivec

DEFAULT_BOUND = 8


class WittError(ValueError):
    pass


Series = list  # list of coordinate vectors, index = power of t


def _elem(A: FinAlgebra, x) -> np.ndarray:
    if isinstance(x, (int, np.integer)):
        if A.rank != 1:
            raise WittError("scalar coefficient given for a ring of rank > 1")
        return A.reduce([int(x)])
    return A.reduce(x)


def _as_tuple(x: np.ndarray) -> tuple:
    return tuple(int(v) for v in x)


@dataclass(frozen=True)
class WittVector:
    base: FinAlgebra
    coeffs: tuple   # coefficient vectors a_1 .. a_N

    @property
    def bound(self) -> int:
        return len(self.coeffs)

    def series(self) -> Series:
        return [self.base.reduce(self.base.one)] + [np.array(c, dtype=object) for c in self.coeffs]

    def scalars(self) -> list:
        """Coefficients as plain integers when the base has rank 1."""
        if self.base.rank == 1:
            return [c[0] for c in self.coeffs]
        return [list(c) for c in self.coeffs]

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "N": self.bound, "coeffs": self.scalars()}

    @staticmethod
    def from_json(data: dict) -> "WittVector":
        A = base_from_json(data["base"])
        N = int(data["N"])
        coeffs = list(data["coeffs"])
        if len(coeffs) != N:
            raise WittError("coefficient count does not match N")
        return make_witt(A, coeffs)


@dataclass(frozen=True)
class GhostVector:
    base: FinAlgebra
    components: tuple

    def scalars(self) -> list:
        if self.base.rank == 1:
            return [c[0] for c in self.components]
        return [list(c) for c in self.components]

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "N": len(self.components),
                "ghost": self.scalars()}


def base_from_json(data) -> FinAlgebra:
    """An algebra JSON object, ``"integers"`` or a catalog call like ``["cyclic", 6]``."""
    if data == "integers":
        return integers()
    if isinstance(data, list):
        return catalog(data[0], *[int(p) for p in data[1:]])
    return FinAlgebra.from_json(data)


def _check_base(A: FinAlgebra) -> None:
    if not A.is_commutative():
        raise WittError("Witt vectors need a commutative base ring")


def make_witt(A: FinAlgebra, coeffs: Sequence) -> WittVector:
    _check_base(A)
    if len(coeffs) < 1:
        raise WittError("bound must be at least 1")
    return WittVector(A, tuple(_as_tuple(_elem(A, c)) for c in coeffs))


def from_series(A: FinAlgebra, s: Series, N: int) -> WittVector:
    if _as_tuple(A.reduce(s[0])) != _as_tuple(A.reduce(A.one)):
        raise WittError("constant term must be 1")
    return WittVector(A, tuple(_as_tuple(A.reduce(s[i])) for i in range(1, N + 1)))


def unit_witt(A: FinAlgebra, N: int = DEFAULT_BOUND) -> WittVector:
    """The series 1 (additive identity)."""
    return make_witt(A, [A.zero()] * N)


def geometric(A: FinAlgebra, a, N: int = DEFAULT_BOUND) -> WittVector:
    """``(1 - a t)^(-1)``."""
    a = _elem(A, a)
    out, p = [], A.reduce(A.one)
    for _ in range(N):
        p = A.multiply(p, a)
        out.append(p)
    return make_witt(A, out)


# ---------------------------------------------------------------------------
# series arithmetic


def series_mul(A: FinAlgebra, u: Series, v: Series, N: int) -> Series:
    out = [A.zero() for _ in range(N + 1)]
    for i in range(min(N, len(u) - 1) + 1):
        if not any(u[i]):
            continue
        for j in range(min(N - i, len(v) - 1) + 1):
            out[i + j] = out[i + j] + A.multiply(u[i], v[j])
    return [A.reduce(x) for x in out]


def series_inverse(A: FinAlgebra, u: Series, N: int) -> Series:
    """Inverse of a series whose constant term is a unit."""
    c0 = A.inverse(u[0])
    if c0 is None:
        raise WittError("constant term is not a unit")
    out = [A.reduce(c0)]
    for n in range(1, N + 1):
        acc = A.zero()
        for j in range(1, min(n, len(u) - 1) + 1):
            acc = acc + A.multiply(u[j], out[n - j])
        out.append(A.reduce(A.multiply(c0, A.neg(acc))))
    return out


def _same(u: WittVector, v: WittVector) -> None:
    if u.base != v.base or u.bound != v.bound:
        raise WittError("Witt vectors have different bases or bounds")


def witt_add(u: WittVector, v: WittVector) -> WittVector:
    _same(u, v)
    A, N = u.base, u.bound
    return from_series(A, series_mul(A, u.series(), v.series(), N), N)


def witt_neg(u: WittVector) -> WittVector:
    A, N = u.base, u.bound
    return from_series(A, series_inverse(A, u.series(), N), N)


# ---------------------------------------------------------------------------
# ghost map


def ghost_components(A: FinAlgebra, a: Sequence[np.ndarray]) -> list[np.ndarray]:
    """``g_n = n a_n - sum_{j<n} a_j g_{n-j}`` with ``a`` indexed from 1."""
    N = len(a)
    g: list[np.ndarray] = []
    for n in range(1, N + 1):
        acc = int(n) * np.array(a[n - 1], dtype=object)
        for j in range(1, n):
            acc = acc - A.multiply(a[j - 1], g[n - j - 1])
        g.append(A.reduce(acc))
    return g


def ghost(w: WittVector) -> GhostVector:
    comps = ghost_components(w.base, [np.array(c, dtype=object) for c in w.coeffs])
    return GhostVector(w.base, tuple(_as_tuple(c) for c in comps))


def _exact_div(x: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(len(x), dtype=object)
    for i, v in enumerate(x):
        q, r = divmod(int(v), n)
        if r:
            raise WittError("integrality violated: ghost inversion needs exact division")
        out[i] = q
    return out


def ghost_inverse(A: FinAlgebra, g: Sequence) -> list[np.ndarray]:
    """Witt coefficients from ghost components over a torsion-free base."""
    if any(A.factors):
        raise WittError("ghost inversion needs a torsion-free base")
    a: list[np.ndarray] = []
    for n in range(1, len(g) + 1):
        acc = np.array(g[n - 1], dtype=object)
        for j in range(1, n):
            acc = acc + A.multiply(a[j - 1], g[n - j - 1])
        a.append(_exact_div(acc, n))
    return a


def from_ghost(A: FinAlgebra, g: Sequence) -> WittVector:
    comps = [np.array(_elem(A, x), dtype=object) for x in g]
    return make_witt(A, ghost_inverse(A, comps))


@lru_cache(maxsize=None)
def _lift_cached(key) -> FinAlgebra:
    factors, mul, one, rank = key
    c = np.array(mul, dtype=object).reshape(rank, rank, rank)
    return make_algebra([0] * rank, c, list(one), name="lift")


def torsion_free_lift(A: FinAlgebra) -> FinAlgebra:
    """Same structure constants with every factor made infinite."""
    if not any(A.factors):
        return A
    try:
        return _lift_cached((A.factors, tuple(int(x) for x in A.mul.flat),
                             tuple(int(x) for x in A.one), A.rank))
    except AlgebraError as exc:
        raise WittError(f"base ring has no torsion-free lift: {exc}") from None


def _lift(w: WittVector, L: FinAlgebra, shift: Sequence[int] = ()) -> list[np.ndarray]:
    """Integer lifts of the coefficients, optionally moved by multiples of the factors."""
    out = []
    for i, c in enumerate(w.coeffs):
        v = np.array(c, dtype=object)
        if shift:
            s = shift[i % len(shift)]
            v = v + np.array([s * d for d in w.base.factors], dtype=object)
        out.append(v)
    return out


def witt_mul(u: WittVector, v: WittVector, shift: Sequence[int] = ()) -> WittVector:
    """Product through ghost coordinates of a torsion-free lift.

    ``shift`` moves the chosen integer lifts; the result must not depend on it.
    """
    _same(u, v)
    A = u.base
    L = torsion_free_lift(A)
    gu = ghost_components(L, _lift(u, L, shift))
    gv = ghost_components(L, _lift(v, L, tuple(-s for s in shift)))
    prod = [L.multiply(x, y) for x, y in zip(gu, gv)]
    coeffs = ghost_inverse(L, prod)
    return make_witt(A, [A.reduce(c) for c in coeffs])


def witt_one(A: FinAlgebra, N: int = DEFAULT_BOUND) -> WittVector:
    """Multiplicative unit ``(1 - t)^(-1)``."""
    return geometric(A, A.one, N)


def witt_frobenius(w: WittVector, n: int) -> WittVector:
    """Characterized by ``ghost(F_n w)_m = ghost(w)_(mn)``; keeps the bound ``N // n``."""
    if n < 1:
        raise WittError("n must be positive")
    A, N = w.base, w.bound
    if N // n < 1:
        raise WittError("bound too small for this Frobenius")
    L = torsion_free_lift(A)
    g = ghost_components(L, _lift(w, L))
    picked = [g[m * n - 1] for m in range(1, N // n + 1)]
    return make_witt(A, [A.reduce(c) for c in ghost_inverse(L, picked)])


def witt_verschiebung(w: WittVector, n: int) -> WittVector:
    """``w(t^n)`` truncated at the same bound."""
    if n < 1:
        raise WittError("n must be positive")
    A, N = w.base, w.bound
    out = [A.zero() for _ in range(N)]
    for i, c in enumerate(w.coeffs, start=1):
        if i * n <= N:
            out[i * n - 1] = np.array(c, dtype=object)
    return make_witt(A, out)


def truncate(w: WittVector, N: int) -> WittVector:
    if N > w.bound:
        raise WittError("cannot extend a truncated Witt vector")
    return WittVector(w.base, w.coeffs[:N])


# ---------------------------------------------------------------------------
# characteristic series


def _as_matrix(A: FinAlgebra, f) -> list[list[np.ndarray]]:
    rows = [list(r) for r in f]
    k = len(rows)
    if any(len(r) != k for r in rows):
        raise WittError("matrix must be square")
    return [[_elem(A, x) for x in r] for r in rows]


def ch(A: FinAlgebra, f, N: int = DEFAULT_BOUND) -> WittVector:
    """``det(I - t f)^(-1)`` truncated at ``t^N``.

    The determinant is taken by Gaussian elimination over power series;
    every pivot has constant term 1, hence is a unit.
    """
    _check_base(A)
    F = _as_matrix(A, f)
    k = len(F)
    one, zero = A.reduce(A.one), A.zero()
    # entries of I - t f as series of length N + 1
    M = [[[one if i == j else zero, A.neg(F[i][j])] + [zero] * (N - 1)
          for j in range(k)] for i in range(k)]
    det = [one] + [zero] * N
    for p in range(k):
        piv = M[p][p]
        det = series_mul(A, det, piv, N)
        inv = series_inverse(A, piv, N)
        for r in range(p + 1, k):
            if all(not any(x) for x in M[r][p]):
                continue
            factor = series_mul(A, M[r][p], inv, N)
            for c in range(p, k):
                prod = series_mul(A, factor, M[p][c], N)
                M[r][c] = [A.sub(x, y) for x, y in zip(M[r][c], prod)]
    return from_series(A, series_inverse(A, det, N), N)


def matrix_power_traces(A: FinAlgebra, f, N: int) -> list[np.ndarray]:
    """``tr(f), tr(f^2), ..., tr(f^N)`` by repeated multiplication."""
    F = _as_matrix(A, f)
    k = len(F)
    cur = [row[:] for row in F]
    out = []
    for _ in range(N):
        acc = A.zero()
        for i in range(k):
            acc = acc + cur[i][i]
        out.append(A.reduce(acc))
        cur = [[A.reduce(sum((A.multiply(cur[i][t], F[t][j]) for t in range(k)), A.zero()))
                for j in range(k)] for i in range(k)]
    return out
