"""Rings with unit given by structure constants over a FinAbGroup."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional, Sequence

import numpy as np

from .lattice import (FinAbGroup, identity, imat, ivec, matmul, reduce_rows,
                      reduce_vec, solve, zeros, zvec)


class AlgebraError(ValueError):
    pass


def _tensor3(mul, n: int) -> np.ndarray:
    out = np.zeros((n, n, n), dtype=object)
    rows = list(mul)
    if len(rows) != n:
        raise AlgebraError("structure constants have the wrong size")
    for i, row in enumerate(rows):
        row = list(row)
        if len(row) != n:
            raise AlgebraError("structure constants have the wrong size")
        for j, vec in enumerate(row):
            vec = list(vec)
            if len(vec) != n:
                raise AlgebraError("structure constants have the wrong size")
            for k, x in enumerate(vec):
                out[i, j, k] = int(x)
    return out


@dataclass(frozen=True, eq=False)
class FinAlgebra:
    """A ring whose additive group is ``additive``.

    ``mul[i, j]`` holds the coordinates of ``b_i * b_j``; ``one`` holds the
    coordinates of the unit. Build instances through :func:`make_algebra`,
    which checks the ring axioms.
    """

    additive: FinAbGroup
    mul: np.ndarray
    one: np.ndarray
    name: str = field(default="", compare=False)

    @property
    def rank(self) -> int:
        return self.additive.rank

    @property
    def factors(self) -> tuple[int, ...]:
        return self.additive.invariant_factors

    @cached_property
    def key(self) -> tuple:
        return (self.factors, tuple(int(x) for x in self.mul.flat),
                tuple(int(x) for x in self.one))

    def __eq__(self, other) -> bool:
        return isinstance(other, FinAlgebra) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        label = self.name or "FinAlgebra"
        return f"<{label} on {self.additive}>"

    # arithmetic on coordinate vectors -------------------------------------

    def reduce(self, x) -> np.ndarray:
        return reduce_vec(ivec(x, self.rank), self.factors)

    def zero(self) -> np.ndarray:
        return zvec(self.rank)

    def basis(self, i: int) -> np.ndarray:
        v = zvec(self.rank)
        v[i] = 1
        return v

    def add(self, x, y) -> np.ndarray:
        return self.reduce(ivec(x) + ivec(y))

    def sub(self, x, y) -> np.ndarray:
        return self.reduce(ivec(x) - ivec(y))

    def neg(self, x) -> np.ndarray:
        return self.reduce(-ivec(x))

    def times(self, n: int, x) -> np.ndarray:
        return self.reduce(int(n) * ivec(x))

    def multiply(self, x, y) -> np.ndarray:
        x, y = ivec(x, self.rank), ivec(y, self.rank)
        out = zvec(self.rank)
        for i in range(self.rank):
            if x[i]:
                for j in range(self.rank):
                    if y[j]:
                        out = out + (x[i] * y[j]) * self.mul[i, j]
        return self.reduce(out)

    def left_matrix(self, x) -> np.ndarray:
        """Matrix of ``y -> x * y``."""
        x = ivec(x, self.rank)
        out = zeros(self.rank, self.rank)
        for i in range(self.rank):
            if x[i]:
                out = out + x[i] * self.mul[i, :, :].T
        return reduce_rows(out, self.factors)

    def right_matrix(self, x) -> np.ndarray:
        """Matrix of ``y -> y * x``."""
        x = ivec(x, self.rank)
        out = zeros(self.rank, self.rank)
        for j in range(self.rank):
            if x[j]:
                out = out + x[j] * self.mul[:, j, :].T
        return reduce_rows(out, self.factors)

    def element(self, coords) -> "RingElement":
        return RingElement(self, self.reduce(coords))

    def is_commutative(self) -> bool:
        return is_commutative(self)

    def inverse(self, x) -> Optional[np.ndarray]:
        """Two-sided inverse of ``x`` or ``None``."""
        sol = solve(self.left_matrix(x), self.one, self.factors)
        if sol.particular is None:
            return None
        y = self.reduce(sol.particular)
        if not np.array_equal(self.multiply(y, x), self.reduce(self.one)):
            return None
        return y

    def random_element(self, rng: random.Random, bound: int = 0) -> np.ndarray:
        out = []
        for d in self.factors:
            if d:
                out.append(rng.randrange(d))
            else:
                b = bound or 3
                out.append(rng.randint(-b, b))
        return ivec(out, self.rank)

    # serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        n = self.rank
        return {
            "orders": list(self.factors),
            "mul": [[[int(x) for x in self.mul[i, j]] for j in range(n)] for i in range(n)],
            "one": [int(x) for x in self.one],
        }

    @staticmethod
    def from_json(data: dict) -> "FinAlgebra":
        return make_algebra(data["orders"], data["mul"], data["one"])


@dataclass(frozen=True)
class RingElement:
    owner: FinAlgebra
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", self.owner.reduce(self.coords))

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, RingElement):
            if other.owner != self.owner:
                raise AlgebraError("elements of different rings")
            return other.coords
        if isinstance(other, int):
            return self.owner.times(other, self.owner.one)
        return NotImplemented

    def __add__(self, other):
        return RingElement(self.owner, self.owner.add(self.coords, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return RingElement(self.owner, self.owner.sub(self.coords, self._coerce(other)))

    def __neg__(self):
        return RingElement(self.owner, self.owner.neg(self.coords))

    def __mul__(self, other):
        return RingElement(self.owner, self.owner.multiply(self.coords, self._coerce(other)))

    def __rmul__(self, other):
        return RingElement(self.owner, self.owner.multiply(self._coerce(other), self.coords))

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = self._coerce(other)
            return bool(np.array_equal(self.coords, other))
        return (isinstance(other, RingElement) and other.owner == self.owner
                and bool(np.array_equal(self.coords, other.coords)))

    def __hash__(self) -> int:
        return hash((self.owner, tuple(int(x) for x in self.coords)))

    def __repr__(self) -> str:
        return f"RingElement({[int(x) for x in self.coords]})"


def make_algebra(orders: Sequence[int], mul, one, name: str = "") -> FinAlgebra:
    """Validate structure constants and return the ring.

    Raises ``AlgebraError`` with "ill-defined structure constants",
    "not associative" or "unit law fails" naming the offending basis
    elements.
    """
    try:
        additive = FinAbGroup(tuple(int(d) for d in orders))
    except ValueError as exc:
        raise AlgebraError(f"orders must be invariant factors: {exc}") from None
    n = additive.rank
    c = _tensor3(mul, n)
    fs = additive.invariant_factors
    for i in range(n):
        for j in range(n):
            c[i, j] = reduce_vec(c[i, j], fs)
    u = reduce_vec(ivec(one, n), fs)
    for i in range(n):
        for j in range(n):
            for d in (fs[i], fs[j]):
                if d and any(reduce_vec(d * c[i, j], fs)):
                    raise AlgebraError(
                        f"ill-defined structure constants at basis triple ({i}, {j}, -): "
                        f"order {d} does not kill b_{i}*b_{j}")
    # (b_i b_j) b_k = sum_l c[i,j,l] c[l,k,:] and b_i (b_j b_k) = sum_l c[j,k,l] c[i,l,:]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                lhs = zvec(n)
                rhs = zvec(n)
                for l in range(n):
                    if c[i, j, l]:
                        lhs = lhs + c[i, j, l] * c[l, k]
                    if c[j, k, l]:
                        rhs = rhs + c[j, k, l] * c[i, l]
                if not np.array_equal(reduce_vec(lhs, fs), reduce_vec(rhs, fs)):
                    raise AlgebraError(f"not associative at basis triple ({i}, {j}, {k})")
    for i in range(n):
        left = zvec(n)
        right = zvec(n)
        for l in range(n):
            if u[l]:
                left = left + u[l] * c[l, i]
                right = right + u[l] * c[i, l]
        e = zvec(n)
        e[i] = 1
        e = reduce_vec(e, fs)
        if not np.array_equal(reduce_vec(left, fs), e) or not np.array_equal(reduce_vec(right, fs), e):
            raise AlgebraError(f"unit law fails at basis element {i}")
    return FinAlgebra(additive, c, u, name)


def is_commutative(R: FinAlgebra) -> bool:
    fs = R.factors
    for i in range(R.rank):
        for j in range(i + 1, R.rank):
            if not np.array_equal(reduce_vec(R.mul[i, j], fs), reduce_vec(R.mul[j, i], fs)):
                return False
    return True


def opposite(R: FinAlgebra) -> FinAlgebra:
    """The opposite ring (structure constants transposed)."""
    n = R.rank
    mul = [[list(R.mul[j, i]) for j in range(n)] for i in range(n)]
    name = R.name[:-3] if R.name.endswith("^op") else (R.name + "^op" if R.name else "")
    return make_algebra(R.factors, mul, R.one, name)


# ---------------------------------------------------------------------------
# catalog


def _orders(m: int, count: int) -> list[int]:
    return [] if m == 1 else [m] * count


def _cyclic(m: int) -> FinAlgebra:
    if m < 0:
        raise AlgebraError("modulus must be non-negative")
    if m == 1:
        return make_algebra([], [], [], "Z/1")
    return make_algebra([m], [[[1]]], [1], "Z" if m == 0 else f"Z/{m}")


def _matrix(k: int, m: int) -> FinAlgebra:
    if k < 1 or m < 0:
        raise AlgebraError("invalid matrix ring parameters")
    n = k * k
    if m == 1:
        return make_algebra([], [], [], f"M_{k}(Z/1)")
    mul = [[[0] * n for _ in range(n)] for _ in range(n)]
    for a in range(k):
        for b in range(k):
            for c in range(k):
                mul[a * k + b][b * k + c][a * k + c] = 1
    one = [1 if i // k == i % k else 0 for i in range(n)]
    base = "Z" if m == 0 else f"Z/{m}"
    return make_algebra(_orders(m, n), mul, one, f"M_{k}({base})")


def _group_algebra(m: int, k: int) -> FinAlgebra:
    if k < 1 or m < 0:
        raise AlgebraError("invalid group algebra parameters")
    if m == 1:
        return make_algebra([], [], [], f"Z/1[C_{k}]")
    mul = [[[0] * k for _ in range(k)] for _ in range(k)]
    for a in range(k):
        for b in range(k):
            mul[a][b][(a + b) % k] = 1
    one = [1] + [0] * (k - 1)
    base = "Z" if m == 0 else f"Z/{m}"
    return make_algebra(_orders(m, k), mul, one, f"{base}[C_{k}]")


def _upper_triangular(m: int) -> FinAlgebra:
    if m < 0:
        raise AlgebraError("invalid modulus")
    if m == 1:
        return make_algebra([], [], [], "T_2(Z/1)")
    # basis E11, E12, E22
    pos = {(0, 0): 0, (0, 1): 1, (1, 1): 2}
    mul = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    for (a, b), i in pos.items():
        for (c, d), j in pos.items():
            if b == c:
                mul[i][j][pos[(a, d)]] = 1
    base = "Z" if m == 0 else f"Z/{m}"
    return make_algebra(_orders(m, 3), mul, [1, 0, 1], f"T_2({base})")


CATALOG_NAMES = ("cyclic", "matrix", "group-algebra", "upper-triangular", "integers")


def catalog(name: str, *params: int) -> FinAlgebra:
    """Named ring families.

    ``("cyclic", m)``, ``("matrix", k, m)`` for k x k matrices over Z/m,
    ``("group-algebra", m, k)`` for Z/m[C_k], ``("upper-triangular", m)``
    and ``("integers",)``. A modulus of 0 means the integers.
    """
    try:
        if name == "cyclic":
            (m,) = params
            return _cyclic(int(m))
        if name == "matrix":
            k, m = params
            return _matrix(int(k), int(m))
        if name == "group-algebra":
            m, k = params
            return _group_algebra(int(m), int(k))
        if name == "upper-triangular":
            (m,) = params
            return _upper_triangular(int(m))
        if name in ("integers", "integers-truncated"):
            if params:
                raise AlgebraError("integers take no parameters")
            return _cyclic(0)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, AlgebraError):
            raise
        raise AlgebraError(f"invalid parameters for {name}: {params}") from None
    raise AlgebraError(f"unknown ring family {name!r}")


@lru_cache(maxsize=None)
def integers() -> FinAlgebra:
    return _cyclic(0)


# ---------------------------------------------------------------------------
# automorphisms


def is_automorphism(R: FinAlgebra, A: np.ndarray) -> bool:
    """Check that the additive matrix ``A`` is a unital ring automorphism."""
    fs = R.factors
    n = R.rank
    A = reduce_rows(A, fs)
    for j, d in enumerate(fs):
        if d and any(reduce_vec(d * A[:, j], fs)):
            return False
    if not np.array_equal(reduce_vec(matmul(A, R.one.reshape(n, 1))[:, 0], fs), R.reduce(R.one)):
        return False
    for i in range(n):
        for j in range(n):
            lhs = reduce_vec(matmul(A, R.mul[i, j].reshape(n, 1))[:, 0], fs)
            rhs = R.multiply(A[:, i], A[:, j])
            if not np.array_equal(lhs, rhs):
                return False
    return solve(A, R.one, fs).particular is not None and _surjective(A, fs)


def _surjective(A: np.ndarray, fs) -> bool:
    for i in range(A.shape[0]):
        e = zvec(A.shape[0])
        e[i] = 1
        if solve(A, e, fs).particular is None:
            return False
    return True


def inner_automorphism(R: FinAlgebra, unit) -> np.ndarray:
    """Matrix of ``x -> u x u^-1``."""
    inv = R.inverse(unit)
    if inv is None:
        raise AlgebraError("element is not a unit")
    return reduce_rows(matmul(R.left_matrix(unit), R.right_matrix(inv)), R.factors)


def random_unit(R: FinAlgebra, rng: random.Random, tries: int = 64) -> np.ndarray:
    for _ in range(tries):
        x = R.random_element(rng)
        if R.inverse(x) is not None:
            return R.reduce(x)
    return R.reduce(R.one)


def group_power_automorphism(R: FinAlgebra, k: int, a: int) -> np.ndarray:
    """``g -> g^a`` on a group algebra of C_k (``gcd(a, k) = 1``)."""
    A = zeros(k, k)
    for i in range(k):
        A[(i * a) % k, i] = 1
    return reduce_rows(A, R.factors)


def identity_automorphism(R: FinAlgebra) -> np.ndarray:
    return identity(R.rank)
