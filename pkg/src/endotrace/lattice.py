"""Exact integer linear algebra.

Smith normal form, finitely generated abelian groups in invariant-factor
form, cokernels with conversion matrices, and solving linear systems over
the integers and over cyclic quotients.

Matrices crossing module boundaries are numpy arrays of ``dtype=object``
holding Python integers, so arithmetic never overflows. The elimination
kernels work on plain lists of lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np


# ---------------------------------------------------------------------------
# matrix helpers


def imat(data, shape: Optional[tuple[int, int]] = None) -> np.ndarray:
    """Object-dtype integer matrix; ``shape`` disambiguates empty input."""
    if isinstance(data, np.ndarray) and data.dtype == object and data.ndim == 2:
        if shape is not None and data.shape != tuple(shape):
            raise ValueError(f"expected shape {shape}, got {data.shape}")
        return data
    rows = [list(r) for r in data]
    if shape is None:
        if not rows:
            raise ValueError("shape required for an empty matrix")
        shape = (len(rows), len(rows[0]))
    out = np.zeros(shape, dtype=object)
    for i, r in enumerate(rows):
        if len(r) != shape[1]:
            raise ValueError("ragged matrix")
        for j, x in enumerate(r):
            out[i, j] = int(x)
    if len(rows) != shape[0]:
        raise ValueError(f"expected {shape[0]} rows, got {len(rows)}")
    return out


def ivec(data, length: Optional[int] = None) -> np.ndarray:
    vals = [int(x) for x in data]
    if length is not None and len(vals) != length:
        raise ValueError(f"expected length {length}, got {len(vals)}")
    out = np.zeros(len(vals), dtype=object)
    for i, x in enumerate(vals):
        out[i] = x
    return out


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=object)


def zvec(n: int) -> np.ndarray:
    return np.zeros(n, dtype=object)


def identity(n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        out[i, i] = 1
    return out


def unit_vector(n: int, i: int) -> np.ndarray:
    v = zvec(n)
    v[i] = 1
    return v


_SAFE = 2 ** 62
_FLOAT_SAFE = 2 ** 53


def _max_abs(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    return max(int(m.max()), -int(m.min()))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    bound = _max_abs(a) * _max_abs(b) * a.shape[1]
    # floating point is exact (and uses BLAS) while partial sums stay below 2^53
    if bound < _FLOAT_SAFE:
        out = np.dot(a.astype(np.float64), b.astype(np.float64))
        return np.rint(out).astype(np.int64).astype(object)
    if bound < _SAFE:
        return np.dot(a.astype(np.int64), b.astype(np.int64)).astype(object)
    return np.dot(a, b)


def tensordot(a: np.ndarray, b: np.ndarray, axes) -> np.ndarray:
    """Exact ``np.tensordot`` on object arrays, with the same fast paths as matmul."""
    la = [a.shape[i] for i in axes[0]] if isinstance(axes[0], (list, tuple)) else [a.shape[axes[0]]]
    k = 1
    for x in la:
        k *= x
    if a.size and b.size and _max_abs(a) * _max_abs(b) * max(k, 1) < _FLOAT_SAFE:
        out = np.tensordot(a.astype(np.float64), b.astype(np.float64), axes=axes)
        return np.rint(out).astype(np.int64).astype(object)
    return np.tensordot(a, b, axes=axes)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with row index ``(i, k) -> i * b.rows + k``."""
    ra, ca = a.shape
    rb, cb = b.shape
    out = zeros(ra * rb, ca * cb)
    for i in range(ra):
        for j in range(ca):
            x = a[i, j]
            if x:
                out[i * rb:(i + 1) * rb, j * cb:(j + 1) * cb] = x * b
    return out


def to_lists(m: np.ndarray) -> list[list[int]]:
    return [[int(x) for x in row] for row in m]


def freeze(m: np.ndarray) -> tuple:
    """Hashable snapshot of a matrix (shape included)."""
    return (m.shape, tuple(int(x) for x in m.flat))


def reduce_rows(m: np.ndarray, moduli: Sequence[int]) -> np.ndarray:
    """Reduce row ``i`` modulo ``moduli[i]`` (zero means leave alone)."""
    out = m.copy()
    for i, d in enumerate(moduli):
        if d:
            out[i] = out[i] % d
    return out


def reduce_vec(v: np.ndarray, moduli: Sequence[int]) -> np.ndarray:
    out = v.copy()
    for i, d in enumerate(moduli):
        if d:
            out[i] = out[i] % d
    return out


# ---------------------------------------------------------------------------
# Smith normal form


def _find_pivot(a: list[list[int]], t: int, rows: int, cols: int, floor: int = 1):
    """Smallest nonzero entry of the active block, first in row-major order.

    ``floor`` is a known lower bound on that value; hitting it ends the scan.
    """
    best = None
    bval = 0
    for i in range(t, rows):
        row = a[i]
        for j in range(t, cols):
            x = row[j]
            if x:
                ax = x if x > 0 else -x
                if best is None or ax < bval:
                    best, bval = (i, j), ax
                    if ax <= floor:
                        return best
    return best


def _smith(a: list[list[int]], rows: int, cols: int, track_u: bool = True,
           track_v: bool = True):
    """In-place Smith reduction of ``a``.

    Returns ``(U, Uinv, V)`` as lists (``None`` when untracked) with
    ``U @ A @ V`` equal to the reduced ``a``. Pivots are always the
    smallest nonzero absolute value of the active block, first in
    row-major order, so the output is a deterministic function of ``A``.
    """
    u = [[int(i == j) for j in range(rows)] for i in range(rows)] if track_u else None
    ui = [[int(i == j) for j in range(rows)] for i in range(rows)] if track_u else None
    v = [[int(i == j) for j in range(cols)] for i in range(cols)] if track_v else None

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        if u is not None:
            u[i], u[k] = u[k], u[i]
            for r in ui:
                r[i], r[k] = r[k], r[i]

    def swap_cols(j, k):
        for r in a:
            r[j], r[k] = r[k], r[j]
        if v is not None:
            for r in v:
                r[j], r[k] = r[k], r[j]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        rs, rd = a[src], a[dst]
        for c in range(cols):
            if rs[c]:
                rd[c] += q * rs[c]
        if u is not None:
            us, ud = u[src], u[dst]
            for c in range(rows):
                if us[c]:
                    ud[c] += q * us[c]
            for r in ui:
                if r[dst]:
                    r[src] -= q * r[dst]

    def add_col(dst, src, q):
        for r in a:
            if r[src]:
                r[dst] += q * r[src]
        if v is not None:
            for r in v:
                if r[src]:
                    r[dst] += q * r[src]

    t = 0
    lim = min(rows, cols)
    # every entry of the active block is a multiple of the previous pivot
    floor = 1
    while t < lim:
        piv = _find_pivot(a, t, rows, cols, floor)
        if piv is None:
            break
        i, j = piv
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)
        while True:
            p = a[t][t]
            clean = True
            for i in range(t + 1, rows):
                x = a[i][t]
                if x:
                    add_row(i, t, -(x // p))
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, cols):
                x = a[t][j]
                if x:
                    add_col(j, t, -(x // p))
                    if a[t][j]:
                        clean = False
            if not clean:
                # a smaller remainder appeared in the pivot row or column
                best, bval = None, abs(p)
                for i in range(t + 1, rows):
                    x = a[i][t]
                    if x and abs(x) < bval:
                        best, bval = ("r", i), abs(x)
                for j in range(t + 1, cols):
                    x = a[t][j]
                    if x and abs(x) < bval:
                        best, bval = ("c", j), abs(x)
                if best is not None:
                    if best[0] == "r":
                        swap_rows(t, best[1])
                    else:
                        swap_cols(t, best[1])
                continue
            if abs(p) == floor:
                break
            bad = None
            for i in range(t + 1, rows):
                row = a[i]
                for j in range(t + 1, cols):
                    if row[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        floor = abs(a[t][t])
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            if u is not None:
                u[t] = [-x for x in u[t]]
                for r in ui:
                    r[t] = -r[t]
        t += 1
    return u, ui, v


def smith_normal_form(A) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(U, D, V)`` with ``D = U @ A @ V`` diagonal and ``d1 | d2 | ...``.

    ``U`` and ``V`` are unimodular. Zero diagonal entries come last.
    """
    a = imat(A) if not isinstance(A, np.ndarray) else A
    rows, cols = a.shape
    work = to_lists(a)
    u, _, v = _smith(work, rows, cols)
    return imat(u, (rows, rows)), imat(work, (rows, cols)), imat(v, (cols, cols))


def diagonal_of(d: np.ndarray) -> list[int]:
    return [int(d[i, i]) for i in range(min(d.shape))]


# ---------------------------------------------------------------------------
# echelon reduction of relation lattices


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def echelon_basis(vectors: Iterable[Sequence[int]], n: int,
                  modulus: int = 0) -> list[list[int]]:
    """Echelon basis of the lattice spanned by ``vectors`` in ``Z^n``.

    With ``modulus = D > 0`` the caller promises ``D * Z^n`` lies in the
    lattice; entries are then kept reduced mod ``D`` and the multiples
    ``D * e_i`` are folded in at the end. The returned vectors have
    strictly increasing leading positions and positive leading entries.
    """
    piv: list[Optional[list[int]]] = [None] * n

    def insert(vec: list[int], start: int) -> None:
        c = start
        while c < n and not vec[c]:
            c += 1
        while c < n:
            p = piv[c]
            if p is None:
                if vec[c] < 0:
                    vec = [-x for x in vec]
                    if modulus:
                        for k in range(c + 1, n):
                            vec[k] %= modulus
                piv[c] = vec
                return
            a, b = p[c], vec[c]
            if b % a == 0:
                q = b // a
                vec = [x - q * y for x, y in zip(vec, p)]
            else:
                g, x, y = _xgcd(a, b)
                newp = [x * s + y * w for s, w in zip(p, vec)]
                vec = [(a // g) * w - (b // g) * s for s, w in zip(p, vec)]
                if modulus:
                    for k in range(c + 1, n):
                        newp[k] %= modulus
                piv[c] = newp
            if modulus:
                for k in range(c + 1, n):
                    vec[k] %= modulus
            vec[c] = 0
            c += 1
            while c < n and not vec[c]:
                c += 1

    for v in vectors:
        vec = [int(x) for x in v]
        if modulus:
            vec = [x % modulus for x in vec]
        insert(vec, 0)
    if modulus:
        for c in range(n):
            vec = [0] * n
            vec[c] = modulus
            insert(vec, c)
    return [p for p in piv if p is not None]


# ---------------------------------------------------------------------------
# groups


@dataclass(frozen=True)
class FinAbGroup:
    """Finitely generated abelian group ``Z/d1 + ... + Z/dk``.

    Nonzero factors divide their successors, zero factors (copies of Z)
    come last, and unit factors never appear.
    """

    invariant_factors: tuple[int, ...]

    def __post_init__(self):
        fs = tuple(int(d) for d in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", fs)
        seen_zero = False
        for i, d in enumerate(fs):
            if d < 0 or d == 1:
                raise ValueError(f"invalid invariant factor {d}")
            if d == 0:
                seen_zero = True
            elif seen_zero:
                raise ValueError("free factors must come last")
            if i + 1 < len(fs) and d and fs[i + 1] and fs[i + 1] % d:
                raise ValueError(f"{d} does not divide {fs[i + 1]}")

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def is_finite(self) -> bool:
        return 0 not in self.invariant_factors

    @property
    def order(self) -> int:
        if not self.is_finite:
            raise ValueError("infinite group")
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def exponent(self) -> int:
        """Least common multiple of the factors; 0 for infinite groups."""
        if not self.is_finite:
            return 0
        out = 1
        for d in self.invariant_factors:
            out = out * d // gcd(out, d)
        return out

    def reduce(self, v) -> np.ndarray:
        return reduce_vec(ivec(v, self.rank), self.invariant_factors)

    def is_zero(self, v) -> bool:
        return not any(self.reduce(v))

    def elements(self) -> Iterator[np.ndarray]:
        if not self.is_finite:
            raise ValueError("cannot enumerate an infinite group")
        import itertools
        for t in itertools.product(*(range(d) for d in self.invariant_factors)):
            yield ivec(t, self.rank)

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "0"
        return " + ".join("Z" if d == 0 else f"Z/{d}" for d in self.invariant_factors)


def is_invariant_form(factors: Sequence[int]) -> bool:
    try:
        FinAbGroup(tuple(factors))
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class Presentation:
    """Cokernel data: ``Z^n / image(relation_matrix)`` and its normal form.

    ``to_normal`` (rank x n) sends presentation coordinates to normal
    coordinates; ``from_normal`` (n x rank) lifts normal generators back.
    """

    relation_matrix: np.ndarray = field(compare=False)
    to_normal: np.ndarray = field(compare=False)
    from_normal: np.ndarray = field(compare=False)

    @property
    def generators(self) -> int:
        return self.to_normal.shape[1]


def _normal_form(n: int, basis: list[list[int]]) -> tuple[FinAbGroup, np.ndarray, np.ndarray]:
    m = len(basis)
    work = [[basis[j][i] for j in range(m)] for i in range(n)]
    u, ui, _ = _smith(work, n, m, track_u=True, track_v=False)
    diag = [work[i][i] if i < m else 0 for i in range(n)]
    keep = [i for i in range(n) if diag[i] != 1]
    group = FinAbGroup(tuple(diag[i] for i in keep))
    to_n = zeros(len(keep), n)
    from_n = zeros(n, len(keep))
    for r, i in enumerate(keep):
        to_n[r] = u[i]
        for k in range(n):
            from_n[k, r] = ui[k][i]
    to_n = reduce_rows(to_n, group.invariant_factors)
    return group, to_n, from_n


def _eliminate_units(n: int, basis: list[list[int]], modulus: int):
    """Drop generators whose echelon pivot is 1, then Smith-reduce the rest.

    A row ``e_c + sum_{k>c} a_k e_k`` lets ``e_c`` be rewritten in later
    generators; working from the last column back expresses every such
    generator in the surviving ones, and only the remaining relations
    need a Smith form.
    """
    lead = {}
    for row in basis:
        c = next(i for i, x in enumerate(row) if x)
        lead[c] = row
    unit = {c for c, row in lead.items() if row[c] == 1}
    if not unit:
        return _normal_form(n, basis)
    free = [c for c in range(n) if c not in unit]
    pos = {c: i for i, c in enumerate(free)}
    f = len(free)
    expr: list = [None] * n
    for c in range(n - 1, -1, -1):
        if c in pos:
            v = [0] * f
            v[pos[c]] = 1
            expr[c] = v
            continue
        row = lead[c]
        v = [0] * f
        for k in range(c + 1, n):
            a = row[k]
            if a:
                ek = expr[k]
                for t in range(f):
                    if ek[t]:
                        v[t] -= a * ek[t]
        if modulus:
            v = [x % modulus for x in v]
        expr[c] = v
    rest = []
    for c, row in lead.items():
        if c in unit:
            continue
        v = [0] * f
        for k in range(c, n):
            a = row[k]
            if a:
                ek = expr[k]
                for t in range(f):
                    if ek[t]:
                        v[t] += a * ek[t]
        if any(v):
            rest.append(v)
    if modulus:
        for t in range(f):
            w = [0] * f
            w[t] = modulus
            rest.append(w)
        rest = echelon_basis(rest, f, modulus)
    group, small_to, small_from = _normal_form(f, rest)
    E = zeros(f, n)
    for c in range(n):
        for t, x in enumerate(expr[c]):
            if x:
                E[t, c] = x
    incl = zeros(n, f)
    for t, c in enumerate(free):
        incl[c, t] = 1
    to_n = reduce_rows(matmul(small_to, E), group.invariant_factors)
    from_n = matmul(incl, small_from)
    return group, to_n, from_n


def cokernel_of(n: int, relations: Sequence[Sequence[int]], modulus: int = 0
                ) -> tuple[FinAbGroup, Presentation]:
    """Cokernel of the relations (given as vectors in ``Z^n``).

    ``modulus`` may name a ``D`` with ``D * Z^n`` inside the relation
    lattice; it only speeds up the reduction.
    """
    rel = list(relations)
    basis = echelon_basis(rel, n, modulus)
    group, to_n, from_n = _eliminate_units(n, basis, modulus)
    relm = zeros(n, len(rel))
    for j, v in enumerate(rel):
        for i in range(n):
            relm[i, j] = int(v[i])
    return group, Presentation(relm, to_n, from_n)


def cokernel(A, n: Optional[int] = None) -> tuple[FinAbGroup, Presentation]:
    """Cokernel of ``A`` viewed as a map ``Z^cols -> Z^rows``."""
    if isinstance(A, np.ndarray):
        a = A
    else:
        rows = [list(r) for r in A]
        if not rows:
            if n is None:
                raise ValueError("row count needed for an empty relation matrix")
            a = zeros(n, 0)
        else:
            a = imat(rows)
    rows_, cols = a.shape
    rels = [[int(a[i, j]) for i in range(rows_)] for j in range(cols)]
    group, pres = cokernel_of(rows_, rels)
    return group, Presentation(a.copy(), pres.to_normal, pres.from_normal)


def torsion_relations(factors: Sequence[int]) -> list[list[int]]:
    n = len(factors)
    out = []
    for i, d in enumerate(factors):
        if d:
            v = [0] * n
            v[i] = d
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# solving


@dataclass(frozen=True)
class Solution:
    particular: Optional[np.ndarray]
    lattice: np.ndarray  # columns span the homogeneous integer solutions

    @property
    def solvable(self) -> bool:
        return self.particular is not None


def _compress_rows(A: np.ndarray, b: np.ndarray, moduli: Sequence[int]):
    """Replace each block of rows sharing a modulus by an echelon basis.

    Row operations within a block keep the solution set of
    ``A x = b (mod m)``, so only a handful of rows survive.
    """
    n = A.shape[1]
    groups: dict[int, list[int]] = {}
    for i, m in enumerate(moduli):
        groups.setdefault(int(m), []).append(i)
    out_rows, out_mod = [], []
    for m in sorted(groups):
        rows = [[int(x) for x in A[i]] + [int(b[i])] for i in groups[m]]
        if m:
            # adding m * e_k to the row lattice only adds trivial equations
            basis = echelon_basis(rows, n + 1, m)
            basis = [[x % m for x in r] for r in basis]
        else:
            basis = echelon_basis(rows, n + 1, 0)
        for r in basis:
            if any(r[:n]) or (m == 0 and r[n]) or (m and r[n] % m):
                out_rows.append(r)
                out_mod.append(m)
    return out_rows, out_mod


def solve(A, b, moduli: Optional[Sequence[int]] = None) -> Solution:
    """Solve ``A x = b`` with row ``i`` read modulo ``moduli[i]`` (0: over Z).

    Returns a particular integer solution (``None`` if there is none) and
    a matrix whose columns form a basis of the integer solutions of the
    homogeneous system.
    """
    a = A if isinstance(A, np.ndarray) else imat(A)
    rows, n = a.shape
    bv = ivec(b, rows)
    mods = [0] * rows if moduli is None else [int(m) for m in moduli]
    if len(mods) != rows:
        raise ValueError("one modulus per row")
    if any(m < 0 for m in mods):
        raise ValueError("moduli must be non-negative")
    crow, cmod = _compress_rows(a, bv, mods)
    r = len(crow)
    slack = [i for i in range(r) if cmod[i]]
    width = n + len(slack)
    work = [[0] * width for _ in range(r)]
    rhs = []
    for i, row in enumerate(crow):
        work[i][:n] = row[:n]
        rhs.append(row[n])
    for k, i in enumerate(slack):
        work[i][n + k] = cmod[i]
    u, _, v = _smith(work, r, width, track_u=True, track_v=True)
    ub = [sum(u[i][k] * rhs[k] for k in range(r)) for i in range(r)]
    rank = 0
    while rank < min(r, width) and work[rank][rank]:
        rank += 1
    w = [0] * width
    ok = True
    for i in range(r):
        if i < rank:
            d = work[i][i]
            if ub[i] % d:
                ok = False
                break
            w[i] = ub[i] // d
        elif ub[i]:
            ok = False
            break
    particular = None
    if ok:
        particular = ivec([sum(v[k][j] * w[j] for j in range(width)) for k in range(n)], n)
    kernel_vecs = [[v[k][j] for k in range(n)] for j in range(rank, width)]
    basis = echelon_basis(kernel_vecs, n, 0)
    lattice = zeros(n, len(basis))
    for j, vec in enumerate(basis):
        for k in range(n):
            lattice[k, j] = vec[k]
    return Solution(particular, lattice)


def lattice_coordinates(basis: np.ndarray, v) -> Optional[np.ndarray]:
    """Coordinates of ``v`` in an echelon lattice basis (columns), or None."""
    n, m = basis.shape
    rest = [int(x) for x in v]
    coords = [0] * m
    for j in range(m):
        col = basis[:, j]
        lead = next(i for i in range(n) if col[i])
        for i in range(lead):
            if rest[i]:
                return None
        q, r = divmod(rest[lead], int(col[lead]))
        if r:
            return None
        coords[j] = q
        if q:
            for i in range(lead, n):
                rest[i] -= q * int(col[i])
    if any(rest):
        return None
    return ivec(coords, m)


def determinant(A) -> int:
    """Exact determinant by fraction-free elimination (Bareiss)."""
    a = to_lists(A if isinstance(A, np.ndarray) else imat(A))
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
