"""Finitely generated projective modules and their duality data.

Convention: a presentation ``(R, S, k, e, phi)`` describes the module
``e S^k`` of column vectors. S acts on the right coordinatewise, matrices
over S act on the left, and R acts through ``phi: R -> e Mat_k(S) e``.
The dual is the module ``S^k e`` of row vectors; the pairing is row times
column.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algebra import FinAlgebra
from .bimodule import (Bimodule, BimoduleError, BimoduleMap, DirectSum, _subgroup_of,
                       add, associator, associator_inverse, compose, compose_all,
                       forget_left, hom_lattice, left_unitor, left_unitor_inverse,
                       make_bimodule, right_unitor, right_unitor_inverse,
                       ring_bimodule, tensor, tensor_maps)
from .lattice import (cokernel_of, identity, imat, ivec, lattice_coordinates,
                      matmul, reduce_rows, reduce_vec, solve, torsion_relations,
                      zeros, zvec)


class DualityError(ValueError):
    pass


# ---------------------------------------------------------------------------
# matrices over a ring


def smat(S: FinAlgebra, entries, k: int) -> np.ndarray:
    """A k x k matrix over S as an array of shape (k, k, S.rank)."""
    out = np.zeros((k, k, S.rank), dtype=object)
    rows = list(entries)
    if len(rows) != k:
        raise DualityError("matrix over the ring has the wrong size")
    for i, row in enumerate(rows):
        row = list(row)
        if len(row) != k:
            raise DualityError("matrix over the ring has the wrong size")
        for j, x in enumerate(row):
            out[i, j] = S.reduce(x)
    return out


def smat_mul(S: FinAlgebra, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    k = A.shape[0]
    out = np.zeros((k, k, S.rank), dtype=object)
    for i in range(k):
        for j in range(k):
            acc = S.zero()
            for t in range(k):
                acc = acc + S.multiply(A[i, t], B[t, j])
            out[i, j] = S.reduce(acc)
    return out


def smat_add(S: FinAlgebra, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = A + B
    for i in range(A.shape[0]):
        for j in range(A.shape[1]):
            out[i, j] = S.reduce(out[i, j])
    return out


def smat_identity(S: FinAlgebra, k: int) -> np.ndarray:
    out = np.zeros((k, k, S.rank), dtype=object)
    for i in range(k):
        out[i, i] = S.reduce(S.one)
    return out


def smat_scalar(S: FinAlgebra, s, k: int, slots: Sequence[int]) -> np.ndarray:
    """Diagonal matrix with ``s`` in the given diagonal slots, zero elsewhere."""
    out = np.zeros((k, k, S.rank), dtype=object)
    for i in slots:
        out[i, i] = S.reduce(s)
    return out


def smat_equal(A: np.ndarray, B: np.ndarray) -> bool:
    return A.shape == B.shape and bool(np.array_equal(A, B))


def _left_block(S: FinAlgebra, A: np.ndarray) -> np.ndarray:
    """Additive matrix of ``x -> A x`` on columns ``S^k``."""
    k, n = A.shape[0], S.rank
    out = zeros(k * n, k * n)
    for c in range(k):
        for d in range(k):
            if A[c, d].any():
                out[c * n:(c + 1) * n, d * n:(d + 1) * n] = S.left_matrix(A[c, d])
    return out


def _row_block(S: FinAlgebra, A: np.ndarray) -> np.ndarray:
    """Additive matrix of ``x -> x A`` on rows ``S^k``."""
    k, n = A.shape[0], S.rank
    out = zeros(k * n, k * n)
    for c in range(k):
        for d in range(k):
            if A[c, d].any():
                out[d * n:(d + 1) * n, c * n:(c + 1) * n] = S.right_matrix(A[c, d])
    return out


def _diag_block(k: int, m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    out = zeros(k * n, k * n)
    for c in range(k):
        out[c * n:(c + 1) * n, c * n:(c + 1) * n] = m
    return out


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True, eq=False)
class ProjectivePresentation:
    left_ring: FinAlgebra
    right_ring: FinAlgebra
    k: int
    idempotent: np.ndarray           # (k, k, S.rank)
    left_hom: tuple                   # one (k, k, S.rank) array per R basis element

    def phi(self, r) -> np.ndarray:
        """Image of an arbitrary element of R."""
        S = self.right_ring
        out = np.zeros((self.k, self.k, S.rank), dtype=object)
        for u, x in enumerate(ivec(r, self.left_ring.rank)):
            if x:
                out = out + x * self.left_hom[u]
        for i in range(self.k):
            for j in range(self.k):
                out[i, j] = S.reduce(out[i, j])
        return out

    def to_json(self) -> dict:
        def m(A):
            return [[[int(x) for x in A[i, j]] for j in range(self.k)] for i in range(self.k)]
        return {"left_ring": self.left_ring.to_json(), "right_ring": self.right_ring.to_json(),
                "k": self.k, "idempotent": m(self.idempotent),
                "left_hom": [m(A) for A in self.left_hom]}

    @staticmethod
    def from_json(data: dict) -> "ProjectivePresentation":
        R = FinAlgebra.from_json(data["left_ring"])
        S = FinAlgebra.from_json(data["right_ring"])
        return make_presentation(R, S, data["k"], data["idempotent"], data["left_hom"])


def check_presentation(pp: ProjectivePresentation) -> None:
    R, S, k, e = pp.left_ring, pp.right_ring, pp.k, pp.idempotent
    if not smat_equal(smat_mul(S, e, e), e):
        raise DualityError("idempotent does not square to itself")
    if len(pp.left_hom) != R.rank:
        raise DualityError("one image per basis element of the left ring is required")
    if not smat_equal(pp.phi(R.one), e):
        raise DualityError("left homomorphism does not send 1 to the idempotent")
    for u, A in enumerate(pp.left_hom):
        if not smat_equal(smat_mul(S, e, smat_mul(S, A, e)), A):
            raise DualityError(f"image of basis element {u} is not in the corner e Mat(S) e")
        d = R.factors[u]
        if d:
            zero = smat_scalar(S, S.zero(), k, [])
            scaled = A * d
            for i in range(k):
                for j in range(k):
                    scaled[i, j] = S.reduce(scaled[i, j])
            if not smat_equal(scaled, zero):
                raise DualityError(f"image of basis element {u} is not killed by its order")
    for u in range(R.rank):
        for v in range(R.rank):
            lhs = smat_mul(S, pp.left_hom[u], pp.left_hom[v])
            rhs = pp.phi(R.mul[u, v])
            if not smat_equal(lhs, rhs):
                raise DualityError(f"left homomorphism is not multiplicative at ({u}, {v})")


def make_presentation(R: FinAlgebra, S: FinAlgebra, k: int, idempotent, left_hom,
                      validate: bool = True) -> ProjectivePresentation:
    e = idempotent if isinstance(idempotent, np.ndarray) and idempotent.ndim == 3 else smat(S, idempotent, k)
    hom = tuple(A if isinstance(A, np.ndarray) and A.ndim == 3 else smat(S, A, k) for A in left_hom)
    pp = ProjectivePresentation(R, S, int(k), e, hom)
    if validate:
        check_presentation(pp)
    return pp


def free_presentation(S: FinAlgebra, k: int, R: Optional[FinAlgebra] = None,
                      images: Optional[Sequence] = None) -> ProjectivePresentation:
    """``S^k`` with R acting diagonally through ``images`` (default R = S)."""
    R = S if R is None else R
    if images is None:
        images = [R.basis(u) for u in range(R.rank)]
    hom = [smat_scalar(S, images[u], k, range(k)) for u in range(R.rank)]
    return make_presentation(R, S, k, smat_identity(S, k), hom)


# ---------------------------------------------------------------------------
# materialization


@dataclass(frozen=True, eq=False)
class Materialized:
    module: Bimodule
    inclusion: np.ndarray    # normal coordinates -> coordinates on S^k
    projection: np.ndarray   # coordinates on S^k -> normal coordinates


def _corner(pp: ProjectivePresentation, rows: bool) -> Materialized:
    R, S, k, e = pp.left_ring, pp.right_ring, pp.k, pp.idempotent
    n = k * S.rank
    fs = list(S.factors) * k
    E = _row_block(S, e) if rows else _left_block(S, e)
    rels = torsion_relations(fs)
    for j in range(n):
        col = [int(x) for x in -E[:, j]]
        col[j] += 1
        if any(col):
            rels.append(col)
    group, pres = cokernel_of(n, rels)
    q = pres.to_normal
    incl = reduce_rows(matmul(E, pres.from_normal), fs)
    if rows:
        la = [matmul(q, matmul(_diag_block(k, S.left_matrix(S.basis(v))), incl))
              for v in range(S.rank)]
        ra = [matmul(q, matmul(_row_block(S, pp.left_hom[u]), incl)) for u in range(R.rank)]
        M = make_bimodule(S, R, group.invariant_factors, la, ra, label="P*", validate=False)
    else:
        la = [matmul(q, matmul(_left_block(S, pp.left_hom[u]), incl)) for u in range(R.rank)]
        ra = [matmul(q, matmul(_diag_block(k, S.right_matrix(S.basis(v))), incl))
              for v in range(S.rank)]
        M = make_bimodule(R, S, group.invariant_factors, la, ra, label="P", validate=False)
    return Materialized(M, incl, q)


def materialize(pp: ProjectivePresentation) -> Bimodule:
    """The bimodule ``e S^k``."""
    return _corner(pp, rows=False).module


def materialize_full(pp: ProjectivePresentation) -> Materialized:
    return _corner(pp, rows=False)


# ---------------------------------------------------------------------------
# duality data


@dataclass(frozen=True, eq=False)
class DualityData:
    P: Bimodule
    P_star: Bimodule
    eta: BimoduleMap   # R -> P (x) P*
    eps: BimoduleMap   # P* (x) P -> S

    def triangle_left(self) -> BimoduleMap:
        """``P -> R P -> (P P*) P -> P (P* P) -> P S -> P``."""
        P, Ps = self.P, self.P_star
        return compose_all(
            right_unitor(P),
            tensor_maps(P.identity(), self.eps),
            associator(P, Ps, P),
            tensor_maps(self.eta, P.identity()),
            left_unitor_inverse(P),
        )

    def triangle_right(self) -> BimoduleMap:
        """``P* -> P* R -> P* (P P*) -> (P* P) P* -> S P* -> P*``."""
        P, Ps = self.P, self.P_star
        return compose_all(
            left_unitor(Ps),
            tensor_maps(self.eps, Ps.identity()),
            associator_inverse(Ps, P, Ps),
            tensor_maps(Ps.identity(), self.eta),
            right_unitor_inverse(Ps),
        )

    def triangles_hold(self) -> bool:
        return self.triangle_left().is_identity() and self.triangle_right().is_identity()

    def verify(self) -> "DualityData":
        if not self.triangles_hold():
            raise DualityError("triangle identity fails")
        return self


def duality(pp: ProjectivePresentation) -> DualityData:
    """Duality data from the idempotent presentation."""
    R, S, k, e = pp.left_ring, pp.right_ring, pp.k, pp.idempotent
    col = _corner(pp, rows=False)
    row = _corner(pp, rows=True)
    P, Ps = col.module, row.module
    T = tensor(P, Ps)
    n = S.rank
    z = zvec(T.module.rank)
    for i in range(k):
        c = zvec(k * n)
        r = zvec(k * n)
        for t in range(k):
            c[t * n:(t + 1) * n] = e[t, i]
            r[t * n:(t + 1) * n] = e[i, t]
        pc = matmul(col.projection, c.reshape(-1, 1))[:, 0]
        pr = matmul(row.projection, r.reshape(-1, 1))[:, 0]
        z = z + T.pure(pc, pr)
    z = T.module.reduce(z)
    U = ring_bimodule(R)
    eta_m = zeros(T.module.rank, R.rank)
    for u in range(R.rank):
        eta_m[:, u] = matmul(T.module.left_action[u], z.reshape(-1, 1))[:, 0]
    eta = BimoduleMap(U, T.module, eta_m)
    Te = tensor(Ps, P)
    images = zeros(S.rank, Ps.rank * P.rank)
    for a in range(Ps.rank):
        x = row.inclusion[:, a]
        for b in range(P.rank):
            y = col.inclusion[:, b]
            acc = S.zero()
            for t in range(k):
                acc = acc + S.multiply(x[t * n:(t + 1) * n], y[t * n:(t + 1) * n])
            images[:, a * P.rank + b] = S.reduce(acc)
    eps = Te.map_from_pairs(ring_bimodule(S), images)
    return DualityData(P, Ps, eta, eps).verify()


def generic_duality(P: Bimodule) -> Optional[DualityData]:
    """Duality data found by linear solving, or ``None`` if none exists.

    The dual is ``Hom_S(P, S)`` with evaluation as counit; the unit is the
    unique solution of the two triangle identities, reported with reduced
    coordinates.
    """
    R, S = P.left_ring, P.right_ring
    US = ring_bimodule(S)
    X = forget_left(P)
    Y = forget_left(US)
    L = hom_lattice(X, Y)                    # columns: flattened |S| x |P| matrices
    amb = [S.factors[i] for i in range(S.rank) for _ in range(P.rank)]
    group, pres = _subgroup_of(amb, L)
    incl = reduce_rows(matmul(L, pres.from_normal), amb)
    r = group.rank

    def induced(op):
        out = zeros(r, r)
        for w in range(r):
            F = incl[:, w].reshape(S.rank, P.rank)
            G = op(F).reshape(-1)
            c = lattice_coordinates(L, G)
            if c is None:
                raise DualityError("dual is not closed under the action")
            out[:, w] = matmul(pres.to_normal, c.reshape(-1, 1))[:, 0]
        return out

    la = [induced(lambda F, v=v: matmul(S.left_matrix(S.basis(v)), F)) for v in range(S.rank)]
    ra = [induced(lambda F, u=u: matmul(F, P.left_action[u])) for u in range(R.rank)]
    Ps = make_bimodule(S, R, group.invariant_factors, la, ra, label="P*", validate=False)
    Te = tensor(Ps, P)
    images = zeros(S.rank, Ps.rank * P.rank)
    for a in range(Ps.rank):
        F = incl[:, a].reshape(S.rank, P.rank)
        for b in range(P.rank):
            images[:, a * P.rank + b] = F[:, b]
    eps = Te.map_from_pairs(US, images)

    TP = tensor(P, Ps)
    W = TP.module
    w = W.rank
    T1 = tensor(W, P)
    phi1 = compose_all(right_unitor(P), tensor_maps(P.identity(), eps), associator(P, Ps, P))
    T2 = tensor(Ps, W)
    phi2 = compose_all(left_unitor(Ps), tensor_maps(eps, Ps.identity()),
                       associator_inverse(Ps, P, Ps))
    rows, rhs, mods = [], [], []
    for j in range(P.rank):
        block = matmul(phi1.matrix, T1.to_normal[:, [x * P.rank + j for x in range(w)]])
        for i in range(P.rank):
            rows.append([int(x) for x in block[i]])
            rhs.append(int(i == j))
            mods.append(P.factors[i])
    for kk in range(Ps.rank):
        block = matmul(phi2.matrix, T2.to_normal[:, [kk * w + x for x in range(w)]])
        for i in range(Ps.rank):
            rows.append([int(x) for x in block[i]])
            rhs.append(int(i == kk))
            mods.append(Ps.factors[i])
    for u in range(R.rank):
        diff = W.left_action[u] - W.right_action[u]
        for i in range(w):
            rows.append([int(x) for x in diff[i]])
            rhs.append(0)
            mods.append(W.factors[i])
    if not rows:
        z = zvec(w)
    else:
        sol = solve(imat(rows, (len(rows), w)), rhs, mods)
        if sol.particular is None:
            return None
        z = W.reduce(sol.particular)
    U = ring_bimodule(R)
    eta_m = zeros(w, R.rank)
    for u in range(R.rank):
        eta_m[:, u] = matmul(W.left_action[u], z.reshape(-1, 1))[:, 0]
    eta = BimoduleMap(U, W, eta_m)
    data = DualityData(P, Ps, eta, eps)
    return data if data.triangles_hold() else None


def sum_duality(parts: Sequence[DualityData], total: DirectSum) -> DualityData:
    """Blockwise duality data on a direct sum."""
    from .bimodule import direct_sum
    if len(parts) != len(total.summands):
        raise DualityError("one duality per summand is required")
    dual_sum = direct_sum(*(D.P_star for D in parts))
    X, Xs = total.module, dual_sum.module
    R, S = X.left_ring, X.right_ring
    eta = ring_bimodule(R).zero_map(tensor(X, Xs).module)
    eps = tensor(Xs, X).module.zero_map(ring_bimodule(S))
    for a, D in enumerate(parts):
        eta = add(eta, compose(tensor_maps(total.injections[a], dual_sum.injections[a]), D.eta))
        eps = add(eps, compose(D.eps, tensor_maps(dual_sum.projections[a], total.projections[a])))
    return DualityData(X, Xs, eta, eps)


def unit_duality(R: FinAlgebra) -> DualityData:
    """R over itself: dual R, unit and counit the unitors."""
    U = ring_bimodule(R)
    return DualityData(U, U, left_unitor_inverse(U), left_unitor(U))


# ---------------------------------------------------------------------------
# random presentations


def elementary_conjugator(S: FinAlgebra, k: int, rng: random.Random, steps: int = 3):
    """A random invertible k x k matrix over S together with its inverse."""
    from .algebra import random_unit
    A = smat_identity(S, k)
    Ainv = smat_identity(S, k)
    for _ in range(steps):
        if k > 1 and rng.random() < 0.7:
            i, j = rng.sample(range(k), 2)
            s = S.random_element(rng)
            E = smat_identity(S, k)
            E[i, j] = S.reduce(s)
            Einv = smat_identity(S, k)
            Einv[i, j] = S.neg(s)
        else:
            i = rng.randrange(k)
            unit = random_unit(S, rng)
            E = smat_identity(S, k)
            E[i, i] = unit
            Einv = smat_identity(S, k)
            Einv[i, i] = S.inverse(unit)
        A = smat_mul(S, E, A)
        Ainv = smat_mul(S, Ainv, Einv)
    return A, Ainv


def random_presentation(S: FinAlgebra, k: int, rng: random.Random, R: Optional[FinAlgebra] = None,
                        images: Optional[Sequence] = None, rank: Optional[int] = None,
                        automorphism: Optional[np.ndarray] = None) -> ProjectivePresentation:
    """Conjugate a coordinate idempotent by a random invertible matrix.

    R acts by ``r -> U diag(f(r), .., f(r), 0, ..) U^-1`` where ``f`` sends
    R's basis to ``images`` (default: R = S, optionally composed with an
    automorphism of S).
    """
    R = S if R is None else R
    j = rng.randint(1, k) if rank is None else rank
    slots = list(range(j))
    U, Ui = elementary_conjugator(S, k, rng)
    if images is None:
        if automorphism is None:
            images = [R.basis(u) for u in range(R.rank)]
        else:
            images = [automorphism[:, u] for u in range(R.rank)]
    e = smat_mul(S, U, smat_mul(S, smat_scalar(S, S.one, k, slots), Ui))
    hom = [smat_mul(S, U, smat_mul(S, smat_scalar(S, images[u], k, slots), Ui))
           for u in range(R.rank)]
    return make_presentation(R, S, k, e, hom)
