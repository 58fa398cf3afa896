"""Small shared helpers for the test modules."""

from fractions import Fraction
from itertools import combinations
from math import gcd


def ints(m):
    """Nested numpy/object arrays -> plain int lists, for readable asserts."""
    if hasattr(m, "tolist"):
        m = m.tolist()
    if isinstance(m, list):
        return [ints(x) for x in m]
    return int(m)


def det_fraction(rows):
    """Determinant by Gaussian elimination over the rationals."""
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    sign, out = 1, Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        out *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for k in range(c, n):
                a[r][k] -= f * a[c][k]
    return int(sign * out)


def determinant_divisors(rows):
    """Invariant factors as ratios of gcds of i x i minors."""
    m, n = len(rows), len(rows[0]) if rows else 0
    divisors = [1]
    for size in range(1, min(m, n) + 1):
        g = 0
        for rs in combinations(range(m), size):
            for cs in combinations(range(n), size):
                g = gcd(g, det_fraction([[rows[i][j] for j in cs] for i in rs]))
        divisors.append(g)
    out = []
    for i in range(1, len(divisors)):
        out.append(0 if divisors[i] == 0 else divisors[i] // divisors[i - 1])
    return out
