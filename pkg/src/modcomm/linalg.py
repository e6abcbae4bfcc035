"""Small exact linear algebra over tower fields and over the integers.

Matrices are lists of rows.  Entries may be ints, Fractions or QuadElems; the
only requirement is exact field arithmetic and exact comparison with zero.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Optional, Sequence

Matrix = list[list]


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    cols = list(zip(*B))
    return [[sum((x * y for x, y in zip(row, col)), 0) for col in cols] for row in A]


def matvec(A: Sequence[Sequence], v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v)), 0) for row in A]


def trace(A: Sequence[Sequence]) -> int:
    return sum(A[i][i] for i in range(len(A)))


def rref(rows: Sequence[Sequence], pivot_order: Optional[Sequence[int]] = None):
    """Reduced row echelon form.

    Returns (R, pivots) where pivots lists the pivot column of each nonzero
    row of R.  Columns are tried in ``pivot_order`` (default left to right).
    """
    R = [list(r) for r in rows]
    if not R:
        return R, []
    ncols = len(R[0])
    order = list(range(ncols)) if pivot_order is None else list(pivot_order)
    pivots: list[int] = []
    top = 0
    for col in order:
        if top == len(R):
            break
        piv = next((i for i in range(top, len(R)) if R[i][col] != 0), None)
        if piv is None:
            continue
        R[top], R[piv] = R[piv], R[top]
        inv = 1 / Fraction(R[top][col]) if isinstance(R[top][col], int) else 1 / R[top][col]
        R[top] = [x * inv for x in R[top]]
        for i in range(len(R)):
            if i != top and R[i][col] != 0:
                f = R[i][col]
                R[i] = [x - f * y for x, y in zip(R[i], R[top])]
        pivots.append(col)
        top += 1
    return R[:top], pivots


def nullspace(rows: Sequence[Sequence], ncols: Optional[int] = None,
              pivot_order: Optional[Sequence[int]] = None) -> list[list]:
    """Basis of {v : rows * v = 0}, one vector per free column.

    The free columns are taken in increasing order and each basis vector has
    its own free column set to 1 and the other free columns set to 0.
    """
    if not rows:
        n = ncols or 0
        return [[int(i == j) for i in range(n)] for j in range(n)]
    n = len(rows[0])
    R, pivots = rref(rows, pivot_order)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def det(A: Sequence[Sequence]):
    """Determinant by fraction-free (Bareiss) elimination for integer input,
    plain elimination otherwise."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(r) for r in A]
    if all(isinstance(x, int) for r in M for x in r):
        sgn, prev = 1, 1
        for k in range(n - 1):
            if M[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
                if swap is None:
                    return 0
                M[k], M[swap] = M[swap], M[k]
                sgn = -sgn
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            prev = M[k][k]
        return sgn * M[n - 1][n - 1]
    result = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if M[i][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            result = -result
        result = result * M[k][k]
        for i in range(k + 1, n):
            f = M[i][k] / M[k][k]
            M[i] = [x - f * y for x, y in zip(M[i], M[k])]
    return result


def primitive(v: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to a primitive integer vector with the same direction."""
    fr = [Fraction(x) for x in v]
    den = lcm(*(x.denominator for x in fr)) if fr else 1
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return [x // g for x in ints] if g else ints


def integer_solve(gens: Sequence[Sequence[int]], target: Sequence[int]) -> Optional[list[int]]:
    """Integer coefficients c with sum c_j gens[j] = target, or None.

    Uses a Hermite-style row reduction of the generator list while tracking
    the unimodular transformation.
    """
    m = len(gens)
    n = len(target)
    rows = [list(g) for g in gens]
    trans = identity(m)
    pivots: list[tuple[int, int]] = []
    top = 0
    for col in range(n):
        # Euclid on column col among rows top..m-1
        while True:
            nz = [i for i in range(top, m) if rows[i][col] != 0]
            if len(nz) <= 1:
                break
            i0 = min(nz, key=lambda i: abs(rows[i][col]))
            for i in nz:
                if i != i0:
                    f = rows[i][col] // rows[i0][col]
                    rows[i] = [x - f * y for x, y in zip(rows[i], rows[i0])]
                    trans[i] = [x - f * y for x, y in zip(trans[i], trans[i0])]
        nz = [i for i in range(top, m) if rows[i][col] != 0]
        if not nz:
            continue
        i0 = nz[0]
        rows[top], rows[i0] = rows[i0], rows[top]
        trans[top], trans[i0] = trans[i0], trans[top]
        pivots.append((top, col))
        top += 1
        if top == m:
            break
    residual = list(target)
    coeffs = [0] * m
    for r, col in pivots:
        if residual[col] % rows[r][col]:
            return None
        f = residual[col] // rows[r][col]
        residual = [x - f * y for x, y in zip(residual, rows[r])]
        coeffs[r] = f
    if any(residual):
        return None
    out = [0] * m
    for r, f in enumerate(coeffs):
        if f:
            out = [x + f * y for x, y in zip(out, trans[r])]
    return out
