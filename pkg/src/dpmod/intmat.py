"""Exact integer and rational matrix helpers.

Matrices are tuples of row tuples of Python ints; vectors are tuples.
Nothing here touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = tuple
Vector = tuple


def as_matrix(rows: Sequence[Sequence[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(rows: int, cols: int) -> Matrix:
    return tuple((0,) * cols for _ in range(rows))


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a: Matrix, v: Vector) -> Vector:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def scale(m: Matrix, k: int) -> Matrix:
    return tuple(tuple(k * x for x in row) for row in m)


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def dot(u: Vector, v: Vector) -> int:
    return sum(x * y for x, y in zip(u, v))


def bilinear(gram: Matrix, u: Vector, v: Vector) -> int:
    return dot(u, mat_vec(gram, v))


def congruent(gram: Matrix, basis_cols: Matrix) -> Matrix:
    """P^T G P where the columns of P are given as the rows of basis_cols."""
    cols = basis_cols
    return tuple(tuple(bilinear(gram, u, v) for v in cols) for u in cols)


def block_diag(*blocks: Matrix) -> Matrix:
    n = sum(len(b) for b in blocks)
    rows = []
    offset = 0
    for b in blocks:
        k = len(b)
        for row in b:
            rows.append((0,) * offset + tuple(row) + (0,) * (n - offset - k))
        offset += k
    return tuple(rows)


def det(m: Matrix) -> int:
    """Bareiss fraction-free determinant."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(row) for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
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


def inverse_rational(m: Matrix) -> tuple:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def inverse_unimodular(m: Matrix) -> Matrix:
    inv = inverse_rational(m)
    out = []
    for row in inv:
        if any(x.denominator != 1 for x in row):
            raise ValueError("matrix is not unimodular")
        out.append(tuple(int(x) for x in row))
    return tuple(out)


def rank_rational(m: Sequence[Sequence[int]]) -> int:
    rows = [[Fraction(x) for x in row] for row in m]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def rank_mod2(m: Sequence[Sequence[int]]) -> int:
    rows = [int("".join("1" if x % 2 else "0" for x in row) or "0", 2) for row in m]
    rank = 0
    while rows:
        pivot = max(rows)
        if pivot == 0:
            break
        rows.remove(pivot)
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
        rank += 1
    return rank


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_rows(vectors: Sequence[Sequence[int]]) -> Matrix:
    """Row-style Hermite normal form of the lattice spanned by the rows.

    Zero rows are dropped, pivots are positive and entries above each pivot
    are reduced into [0, pivot). The result is a canonical basis.
    """
    a = [list(v) for v in vectors if any(v)]
    if not a:
        return ()
    ncols = len(a[0])
    r = 0
    for col in range(ncols):
        if r >= len(a):
            break
        # gcd-combine every lower row into row r
        for i in range(r + 1, len(a)):
            if a[i][col] == 0:
                continue
            if a[r][col] == 0:
                a[r], a[i] = a[i], a[r]
                continue
            g, s, t = _xgcd(a[r][col], a[i][col])
            u, v = a[r][col] // g, a[i][col] // g
            row_r = [s * x + t * y for x, y in zip(a[r], a[i])]
            row_i = [-v * x + u * y for x, y in zip(a[r], a[i])]
            a[r], a[i] = row_r, row_i
        if a[r][col] == 0:
            continue
        if a[r][col] < 0:
            a[r] = [-x for x in a[r]]
        p = a[r][col]
        for i in range(r):
            q = a[i][col] // p
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return tuple(tuple(row) for row in a[:r] if any(row))


def integer_kernel(m: Sequence[Sequence[int]], ncols: int | None = None) -> Matrix:
    """Basis (as rows) of {x in Z^n : m x = 0}, in Hermite form.

    Column operations reduce m while the same operations act on an identity
    matrix; the columns of that transform under zero columns of the reduced
    matrix span the kernel, which is automatically saturated.
    """
    rows = [list(r) for r in m]
    n = ncols if ncols is not None else (len(rows[0]) if rows else 0)
    if n == 0:
        return ()
    cols = [[row[j] for row in rows] for j in range(n)]
    trans = [[int(i == j) for i in range(n)] for j in range(n)]
    pivot_col = 0
    for r in range(len(rows)):
        if pivot_col >= n:
            break
        for j in range(pivot_col + 1, n):
            if cols[j][r] == 0:
                continue
            if cols[pivot_col][r] == 0:
                cols[pivot_col], cols[j] = cols[j], cols[pivot_col]
                trans[pivot_col], trans[j] = trans[j], trans[pivot_col]
                continue
            g, s, t = _xgcd(cols[pivot_col][r], cols[j][r])
            u, v = cols[pivot_col][r] // g, cols[j][r] // g
            cp, cj = cols[pivot_col], cols[j]
            tp, tj = trans[pivot_col], trans[j]
            cols[pivot_col] = [s * x + t * y for x, y in zip(cp, cj)]
            cols[j] = [-v * x + u * y for x, y in zip(cp, cj)]
            trans[pivot_col] = [s * x + t * y for x, y in zip(tp, tj)]
            trans[j] = [-v * x + u * y for x, y in zip(tp, tj)]
        if cols[pivot_col][r] != 0:
            pivot_col += 1
    kernel = [trans[j] for j in range(pivot_col, n)]
    return hermite_rows(kernel)


def saturate(vectors: Sequence[Sequence[int]], dim: int) -> Matrix:
    """Hermite basis of (span_Q vectors) intersected with Z^dim."""
    vs = [v for v in vectors if any(v)]
    if not vs:
        return ()
    annihilator = integer_kernel(vs, dim)
    if not annihilator:
        return identity(dim)
    return integer_kernel(annihilator, dim)


def solve_in_basis(basis: Sequence[Sequence[int]], v: Sequence[int]) -> tuple | None:
    """Rational coordinates of v in the row basis, or None if v is outside the span."""
    k = len(basis)
    if k == 0:
        return () if not any(v) else None
    n = len(v)
    # augmented system basis^T c = v
    a = [[Fraction(basis[j][i]) for j in range(k)] + [Fraction(v[i])] for i in range(n)]
    row = 0
    pivots = []
    for col in range(k):
        piv = next((r for r in range(row, n) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        p = a[row][col]
        a[row] = [x / p for x in a[row]]
        for r in range(n):
            if r != row and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[row])]
        pivots.append(col)
        row += 1
    if any(a[r][k] != 0 for r in range(row, n)):
        return None
    coeffs = [Fraction(0)] * k
    for r, col in enumerate(pivots):
        coeffs[col] = a[r][k]
    return tuple(coeffs)


def charpoly(m: Matrix) -> tuple:
    """Integer coefficients of det(xI - m), highest degree first (Faddeev-LeVerrier)."""
    n = len(m)
    coeffs = [1]
    mk = [[Fraction(0)] * n for _ in range(n)]
    am = [[Fraction(x) for x in row] for row in m]
    c = Fraction(1)
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        prod = [[sum(am[i][t] * mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            prod[i][i] += c
        mk = prod
        am_mk = [[sum(am[i][t] * mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(am_mk[i][i] for i in range(n)) / k
        coeffs.append(c)
    return tuple(int(x) for x in coeffs)


def unimodular_completion(rows: Sequence[Sequence[int]], n: int) -> Matrix:
    """Rows that extend a saturated set of rows to a basis of Z^n."""
    k = len(rows)
    if k == 0:
        return identity(n)
    cols = [[row[j] for row in rows] for j in range(n)]
    trans = [[int(i == j) for i in range(n)] for j in range(n)]
    pivot_col = 0
    for r in range(k):
        for j in range(pivot_col + 1, n):
            if cols[j][r] == 0:
                continue
            if cols[pivot_col][r] == 0:
                cols[pivot_col], cols[j] = cols[j], cols[pivot_col]
                trans[pivot_col], trans[j] = trans[j], trans[pivot_col]
                continue
            g, s, t = _xgcd(cols[pivot_col][r], cols[j][r])
            u, v = cols[pivot_col][r] // g, cols[j][r] // g
            cp, cj = cols[pivot_col], cols[j]
            tp, tj = trans[pivot_col], trans[j]
            cols[pivot_col] = [s * x + t * y for x, y in zip(cp, cj)]
            cols[j] = [-v * x + u * y for x, y in zip(cp, cj)]
            trans[pivot_col] = [s * x + t * y for x, y in zip(tp, tj)]
            trans[j] = [-v * x + u * y for x, y in zip(tp, tj)]
        if cols[pivot_col][r] == 0:
            raise ValueError("rows are linearly dependent")
        pivot_col += 1
    w = transpose(tuple(tuple(c) for c in trans))
    winv = inverse_rational(w)
    lead = [[cols[j][r] for j in range(k)] for r in range(k)]
    if abs(det(tuple(tuple(x) for x in lead))) != 1:
        raise ValueError("rows do not span a saturated sublattice")
    return tuple(tuple(int(x) for x in row) for row in winv[k:])
