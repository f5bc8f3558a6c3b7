"""Exact rational linear algebra on dense Fraction matrices.

Small-scale (a few hundred rows) Gaussian elimination; no floating point
anywhere.  Rows are lists of Fractions; helpers return new objects and
never mutate inputs.
"""

from __future__ import annotations

from fractions import Fraction


def _frac_rows(rows):
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    A = _frac_rows(rows)
    if not A:
        return [], []
    ncols = len(A[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(A)):
            if A[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        A[r], A[pivot_row] = A[pivot_row], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def nullspace(rows):
    """Basis of the right kernel (column vectors as lists)."""
    if not rows:
        return []
    ncols = len(rows[0])
    R, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pcol in enumerate(pivots):
            v[pcol] = -R[i][fcol]
        basis.append(v)
    return basis


def matmul(A, B):
    n, k = len(A), len(B[0])
    return [[sum((A[i][t] * B[t][j] for t in range(len(B))),
                 Fraction(0)) for j in range(k)] for i in range(n)]


def matvec(A, v):
    return [sum((row[j] * v[j] for j in range(len(v))), Fraction(0))
            for row in A]


def transpose(A):
    return [list(col) for col in zip(*A)]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def mat_sub_scalar(A, s):
    """A - s*I."""
    out = _frac_rows(A)
    for i in range(len(out)):
        out[i][i] -= s
    return out


def solve_in_span(basis_vectors, target):
    """Coefficients expressing target in the span, or None.

    basis_vectors: list of vectors (lists); target: vector.
    """
    if not basis_vectors:
        return None if any(x != 0 for x in target) else []
    n = len(target)
    aug = [[Fraction(basis_vectors[j][i]) for j in
            range(len(basis_vectors))] + [Fraction(target[i])]
           for i in range(n)]
    R, pivots = rref(aug)
    k = len(basis_vectors)
    if k in pivots:
        return None
    coeffs = [Fraction(0)] * k
    for i, c in enumerate(pivots):
        coeffs[c] = R[i][k]
    return coeffs


def clear_denominators(v):
    """Scale a rational vector to a primitive integer vector."""
    from math import gcd, lcm
    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    return ints
