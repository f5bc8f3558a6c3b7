"""Refined mu-invariants of finitely presented torsion modules over
Zp[[T]], computed through graded Smith-form ranks over Fp[[T]].

The k-th graded rank q_k is the Fp[[T]]-rank of p^(k-1) M / p^k M.  For a
module whose p-power torsion is a sum of pieces Lambda/p^i, q_k counts the
summands with i >= k, so the multiplicity of Lambda/p^i is q_i - q_(i+1).
Everything is computed from the relation matrix by exact linear algebra:
Smith form over Z/p^k to locate p^(k-1)-divisible relations, then a Smith
form over the truncated series field coefficients to extract ranks.
Finite (pseudonull) junk is insensitive to the T-truncation bound, so each
profile is recomputed at doubled truncation and must agree.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    NotTorsion,
    PrecisionInsufficient,
    TruncationUnresolved,
)

Poly = tuple[int, ...]  # coefficients of a truncated polynomial in T


def _poly(coeffs, M: int, mod: int) -> Poly:
    cs = [c % mod for c in coeffs[:M]]
    cs += [0] * (M - len(cs))
    return tuple(cs)


def poly_mul(a: Poly, b: Poly, M: int, mod: int | None) -> Poly:
    out = [0] * M
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if i + j >= M:
                    break
                out[i + j] += x * y
    if mod is None:
        return tuple(out)
    return tuple(c % mod for c in out)


def poly_add(a: Poly, b: Poly, mod: int | None) -> Poly:
    if mod is None:
        return tuple(x + y for x, y in zip(a, b))
    return tuple((x + y) % mod for x, y in zip(a, b))


def poly_neg(a: Poly, mod: int | None) -> Poly:
    if mod is None:
        return tuple(-x for x in a)
    return tuple((-x) % mod for x in a)


def _t_valuation(a: Poly, M: int) -> int:
    for i, c in enumerate(a):
        if c != 0:
            return i
    return M


def _series_inverse(a: Poly, M: int, p: int) -> Poly:
    """Inverse of a unit (a[0] != 0) in F_p[T]/(T^M)."""
    inv0 = pow(a[0], -1, p)
    out = [inv0] + [0] * (M - 1)
    for i in range(1, M):
        s = 0
        for j in range(1, i + 1):
            if j < len(a):
                s += a[j] * out[i - j]
        out[i] = (-inv0 * s) % p
    return tuple(out)


def smith_rank_over_power_series_field_char_p(
        rows: list[list[Poly]], p: int, M: int) -> tuple[int, list[int]]:
    """Smith-form rank of a matrix over F_p[T]/(T^M).

    F_p[[T]] is a discrete valuation ring; pivoting on a globally minimal
    T-valuation entry keeps every update exact mod T^M.  Returns the rank
    (number of diagonal entries that are units times T-powers below M) and
    the sorted list of diagonal T-exponents.
    """
    A = [[_poly(e, M, p) for e in row] for row in rows]
    nr = len(A)
    nc = len(A[0]) if nr else 0
    exps: list[int] = []
    r0 = c0 = 0
    while r0 < nr and c0 < nc:
        best = None
        bv = M
        for i in range(r0, nr):
            for j in range(c0, nc):
                v = _t_valuation(A[i][j], M)
                if v < bv:
                    bv = v
                    best = (i, j)
        if best is None or bv >= M:
            break
        bi, bj = best
        A[r0], A[bi] = A[bi], A[r0]
        for row in A:
            row[c0], row[bj] = row[bj], row[c0]
        pivot = A[r0][c0]
        # pivot = T^bv * u with u a unit; every remaining entry has
        # T-valuation >= bv, so quotients are exact mod T^M
        u = pivot[bv:] + (0,) * bv
        uinv = _series_inverse(u, M, p)
        for i in range(r0 + 1, nr):
            e = A[i][c0]
            if all(c == 0 for c in e):
                continue
            quot = poly_mul(e[bv:] + (0,) * bv, uinv, M, p)
            for j in range(c0, nc):
                A[i][j] = poly_add(
                    A[i][j],
                    poly_neg(poly_mul(quot, A[r0][j], M, p), p), p)
        # column elimination: entries below the pivot are already zero, so
        # clearing the pivot-row tail is the whole of it
        for j in range(c0 + 1, nc):
            A[r0][j] = tuple(0 for _ in A[r0][j])
        exps.append(bv)
        r0 += 1
        c0 += 1
    return len(exps), sorted(exps)


@dataclass(frozen=True)
class MuProfile:
    """Refined mu-data: vector (mu_1..mu_t), mu = sum i*mu_i, exponent t,
    multiplicity r = sum mu_i."""

    mu_vector: tuple[int, ...]
    mu: int
    t: int
    r: int

    def __post_init__(self):
        vec = self.mu_vector
        if vec == (0,):
            assert self.mu == 0 and self.t == 0 and self.r == 0
        else:
            assert vec[-1] > 0
            assert self.mu == sum((i + 1) * m for i, m in enumerate(vec))
            assert self.r == sum(vec)
            assert self.t == len(vec)


class LambdaPresentation:
    """Finitely presented torsion module over Z_p[[T]], given by a relation
    matrix with entries truncated at (p^N, T^M)."""

    def __init__(self, p: int, N: int, M: int, rows):
        self.p = p
        self.N = N
        self.M = M
        mod = p**N
        # raw coefficients are kept for the exact torsion witness; the
        # reduced rows drive every precision-N computation
        self.rows_raw = [[tuple(int(c) for c in list(e)[:M]) +
                          (0,) * max(0, M - len(list(e))) for e in row]
                         for row in rows]
        self.rows = [[_poly(e, M, mod) for e in row] for row in rows]
        self.ncols = len(self.rows[0]) if self.rows else 0
        for row in self.rows:
            if len(row) != self.ncols:
                raise ValueError("ragged relation matrix")

    def with_truncation(self, M_new: int) -> "LambdaPresentation":
        return LambdaPresentation(self.p, self.N, M_new,
                                  [[list(e) for e in row]
                                   for row in self.rows_raw])

    # -- torsion certificate ------------------------------------------------

    def _det(self, row_idx: tuple[int, ...]) -> Poly:
        """Determinant of the square submatrix on the given rows (all
        columns), by subset dynamic programming over columns.

        Computed with exact integer coefficients (canonical residues as
        lifts): the torsion witness for e.g. diag(p, p^2) is p^3, which a
        mod-p^N computation at N = 3 could not distinguish from zero.
        """
        mod = None
        n = self.ncols
        one = (1,) + (0,) * (self.M - 1)
        # dp over subsets of used columns, rows taken in order
        cur = {0: one}
        for r in row_idx:
            nxt: dict[int, Poly] = {}
            for mask, v in cur.items():
                for j in range(n):
                    bit = 1 << j
                    if mask & bit:
                        continue
                    e = self.rows_raw[r][j]
                    if all(c == 0 for c in e):
                        continue
                    # sign: parity of columns already used above j
                    sgn = bin(mask >> (j + 1)).count("1") % 2
                    term = poly_mul(v, e, self.M, mod)
                    if sgn:
                        term = poly_neg(term, mod)
                    key = mask | bit
                    if key in nxt:
                        nxt[key] = poly_add(nxt[key], term, mod)
                    else:
                        nxt[key] = term
            cur = nxt
        full = (1 << n) - 1
        return cur.get(full, (0,) * self.M)

    def torsion_certificate(self, max_tries: int = 64) -> Poly:
        """A nonzero c x c minor of the relation matrix (exact integer
        coefficients), or NotTorsion."""
        if len(self.rows) < self.ncols:
            raise NotTorsion("fewer relations than generators")
        if self.ncols == 0:
            return (1,) + (0,) * (self.M - 1)
        tried = 0
        for combo in itertools.combinations(range(len(self.rows)),
                                            self.ncols):
            d = self._det(combo)
            tried += 1
            if any(c != 0 for c in d):
                return d
            if tried >= max_tries:
                break
        raise NotTorsion("no nonzero maximal minor found "
                         f"within {tried} submatrices")


# -- Smith form over Z/p^k ---------------------------------------------------


def _smith_zpk(G: np.ndarray, p: int, k: int):
    """Diagonalize G over Z/p^k by unimodular operations.

    Returns (diag_vals, Minv) where diag_vals[i] is the p-valuation of the
    i-th diagonal entry (k meaning zero) and Minv's rows w_i satisfy
    rowspan(G) = span{p^(d_i) w_i}.

    Entries stay below p^k and all updates are elementwise, so int64 is
    exact as long as p^(2k) fits (p^k < 3e9; far beyond desk scale).
    """
    pk = p**k
    if pk > 2**31:
        raise ValueError("p^k too large for the int64 fast path")
    A = np.ascontiguousarray(G.astype(np.int64) % pk)
    nr, nc = A.shape
    Minv = np.eye(nc, dtype=np.int64)
    diag: list[int] = []

    def vals(block):
        out = np.full(block.shape, k, dtype=np.int64)
        tmp = block.copy()
        for v in range(k):
            newly = (tmp % p != 0) & (out == k)
            out[newly] = v
            tmp //= p
        return out

    r0 = 0
    for c0 in range(min(nr, nc)):
        sub = A[r0:, c0:]
        if sub.size == 0:
            break
        V = vals(sub)
        v = int(V.min())
        if v >= k:
            break
        i, j = np.unravel_index(int(V.argmin()), V.shape)
        bi, bj = r0 + int(i), c0 + int(j)
        A[[r0, bi]] = A[[bi, r0]]
        if bj != c0:
            A[:, [c0, bj]] = A[:, [bj, c0]]
            Minv[[c0, bj]] = Minv[[bj, c0]]
        pivot = int(A[r0, c0])
        uinv = pow(pivot // p**v, -1, pk)
        # row elimination (rowspan-preserving), one vectorized update
        col = A[r0 + 1:, c0]
        if col.size:
            q = (col // p**v) * uinv % pk
            nzr = np.nonzero(col)[0]
            if nzr.size:
                A[r0 + 1 + nzr, :] = (
                    A[r0 + 1 + nzr, :] - q[nzr, None] * A[r0, :]) % pk
        # column elimination: col_j -= q*col_c0; Minv row_c0 += q*row_j
        rowtail = A[r0, c0 + 1:]
        nzc = np.nonzero(rowtail)[0]
        if nzc.size:
            q = (rowtail[nzc] // p**v) * uinv % pk
            A[:, c0 + 1 + nzc] = (
                A[:, c0 + 1 + nzc] - A[:, [c0]] * q[None, :]) % pk
            Minv[c0, :] = (Minv[c0, :]
                           + q @ Minv[c0 + 1 + nzc, :]) % pk
        diag.append(v)
        r0 += 1
        if r0 >= nr:
            break
    return diag, Minv


def _graded_ranks_at(pres: LambdaPresentation, M: int) -> list[int]:
    p, N, c = pres.p, pres.N, pres.ncols
    rows = pres.rows
    qs: list[int] = []
    for k in range(1, N + 1):
        pk = p**k
        # stack T^t * r_alpha as vectors in (Z/p^k)^(c*M)
        stacked = []
        for row in rows:
            row_k = [_poly(e, M, pk) for e in row]
            for t in range(M):
                vec = []
                for e in row_k:
                    shifted = (0,) * t + e[:M - t]
                    vec.extend(shifted)
                stacked.append(vec)
        G = np.array(stacked, dtype=object) if stacked else \
            np.zeros((0, c * M), dtype=object)
        diag, Minv = _smith_zpk(G, p, k)
        # basis of (V intersect p^(k-1) R^c) / p^(k-1): rows w_i with
        # d_i <= k-1, reduced mod p
        basis_rows = [Minv[i, :] % p for i, d in enumerate(diag) if d < k]
        if not basis_rows:
            qs.append(c)
            continue
        poly_rows = []
        for w in basis_rows:
            poly_rows.append([tuple(int(x) for x in w[i * M:(i + 1) * M])
                              for i in range(c)])
        rank, _ = smith_rank_over_power_series_field_char_p(poly_rows, p, M)
        qs.append(c - rank)
    return qs


def graded_ranks(pres: LambdaPresentation) -> list[int]:
    """q_k = F_p[[T]]-rank of p^(k-1) M / p^k M for k = 1..N.

    Computed at the stated truncation and re-checked at doubled truncation;
    disagreement raises TruncationUnresolved.  Monotonicity (q_k
    non-increasing) is asserted on every run.
    """
    pres.torsion_certificate()
    qs = _graded_ranks_at(pres, pres.M)
    qs2 = _graded_ranks_at(pres.with_truncation(2 * pres.M), 2 * pres.M)
    if qs != qs2:
        raise TruncationUnresolved(
            f"graded ranks unstable under truncation doubling: "
            f"{qs} at T^{pres.M} vs {qs2} at T^{2 * pres.M}")
    for a, b in zip(qs, qs[1:]):
        if b > a:
            raise TruncationUnresolved(
                f"graded ranks not monotone: {qs}")
    return qs


def mu_profile(pres: LambdaPresentation,
               allow_lower_bound: bool = False) -> MuProfile:
    """Refined mu-invariants from graded ranks: mu_i = q_i - q_(i+1).

    Requires q_N = 0 (the working precision sees past the mu-exponent);
    otherwise raises PrecisionInsufficient unless allow_lower_bound, in
    which case the truncated profile is returned (a lower bound).
    """
    qs = graded_ranks(pres)
    if qs[-1] != 0 and not allow_lower_bound:
        raise PrecisionInsufficient(
            f"q_N = {qs[-1]} > 0 at N = {pres.N}: mu-exponent not resolved")
    ext = qs + [0]
    mus = [ext[i] - ext[i + 1] for i in range(len(qs))]
    while mus and mus[-1] == 0:
        mus.pop()
    if not mus:
        return MuProfile((0,), 0, 0, 0)
    vec = tuple(mus)
    return MuProfile(vec,
                     sum((i + 1) * m for i, m in enumerate(vec)),
                     len(vec),
                     sum(vec))


def load_presentation(path: str) -> LambdaPresentation:
    """Read {"p": int, "N": int, "MT": int, "rows": [[[c0,c1,..], ..], ..]}."""
    with open(path) as fh:
        data = json.load(fh)
    for key in ("p", "N", "MT", "rows"):
        if key not in data:
            raise ValueError(f"presentation file missing '{key}'")
    return LambdaPresentation(data["p"], data["N"], data["MT"], data["rows"])
