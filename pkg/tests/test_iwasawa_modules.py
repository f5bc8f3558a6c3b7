import json
import random

import pytest

from mulab.errors import NotTorsion, PrecisionInsufficient
from mulab.padic import val_int
from mulab.iwasawa_modules import (
    LambdaPresentation,
    MuProfile,
    graded_ranks,
    load_presentation,
    mu_profile,
    smith_rank_over_power_series_field_char_p,
)


def P(*coeffs):
    return list(coeffs)


def test_smith_rank_examples():
    rank, exps = smith_rank_over_power_series_field_char_p(
        [[(1,), (0,)], [(0,), (1,)]], 5, 8)
    assert (rank, exps) == (2, [0, 0])
    rank, exps = smith_rank_over_power_series_field_char_p(
        [[(0, 1), (0,)], [(0,), (0, 0, 0, 1)]], 5, 8)
    assert (rank, exps) == (2, [1, 3])
    rank, exps = smith_rank_over_power_series_field_char_p(
        [[(0, 1), (0, 1)], [(0, 1), (0, 1)]], 5, 8)
    assert (rank, exps) == (1, [1])


def quotient_cardinality(pres, k, j):
    """|M/(p^k, T^j)| computed by brute force over the finite quotient
    ring, as an independent oracle for graded-rank tests."""
    p = pres.p
    # M/(p^k,T^j) = R^c / (rows + p^k + T^j); count via Smith over Z/p^k of
    # the stacked relations T^t * row restricted to T-degree < j
    import numpy as np

    from mulab.iwasawa_modules import _smith_zpk
    c = pres.ncols
    stacked = []
    pk = p**k
    for row in pres.rows:
        for t in range(j):
            vec = []
            for e in row:
                shifted = (0,) * t + tuple(e)[:j - t]
                vec.extend(x % pk for x in shifted)
            stacked.append(vec)
    G = np.array(stacked, dtype=object) if stacked else \
        np.zeros((0, c * j), dtype=object)
    diag, _ = _smith_zpk(G, p, k)
    # |quotient| = p^(k * c * j) / |V| and |V| = prod p^(k - d_i)
    size_V = sum(k - d for d in diag)
    return p**(k * c * j - size_V)


def test_graded_ranks_direct_sum():
    # diag(p, p^2) over Lambda, p = 5, N = 3
    pres = LambdaPresentation(5, 3, 8, [[P(5), P(0)], [P(0), P(25)]])
    assert graded_ranks(pres) == [2, 1, 0]
    prof = mu_profile(pres)
    assert prof == MuProfile((1, 1), 3, 2, 2)


def test_graded_ranks_distinguished():
    # single relation (T): Lambda/(T) = Z_p has no p-torsion
    pres = LambdaPresentation(5, 3, 8, [[P(0, 1)]])
    assert graded_ranks(pres) == [0, 0, 0]
    assert mu_profile(pres) == MuProfile((0,), 0, 0, 0)
    # T^2 + p: distinguished, no p-torsion
    pres = LambdaPresentation(5, 3, 8, [[P(5, 0, 1)]])
    assert mu_profile(pres) == MuProfile((0,), 0, 0, 0)


def test_graded_ranks_pT():
    # Lambda/(pT): p-torsion part is (T)/(pT) = Lambda/p, so q = (1, 0)
    pres = LambdaPresentation(5, 2, 8, [[P(0, 5)]])
    qs = graded_ranks(pres)
    # cardinality oracle: |M/(p^k, T^j)| = p^(k + j - 1) pins the module
    # structure Lambda/p (+) Lambda/T modulo finite junk
    for k in range(1, 3):
        for j in range(1, 6):
            assert quotient_cardinality(pres, k, j) == 5**(k + j - 1)
    assert qs == [1, 0]
    assert mu_profile(pres) == MuProfile((1,), 1, 1, 1)


def test_mu_profile_square_p2():
    pres = LambdaPresentation(5, 3, 8, [[P(25), P(0)], [P(0), P(25)]])
    assert graded_ranks(pres) == [2, 2, 0]
    assert mu_profile(pres) == MuProfile((0, 2), 4, 2, 2)


def test_precision_insufficient():
    # Lambda/p^2 at N = 2 cannot certify the exponent
    pres = LambdaPresentation(5, 2, 8, [[P(25)]])
    with pytest.raises(PrecisionInsufficient):
        mu_profile(pres)
    prof = mu_profile(pres, allow_lower_bound=True)
    assert prof.mu >= 2


def test_not_torsion():
    pres = LambdaPresentation(5, 2, 8, [[P(5), P(0)]])
    with pytest.raises(NotTorsion):
        graded_ranks(pres)


def _zmul(a, b, mod):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % mod
    return out


def _zadd(a, b, mod):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return [(x + y) % mod for x, y in zip(a, b)]


def random_unimodular_scramble(rng, rows, p, N):
    """Unimodular row/column operations with exact polynomial arithmetic
    (coefficients mod p^N, no T-truncation, so the module is preserved)."""
    mod = p**N
    rows = [[list(e) for e in r] for r in rows]
    nr, nc = len(rows), len(rows[0])
    for _ in range(8):
        op = rng.randrange(4)
        if op == 0 and nr > 1:
            i, j = rng.sample(range(nr), 2)
            f = [rng.randrange(mod) for _ in range(rng.randint(1, 3))]
            rows[i] = [_zadd(a, _zmul(f, b, mod), mod)
                       for a, b in zip(rows[i], rows[j])]
        elif op == 1 and nc > 1:
            i, j = rng.sample(range(nc), 2)
            f = [rng.randrange(mod) for _ in range(rng.randint(1, 3))]
            for r in rows:
                r[i] = _zadd(r[i], _zmul(f, r[j], mod), mod)
        elif op == 2 and nr > 1:
            i, j = rng.sample(range(nr), 2)
            rows[i], rows[j] = rows[j], rows[i]
        else:
            # multiply a row by a unit series
            i = rng.randrange(nr)
            f = [rng.randrange(1, p)] + \
                [rng.randrange(mod) for _ in range(2)]
            rows[i] = [_zmul(f, a, mod) for a in rows[i]]
    return rows


def build_module(rng, p, N, M):
    """Random (+) (Lambda/p^i)^(a_i) (+) Lambda/f_j with i <= 3 and
    distinguished degree <= 4; returns (presentation rows, expected mu
    vector)."""
    mod = p**N
    blocks = []
    mu_counts = {}
    n_p = rng.randint(0, 3)
    for _ in range(n_p):
        i = rng.randint(1, min(3, N - 1))
        blocks.append([p**i])
        mu_counts[i] = mu_counts.get(i, 0) + 1
    n_f = rng.randint(0, 2)
    for _ in range(n_f):
        deg = rng.randint(1, 4)
        f = [rng.randrange(mod) * p % mod for _ in range(deg)] + [1]
        blocks.append(f)
    if not blocks:
        blocks = [[1]]
    c = len(blocks)
    rows = []
    for i, f in enumerate(blocks):
        row = [[0]] * c
        row[i] = f
        rows.append(row)
    t = max(mu_counts) if mu_counts else 0
    vec = tuple(mu_counts.get(i, 0) for i in range(1, t + 1)) if t else (0,)
    return rows, vec


def test_structure_recovery_randomized():
    rng = random.Random(20240817)
    for trial in range(60):
        p = rng.choice([3, 5])
        N = 4
        rows, vec = build_module(rng, p, N, 8)
        scrambled = random_unimodular_scramble(rng, rows, p, N)
        maxdeg = max(len(e) for r in scrambled for e in r)
        pres = LambdaPresentation(p, N, max(8, maxdeg + 4), scrambled)
        prof = mu_profile(pres)
        assert prof.mu_vector == vec, (trial, p, rows, prof)


def test_load_presentation(tmp_path):
    path = tmp_path / "pres.json"
    path.write_text(json.dumps(
        {"p": 5, "N": 3, "MT": 8, "rows": [[[5], [0]], [[0], [25]]]}))
    pres = load_presentation(str(path))
    assert mu_profile(pres).mu_vector == (1, 1)


def test_mu_equals_det_content_valuation():
    """Cross-oracle: for square presentations of p-power-torsion modules,
    mu equals the p-valuation of the determinant's content."""
    rng = random.Random(424242)
    from mulab.iwasawa_modules import _poly
    for _ in range(25):
        p = rng.choice([3, 5])
        N = 4
        c = rng.randint(1, 3)
        rows = []
        mu_expected = 0
        for i in range(c):
            a = rng.randint(1, 3)
            mu_expected += a
            row = [[0]] * c
            row[i] = [p**a]
            rows.append(row)
        scrambled = random_unimodular_scramble(rng, rows, p, N)
        maxdeg = max(len(e) for r in scrambled for e in r)
        pres = LambdaPresentation(p, N, max(8, maxdeg + 4), scrambled)
        prof = mu_profile(pres)
        assert prof.mu == mu_expected
        det = pres.torsion_certificate()
        content_val = min(val_int(abs(x), p, 64)
                          for x in det if x != 0)
        assert content_val == mu_expected
