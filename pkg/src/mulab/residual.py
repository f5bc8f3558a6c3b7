"""Residual mod-p analysis of a rational elliptic curve: rational
p-isogeny kernels, the Galois character on each kernel line, trace-based
semisimplification, the aligned/skew dichotomy, congruence evidence for
the degree of alignment, and the lattice-isogeny conjugation on explicit
matrix representations.

Kernel polynomials come out of the p-division polynomial by classical
Zassenhaus factorization (factor mod q, Hensel lift, bounded subset
recombination) restricted to the target degree (p-1)/2ality, followed by a
group-law stability check in Q[x]/(h).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

from .dirichlet import (
    DirichletCharacter,
    enumerate_characters,
    factorize,
    is_odd,
    liftable_character,
    mod_p_cyclotomic,
)
from .elliptic import Curve, zpoly_mul, zpoly_trim
from .errors import (
    AmbiguousPair,
    BadReduction,
    FactorizationInconclusive,
    InsufficientLineData,
    NotReduciblyAligned,
    PrecisionLoss,
    RootLiftFailure,
)
from .ffield import (
    ExtField,
    PrimeField,
    RelQuad,
    factor as ff_factor,
    fpoly_divmod,
    fpoly_gcd,
    fpoly_mul,
    fpoly_sub,
    fpoly_trim,
    sqrt_in_field,
)

# -- Zassenhaus ---------------------------------------------------------------


def _content(poly):
    g = 0
    for c in poly:
        g = gcd(g, abs(c))
    return max(g, 1)


def _monicize(poly):
    """F(x) = lc^(deg-1) * f(x/lc): monic integer polynomial whose roots
    are lc times the roots of f."""
    lc = poly[-1]
    deg = len(poly) - 1
    return [c * lc**(deg - 1 - i) for i, c in enumerate(poly[:-1])] + [1], lc


def _mignotte_bound(F, d):
    """Bound on coefficients of a monic degree-d factor of monic F."""
    norm2 = isqrt(sum(c * c for c in F)) + 1
    return 2**d * norm2


def _hensel_pair(f, g, h, q, k_target):
    """Lift f = g*h (mod q) to mod q^k_target, f and g, h monic."""
    # Bezout: s*g + t*h = 1 mod q
    g0 = [c % q for c in g]
    h0 = [c % q for c in h]
    r0, r1 = list(g0), list(h0)
    s0, s1 = [1], [0]
    t0, t1 = [0], [1]
    while fpoly_trim(list(r1)):
        qq, rr = fpoly_divmod(r0, r1, q)
        r0, r1 = r1, rr
        s0, s1 = s1, fpoly_sub(s0, fpoly_mul(qq, s1, q), q)
        t0, t1 = t1, fpoly_sub(t0, fpoly_mul(qq, t1, q), q)
    r0 = fpoly_trim(r0)
    assert len(r0) == 1
    cinv = pow(r0[0], -1, q)
    s = [c * cinv % q for c in s0]
    t = [c * cinv % q for c in t0]
    # linear lifting
    G, H = [c % q for c in g], [c % q for c in h]
    mod = q
    while mod < q**k_target:
        newmod = mod * q
        GH = zpoly_mul(G, H)
        e_full = [(a - b) for a, b in
                  zip(list(f) + [0] * max(0, len(GH) - len(f)),
                      GH + [0] * max(0, len(f) - len(GH)))]
        e = [(c // mod) % q for c in e_full]
        # dg = t*e mod G (over F_q), dh = (e - dg*H)/G
        dg = fpoly_divmod(fpoly_mul(t, e, q), [c % q for c in G], q)[1]
        rem = fpoly_sub(e, fpoly_mul(dg, [c % q for c in H], q), q)
        dh, r = fpoly_divmod(rem, [c % q for c in G], q)
        assert not r
        G = [(a + mod * b) % newmod for a, b in
             zip(G, dg + [0] * (len(G) - len(dg)))]
        H = [(a + mod * b) % newmod for a, b in
             zip(H, dh + [0] * (len(H) - len(dh)))]
        mod = newmod
    return G, H


def _hensel_tree(f, factors, q, k_target):
    """Lift a pairwise-coprime monic factorization of monic f mod q to
    mod q^k_target."""
    if len(factors) == 1:
        m = q**k_target
        return [[c % m for c in f]]
    half = len(factors) // 2
    g = [1]
    for fac in factors[:half]:
        g = fpoly_mul(g, fac, q)
    h = [1]
    for fac in factors[half:]:
        h = fpoly_mul(h, fac, q)
    G, H = _hensel_pair(f, g, h, q, k_target)
    return (_hensel_tree(G, factors[:half], q, k_target)
            + _hensel_tree(H, factors[half:], q, k_target))


def _center(c, m):
    c %= m
    return c - m if c > m // 2 else c


def _zpoly_divides(h, F) -> bool:
    """Exact divisibility of integer polynomials (h monic)."""
    r = list(F)
    dh = len(h) - 1
    while len(zpoly_trim(r)) - 1 >= dh:
        r = zpoly_trim(r)
        d = len(r) - 1 - dh
        c = r[-1]
        for i, hc in enumerate(h):
            r[d + i] -= c * hc
    return not zpoly_trim(r)


def monic_factors_of_degree(poly, d, seed: int = 0,
                            max_subsets: int = 1 << 16):
    """All monic integer factors of the given degree of the monicized
    polynomial, by Zassenhaus recombination."""
    prim = [c // _content(poly) for c in poly]
    F, lc = _monicize(prim)
    rng = random.Random(seed or 1234567)
    # choose q with F squarefree mod q
    q = 5
    while True:
        q += 2
        if any(q % t == 0 for t in range(2, isqrt(q) + 1)):
            continue
        if F[-1] % q == 0 or lc % q == 0:
            continue
        Fq = [c % q for c in F]
        dF = [(i * c) % q for i, c in enumerate(F)][1:]
        if len(fpoly_gcd(Fq, dF, q)) == 1:
            break
    fac = [g for g, m in ff_factor(F, q, rng) for _ in range(m)]
    assert sum(len(g) - 1 for g in fac) == len(F) - 1
    bound = _mignotte_bound(F, d)
    k = 1
    while q**k < 2 * bound + 1:
        k += 1
    lifted = _hensel_tree(F, fac, q, k)
    m = q**k
    # subsets with degree sum d
    out = []
    seen = set()
    count = 0
    idxs = list(range(len(lifted)))

    def rec(start, remaining, current):
        nonlocal count
        if remaining == 0:
            count += 1
            if count > max_subsets:
                raise FactorizationInconclusive(
                    f"recombination exceeded {max_subsets} subsets")
            prod = [1]
            for i in current:
                prod = [c % m for c in zpoly_mul(prod, lifted[i])]
                prod = _poly_mod_trunc(prod, m)
            H = [_center(c, m) for c in prod]
            key = tuple(H)
            if key not in seen:
                seen.add(key)
                if _zpoly_divides(H, F):
                    out.append(H)
            return
        for i in range(start, len(idxs)):
            dd = len(lifted[i]) - 1
            if dd <= remaining:
                rec(i + 1, remaining - dd, current + [i])

    rec(0, d, [])
    return out, lc


def _poly_mod_trunc(poly, m):
    return [c % m for c in poly]


def kernel_polynomials(E: Curve, p: int, seed: int = 0):
    """Monic rational polynomials (denominators only at p) cutting out the
    kernels of the rational p-isogenies of E; may be empty."""
    psi = E.division_polynomial(p)
    d = (p - 1) // 2
    factors, lc = monic_factors_of_degree(psi, d, seed=seed)
    out = []
    for H in factors:
        # h(x) = H(lc*x) / lc^d
        h = [Fraction(c * lc**i, lc**d)
             for i, c in enumerate(H)]
        h = [c / h[-1] for c in h]
        if _kernel_stable(E, h):
            out.append(tuple(h))
    # canonical order
    return sorted(set(out))


def _qpoly_rem(a, b):
    """a mod b over Q, b monic."""
    r = [Fraction(c) for c in a]
    db = len(b) - 1
    while len(r) > db:
        while r and r[-1] == 0:
            r.pop()
        if len(r) <= db:
            break
        dsh = len(r) - 1 - db
        c = r[-1]
        for i, bc in enumerate(b):
            r[dsh + i] -= c * bc
    r += [Fraction(0)] * (db - len(r))
    return r[:db]


def _qpoly_mulmod(a, b, h):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _qpoly_rem(out, h)


def _qpoly_invmod(a, h):
    """Inverse of a modulo monic h over Q, or None if not coprime."""
    r0 = [Fraction(c) for c in h]
    r1 = _qpoly_rem(a, h)
    s0, s1 = [Fraction(0)], [Fraction(1)]

    def trim(v):
        v = list(v)
        while v and v[-1] == 0:
            v.pop()
        return v

    r0t, r1t = trim(r0), trim(r1)
    while r1t:
        # divmod over Q
        qq = [Fraction(0)] * max(1, len(r0t) - len(r1t) + 1)
        r = list(r0t)
        inv = 1 / r1t[-1]
        while len(trim(r)) >= len(r1t):
            r = trim(r)
            dsh = len(r) - len(r1t)
            c = r[-1] * inv
            qq[dsh] = c
            for i, bc in enumerate(r1t):
                r[dsh + i] -= c * bc
        r0t, r1t = r1t, trim(r)
        prod = [Fraction(0)] * (len(qq) + len(s1) - 1)
        for i, x in enumerate(qq):
            if x:
                for j, y in enumerate(s1):
                    prod[i + j] += x * y
        news = [a - b for a, b in
                zip(s0 + [Fraction(0)] * max(0, len(prod) - len(s0)),
                    prod + [Fraction(0)] * max(0, len(s0) - len(prod)))]
        s0, s1 = s1, news
    if len(r0t) != 1:
        return None
    c = 1 / r0t[0]
    return _qpoly_rem([x * c for x in s0], h)


def _kernel_stable(E: Curve, h) -> bool:
    """The set {roots of h} must be closed under the duplication map."""
    num, den = E.duplication_x()
    hl = list(h)
    den_inv = _qpoly_invmod([Fraction(c) for c in den], hl)
    if den_inv is None:
        return False
    x2 = _qpoly_mulmod([Fraction(c) for c in num], den_inv, hl)
    # evaluate h at x2 modulo h
    acc = [Fraction(0)] * (len(hl) - 1)
    if acc == []:
        acc = [Fraction(0)]
    power = [Fraction(1)] + [Fraction(0)] * (len(hl) - 2)
    for c in hl:
        if c:
            acc = [a + c * b for a, b in zip(acc, power)]
        power = _qpoly_mulmod(power, x2, hl)
    return all(a == 0 for a in acc)


# -- Frobenius scalar on a kernel line ----------------------------------------


def frobenius_scalar(E: Curve, kernel_poly, ell: int, p: int,
                     rng: random.Random | None = None) -> int:
    """Eigenvalue in F_p^* of Frob_ell on the kernel line cut out by
    kernel_poly, for a good prime ell distinct from p."""
    if rng is None:
        rng = random.Random(ell * 99991 + p)
    if E.discriminant % ell == 0:
        raise BadReduction(f"bad reduction at {ell}")
    if ell == p:
        raise ValueError("ell must differ from p")
    # reduce the kernel polynomial mod ell
    hbar = []
    for c in kernel_poly:
        c = Fraction(c)
        if c.denominator % ell == 0:
            raise RootLiftFailure("kernel polynomial has ell in a "
                                  "denominator")
        hbar.append(c.numerator * pow(c.denominator, -1, ell) % ell)
    hbar = fpoly_trim(hbar)
    if len(hbar) - 1 != len(kernel_poly) - 1:
        raise RootLiftFailure("kernel polynomial degenerates mod ell")
    # an irreducible factor gives the residue field of a kernel x-coord
    g = min((gg for gg, _ in ff_factor(hbar, ell, rng)),
            key=lambda v: len(v))
    if len(g) == 2:
        Fx = PrimeField(ell)
        x0 = (-g[0]) % ell
    else:
        Fx = ExtField(ell, g)
        x0 = Fx.gen()
    F, P = _lift_point(E, Fx, x0, ell, rng)
    C = E.over_field(F)
    if C.mul(p, P) is not None:
        raise RootLiftFailure("lifted point is not p-torsion")
    Q = (F.pow(P[0], ell), F.pow(P[1], ell))
    R = P
    for lam in range(1, p):
        if R == Q or (F.eq(R[0], Q[0]) and F.eq(R[1], Q[1])):
            return lam
        R = C.add(R, P)
    raise RootLiftFailure("no scalar matches Frobenius")


def _lift_point(E: Curve, Fx, x0, ell: int, rng):
    """Find y with (x0, y) on E over Fx or a quadratic extension."""
    def embed_curve(F):
        return tuple(F.from_int(a) for a in E.ainvs())

    a1, a2, a3, a4, a6 = embed_curve(Fx)
    b = Fx.add(Fx.mul(a1, x0), a3)
    x2 = Fx.mul(x0, x0)
    fx = Fx.add(Fx.mul(x2, x0),
                Fx.add(Fx.mul(a2, x2),
                       Fx.add(Fx.mul(a4, x0), a6)))
    if ell != 2:
        disc = Fx.add(Fx.mul(b, b),
                      Fx.mul(Fx.from_int(4), fx))
        s = sqrt_in_field(Fx, disc, rng)
        half = Fx.inv(Fx.from_int(2))
        if s is not None:
            y = Fx.mul(Fx.sub(s, b), half)
            return Fx, (x0, y)
        F2 = RelQuad(Fx, Fx.zero(), Fx.neg(disc))  # u^2 = disc
        xe = F2.from_base_elem(x0)
        u = F2.gen()
        y = F2.mul(F2.sub(u, F2.from_base_elem(b)),
                   F2.from_base_elem(half))
        return F2, (xe, y)
    # characteristic 2
    if Fx.is_zero(b):
        # y^2 = fx: squaring is bijective
        y = fx
        for _ in range(_ff_log2_size(Fx) - 1):
            y = Fx.mul(y, y)
        return Fx, (x0, y)
    w = Fx.mul(fx, Fx.inv(Fx.mul(b, b)))
    # try to solve z^2 + z = w in Fx by brute force (small fields)
    for z in _ff_elements(Fx):
        if Fx.eq(Fx.add(Fx.mul(z, z), z), w):
            return Fx, (x0, Fx.mul(b, z))
    F2 = RelQuad(Fx, Fx.one(), w)  # u^2 + u + w = 0
    u = F2.gen()
    y = F2.mul(F2.from_base_elem(b), u)
    return F2, (F2.from_base_elem(x0), y)


def _ff_log2_size(F) -> int:
    n, k = F.size(), 0
    while n > 1:
        n //= 2
        k += 1
    return k


def _ff_elements(F):
    if isinstance(F, PrimeField):
        return list(F.elements())
    return [tuple(v) for v in F.elements()]


# -- semisimplification and classification ------------------------------------


def sturm_bound(conductor: int, weight: int = 2) -> int:
    idx = conductor
    for q in factorize(conductor):
        idx = idx // q * (q + 1)
    return idx * weight // 12 + 1


def character_search_modulus(p: int, conductor: int) -> int:
    """Modulus capturing every character that can appear in the residual
    semisimplification: ramified only at p and the bad primes, tame at
    odd primes away from p, with wild part bounded by the p-1 torsion."""
    M = p
    for q, _ in factorize(conductor).items():
        e = 1
        d = p - 1
        while d % q == 0:
            e += 1
            d //= q
        M *= q**e
    return M


def semisimplification(a_table: dict[int, int], p: int, conductor: int,
                       ell_bound: int):
    """The unordered pair (phi1, phi2) of mod-p characters with
    phi1 phi2 = chi-bar and phi1(ell) + phi2(ell) = a_ell mod p for every
    good ell <= ell_bound, or None when the search proves irreducibility
    at this level of evidence."""
    chi = mod_p_cyclotomic(p)
    M = character_search_modulus(p, conductor)
    candidates = enumerate_characters(M, p - 1, p, 1)
    good_ells = [ell for ell in sorted(a_table)
                 if ell <= ell_bound and conductor % ell and ell != p]
    matches = []
    seen = set()
    for phi1 in candidates:
        phi2 = chi.extend(M).mul(phi1.inverse())
        key = tuple(sorted([phi1.images, phi2.images]))
        if key in seen:
            continue
        seen.add(key)
        ok = True
        for ell in good_ells:
            if (phi1(ell) + phi2(ell) - a_table[ell]) % p != 0:
                ok = False
                break
        if ok:
            matches.append((phi1, phi2))
    if not matches:
        return None
    if len(matches) > 1:
        raise AmbiguousPair(
            f"{len(matches)} character pairs fit; raise ell_bound "
            f"(tested {len(good_ells)} primes, Sturm-style bound "
            f"{sturm_bound(conductor)})")
    return matches[0]


def identify_line_character(scalars: dict[int, int], p: int,
                            conductor: int) -> DirichletCharacter:
    """The mod-p Dirichlet character matching Frobenius scalars at the
    tested good primes."""
    M = character_search_modulus(p, conductor)
    hits = []
    for chi in enumerate_characters(M, p - 1, p, 1):
        if all(chi(ell) % p == lam % p for ell, lam in scalars.items()):
            hits.append(chi)
    if not hits:
        raise InsufficientLineData(
            "no Dirichlet character matches the kernel scalars")
    if len(hits) > 1:
        raise InsufficientLineData(
            f"{len(hits)} characters match; test more primes")
    return hits[0]


def classify_alignment(line_characters, p: int, k_weight: int = 2) -> str:
    """'aligned' iff some stable-line character is odd and carries the
    same p-part of conductor as chi-bar^(k-1); otherwise 'skew'."""
    target_p_part = 1 if (k_weight - 1) % (p - 1) == 0 else p
    for chi in line_characters:
        cond = chi.conductor()
        p_part = p if cond % p == 0 else 1
        if p_part == target_p_part and is_odd(chi):
            return "aligned"
    return "skew"


def alignment_degree(a_table: dict[int, int], p: int, N: int,
                     conductor: int, phi1: DirichletCharacter,
                     ell_bound: int, k_weight: int = 2):
    """Largest n <= N admitting liftable characters phi_(1,n) (odd,
    lifting phi1) and phi_(2,n) with product chi_n^(k-1) matching every
    trace congruence mod p^n.

    This is congruence evidence (a necessary condition for mod-p^n
    alignment), never a proof; the result is tagged accordingly.
    """
    good_ells = [ell for ell in sorted(a_table)
                 if ell <= ell_bound and conductor % ell and ell != p]
    M = character_search_modulus(p, conductor)
    alphas = enumerate_characters(M, p - 1, p, 1)
    evidence = [{"n": 1, "witness": "mod-p alignment established"}]
    n_max = 1
    for n in range(2, N + 1):
        exps = (p - 1) * p**(n - 1)
        found = None
        for alpha in alphas:
            for i in range(exps):
                phi1n = liftable_character(i, alpha, n)
                red = phi1n.reduce_precision(1)
                if not red.agrees_with(phi1):
                    continue
                if not is_odd(phi1n):
                    continue
                psi_n = liftable_character(k_weight - 1,
                                           _trivial_alpha(p), n)
                phi2n = psi_n.mul(phi1n.inverse())
                ok = True
                for ell in good_ells:
                    if (phi1n(ell) + phi2n(ell) - a_table[ell]) \
                            % p**n != 0:
                        ok = False
                        break
                if ok:
                    found = (i, alpha)
                    break
            if found:
                break
        if not found:
            break
        n_max = n
        evidence.append({
            "n": n,
            "witness": f"chi_n^{found[0]} * alpha"
                       f"(conductor {found[1].conductor()})",
        })
    return n_max, evidence


def _trivial_alpha(p: int) -> DirichletCharacter:
    from .dirichlet import trivial_character
    return trivial_character(p, 1)


def division_polynomial(E: Curve, p: int):
    """The p-division polynomial psi_p (odd p), degree (p^2 - 1)/2."""
    if p % 2 == 0:
        raise ValueError("p must be odd")
    return E.division_polynomial(p)


@dataclass(frozen=True)
class ResidualDescriptor:
    """Classification data for one curve at one prime."""

    prime: int
    conductor: int
    reducible: bool
    ss_characters: tuple | None  # unordered pair of mod-p characters
    stable_lines: tuple  # (character, kernel polynomial) per line
    classification: str  # aligned | skew | irreducible
    alignment_degree: int  # congruence lower-bound evidence
    alignment_kind: str = "congruence-lower-bound"

    def to_json(self, label: str) -> dict:
        from .analysis import character_name
        return {
            "label": label,
            "p": self.prime,
            "reducible": self.reducible,
            "ss": sorted(character_name(c) for c in self.ss_characters)
            if self.ss_characters else None,
            "classification": self.classification,
            "alignment_degree": {"n": self.alignment_degree,
                                 "kind": self.alignment_kind},
        }


# -- matrix-model lattice transform --------------------------------------------


@dataclass(frozen=True)
class ModPnRepresentation:
    """Generator images in GL_2(Z/p^n), labelled."""

    p: int
    n: int
    matrices: tuple[tuple[int, int, int, int], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        mod = self.p**self.n
        mats = tuple(tuple(x % mod for x in m) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        for a, b, c, d in mats:
            if (a * d - b * c) % self.p == 0:
                raise ValueError("generator image not invertible mod p")
        if not self.labels:
            object.__setattr__(
                self, "labels",
                tuple(f"g{i}" for i in range(len(mats))))

    def is_aligned_shape(self) -> bool:
        """Every lower-left entry divisible by p (the standard line is
        stable mod p)."""
        return all(c % self.p == 0 for _, _, c, _ in self.matrices)


def isogeny_transform(rep: ModPnRepresentation) -> ModPnRepresentation:
    """Conjugate by diag(p,1)^m1 with m1 = min valuation of the lower-left
    entries: (a, b, c, d) -> (a, p^m1 b, p^-m1 c, d) at level n - m1.

    The output has a unit lower-left entry (the transformed lattice is
    skew); trace and determinant per generator are unchanged mod the new
    level.
    """
    p, n = rep.p, rep.n
    from .padic import val_int
    m1 = min(val_int(c % p**n, p, n) for _, _, c, _ in rep.matrices)
    if m1 == 0:
        raise NotReduciblyAligned("a lower-left entry is already a unit")
    if m1 >= n:
        raise PrecisionLoss(
            f"min valuation {m1} >= working level {n}")
    new_n = n - m1
    mod = p**new_n
    mats = []
    for a, b, c, d in rep.matrices:
        mats.append((a % mod, b * p**m1 % mod,
                     (c % p**n) // p**m1 % mod, d % mod))
    out = ModPnRepresentation(p, new_n, tuple(mats), rep.labels)
    assert not out.is_aligned_shape()
    return out
