"""Finite fields and univariate polynomial arithmetic over them.

Three field layers cover everything the curve machinery needs: prime
fields F_ell, extensions F_ell[t]/(g) for an irreducible g, and relative
quadratic extensions (used to adjoin a y-coordinate).  Elements are raw
values (ints, tuples, pairs); the field object owns the arithmetic.
Polynomial factorization over F_ell is squarefree decomposition +
distinct-degree + Cantor-Zassenhaus.
"""

from __future__ import annotations

import random


class PrimeField:
    """F_ell with elements represented as ints in [0, ell)."""

    def __init__(self, ell: int):
        self.ell = ell

    def size(self) -> int:
        return self.ell

    def char(self) -> int:
        return self.ell

    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, n: int):
        return n % self.ell

    def add(self, a, b):
        return (a + b) % self.ell

    def sub(self, a, b):
        return (a - b) % self.ell

    def mul(self, a, b):
        return a * b % self.ell

    def neg(self, a):
        return -a % self.ell

    def inv(self, a):
        return pow(a, -1, self.ell)

    def pow(self, a, k: int):
        if k < 0:
            return pow(self.inv(a), -k, self.ell)
        return pow(a, k, self.ell)

    def is_zero(self, a) -> bool:
        return a % self.ell == 0

    def eq(self, a, b) -> bool:
        return (a - b) % self.ell == 0

    def elements(self):
        return range(self.ell)

    def random(self, rng: random.Random):
        return rng.randrange(self.ell)


class ExtField:
    """F_ell[t]/(g) for a monic irreducible g; elements are int tuples of
    length deg g (coefficients of 1, t, t^2, ...)."""

    def __init__(self, ell: int, modpoly: list[int]):
        if modpoly[-1] != 1:
            raise ValueError("modulus must be monic")
        self.ell = ell
        self.modpoly = tuple(c % ell for c in modpoly)
        self.k = len(modpoly) - 1

    def size(self) -> int:
        return self.ell**self.k

    def char(self) -> int:
        return self.ell

    def zero(self):
        return (0,) * self.k

    def one(self):
        return (1,) + (0,) * (self.k - 1)

    def gen(self):
        """The class of t."""
        if self.k == 1:
            return ((-self.modpoly[0]) % self.ell,)
        return (0, 1) + (0,) * (self.k - 2)

    def from_int(self, n: int):
        return (n % self.ell,) + (0,) * (self.k - 1)

    def from_base(self, coeffs):
        cs = [c % self.ell for c in coeffs[:self.k]]
        return tuple(cs + [0] * (self.k - len(cs)))

    def add(self, a, b):
        return tuple((x + y) % self.ell for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.ell for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x % self.ell for x in a)

    def mul(self, a, b):
        ell = self.ell
        k = self.k
        out = [0] * (2 * k - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        # reduce by the monic modulus
        for d in range(2 * k - 2, k - 1, -1):
            c = out[d] % ell
            if c:
                for i in range(k):
                    out[d - k + i] -= c * self.modpoly[i]
            out[d] = 0
        return tuple(c % ell for c in out[:k])

    def inv(self, a):
        # extended Euclid in F_ell[t]
        r0 = list(self.modpoly)
        r1 = [c % self.ell for c in a]
        s0, s1 = [0], [1]
        while any(c for c in r1):
            q, r = fpoly_divmod(r0, r1, self.ell)
            r0, r1 = r1, r
            s0, s1 = s1, fpoly_sub(s0, fpoly_mul(q, s1, self.ell), self.ell)
        # r0 = gcd (a nonzero constant if a is invertible)
        r0 = fpoly_trim(r0)
        if len(r0) != 1:
            raise ZeroDivisionError("element not invertible")
        c = pow(r0[0], -1, self.ell)
        inv = [x * c % self.ell for x in s0]
        return self.from_base(inv)

    def pow(self, a, k: int):
        if k < 0:
            a = self.inv(a)
            k = -k
        out = self.one()
        base = a
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def is_zero(self, a) -> bool:
        return all(c % self.ell == 0 for c in a)

    def eq(self, a, b) -> bool:
        return self.is_zero(self.sub(a, b))

    def elements(self):
        def rec(i):
            if i == self.k:
                yield ()
                return
            for rest in rec(i + 1):
                for c in range(self.ell):
                    yield (c,) + rest
        return rec(0)

    def random(self, rng: random.Random):
        return tuple(rng.randrange(self.ell) for _ in range(self.k))


class RelQuad:
    """Relative quadratic extension base[u]/(u^2 + alpha*u + beta);
    elements are pairs (a, b) of base elements standing for a + b*u."""

    def __init__(self, base, alpha, beta):
        self.base = base
        self.alpha = alpha
        self.beta = beta

    def size(self) -> int:
        return self.base.size()**2

    def char(self) -> int:
        return self.base.char()

    def zero(self):
        return (self.base.zero(), self.base.zero())

    def one(self):
        return (self.base.one(), self.base.zero())

    def gen(self):
        return (self.base.zero(), self.base.one())

    def from_int(self, n: int):
        return (self.base.from_int(n), self.base.zero())

    def from_base_elem(self, a):
        return (a, self.base.zero())

    def add(self, x, y):
        return (self.base.add(x[0], y[0]), self.base.add(x[1], y[1]))

    def sub(self, x, y):
        return (self.base.sub(x[0], y[0]), self.base.sub(x[1], y[1]))

    def neg(self, x):
        return (self.base.neg(x[0]), self.base.neg(x[1]))

    def mul(self, x, y):
        F = self.base
        a, b = x
        c, d = y
        ac = F.mul(a, c)
        bd = F.mul(b, d)
        ad_bc = F.add(F.mul(a, d), F.mul(b, c))
        # u^2 = -alpha*u - beta
        return (F.sub(ac, F.mul(bd, self.beta)),
                F.sub(ad_bc, F.mul(bd, self.alpha)))

    def conj(self, x):
        """a + b*ubar with ubar = -alpha - u."""
        F = self.base
        a, b = x
        return (F.sub(a, F.mul(b, self.alpha)), F.neg(b))

    def inv(self, x):
        F = self.base
        xc = self.conj(x)
        n = self.mul(x, xc)
        assert F.is_zero(n[1])
        ninv = F.inv(n[0])
        return (F.mul(xc[0], ninv), F.mul(xc[1], ninv))

    def pow(self, a, k: int):
        if k < 0:
            a = self.inv(a)
            k = -k
        out = self.one()
        base = a
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def is_zero(self, a) -> bool:
        return self.base.is_zero(a[0]) and self.base.is_zero(a[1])

    def eq(self, a, b) -> bool:
        return self.is_zero(self.sub(a, b))

    def random(self, rng: random.Random):
        return (self.base.random(rng), self.base.random(rng))


# -- polynomials over F_ell (dense int lists, index = degree) ---------------


def fpoly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def fpoly_add(a, b, ell):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % ell
    return fpoly_trim([c % ell for c in out])


def fpoly_sub(a, b, ell):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % ell
    return fpoly_trim([c % ell for c in out])


def fpoly_mul(a, b, ell):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return fpoly_trim([c % ell for c in out])


def fpoly_divmod(a, b, ell):
    a = [c % ell for c in a]
    b = fpoly_trim([c % ell for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    binv = pow(b[-1], -1, ell)
    q = [0] * max(0, len(a) - len(b) + 1)
    r = list(a)
    while len(fpoly_trim(r)) >= len(b):
        r = fpoly_trim(r)
        d = len(r) - len(b)
        c = r[-1] * binv % ell
        q[d] = c
        for i, bc in enumerate(b):
            r[d + i] = (r[d + i] - c * bc) % ell
    return fpoly_trim(q), fpoly_trim(r)


def fpoly_gcd(a, b, ell):
    a, b = fpoly_trim(list(a)), fpoly_trim(list(b))
    while b:
        _, r = fpoly_divmod(a, b, ell)
        a, b = b, r
    if a:
        inv = pow(a[-1], -1, ell)
        a = [c * inv % ell for c in a]
    return a


def fpoly_powmod(a, k, mod, ell):
    out = [1]
    base = fpoly_divmod(a, mod, ell)[1]
    while k:
        if k & 1:
            out = fpoly_divmod(fpoly_mul(out, base, ell), mod, ell)[1]
        base = fpoly_divmod(fpoly_mul(base, base, ell), mod, ell)[1]
        k >>= 1
    return out


def fpoly_deriv(a, ell):
    return fpoly_trim([i * c % ell for i, c in enumerate(a)][1:])


def fpoly_monic(a, ell):
    a = fpoly_trim(list(a))
    if not a:
        return a
    inv = pow(a[-1], -1, ell)
    return [c * inv % ell for c in a]


def fpoly_eval(a, x, ell):
    out = 0
    for c in reversed(a):
        out = (out * x + c) % ell
    return out


def is_irreducible(f, ell) -> bool:
    """Monic f irreducible over F_ell: t^(ell^k) = t mod f and
    gcd(t^(ell^(k/q)) - t, f) = 1 for primes q | k."""
    f = fpoly_monic(f, ell)
    k = len(f) - 1
    if k <= 0:
        return False
    if k == 1:
        return True
    x = fpoly_divmod([0, 1], f, ell)[1]
    xq = fpoly_powmod([0, 1], ell**k, f, ell)
    if fpoly_trim(fpoly_sub(xq, x, ell)):
        return False
    kk = k
    primes = set()
    d = 2
    while d * d <= kk:
        while kk % d == 0:
            primes.add(d)
            kk //= d
        d += 1
    if kk > 1:
        primes.add(kk)
    for q in primes:
        xe = fpoly_powmod([0, 1], ell**(k // q), f, ell)
        if len(fpoly_gcd(fpoly_sub(xe, x, ell), f, ell)) > 1:
            return False
    return True


def find_irreducible(ell: int, k: int, rng: random.Random) -> list[int]:
    if k == 1:
        return [0, 1]
    while True:
        f = [rng.randrange(ell) for _ in range(k)] + [1]
        if is_irreducible(f, ell):
            return f


def squarefree_part(f, ell):
    """The product of distinct irreducible factors of f (monic)."""
    f = fpoly_monic(f, ell)
    df = fpoly_deriv(f, ell)
    if not df:
        # f is a polynomial in t^ell: f = g(t^ell) = g(t)^ell
        g = [f[i] for i in range(0, len(f), ell)]
        return squarefree_part(g, ell)
    g = fpoly_gcd(f, df, ell)
    sf = fpoly_divmod(f, g, ell)[0]
    if len(g) > 1:
        rest = squarefree_part(g, ell)
        extra = fpoly_divmod(rest, fpoly_gcd(rest, sf, ell), ell)[0]
        sf = fpoly_mul(sf, extra, ell)
    return fpoly_monic(sf, ell)


def distinct_degree(f, ell):
    """[(product of irreducible factors of degree d, d)] for squarefree
    monic f."""
    out = []
    x = [0, 1]
    h = x
    rest = fpoly_monic(f, ell)
    d = 0
    while len(rest) - 1 >= 2 * (d + 1):
        d += 1
        h = fpoly_powmod(h, ell, rest, ell)
        g = fpoly_gcd(fpoly_sub(h, x, ell), rest, ell)
        if len(g) > 1:
            out.append((g, d))
            rest = fpoly_divmod(rest, g, ell)[0]
            h = fpoly_divmod(h, rest, ell)[1]
    if len(rest) > 1:
        out.append((rest, len(rest) - 1))
    return out


def equal_degree_split(f, d, ell, rng):
    """Cantor-Zassenhaus: split monic squarefree f, all of whose
    irreducible factors have degree d."""
    k = len(f) - 1
    if k == d:
        return [f]
    while True:
        r = [rng.randrange(ell) for _ in range(k)] + [1]
        if ell == 2:
            # trace map splitting in characteristic 2
            h = list(r)
            acc = list(r)
            for _ in range(d - 1):
                acc = fpoly_powmod(acc, 2, f, ell)
                h = fpoly_add(h, acc, ell)
            g = fpoly_gcd(h, f, ell)
        else:
            e = (ell**d - 1) // 2
            h = fpoly_powmod(r, e, f, ell)
            g = fpoly_gcd(fpoly_sub(h, [1], ell), f, ell)
        if 1 < len(g) < len(f):
            left = equal_degree_split(g, d, ell, rng)
            right = equal_degree_split(fpoly_divmod(f, g, ell)[0], d,
                                       ell, rng)
            return left + right


def factor_squarefree(f, ell, rng):
    """Irreducible factors of a squarefree monic f over F_ell."""
    out = []
    for block, d in distinct_degree(f, ell):
        out.extend(equal_degree_split(block, d, ell, rng))
    return sorted(out)


def factor(f, ell, rng):
    """Full factorization over F_ell: [(monic irreducible, multiplicity)].
    The leading coefficient is discarded (callers track it separately)."""
    f = fpoly_monic(f, ell)
    out: dict[tuple, int] = {}
    while len(f) > 1:
        sf = squarefree_part(f, ell)
        for g in factor_squarefree(sf, ell, rng):
            out[tuple(g)] = out.get(tuple(g), 0)
            m = 0
            while True:
                q, r = fpoly_divmod(f, g, ell)
                if r:
                    break
                f = q
                m += 1
            out[tuple(g)] += m
    return sorted((list(g), m) for g, m in out.items())


def sqrt_in_field(F, a, rng: random.Random):
    """Square root in a finite field of odd size, or None.

    Tonelli-Shanks on the generic field interface; only needs is_zero,
    mul, pow, random.
    """
    if F.is_zero(a):
        return F.zero()
    q = F.size()
    assert q % 2 == 1
    if not F.eq(F.pow(a, (q - 1) // 2), F.one()):
        return None
    # q - 1 = 2^s * t
    t, s = q - 1, 0
    while t % 2 == 0:
        t //= 2
        s += 1
    if s == 1:
        return F.pow(a, (q + 1) // 4)
    # find a non-residue
    while True:
        z = F.random(rng)
        if F.is_zero(z):
            continue
        if F.eq(F.pow(z, (q - 1) // 2), F.one()):
            continue
        break
    c = F.pow(z, t)
    x = F.pow(a, (t + 1) // 2)
    b = F.pow(a, t)
    m = s
    while not F.eq(b, F.one()):
        # find least i with b^(2^i) = 1
        i = 0
        bb = b
        while not F.eq(bb, F.one()):
            bb = F.mul(bb, bb)
            i += 1
        e = F.pow(c, 1 << (m - i - 1))
        x = F.mul(x, e)
        c = F.mul(e, e)
        b = F.mul(b, c)
        m = i
    return x
