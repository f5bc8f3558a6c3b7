"""Weight-2 modular symbols for Gamma_0(N) via Manin symbols.

The symbol space is the free Q-module on P^1(Z/N) modulo the two- and
three-term Manin relations; the cuspidal part is the kernel of the
boundary map.  Hecke operators act through Merel's matrices.  A rational
eigensymbol is cut out as a joint left-eigenvector and normalized so that
its value on the path {0 -> oo} equals L(f,1) / (real Neron period of the
designated curve), computed by an mpmath oracle and rationalized with a
denominator bound.  All symbol arithmetic is exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

import mpmath as mp

from .elliptic import Curve
from .errors import EigenspaceNotOneDimensional, EigenspaceNotRational
from .linalg import clear_denominators, nullspace, rref


def _gcdex(a, b):
    if b == 0:
        return (1, 0, a) if a >= 0 else (-1, 0, -a)
    x, y, g = _gcdex(b, a % b)
    return y, x - y * (a // b), g


class P1:
    """Representatives for P^1(Z/N): classes of (c:d), gcd(c, d, N) = 1."""

    def __init__(self, N: int):
        self.N = N
        reps = []
        index = {}
        seen = set()
        units = [u for u in range(1, max(N, 2)) if gcd(u, N) == 1] or [1]
        for c in range(N):
            for d in range(N):
                if gcd(gcd(c, d), N) != 1:
                    continue
                if (c, d) in seen:
                    continue
                orbit = set()
                for u in units:
                    orbit.add((u * c % N, u * d % N))
                rep = min(orbit)
                for t in orbit:
                    seen.add(t)
                    index[t] = len(reps)
                reps.append(rep)
        if N == 1:
            reps = [(0, 0)]
            index = {(0, 0): 0}
        self.reps = reps
        self.index_map = index

    def __len__(self):
        return len(self.reps)

    def index(self, c: int, d: int) -> int:
        if self.N == 1:
            return 0
        return self.index_map[(c % self.N, d % self.N)]

    def lift(self, i: int):
        """An SL_2(Z) matrix (a, b; c, d) whose bottom row represents
        class i."""
        N = self.N
        c, d = self.reps[i]
        if N == 1:
            return (1, 0, 0, 1)
        if c % N == 0:
            return (1, 0, 0, 1)  # (0:1) <- identity
        # keep c, adjust d by multiples of N until coprime to c
        c0 = c if c != 0 else N
        d0 = d
        k = 0
        while gcd(c0, d0) != 1:
            d0 += N
            k += 1
            if k > 4 * N + 4:
                raise RuntimeError("no coprime lift found")
        x, y, g = _gcdex(c0, d0)
        assert g == 1
        # a*d0 - b*c0 = 1
        a, b = y, -x
        assert a * d0 - b * c0 == 1
        return (a, b, c0, d0)


def merel_matrices(n: int):
    """Merel's set X_n of integer matrices of determinant n."""
    for a in range(1, n + 1):
        for d in range((n + a - 1) // a, n + 2 - a):
            bc = a * d - n
            if bc == 0:
                for b in range(a):
                    yield (a, b, 0, d)
                for c in range(1, d):
                    yield (a, 0, c, d)
            else:
                if d == 1:
                    continue
                for b in range((bc - 1) // (d - 1) + 1, a):
                    if bc % b == 0:
                        yield (a, b, bc // b, d)


def continued_fraction_path(a: int, m: int):
    """Convergents p_j/q_j of a/m including p_(-1)/q_(-1) = 1/0."""
    if m == 0:
        return [(1, 0)]
    sign = -1 if m < 0 else 1
    a, m = a * sign, m * sign
    quots = []
    x, y = a, m
    while y:
        q, r = divmod(x, y)
        quots.append(q)
        x, y = y, r
    convs = [(1, 0)]
    p0, q0 = 1, 0
    p1, q1 = quots[0], 1
    convs.append((p1, q1))
    for q in quots[1:]:
        p0, q0, p1, q1 = p1, q1, q * p1 + p0, q * q1 + q0
        convs.append((p1, q1))
    return convs


class ManinSymbolSpace:
    """Quotient of the free module on P^1(Z/N) by the Manin relations."""

    def __init__(self, N: int):
        self.N = N
        self.p1 = P1(N)
        n = len(self.p1)
        # 2-term reduction: orbits of S: (c:d) -> (d:-c), x + xS = 0
        # choose a representative per orbit; x_rep determined up to sign
        red = [None] * n  # index -> (rep_slot, sign) or ("zero",)
        slot_of = {}
        slots = 0
        for i in range(n):
            if red[i] is not None:
                continue
            c, d = self.p1.reps[i]
            j = self.p1.index(d, -c)
            if j == i:
                # x = -x: x = 0 (S-fixed class)
                red[i] = (None, 0)
                continue
            slot = slots
            slots += 1
            slot_of[i] = slot
            red[i] = (slot, 1)
            red[j] = (slot, -1)
        self._red = red
        self._nslots = slots
        # 3-term relations x + xU + xU^2 = 0 expressed in slots
        rel_rows = []
        seen_orbits = set()
        for i in range(n):
            c, d = self.p1.reps[i]
            j = self.p1.index(d, -c - d)
            k = self.p1.index(-c - d, c)
            orbit = frozenset((i, j, k))
            if orbit in seen_orbits:
                continue
            seen_orbits.add(orbit)
            row = [Fraction(0)] * slots
            for t in (i, j, k):
                s, sgn = red[t]
                if s is not None:
                    row[s] += sgn
            rel_rows.append(row)
        R, pivots = rref(rel_rows)
        free = [s for s in range(slots) if s not in pivots]
        self.free_slots = free
        self.dim = len(free)
        # express every slot in the free basis
        expr = {}
        for fi, s in enumerate(free):
            v = [Fraction(0)] * self.dim
            v[fi] = Fraction(1)
            expr[s] = v
        for ri, pcol in enumerate(pivots):
            v = [Fraction(0)] * self.dim
            for fi, s in enumerate(free):
                v[fi] = -R[ri][s]
            expr[pcol] = v
        self._slot_expr = expr

    def project(self, i: int):
        """Coordinates of the i-th P^1 generator in the free basis."""
        s, sgn = self._red[i]
        if s is None:
            return [Fraction(0)] * self.dim
        return [sgn * x for x in self._slot_expr[s]]

    def basis_generator_indices(self):
        """A P^1 index representing each free basis slot (sign +1)."""
        out = []
        inv = {}
        for i in range(len(self.p1)):
            s, sgn = self._red[i]
            if s is not None and sgn == 1 and s not in inv:
                inv[s] = i
        for s in self.free_slots:
            out.append(inv[s])
        return out

    # -- operators -----------------------------------------------------------

    def hecke_matrix(self, n: int):
        """T_n on the quotient (columns indexed by the free basis)."""
        N = self.N
        cols = []
        for i in self.basis_generator_indices():
            c, d = self.p1.reps[i]
            acc = [Fraction(0)] * self.dim
            for (a, b, cc, dd) in merel_matrices(n):
                c1 = (a * c + cc * d) % N
                d1 = (b * c + dd * d) % N
                if gcd(gcd(c1, d1), N) != 1:
                    continue
                v = self.project(self.p1.index(c1, d1))
                acc = [x + y for x, y in zip(acc, v)]
            cols.append(acc)
        # columns are images; matrix acts on coordinate vectors
        return [[cols[j][i] for j in range(self.dim)]
                for i in range(self.dim)]

    def star_matrix(self):
        """The involution (c:d) -> (-c:d)."""
        cols = []
        for i in self.basis_generator_indices():
            c, d = self.p1.reps[i]
            cols.append(self.project(self.p1.index(-c, d)))
        return [[cols[j][i] for j in range(self.dim)]
                for i in range(self.dim)]

    # -- boundary ------------------------------------------------------------

    def _cusp_class(self, cusps: list, p: int, q: int) -> int:
        g = gcd(p, q)
        if g:
            p, q = p // g, q // g
        if q < 0:
            p, q = -p, -q
        for idx, (p2, q2) in enumerate(cusps):
            if self._cusp_equiv((p, q), (p2, q2)):
                return idx
        cusps.append((p, q))
        return len(cusps) - 1

    def _cusp_equiv(self, u, v) -> bool:
        (p1, q1), (p2, q2) = u, v
        s1 = _gcdex(p1, q1)[0]
        s2 = _gcdex(p2, q2)[0]
        g = gcd(self.N, q1 * q2)
        return (s1 * q2 - s2 * q1) % g == 0

    def boundary_matrix(self):
        """Boundary of each free generator: rows = cusp classes."""
        cusps: list = []
        cols = []
        for i in self.basis_generator_indices():
            a, b, c, d = self.p1.lift(i)
            entries = {}
            top = self._cusp_class(cusps, a, c)
            bot = self._cusp_class(cusps, b, d)
            entries[top] = entries.get(top, 0) + 1
            entries[bot] = entries.get(bot, 0) - 1
            cols.append(entries)
        rows = [[Fraction(cols[j].get(i, 0)) for j in range(self.dim)]
                for i in range(len(cusps))]
        self.cusp_reps = cusps
        return rows

    def cuspidal_dimension(self) -> int:
        return len(nullspace(self.boundary_matrix()))

    # -- paths ---------------------------------------------------------------

    def path_infty_to(self, a: int, m: int):
        """{oo -> a/m} as a list of P^1 generator indices.

        Each continued-fraction segment {p_(j-1)/q_(j-1) -> p_j/q_j} is a
        unimodular path, i.e. a single Manin generator.
        """
        if m == 0:
            return []
        convs = continued_fraction_path(a, m)
        out = []
        for j in range(1, len(convs)):
            pj, qj = convs[j]
            pj1, qj1 = convs[j - 1]
            det0 = pj * qj1 - pj1 * qj
            assert det0 in (1, -1)
            # gamma = (pj, det0*pj1; qj, det0*qj1) lies in SL_2(Z) and
            # sends {0 -> oo} to this segment
            out.append(self.p1.index(qj % self.N, det0 * qj1 % self.N))
        return out

    def path_vector(self, a: int, m: int):
        """Quotient coordinates of the path {a/m -> oo}."""
        acc = [Fraction(0)] * self.dim
        for idx in self.path_infty_to(a, m):
            v = self.project(idx)
            acc = [x - y for x, y in zip(acc, v)]
        return acc


def build_manin_space(N: int) -> ManinSymbolSpace:
    return ManinSymbolSpace(N)


# -- period / L-value oracle --------------------------------------------------


def real_period(E: Curve, dps: int = 50) -> mp.mpf:
    """Volume of E(R) for the invariant differential dx/(2y + a1x + a3).

    The component period is 2 * int_(e1)^inf dx/sqrt(g); the head is
    integrated after x = e1 + t^2 (which removes the square-root
    singularity) and the tail comes from a binomial expansion of
    g(x)^(-1/2) about x = inf, so the quadrature only ever sees a smooth
    integrand on a finite interval.
    """
    with mp.workdps(dps):
        b2, b4, b6 = E.b2, E.b4, E.b6
        roots = mp.polyroots([4, b2, 2 * b4, b6], maxsteps=400,
                             extraprec=200)
        real_roots = sorted(r.real for r in roots
                            if abs(r.imag) < mp.mpf(10)**(-dps // 2))
        e1 = max(real_roots)
        gp = 12 * e1 * e1 + 2 * b2 * e1 + 2 * b4   # g'(e1)
        gpp_half = 12 * e1 + b2                    # g''(e1)/2

        def integrand(t):
            u = t * t
            return 1 / mp.sqrt(4 * u * u + gpp_half * u + gp)

        bigroot = max(abs(r) for r in roots)
        X = 32 * max(mp.mpf(1), bigroot, abs(e1))
        T = mp.sqrt(X - e1)
        head = 2 * mp.quad(integrand, [0, T / 8, T], maxdegree=14)
        tail = _period_tail(b2, b4, b6, X, dps)
        omega = 2 * (head + tail)
        components = 2 if E.discriminant > 0 else 1
        return components * omega


def _period_tail(b2, b4, b6, X, dps):
    """int_X^inf dx/sqrt(4x^3 + b2 x^2 + 2 b4 x + b6) by expanding
    (1 + u)^(-1/2), u = (b2/4)/x + (b4/2)/x^2 + (b6/4)/x^3."""
    u1, u2, u3 = mp.mpf(b2) / 4, mp.mpf(b4) / 2, mp.mpf(b6) / 4
    # coefficients of u^k as a polynomial in 1/x, accumulated into
    # inverse-power buckets: total integrand = x^(-3/2)/2 * sum c_j x^(-j)
    terms = {0: mp.mpf(1)}  # current u^k expansion, k = 0
    total = {0: mp.mpf(1)}
    binom = mp.mpf(1)
    kmax = 4 * dps
    for k in range(1, kmax):
        binom *= mp.mpf(2 * k - 1) / (2 * k) * (-1)
        new = {}
        for j, c in terms.items():
            for dj, uc in ((1, u1), (2, u2), (3, u3)):
                if uc:
                    new[j + dj] = new.get(j + dj, mp.mpf(0)) + c * uc
        terms = new
        if not terms:
            break
        peak = max(abs(c) * X**(-j) for j, c in terms.items())
        for j, c in terms.items():
            total[j] = total.get(j, mp.mpf(0)) + binom * c
        if peak * abs(binom) < mp.mpf(10)**(-dps - 8):
            break
    out = mp.mpf(0)
    for j, c in total.items():
        out += c * X**(mp.mpf(-0.5) - j) / (mp.mpf(0.5) + j)
    return out / 2


def l_value(E: Curve, conductor: int, dps: int = 40) -> mp.mpf:
    """L(E, 1) by the exponentially convergent a_n series (returns ~0 for
    odd functional equation)."""
    with mp.workdps(dps):
        n_max = max(80, int(9 * mp.sqrt(conductor)))
        a = E.an_list(n_max)
        x = mp.exp(-2 * mp.pi / mp.sqrt(conductor))
        total = mp.mpf(0)
        for n in range(1, n_max + 1):
            if a[n - 1]:
                total += mp.mpf(a[n - 1]) / n * x**n
        return 2 * total


def rationalize(value: mp.mpf, max_den: int = 10**6,
                tol: str = "1e-25") -> Fraction:
    with mp.workdps(50):
        fr = Fraction(*float(value).as_integer_ratio()) \
            .limit_denominator(max_den)
        err = abs(value - mp.mpf(fr.numerator) / fr.denominator)
        if err > mp.mpf(tol) * max(1, abs(value)):
            raise EigenspaceNotRational(
                f"value {mp.nstr(value, 20)} does not rationalize "
                f"within denominator {max_den}")
    return fr


class EigenSymbol:
    """Rational dual eigenvector on the plus-quotient, normalized so that
    the value of {0 -> oo} is L(f,1)/Omega_plus(E)."""

    def __init__(self, space: ManinSymbolSpace, curve: Curve,
                 conductor: int, match_primes=None):
        self.space = space
        self.curve = curve
        self.conductor = conductor
        if match_primes is None:
            match_primes = self._good_primes(3)
        self.match_primes = match_primes
        self._a = {ell: curve.ap(ell) for ell in match_primes}
        self._find_functional()
        self._normalize()

    def _good_primes(self, count):
        out = []
        q = 2
        while len(out) < count:
            if _is_prime_small(q) and self.conductor % q != 0:
                out.append(q)
            q += 1
        return out

    def _find_functional(self):
        sp = self.space
        # rows of constraints: v * (A - a I) = 0 -> (A^T - a I) v = 0
        rows = []
        for ell in self.match_primes:
            A = sp.hecke_matrix(ell)
            a = self._a[ell]
            for j in range(sp.dim):
                rows.append([A[i][j] - (a if i == j else 0)
                             for i in range(sp.dim)])
        S = sp.star_matrix()
        for j in range(sp.dim):
            rows.append([S[i][j] - (1 if i == j else 0)
                         for i in range(sp.dim)])
        kern = nullspace(rows)
        if len(kern) == 0:
            raise EigenspaceNotRational(
                f"no rational eigensymbol for a_ell = {self._a}")
        if len(kern) > 1:
            # try more primes before giving up
            if len(self.match_primes) < 10:
                self.match_primes = self._good_primes(
                    len(self.match_primes) + 3)
                self._a = {ell: self.curve.ap(ell)
                           for ell in self.match_primes}
                return self._find_functional()
            raise EigenspaceNotOneDimensional(
                f"eigenspace dimension {len(kern)}")
        self._phi0 = clear_denominators(kern[0])

    def _normalize(self):
        sp = self.space
        base = sp.path_vector(0, 1)
        raw_base = sum(p * b for p, b in zip(self._phi0, base))
        if raw_base == 0:
            raise EigenspaceNotRational(
                "base path value is zero (positive analytic rank); "
                "the Neron-period normalization needs L(E,1) != 0")
        omega = real_period(self.curve)
        lval = l_value(self.curve, self.conductor)
        with mp.workdps(50):
            ratio = rationalize(lval / omega)
        if ratio == 0:
            raise EigenspaceNotRational(
                "L(E,1) = 0: positive analytic rank not supported")
        scale = ratio / raw_base
        self.phi = [x * scale for x in self._phi0]
        self.base_value = ratio
        self.period = omega
        self.l_value = lval
        dens = [Fraction(x).denominator for x in self.phi]
        self.denominator_bound = lcm(*dens) if dens else 1

    def evaluate(self, a: int, m: int) -> Fraction:
        """[a/m]^+ = value of the path {a/m -> oo}."""
        if gcd(a, m) != 1:
            raise ValueError("a/m must be in lowest terms")
        v = self.space.path_vector(a, m)
        return sum((p * x for p, x in zip(self.phi, v)), Fraction(0))


def _is_prime_small(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def eigen_symbol(space: ManinSymbolSpace, curve: Curve,
                 conductor: int) -> EigenSymbol:
    return EigenSymbol(space, curve, conductor)


def hecke_operator(space: ManinSymbolSpace, ell: int):
    """Exact matrix of T_ell on the quotient (ell coprime to the
    level)."""
    if space.N % ell == 0:
        raise ValueError("ell must not divide the level")
    return space.hecke_matrix(ell)


def evaluate_symbol(es: EigenSymbol, a: int, m: int) -> Fraction:
    """[a/m]^+ as an exact rational (gcd(a, m) = 1)."""
    return es.evaluate(a, m)
