"""Mazur-Tate elements along the cyclotomic tower and analytic Iwasawa
invariants.

theta_n lives on Gal(Q_n/Q), realized as coefficients on the powers of a
fixed topological generator gamma = (image of) 1+p.  The element is the
sum over units a mod p^(n+1) of the plus-symbol [a/p^(n+1)] placed at
gamma^t, where (1+p)^t is the 1-unit part of a.  Coefficients are kept as
exact rationals: the raw theta can carry p in a denominator (the
Eisenstein part at the trivial character; theta_0 of 11a1 is -1/5), and
only the unit-root-regularized combination is reduced mod p^N.  (mu,
lambda) are read off once two consecutive layers agree.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction

from .errors import DenominatorAtP, NotStabilized
from .modsym import EigenSymbol
from .padic import (
    IwasawaPolynomial,
    PAdicElement,
    gamma_basis_to_T,
    mu_lambda_of_polynomial,
    teichmuller,
    val_int,
)


@dataclass(frozen=True)
class MazurTateElement:
    """Group-ring element on the layer-n quotient of the cyclotomic tower;
    coeffs[t] sits at gamma^t.  Coefficients are exact rationals whose
    denominators are bounded by the symbol's denominator bound."""

    label: str
    p: int
    N: int
    n: int
    normalization: str
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        assert len(self.coeffs) == self.p**self.n
        object.__setattr__(self, "coeffs",
                           tuple(Fraction(c) for c in self.coeffs))

    def denominator_exponent(self) -> int:
        """Largest e with p^e dividing a coefficient denominator."""
        e = 0
        for c in self.coeffs:
            d = c.denominator
            v = 0
            while d % self.p == 0:
                d //= self.p
                v += 1
            e = max(e, v)
        return e

    def residues(self) -> tuple[int, ...]:
        """Coefficients mod p^N; DenominatorAtP if not p-integral."""
        mod = self.p**self.N
        out = []
        for c in self.coeffs:
            if c.denominator % self.p == 0:
                raise DenominatorAtP(
                    f"coefficient {c} has p={self.p} in its denominator")
            out.append(c.numerator * pow(c.denominator, -1, mod) % mod)
        return tuple(out)

    def scale(self, c) -> "MazurTateElement":
        return MazurTateElement(self.label, self.p, self.N, self.n,
                                self.normalization,
                                tuple(Fraction(c) * x for x in self.coeffs))

    def sub(self, other: "MazurTateElement") -> "MazurTateElement":
        assert (self.p, self.N, self.n) == (other.p, other.N, other.n)
        return MazurTateElement(
            self.label, self.p, self.N, self.n, self.normalization,
            tuple(x - y for x, y in zip(self.coeffs, other.coeffs)))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)


def _gamma_index_table(p: int, n: int) -> dict[int, int]:
    """a -> t with a * teichmuller(a)^(-1) = (1+p)^t mod p^(n+1)."""
    mod = p**(n + 1)
    powers = {}
    g = 1
    for t in range(p**n):
        powers[g] = t
        g = g * (1 + p) % mod
    table = {}
    for a in range(1, mod):
        if a % p == 0:
            continue
        w = teichmuller(a, p, n + 1)
        u = a * pow(w, -1, mod) % mod
        table[a] = powers[u]
    return table


def theta_element(es: EigenSymbol, p: int, n: int, N: int,
                  label: str = "", normalization: str = "neron"
                  ) -> MazurTateElement:
    """theta_n with exact rational coefficients."""
    m = p**(n + 1)
    table = _gamma_index_table(p, n)
    acc = [Fraction(0)] * (p**n)
    for a in range(1, m):
        if a % p == 0:
            continue
        acc[table[a]] += es.evaluate(a, m)
    return MazurTateElement(label, p, N, n, normalization, tuple(acc))


def project_layer(theta: MazurTateElement) -> MazurTateElement:
    """Push layer n to layer n-1: gamma^j -> gamma^(j mod p^(n-1))."""
    assert theta.n >= 1
    p, size = theta.p, theta.p**(theta.n - 1)
    out = [Fraction(0)] * size
    for j, c in enumerate(theta.coeffs):
        out[j % size] += c
    return MazurTateElement(theta.label, p, theta.N, theta.n - 1,
                            theta.normalization, tuple(out))


def inflate_norm(theta: MazurTateElement) -> MazurTateElement:
    """The norm-inflation map layer n -> n+1: gamma-bar^i maps to the sum
    of its p preimages."""
    p = theta.p
    size = p**(theta.n + 1)
    small = p**theta.n
    out = tuple(theta.coeffs[j % small] for j in range(size))
    return MazurTateElement(theta.label, p, theta.N, theta.n + 1,
                            theta.normalization, out)


def norm_relation_defect(theta_n: MazurTateElement,
                         theta_prev: MazurTateElement,
                         theta_prev2: MazurTateElement,
                         a_p: int) -> tuple[Fraction, ...]:
    """pi(theta_n) - (a_p * theta_(n-1) - nu(theta_(n-2))); all zero when
    the three-term relation holds."""
    lhs = project_layer(theta_n)
    rhs = theta_prev.scale(a_p).sub(inflate_norm(theta_prev2))
    return lhs.sub(rhs).coeffs


def regularized_Lp(theta_n: MazurTateElement,
                   theta_prev: MazurTateElement | None,
                   alpha: PAdicElement) -> IwasawaPolynomial:
    """L_n = alpha^-(n+1) (theta_n - alpha^-1 nu(theta_(n-1))), written in
    the T = gamma - 1 coordinate (degree < p^n), reduced mod p^N.

    alpha must be carried at precision N + e where p^e clears the exact
    coefficients' denominators; the output precision is theta_n.N.
    """
    p, N, n = theta_n.p, theta_n.N, theta_n.n
    if not alpha.is_unit():
        raise ValueError("alpha must be a unit")
    terms = list(theta_n.coeffs)
    e = theta_n.denominator_exponent()
    if theta_prev is not None:
        assert theta_prev.n == n - 1
        e = max(e, theta_prev.denominator_exponent())
    if alpha.N < N + e:
        raise ValueError(
            f"alpha needs precision >= {N + e} to clear denominators")
    bigmod = p**(N + e)
    ainv = pow(alpha.value, -1, bigmod)

    def lift(q: Fraction) -> int:
        den = q.denominator
        v = 0
        while den % p == 0:
            den //= p
            v += 1
        return (q.numerator * p**(e - v) * pow(den, -1, bigmod)) % bigmod

    scaled = [lift(c) for c in terms]  # p^e * theta_n mod p^(N+e)
    if theta_prev is not None:
        nu = inflate_norm(theta_prev)
        scaled = [(x - ainv * lift(c)) % bigmod
                  for x, c in zip(scaled, nu.coeffs)]
    out = []
    for c in scaled:
        if c % p**e:
            raise DenominatorAtP(
                "regularized coefficient not p-integral "
                f"(residue {c} mod p^{N + e})")
        out.append((c // p**e) * pow(ainv, n + 1, p**N) % p**N)
    return gamma_basis_to_T(p, N, out)


def analytic_iwasawa_invariants(L_sequence: list[IwasawaPolynomial]
                                ) -> tuple[int, int, int]:
    """(mu, lambda, stabilized_at): invariants from the first pair of
    consecutive layers that agree.

    L_sequence[i] is the regularized element at layer i+1; at least two
    entries are required.
    """
    if len(L_sequence) < 2:
        raise NotStabilized("need at least two consecutive layers")
    pairs = [mu_lambda_of_polynomial(L) for L in L_sequence]
    for i in range(1, len(pairs)):
        if pairs[i] == pairs[i - 1]:
            return pairs[i][0], pairs[i][1], i + 1
    raise NotStabilized(f"no two consecutive layers agree: {pairs}")


def precision_guard(N: int, mu_bound: int, n: int) -> bool:
    """Working precision adequate for reading mu at layer n: the unit-root
    division is numerically delicate when a_p = 1 mod p, so demand
    N >= mu_bound + n + 2."""
    return N >= mu_bound + n + 2


def mu_sequence_admissible(mus: list[int]) -> bool:
    """mu along layers must be non-increasing (then constant)."""
    return all(a >= b for a, b in zip(mus, mus[1:]))


# -- on-disk cache -------------------------------------------------------------


def cache_path(cache_dir: str, label: str, p: int, n: int) -> str:
    return os.path.join(cache_dir, label, str(p), f"theta_{n}.json")


def serialize_theta(theta: MazurTateElement) -> str:
    return json.dumps({
        "label": theta.label,
        "p": theta.p,
        "N": theta.N,
        "n": theta.n,
        "normalization": theta.normalization,
        "coeffs": [str(c) for c in theta.coeffs],
    }, sort_keys=True, separators=(",", ":"))


def write_theta_cache(cache_dir: str, theta: MazurTateElement) -> str:
    path = cache_path(cache_dir, theta.label, theta.p, theta.n)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(serialize_theta(theta))
    os.replace(tmp, path)
    return path


def read_theta_cache(cache_dir: str, label: str, p: int, n: int
                     ) -> MazurTateElement | None:
    path = cache_path(cache_dir, label, p, n)
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        data = json.load(fh)
    return MazurTateElement(
        data["label"], data["p"], data["N"], data["n"],
        data["normalization"],
        tuple(Fraction(c) for c in data["coeffs"]))


def theta_valuations(theta: MazurTateElement) -> list[int]:
    """p-valuations of the residue coefficients (requires integrality)."""
    return [val_int(c, theta.p, theta.N) for c in theta.residues()]
