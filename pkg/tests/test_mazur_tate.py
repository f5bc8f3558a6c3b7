from fractions import Fraction

import pytest

from mulab.elliptic import Curve
from mulab.errors import NotStabilized
from mulab.mazur_tate import (
    analytic_iwasawa_invariants,
    inflate_norm,
    norm_relation_defect,
    precision_guard,
    project_layer,
    read_theta_cache,
    regularized_Lp,
    serialize_theta,
    theta_element,
    write_theta_cache,
)
from mulab.modsym import EigenSymbol, build_manin_space
from mulab.padic import (
    hensel_unit_root,
    mu_lambda_of_polynomial,
)

P, N = 5, 6

CURVES = {
    "11a1": (0, -1, 1, -10, -20),
    "11a2": (0, -1, 1, -7820, -263580),
    "11a3": (0, -1, 1, 0, 0),
}


@pytest.fixture(scope="module")
def space():
    return build_manin_space(11)


@pytest.fixture(scope="module")
def symbols(space):
    return {name: EigenSymbol(space, Curve(*a), 11)
            for name, a in CURVES.items()}


@pytest.fixture(scope="module")
def thetas(symbols):
    return {name: [theta_element(es, P, n, N, label=name)
                   for n in range(4)]
            for name, es in symbols.items()}


def test_normalizations(symbols):
    assert symbols["11a1"].base_value == Fraction(1, 5)
    assert symbols["11a2"].base_value == Fraction(1)
    assert symbols["11a3"].base_value == Fraction(1, 25)
    # ratios of the three lattice normalizations are powers of 5
    for a in CURVES:
        for b in CURVES:
            q = symbols[a].base_value / symbols[b].base_value
            while q.numerator % 5 == 0:
                q = q / 5
            while q.denominator % 5 == 0:
                q = q * 5
            assert q == 1


def test_theta_layer0_is_single_coefficient(thetas):
    for name in CURVES:
        assert len(thetas[name][0].coeffs) == 1
    # the trivial-layer coefficient carries the Eisenstein denominator
    assert thetas["11a1"][0].coeffs[0] == Fraction(-1, 5)


def test_coefficient_counts(thetas):
    for name in CURVES:
        for n in range(4):
            assert len(thetas[name][n].coeffs) == 5**n


def test_norm_relation(thetas):
    ap = Curve(*CURVES["11a1"]).ap(5)
    for name in CURVES:
        t = thetas[name]
        for n in (2, 3):
            defect = norm_relation_defect(t[n], t[n - 1], t[n - 2], ap)
            assert all(c == 0 for c in defect)


def test_projection_inflation_adjoint(thetas):
    # pi(nu(x)) = p * x
    t1 = thetas["11a1"][1]
    back = project_layer(inflate_norm(t1))
    assert back.coeffs == tuple(5 * c for c in t1.coeffs)


def test_theta_linearity(symbols):
    es = symbols["11a1"]
    t = theta_element(es, P, 1, N)
    es5 = EigenSymbol.__new__(EigenSymbol)
    es5.__dict__.update(es.__dict__)
    es5.phi = [5 * x for x in es.phi]
    t5 = theta_element(es5, P, 1, N)
    assert t5.coeffs == tuple(5 * c for c in t.coeffs)


def test_regularized_compatibility(thetas):
    """The image of L_n at layer n-1 equals L_(n-1) (projection after
    expanding back to the gamma basis is awkward; compare through the
    defining property instead: both layers yield identical invariants and
    the three-term relation held exactly)."""
    alpha = hensel_unit_root(1, P, N + 3)
    for name in CURVES:
        t = thetas[name]
        L = [regularized_Lp(t[n], t[n - 1], alpha) for n in range(1, 4)]
        invs = [mu_lambda_of_polynomial(x) for x in L]
        assert invs[0] == invs[1] == invs[2]


def test_regularized_theta_prev_none(thetas):
    alpha = hensel_unit_root(1, P, N + 3)
    t1 = thetas["11a2"][1]
    L = regularized_Lp(t1, None, alpha)
    # alpha^-(n+1) * theta_n with no correction term
    ainv2 = pow(pow(alpha.value, -1, 5**N), 2, 5**N)
    from mulab.padic import gamma_basis_to_T
    direct = gamma_basis_to_T(5, N, [ainv2 * c.numerator
                                     * pow(c.denominator, -1, 5**N)
                                     for c in t1.coeffs])
    assert L == direct


def test_mu_lambda_11a_class(thetas):
    """The worked example: mu = 1, 2, 0 for 11a1, 11a2, 11a3 at p = 5,
    stabilized across consecutive layers, with lambda an isogeny
    invariant."""
    alpha = hensel_unit_root(1, P, N + 3)
    expected_mu = {"11a1": 1, "11a2": 2, "11a3": 0}
    lambdas = set()
    for name in CURVES:
        t = thetas[name]
        L = [regularized_Lp(t[n], t[n - 1], alpha) for n in range(1, 4)]
        mu, lam, stab = analytic_iwasawa_invariants(L)
        assert mu == expected_mu[name], name
        assert stab <= 3
        lambdas.add(lam)
    assert len(lambdas) == 1  # lambda is an isogeny invariant


def test_interpolation_euler_factor(thetas, symbols):
    """aug(L_n) = (1 - alpha^-1)^2 * L(E,1)/Omega, exactly mod p^N after
    clearing the p-part of the rational value's denominator."""
    alpha = hensel_unit_root(1, P, N + 3)
    for name in CURVES:
        t = thetas[name]
        L2 = regularized_Lp(t[2], t[1], alpha)
        aug = L2.coeffs[0]
        ratio = symbols[name].base_value
        d0, v = ratio.denominator, 0
        while d0 % P == 0:
            d0 //= P
            v += 1
        bigmod = P**(N + v)
        ainv = pow(alpha.value, -1, bigmod)
        expected_scaled = ((1 - ainv)**2 * ratio.numerator
                           * pow(d0, -1, bigmod)) % bigmod
        assert (aug * P**v - expected_scaled) % P**N == 0


def test_not_stabilized_and_guard():
    from mulab.padic import IwasawaPolynomial
    a = IwasawaPolynomial(5, 4, 5, [1, 0, 0])
    b = IwasawaPolynomial(5, 4, 5, [5, 1, 0])
    with pytest.raises(NotStabilized):
        analytic_iwasawa_invariants([a, b])
    with pytest.raises(NotStabilized):
        analytic_iwasawa_invariants([a])
    assert precision_guard(6, 2, 2)
    assert not precision_guard(6, 2, 3)


def test_cache_round_trip(tmp_path, thetas):
    t = thetas["11a1"][2]
    path = write_theta_cache(str(tmp_path), t)
    again = read_theta_cache(str(tmp_path), "11a1", 5, 2)
    assert again == t
    # byte-identical re-serialization
    assert serialize_theta(again) == serialize_theta(t)
    with open(path) as fh:
        assert fh.read() == serialize_theta(t)
