"""Per-curve orchestration: ingestion, residual classification, analytic
Iwasawa invariants, cross-checks, and the serializable report.

Analytic mu is reported as the mu-invariant of the p-primary Selmer group
conditional on the main conjecture; the assumption is carried in every
report rather than silently applied.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from .dirichlet import DirichletCharacter, is_odd, mod_p_cyclotomic
from .elliptic import Curve
from .errors import (
    BadReduction,
    InconsistentAp,
    InvalidModel,
    InvariantViolation,
    NotOrdinary,
    ParseError,
)
from .mazur_tate import (
    analytic_iwasawa_invariants,
    precision_guard,
    read_theta_cache,
    regularized_Lp,
    serialize_theta,
    theta_element,
    write_theta_cache,
)
from .modsym import EigenSymbol, build_manin_space
from .padic import hensel_unit_root, mu_lambda_of_polynomial
from .residual import (
    alignment_degree,
    classify_alignment,
    frobenius_scalar,
    identify_line_character,
    kernel_polynomials,
    semisimplification,
    sturm_bound,
)

MAIN_CONJECTURE_FLAG = ("analytic mu reported as Selmer mu "
                        "(main conjecture)")


@dataclass
class CurveRecord:
    label: str
    ainvs: tuple
    conductor: int
    ap: dict = field(default_factory=dict)
    kernel_polys: dict = field(default_factory=dict)
    source: str = "inline"

    def curve(self) -> Curve:
        return Curve(*self.ainvs)


def ingest(path: str) -> list[CurveRecord]:
    """Read LMFDB-shaped curve records; validate models and any supplied
    a_ell by point counting at ell <= 20."""
    if not os.path.exists(path):
        raise ParseError(f"no such file: {path}")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, list):
        raise ParseError("curve file must contain a list of records")
    out = []
    for rec in data:
        for key in ("label", "ainvs", "conductor"):
            if key not in rec:
                raise ParseError(f"record missing '{key}': {rec}")
        try:
            E = Curve(*rec["ainvs"])
        except InvalidModel as exc:
            raise InvalidModel(
                f"{rec['label']}: {exc}") from exc
        N = rec["conductor"]
        bad = set(E.bad_primes())
        cond_primes = set()
        n = N
        q = 2
        while q * q <= n:
            while n % q == 0:
                cond_primes.add(q)
                n //= q
            q += 1
        if n > 1:
            cond_primes.add(n)
        if bad != cond_primes:
            raise InvalidModel(
                f"{rec['label']}: model bad primes {sorted(bad)} do not "
                f"match conductor support {sorted(cond_primes)} "
                "(supply a minimal model)")
        ap = {int(k): v for k, v in rec.get("ap", {}).items()}
        for ell, a in ap.items():
            if ell <= 20 and N % ell != 0:
                if E.ap(ell) != a:
                    raise InconsistentAp(
                        f"{rec['label']}: a_{ell} supplied {a} but point "
                        f"count gives {E.ap(ell)}")
        out.append(CurveRecord(
            label=rec["label"], ainvs=tuple(rec["ainvs"]), conductor=N,
            ap=ap, kernel_polys=rec.get("kernel_polys", {}),
            source=path))
    return out


def character_name(chi: DirichletCharacter) -> str:
    p = chi.p
    if chi.conductor() == 1:
        return "1"
    chibar = mod_p_cyclotomic(p)
    if chi.N == 1 and chi.agrees_with(chibar.extend(chi.modulus)):
        return "chi"
    return (f"chr(cond={chi.conductor()},ord={chi.order()},"
            f"odd={is_odd(chi)})")


class SpaceCache:
    """Manin-symbol spaces keyed by level (they are immutable)."""

    def __init__(self):
        self._spaces = {}

    def get(self, N: int):
        if N not in self._spaces:
            self._spaces[N] = build_manin_space(N)
        return self._spaces[N]


_GLOBAL_SPACES = SpaceCache()


def analyze(record: CurveRecord, p: int, N_prec: int = 6,
            layers: int = 3, ell_bound: int = 200,
            cache_dir: str | None = None,
            verify_cache: bool = False,
            spaces: SpaceCache | None = None) -> dict:
    """Full analysis of one curve at one prime; returns the report dict.

    Raises the module errors for genuinely unusable inputs (bad reduction
    at p, non-ordinary p) and InvariantViolation when an internal
    cross-check fails.
    """
    if p == 2:
        raise ValueError("p must be odd")
    spaces = spaces or _GLOBAL_SPACES
    E = record.curve()
    N_cond = record.conductor
    if N_cond % p == 0:
        raise BadReduction(
            f"{record.label}: bad reduction at p={p}; the ordinary "
            "hypothesis requires good reduction at p")
    a_p = E.ap(p)
    if a_p % p == 0:
        raise NotOrdinary(f"{record.label}: a_p = {a_p} is 0 mod {p}")

    a_table = {ell: E.ap(ell) for ell in range(2, ell_bound + 1)
               if _is_prime(ell) and N_cond % ell != 0 and ell != p}

    report = {
        "label": record.label,
        "p": p,
        "conductor": N_cond,
        "ainvs": list(record.ainvs),
        "a_p": a_p,
        "precision": {"p": p, "N": N_prec, "layers": layers,
                      "ell_bound": ell_bound,
                      "sturm_bound": sturm_bound(N_cond)},
        "assumptions": [MAIN_CONJECTURE_FLAG],
    }

    # residual analysis
    pair = semisimplification(a_table, p, N_cond, ell_bound)
    report["reducible"] = pair is not None
    if pair is not None:
        phi1, phi2 = pair
        names = sorted([character_name(phi1), character_name(phi2)])
        report["ss"] = names
        kernels = record.kernel_polys.get(str(p))
        if kernels is None:
            kernels = kernel_polynomials(E, p)
        else:
            kernels = [tuple(Fraction(c) for c in k) for k in kernels]
        report["kernel_count"] = len(kernels)
        line_chars = []
        for k in kernels:
            scal = {}
            ell = 2
            while len(scal) < 6 and ell < 4 * ell_bound:
                if N_cond % ell and ell != p and _is_prime(ell):
                    try:
                        scal[ell] = frobenius_scalar(E, k, ell, p)
                    except Exception:
                        pass
                ell += 1
            line_chars.append(identify_line_character(scal, p, N_cond))
        report["line_characters"] = [character_name(c) for c in line_chars]
        if kernels:
            cls = classify_alignment(line_chars, p)
            report["classification"] = cls
            if cls == "aligned":
                aligned_char = next(
                    c for c in line_chars
                    if is_odd(c) and c.conductor() % p == 0)
                n_max, evidence = alignment_degree(
                    a_table, p, N_prec, N_cond, aligned_char, ell_bound)
                report["alignment_degree"] = {
                    "n": n_max, "kind": "congruence-lower-bound",
                    "evidence": evidence}
            else:
                report["alignment_degree"] = {
                    "n": 0, "kind": "not-aligned"}
        else:
            report["classification"] = "reducible-no-kernel-data"
    else:
        report["ss"] = None
        report["classification"] = "irreducible"

    # analytic invariants
    space = spaces.get(N_cond)
    es = EigenSymbol(space, E, N_cond)
    report["normalization"] = {
        "id": "neron",
        "base_symbol_value": str(es.base_value),
        "real_period": mp.nstr(es.period, 30),
        "l_value": mp.nstr(es.l_value, 30),
        "denominator_bound": es.denominator_bound,
        "gamma": 1 + p,
    }
    alpha = hensel_unit_root(a_p, p, N_prec + layers + 2)
    thetas = []
    mu_estimate = 0
    for n in range(0, layers + 1):
        if n >= 1 and not precision_guard(N_prec, mu_estimate, n):
            break
        theta = None
        if cache_dir:
            cached = read_theta_cache(cache_dir, record.label, p, n)
            if cached is not None and not verify_cache:
                theta = cached
        if theta is None:
            theta = theta_element(es, p, n, N_prec, label=record.label)
            if cache_dir:
                if verify_cache:
                    cached = read_theta_cache(cache_dir, record.label,
                                              p, n)
                    if cached is not None and serialize_theta(cached) != \
                            serialize_theta(theta):
                        raise InvariantViolation(
                            f"{record.label}: cached theta_{n} differs "
                            "from recomputation")
                write_theta_cache(cache_dir, theta)
        thetas.append(theta)
        if n >= 1:
            L = regularized_Lp(thetas[n], thetas[n - 1], alpha)
            mu_n, _ = mu_lambda_of_polynomial(L)
            mu_estimate = max(mu_estimate, mu_n)
    Ls = [regularized_Lp(thetas[n], thetas[n - 1], alpha)
          for n in range(1, len(thetas))]
    layer_invs = [mu_lambda_of_polynomial(L) for L in Ls]
    mus = [m for m, _ in layer_invs]
    if any(b > a for a, b in zip(mus, mus[1:])):
        raise InvariantViolation(
            f"{record.label}: mu along layers not non-increasing: {mus}")
    mu, lam, stab = analytic_iwasawa_invariants(Ls)
    report["mu"] = mu
    report["lambda"] = lam
    report["stabilized_at"] = stab
    report["layer_invariants"] = [list(t) for t in layer_invs]

    # Theorem-consistency: congruence evidence degree <= mu
    deg = report.get("alignment_degree", {}).get("n", 0)
    if report.get("classification") == "aligned" and deg > mu:
        raise InvariantViolation(
            f"{record.label}: alignment evidence degree {deg} exceeds "
            f"mu = {mu}")
    report["consistency"] = {"alignment_degree_le_mu": deg <= mu}
    return report


def analyze_many(records, p_of, **kwargs) -> list[dict]:
    """Analyze several records (p chosen per record by p_of) and enforce
    the cross-curve isogeny-class assertions: curves sharing conductor
    and a_ell data must agree in ss and lambda."""
    spaces = kwargs.pop("spaces", None) or SpaceCache()
    reports = []
    for rec in records:
        reports.append(analyze(rec, p_of(rec), spaces=spaces, **kwargs))
    by_class = {}
    for rec, rep in zip(records, reports):
        E = rec.curve()
        sig = (rec.conductor, rep["p"],
               tuple(E.ap(ell) for ell in (2, 3, 5, 7, 13)
                     if rec.conductor % ell and ell != rep["p"]))
        by_class.setdefault(sig, []).append(rep)
    for sig, group in by_class.items():
        if len(group) < 2:
            continue
        lams = {rep["lambda"] for rep in group}
        sss = {tuple(rep["ss"] or []) for rep in group}
        if len(lams) > 1:
            raise InvariantViolation(
                f"lambda not constant on isogeny class {sig}: {lams}")
        if len(sss) > 1:
            raise InvariantViolation(
                f"semisimplification not constant on class {sig}: {sss}")
    return reports


def render_report(reports: list[dict], fmt: str = "json") -> str:
    """Deterministic serialization (stable key order)."""
    if fmt == "json":
        return json.dumps(reports, sort_keys=True, indent=2)
    if fmt != "table":
        raise ValueError("format must be json or table")
    lines = []
    header = (f"{'label':10} {'p':>2} {'N':>4} {'red':>4} "
              f"{'class':12} {'deg':>3} {'mu':>3} {'lam':>3} {'stab':>4}")
    lines.append(header)
    lines.append("-" * len(header))
    for rep in reports:
        lines.append(
            f"{rep['label']:10} {rep['p']:>2} {rep['conductor']:>4} "
            f"{str(rep['reducible'])[:4]:>4} "
            f"{rep.get('classification', '-'):12} "
            f"{rep.get('alignment_degree', {}).get('n', 0):>3} "
            f"{rep['mu']:>3} {rep['lambda']:>3} "
            f"{rep['stabilized_at']:>4}")
    lines.append("")
    lines.append(f"note: {MAIN_CONJECTURE_FLAG}")
    return "\n".join(lines)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True
