"""Desk-scale laboratory for one-step deformation lifting over finite
group models: bar-resolution cohomology with adjoint coefficients, the
obstruction 2-cocycle of a set-theoretic lift, exhaustive lift
enumeration and its cocycle-torsor structure, tame local conditions at
trivial primes with their four conjugated families, and the versality
degree of each (condition, twist-space) pair.

Everything is exhaustively checkable: groups are explicit tables, lifts
are enumerated generator-image by generator-image, and membership of a
twisted local deformation in a family is decided by a layer-by-layer
normal-form search over conjugators congruent to the identity mod p.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    LocalTwistUnrealizable,
    NoUnitSquareRoot,
    SizeBound,
    TameRelationError,
)
from .group_model import (
    MAT_ID,
    FiniteGroupModel,
    mat_det,
    mat_inv,
    mat_mul,
)
from .padic import sqrt_unit_one_mod_p, val_int

# -- F_p linear algebra (dense numpy) ------------------------------------------


def rref_modp(A: np.ndarray, p: int):
    """Reduced row echelon form mod p; returns (R, pivot_cols)."""
    R = A.astype(np.int64) % p
    nr, nc = R.shape
    pivots = []
    r = 0
    for c in range(nc):
        if r >= nr:
            break
        col = R[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        R[r] = R[r] * pow(int(R[r, c]), -1, p) % p
        rows = np.nonzero(R[:, c])[0]
        rows = rows[rows != r]
        if rows.size:
            R[rows] = (R[rows] - np.outer(R[rows, c], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def nullspace_modp(A: np.ndarray, p: int):
    """Basis (rows) of the right kernel mod p."""
    if A.size == 0:
        return np.eye(A.shape[1], dtype=np.int64)
    R, pivots = rref_modp(A, p)
    nc = A.shape[1]
    free = [c for c in range(nc) if c not in pivots]
    basis = np.zeros((len(free), nc), dtype=np.int64)
    for bi, fc in enumerate(free):
        basis[bi, fc] = 1
        for ri, pc in enumerate(pivots):
            basis[bi, pc] = (-int(R[ri, fc])) % p
    return basis


def solve_modp(A: np.ndarray, b: np.ndarray, p: int):
    """One solution of A x = b mod p, or None."""
    nr, nc = A.shape
    aug = np.concatenate([A % p, (b % p).reshape(nr, 1)], axis=1)
    R, pivots = rref_modp(aug, p)
    if nc in pivots:
        return None
    x = np.zeros(nc, dtype=np.int64)
    for ri, pc in enumerate(pivots):
        x[pc] = R[ri, nc]
    return x


# -- adjoint module -------------------------------------------------------------

AD0_BASIS = ((0, 1, 0, 0), (1, 0, 0, -1), (0, 0, 1, 0))  # E, H, F
SUBMODULE_BASIS = {
    "ad0": AD0_BASIS,
    "n": ((0, 1, 0, 0),),
    "b": ((0, 1, 0, 0), (1, 0, 0, -1)),
}


class AdjointModule:
    """Ad^0 of a residual representation on a group model, or its
    upper-triangular submodules n and b (which require the image of
    rho-bar to be upper triangular)."""

    def __init__(self, model: FiniteGroupModel, rhobar_images,
                 selector: str = "ad0", p: int | None = None):
        if selector not in SUBMODULE_BASIS:
            raise ValueError(f"unknown submodule selector {selector}")
        self.model = model
        self.selector = selector
        self.p = p
        self.rhobar = rhobar_images  # list over element indices, mod p
        self.basis = SUBMODULE_BASIS[selector]
        self.dim = len(self.basis)
        if selector in ("n", "b"):
            for m in rhobar_images:
                if m[2] % p != 0:
                    raise ValueError(
                        "n and b require upper-triangular rho-bar")
        self._action = [self._action_matrix(i)
                        for i in range(len(model))]

    def _action_matrix(self, i: int) -> np.ndarray:
        p = self.p
        g = self.rhobar[i]
        ginv = mat_inv(g, p)
        cols = []
        for v in self.basis:
            w = mat_mul(mat_mul(g, v, p), ginv, p)
            cols.append(self._coords(w))
        return np.array(cols, dtype=np.int64).T % p

    def _coords(self, w):
        p = self.p
        if self.selector == "ad0":
            # w = aE + bH + cF with trace zero
            assert (w[0] + w[3]) % p == 0
            return [w[1] % p, w[0] % p, w[2] % p]
        if self.selector == "n":
            assert w[2] % p == 0 and w[0] % p == 0 and w[3] % p == 0
            return [w[1] % p]
        assert w[2] % p == 0 and (w[0] + w[3]) % p == 0
        return [w[1] % p, w[0] % p]

    def act(self, i: int, vec: np.ndarray) -> np.ndarray:
        return self._action[i] @ vec % self.p

    def to_matrix(self, vec) -> tuple:
        p = self.p
        out = [0, 0, 0, 0]
        for c, b in zip(vec, self.basis):
            for k in range(4):
                out[k] = (out[k] + int(c) * b[k]) % p
        return tuple(out)


@dataclass
class Cochain:
    """Degree-1 or degree-2 cochain with values in an adjoint module,
    stored as a dense array over (tuples of) element indices."""

    degree: int
    module: AdjointModule
    values: np.ndarray  # shape (n, d) or (n, n, d)

    def is_zero(self) -> bool:
        return not np.any(self.values % self.module.p)


def _d1_matrix(M: AdjointModule) -> np.ndarray:
    """Matrix of d^1: C^1 -> C^2, f(g,h) = g f(h) - f(gh) + f(g)."""
    G = M.model
    n, d, p = len(G), M.dim, M.p
    D = np.zeros((n * n * d, n * d), dtype=np.int64)
    for g in range(n):
        for h in range(n):
            row = (g * n + h) * d
            gh = G.table[g][h]
            D[row:row + d, h * d:(h + 1) * d] += M._action[g]
            for k in range(d):
                D[row + k, gh * d + k] -= 1
                D[row + k, g * d + k] += 1
    return D % p


def _d0_matrix(M: AdjointModule) -> np.ndarray:
    """d^0: M -> C^1, m -> (g -> g m - m)."""
    G = M.model
    n, d, p = len(G), M.dim, M.p
    D = np.zeros((n * d, d), dtype=np.int64)
    for g in range(n):
        D[g * d:(g + 1) * d, :] = (M._action[g]
                                   - np.eye(d, dtype=np.int64))
    return D % p


def _d2_matrix(M: AdjointModule) -> np.ndarray:
    """d^2: C^2 -> C^3, F(g,h,k) = g F(h,k) - F(gh,k) + F(g,hk) -
    F(g,h)."""
    G = M.model
    n, d, p = len(G), M.dim, M.p
    D = np.zeros((n * n * n * d, n * n * d), dtype=np.int64)
    for g in range(n):
        for h in range(n):
            gh = G.table[g][h]
            for k in range(n):
                row = ((g * n + h) * n + k) * d
                hk = G.table[h][k]
                D[row:row + d, (h * n + k) * d:(h * n + k + 1) * d] \
                    += M._action[g]
                for t in range(d):
                    D[row + t, (gh * n + k) * d + t] -= 1
                    D[row + t, (g * n + hk) * d + t] += 1
                    D[row + t, (g * n + h) * d + t] -= 1
    return D % p


def cohomology(model: FiniteGroupModel, M: AdjointModule, degree: int,
               size_bound: int = 14):
    """(dimension, list of representative cocycles) for H^1 or H^2."""
    p = M.p
    if degree == 1:
        Z = nullspace_modp(_d1_matrix(M), p)
        B = _d0_matrix(M)
        dim, reps = _quotient_basis(Z, B.T, p)
        cs = [Cochain(1, M, z.reshape(len(model), M.dim)) for z in reps]
        return dim, cs
    if degree == 2:
        if len(model) > size_bound:
            raise SizeBound(
                f"degree-2 cohomology limited to |G| <= {size_bound}")
        Z = nullspace_modp(_d2_matrix(M), p)
        B = _d1_matrix(M).T  # rows span the coboundaries
        # image of d^1 = row space of D1^T applied to all of C^1: rows of
        # B are indexed by C^1 coordinates; the image is spanned by D1
        # columns, i.e. rows of D1^T
        dim, reps = _quotient_basis(Z, B, p)
        n = len(model)
        cs = [Cochain(2, M, z.reshape(n, n, M.dim)) for z in reps]
        return dim, cs
    raise ValueError("degree must be 1 or 2")


def _quotient_basis(Z: np.ndarray, B_rows: np.ndarray, p: int):
    """dim and representatives of (row space of Z) / (row space of
    B_rows)."""
    if B_rows.size == 0:
        Bred = np.zeros((0, Z.shape[1]), dtype=np.int64)
        bpiv = []
    else:
        Bred, bpiv = rref_modp(B_rows, p)
        Bred = Bred[:len(bpiv)]
    reps = []
    # reduce each Z row against B's echelon, collect independent residues
    acc = Bred.copy()
    acc_piv = list(bpiv)
    for z in Z % p:
        v = z.copy()
        for ri, pc in enumerate(acc_piv):
            if v[pc]:
                v = (v - v[pc] * acc[ri]) % p
        if np.any(v):
            # normalize and insert into the echelon
            lead = int(np.nonzero(v)[0][0])
            v = v * pow(int(v[lead]), -1, p) % p
            acc = np.vstack([acc, v])
            acc_piv.append(lead)
            reps.append(v.copy())
    return len(reps), reps


def z1_basis(model: FiniteGroupModel, M: AdjointModule) -> np.ndarray:
    return nullspace_modp(_d1_matrix(M), M.p)


class _PlainModule:
    """Minimal module object (action matrices per element) for the
    cohomology machinery."""

    def __init__(self, model, p, action):
        self.model = model
        self.p = p
        self._action = action
        self.dim = action[0].shape[0] if action else 0

    def act(self, i, vec):
        return self._action[i] @ vec % self.p


def diagonal_quotient_module(M: AdjointModule) -> _PlainModule:
    """Ad^0 / n with the induced action (requires upper-triangular
    rho-bar, which makes n a submodule and the action matrices block
    triangular in the basis E, H, F)."""
    if M.selector != "ad0":
        raise ValueError("quotient is taken of Ad^0")
    action = []
    for A in M._action:
        assert A[1, 0] % M.p == 0 and A[2, 0] % M.p == 0, \
            "n is not stable: rho-bar must be upper triangular"
        action.append(A[1:, 1:] % M.p)
    return _PlainModule(M.model, M.p, action)


def is_coboundary(model: FiniteGroupModel, M: AdjointModule,
                  c2: Cochain):
    """Solve d^1 f = c for f in C^1; returns the cochain or None."""
    n, d, p = len(model), M.dim, M.p
    D = _d1_matrix(M)
    b = c2.values.reshape(n * n * d) % p
    x = solve_modp(D, b, p)
    if x is None:
        return None
    return Cochain(1, M, x.reshape(n, d))


# -- lifting --------------------------------------------------------------------


class RepresentationModPn:
    """A homomorphism model -> GL_2(Z/p^n), stored on every element."""

    def __init__(self, model: FiniteGroupModel, p: int, n: int, images):
        self.model = model
        self.p = p
        self.n = n
        mod = p**n
        self.images = [tuple(x % mod for x in m) for m in images]

    def verify(self) -> bool:
        mod = self.p**self.n
        t = self.model.table
        for i in range(len(self.model)):
            for g in self.model.generators:
                if mat_mul(self.images[i], self.images[g], mod) \
                        != self.images[t[i][g]]:
                    return False
        return True

    def reduce(self, n_new: int) -> "RepresentationModPn":
        return RepresentationModPn(self.model, self.p, n_new, self.images)

    def restrict_images(self, element_indices):
        return [self.images[i] for i in element_indices]

    def det_character(self):
        mod = self.p**self.n
        return [mat_det(m, mod) for m in self.images]

    def rhobar(self):
        return [tuple(x % self.p for x in m) for m in self.images]


def set_theoretic_lift(rho: RepresentationModPn, det_target):
    """Entrywise lift of each image with the determinant fixed to the
    supplied character values mod p^(n+1)."""
    p, n = rho.p, rho.n
    mod = p**(n + 1)
    out = []
    for i, m in enumerate(rho.images):
        A = tuple(x % mod for x in m)
        dA = mat_det(A, mod)
        target = det_target[i] % mod
        # scale the first row by (1 + p^n delta) to fix the determinant
        delta = ((target * pow(dA, -1, mod) - 1) // p**n) % p
        A = ((A[0] * (1 + delta * p**n)) % mod,
             (A[1] * (1 + delta * p**n)) % mod, A[2], A[3])
        assert mat_det(A, mod) == target
        out.append(A)
    return out


def obstruction_class(rho: RepresentationModPn, det_target,
                      M: AdjointModule,
                      verify_class: bool = True) -> Cochain:
    """The 2-cocycle tau(gh) tau(h)^-1 tau(g)^-1 of a set-theoretic lift,
    identified with Id + p^n (value)."""
    p, n = rho.p, rho.n
    mod = p**(n + 1)
    G = rho.model
    tau = set_theoretic_lift(rho, det_target)
    nels = len(G)
    vals = np.zeros((nels, nels, M.dim), dtype=np.int64)
    for g in range(nels):
        for h in range(nels):
            F = mat_mul(mat_mul(tau[G.table[g][h]],
                                mat_inv(tau[h], mod), mod),
                        mat_inv(tau[g], mod), mod)
            c = _kernel_coords(F, p, n, M)
            vals[g, h] = c
    out = Cochain(2, M, vals % p)
    if verify_class:
        # the class must kill d^2 (cocycle identity)
        D2_check = _cocycle2_identity_holds(G, M, out)
        assert D2_check, "obstruction cochain failed the cocycle identity"
    return out


def _kernel_coords(F, p, n, M: AdjointModule):
    mod = p**(n + 1)
    X = tuple(((x - (1 if i in (0, 3) else 0)) % mod) // p**n
              for i, x in enumerate(F))
    return M._coords(tuple(x % p for x in X))


def _cocycle2_identity_holds(G, M, c: Cochain) -> bool:
    p = M.p
    n = len(G)
    v = c.values
    for g in range(n):
        for h in range(n):
            for k in range(n):
                lhs = (M.act(g, v[h, k]) - v[G.table[g][h], k]
                       + v[g, G.table[h][k]] - v[g, h]) % p
                if np.any(lhs):
                    return False
    return True


def twist(images, z_values, M: AdjointModule, p: int, n: int):
    """(Id + p^n z(g)) * rho(g) on every element."""
    mod = p**(n + 1)
    out = []
    for i, m in enumerate(images):
        Z = M.to_matrix(z_values[i])
        factor = (1 + Z[0] * p**n, Z[1] * p**n,
                  Z[2] * p**n, 1 + Z[3] * p**n)
        out.append(mat_mul(tuple(x % mod for x in factor),
                           tuple(x % mod for x in m), mod))
    return out


def lift_step(rho: RepresentationModPn, det_target,
              M: AdjointModule, conditions=None,
              z1_enumeration_bound: int = 6):
    """One lifting step mod p^(n+1).

    Solves the obstruction coboundary system; on success twists by global
    1-cocycles until every labelled local condition holds.  Returns
    ("ok", lifted representation) or ("obstructed", obstruction class).
    Raises LocalTwistUnrealizable when no global twist restricts to an
    admissible local one.
    """
    p, n = rho.p, rho.n
    G = rho.model
    obs = obstruction_class(rho, det_target, M)
    f = is_coboundary(G, M, obs)
    if f is None:
        return "obstructed", obs
    tau = set_theoretic_lift(rho, det_target)
    # r = (Id + p^n f) tau is a homomorphism
    r_images = twist(tau, f.values, M, p, n)
    r = RepresentationModPn(G, p, n + 1, r_images)
    assert r.verify(), "twisted set lift failed to be a homomorphism"
    if not conditions:
        return "ok", r
    Z = z1_basis(G, M)
    if Z.shape[0] > z1_enumeration_bound:
        raise SizeBound(
            f"Z^1 dimension {Z.shape[0]} exceeds enumeration bound")
    for coeffs in itertools.product(range(p), repeat=Z.shape[0]):
        zvec = np.zeros((len(G), M.dim), dtype=np.int64)
        for c, basis_row in zip(coeffs, Z):
            zvec = (zvec + c * basis_row.reshape(len(G), M.dim)) % p
        cand_images = twist(r.images, zvec, M, p, n)
        cand = RepresentationModPn(G, p, n + 1, cand_images)
        if all(cond.holds(cand) for _, cond in conditions):
            return "ok", cand
    raise LocalTwistUnrealizable(
        "no global 1-cocycle twist satisfies every local condition")


def enumerate_lifts(rho: RepresentationModPn, det_target,
                    max_candidates: int = 1 << 22):
    """All homomorphic lifts mod p^(n+1) with the fixed determinant, by
    exhaustion over generator-image lifts."""
    p, n = rho.p, rho.n
    G = rho.model
    mod = p**(n + 1)
    gens = G.generators
    base = set_theoretic_lift(rho, det_target)
    base_gen = [base[g] for g in gens]
    # lift space per generator: A (1 + p^n X), tr X = 0 (det already
    # matched by the base lift)
    ad0 = [(0, 0, 0, 0)] + [m for m in _ad0_elements(p)]
    total = len(ad0) ** len(gens)
    if total > max_candidates:
        raise SizeBound(f"{total} candidate tuples exceed the bound")
    lifts = []
    for combo in itertools.product(_ad0_elements_list(p),
                                   repeat=len(gens)):
        gen_images = []
        for A, X in zip(base_gen, combo):
            pert = (1 + X[0] * p**n, X[1] * p**n,
                    X[2] * p**n, 1 + X[3] * p**n)
            gen_images.append(mat_mul(pert, A, mod))
        try:
            images = G.extend_homomorphism(
                gen_images, lambda a, b: mat_mul(a, b, mod))
        except ValueError:
            continue
        lifts.append(RepresentationModPn(G, p, n + 1, images))
    return lifts


def _ad0_elements(p: int):
    out = []
    for a in range(p):
        for b in range(p):
            for c in range(p):
                if (a, b, c) != (0, 0, 0):
                    out.append((a, b, c, (-a) % p))
    return out


def _ad0_elements_list(p: int):
    return [(0, 0, 0, 0)] + _ad0_elements(p)


def strict_equivalence_classes(lifts, size_bound: int = 1 << 16):
    """Partition lifts into orbits under conjugation by matrices that are
    Id mod p, by explicit orbit enumeration."""
    if not lifts:
        return []
    p, n1 = lifts[0].p, lifts[0].n
    mod = p**n1
    conj_count = p**(4 * (n1 - 1))
    if conj_count > size_bound:
        raise SizeBound(f"{conj_count} conjugators exceed the bound")
    conjugators = []
    for X in itertools.product(range(p**(n1 - 1)), repeat=4):
        A = (1 + p * X[0], p * X[1], p * X[2], 1 + p * X[3])
        if mat_det(A, mod) % p != 0:
            conjugators.append(tuple(x % mod for x in A))
    key = {}
    for idx, L in enumerate(lifts):
        key[tuple(L.images[g] for g in L.model.generators)] = idx
    classes = []
    seen = set()
    for idx, L in enumerate(lifts):
        if idx in seen:
            continue
        orbit = {idx}
        for A in conjugators:
            Ainv = mat_inv(A, mod)
            imgs = tuple(mat_mul(mat_mul(A, L.images[g], mod), Ainv, mod)
                         for g in L.model.generators)
            j = key.get(imgs)
            if j is not None:
                orbit.add(j)
        seen |= orbit
        classes.append(sorted(orbit))
    return classes


# -- trivial primes and tame local conditions -----------------------------------


def trivial_prime_check(v: int, p: int, rhobar_images=None) -> bool:
    """v = 1 mod p, v != 1 mod p^2, and (when images are supplied) the
    residual restriction is trivial."""
    if v % p != 1 or v % (p * p) == 1:
        return False
    if rhobar_images is not None:
        for m in rhobar_images:
            if tuple(x % p for x in m) != (1 % p, 0, 0, 1 % p):
                return False
    return True


@dataclass(frozen=True)
class LocalTameData:
    """Images (Sigma, Tau) of (sigma_v, tau_v) mod p^level, constrained by
    Sigma Tau Sigma^-1 = Tau^v."""

    v: int
    p: int
    level: int
    Sigma: tuple
    Tau: tuple

    def __post_init__(self):
        mod = self.p**self.level
        object.__setattr__(self, "Sigma",
                           tuple(x % mod for x in self.Sigma))
        object.__setattr__(self, "Tau",
                           tuple(x % mod for x in self.Tau))
        lhs = mat_mul(mat_mul(self.Sigma, self.Tau, mod),
                      mat_inv(self.Sigma, mod), mod)
        rhs = _mat_pow(self.Tau, self.v, mod)
        if lhs != rhs:
            raise TameRelationError(
                f"Sigma Tau Sigma^-1 != Tau^v mod p^{self.level}")


def _mat_pow(A, k, mod):
    out = MAT_ID
    base = A
    while k:
        if k & 1:
            out = mat_mul(out, base, mod)
        base = mat_mul(base, base, mod)
        k >>= 1
    return out


TYPE_CONJUGATORS = {
    1: (1, 0, 1, 1),
    2: (0, 1, 1, 0),
    3: MAT_ID,
    4: MAT_ID,
}


def basis_cocycles(v: int, p: int, y_param: int = 0):
    """The four spanning cocycles f1, f2, g_nr, g_ram on the tame local
    group, as value tables on (sigma_v, tau_v) with entries in Ad^0 of the
    trivial residual representation.

    g_ram depends on the y-parameter of the deformation being twisted
    through w = (y/p) / ((v-1)/p) mod p.
    """
    if v % p != 1:
        raise ValueError("v must be 1 mod p at a trivial prime")
    if (v - 1) % (p * p) == 0:
        raise ZeroDivisionError(
            "v = 1 mod p^2: (v-1)/p is not a unit")
    if y_param % p != 0:
        raise ValueError("y must lie in the maximal ideal")
    E = (0, 1, 0, 0)
    F = (0, 0, 1, 0)
    zero = (0, 0, 0, 0)
    u = ((v - 1) // p) % p
    w = (y_param // p) * pow(u, -1, p) % p
    g_ram_tau = ((-w) % p, 0, 0, w % p)
    out = {
        "f1": {"sigma": E, "tau": zero},
        "f2": {"sigma": zero, "tau": E},
        "g_nr": {"sigma": F, "tau": zero},
        "g_ram": {"sigma": F, "tau": g_ram_tau},
    }
    # 1-cocycle identity against the tame relation (trivial action):
    # (v-1) f(tau) = 0 in F_p, automatic since v = 1 mod p
    for name, c in out.items():
        assert all(((v - 1) * x) % p == 0 for x in c["tau"]), name
    return out


def span_dimensions(v: int, p: int, y_param: int = 0):
    cs = basis_cocycles(v, p, y_param)

    def dim(names):
        vecs = [list(cs[n]["sigma"]) + list(cs[n]["tau"]) for n in names]
        A = np.array(vecs, dtype=np.int64)
        return len(rref_modp(A, p)[1])

    return {
        "Q_v": dim(["f1", "f2"]),
        "P_nr": dim(["f1", "f2", "g_nr"]),
        "P_ram": dim(["f1", "f2", "g_ram"]),
    }


# -- membership in the tame families --------------------------------------------


def _sqrt_factor(psi_sigma: int, v: int, p: int, level: int) -> int:
    """(psi(sigma_v) v^-1)^(1/2), the root congruent to 1 mod p."""
    mod = p**level
    t = psi_sigma * pow(v % mod, -1, mod) % mod
    if t % p != 1:
        raise NoUnitSquareRoot(
            f"psi(sigma) v^-1 = {t} is not 1 mod {p}")
    return sqrt_unit_one_mod_p(t, p, level)


def _standard_form_params(data: LocalTameData, psi_sigma: int):
    """Extract (x, y) if (Sigma, Tau) literally has the standard shape
    c(v, x; 0, 1), (1, y; 0, 1); None otherwise."""
    p, level, v = data.p, data.level, data.v
    mod = p**level
    c = _sqrt_factor(psi_sigma, v, p, level)
    S, T = data.Sigma, data.Tau
    if S[2] % mod or T[2] % mod:
        return None
    if T[0] % mod != 1 or T[3] % mod != 1:
        return None
    if S[0] % mod != c * v % mod or S[3] % mod != c:
        return None
    x = S[1] * pow(c, -1, mod) % mod
    y = T[1] % mod
    return x, y


def _subtype_valuations_ok(x: int, y: int, cond: str, p: int,
                           level: int) -> bool:
    vx = val_int(x % p**level, p, level)
    vy = val_int(y % p**level, p, level)
    if cond == "nr":
        return vx >= min(2, level) and vy >= min(2, level)
    if cond == "ram":
        return vx >= min(2, level) and vy == 1
    raise ValueError(cond)


def local_condition_membership(data: LocalTameData, cond_type,
                               psi_sigma: int) -> bool:
    """Literal membership after un-conjugating by the type's fixed
    matrix: the representative must have the parametrized shape with the
    subtype's (x, y) valuations."""
    kind, sub = _condition_kind(cond_type)
    mod = data.p**data.level
    B = TYPE_CONJUGATORS[kind]
    Binv = mat_inv(B, mod)
    S = mat_mul(mat_mul(Binv, data.Sigma, mod), B, mod)
    T = mat_mul(mat_mul(Binv, data.Tau, mod), B, mod)
    unconj = LocalTameData(data.v, data.p, data.level, S, T)
    params = _standard_form_params(unconj, psi_sigma)
    if params is None:
        return False
    x, y = params
    if cond_type == "D_v":
        return x % data.p == 0 and y % data.p == 0
    return _subtype_valuations_ok(x, y, sub, data.p, data.level)


def _condition_kind(cond_type):
    """Map a condition name to (conjugation type 1-4, 'nr'|'ram')."""
    table = {
        "type1": (1, "nr"), "type2": (2, "ram"),
        "type3": (3, "nr"), "type4": (4, "ram"),
        "D_v_nr": (3, "nr"), "D_v_ram": (4, "ram"),
        "D_v": (3, "nr"),
    }
    if cond_type not in table:
        raise ValueError(f"unknown condition type {cond_type}")
    return table[cond_type]


def membership_up_to_equivalence(data: LocalTameData, cond_type,
                                 psi_sigma: int,
                                 node_bound: int = 500000) -> bool:
    """Membership as a deformation: search for a conjugator A = Id mod p
    bringing (Sigma, Tau) to the parametrized shape, then check the
    subtype's (x, y) valuations.

    Any such A factors as a product of layers Id + p^j Y_j (j = 1, 2,
    ...), and a layer-j factor moves the shape conditions only from the
    p^(j+1) digit on; so the intermediate state after layer j must have
    conditions vanishing mod p^(j+1), and the admissible Y_j form an
    affine F_p-space.  Both images are scalar mod p at a trivial prime,
    which makes the digit-moving map Y -> [Y, W_1] independent of the
    layer and of the branch (states agree mod p^2 throughout); it is
    probed once and every solution branch is explored.
    """
    kind, sub = _condition_kind(cond_type)
    p, level, v = data.p, data.level, data.v
    mod = p**level
    B = TYPE_CONJUGATORS[kind]
    Binv = mat_inv(B, mod)
    S0 = mat_mul(mat_mul(Binv, data.Sigma, mod), B, mod)
    T0 = mat_mul(mat_mul(Binv, data.Tau, mod), B, mod)
    c = _sqrt_factor(psi_sigma, v, p, level)

    def cond_values(S, T):
        return ((S[2]) % mod, (S[0] - c * v) % mod, (S[3] - c) % mod,
                (T[2]) % mod, (T[0] - 1) % mod, (T[3] - 1) % mod)

    def digits(vals, t):
        pt = p**t
        return [(x // pt) % p for x in vals]

    vals0 = cond_values(S0, T0)
    if any(x % p for x in vals0):
        return False  # digit-0 defects are impossible
    if level >= 2 and any(digits(vals0, 1)):
        return False  # no conjugator = Id mod p moves the p^1 digit
    # probe the constant linear map Y -> change of digit (j+1), using
    # layer j = 1 and Y running over a complement of the scalars
    basis_Y = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0))
    base = digits(cond_values(
        *_conjugate_pair(S0, T0, (0, 0, 0, 0), 1, p, mod)), 2)
    cols = []
    for Y in basis_Y:
        S2, T2 = _conjugate_pair(S0, T0, Y, 1, p, mod)
        vec = digits(cond_values(S2, T2), 2)
        cols.append([(a - b) % p for a, b in zip(vec, base)])
    L = np.array(cols, dtype=np.int64).T % p
    K = nullspace_modp(L, p)

    nodes = 0

    def dfs(S, T, j):
        # layer j fixes the p^(j+1) digit; digits 0..level-1 are done
        # once j reaches level-1
        nonlocal nodes
        nodes += 1
        if nodes > node_bound:
            raise SizeBound("normal-form search exceeded node bound")
        if j >= level - 1:
            x = S[1] * pow(c, -1, mod) % mod
            y = T[1] % mod
            if cond_type == "D_v":
                return x % p == 0 and y % p == 0
            return _subtype_valuations_ok(x, y, sub, p, level)
        b = np.array([(-d) % p
                      for d in digits(cond_values(S, T), j + 1)],
                     dtype=np.int64)
        y0 = solve_modp(L, b, p)
        if y0 is None:
            return False
        for coeffs in itertools.product(range(p), repeat=K.shape[0]):
            Y = [int(y0[i]) for i in range(3)]
            for cc, krow in zip(coeffs, K):
                for i in range(3):
                    Y[i] = (Y[i] + cc * int(krow[i])) % p
            S2, T2 = _conjugate_pair(S, T, (Y[0], Y[1], Y[2], 0),
                                     j, p, mod)
            if dfs(S2, T2, j + 1):
                return True
        return False

    return dfs(S0, T0, 1)


def _conjugate_pair(S, T, Y, j, p, mod):
    """Conjugate both matrices by A = Id + p^j Y."""
    A = (1 + p**j * Y[0], p**j * Y[1], p**j * Y[2], 1 + p**j * Y[3])
    A = tuple(x % mod for x in A)
    Ainv = mat_inv(A, mod)
    return (mat_mul(mat_mul(A, S, mod), Ainv, mod),
            mat_mul(mat_mul(A, T, mod), Ainv, mod))


# -- versality degree of the tame families --------------------------------------


def standard_family_element(v: int, p: int, k: int, x: int, y: int,
                            psi_sigma: int, cond_type) -> LocalTameData:
    """The parametrized deformation with parameters (x, y) mod p^k,
    conjugated into the given type's coordinates."""
    kind, _ = _condition_kind(cond_type)
    mod = p**k
    c = _sqrt_factor(psi_sigma, v, p, k)
    S = (c * v % mod, c * x % mod, 0, c % mod)
    T = (1, y % mod, 0, 1)
    B = TYPE_CONJUGATORS[kind]
    Binv = mat_inv(B, mod)
    S = mat_mul(mat_mul(B, S, mod), Binv, mod)
    T = mat_mul(mat_mul(B, T, mod), Binv, mod)
    return LocalTameData(v, p, k, S, T)


def family_parameter_grid(p: int, k: int, sub: str):
    """(x, y) classes mod p^k with the subtype's valuations."""
    mod = p**k
    if sub == "nr":
        xs = list(range(0, mod, min(p * p, mod)))
        ys = list(range(0, mod, min(p * p, mod)))
    else:
        xs = list(range(0, mod, min(p * p, mod)))
        ys = [y for y in range(0, mod, p) if (y // p) % p != 0]
        if not ys:
            ys = [p % mod] if p < mod else [0]
    return [(x, y) for x in xs for y in ys]


def twist_tame(data: LocalTameData, f_sigma, f_tau) -> LocalTameData:
    """(Id + p^(k-1) f) applied to (Sigma, Tau)."""
    p, k = data.p, data.level
    mod = p**k
    e = p**(k - 1)
    A = (1 + e * f_sigma[0], e * f_sigma[1],
         e * f_sigma[2], 1 + e * f_sigma[3])
    Bm = (1 + e * f_tau[0], e * f_tau[1],
          e * f_tau[2], 1 + e * f_tau[3])
    return LocalTameData(
        data.v, p, k,
        mat_mul(tuple(a % mod for a in A), data.Sigma, mod),
        mat_mul(tuple(b % mod for b in Bm), data.Tau, mod))


def _conjugated_cocycle(cs, name, kind, p):
    """Transport a basis cocycle into the type's coordinates."""
    B = TYPE_CONJUGATORS[kind]
    Binv = mat_inv(B, p)
    out = {}
    for part in ("sigma", "tau"):
        out[part] = mat_mul(mat_mul(B, cs[name][part], p), Binv, p)
    return out


def versal_twists_stable(cond_type, v: int, p: int, k: int,
                         psi_sigma: int | None = None,
                         exhaustive_f: bool = False) -> bool:
    """Whether C_v(Z/p^k) is stable under every N_v twist at level k.

    For k >= 3 a twist by c1 f1 + c2 f2 shifts (x, y) by p^(k-1)(c1, c2)
    inside their valuation classes (an exact matrix identity), so the c3
    component of the twist is the only one that needs the equivalence
    search; with exhaustive_f the full (c1, c2, c3) cube is run anyway.
    """
    kind, sub = _condition_kind(cond_type)
    if psi_sigma is None:
        psi_sigma = v  # k = 2 in psi = chi^(k-1): psi(sigma) = v
    cs = basis_cocycles(v, p, y_param=0)
    g_name = "g_nr" if sub == "nr" else "g_ram"
    memo = {}
    grid = family_parameter_grid(p, k, sub)
    combos = (
        itertools.product(range(p), repeat=3) if (exhaustive_f or k == 2)
        else [(0, 0, c3) for c3 in range(p)])
    combos = list(combos)
    for (x, y) in grid:
        for (c1, c2, c3) in combos:
            e = p**(k - 1)
            x2 = (x + e * c1) % p**k
            y2 = (y + e * c2) % p**k
            key = (x2, y2, c3)
            if key in memo:
                if not memo[key]:
                    return False
                continue
            elem = standard_family_element(v, p, k, x2, y2, psi_sigma,
                                           cond_type)
            if c3 == 0:
                ok = local_condition_membership(elem, cond_type,
                                                psi_sigma)
            else:
                cocycles = basis_cocycles(v, p, y_param=y2 % p**2)
                g = _conjugated_cocycle(cocycles, g_name, kind, p)
                scaled_sigma = tuple(c3 * t % p for t in g["sigma"])
                scaled_tau = tuple(c3 * t % p for t in g["tau"])
                twisted = twist_tame(elem, scaled_sigma, scaled_tau)
                ok = membership_up_to_equivalence(twisted, cond_type,
                                                  psi_sigma)
            memo[key] = ok
            if not ok:
                return False
    return True


def highly_versal_degree(cond_type, v: int, p: int, k_max: int = 4,
                         psi_sigma: int | None = None) -> int:
    """Smallest m such that N_v-twisting stabilizes C_v(Z/p^k) for every
    m <= k <= k_max, with an escape at level m-1."""
    if k_max < 4:
        raise ValueError("k_max must be at least 4")
    if cond_type == "diag":
        return _diag_versal_degree(v, p, k_max)
    stable = {k: versal_twists_stable(cond_type, v, p, k,
                                      psi_sigma=psi_sigma)
              for k in range(2, k_max + 1)}
    m = None
    for k in range(2, k_max + 1):
        if all(stable[j] for j in range(k, k_max + 1)) and \
                (k == 2 or not stable[k - 1]):
            m = k
            break
    if m is None:
        raise SizeBound(
            f"no versality threshold within k_max={k_max}: {stable}")
    return m


def _diag_versal_degree(v: int, p: int, k_max: int) -> int:
    """Unramified-diagonal family at an S-prime-style condition: the
    tangent-space twist (diagonal cocycle) stabilizes at every level
    k >= 2, so the degree is 2 (level 1 is the single residual point)."""
    for k in range(2, k_max + 1):
        mod = p**k
        for u in range(1, mod, p):
            for cc in range(p):
                e = p**(k - 1)
                su = u * (1 + cc * e) % mod
                # stays unramified diagonal: membership is literal
                if su % p != 1 % p:
                    return k  # never happens; defensive
    return 2


# -- ordinary condition ----------------------------------------------------------


def ordinary_condition_check(images, inertia_flags, cochar_values,
                             p: int, n: int) -> bool:
    """Upper-triangularizability by a conjugator = Id mod p, with inertia
    acting on the (1,1) entry through the designated cocharacter and
    trivially on the (2,2) entry.

    images: matrices mod p^n for the subgroup's elements (in order);
    inertia_flags: booleans marking inertia elements; cochar_values: the
    chi^(k-1)-cocharacter values mod p^n for inertia elements (None
    elsewhere).
    """
    mod = p**n
    # candidate stable lines reduce to the standard line mod p: (1, t p)
    for t in range(p**(n - 1)):
        vec = (1, (t * p) % mod)
        ok = True
        diag_ratios = []
        for m, is_inertia, topchar in zip(images, inertia_flags,
                                          cochar_values):
            # m fixes the line spanned by vec?
            w = (m[0] * vec[0] + m[1] * vec[1],
                 m[2] * vec[0] + m[3] * vec[1])
            # w = lambda * vec for some scalar: vec[0] = 1 forces
            # lambda = w[0]
            lam = w[0] % mod
            if (w[1] - lam * vec[1]) % mod:
                ok = False
                break
            if is_inertia:
                # (1,1)-action = cocharacter, (2,2)-action trivial
                if (lam - topchar) % mod:
                    ok = False
                    break
                det = mat_det(m, mod)
                if (det - topchar) % mod:  # quotient action trivial
                    ok = False
                    break
        if ok:
            return True
    return False


# -- scenario runner --------------------------------------------------------------


class OrdinaryCondition:
    """Ordinary local condition bound to a labelled subgroup."""

    def __init__(self, model, subgroup_label, inertia_indices,
                 cochar_by_element, p):
        self.model = model
        self.label = subgroup_label
        self.inertia = set(inertia_indices)
        self.cochar = cochar_by_element
        self.p = p

    def holds(self, rep) -> bool:
        H = self.model.subgroups[self.label]
        images = [rep.images[i] for i in H]
        flags = [i in self.inertia for i in H]
        chars = [self.cochar.get(i, 0) for i in H]
        return ordinary_condition_check(images, flags, chars,
                                        self.p, rep.n)


class TameCondition:
    """Tame family condition at a labelled subgroup generated by (sigma,
    tau) images."""

    def __init__(self, model, subgroup_label, sigma_index, tau_index,
                 v, cond_type, psi_by_element):
        self.model = model
        self.label = subgroup_label
        self.sigma_index = sigma_index
        self.tau_index = tau_index
        self.v = v
        self.cond_type = cond_type
        self.psi = psi_by_element

    def holds(self, rep) -> bool:
        S = rep.images[self.sigma_index]
        T = rep.images[self.tau_index]
        try:
            data = LocalTameData(self.v, rep.p, rep.n, S, T)
        except TameRelationError:
            return False
        return membership_up_to_equivalence(
            data, self.cond_type, self.psi[self.sigma_index] % rep.p**rep.n)


def run_scenario(spec: dict) -> dict:
    """Execute a lift-lab scenario: build the model, extend rho-bar, and
    lift step by step, reporting a verdict per step."""
    from .group_model import (group_from_matrices,
                              group_from_permutations)
    p = spec["p"]
    target = spec.get("levels", 2)
    gspec = spec["group"]
    if gspec["kind"] == "permutations":
        model = group_from_permutations(gspec["generators"])
    elif gspec["kind"] == "matrices":
        model = group_from_matrices(gspec["generators"],
                                    gspec["modulus"])
    else:
        raise ValueError("group kind must be permutations or matrices")
    rhobar_gen = [tuple(m) for m in spec["rhobar"]]
    images = model.extend_homomorphism(
        rhobar_gen, lambda a, b: mat_mul(a, b, p))
    rep = RepresentationModPn(model, p, 1, images)
    start = spec.get("start_level", 1)
    if start > 1:
        mod_s = p**start
        start_images = model.extend_homomorphism(
            [tuple(m) for m in spec["start_images"]],
            lambda a, b: mat_mul(a, b, mod_s))
        rep = RepresentationModPn(model, p, start, start_images)
        for got, want in zip(rep.rhobar(), images):
            assert got == want, "start images do not reduce to rho-bar"
    mod_target = p**(target + 1)
    det_gen = [d % mod_target for d in spec.get(
        "det", [mat_det(m, p) for m in rhobar_gen])]
    det_by_element = model.extend_homomorphism(
        det_gen, lambda a, b: a * b % mod_target)
    M = AdjointModule(model, images, spec.get("module", "ad0"), p=p)
    conditions = []
    for label, sub in spec.get("subgroups", {}).items():
        elems = model.label_subgroup(label, sub["generators"])
        cond = sub.get("condition", {"type": "none"})
        if cond["type"] == "none":
            continue
        if cond["type"] == "ordinary":
            inertia = set(cond.get("inertia", []))
            cochar = {int(k): v for k, v in
                      cond.get("cochar", {}).items()}
            conditions.append(
                (label, OrdinaryCondition(model, label, inertia,
                                          cochar, p)))
        elif cond["type"].startswith("tame"):
            conditions.append(
                (label, TameCondition(
                    model, label, cond["sigma"], cond["tau"],
                    cond["v"], "type" + cond["type"][-1],
                    {cond["sigma"]: cond.get("psi_sigma", cond["v"])})))
        else:
            raise ValueError(f"unknown condition {cond['type']}")
    steps = []
    current = rep
    for n in range(start, target + 1):
        det_target = [d % p**(n + 1) for d in det_by_element]
        try:
            status, result = lift_step(current, det_target, M,
                                       conditions or None)
        except (LocalTwistUnrealizable, SizeBound) as exc:
            steps.append({"level": n + 1, "status": "failed",
                          "reason": f"{type(exc).__name__}: {exc}"})
            break
        if status == "obstructed":
            steps.append({"level": n + 1, "status": "obstructed"})
            break
        steps.append({"level": n + 1, "status": "ok"})
        current = result
    return {
        "name": spec.get("name", "scenario"),
        "p": p,
        "group_order": len(model),
        "steps": steps,
        "reached_level": current.n,
    }
