"""The graded module D(A, mu) and freeness decisions."""

from __future__ import annotations

import os
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

from .arrangement import (
    Arrangement,
    Flat,
    Hyperplane,
    Multiplicity,
    canonical_key,
    check_multiplicity,
    essentialization,
    flat_of,
    localization,
    restrict_to,
)
from .linalg import rref
from .poly import Poly, format_poly, monomials, poly_determinant, divisible_by_linear_power
from .scalars import CycloScalar


@dataclass(frozen=True)
class Derivation:
    """theta = sum_i coeffs[i] * D_i with homogeneous coefficients of one degree."""

    coeffs: tuple[Poly, ...]
    degree: int

    def __post_init__(self):
        for f in self.coeffs:
            if f and (not f.is_homogeneous() or f.degree() != self.degree):
                raise ValueError("derivation coefficients must be homogeneous of the stated degree")

    @classmethod
    def from_polys(cls, coeffs: Sequence[Poly]) -> "Derivation":
        degs = {f.degree() for f in coeffs if f}
        if len(degs) > 1:
            raise ValueError("coefficients of different degrees")
        return cls(tuple(coeffs), degs.pop() if degs else 0)

    @classmethod
    def coordinate(cls, i: int, nvars: int, order: int = 1) -> "Derivation":
        """The constant derivation D_i."""
        return cls(tuple(Poly.one(nvars, order) if j == i else Poly.zero(nvars, order)
                         for j in range(nvars)), 0)

    @property
    def nvars(self) -> int:
        return len(self.coeffs)

    @property
    def order(self) -> int:
        return max((f.order for f in self.coeffs), default=1)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def apply(self, form: Sequence) -> Poly:
        """theta(alpha) for a linear form alpha."""
        acc = Poly.zero(self.nvars, self.order)
        for c, f in zip(form, self.coeffs):
            if c and f:
                acc = acc + f.scale(c)
        return acc

    def apply_poly(self, p: Poly) -> Poly:
        acc = Poly.zero(self.nvars, max(self.order, p.order))
        for i, f in enumerate(self.coeffs):
            if f:
                acc = acc + f * p.derivative(i)
        return acc

    def times(self, p: Poly) -> "Derivation":
        if p.is_zero():
            return Derivation(tuple(Poly.zero(self.nvars, self.order) for _ in self.coeffs), 0)
        return Derivation(tuple(f * p for f in self.coeffs), self.degree + p.degree())

    def __add__(self, other: "Derivation") -> "Derivation":
        return Derivation.from_polys([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "Derivation") -> "Derivation":
        return Derivation.from_polys([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def is_member(self, A: Arrangement, mu: Multiplicity | None = None) -> bool:
        mu = check_multiplicity(A, mu)
        return all(divisible_by_linear_power(self.apply(H.form), H.form, m)
                   for H, m in zip(A.hyperplanes, mu))

    def format(self, names: Sequence[str] | None = None) -> str:
        """Inline form (f1)*D1 + (f2)*D2 + ...; zero coefficients are skipped."""
        parts = [f"({format_poly(f, names)})*D{i + 1}" for i, f in enumerate(self.coeffs) if f]
        return " + ".join(parts) if parts else "0"

    def __str__(self) -> str:
        return self.format()


def euler_derivation(nvars: int, order: int = 1) -> Derivation:
    return Derivation(tuple(Poly.var(i, nvars, order) for i in range(nvars)), 1)


# -- graded pieces -----------------------------------------------------

def _columns(A: Arrangement, mu: Multiplicity, d: int) -> list[tuple[int, tuple[int, ...]]]:
    """Unknowns (i, e): coefficient of x^e in f_i.

    Coordinate hyperplanes x_i force x_i^mu | f_i, so those unknowns are
    dropped up front instead of being eliminated by constraints.
    """
    n = A.dim
    low = [0] * n
    for H, m in zip(A.hyperplanes, mu):
        support = [i for i, c in enumerate(H.form) if c]
        if len(support) == 1:
            low[support[0]] = max(low[support[0]], m)
    mons = monomials(n, d)
    return [(i, e) for i in range(n) for e in mons if e[i] >= low[i]]


def _constraint_rows(A: Arrangement, mu: Multiplicity, d: int, cols) -> list[dict]:
    n = A.dim
    order = A.order
    col_of = {c: j for j, c in enumerate(cols)}
    rows: list[dict] = []
    for H, m in zip(A.hyperplanes, mu):
        alpha = H.form
        support = [i for i, c in enumerate(alpha) if c]
        if len(support) == 1:
            continue
        k = support[0]
        # (-beta)^p with beta = sum_{j != k} alpha_j y_j, as exponent maps
        neg_beta = Poly.linear([(-c if j != k else 0) for j, c in enumerate(alpha)], order)
        powers = [Poly.one(n, order)]
        for _ in range(d):
            powers.append(powers[-1] * neg_beta)
        acc: dict[tuple, dict[int, CycloScalar]] = {}
        for i in support:
            ai = alpha[i]
            for e in monomials(n, d):
                j = col_of.get((i, e))
                if j is None:
                    continue
                ek = e[k]
                base = list(e)
                for s in range(min(m, ek + 1)):
                    base[k] = s
                    c0 = ai * comb(ek, s)
                    for pe, pc in powers[ek - s].terms.items():
                        t = tuple(b + p for b, p in zip(base, pe))
                        row = acc.setdefault(t, {})
                        v = c0 * pc
                        prev = row.get(j)
                        row[j] = v if prev is None else prev + v
        rows.extend(r for r in acc.values() if any(r.values()))
    return rows


@dataclass
class GradedPiece:
    """Basis of D(A, mu)_d with the coordinates used to express members."""

    degree: int
    columns: list[tuple[int, tuple[int, ...]]]
    basis_vectors: list[dict[int, CycloScalar]]
    free_columns: list[int]
    nvars: int
    order: int

    def __len__(self) -> int:
        return len(self.basis_vectors)

    def derivation(self, vec: dict[int, CycloScalar]) -> Derivation:
        terms: list[dict] = [{} for _ in range(self.nvars)]
        for j, v in vec.items():
            if v:
                i, e = self.columns[j]
                terms[i][e] = v
        return Derivation(tuple(Poly(self.nvars, self.order, t) for t in terms), self.degree)

    def derivations(self) -> list[Derivation]:
        return [self.derivation(v) for v in self.basis_vectors]


def graded_piece_data(A: Arrangement, mu: Multiplicity | None, d: int) -> GradedPiece:
    mu = check_multiplicity(A, mu)
    if d < 0:
        return GradedPiece(d, [], [], [], A.dim, A.order)
    cols = _columns(A, mu, d)
    rows = _constraint_rows(A, mu, d, cols)
    ech = rref(rows, len(cols), A.order)
    return GradedPiece(d, cols, ech.kernel(), ech.free_columns, A.dim, A.order)


def graded_piece(A: Arrangement, mu: Multiplicity | None, d: int) -> list[Derivation]:
    """A basis of the degree-d piece of D(A, mu)."""
    return graded_piece_data(A, mu, d).derivations()


# -- Saito's criterion -------------------------------------------------

def coefficient_matrix(derivs: Sequence[Derivation]) -> list[list[Poly]]:
    """M[i][j] = theta_j(x_i)."""
    n = len(derivs)
    return [[derivs[j].coeffs[i] for j in range(n)] for i in range(n)]


def proportional(p: Poly, q: Poly) -> bool:
    """True iff p = c q for a nonzero scalar c."""
    if p.is_zero() or q.is_zero() or set(p.terms) != set(q.terms):
        return False
    e = next(iter(p.terms))
    c = p.terms[e] / q.terms[e]
    return all(p.terms[t] == c * q.terms[t] for t in p.terms)


_POINTS = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _det_nonzero(derivs: Sequence[Derivation]) -> bool:
    n = len(derivs)
    order = max(d.order for d in derivs)
    for shift in range(4):
        point = [CycloScalar.rational(_POINTS[(i + shift) % len(_POINTS)] + shift * i * i, order)
                 for i in range(n)]
        mat = [[derivs[j].coeffs[i].evaluate(point) for j in range(n)] for i in range(n)]
        if rref(mat, n, order).rank == n:
            return True
    return not poly_determinant(coefficient_matrix(derivs)).is_zero()


def saito_check(derivs: Sequence[Derivation], A: Arrangement, mu: Multiplicity | None = None,
                *, expand: bool = False) -> bool:
    """True iff the derivations form a basis of D(A, mu).

    Every member of D(A, mu) has coefficient determinant divisible by
    Q(A, mu), so for members the condition det = c * Q(A, mu) is equivalent to
    det != 0 together with sum of degrees = |mu|.  With ``expand`` the
    determinant is expanded and compared against Q(A, mu) directly.
    """
    mu = check_multiplicity(A, mu)
    if len(derivs) != A.dim:
        raise ValueError(f"expected {A.dim} derivations, got {len(derivs)}")
    for k, th in enumerate(derivs):
        if th.nvars != A.dim:
            raise ValueError("derivation in the wrong number of variables")
        if not th.is_member(A, mu):
            raise ValueError(f"derivation {k} is not in D(A, mu)")
    if A.dim == 0:
        return True
    if expand:
        det = poly_determinant(coefficient_matrix(derivs))
        return proportional(det, A.defining_polynomial(mu))
    if any(th.is_zero() for th in derivs):
        return False
    if sum(th.degree for th in derivs) != sum(mu):
        return False
    return _det_nonzero(derivs)


# -- freeness ----------------------------------------------------------

@dataclass
class FreenessResult:
    free: bool
    exponents: tuple[int, ...] | None = None
    basis: list[Derivation] | None = None
    witness: dict[int, int] | None = None
    reason: str = ""

    @property
    def verdict(self) -> str:
        return "Free" if self.free else "NonFree"


class _LRU:
    """Thread-safe bounded memo table."""

    def __init__(self, size: int):
        self.size = size
        self.data: OrderedDict = OrderedDict()
        self.lock = threading.Lock()

    def get(self, key):
        with self.lock:
            if key in self.data:
                self.data.move_to_end(key)
                return self.data[key]
        return None

    def put(self, key, value):
        if self.size <= 0:
            return
        with self.lock:
            self.data[key] = value
            self.data.move_to_end(key)
            while len(self.data) > self.size:
                self.data.popitem(last=False)

    def clear(self):
        with self.lock:
            self.data.clear()


CACHE_ENV = "MULTIARR_CACHE_SIZE"
_freeness_cache = _LRU(int(os.environ.get(CACHE_ENV, "4096")))


def clear_cache() -> None:
    _freeness_cache.clear()


def _products_in_piece(gens: list[Derivation], piece: GradedPiece) -> list[dict[int, CycloScalar]]:
    """Coordinates (at the piece's free columns) of monomial multiples of gens."""
    where = {piece.columns[j]: j for j in piece.free_columns}
    out = []
    for g in gens:
        for a in monomials(piece.nvars, piece.degree - g.degree):
            vec = {}
            for i, f in enumerate(g.coeffs):
                for e, c in f.terms.items():
                    j = where.get((i, tuple(x + y for x, y in zip(e, a))))
                    if j is not None:
                        vec[j] = c
            if vec:
                out.append(vec)
    return out


def _decide_essential(A: Arrangement, mu: Multiplicity) -> FreenessResult:
    r = A.dim
    total = sum(mu)
    if r == 0:
        return FreenessResult(True, (), [], reason="empty")
    gens: list[Derivation] = []
    profile: dict[int, int] = {}
    for d in range(total + 1):
        piece = graded_piece_data(A, mu, d)
        if not len(piece):
            continue
        covered = _products_in_piece(gens, piece) if gens else []
        if covered:
            ech = rref(covered, len(piece.columns), A.order)
            taken = set(ech.pivots)
        else:
            taken = set()
        new = [v for v, j in zip(piece.basis_vectors, piece.free_columns) if j not in taken]
        if new:
            profile[d] = len(new)
            gens.extend(piece.derivation(v) for v in new)
        count = len(gens)
        degsum = sum(g.degree for g in gens)
        if count > r:
            return FreenessResult(False, witness=profile,
                                  reason=f"{count} minimal generators up to degree {d} exceed rank {r}")
        if count == r:
            if degsum != total:
                return FreenessResult(False, witness=profile,
                                      reason=f"{r} generators with degree sum {degsum} != |mu| = {total}")
            if saito_check(gens, A, mu):
                exps = tuple(sorted(g.degree for g in gens))
                return FreenessResult(True, exps, gens, witness=profile, reason="saito")
            return FreenessResult(False, witness=profile, reason="generators fail Saito's criterion")
        if degsum + (r - count) * (d + 1) > total:
            return FreenessResult(False, witness=profile,
                                  reason=f"remaining generators cannot fit below |mu| = {total}")
    return FreenessResult(False, witness=profile, reason="too few generators up to degree |mu|")


def _lift(e, basis: list[Derivation], order: int) -> list[Derivation]:
    """Transport an essential basis back to the ambient coordinates."""
    n = e.ambient_dim
    images = [Poly.linear(list(row), order) for row in e.rows]
    out = []
    for th in basis:
        coeffs = [Poly.zero(n, order) for _ in range(n)]
        for k, p in enumerate(e.pivots):
            coeffs[p] = th.coeffs[k].substitute(images) if th.coeffs[k] else Poly.zero(n, order)
        out.append(Derivation(tuple(coeffs), th.degree))
    for c in e.center_columns:
        coeffs = [Poly.zero(n, order) for _ in range(n)]
        coeffs[c] = Poly.one(n, order)
        for k, p in enumerate(e.pivots):
            v = e.rows[k][c]
            if v:
                coeffs[p] = Poly.constant(-v, n, order)
        out.append(Derivation(tuple(coeffs), 0))
    return out


def decide_freeness(A: Arrangement, mu: Multiplicity | None = None) -> FreenessResult:
    """Decide whether D(A, mu) is free by minimal generators up to degree |mu|."""
    mu = check_multiplicity(A, mu)
    key = canonical_key(A, mu)
    hit = _freeness_cache.get(key)
    if hit is not None:
        return hit
    if len(A) == 0:
        res = FreenessResult(True, (0,) * A.dim,
                             [Derivation.coordinate(i, A.dim, A.order) for i in range(A.dim)],
                             witness={0: A.dim} if A.dim else {}, reason="empty arrangement")
    else:
        e = essentialization(A, mu)
        core = _decide_essential(e.arrangement, mu)
        if core.free and e.ambient_dim > e.arrangement.dim:
            basis = _lift(e, core.basis, A.order)
            exps = tuple(sorted(core.exponents + (0,) * (A.dim - e.arrangement.dim)))
            res = FreenessResult(True, exps, basis, core.witness, core.reason)
        else:
            res = core
    _freeness_cache.put(key, res)
    return res


def exponents(A: Arrangement, mu: Multiplicity | None = None) -> tuple[int, ...] | None:
    res = decide_freeness(A, mu)
    return res.exponents if res.free else None


# -- rank two and Euler multiplicities ----------------------------------

def divisible_coefficientwise(th: Derivation, alpha: Sequence) -> bool:
    return all(divisible_by_linear_power(f, alpha, 1) for f in th.coeffs)


def rank2_invariants(A: Arrangement, mu: Multiplicity | None = None,
                     alpha0: Sequence | None = None) -> tuple[int, int, int | None]:
    """(e1, e2, split degree) of an essential rank-2 multiarrangement."""
    mu = check_multiplicity(A, mu)
    if A.dim != 2 or A.rank() != 2:
        raise ValueError("rank2_invariants needs an essential arrangement of rank 2")
    total = sum(mu)
    for d in range(total + 1):
        piece = graded_piece(A, mu, d)
        if piece:
            break
    else:  # pragma: no cover - rank-2 multiarrangements are always free
        raise RuntimeError("no derivations up to degree |mu|")
    e1, e2 = d, total - d
    if alpha0 is None:
        return e1, e2, None
    split = e1 if any(not divisible_coefficientwise(th, alpha0) for th in piece) else e2
    return e1, e2, split


@dataclass(frozen=True)
class EulerValue:
    value: int
    rule: str
    k: int
    mu0: int
    mu1: int
    total: int


def euler_on_flat(A: Arrangement, mu: Multiplicity, i0: int, X: Flat,
                  *, fast: bool = True) -> EulerValue:
    """mu*(Y) for the rank-2 flat X = H0 cap H of A.

    Fast paths follow the standard closed forms; the third one is applied only
    when mu(H0) >= 2 (for mu(H0) = 1 the distinguished element is the Euler
    derivation and the value is 1 for k >= 3).
    """
    loc = [i for i in X.localized]
    k = len(loc)
    mu0 = mu[i0]
    others = [mu[i] for i in loc if i != i0]
    mu1 = max(others)
    total = mu0 + sum(others)
    if fast:
        if k == 2:
            return EulerValue(mu1, "k=2", k, mu0, mu1, total)
        if k == 3 and 2 * mu0 <= total and 2 * mu1 <= total:
            return EulerValue(total // 2, "k=3 balanced", k, mu0, mu1, total)
        if total <= 2 * k - 1 and mu0 >= 2:
            return EulerValue(k - 1, "|mu_X| <= 2k-1", k, mu0, mu1, total)
    AX, muX = localization(A, mu, X)
    e = essentialization(AX, muX)
    alpha0 = [A.hyperplanes[i0].form[p] for p in e.pivots]
    _, _, split = rank2_invariants(e.arrangement, e.multiplicity, alpha0)
    return EulerValue(split, "rank-2 split", k, mu0, mu1, total)


@dataclass
class EulerRestriction:
    arrangement: Arrangement
    multiplicity: Multiplicity
    fibers: list[list[int]]
    values: list[EulerValue]


def euler_restriction_detail(A: Arrangement, mu: Multiplicity | None, H0,
                             *, fast: bool = True) -> EulerRestriction:
    mu = check_multiplicity(A, mu)
    i0 = A.index(H0)
    res = restrict_to(A, i0)
    fibers = res.fibers()
    values = []
    for fib in fibers:
        X = flat_of(A, [i0, fib[0]])
        values.append(euler_on_flat(A, mu, i0, X, fast=fast))
    return EulerRestriction(res.arrangement, tuple(v.value for v in values), fibers, values)


def euler_restriction(A: Arrangement, mu: Multiplicity | None, H0,
                      *, fast: bool = True) -> tuple[Arrangement, Multiplicity]:
    """(A'', mu*) with the Euler multiplicity on every restricted hyperplane."""
    r = euler_restriction_detail(A, mu, H0, fast=fast)
    return r.arrangement, r.multiplicity


def euler_multiplicity(A: Arrangement, mu: Multiplicity | None, H0, Y,
                       *, fast: bool = True) -> int:
    """mu*(Y) for Y a hyperplane of A^{H0}, given by index or as a Hyperplane of A''."""
    mu = check_multiplicity(A, mu)
    i0 = A.index(H0)
    res = restrict_to(A, i0)
    j = res.arrangement.index(Y)
    fib = res.fibers()[j]
    return euler_on_flat(A, mu, i0, flat_of(A, [i0, fib[0]]), fast=fast).value


# -- concentrated multiplicities --------------------------------------

def divide_by_linear(p: Poly, alpha: Sequence) -> Poly:
    """Exact quotient p / alpha; raises if alpha does not divide p."""
    order = p.order
    alpha = [a if isinstance(a, CycloScalar) else CycloScalar.rational(a, order) for a in alpha]
    k = next(i for i, a in enumerate(alpha) if a)
    lead = alpha[k]
    lin = Poly.linear(alpha, order)
    rem = p
    q_terms: dict = {}
    while rem:
        e = max(rem.terms, key=lambda t: (t[k], t))
        if e[k] == 0:
            raise ValueError("linear form does not divide the polynomial")
        f = list(e)
        f[k] -= 1
        c = rem.terms[e] / lead
        q_terms[tuple(f)] = c
        rem = rem - lin.shift(f, c)
    return Poly(p.nvars, order, q_terms)


def adapt_to_annihilator(basis: Sequence[Derivation], alpha0: Sequence) -> list[Derivation]:
    """Replace theta by theta - (theta(alpha0)/alpha0) theta_E for every element after the first."""
    n = basis[0].nvars
    order = max(th.order for th in basis)
    tE = euler_derivation(n, order)
    out = [basis[0]]
    for th in basis[1:]:
        val = th.apply(alpha0)
        if val.is_zero():
            out.append(th)
            continue
        q = divide_by_linear(val, alpha0)
        out.append(th - tE.times(q))
    return out


def delta_basis(A: Arrangement, basis: Sequence[Derivation], H0, m0: int) -> list[Derivation]:
    """Basis {alpha0^(m0-1) theta_E, theta_2, ..., theta_l} of D(A, delta_{H0,m0})."""
    from .arrangement import concentrated_multiplicity

    if m0 < 1:
        raise ValueError("m0 must be positive")
    i0 = A.index(H0)
    alpha0 = A.hyperplanes[i0].form
    if not saito_check(list(basis), A):
        raise ValueError("input is not a basis of D(A)")
    tE = euler_derivation(A.dim, A.order)
    first = basis[0]
    if not (first.degree == 1 and proportional_derivations(first, tE)):
        raise ValueError("first basis element must be the Euler derivation")
    for th in basis[1:]:
        if not th.apply(alpha0).is_zero():
            raise ValueError("basis elements after the first must annihilate alpha0")
    if m0 == 1:
        return list(basis)
    a0 = Poly.linear(list(alpha0), A.order)
    out = [tE.times(a0 ** (m0 - 1))] + list(basis[1:])
    delta = concentrated_multiplicity(A, i0, m0)
    if not saito_check(out, A, delta):
        raise ValueError("constructed derivations fail Saito's criterion")
    return out


def proportional_derivations(a: Derivation, b: Derivation) -> bool:
    ratio = None
    for f, g in zip(a.coeffs, b.coeffs):
        if f.is_zero() != g.is_zero():
            return False
        if f.is_zero():
            continue
        e = next(iter(g.terms))
        c = f.coefficient(e) / g.terms[e]
        if f != g.scale(c):
            return False
        if ratio is None:
            ratio = c
        elif ratio != c:
            return False
    return ratio is not None and bool(ratio)


def euler_first_basis(A: Arrangement, H0) -> list[Derivation]:
    """A basis of D(A) starting with theta_E whose other members kill alpha0."""
    res = decide_freeness(A)
    if not res.free:
        raise ValueError("arrangement is not free")
    if A.dim - A.rank() != 0:
        raise ValueError("arrangement must be essential")
    i0 = A.index(H0)
    alpha0 = A.hyperplanes[i0].form
    tE = euler_derivation(A.dim, A.order)
    basis = sorted(res.basis, key=lambda th: th.degree)
    # theta_E has degree 1, so it can replace one of the degree-1 generators
    ones = [i for i, th in enumerate(basis) if th.degree == 1]
    for i in ones:
        cand = [tE] + [th for j, th in enumerate(basis) if j != i]
        if saito_check(cand, A):
            break
    else:
        raise ValueError("could not place the Euler derivation in the basis")
    return adapt_to_annihilator(cand, alpha0)
