"""Constructors for reflection arrangements and published reference data."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from .arrangement import (
    Arrangement,
    Hyperplane,
    Multiplicity,
    addition,
    check_multiplicity,
    product,
    ziegler_multiplicity,
)
from .derivations import decide_freeness
from .induction import (
    AdditionStep,
    Base,
    Exhausted,
    InductionCertificate,
    annotate,
    certificate_from_pivots,
    search_certificate,
    trivial_certificate,
)
from .poly import parse_poly
from .scalars import CycloScalar


def _unit(l: int, i: int, c=1) -> list:
    v = [0] * l
    v[i] = c
    return v


def _pair(l: int, i: int, j: int, a, b) -> list:
    v = [0] * l
    v[i] = a
    v[j] = b
    return v


def coxeter_arrangement(kind: str, l: int) -> Arrangement:
    """Reflection arrangement of type A_{l-1} (in l variables), B_l or D_l."""
    kind = kind.upper()
    if kind not in ("A", "B", "D"):
        raise ValueError(f"unknown Coxeter type {kind!r}")
    if l < 2 or (kind == "D" and l < 3):
        raise ValueError(f"type {kind} needs l >= {3 if kind == 'D' else 2}")
    forms = []
    if kind == "B":
        forms += [_unit(l, i) for i in range(l)]
    for i, j in itertools.combinations(range(l), 2):
        forms.append(_pair(l, i, j, 1, -1))
        if kind != "A":
            forms.append(_pair(l, i, j, 1, 1))
    return Arrangement.from_forms(l, forms)


def monomial_arrangement(r: int, p: int, l: int) -> Arrangement:
    """Reflection arrangement of G(r, p, l) for p in {1, r}, over Q(zeta_r)."""
    if r < 2 or l < 2:
        raise ValueError("need r >= 2 and l >= 2")
    if p not in (1, r):
        raise ValueError("only p = 1 and p = r are supported")
    return restriction_class_arrangement(l if p == 1 else 0, l, r)


def restriction_class_arrangement(k: int, p: int, r: int) -> Arrangement:
    """A^k_p(r): x_1..x_k together with x_i - zeta^m x_j for i < j <= p."""
    if r < 1 or p < 1 or not 0 <= k <= p:
        raise ValueError("need 0 <= k <= p and r >= 1")
    z = CycloScalar.zeta(r)
    forms = [_unit(p, i) for i in range(k)]
    for i, j in itertools.combinations(range(p), 2):
        for m in range(r):
            forms.append(_pair(p, i, j, 1, -(z ** m)))
    return Arrangement.from_forms(p, forms, r)


# G29 restriction to ker x4 with its Ziegler multiplicity, in display order.
# Each entry: coefficients of (x1, x2, x3) as Gaussian integers (re, im), multiplicity.
_G29_KAPPA = [
    (((1, 0), (-1, 0), (0, -1)), 2),
    (((1, 0), (-1, 0), (0, 0)), 1),
    (((0, 0), (1, 0), (-1, 0)), 1),
    (((0, 0), (0, 0), (1, 0)), 3),
    (((1, 0), (0, -1), (-1, 0)), 2),
    (((1, 0), (-1, 0), (0, 1)), 2),
    (((1, 0), (0, 0), (-1, 0)), 1),
    (((1, 0), (0, 1), (0, -1)), 2),
    (((0, 0), (1, 0), (0, 0)), 3),
    (((1, 0), (0, 1), (-1, 0)), 2),
    (((1, 0), (0, -1), (0, 1)), 2),
    (((1, 0), (0, 0), (0, 0)), 3),
    (((1, 0), (0, -1), (1, 0)), 2),
    (((1, 0), (0, -1), (0, -1)), 2),
    (((1, 0), (0, 1), (0, 1)), 2),
    (((1, 0), (0, 1), (1, 0)), 2),
    (((1, 0), (1, 0), (0, -1)), 2),
    (((1, 0), (1, 0), (0, 1)), 2),
    (((0, 0), (1, 0), (1, 0)), 1),
    (((1, 0), (0, 0), (1, 0)), 1),
    (((1, 0), (1, 0), (0, 0)), 1),
]


def gaussian(re: int, im: int) -> CycloScalar:
    return CycloScalar.from_coeffs(4, [re, im])


def g29_restricted_kappa() -> tuple[Arrangement, Multiplicity]:
    """The rank-3 restriction of the G29 arrangement with Ziegler multiplicity, over Q(i)."""
    hs = [Hyperplane.of([gaussian(*c) for c in coeffs], 4) for coeffs, _ in _G29_KAPPA]
    return Arrangement(3, 4, tuple(hs)), tuple(m for _, m in _G29_KAPPA)


def example_kappa2() -> Arrangement:
    """Q = x y z t (x-y)(x-z)(x-y+t)(x-z+t); the last coordinate is t."""
    forms = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1],
             [1, -1, 0, 0], [1, 0, -1, 0], [1, -1, 0, 1], [1, 0, -1, 1]]
    return Arrangement.from_forms(4, forms)


EXAMPLE_KAPPA2_PIVOT = (0, 0, 0, 1)


def e8_arrangement() -> Arrangement:
    """The 120 root hyperplanes of E8 in the even-coordinate model."""
    forms = []
    for i, j in itertools.combinations(range(8), 2):
        forms.append(_pair(8, i, j, 1, -1))
        forms.append(_pair(8, i, j, 1, 1))
    for signs in itertools.product((1, -1), repeat=7):
        if signs.count(-1) % 2 == 0:
            forms.append([1, *signs])
    return Arrangement.from_forms(8, forms)


# -- published reference data ---------------------------------------------

def monomial_exponents(r: int, l: int) -> tuple[int, ...]:
    """exp A(G(r,1,l)) = {1, r+1, ..., (l-1)r+1}."""
    return tuple(k * r + 1 for k in range(l))


def grr_exponents(r: int, l: int) -> tuple[int, ...]:
    """exp A(G(r,r,l)) = {1, r+1, ..., (l-2)r+1, (l-1)(r-1)}."""
    return tuple(sorted([k * r + 1 for k in range(l - 1)] + [(l - 1) * (r - 1)]))


def coxeter_exponents(kind: str, l: int) -> tuple[int, ...]:
    kind = kind.upper()
    if kind == "A":
        return tuple(range(l))
    if kind == "B":
        return tuple(range(1, 2 * l, 2))
    if kind == "D":
        return tuple(sorted(list(range(1, 2 * l - 2, 2)) + [l - 1]))
    raise ValueError(kind)


def d_kappa_exponents(l: int) -> tuple[int, ...]:
    """exp(A(D_l)'', kappa) = {3, 5, ..., 2l-3, l-1}."""
    return tuple(sorted(list(range(3, 2 * l - 2, 2)) + [l - 1]))


@dataclass
class CatalogEntry:
    name: str
    params: dict
    arrangement: Arrangement
    multiplicity: Multiplicity | None = None
    exponents: tuple[int, ...] | None = None
    published: dict = field(default_factory=dict)
    note: str = ""


@dataclass
class _Family:
    params: tuple[str, ...]
    build: Callable[..., CatalogEntry]
    description: str


def _coxeter_entry(kind):
    def build(l: int) -> CatalogEntry:
        A = coxeter_arrangement(kind, l)
        return CatalogEntry(f"{kind}", {"l": l}, A, None, coxeter_exponents(kind, l),
                            note=f"Coxeter arrangement of type {kind}")
    return build


def _monomial_entry(r: int, l: int) -> CatalogEntry:
    return CatalogEntry("G(r,1,l)", {"r": r, "l": l}, monomial_arrangement(r, 1, l), None,
                        monomial_exponents(r, l), note="full monomial group")


def _grr_entry(r: int, l: int) -> CatalogEntry:
    return CatalogEntry("G(r,r,l)", {"r": r, "l": l}, monomial_arrangement(r, r, l), None,
                        grr_exponents(r, l), note="monomial group G(r,r,l)")


def _restriction_class_entry(k: int, p: int, r: int) -> CatalogEntry:
    pub = {}
    if k == 1 and p == 3:
        pub["exponents"] = (1, r + 1, 2 * r - 1)
    return CatalogEntry("A^k_p(r)", {"k": k, "p": p, "r": r},
                        restriction_class_arrangement(k, p, r), None,
                        pub.get("exponents"), pub, note="intermediate monomial arrangement")


def _g29_entry() -> CatalogEntry:
    A, mu = g29_restricted_kappa()
    return CatalogEntry("g29-kappa", {}, A, mu, (9, 13, 17),
                        {"simple_exponents": (1, 9, 11), "total": 39},
                        note="restriction of the G29 arrangement with Ziegler multiplicity")


def _kappa2_entry() -> CatalogEntry:
    A = example_kappa2()
    return CatalogEntry("kappa2", {}, A, None, None,
                        {"free": False, "pivot": EXAMPLE_KAPPA2_PIVOT},
                        note="non-free arrangement with a non-free Ziegler restriction on ker t")


def _e8_entry() -> CatalogEntry:
    return CatalogEntry("E8", {}, e8_arrangement(), None,
                        (1, 7, 11, 13, 17, 19, 23, 29),
                        {"C_simple": (1, 7, 11, 13, 14, 17),
                         "C_kappa": (7, 11, 13, 17, 19, 23)},
                        note="E8 root arrangement (120 hyperplanes)")


FAMILIES: dict[str, _Family] = {
    "A": _Family(("l",), _coxeter_entry("A"), "x_i - x_j in l variables"),
    "B": _Family(("l",), _coxeter_entry("B"), "x_i, x_i +- x_j"),
    "D": _Family(("l",), _coxeter_entry("D"), "x_i +- x_j"),
    "G1": _Family(("r", "l"), _monomial_entry, "G(r,1,l): x_i, x_i - zeta^k x_j"),
    "Grr": _Family(("r", "l"), _grr_entry, "G(r,r,l): x_i - zeta^k x_j"),
    "Akp": _Family(("k", "p", "r"), _restriction_class_entry,
                   "A^k_p(r): x_1..x_k, x_i - zeta^m x_j"),
    "g29-kappa": _Family((), _g29_entry, "G29 restriction with Ziegler multiplicity (Q(i))"),
    "kappa2": _Family((), _kappa2_entry, "xyzt(x-y)(x-z)(x-y+t)(x-z+t)"),
    "E8": _Family((), _e8_entry, "E8 root arrangement"),
}


def list_families() -> list[tuple[str, tuple[str, ...], str]]:
    return [(name, f.params, f.description) for name, f in FAMILIES.items()]


def get_entry(name: str, *args: int) -> CatalogEntry:
    if name not in FAMILIES:
        raise KeyError(f"unknown catalog entry {name!r}")
    fam = FAMILIES[name]
    if len(args) != len(fam.params):
        want = " ".join(f"<{p}>" for p in fam.params) or "no parameters"
        raise ValueError(f"{name} takes {want}")
    return fam.build(*args)


def kappa_restriction(A: Arrangement, H0) -> tuple[Arrangement, Multiplicity]:
    return ziegler_multiplicity(A, H0)


# -- induction tables ---------------------------------------------------------

def _form_from_text(text: str, dim: int, order: int) -> Hyperplane:
    p = parse_poly(text, dim, order)
    return Hyperplane.of([p.coefficient(tuple(int(j == i) for j in range(dim)))
                          for i in range(dim)], order)


def _base_for(A: Arrangement, mu: Multiplicity | None, how: str, budget: int | None = 20000) -> Base:
    """Base of an induction table: searched certificate, or declared."""
    mu = check_multiplicity(A, mu)
    if A.rank() <= 2:
        return Base("rank2", A, mu, decide_freeness(A, mu).exponents)
    if how == "declared":
        return Base("declared", A, mu, decide_freeness(A, mu).exponents)
    cert = search_certificate(A, mu, budget=budget)
    if isinstance(cert, Exhausted):
        raise RuntimeError(f"no certificate for the table base: {cert.reason}")
    return Base("certified", A, mu, cert.claimed_exponents(), [cert])


def d_kappa_restriction(l: int) -> tuple[Arrangement, Multiplicity]:
    """(A(D_l)'', kappa) for H0 = ker(x1 - x2), i.e. (A^1_{l-1}(2), kappa)."""
    D = coxeter_arrangement("D", l)
    return ziegler_multiplicity(D, D.index(_pair(l, 0, 1, 1, -1)))


def d_table_pivots(l: int) -> list[list[int]]:
    """Additions from (D_{l-1}'', kappa) x Phi_1 up to (D_l'', kappa).

    The hyperplanes involving the last coordinate x_n (n = l - 1) are added in
    the order x_j - x_n (1 < j < n), x_1 - x_n twice, x_1 + x_n twice,
    x_j + x_n (1 < j < n); every intermediate multiarrangement is free.
    """
    n = l - 1
    minus = [_pair(n, j, n - 1, 1, -1) for j in range(1, n - 1)]
    plus = [_pair(n, j, n - 1, 1, 1) for j in range(1, n - 1)]
    x1 = [_pair(n, 0, n - 1, 1, -1)] * 2 + [_pair(n, 0, n - 1, 1, 1)] * 2
    return minus + x1 + plus


def d_table_base(l: int) -> tuple[Arrangement, Multiplicity]:
    """The hyperplanes of (D_l'', kappa) not involving the last coordinate."""
    A, mu = d_kappa_restriction(l)
    keep = [i for i, H in enumerate(A.hyperplanes) if not H.form[-1]]
    return A.subarrangement(keep), tuple(mu[i] for i in keep)


def d_table_certificate(l: int) -> InductionCertificate:
    """Induction table for (A(D_l)'', kappa), l >= 4, built recursively on l."""
    if l < 4:
        raise ValueError("the D table starts at l = 4")
    A0, mu0 = d_table_base(l)
    E0 = decide_freeness(A0, mu0).exponents
    if l == 4:
        base = Base("rank2", A0, mu0, E0)
    else:
        inner = d_table_certificate(l - 1)
        phi1 = trivial_certificate(Arrangement.empty(1))
        P, pm = product(*inner.target(), *phi1.target())
        base = Base("product", P, pm, E0, [inner, phi1])
    return certificate_from_pivots(base, d_table_pivots(l))


def grr4_kappa(r: int) -> tuple[Arrangement, Multiplicity]:
    """(A^1_3(r), kappa): x1^(r-1) (x1^r - x2^r)^2 (x1^r - x3^r)^2 (x2^r - x3^r)."""
    A = restriction_class_arrangement(1, 3, r)
    mu = []
    for H in A.hyperplanes:
        f = H.form
        if f[1] and f[2]:
            mu.append(1)
        elif f[1] or f[2]:
            mu.append(2)
        else:
            mu.append(r - 1)
    return A, tuple(mu)


def grr4_table_pivots(r: int) -> list[Hyperplane]:
    z = CycloScalar.zeta(r)
    out = []
    for j in (1, 2):
        for k in list(range(1, r)) + [0]:
            out.append(Hyperplane.of(_pair(3, 0, j, 1, -(z ** k)), r))
    out += [Hyperplane.of(_unit(3, 0), r)] * (r - 2)
    return out


def grr4_table_certificate(r: int = 3, base: str = "certified") -> InductionCertificate:
    """Induction table from A^1_3(r) (simple) to (A^1_3(r), kappa)."""
    A = restriction_class_arrangement(1, 3, r)
    return certificate_from_pivots(_base_for(A, None, base), grr4_table_pivots(r))


def grr4_restriction_basis(r: int):
    """The rank-2 restriction x1^r prod_j (x1 - zeta^j x3)^2 and its displayed basis.

    Returned in the two coordinates (x1, x3).
    """
    from .derivations import Derivation
    from .poly import Poly

    z = CycloScalar.zeta(r)
    forms = [[1, 0]] + [[1, -(z ** j)] for j in range(r)]
    A = Arrangement.from_forms(2, forms, r)
    mu = tuple([r] + [2] * r)
    x1, x3 = Poly.var(0, 2, r), Poly.var(1, 2, r)
    th1 = Derivation.from_polys([x1 ** (r + 1) * r, x1 ** r * x3 * (r + 1) - x3 ** (r + 1)])
    th2 = Derivation.from_polys([x1 ** r * x3 ** (r - 1) * r,
                                 x1 ** (r - 1) * (x1 ** r + x3 ** r * (r - 1))])
    return A, mu, [th1, th2]


# Rows of the published G29 table: pivot, exp(A', mu'), exp(A'', mu*), mu*.
G29_TABLE = [
    ("x1 - x2 - i*x3", (1, 9, 11), (9, 11), (1, 2, 2, 4, 2, 3, 4, 2)),
    ("x3", (2, 9, 11), (9, 11), (3, 4, 3, 4, 3, 3)),
    ("x3", (3, 9, 11), (9, 11), (3, 4, 3, 4, 3, 3)),
    ("x1 - i*x2 - x3", (4, 9, 11), (9, 11), (2, 1, 2, 2, 4, 3, 4, 2)),
    ("x1 - x2 + i*x3", (5, 9, 11), (9, 11), (1, 2, 2, 3, 2, 4, 4, 2)),
    ("x1 + i*x2 - i*x3", (6, 9, 11), (9, 11), (2, 2, 3, 2, 1, 4, 2, 4)),
    ("x2", (7, 9, 11), (9, 11), (3, 4, 3, 4, 3, 3)),
    ("x2", (8, 9, 11), (9, 11), (3, 4, 3, 4, 3, 3)),
    ("x1 + i*x2 - x3", (9, 9, 11), (9, 11), (2, 2, 2, 3, 2, 1, 4, 4)),
    ("x1 - i*x2 + i*x3", (9, 10, 11), (9, 11), (2, 2, 3, 2, 1, 4, 2, 4)),
    ("x1", (9, 11, 11), (9, 11), (3, 3, 3, 3, 4, 4)),
    ("x1", (9, 11, 12), (9, 11), (3, 3, 3, 3, 4, 4)),
    ("x1 - i*x2 + x3", (9, 11, 13), (9, 13), (2, 2, 2, 5, 1, 2, 3, 5)),
    ("x1 - i*x2 - i*x3", (9, 12, 13), (9, 13), (2, 1, 2, 5, 3, 5, 2, 2)),
    ("x1 + i*x2 + i*x3", (9, 13, 13), (9, 13), (2, 1, 2, 5, 3, 5, 2, 2)),
    ("x1 + i*x2 + x3", (9, 13, 14), (9, 13), (2, 5, 2, 5, 2, 3, 1, 2)),
    ("x1 + x2 - i*x3", (9, 13, 15), (9, 13), (2, 2, 3, 1, 2, 5, 5, 2)),
    ("x1 + x2 + i*x3", (9, 13, 16), (9, 13), (1, 2, 2, 5, 2, 3, 5, 2)),
]


def g29_table_certificate(base: str = "certified") -> InductionCertificate:
    """The published G29 table transcribed as a certificate.

    Exponent columns are copied from the table; the Euler multiplicity
    vectors are filled in with the order of A'' used by this package (the
    table does not fix an order, and its vectors agree as multisets).
    """
    A, _ = g29_restricted_kappa()
    b = _base_for(A, None, base)
    steps = [AdditionStep(_form_from_text(p, 3, 4), before, restr)
             for p, before, restr, _ in G29_TABLE]
    return annotate(InductionCertificate(3, 4, b, steps, (9, 13, 17)))
