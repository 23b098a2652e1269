"""Central hyperplane arrangements and multiplicities over Q(zeta_r)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .linalg import rref
from .poly import Poly, format_poly, product as poly_product
from .scalars import CycloScalar, euler_phi, format_scalar, parse_scalar

Form = tuple[CycloScalar, ...]
Multiplicity = tuple[int, ...]


def canonical_form(coeffs: Sequence, order: int = 1) -> Form:
    """Scale a nonzero linear form so its first nonzero coordinate is 1."""
    vals = [c.to_order(order) if isinstance(c, CycloScalar) else CycloScalar.rational(c, order)
            for c in coeffs]
    lead = next((c for c in vals if c), None)
    if lead is None:
        raise ValueError("the zero form does not define a hyperplane")
    inv = lead.inverse()
    return tuple(c * inv for c in vals)


def form_key(form: Form) -> tuple:
    return tuple(c.sort_key() for c in form)


@dataclass(frozen=True)
class Hyperplane:
    """ker(alpha) for a canonically normalized form alpha."""

    form: Form

    @classmethod
    def of(cls, coeffs: Sequence, order: int = 1) -> "Hyperplane":
        return cls(canonical_form(coeffs, order))

    @property
    def dim(self) -> int:
        return len(self.form)

    def poly(self, order: int = 1) -> Poly:
        return Poly.linear(self.form, order)

    def sort_key(self) -> tuple:
        return form_key(self.form)

    def __str__(self) -> str:
        return format_form(self.form)


@dataclass(frozen=True)
class Arrangement:
    """An ordered, duplicate-free list of hyperplanes in K^dim, K = Q(zeta_order)."""

    dim: int
    order: int
    hyperplanes: tuple[Hyperplane, ...]

    def __post_init__(self):
        order = 1 if euler_phi(self.order) == 1 else self.order
        object.__setattr__(self, "order", order)
        seen = set()
        for H in self.hyperplanes:
            if H.dim != self.dim:
                raise ValueError(f"hyperplane {H} does not live in dimension {self.dim}")
            if H in seen:
                raise ValueError(f"duplicate hyperplane {H}")
            seen.add(H)

    @classmethod
    def from_forms(cls, dim: int, forms: Iterable[Sequence], order: int = 1,
                   *, dedupe: bool = False) -> "Arrangement":
        hs: list[Hyperplane] = []
        for f in forms:
            H = Hyperplane.of(f, order)
            if dedupe and H in hs:
                continue
            hs.append(H)
        return cls(dim, order, tuple(hs))

    @classmethod
    def empty(cls, dim: int, order: int = 1) -> "Arrangement":
        return cls(dim, order, ())

    def __len__(self) -> int:
        return len(self.hyperplanes)

    def __iter__(self):
        return iter(self.hyperplanes)

    def __contains__(self, H) -> bool:
        return H in self.hyperplanes

    def index(self, H: Hyperplane | int | Sequence) -> int:
        """Position of a hyperplane given as object, index or raw form."""
        if isinstance(H, int):
            if not 0 <= H < len(self.hyperplanes):
                raise ValueError(f"no hyperplane with index {H}")
            return H
        if not isinstance(H, Hyperplane):
            H = Hyperplane.of(H, self.order)
        try:
            return self.hyperplanes.index(H)
        except ValueError:
            raise ValueError(f"hyperplane {H} is not in the arrangement") from None

    @property
    def forms(self) -> list[Form]:
        return [H.form for H in self.hyperplanes]

    def simple(self) -> Multiplicity:
        return (1,) * len(self.hyperplanes)

    def rank(self) -> int:
        if not self.hyperplanes:
            return 0
        return rref(self.forms, self.dim, self.order).rank

    def is_essential(self) -> bool:
        return self.rank() == self.dim

    def defining_polynomial(self, mu: Multiplicity | None = None) -> Poly:
        mu = check_multiplicity(self, mu)
        return poly_product((H.poly(self.order) ** m for H, m in zip(self.hyperplanes, mu)),
                            self.dim, self.order)

    def sorted(self, mu: Multiplicity | None = None):
        """Hyperplanes (and multiplicities) in canonical form order."""
        mu = check_multiplicity(self, mu)
        pairs = sorted(zip(self.hyperplanes, mu), key=lambda p: p[0].sort_key())
        return Arrangement(self.dim, self.order, tuple(H for H, _ in pairs)), tuple(m for _, m in pairs)

    def subarrangement(self, indices: Iterable[int]) -> "Arrangement":
        return Arrangement(self.dim, self.order, tuple(self.hyperplanes[i] for i in indices))

    def __str__(self) -> str:
        return format_arrangement(self)


def check_multiplicity(A: Arrangement, mu: Multiplicity | None) -> Multiplicity:
    if mu is None:
        return A.simple()
    mu = tuple(int(m) for m in mu)
    if len(mu) != len(A):
        raise ValueError(f"multiplicity has {len(mu)} entries for {len(A)} hyperplanes")
    if any(m < 1 for m in mu):
        raise ValueError("multiplicities must be positive")
    return mu


def canonical_key(A: Arrangement, mu: Multiplicity | None = None) -> tuple:
    """Hashable key identifying (A, mu) independently of hyperplane order."""
    mu = check_multiplicity(A, mu)
    items = sorted((H.sort_key(), m) for H, m in zip(A.hyperplanes, mu))
    return (A.dim, A.order, tuple(items))


def drop_zeros(A: Arrangement, mu: Sequence[int]) -> tuple[Arrangement, Multiplicity]:
    """Treat zero multiplicities as deleted hyperplanes."""
    keep = [i for i, m in enumerate(mu) if m > 0]
    return A.subarrangement(keep), tuple(mu[i] for i in keep)


# -- flats -------------------------------------------------------------

@dataclass(frozen=True)
class Flat:
    """X in L(A), stored by the reduced echelon basis of forms vanishing on X."""

    rows: tuple[Form, ...]
    pivots: tuple[int, ...]
    localized: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def key(self) -> tuple:
        return tuple(form_key(r) for r in self.rows)

    def contains_form(self, form: Sequence[CycloScalar]) -> bool:
        """True iff the form vanishes on X, i.e. lies in the row span."""
        return not any(reduce_form(form, self.rows, self.pivots))

    def coordinates(self, dim: int) -> list[int]:
        """Ambient columns used as coordinates on X."""
        piv = set(self.pivots)
        return [c for c in range(dim) if c not in piv]


def reduce_form(form: Sequence[CycloScalar], rows: Sequence[Form], pivots: Sequence[int]) -> list:
    out = list(form)
    for row, p in zip(rows, pivots):
        a = out[p]
        if a:
            for c, v in enumerate(row):
                if v:
                    out[c] = out[c] - a * v
    return out


def span_flat(A: Arrangement, forms: Sequence[Sequence]) -> Flat:
    """The flat cut out by the given forms, with its localization in A."""
    if not forms:
        return Flat((), (), ())
    ech = rref(list(forms), A.dim, A.order)
    zero = CycloScalar.rational(0, A.order)
    rows = tuple(tuple(r.get(c, zero) for c in range(A.dim)) for r in ech.normalized_rows())
    pivots = tuple(ech.pivots)
    loc = tuple(i for i, H in enumerate(A.hyperplanes)
                if not any(reduce_form(H.form, rows, pivots)))
    return Flat(rows, pivots, loc)


def flat_of(A: Arrangement, indices: Iterable[int]) -> Flat:
    """Intersection of the hyperplanes with the given indices."""
    return span_flat(A, [A.hyperplanes[i].form for i in indices])


def intersection_lattice(A: Arrangement, max_rank: int | None = None) -> list[list[Flat]]:
    """Flats of A grouped by rank, each rank listed in discovery order."""
    top = A.rank() if max_rank is None else min(max_rank, A.rank())
    levels: list[list[Flat]] = [[flat_of(A, [])]]
    for r in range(1, top + 1):
        seen: dict[tuple, Flat] = {}
        for X in levels[-1]:
            inside = set(X.localized)
            for i in range(len(A)):
                if i in inside:
                    continue
                Y = span_flat(A, list(X.rows) + [A.hyperplanes[i].form])
                if Y.key not in seen:
                    seen[Y.key] = Y
        levels.append(list(seen.values()))
    return levels


# -- restriction and multiplicities on it ----------------------------

def restrict_form(form: Sequence[CycloScalar], X: Flat, dim: int) -> list[CycloScalar]:
    """Coordinates of form|_X in the free columns of X's echelon basis."""
    red = reduce_form(form, X.rows, X.pivots)
    return [red[c] for c in X.coordinates(dim)]


@dataclass(frozen=True)
class Restriction:
    """A^X together with the fiber map H -> H cap X."""

    arrangement: Arrangement
    flat: Flat
    fiber: tuple[int | None, ...]

    def fibers(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.arrangement.hyperplanes]
        for i, y in enumerate(self.fiber):
            if y is not None:
                out[y].append(i)
        return out


def restriction(A: Arrangement, X: Flat) -> Restriction:
    """A^X in the coordinates of :meth:`Flat.coordinates`."""
    check = span_flat(A, list(X.rows))
    if check.key != X.key or check.localized != X.localized:
        raise ValueError("not a flat of this arrangement")
    dim = A.dim - X.rank
    hs: list[Hyperplane] = []
    where: dict[Hyperplane, int] = {}
    fiber: list[int | None] = []
    inside = set(X.localized)
    for i, H in enumerate(A.hyperplanes):
        if i in inside:
            fiber.append(None)
            continue
        K = Hyperplane.of(restrict_form(H.form, X, A.dim), A.order)
        if K not in where:
            where[K] = len(hs)
            hs.append(K)
        fiber.append(where[K])
    return Restriction(Arrangement(dim, A.order, tuple(hs)), X, tuple(fiber))


def restrict_to(A: Arrangement, H0) -> Restriction:
    """A'' = A^{H0}."""
    return restriction(A, flat_of(A, [A.index(H0)]))


def ziegler_multiplicity(A: Arrangement, H0) -> tuple[Arrangement, Multiplicity]:
    """(A'', kappa) with kappa(Y) = |A_Y| - 1."""
    res = restrict_to(A, H0)
    return res.arrangement, tuple(len(f) for f in res.fibers())


def concentrated_multiplicity(A: Arrangement, H0, m0: int) -> Multiplicity:
    if m0 < 1:
        raise ValueError("m0 must be positive")
    i0 = A.index(H0)
    return tuple(m0 if i == i0 else 1 for i in range(len(A)))


def deletion(A: Arrangement, mu: Multiplicity | None, H0) -> tuple[Arrangement, Multiplicity]:
    mu = check_multiplicity(A, mu)
    i0 = A.index(H0)
    if mu[i0] == 1:
        keep = [i for i in range(len(A)) if i != i0]
        return A.subarrangement(keep), tuple(mu[i] for i in keep)
    return A, tuple(m - 1 if i == i0 else m for i, m in enumerate(mu))


def addition(A: Arrangement, mu: Multiplicity | None, H) -> tuple[Arrangement, Multiplicity]:
    """Inverse of :func:`deletion`: raise mu(H) by one, appending H if new."""
    mu = check_multiplicity(A, mu)
    if not isinstance(H, Hyperplane):
        H = Hyperplane.of(H, A.order)
    if H in A.hyperplanes:
        i0 = A.hyperplanes.index(H)
        return A, tuple(m + 1 if i == i0 else m for i, m in enumerate(mu))
    return Arrangement(A.dim, A.order, A.hyperplanes + (H,)), mu + (1,)


def common_order(a: int, b: int) -> int:
    if a == b or b == 1:
        return a
    if a == 1:
        return b
    raise ValueError("arrangements over different cyclotomic fields")


def product(A1: Arrangement, mu1: Multiplicity | None, A2: Arrangement,
            mu2: Multiplicity | None) -> tuple[Arrangement, Multiplicity]:
    """Block join in dimension dim1 + dim2."""
    mu1 = check_multiplicity(A1, mu1)
    mu2 = check_multiplicity(A2, mu2)
    order = common_order(A1.order, A2.order)
    zero = CycloScalar.rational(0, order)
    hs = [Hyperplane(H.form + (zero,) * A2.dim) for H in A1.hyperplanes]
    hs += [Hyperplane((zero,) * A1.dim + H.form) for H in A2.hyperplanes]
    return Arrangement(A1.dim + A2.dim, order, tuple(hs)), mu1 + mu2


@dataclass(frozen=True)
class Essentialization:
    """Essential model of (A, mu): y_k = rows[k](x), alpha_H = sum_k alpha_H[pivots[k]] y_k."""

    arrangement: Arrangement
    multiplicity: Multiplicity
    rows: tuple[Form, ...]
    pivots: tuple[int, ...]
    ambient_dim: int

    @property
    def center_columns(self) -> list[int]:
        piv = set(self.pivots)
        return [c for c in range(self.ambient_dim) if c not in piv]


def essentialization(A: Arrangement, mu: Multiplicity | None = None) -> Essentialization:
    mu = check_multiplicity(A, mu)
    X = span_flat(A, A.forms)
    hs = tuple(Hyperplane.of([H.form[p] for p in X.pivots], A.order) for H in A.hyperplanes)
    E = Arrangement(X.rank, A.order, hs)
    return Essentialization(E, mu, X.rows, X.pivots, A.dim)


def essentialize(A: Arrangement, mu: Multiplicity | None = None) -> tuple[Arrangement, Multiplicity]:
    e = essentialization(A, mu)
    return e.arrangement, e.multiplicity


def localization(A: Arrangement, mu: Multiplicity | None, X: Flat) -> tuple[Arrangement, Multiplicity]:
    mu = check_multiplicity(A, mu)
    return A.subarrangement(X.localized), tuple(mu[i] for i in X.localized)


def change_coordinates(A: Arrangement, matrix: Sequence[Sequence]) -> Arrangement:
    """Image of A under x -> M x, i.e. forms alpha -> alpha M^{-1} given as row action.

    ``matrix`` is applied to forms on the right: new_form = form * matrix.
    """
    n = A.dim
    mat = [[c if isinstance(c, CycloScalar) else CycloScalar.rational(c, A.order) for c in row]
           for row in matrix]
    zero = CycloScalar.rational(0, A.order)
    hs = []
    for H in A.hyperplanes:
        new = []
        for j in range(n):
            s = zero
            for i in range(n):
                if H.form[i] and mat[i][j]:
                    s = s + H.form[i] * mat[i][j]
            new.append(s)
        hs.append(Hyperplane.of(new, A.order))
    return Arrangement(n, A.order, tuple(hs))


# -- text format -------------------------------------------------------

def format_form(form: Sequence[CycloScalar], names: Sequence[str] | None = None) -> str:
    """Render a linear form as e.g. ``x1 - z*x2``."""
    order = max((c.order for c in form), default=1)
    return format_poly(Poly.linear(list(form), order), names)


def format_arrangement(A: Arrangement, mu: Multiplicity | None = None,
                       comment: str | None = None) -> str:
    mu = check_multiplicity(A, mu)
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"dim {A.dim} cyclo {A.order}")
    for H, m in zip(A.hyperplanes, mu):
        coords = ", ".join(format_scalar(c) for c in H.form)
        lines.append(coords if m == 1 else f"{coords} : {m}")
    return "\n".join(lines) + "\n"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_arrangement(text: str) -> tuple[Arrangement, Multiplicity]:
    """Parse the plain-text arrangement format; see :func:`format_arrangement`."""
    header = None
    forms: list[tuple[int, list[CycloScalar], int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            parts = line.split()
            if len(parts) != 4 or parts[0] != "dim" or parts[2] != "cyclo":
                raise ParseError("expected header 'dim <l> cyclo <r>'", lineno)
            try:
                header = (int(parts[1]), int(parts[3]))
            except ValueError:
                raise ParseError("dimension and order must be integers", lineno) from None
            if header[0] < 0 or header[1] < 1:
                raise ParseError("dimension must be >= 0 and order >= 1", lineno)
            continue
        dim, order = header
        body, _, mult = line.partition(":")
        try:
            m = int(mult) if mult.strip() else 1
        except ValueError:
            raise ParseError(f"bad multiplicity {mult.strip()!r}", lineno) from None
        if m < 0:
            raise ParseError("negative multiplicity", lineno)
        entries = [e for e in body.split(",")]
        if len(entries) != dim:
            raise ParseError(f"expected {dim} coordinates, got {len(entries)}", lineno)
        try:
            coords = [parse_scalar(e, order) for e in entries]
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if not any(coords):
            raise ParseError("zero linear form", lineno)
        forms.append((lineno, coords, m))
    if header is None:
        raise ParseError("missing header 'dim <l> cyclo <r>'")
    dim, order = header
    hs: list[Hyperplane] = []
    mu: list[int] = []
    for lineno, coords, m in forms:
        H = Hyperplane.of(coords, order)
        if H in hs:
            raise ParseError(f"hyperplane {H} listed twice", lineno)
        if m == 0:
            continue
        hs.append(H)
        mu.append(m)
    return Arrangement(dim, order, tuple(hs)), tuple(mu)
