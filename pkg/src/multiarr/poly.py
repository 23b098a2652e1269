"""Sparse multivariate polynomials over Q(zeta_r)."""

from __future__ import annotations

import re
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

from .scalars import CycloScalar, format_scalar


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent vectors of total degree ``degree``, in descending lex (graded-lex) order."""
    if nvars == 0:
        return ((),) if degree == 0 else ()
    if nvars == 1:
        return ((degree,),)
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials(nvars - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(nvars: int, degree: int) -> dict:
    return {m: i for i, m in enumerate(monomials(nvars, degree))}


def count_monomials(nvars: int, degree: int) -> int:
    if degree < 0:
        return 0
    return comb(degree + nvars - 1, nvars - 1) if nvars else int(degree == 0)


class Poly:
    """Polynomial as a map from exponent tuples to nonzero scalars."""

    __slots__ = ("nvars", "order", "terms")

    def __init__(self, nvars: int, order: int = 1, terms: dict | None = None):
        self.nvars = nvars
        self.order = order
        if terms:
            self.terms = {e: c for e, c in terms.items() if c}
        else:
            self.terms = {}

    @classmethod
    def _raw(cls, nvars, order, terms) -> "Poly":
        p = cls.__new__(cls)
        p.nvars = nvars
        p.order = order
        p.terms = terms
        return p

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int, order: int = 1) -> "Poly":
        return cls._raw(nvars, order, {})

    @classmethod
    def constant(cls, c, nvars: int, order: int = 1) -> "Poly":
        c = _scalar(c, order)
        return cls._raw(nvars, order, {(0,) * nvars: c} if c else {})

    @classmethod
    def one(cls, nvars: int, order: int = 1) -> "Poly":
        return cls.constant(1, nvars, order)

    @classmethod
    def var(cls, i: int, nvars: int, order: int = 1) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls._raw(nvars, order, {tuple(e): CycloScalar.rational(1, order)})

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff=1, order: int = 1) -> "Poly":
        return cls(len(exps), order, {tuple(exps): _scalar(coeff, order)})

    @classmethod
    def linear(cls, coeffs: Sequence, order: int = 1) -> "Poly":
        """The linear form sum_i coeffs[i] * x_i."""
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            c = _scalar(c, order)
            if c:
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = c
        return cls._raw(n, order, terms)

    # -- inspection ---------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def coefficient(self, exps: Sequence[int]) -> CycloScalar:
        return self.terms.get(tuple(exps), CycloScalar.rational(0, self.order))

    def leading_term(self) -> tuple[tuple[int, ...], CycloScalar]:
        e = max(self.terms, key=lambda t: (sum(t), t))
        return e, self.terms[e]

    # -- arithmetic ---------------------------------------------------
    def _check(self, other: "Poly") -> int:
        if other.nvars != self.nvars:
            raise ValueError("polynomials live in different rings")
        if self.order == other.order:
            return self.order
        if self.order == 1:
            return other.order
        if other.order == 1:
            return self.order
        raise ValueError("polynomials over different cyclotomic fields")

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(other, self.nvars, self.order)
        order = self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            v = terms.get(e)
            if v is None:
                terms[e] = c
            else:
                v = v + c
                if v:
                    terms[e] = v
                else:
                    del terms[e]
        return Poly._raw(self.nvars, order, terms)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.nvars, self.order, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(other, self.nvars, self.order)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = _scalar(c, self.order)
        if not c:
            return Poly.zero(self.nvars, self.order)
        order = c.order if self.order == 1 else self.order
        return Poly._raw(self.nvars, order, {e: v * c for e, v in self.terms.items()})

    def shift(self, exps: Sequence[int], c=None) -> "Poly":
        """Multiply by the monomial ``c * x^exps``."""
        terms = {}
        for e, v in self.terms.items():
            terms[tuple(a + b for a, b in zip(e, exps))] = v if c is None else v * c
        return Poly._raw(self.nvars, self.order, terms)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        order = self._check(other)
        if len(self.terms) < len(other.terms):
            a, b = self, other
        else:
            a, b = other, self
        terms: dict = {}
        for ea, ca in a.terms.items():
            for eb, cb in b.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                p = ca * cb
                v = terms.get(e)
                terms[e] = p if v is None else v + p
        return Poly(self.nvars, order, terms)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        acc = Poly.one(self.nvars, self.order)
        base = self
        while k:
            if k & 1:
                acc = acc * base
            k >>= 1
            if k:
                base = base * base
        return acc

    def derivative(self, i: int) -> "Poly":
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                terms[tuple(f)] = c * e[i]
        return Poly._raw(self.nvars, self.order, terms)

    def substitute(self, images: Sequence["Poly"]) -> "Poly":
        """Compose with x_i -> images[i] (all images in a common ring)."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target = images[0].nvars if images else 0
        order = self.order
        for im in images:
            if im.order != 1:
                order = im.order
        out = Poly.zero(target, order)
        powers: list[dict] = [{0: Poly.one(target, order)} for _ in images]

        def power(i: int, k: int) -> Poly:
            cache = powers[i]
            if k not in cache:
                cache[k] = power(i, k - 1) * images[i]
            return cache[k]

        for e, c in self.terms.items():
            term = Poly.constant(c, target, order)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def evaluate(self, point: Sequence) -> CycloScalar:
        total = CycloScalar.rational(0, self.order)
        for e, c in self.terms.items():
            t = c
            for x, k in zip(point, e):
                if k:
                    t = t * (x ** k if isinstance(x, CycloScalar) else CycloScalar.rational(x) ** k)
            total = total + t
        return total

    def homogeneous_part(self, degree: int) -> "Poly":
        return Poly._raw(
            self.nvars, self.order, {e: c for e, c in self.terms.items() if sum(e) == degree}
        )

    # -- comparison ---------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            if isinstance(other, (int, CycloScalar)):
                return self == Poly.constant(other, self.nvars, self.order)
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"Poly({self.nvars}, {self})"

    def __str__(self) -> str:
        return format_poly(self)


def _scalar(c, order: int) -> CycloScalar:
    if isinstance(c, CycloScalar):
        return c
    return CycloScalar.rational(c, order)


def _var_names(nvars: int) -> list[str]:
    return [f"x{i + 1}" for i in range(nvars)]


def format_poly(p: Poly, names: Sequence[str] | None = None) -> str:
    """Render in the scalar literal syntax, e.g. ``(1 - z)*x1^2*x2 + x3``."""
    if not p.terms:
        return "0"
    names = names or _var_names(p.nvars)
    pieces = []
    for e in sorted(p.terms, key=lambda t: (-sum(t), tuple(-v for v in t))):
        c = p.terms[e]
        mono = "*".join(
            names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
        )
        cs = format_scalar(c)
        if not mono:
            body = cs
        elif cs == "1":
            body = mono
        elif cs == "-1":
            body = "-" + mono
        elif c.is_rational() or " " not in cs:
            body = f"{cs}*{mono}"
        else:
            body = f"({cs})*{mono}"
        pieces.append(body)
    out = pieces[0]
    for b in pieces[1:]:
        out += " - " + b[1:] if b.startswith("-") else " + " + b
    return out


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unexpected character at {pos} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _PolyParser:
    def __init__(self, text: str, nvars: int, order: int, names: Sequence[str] | None):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0
        self.nvars = nvars
        self.order = order
        self.names = {n: i for i, n in enumerate(names or _var_names(nvars))}

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ValueError(f"malformed polynomial {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> Poly:
        p = self.expr()
        if self.pos != len(self.toks):
            raise ValueError(f"trailing input in polynomial {self.text!r}")
        return p

    def expr(self) -> Poly:
        sign = 1
        if self.peek()[1] in ("+", "-"):
            sign = -1 if self.take()[1] == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = -acc
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Poly:
        acc = self.power()
        while True:
            op = self.peek()[1]
            if op == "*":
                self.take()
                acc = acc * self.power()
            elif op == "/":
                self.take()
                d = self.power()
                if d.degree() > 0 or d.is_zero():
                    raise ValueError(f"division by a non-constant in {self.text!r}")
                acc = acc.scale(d.coefficient((0,) * self.nvars).inverse())
            else:
                return acc

    def power(self) -> Poly:
        if self.peek()[1] == "-":
            self.take()
            return -self.power()
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ValueError(f"bad exponent in {self.text!r}")
            base = base ** int(val)
        return base

    def atom(self) -> Poly:
        kind, val = self.take()
        if kind == "num":
            return Poly.constant(int(val), self.nvars, self.order)
        if kind == "name":
            if val in self.names:
                return Poly.var(self.names[val], self.nvars, self.order)
            if val == "z" or (val == "i" and self.order == 4):
                return Poly.constant(CycloScalar.zeta(self.order), self.nvars, self.order)
            raise ValueError(f"unknown symbol {val!r} in {self.text!r}")
        if val == "(":
            p = self.expr()
            self.take(")")
            return p
        raise ValueError(f"malformed polynomial {self.text!r}")


def parse_poly(text: str, nvars: int, order: int, names: Sequence[str] | None = None) -> Poly:
    """Parse a polynomial expression such as ``(x1 - z*x2)^2*x3 + 3/2*x1^3``.

    Products, integer powers, parentheses and division by constants are
    allowed.  ``z`` is the distinguished root of unity (``i`` when order is 4).
    """
    return _PolyParser(text, nvars, order, names).parse()


# -- linear forms ------------------------------------------------------

def first_nonzero(form: Sequence[CycloScalar]) -> int:
    for i, c in enumerate(form):
        if c:
            return i
    raise ValueError("zero linear form")


def divisible_by_linear_power(p: Poly, alpha: Sequence, m: int) -> bool:
    """True iff alpha^m divides p.

    Substitutes x_k = y_k - sum_{j != k} alpha_j y_j where k is the first
    nonzero coordinate of alpha (scaled to 1), so that alpha becomes y_k, and
    checks that every monomial has y_k-exponent at least m.
    """
    if m <= 0 or p.is_zero():
        return True
    alpha = [_scalar(a, p.order) for a in alpha]
    k = first_nonzero(alpha)
    lead = alpha[k]
    alpha = [a / lead for a in alpha]
    n = p.nvars
    images = [Poly.var(i, n, p.order) for i in range(n)]
    images[k] = Poly.var(k, n, p.order) - Poly.linear(
        [a if j != k else 0 for j, a in enumerate(alpha)], p.order
    )
    q = p.substitute(images)
    return all(e[k] >= m for e in q.terms)


# -- determinants ------------------------------------------------------

def poly_determinant(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Exact determinant by Laplace expansion with memoised minors."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        raise ValueError("empty matrix")
    nvars = rows[0][0].nvars
    order = max((e.order for r in rows for e in r), default=1)
    # minors over the last k rows, keyed by the set of columns used
    minors: dict[tuple[int, ...], Poly] = {(): Poly.one(nvars, order)}
    for depth in range(n - 1, -1, -1):
        k = n - depth
        new: dict[tuple[int, ...], Poly] = {}
        for cols in combinations(range(n), k):
            acc = Poly.zero(nvars, order)
            for pos, c in enumerate(cols):
                entry = rows[depth][c]
                if entry.is_zero():
                    continue
                rest = cols[:pos] + cols[pos + 1 :]
                sub = minors[rest]
                if sub.is_zero():
                    continue
                term = entry * sub
                acc = acc - term if pos % 2 else acc + term
            new[cols] = acc
        minors = new
    return minors[tuple(range(n))]


def product(polys: Iterable[Poly], nvars: int, order: int = 1) -> Poly:
    acc = Poly.one(nvars, order)
    for p in polys:
        acc = acc * p
    return acc
