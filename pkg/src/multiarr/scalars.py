"""Exact arithmetic in cyclotomic fields Q(zeta_r).

Elements are stored in the power basis 1, z, ..., z^(phi(r)-1) modulo the
r-th cyclotomic polynomial, as a tuple of integer numerators over a single
positive common denominator.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from numbers import Rational


def _poly_divmod_int(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    # den is monic; coefficient lists are low-degree first
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        q[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    rem = num[: len(den) - 1] or [0]
    return q, rem


@lru_cache(maxsize=None)
def cyclotomic_coefficients(r: int) -> tuple[int, ...]:
    """Integer coefficients (constant term first) of the r-th cyclotomic polynomial."""
    if r < 1:
        raise ValueError("cyclotomic order must be positive")
    num = [-1] + [0] * (r - 1) + [1]
    for d in range(1, r):
        if r % d == 0:
            q, rem = _poly_divmod_int(num, list(cyclotomic_coefficients(d)))
            assert not any(rem)
            num = q
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return tuple(num)


def euler_phi(r: int) -> int:
    return len(cyclotomic_coefficients(r)) - 1


class _Field:
    """Multiplication tables for Z[zeta_r] in the power basis."""

    def __init__(self, r: int):
        self.order = r
        self.phi_poly = cyclotomic_coefficients(r)
        self.phi = len(self.phi_poly) - 1
        n = self.phi
        # reduction of zeta^k for k < max(r, 2n - 1), then periodic mod r
        size = max(r, 2 * n - 1, 1)
        red = []
        for k in range(size):
            if k < n:
                v = [0] * n
                v[k] = 1
            else:
                prev = red[k - 1]
                # multiply by zeta: shift and reduce the overflow with the monic relation
                top = prev[n - 1]
                v = [0] + prev[: n - 1]
                if top:
                    for j in range(n):
                        v[j] -= top * self.phi_poly[j]
            red.append(v)
        self.red = [tuple(v) for v in red]

    def power(self, k: int) -> tuple[int, ...]:
        return self.red[k % self.order] if self.order > 1 else (1,)

    def mul_matrix(self, a: tuple[int, ...]) -> list[list[int]]:
        """Integer matrix C with (a*b)_k = sum_u C[k][u] b_u."""
        n = self.phi
        c = [[0] * n for _ in range(n)]
        for s, av in enumerate(a):
            if not av:
                continue
            for u in range(n):
                rv = self.red[s + u]
                for k in range(n):
                    if rv[k]:
                        c[k][u] += av * rv[k]
        return c

    def mul(self, a, b) -> list[int]:
        n = self.phi
        out = [0] * n
        for s, av in enumerate(a):
            if not av:
                continue
            for u, bv in enumerate(b):
                if not bv:
                    continue
                p = av * bv
                rv = self.red[s + u]
                for k in range(n):
                    if rv[k]:
                        out[k] += p * rv[k]
        return out


@lru_cache(maxsize=None)
def field(r: int) -> _Field:
    return _Field(r)


def _canonical_order(r: int) -> int:
    if r < 1:
        raise ValueError("cyclotomic order must be positive")
    return 1 if euler_phi(r) == 1 else r


class CycloScalar:
    """An element of Q(zeta_r); immutable and hashable."""

    __slots__ = ("order", "num", "den")

    def __init__(self, order: int, num, den: int = 1, *, _normalized: bool = False):
        if _normalized:
            self.order = order
            self.num = num
            self.den = den
            return
        order = _canonical_order(order)
        num = tuple(int(v) for v in num)
        n = euler_phi(order)
        if len(num) != n:
            raise ValueError(f"expected {n} coordinates for order {order}, got {len(num)}")
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num = tuple(-v for v in num)
            den = -den
        g = math.gcd(den, *num)
        if g > 1:
            num = tuple(v // g for v in num)
            den //= g
        self.order = order
        self.num = num
        self.den = den

    # -- constructors -------------------------------------------------
    @classmethod
    def rational(cls, q, order: int = 1) -> "CycloScalar":
        q = Fraction(q)
        order = _canonical_order(order)
        n = euler_phi(order)
        return cls(order, (q.numerator,) + (0,) * (n - 1), q.denominator)

    @classmethod
    def zeta(cls, order: int, k: int = 1) -> "CycloScalar":
        """The k-th power of the distinguished primitive root of unity."""
        if euler_phi(order) == 1:
            return cls.rational(1 if order == 1 or k % 2 == 0 else -1)
        return cls(order, field(order).power(k), 1, _normalized=True)

    def to_order(self, order: int) -> "CycloScalar":
        """The same element viewed in Q(zeta_order); only rationals can move between fields."""
        order = _canonical_order(order)
        if order == self.order:
            return self
        return CycloScalar.rational(self.to_fraction(), order)

    @classmethod
    def from_coeffs(cls, order: int, coeffs) -> "CycloScalar":
        fr = [Fraction(c) for c in coeffs]
        den = 1
        for c in fr:
            den = den * c.denominator // math.gcd(den, c.denominator)
        return cls(order, [c.numerator * (den // c.denominator) for c in fr], den)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self.den) for v in self.num)

    @property
    def phi(self) -> int:
        return len(self.num)

    # -- predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.num)

    def __bool__(self) -> bool:
        return any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self.num[0], self.den)

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "CycloScalar":
        if isinstance(other, CycloScalar):
            if other.order == self.order:
                return other
            if other.phi == 1:
                return CycloScalar.rational(Fraction(other.num[0], other.den), self.order)
            if self.phi == 1:
                raise _Promote(other.order)
            raise ValueError(f"cannot mix Q(zeta_{self.order}) and Q(zeta_{other.order})")
        if isinstance(other, (int, Rational)):
            return CycloScalar.rational(other, self.order)
        return NotImplemented

    def _binary(self, other, op):
        try:
            o = self._coerce(other)
        except _Promote as p:
            return op(CycloScalar.rational(self.to_fraction(), p.order), other)
        if o is NotImplemented:
            return NotImplemented
        return op(self, o)

    @staticmethod
    def _add(a: "CycloScalar", b: "CycloScalar") -> "CycloScalar":
        if a.den == b.den:
            return CycloScalar(a.order, [x + y for x, y in zip(a.num, b.num)], a.den)
        return CycloScalar(
            a.order, [x * b.den + y * a.den for x, y in zip(a.num, b.num)], a.den * b.den
        )

    @staticmethod
    def _mul(a: "CycloScalar", b: "CycloScalar") -> "CycloScalar":
        if a.phi == 1:
            return CycloScalar(a.order, (a.num[0] * b.num[0],), a.den * b.den)
        return CycloScalar(a.order, field(a.order).mul(a.num, b.num), a.den * b.den)

    def __add__(self, other):
        return self._binary(other, CycloScalar._add)

    __radd__ = __add__

    def __neg__(self) -> "CycloScalar":
        return CycloScalar(self.order, tuple(-v for v in self.num), self.den, _normalized=True)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: CycloScalar._add(a, -b))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        return self._binary(other, CycloScalar._mul)

    __rmul__ = __mul__

    def inverse(self) -> "CycloScalar":
        """Multiplicative inverse via the extended Euclidean algorithm modulo Phi_r."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta)")
        if self.phi == 1:
            return CycloScalar(self.order, (self.den,), self.num[0])
        a = _trim([Fraction(v) for v in self.num])
        m = [Fraction(v) for v in field(self.order).phi_poly]
        s = _xgcd_inverse(a, m)
        s = s + [Fraction(0)] * (self.phi - len(s))
        return CycloScalar.from_coeffs(self.order, s) * CycloScalar.rational(self.den, self.order)

    def __truediv__(self, other):
        try:
            o = self._coerce(other)
        except _Promote as p:
            return CycloScalar.rational(self.to_fraction(), p.order) / other
        if o is NotImplemented:
            return NotImplemented
        return CycloScalar._mul(self, o.inverse())

    def __rtruediv__(self, other):
        return CycloScalar.rational(other, self.order) * self.inverse()

    def __pow__(self, k: int) -> "CycloScalar":
        if k < 0:
            return self.inverse() ** (-k)
        acc = CycloScalar.rational(1, self.order)
        base = self
        while k:
            if k & 1:
                acc = acc * base
            base = base * base
            k >>= 1
        return acc

    # -- comparison ---------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, CycloScalar):
            if other.order != self.order:
                return (self.is_rational() and other.is_rational()
                        and self.num[0] == other.num[0] and self.den == other.den)
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Rational)):
            q = Fraction(other)
            return self.is_rational() and self.num[0] == q.numerator and self.den == q.denominator
        return NotImplemented

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(Fraction(self.num[0], self.den))
        return hash((self.order, self.num, self.den))

    def sort_key(self) -> tuple:
        c = list(self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        return tuple(c)

    def __repr__(self) -> str:
        return f"CycloScalar({self.order}, {self})"

    def __str__(self) -> str:
        return format_scalar(self)


class _Promote(Exception):
    def __init__(self, order):
        self.order = order


def _trim(p: list) -> list:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _pdivmod(a: list, b: list) -> tuple[list, list]:
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lead = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] / lead
        q[i] = c
        if c:
            for j, bv in enumerate(b):
                a[i + j] -= c * bv
    return _trim(q), _trim(a[: len(b) - 1] or [Fraction(0)])


def _pmul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _psub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    a = a + [Fraction(0)] * (n - len(a))
    b = b + [Fraction(0)] * (n - len(b))
    return _trim([x - y for x, y in zip(a, b)])


def _xgcd_inverse(a: list, m: list) -> list:
    # invariant: s0*a = r0, s1*a = r1 (mod m)
    r0, r1 = m, a
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while len(r1) > 1 or r1[0] != 0:
        q, rem = _pdivmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, _psub(s0, _pmul(q, s1))
    if len(r0) != 1:
        raise ZeroDivisionError("element is not invertible modulo the cyclotomic polynomial")
    c = r0[0]
    _, s = _pdivmod([v / c for v in s0], m)
    return s


# -- literal syntax ----------------------------------------------------

_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coef>\d+(?:/\d+)?)\s*\*?\s*)?
        (?P<z>z(?:\s*\^\s*(?P<exp>\d+))?)?\s*""",
    re.VERBOSE,
)


def parse_scalar(text: str, order: int) -> CycloScalar:
    """Parse a literal such as ``3/2 - z^2`` or ``-i`` in Q(zeta_order).

    ``i`` is accepted as an alias of ``z`` when the order is 4.
    """
    s = text.strip()
    if order == 4:
        s = re.sub(r"\bi\b", "z", s)
    if not s:
        raise ValueError("empty scalar literal")
    total = CycloScalar.rational(0, order)
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad scalar literal {text!r}")
        sign, coef, z, exp = m.group("sign"), m.group("coef"), m.group("z"), m.group("exp")
        if coef is None and z is None:
            raise ValueError(f"bad scalar literal {text!r}")
        if sign is None and not first:
            raise ValueError(f"bad scalar literal {text!r}")
        c = Fraction(coef) if coef is not None else Fraction(1)
        if sign == "-":
            c = -c
        term = CycloScalar.rational(c, order)
        if z is not None:
            term = term * CycloScalar.zeta(order, int(exp) if exp is not None else 1)
        total = total + term
        pos = m.end()
        first = False
    return total


def format_scalar(a: CycloScalar) -> str:
    parts = []
    for k, c in enumerate(a.coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            zpart = "z" if k == 1 else f"z^{k}"
            body = zpart if mag == 1 else f"{mag}*{zpart}"
        parts.append(("-" if c < 0 else "+", body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def cyclotomic_polynomial(r: int):
    """The r-th cyclotomic polynomial as a univariate :class:`~multiarr.poly.Poly` over Q."""
    from .poly import Poly

    coeffs = cyclotomic_coefficients(r)
    return Poly(1, 1, {(k,): CycloScalar.rational(c) for k, c in enumerate(coeffs) if c})
