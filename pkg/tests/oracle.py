"""Independent sympy-based reference computations used to freeze derived values."""

from __future__ import annotations

import itertools

import sympy as sp

from multiarr.arrangement import Arrangement
from multiarr.poly import Poly
from multiarr.scalars import CycloScalar

Z = sp.Symbol("z")


def scalar_expr(a: CycloScalar, zeta):
    return sum(sp.Rational(c.numerator, c.denominator) * zeta ** k for k, c in enumerate(a.coeffs))


def reduce_cyclo(expr, r: int):
    """Normal form of a polynomial in z modulo the r-th cyclotomic polynomial."""
    phi = sp.cyclotomic_poly(r, Z)
    return sp.Poly(sp.rem(sp.expand(expr), phi, Z), Z)


def scalar_as_poly(a: CycloScalar):
    return sp.Poly(scalar_expr(a, Z), Z)


def poly_expr(p: Poly, xs, zeta):
    return sum(scalar_expr(c, zeta) * sp.Mul(*[x ** e for x, e in zip(xs, exps)])
               for exps, c in p.terms.items())


def _monomials(n: int, d: int):
    for c in itertools.combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in c:
            e[i] += 1
        yield tuple(e)


def graded_piece_dimension(A: Arrangement, mu, d: int) -> int:
    """dim D(A, mu)_d by a dense linear solve in sympy (rational arrangements only)."""
    n = A.dim
    xs = sp.symbols(f"x1:{n + 1}")
    mons = list(_monomials(n, d))
    unknowns = sp.symbols(f"c0:{n * len(mons)}")
    fs = []
    for i in range(n):
        fs.append(sum(unknowns[i * len(mons) + j] * sp.Mul(*[x ** e for x, e in zip(xs, m)])
                      for j, m in enumerate(mons)))
    eqs = []
    for H, m in zip(A.hyperplanes, mu):
        form = [sp.Rational(c.to_fraction().numerator, c.to_fraction().denominator) for c in H.form]
        alpha = sum(c * x for c, x in zip(form, xs))
        theta_alpha = sp.expand(sum(c * f for c, f in zip(form, fs)))
        k = next(i for i, c in enumerate(form) if c != 0)
        # alpha^m | g  iff  g vanishes to order m along alpha = 0
        solve_k = sp.solve(alpha, xs[k])[0]
        for j in range(m):
            g = sp.diff(theta_alpha, xs[k], j) if j else theta_alpha
            g = sp.expand(g.subs(xs[k], solve_k))
            eqs.extend(sp.Poly(g, *xs).coeffs() if g != 0 else [])
    if not eqs:
        return len(unknowns)
    M = sp.Matrix([[sp.diff(e, u) for u in unknowns] for e in eqs])
    return len(unknowns) - M.rank()


def determinant_terms(rows, nvars: int, order: int) -> dict:
    """Determinant via sympy; maps exponent tuples to coefficients reduced mod Phi_order."""
    xs = sp.symbols(f"x1:{nvars + 1}")
    M = sp.Matrix([[poly_expr(p, xs, Z) for p in row] for row in rows])
    det = sp.Poly(sp.expand(M.det(method="berkowitz")), *xs)
    out = {}
    for exps, c in det.terms():
        red = reduce_cyclo(c, order)
        if not red.is_zero:
            out[exps] = red
    return out


def terms_of(p: Poly, order: int) -> dict:
    return {e: reduce_cyclo(scalar_expr(c, Z), order) for e, c in p.terms.items()}
