"""Exact row reduction over Q(zeta_r).

Rows are kept projectively as integer coordinate planes (shape ``(phi, n)``)
and reduced fraction-free, dividing every updated row by the gcd of its
integer coordinates.  Row spaces are unaffected by the scalings, so the
reduced rows describe the same space as the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

import numpy as np

from .scalars import CycloScalar, euler_phi, field


def integer_row(entries: Mapping[int, CycloScalar] | Sequence[CycloScalar], ncols: int,
                order: int) -> np.ndarray:
    """Scale a row of scalars to integer planes of shape ``(phi, ncols)``."""
    phi = euler_phi(order)
    items = entries.items() if isinstance(entries, Mapping) else enumerate(entries)
    items = [(c, v if isinstance(v, CycloScalar) else CycloScalar.rational(v, order))
             for c, v in items if v]
    den = 1
    for _, v in items:
        den = den * v.den // math.gcd(den, v.den)
    row = np.zeros((phi, ncols), dtype=object)
    for c, v in items:
        f = den // v.den
        if v.phi == 1 and phi > 1:
            row[0, c] = v.num[0] * f
            continue
        for k, x in enumerate(v.num):
            if x:
                row[k, c] = x * f
    return row


def _mul_tables(order: int, a: np.ndarray) -> np.ndarray:
    """Stack of multiplication matrices: out[t] @ b == a[t] * b in Z[zeta]."""
    fld = field(order)
    phi = fld.phi
    out = np.zeros((a.shape[0], phi, phi), dtype=object)
    for s in range(phi):
        col = a[:, s]
        if not col.any():
            continue
        for u in range(phi):
            rv = fld.red[s + u]
            for k in range(phi):
                if rv[k]:
                    out[:, k, u] += rv[k] * col
    return out


def _primitive(rows: np.ndarray) -> np.ndarray:
    g = np.gcd.reduce(rows.reshape(rows.shape[0], -1), axis=1)
    g[g == 0] = 1
    return rows // g[:, None, None]


@dataclass
class Echelon:
    """Reduced echelon form of a row space.

    ``rows[k]`` has a nonzero pivot at column ``pivots[k]`` and zeros in all
    other pivot columns.
    """

    order: int
    ncols: int
    rows: np.ndarray
    pivots: list[int]
    _inv: list | None = dc_field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def free_columns(self) -> list[int]:
        piv = set(self.pivots)
        return [c for c in range(self.ncols) if c not in piv]

    def entry(self, k: int, c: int) -> CycloScalar:
        return CycloScalar(self.order, tuple(self.rows[k, :, c]))

    def _pivot_inverses(self) -> list[CycloScalar]:
        if self._inv is None:
            self._inv = [self.entry(k, p).inverse() for k, p in enumerate(self.pivots)]
        return self._inv

    def kernel(self) -> list[dict[int, CycloScalar]]:
        """Null space basis, one sparse vector per free column j with v[j] = 1."""
        inv = self._pivot_inverses()
        one = CycloScalar.rational(1, self.order)
        basis = []
        for j in self.free_columns:
            v = {j: one}
            col = self.rows[:, :, j]
            for k, p in enumerate(self.pivots):
                if col[k].any():
                    v[p] = -(CycloScalar(self.order, tuple(col[k])) * inv[k])
            basis.append(v)
        return basis

    def normalized_rows(self) -> list[dict[int, CycloScalar]]:
        """Rows scaled to have pivot entry 1."""
        inv = self._pivot_inverses()
        out = []
        for k in range(self.rank):
            row = {}
            for c in np.nonzero(self.rows[k].any(axis=0))[0]:
                row[int(c)] = self.entry(k, int(c)) * inv[k]
            out.append(row)
        return out


def rref(rows, ncols: int, order: int) -> Echelon:
    """Fraction-free Gauss-Jordan elimination.

    ``rows`` is either an object array of shape ``(m, phi, ncols)`` of integers
    or a sequence of rows of scalars (dense lists or ``{col: scalar}`` maps).
    Pivot columns are taken left to right.
    """
    phi = euler_phi(order)
    if isinstance(rows, np.ndarray):
        M = rows.copy()
    else:
        rows = list(rows)
        M = np.zeros((len(rows), phi, ncols), dtype=object)
        for i, r in enumerate(rows):
            M[i] = integer_row(r, ncols, order)
    if M.shape[0]:
        nonzero = M.reshape(M.shape[0], -1).any(axis=1)
        M = _primitive(M[nonzero])
    m = M.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        colnz = M[:, :, c].any(axis=1)
        cand = np.nonzero(colnz[r:])[0] + r
        if cand.size == 0:
            continue
        if cand.size > 1:
            weight = (M[cand] != 0).reshape(cand.size, -1).sum(axis=1)
            p = int(cand[int(np.argmin(weight))])
        else:
            p = int(cand[0])
        if p != r:
            M[[r, p]] = M[[p, r]]
            colnz[[r, p]] = colnz[[p, r]]
        targets = np.nonzero(colnz)[0]
        targets = targets[targets != r]
        if targets.size:
            prow = M[r]
            piv = M[r, :, c]
            sub = M[targets]
            if phi == 1:
                a = sub[:, 0, c]
                new = sub * piv[0] - a[:, None, None] * prow[None, :, :]
            else:
                cpiv = _mul_tables(order, piv[None, :])[0]
                ca = _mul_tables(order, sub[:, :, c])
                new = np.matmul(cpiv, sub) - np.matmul(ca, prow)
            M[targets] = _primitive(new)
        pivots.append(c)
        r += 1
    return Echelon(order, ncols, M[:len(pivots)], pivots)


def rank(rows, ncols: int, order: int) -> int:
    return rref(rows, ncols, order).rank
