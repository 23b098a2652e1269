import itertools

import pytest
from hypothesis import given, strategies as st

from multiarr.arrangement import (
    Arrangement, Hyperplane, ParseError, addition, canonical_form, canonical_key,
    concentrated_multiplicity, deletion, essentialization, essentialize, flat_of,
    format_arrangement, intersection_lattice, localization, parse_arrangement, product,
    restrict_to, restriction, span_flat, ziegler_multiplicity,
)
from multiarr.catalog import coxeter_arrangement, monomial_arrangement
from multiarr.derivations import decide_freeness
from multiarr.linalg import rank
from multiarr.poly import parse_poly
from multiarr.scalars import CycloScalar


def boolean(l):
    return Arrangement.from_forms(l, [[1 if j == i else 0 for j in range(l)] for i in range(l)])


@st.composite
def small_arrangements(draw, dim=3, max_size=6):
    forms = draw(st.lists(st.tuples(*[st.integers(-2, 2)] * dim).filter(any),
                          min_size=1, max_size=max_size))
    A = Arrangement.from_forms(dim, forms, dedupe=True)
    mu = tuple(draw(st.integers(1, 3)) for _ in A.hyperplanes)
    return A, mu


def test_hyperplane_equality_up_to_scaling():
    assert Hyperplane.of([2, -2, 0]) == Hyperplane.of([-1, 1, 0])
    z = CycloScalar.zeta(3)
    assert Hyperplane.of([z, 1], 3) == Hyperplane.of([1, z ** 2], 3)
    with pytest.raises(ValueError):
        Hyperplane.of([0, 0])
    with pytest.raises(ValueError):
        Arrangement.from_forms(2, [[1, 1], [2, 2]])


@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3).filter(any))
def test_canonical_form_idempotent(coeffs):
    f = canonical_form(coeffs)
    assert canonical_form(f) == f


def test_boolean_lattice():
    levels = intersection_lattice(boolean(2))
    assert [len(l) for l in levels] == [1, 2, 1]


def test_braid_lattice():
    levels = intersection_lattice(coxeter_arrangement("A", 3))
    assert len(levels) == 3
    assert len(levels[2]) == 1 and len(levels[2][0].localized) == 3


def test_d4_rank2_flats_against_pairwise_intersections():
    A = coxeter_arrangement("D", 4)
    got = {X.key for X in intersection_lattice(A, max_rank=2)[2]}
    pairs = {span_flat(A, [A.hyperplanes[i].form, A.hyperplanes[j].form]).key
             for i, j in itertools.combinations(range(len(A)), 2)}
    assert got == pairs
    flats = intersection_lattice(A, max_rank=2)[2]
    # every pair of hyperplanes meets in exactly one rank-2 flat
    assert sum(len(X.localized) * (len(X.localized) - 1) // 2 for X in flats) == 66
    assert sorted(len(X.localized) for X in flats) == [2] * 18 + [3] * 16


@given(small_arrangements())
def test_lattice_closed_under_intersection(data):
    A, _ = data
    levels = intersection_lattice(A)
    keys = {X.key for level in levels for X in level}
    flats = [X for level in levels[1:] for X in level]
    for X, Y in itertools.combinations(flats[:8], 2):
        assert span_flat(A, list(X.rows) + list(Y.rows)).key in keys


def test_restriction_of_braid_arrangement():
    A = coxeter_arrangement("A", 4)
    res = restrict_to(A, [1, -1, 0, 0])
    assert len(res.arrangement) == 3
    B, _ = essentialize(res.arrangement)
    assert len(B) == 3 and B.rank() == 2
    assert decide_freeness(res.arrangement).exponents == (0, 1, 2)


def test_boolean_restriction():
    res = restrict_to(boolean(2), [1, 0])
    assert len(res.arrangement) == 1 and res.arrangement.dim == 1


def test_ziegler_multiplicity_type_a():
    A = coxeter_arrangement("A", 5)
    B, kappa = ziegler_multiplicity(A, [1, -1, 0, 0, 0])
    # coordinates on ker(x1 - x2) are x2, ..., x5, with x1 = x2
    want = parse_poly("(x1-x2)^2*(x1-x3)^2*(x1-x4)^2*(x2-x3)*(x2-x4)*(x3-x4)", 4, 1)
    assert B.defining_polynomial(kappa) == want or B.defining_polynomial(kappa) == -want
    assert sum(kappa) == len(A) - 1


def test_ziegler_boolean():
    B, kappa = ziegler_multiplicity(boolean(3), [0, 0, 1])
    assert len(B) == 2 and kappa == (1, 1)


@pytest.mark.parametrize("A", [coxeter_arrangement("D", 4), coxeter_arrangement("B", 3),
                               monomial_arrangement(3, 1, 3)])
def test_kappa_fibers_partition(A):
    for i0 in range(len(A)):
        res = restrict_to(A, i0)
        fibers = res.fibers()
        assert sorted(i for f in fibers for i in f) == [i for i in range(len(A)) if i != i0]
        B, kappa = ziegler_multiplicity(A, i0)
        assert sum(kappa) == len(A) - 1
        for f, k in zip(fibers, kappa):
            X = flat_of(A, [i0, f[0]])
            assert len(X.localized) - 1 == k


def test_concentrated_multiplicity():
    A = coxeter_arrangement("A", 3)
    assert concentrated_multiplicity(A, 0, 1) == A.simple()
    d = concentrated_multiplicity(A, 1, 3)
    assert sum(d) == 5 == len(A) + 3 - 1


def test_deletion_examples():
    A = boolean(3)
    B, mu = deletion(A, (1, 2, 3), 0)
    assert len(B) == 2 and mu == (2, 3)
    C, nu = deletion(A, (1, 2, 3), 2)
    assert C is A and nu == (1, 2, 2)
    cur, m = A, (1, 2, 3)
    for _ in range(6):
        cur, m = deletion(cur, m, 0)
    assert len(cur) == 0


@given(small_arrangements())
def test_deletion_then_addition_restores(data):
    A, mu = data
    for i, H in enumerate(A.hyperplanes):
        B, nu = deletion(A, mu, i)
        C, rho = addition(B, nu, H)
        assert canonical_key(C, rho) == canonical_key(A, mu)


def test_product_examples():
    P, mu = product(Arrangement.empty(1), (), Arrangement.empty(1), ())
    assert P.dim == 2 and len(P) == 0
    A = boolean(2)
    Q, nu = product(A, (2, 3), Arrangement.empty(1), ())
    assert Q.dim == 3 and nu == (2, 3)
    assert decide_freeness(Q, nu).exponents == (0, 2, 3)
    R, rho = product(A, (2, 3), boolean(1), (4,))
    assert decide_freeness(R, rho).exponents == (2, 3, 4)


def test_essentialize_examples():
    A = coxeter_arrangement("A", 3)
    X = intersection_lattice(A)[2][0]
    B, _ = essentialize(*localization(A, None, X))
    assert B.dim == 2 and len(B) == 3
    C, _ = essentialize(Arrangement.from_forms(3, [[1, 0, 0]]))
    assert C.dim == 1 and len(C) == 1


@given(small_arrangements())
def test_essentialize_drops_only_zero_exponents(data):
    A, mu = data
    e = essentialization(A, mu)
    full = decide_freeness(A, mu)
    ess = decide_freeness(e.arrangement, e.multiplicity)
    assert full.free == ess.free
    if full.free:
        assert full.exponents == (0,) * (A.dim - A.rank()) + ess.exponents


def test_localization_examples():
    A = coxeter_arrangement("A", 3)
    assert localization(A, None, flat_of(A, [])) == (A.subarrangement([]), ())
    X = intersection_lattice(A)[2][0]
    assert localization(A, (1, 2, 3), X) == (A, (1, 2, 3))


def test_restriction_localization_commute_for_kappa():
    A = coxeter_arrangement("A", 4)
    for X in intersection_lattice(A, max_rank=2)[2]:
        for i0 in X.localized:
            AX, _ = localization(A, None, X)
            left = ziegler_multiplicity(AX, AX.index(A.hyperplanes[i0]))
            B, kappa = ziegler_multiplicity(A, i0)
            res = restrict_to(A, i0)
            keep = sorted({res.fiber[i] for i in X.localized if i != i0})
            right = (B.subarrangement(keep), tuple(kappa[j] for j in keep))
            assert canonical_key(*left) == canonical_key(*right)


def test_text_round_trip_and_errors():
    A = monomial_arrangement(3, 1, 2)
    mu = tuple(range(1, len(A) + 1))
    text = format_arrangement(A, mu, comment="G(3,1,2)")
    assert parse_arrangement(text) == (A, mu)
    with pytest.raises(ParseError) as err:
        parse_arrangement("dim 2 cyclo 1\n1, 0\n1, 2, 3\n")
    assert err.value.line == 3
    with pytest.raises(ParseError):
        parse_arrangement("1, 0\n")
    with pytest.raises(ParseError):
        parse_arrangement("dim 2 cyclo 1\n0, 0\n")


def test_rank_helper():
    A = coxeter_arrangement("A", 4)
    assert rank(A.forms, A.dim, A.order) == 3 == A.rank()
    assert restriction(A, flat_of(A, [0, 1])).arrangement.dim == 2
