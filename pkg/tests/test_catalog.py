import itertools

import pytest

from multiarr.arrangement import canonical_key, change_coordinates, essentialize, ziegler_multiplicity
from multiarr.catalog import (
    EXAMPLE_KAPPA2_PIVOT, coxeter_arrangement, coxeter_exponents, d_kappa_exponents,
    d_kappa_restriction, e8_arrangement, example_kappa2, g29_restricted_kappa, get_entry,
    grr_exponents, list_families, monomial_arrangement, monomial_exponents,
    restriction_class_arrangement,
)
from multiarr.derivations import decide_freeness
from multiarr.induction import InductionCertificate, search_certificate, verify_certificate
from multiarr.scalars import CycloScalar


def test_coxeter_counts():
    assert len(coxeter_arrangement("A", 4)) == 6
    assert len(coxeter_arrangement("B", 3)) == 9
    assert len(coxeter_arrangement("D", 4)) == 12
    with pytest.raises(ValueError):
        coxeter_arrangement("D", 2)
    with pytest.raises(ValueError):
        coxeter_arrangement("Q", 3)


def test_d3_is_a3():
    D3, _ = essentialize(coxeter_arrangement("D", 3))
    A3, _ = essentialize(coxeter_arrangement("A", 4))
    assert len(D3) == len(A3) == 6
    assert decide_freeness(D3).exponents == decide_freeness(A3).exponents == (1, 2, 3)


@pytest.mark.parametrize("kind,l", [("A", 3), ("A", 4), ("B", 2), ("B", 3), ("D", 4)])
def test_coxeter_exponents_recomputed(kind, l):
    A = coxeter_arrangement(kind, l)
    res = decide_freeness(A)
    assert res.exponents == coxeter_exponents(kind, l)
    assert sum(res.exponents) == len(A)


@pytest.mark.parametrize("r,l", [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)])
def test_monomial_counts_and_exponents(r, l):
    A = monomial_arrangement(r, 1, l)
    assert len(A) == l + r * l * (l - 1) // 2
    assert decide_freeness(A).exponents == monomial_exponents(r, l)
    G = monomial_arrangement(r, r, l)
    assert len(G) == r * l * (l - 1) // 2


def test_grr4_exponents():
    assert grr_exponents(3, 4) == (1, 4, 6, 7)
    assert decide_freeness(monomial_arrangement(3, 3, 4)).exponents == (1, 4, 6, 7)
    with pytest.raises(ValueError):
        monomial_arrangement(3, 2, 3)


def test_restriction_class():
    A = restriction_class_arrangement(1, 3, 3)
    assert len(A) == 1 + 3 * 3
    assert decide_freeness(A).exponents == (1, 4, 5)
    assert canonical_key(restriction_class_arrangement(0, 3, 3)) == canonical_key(monomial_arrangement(3, 3, 3))
    with pytest.raises(ValueError):
        restriction_class_arrangement(4, 3, 2)


@pytest.mark.parametrize("l", [4, 5])
def test_d_kappa_restriction(l):
    A, kappa = d_kappa_restriction(l)
    assert canonical_key(A) == canonical_key(restriction_class_arrangement(1, l - 1, 2))
    assert sum(kappa) == len(coxeter_arrangement("D", l)) - 1
    assert decide_freeness(A, kappa).exponents == d_kappa_exponents(l)
    exps = list(coxeter_exponents("D", l))
    exps.remove(1)
    assert d_kappa_exponents(l) == tuple(exps)


def test_g29_data():
    A, kappa = g29_restricted_kappa()
    assert len(A) == 21 and sum(kappa) == 39
    assert A.order == 4
    assert kappa[A.index([1, 0, 0])] == 3
    assert decide_freeness(A).exponents == (1, 9, 11)


def test_example_kappa2():
    A = example_kappa2()
    assert len(A) == 8
    assert not decide_freeness(A).free
    B, kappa = ziegler_multiplicity(A, EXAMPLE_KAPPA2_PIVOT)
    assert not decide_freeness(B, kappa).free
    cert = search_certificate(B)
    assert isinstance(cert, InductionCertificate) and verify_certificate(cert, (B, None)).ok


def test_e8_count():
    A = e8_arrangement()
    assert len(A) == 120 and A.rank() == 8
    assert get_entry("E8").published["C_kappa"] == (7, 11, 13, 17, 19, 23)


def _restriction_matches(r, l):
    A = monomial_arrangement(r, 1, l)
    small = monomial_arrangement(r, 1, l - 1)
    want = canonical_key(small)
    for i in range(len(A)):
        B, _ = ziegler_multiplicity(A, i)
        if canonical_key(B) == want:
            continue
        # otherwise look for a coordinate change among monomial matrices
        z = CycloScalar.zeta(r)
        found = False
        n = l - 1
        for perm in itertools.permutations(range(n)):
            for pw in itertools.product(range(r), repeat=n):
                M = [[z ** pw[j] if perm[j] == k else 0 for k in range(n)] for j in range(n)]
                if canonical_key(change_coordinates(B, M)) == want:
                    found = True
                    break
            if found:
                break
        if not found:
            return False
    return True


@pytest.mark.parametrize("r,l", [(2, 3), (3, 3)])
def test_monomial_restrictions(r, l):
    assert _restriction_matches(r, l)


def test_registry():
    names = [n for n, _, _ in list_families()]
    for name in ("A", "B", "D", "G1", "Grr", "Akp", "g29-kappa", "kappa2", "E8"):
        assert name in names
    e = get_entry("G1", 3, 3)
    assert e.exponents == (1, 4, 7)
    assert get_entry("Akp", 1, 3, 3).published["exponents"] == (1, 4, 5)
    assert sum(get_entry("D", 4).exponents) == 12
    with pytest.raises(KeyError):
        get_entry("nope")
    with pytest.raises(ValueError):
        get_entry("A")
