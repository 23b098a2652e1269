import dataclasses
import itertools

import pytest
from hypothesis import given, strategies as st

from multiarr.arrangement import (
    Arrangement, addition, canonical_key, concentrated_multiplicity, deletion, essentialize,
    intersection_lattice, restrict_to, ziegler_multiplicity,
)
from multiarr.catalog import coxeter_arrangement, kappa_restriction, monomial_arrangement
from multiarr.derivations import decide_freeness, euler_restriction, saito_check
from multiarr.induction import (
    AdditionStep, Base, CertificateError, Exhausted, FiltrationCertificate, InductionCertificate,
    NotFound, check_addition_step, check_localization_closure, contains, format_certificate,
    free_filtration_search, leftover, multifreetube_basis, parse_certificate, product_certificate,
    render_table, search_certificate, sorted_exps, trivial_certificate, verify_certificate,
)
from multiarr.arrangement import ParseError

BOOL2 = Arrangement.from_forms(2, [[1, 0], [0, 1]])


def certified(A, mu=None, **kw):
    cert = search_certificate(A, mu, **kw)
    assert isinstance(cert, InductionCertificate), cert
    v = verify_certificate(cert, (A, mu))
    assert v.ok, v.error
    return cert, v


@pytest.fixture(scope="module")
def d4_kappa_cert():
    A, kappa = kappa_restriction(coxeter_arrangement("D", 4), 0)
    return certified(A, kappa)


def test_multiset_helpers():
    assert contains((1, 2, 2, 3), (2, 3))
    assert not contains((1, 2, 3), (2, 2))
    assert leftover((1, 2, 3), (1, 3)) == 2
    assert leftover((1, 2, 3), (4, 1)) is None


def test_braid_search_round_trip():
    A = coxeter_arrangement("A", 4)
    cert, v = certified(A)
    assert v.exponents == (0, 1, 2, 3)
    assert len(cert.steps) + len(cert.base.arrangement) == len(A)


def test_braid_kappa_restriction_search():
    A, kappa = kappa_restriction(coxeter_arrangement("A", 5), [1, -1, 0, 0, 0])
    _, v = certified(A, kappa)
    assert v.exponents == (0, 2, 3, 4)


def test_rank2_input_is_immediate():
    A = Arrangement.from_forms(2, [[1, 0], [0, 1], [1, -1]])
    cert, v = certified(A, (2, 3, 1))
    assert cert.steps == [] and cert.base.kind == "rank2"
    assert v.exponents == (3, 3)


def test_non_free_input_reports_complete_exhaustion():
    from multiarr.catalog import example_kappa2
    out = search_certificate(example_kappa2())
    assert isinstance(out, Exhausted) and out.complete


def test_budget_exhaustion_is_inconclusive():
    out = search_certificate(coxeter_arrangement("B", 3), budget=0)
    assert isinstance(out, Exhausted) and not out.complete


def test_consecutive_exponents_differ_in_one_entry(d4_kappa_cert):
    _, v = d4_kappa_cert
    for chk in v.steps:
        before, after = list(chk.exp_before), list(chk.exp_after)
        diff = [a - b for a, b in zip(sorted(after), sorted(before))]
        assert sum(diff) == 1
        for e in before:
            if e in after:
                after.remove(e)
        assert len(after) == 1


def test_perturbed_certificate_rejected(d4_kappa_cert):
    cert, _ = d4_kappa_cert
    k = len(cert.steps) // 2
    st = cert.steps[k]
    bad_mu = list(st.mu_star)
    bad_mu[0] += 1
    bad = dataclasses.replace(cert, steps=cert.steps[:k] + [dataclasses.replace(st, mu_star=tuple(bad_mu))]
                              + cert.steps[k + 1:])
    v = verify_certificate(bad)
    assert not v.ok and v.failed_step == k + 1
    E = list(st.exp_restriction)
    E[-1] += 1
    bad = dataclasses.replace(cert, steps=cert.steps[:k] + [dataclasses.replace(st, exp_restriction=tuple(E))]
                              + cert.steps[k + 1:])
    assert verify_certificate(bad).failed_step == k + 1


def test_addition_step_inclusion_failure():
    A = Arrangement.from_forms(3, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    step = AdditionStep(A.hyperplanes[0], (1, 1, 1), (1, 1))
    chk, _, mu = check_addition_step(A, A.simple(), (1, 1, 1), step)
    assert chk.exp_after == (1, 1, 2) and mu == (2, 1, 1)
    with pytest.raises(CertificateError):
        # claimed restriction exponents not contained in the deleted side
        check_addition_step(A, A.simple(), (1, 1, 1), AdditionStep(A.hyperplanes[0], (1, 1, 1), (2, 2)))


def test_text_round_trip(d4_kappa_cert):
    cert, _ = d4_kappa_cert
    text = format_certificate(cert)
    again = parse_certificate(text)
    assert format_certificate(again) == text
    assert verify_certificate(again).ok
    table = render_table(again, verify_certificate(again))
    assert len(table.splitlines()) >= len(cert.steps) + 1


def test_certificate_parse_errors():
    with pytest.raises(ParseError) as err:
        parse_certificate("certificate dim 2 cyclo 1\n  base nonsense\n")
    assert err.value.line is not None
    with pytest.raises(ParseError):
        parse_certificate("")


def test_product_certificate():
    c1, v1 = certified(coxeter_arrangement("B", 2), (2, 1, 1, 3))
    c2, v2 = certified(*essentialize(coxeter_arrangement("A", 3)))
    cert = product_certificate(c1, c2)
    v = verify_certificate(cert)
    assert v.ok, v.error
    assert v.exponents == sorted_exps(v1.exponents + v2.exponents)


def test_product_with_phi1():
    c, v = certified(*kappa_restriction(coxeter_arrangement("D", 4), 0))
    phi1 = trivial_certificate(Arrangement.empty(1))
    out = verify_certificate(product_certificate(c, phi1))
    assert out.ok and out.exponents == sorted_exps(v.exponents + (0,))


# -- free filtrations ----------------------------------------------------------

def test_boolean_filtration():
    f = free_filtration_search(BOOL2, (2, 2))
    assert isinstance(f, FiltrationCertificate)
    assert len(f.chain) == 3 and f.chain[0] == (1, 1) and f.chain[-1] == (2, 2)
    assert f.method == "search"


def test_filtration_must_grow_by_one():
    with pytest.raises(ValueError):
        FiltrationCertificate(BOOL2, [(1, 1), (2, 2)], [(1, 1), (2, 2)])


def test_filtration_not_found_for_non_free_simple():
    from multiarr.catalog import example_kappa2
    out = free_filtration_search(example_kappa2())
    assert isinstance(out, NotFound)


@pytest.mark.parametrize("H", [[1, 0, 0], [1, -1, 0]])
def test_tube_filtration_monomial(H):
    B, kappa = ziegler_multiplicity(monomial_arrangement(3, 1, 3), H)
    tube = free_filtration_search(B, kappa)
    plain = free_filtration_search(B, kappa, use_tube=False)
    assert tube.method == "tube" and plain.method == "search"
    assert len(tube.chain) == len(plain.chain) == sum(kappa) - len(B) + 1
    for nu, E in zip(tube.chain, tube.exponents):
        assert decide_freeness(B, nu).exponents == E


def test_multifreetube_basis_boolean():
    # (3,3) on the Boolean arrangement misses the tube hypotheses
    x = decide_freeness(BOOL2, (3, 3)).basis
    with pytest.raises(ValueError):
        multifreetube_basis(x, BOOL2, (3, 3), (2, 2))
    assert saito_check(decide_freeness(BOOL2, (2, 2)).basis, BOOL2, (2, 2))


def test_multifreetube_basis_monomial():
    B, kappa = ziegler_multiplicity(monomial_arrangement(3, 1, 3), [1, 0, 0])
    basis = sorted(decide_freeness(B, kappa).basis, key=lambda th: -th.degree)
    assert multifreetube_basis(basis, B, kappa, kappa)[0].degree == basis[0].degree
    for nu in itertools.product(*[range(1, k + 1) for k in kappa]):
        out = multifreetube_basis(basis, B, kappa, nu)
        assert saito_check(out, B, nu)
        assert sorted(th.degree for th in out) == sorted([4, 1 + sum(nu) - len(B)])


# -- localizations ----------------------------------------------------------------

def test_localization_closure_braid():
    A = coxeter_arrangement("A", 3)
    cert, _ = certified(A)
    assert check_localization_closure(cert, None) is cert
    for X in intersection_lattice(A, max_rank=2)[2]:
        out = check_localization_closure(cert, X)
        assert isinstance(out, InductionCertificate)


def test_localization_closure_d4_kappa(d4_kappa_cert):
    cert, _ = d4_kappa_cert
    A, _ = cert.target()
    for level in intersection_lattice(A)[1:]:
        for X in level:
            out = check_localization_closure(cert, X)
            assert isinstance(out, InductionCertificate)


def test_localization_closure_d4_simple():
    A = coxeter_arrangement("D", 4)
    cert, _ = certified(A)
    for X in intersection_lattice(A, max_rank=3)[3]:
        assert isinstance(check_localization_closure(cert, X), InductionCertificate)


# -- concentrated multiplicities ------------------------------------------------------

@pytest.mark.parametrize("A", [essentialize(coxeter_arrangement("A", 3))[0],
                               coxeter_arrangement("B", 3)])
def test_indfree_delta(A):
    certified(A)
    for i0 in range(len(A)):
        certified(*ziegler_multiplicity(A, i0))
        for m0 in (2, 3):
            delta = concentrated_multiplicity(A, i0, m0)
            _, v = certified(A, delta)
            exps = list(decide_freeness(A).exponents)
            exps.remove(1)
            assert v.exponents == sorted_exps(exps + [m0])


# -- addition-deletion consistency -----------------------------------------------------

@st.composite
def triples(draw):
    forms = draw(st.lists(st.tuples(*[st.integers(-2, 2)] * 3).filter(any), min_size=3, max_size=5))
    A = Arrangement.from_forms(3, forms, dedupe=True)
    mu = tuple(draw(st.integers(1, 3)) for _ in A.hyperplanes)
    return A, mu, draw(st.integers(0, len(A) - 1))


@given(triples())
def test_addition_deletion_consistency(t):
    A, mu, i0 = t
    full = decide_freeness(A, mu)
    Ad, mud = deletion(A, mu, i0)
    dele = decide_freeness(Ad, mud)
    B, star = euler_restriction(A, mu, i0)
    rest = decide_freeness(B, star)
    assert rest.free  # rank two
    F = rest.exponents
    if full.free and dele.free:
        c = leftover(dele.exponents, F)
        assert c is not None
        assert full.exponents == sorted_exps(F + (c + 1,))
    if dele.free and leftover(dele.exponents, F) is not None:
        c = leftover(dele.exponents, F)
        assert full.free and full.exponents == sorted_exps(F + (c + 1,))
    if full.free and leftover(full.exponents, F) not in (None, 0):
        c = leftover(full.exponents, F)
        assert dele.free and dele.exponents == sorted_exps(F + (c - 1,))
