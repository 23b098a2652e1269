"""Inductive freeness: addition steps, certificates, search and free filtrations."""

from __future__ import annotations

import itertools
import sys
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Sequence

from .arrangement import (
    Arrangement,
    Flat,
    Hyperplane,
    Multiplicity,
    ParseError,
    addition,
    canonical_key,
    check_multiplicity,
    deletion,
    format_form,
    localization,
    parse_arrangement,
    product,
    span_flat,
)
from .derivations import (
    Derivation,
    decide_freeness,
    euler_derivation,
    euler_restriction_detail,
    saito_check,
)
from .poly import Poly, parse_poly
from .scalars import CycloScalar, format_scalar

Exps = tuple[int, ...]


def sorted_exps(values) -> Exps:
    return tuple(sorted(int(v) for v in values))


def contains(E: Sequence[int], F: Sequence[int]) -> bool:
    """Multiset inclusion F subset of E."""
    return not (Counter(F) - Counter(E))


def leftover(E: Sequence[int], F: Sequence[int]) -> int | None:
    """The single element of E - F when F is a sub-multiset of size |E| - 1."""
    if len(F) != len(E) - 1 or not contains(E, F):
        return None
    (c,) = list((Counter(E) - Counter(F)).elements())
    return c


def format_exps(E: Sequence[int]) -> str:
    return "{" + ", ".join(str(e) for e in E) + "}"


def format_tuple(t: Sequence[int]) -> str:
    return "(" + ", ".join(str(v) for v in t) + ")"


class CertificateError(Exception):
    """A certificate failed verification; carries the failing step if any."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(f"step {step}: {message}" if step is not None else message)


# -- data --------------------------------------------------------------

BASE_KINDS = ("empty", "rank2", "declared", "certified", "product")


@dataclass
class Base:
    """Starting multiarrangement of a certificate and why it is inductively free.

    empty: Phi_l.  rank2: rank at most two.  declared: assumed inductively
    free (its freeness and exponents are still checked).  certified: a nested
    certificate reaching it.  product: the product of two certified factors.
    """

    kind: str
    arrangement: Arrangement
    multiplicity: Multiplicity
    exponents: Exps
    children: list["InductionCertificate"] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in BASE_KINDS:
            raise ValueError(f"unknown base kind {self.kind!r}")
        self.multiplicity = check_multiplicity(self.arrangement, self.multiplicity)
        self.exponents = sorted_exps(self.exponents)


@dataclass
class AdditionStep:
    """Raise the multiplicity of one hyperplane by one."""

    hyperplane: Hyperplane
    exp_before: Exps
    exp_restriction: Exps
    mu_star: tuple[int, ...] | None = None
    sub: "InductionCertificate | None" = None

    def __post_init__(self):
        self.exp_before = sorted_exps(self.exp_before)
        self.exp_restriction = sorted_exps(self.exp_restriction)

    @property
    def exp_after(self) -> Exps | None:
        c = leftover(self.exp_before, self.exp_restriction)
        return None if c is None else sorted_exps(self.exp_restriction + (c + 1,))


@dataclass
class InductionCertificate:
    dim: int
    order: int
    base: Base
    steps: list[AdditionStep] = field(default_factory=list)
    exponents: Exps | None = None

    def states(self) -> Iterator[tuple[Arrangement, Multiplicity]]:
        """(A, mu) before the first step, then after every step."""
        A, mu = self.base.arrangement, self.base.multiplicity
        yield A, mu
        for st in self.steps:
            A, mu = addition(A, mu, st.hyperplane)
            yield A, mu

    def target(self) -> tuple[Arrangement, Multiplicity]:
        *_, last = self.states()
        return last

    def claimed_exponents(self) -> Exps:
        if self.exponents is not None:
            return self.exponents
        if self.steps:
            after = self.steps[-1].exp_after
            if after is not None:
                return after
        return self.base.exponents

    def depth(self) -> int:
        subs = [st.sub.depth() for st in self.steps if st.sub is not None]
        subs += [c.depth() for c in self.base.children]
        return 1 + max(subs, default=0)


# -- verification ------------------------------------------------------

@dataclass
class StepCheck:
    index: int
    hyperplane: Hyperplane
    exp_before: Exps
    exp_restriction: Exps
    exp_after: Exps
    mu_star: tuple[int, ...]
    rules: tuple[str, ...]
    restriction_rank: int


@dataclass
class Verification:
    ok: bool
    exponents: Exps | None
    steps: list[StepCheck]
    assumptions: list[str]
    error: str | None = None
    failed_step: int | None = None


def _restriction_exponents(A2: Arrangement, mu2: Multiplicity, sub, step_index: int,
                           assumptions: list[str], check_mu_star: bool) -> Exps:
    rank = A2.rank()
    if sub is not None:
        v = verify_certificate(sub, (A2, mu2), check_mu_star=check_mu_star)
        if not v.ok:
            raise CertificateError(f"restriction certificate rejected: {v.error}", step_index)
        assumptions.extend(v.assumptions)
        return v.exponents
    if rank > 2:
        raise CertificateError(f"restriction has rank {rank} but no sub-certificate", step_index)
    res = decide_freeness(A2, mu2)
    if not res.free:  # pragma: no cover - rank-2 multiarrangements are free
        raise CertificateError("rank-2 restriction reported non-free", step_index)
    return res.exponents


def check_addition_step(A: Arrangement, mu: Multiplicity, exp_before: Exps, step: AdditionStep,
                        index: int = 0, *, check_mu_star: bool = True,
                        assumptions: list[str] | None = None) -> tuple[StepCheck, Arrangement, Multiplicity]:
    """Check one addition step starting from a certified (A, mu) with exponents exp_before.

    Returns the recomputed step data and the new state; raises
    CertificateError on any mismatch.
    """
    assumptions = assumptions if assumptions is not None else []
    if step.exp_before != sorted_exps(exp_before):
        raise CertificateError(f"claimed exp_before {format_exps(step.exp_before)} but the "
                               f"certified state has {format_exps(exp_before)}", index)
    if step.hyperplane.dim != A.dim:
        raise CertificateError("hyperplane in the wrong dimension", index)
    A1, mu1 = addition(A, mu, step.hyperplane)
    er = euler_restriction_detail(A1, mu1, step.hyperplane)
    if check_mu_star and step.mu_star is not None and tuple(step.mu_star) != er.multiplicity:
        raise CertificateError(f"claimed mu_star {format_tuple(step.mu_star)} but recomputed "
                               f"{format_tuple(er.multiplicity)}", index)
    F = _restriction_exponents(er.arrangement, er.multiplicity, step.sub, index, assumptions,
                               check_mu_star)
    if step.exp_restriction != F:
        raise CertificateError(f"claimed exp_restriction {format_exps(step.exp_restriction)} but "
                               f"recomputed {format_exps(F)}", index)
    c = leftover(exp_before, F)
    if c is None:
        raise CertificateError(f"exp(A'', mu*) = {format_exps(F)} is not contained in "
                               f"exp(A', mu') = {format_exps(exp_before)}", index)
    after = sorted_exps(F + (c + 1,))
    chk = StepCheck(index, step.hyperplane, sorted_exps(exp_before), F, after, er.multiplicity,
                    tuple(v.rule for v in er.values), er.arrangement.rank())
    return chk, A1, mu1


def _verify_base(base: Base, dim: int, check_mu_star: bool, assumptions: list[str]) -> None:
    A, mu, E = base.arrangement, base.multiplicity, base.exponents
    if A.dim != dim:
        raise CertificateError("base lives in the wrong dimension")
    if len(E) != dim:
        raise CertificateError(f"base exponents {format_exps(E)} do not have {dim} entries")
    if base.kind == "empty":
        if len(A):
            raise CertificateError("base declared empty but has hyperplanes")
        if any(E):
            raise CertificateError("empty base must have zero exponents")
        return
    if base.kind == "rank2":
        if A.rank() > 2:
            raise CertificateError(f"base declared rank <= 2 but has rank {A.rank()}")
        res = decide_freeness(A, mu)
        if res.exponents != E:
            raise CertificateError(f"base exponents {format_exps(E)} but computed "
                                   f"{format_exps(res.exponents)}")
        return
    if base.kind == "declared":
        res = decide_freeness(A, mu)
        if not res.free or res.exponents != E:
            got = format_exps(res.exponents) if res.free else "NonFree"
            raise CertificateError(f"declared base exponents {format_exps(E)} but computed {got}")
        assumptions.append(f"base with exponents {format_exps(E)} assumed inductively free")
        return
    if base.kind == "certified":
        if len(base.children) != 1:
            raise CertificateError("certified base needs exactly one nested certificate")
        v = verify_certificate(base.children[0], (A, mu), check_mu_star=check_mu_star)
        if not v.ok:
            raise CertificateError(f"base certificate rejected: {v.error}")
        if v.exponents != E:
            raise CertificateError("base exponents disagree with its certificate")
        assumptions.extend(v.assumptions)
        return
    if base.kind == "product":
        if len(base.children) != 2:
            raise CertificateError("product base needs two factor certificates")
        c1, c2 = base.children
        v1 = verify_certificate(c1, check_mu_star=check_mu_star)
        v2 = verify_certificate(c2, check_mu_star=check_mu_star)
        for v in (v1, v2):
            if not v.ok:
                raise CertificateError(f"product factor rejected: {v.error}")
            assumptions.extend(v.assumptions)
        P, pm = product(*c1.target(), *c2.target())
        if canonical_key(P, pm) != canonical_key(A, mu):
            raise CertificateError("product base is not the product of its factors")
        if sorted_exps(v1.exponents + v2.exponents) != E:
            raise CertificateError("product base exponents are not the union of the factors'")
        return


def verify_certificate(cert: InductionCertificate,
                       target: tuple[Arrangement, Multiplicity | None] | None = None,
                       *, check_mu_star: bool = True) -> Verification:
    """Replay a certificate, recomputing every restriction and exponent."""
    assumptions: list[str] = []
    checks: list[StepCheck] = []
    try:
        _verify_base(cert.base, cert.dim, check_mu_star, assumptions)
        A, mu, E = cert.base.arrangement, cert.base.multiplicity, cert.base.exponents
        for i, st in enumerate(cert.steps, start=1):
            chk, A, mu = check_addition_step(A, mu, E, st, i, check_mu_star=check_mu_star,
                                             assumptions=assumptions)
            checks.append(chk)
            E = chk.exp_after
        if cert.exponents is not None and cert.exponents != E:
            raise CertificateError(f"claimed final exponents {format_exps(cert.exponents)} but "
                                   f"forced {format_exps(E)}")
        if target is not None:
            TA, tmu = target
            if canonical_key(TA, check_multiplicity(TA, tmu)) != canonical_key(A, mu):
                raise CertificateError("certificate does not end at the target multiarrangement")
    except CertificateError as exc:
        return Verification(False, None, checks, assumptions, str(exc), exc.step)
    return Verification(True, E, checks, assumptions)


# -- search ------------------------------------------------------------

class _BudgetExceeded(Exception):
    pass


@dataclass
class SearchStats:
    nodes: int = 0
    failed_states: int = 0
    max_depth: int = 0
    restriction_searches: int = 0


@dataclass
class Exhausted:
    """No certificate found.  Only ``complete`` results prove non-inductive-freeness."""

    complete: bool
    stats: SearchStats
    reason: str


class _Search:
    def __init__(self, budget: int | None, heuristic: bool, progress: Callable | None):
        self.budget = budget
        self.heuristic = heuristic
        self.progress = progress
        self.failed: set = set()
        self.found: dict = {}
        self.stats = SearchStats()
        self.lock = threading.Lock()

    def tick(self, depth: int):
        with self.lock:
            self.stats.nodes += 1
            self.stats.max_depth = max(self.stats.max_depth, depth)
            n = self.stats.nodes
        if self.budget is not None and n > self.budget:
            raise _BudgetExceeded
        if self.progress is not None and n % 200 == 0:
            self.progress(self.stats)

    def mark_failed(self, key):
        with self.lock:
            if key not in self.failed:
                self.failed.add(key)
                self.stats.failed_states += 1

    def candidates(self, A: Arrangement, mu: Multiplicity, E: Exps):
        """Admissible pivots at (A, mu): (index, restriction, F, E')."""
        order = sorted(range(len(A)), key=lambda i: A.hyperplanes[i].sort_key())
        out = []
        for i in order:
            er = euler_restriction_detail(A, mu, i)
            res = decide_freeness(er.arrangement, er.multiplicity)
            if not res.free:
                continue
            F = res.exponents
            b = leftover(E, F)
            if b is None or b == 0:
                continue
            out.append((i, er, F, sorted_exps(F + (b - 1,)), b))
        if self.heuristic:
            out.sort(key=lambda c: -c[4])
        return out

    def certify(self, A: Arrangement, mu: Multiplicity, E: Exps,
                depth: int = 0) -> InductionCertificate | None:
        key = canonical_key(A, mu)
        if key in self.found:
            return self.found[key]
        # work in canonical hyperplane order so memoized results do not depend on
        # which branch reached this state first
        A, mu = A.sorted(mu)
        steps = self.descend(A, mu, E, depth)
        if steps is None:
            return None
        base, rev = steps
        cert = annotate(InductionCertificate(A.dim, A.order, base, rev, E))
        self.found[key] = cert
        return cert

    def descend(self, A, mu, E, depth):
        """Base and addition steps leading up to (A, mu), or None."""
        if len(A) == 0:
            return Base("empty", A, mu, E), []
        if A.rank() <= 2:
            return Base("rank2", A, mu, E), []
        key = canonical_key(A, mu)
        if key in self.failed:
            return None
        self.tick(depth)
        for i, er, F, E_del, _ in self.candidates(A, mu, E):
            sub = None
            if er.arrangement.rank() > 2:
                with self.lock:
                    self.stats.restriction_searches += 1
                sub = self.certify(er.arrangement, er.multiplicity, F, depth + 1)
                if sub is None:
                    continue
            H = A.hyperplanes[i]
            A_del, mu_del = deletion(A, mu, i)
            found = self.descend(A_del, mu_del, E_del, depth + 1)
            if found is None:
                continue
            base, rev = found
            rev.append(AdditionStep(H, E_del, F, er.multiplicity, sub))
            return base, rev
        self.mark_failed(key)
        return None


def search_certificate(A: Arrangement, mu: Multiplicity | None = None, *,
                       budget: int | None = 20000, exhaustive: bool = False,
                       heuristic: bool = False, jobs: int = 1,
                       progress: Callable | None = None) -> InductionCertificate | Exhausted:
    """Depth-first search for an induction certificate of (A, mu).

    The search deletes down from (A, mu) with exponents forced by the
    addition-deletion theorem, so only restrictions need freeness decisions.
    ``exhaustive`` removes the node budget; a failed search is then a proof.
    """
    mu = check_multiplicity(A, mu)
    s = _Search(None if exhaustive else budget, heuristic, progress)
    top = decide_freeness(A, mu)
    if not top.free:
        return Exhausted(True, s.stats, "the multiarrangement is not free")
    E = top.exponents
    A, mu = A.sorted(mu)
    try:
        if jobs > 1 and len(A) and A.rank() > 2:
            cert = _parallel_top(s, A, mu, E, jobs)
        else:
            cert = s.certify(A, mu, E)
    except _BudgetExceeded:
        return Exhausted(False, s.stats, f"node budget {budget} exhausted")
    if cert is None:
        return Exhausted(True, s.stats, "every pivot sequence fails")
    return cert


def _parallel_top(s: _Search, A, mu, E, jobs) -> InductionCertificate | None:
    """Expand the top-level pivots concurrently; keep the first success in pivot order."""
    s.tick(0)
    cands = s.candidates(A, mu, E)

    def branch(c):
        i, er, F, E_del, _ = c
        sub = None
        if er.arrangement.rank() > 2:
            sub = s.certify(er.arrangement, er.multiplicity, F, 1)
            if sub is None:
                return None
        A_del, mu_del = deletion(A, mu, i)
        found = s.descend(A_del, mu_del, E_del, 1)
        if found is None:
            return None
        base, rev = found
        rev.append(AdditionStep(A.hyperplanes[i], E_del, F, er.multiplicity, sub))
        return annotate(InductionCertificate(A.dim, A.order, base, rev, E))

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(branch, cands))
    for r in results:
        if r is not None:
            return r
    s.mark_failed(canonical_key(A, mu))
    return None


# -- building certificates from pivot sequences -------------------------

def certificate_from_pivots(base: Base, pivots: Sequence, *,
                            search_budget: int | None = 20000) -> InductionCertificate:
    """Annotate a sequence of hyperplanes to add, starting at ``base``.

    Restriction exponents, Euler multiplicities and forced exponents are
    computed; rank >= 3 restrictions get sub-certificates by search.
    """
    A, mu, E = base.arrangement, base.multiplicity, base.exponents
    steps = []
    for k, p in enumerate(pivots, start=1):
        H = p if isinstance(p, Hyperplane) else Hyperplane.of(p, A.order)
        A1, mu1 = addition(A, mu, H)
        er = euler_restriction_detail(A1, mu1, H)
        sub = None
        res = decide_freeness(er.arrangement, er.multiplicity)
        if not res.free:
            raise CertificateError("restriction is not free", k)
        if er.arrangement.rank() > 2:
            sub = search_certificate(er.arrangement, er.multiplicity, budget=search_budget)
            if isinstance(sub, Exhausted):
                raise CertificateError(f"no certificate for the restriction ({sub.reason})", k)
        F = res.exponents
        c = leftover(E, F)
        if c is None:
            raise CertificateError(f"{format_exps(F)} not contained in {format_exps(E)}", k)
        steps.append(AdditionStep(H, E, F, er.multiplicity, sub))
        A, mu, E = A1, mu1, sorted_exps(F + (c + 1,))
    return InductionCertificate(base.arrangement.dim, base.arrangement.order, base, steps, E)


def trivial_certificate(A: Arrangement, mu: Multiplicity | None = None) -> InductionCertificate:
    """A step-free certificate for Phi_l or a rank <= 2 multiarrangement."""
    mu = check_multiplicity(A, mu)
    if len(A) == 0:
        return InductionCertificate(A.dim, A.order, Base("empty", A, mu, (0,) * A.dim), [],
                                    (0,) * A.dim)
    if A.rank() > 2:
        raise ValueError("trivial certificates exist only in rank <= 2")
    E = decide_freeness(A, mu).exponents
    return InductionCertificate(A.dim, A.order, Base("rank2", A, mu, E), [], E)


def _base_certificate(base: Base) -> InductionCertificate:
    return InductionCertificate(base.arrangement.dim, base.arrangement.order, base, [],
                                base.exponents)


def product_certificate(c1: InductionCertificate, c2: InductionCertificate) -> InductionCertificate:
    """Certificate for the product of the targets of c1 and c2.

    Steps of c1 are replayed on A1 x base2, then steps of c2 on target1 x A2;
    each restriction splits as a product, so sub-certificates are products too.
    """
    b1, b2 = c1.base, c2.base
    PA, pmu = product(b1.arrangement, b1.multiplicity, b2.arrangement, b2.multiplicity)
    E0 = sorted_exps(b1.exponents + b2.exponents)
    if b1.kind == "empty" and b2.kind == "empty":
        base = Base("empty", PA, pmu, E0)
    elif PA.rank() <= 2:
        base = Base("rank2", PA, pmu, E0)
    else:
        base = Base("product", PA, pmu, E0, [_base_certificate(b1), _base_certificate(b2)])
    A, mu = b1.arrangement, b1.multiplicity
    steps: list[AdditionStep] = []
    n1, n2 = c1.dim, c2.dim
    E2_base = b2.exponents

    def pad(H: Hyperplane, left: int, right: int, order: int) -> Hyperplane:
        z = CycloScalar.rational(0, order)
        return Hyperplane((z,) * left + H.form + (z,) * right)

    order = PA.order
    for st in c1.steps:
        A1, mu1 = addition(A, mu, st.hyperplane)
        er = euler_restriction_detail(A1, mu1, st.hyperplane)
        s1 = st.sub if st.sub is not None else trivial_certificate(er.arrangement, er.multiplicity)
        sub = product_certificate(s1, _base_certificate(b2))
        steps.append(AdditionStep(pad(st.hyperplane, 0, n2, order),
                                  sorted_exps(st.exp_before + E2_base),
                                  sorted_exps(st.exp_restriction + E2_base), None,
                                  sub if _needs_sub(sub) else None))
        A, mu = A1, mu1
    E1 = c1.claimed_exponents()
    A2, mu2 = b2.arrangement, b2.multiplicity
    for st in c2.steps:
        B1, nu1 = addition(A2, mu2, st.hyperplane)
        er = euler_restriction_detail(B1, nu1, st.hyperplane)
        s2 = st.sub if st.sub is not None else trivial_certificate(er.arrangement, er.multiplicity)
        sub = product_certificate(c1, s2)
        steps.append(AdditionStep(pad(st.hyperplane, n1, 0, order),
                                  sorted_exps(E1 + st.exp_before),
                                  sorted_exps(E1 + st.exp_restriction), None,
                                  sub if _needs_sub(sub) else None))
        A2, mu2 = B1, nu1
    cert = InductionCertificate(n1 + n2, order, base, steps,
                                sorted_exps(E1 + c2.claimed_exponents()))
    return annotate(cert)


def _needs_sub(cert: InductionCertificate) -> bool:
    A, _ = cert.target()
    return A.rank() > 2


def annotate(cert: InductionCertificate) -> InductionCertificate:
    """Fill in recomputed Euler multiplicity vectors for every step."""
    A, mu = cert.base.arrangement, cert.base.multiplicity
    steps = []
    for st in cert.steps:
        A, mu = addition(A, mu, st.hyperplane)
        er = euler_restriction_detail(A, mu, st.hyperplane)
        steps.append(replace(st, mu_star=er.multiplicity))
    return replace(cert, steps=steps)


# -- free filtrations ---------------------------------------------------

@dataclass
class FiltrationCertificate:
    arrangement: Arrangement
    chain: list[Multiplicity]
    exponents: list[Exps]
    method: str = "search"

    def __post_init__(self):
        for a, b in zip(self.chain, self.chain[1:]):
            if not all(x <= y for x, y in zip(a, b)) or sum(b) != sum(a) + 1:
                raise ValueError("filtration must grow by exactly one step at a time")


@dataclass
class NotFound:
    longest: int
    reason: str


def tube_hypotheses(A: Arrangement, mu: Multiplicity) -> tuple[Exps, int] | None:
    """If (A, mu) satisfies the free-tube hypotheses return (exp A minus 1, e).

    Needs A free with exponents {1, e_2..e_l}, (A, mu) free with exponents
    {e, e_2..e_l} where e = 1 + |mu| - |A|, and |mu| - |A| >= e_l.
    """
    simple = decide_freeness(A)
    if not simple.free or A.rank() != A.dim or 1 not in simple.exponents:
        return None
    rest = list(simple.exponents)
    rest.remove(1)
    rest_t = sorted_exps(rest)
    top = decide_freeness(A, mu)
    if not top.free:
        return None
    e = 1 + sum(mu) - len(A)
    if top.exponents != sorted_exps(rest_t + (e,)):
        return None
    if rest_t and sum(mu) - len(A) < max(rest_t):
        return None
    return rest_t, e


def free_filtration_search(A: Arrangement, mu: Multiplicity | None = None, *,
                           use_tube: bool = True, budget: int | None = 100000) -> FiltrationCertificate | NotFound:
    """Chain of free multiplicities from the simple one up to mu."""
    mu = check_multiplicity(A, mu)
    if not decide_freeness(A).free:
        return NotFound(0, "the simple arrangement is not free")
    n = len(A)
    if use_tube:
        tube = tube_hypotheses(A, mu)
        if tube is not None:
            rest, _ = tube
            chain = [A.simple()]
            cur = list(chain[0])
            for i in range(n):
                while cur[i] < mu[i]:
                    cur[i] += 1
                    chain.append(tuple(cur))
            exps = [sorted_exps(rest + (1 + sum(nu) - n,)) for nu in chain]
            return FiltrationCertificate(A, chain, exps, "tube")
    failed: set = set()
    best = [1]
    count = [0]

    def dfs(nu: tuple, E: Exps) -> list | None:
        if nu == mu:
            return [(nu, E)]
        if nu in failed:
            return None
        count[0] += 1
        if budget is not None and count[0] > budget:
            raise _BudgetExceeded
        for i in range(n):
            if nu[i] < mu[i]:
                nxt = nu[:i] + (nu[i] + 1,) + nu[i + 1:]
                res = decide_freeness(A, nxt)
                if not res.free:
                    continue
                rest = dfs(nxt, res.exponents)
                if rest is not None:
                    return [(nu, E)] + rest
        failed.add(nu)
        best[0] = max(best[0], sum(nu) - n + 1)
        return None

    try:
        path = dfs(A.simple(), decide_freeness(A).exponents)
    except _BudgetExceeded:
        return NotFound(best[0], "budget exhausted")
    if path is None:
        return NotFound(best[0], "no chain of free multiplicities reaches the target")
    return FiltrationCertificate(A, [p for p, _ in path], [e for _, e in path], "search")


def multifreetube_basis(basis: Sequence[Derivation], A: Arrangement, mu: Multiplicity,
                        nu: Multiplicity) -> list[Derivation]:
    """Basis (prod alpha_H^(nu(H)-1)) theta_E, theta_2, ..., theta_l of D(A, nu)."""
    mu = check_multiplicity(A, mu)
    nu = check_multiplicity(A, nu)
    if not all(a <= b for a, b in zip(nu, mu)):
        raise ValueError("nu must lie below mu")
    tube = tube_hypotheses(A, mu)
    if tube is None:
        raise ValueError("(A, mu) does not satisfy the free-tube hypotheses")
    rest, e = tube
    if basis[0].degree != e or sorted_exps(th.degree for th in basis[1:]) != rest:
        raise ValueError("basis must start with the element of degree 1 + |mu| - |A|")
    if not saito_check(list(basis), A, mu):
        raise ValueError("supplied derivations are not a basis of D(A, mu)")
    factor = Poly.one(A.dim, A.order)
    for H, m in zip(A.hyperplanes, nu):
        if m > 1:
            factor = factor * H.poly(A.order) ** (m - 1)
    out = [euler_derivation(A.dim, A.order).times(factor)] + list(basis[1:])
    if not saito_check(out, A, nu):
        raise ValueError("constructed derivations fail Saito's criterion")
    return out


def check_localization_closure(cert: InductionCertificate, X: Flat | None = None, *,
                               budget: int | None = 20000) -> InductionCertificate | Exhausted:
    """Search a certificate for the localization of the certificate's target at X."""
    A, mu = cert.target()
    if X is None or X.rank == 0:
        return cert
    # the target may list its hyperplanes in a different order than X was built from
    X = span_flat(A, list(X.rows))
    AX, muX = localization(A, mu, X)
    return search_certificate(AX, muX, budget=budget)


# -- text format ---------------------------------------------------------

def _form_text(H: Hyperplane) -> str:
    return format_form(H.form)


def format_certificate(cert: InductionCertificate, indent: int = 0) -> str:
    pad = " " * indent
    lines = [f"{pad}certificate dim {cert.dim} cyclo {cert.order}"]
    b = cert.base
    lines.append(f"{pad}base {b.kind} exp = {format_exps(b.exponents)}")
    for H, m in zip(b.arrangement.hyperplanes, b.multiplicity):
        coords = ", ".join(format_scalar(c) for c in H.form)
        lines.append(f"{pad}  {coords}" + (f" : {m}" if m != 1 else ""))
    for child in b.children:
        lines.append(format_certificate(child, indent + 2).rstrip("\n"))
    for i, st in enumerate(cert.steps, start=1):
        parts = [f"step {i}: add {_form_text(st.hyperplane)}",
                 f"exp_before = {format_exps(st.exp_before)}"]
        if st.mu_star is not None:
            parts.append(f"mu_star = {format_tuple(st.mu_star)}")
        parts.append(f"exp_restriction = {format_exps(st.exp_restriction)}")
        lines.append(pad + " ; ".join(parts))
        if st.sub is not None:
            lines.append(format_certificate(st.sub, indent + 2).rstrip("\n"))
    lines.append(f"{pad}target exp = {format_exps(cert.claimed_exponents())}")
    lines.append(f"{pad}end")
    return "\n".join(lines) + "\n"


def _parse_set(text: str, lineno: int) -> Exps:
    t = text.strip()
    if not (t.startswith("{") and t.endswith("}")):
        raise ParseError(f"expected {{...}}, got {t!r}", lineno)
    body = t[1:-1].strip()
    try:
        return sorted_exps(int(v) for v in body.split(",")) if body else ()
    except ValueError:
        raise ParseError(f"bad exponent list {t!r}", lineno) from None


def _parse_tuple(text: str, lineno: int) -> tuple[int, ...]:
    t = text.strip()
    if not (t.startswith("(") and t.endswith(")")):
        raise ParseError(f"expected (...), got {t!r}", lineno)
    body = t[1:-1].strip()
    try:
        return tuple(int(v) for v in body.split(",")) if body else ()
    except ValueError:
        raise ParseError(f"bad multiplicity vector {t!r}", lineno) from None


def parse_certificate(text: str) -> InductionCertificate:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            lines.append((lineno, len(body) - len(body.lstrip(" ")), body.strip()))
    if not lines:
        raise ParseError("empty certificate")
    cert, pos = _parse_block(lines, 0)
    if pos != len(lines):
        raise ParseError("trailing content after certificate", lines[pos][0])
    return cert


def _parse_block(lines, pos) -> tuple[InductionCertificate, int]:
    lineno, indent, text = lines[pos]
    parts = text.split()
    if len(parts) != 5 or parts[0] != "certificate" or parts[1] != "dim" or parts[3] != "cyclo":
        raise ParseError("expected 'certificate dim <l> cyclo <r>'", lineno)
    try:
        dim, order = int(parts[2]), int(parts[4])
    except ValueError:
        raise ParseError("dimension and order must be integers", lineno) from None
    pos += 1

    def children(pos):
        """Indented lines belonging to the previous header."""
        out = []
        while pos < len(lines) and lines[pos][1] > indent:
            out.append(pos)
            pos += 1
        return out, pos

    if pos >= len(lines) or not lines[pos][2].startswith("base "):
        raise ParseError("expected a base line", lines[min(pos, len(lines) - 1)][0])
    lineno, _, text = lines[pos]
    head, _, exp_txt = text.partition("exp =")
    kind = head.split()[1] if len(head.split()) > 1 else ""
    if kind not in BASE_KINDS:
        raise ParseError(f"unknown base kind {kind!r}", lineno)
    base_exps = _parse_set(exp_txt, lineno)
    pos += 1
    arr_lines = [f"dim {dim} cyclo {order}"]
    kids: list[InductionCertificate] = []
    while pos < len(lines) and lines[pos][1] > indent:
        if lines[pos][2].startswith("certificate"):
            child, pos = _parse_block(lines, pos)
            kids.append(child)
        else:
            arr_lines.append(lines[pos][2])
            pos += 1
    try:
        A, mu = parse_arrangement("\n".join(arr_lines))
    except ParseError as exc:
        raise ParseError(f"in base arrangement: {exc}", lineno) from None
    base = Base(kind, A, mu, base_exps, kids)
    steps: list[AdditionStep] = []
    final = None
    while pos < len(lines):
        lineno, ind, text = lines[pos]
        if ind != indent:
            raise ParseError("unexpected indentation", lineno)
        if text == "end":
            pos += 1
            break
        if text.startswith("target"):
            final = _parse_set(text.partition("=")[2], lineno)
            pos += 1
            continue
        if not text.startswith("step"):
            raise ParseError(f"unexpected line {text!r}", lineno)
        fields = [f.strip() for f in text.split(";")]
        head = fields[0]
        if ": add " not in head:
            raise ParseError("expected 'step <i>: add <form>'", lineno)
        form_txt = head.split(": add ", 1)[1]
        try:
            p = parse_poly(form_txt, dim, order)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if p.degree() != 1 or not p.is_homogeneous():
            raise ParseError(f"{form_txt!r} is not a linear form", lineno)
        coeffs = [p.coefficient(tuple(1 if j == i else 0 for j in range(dim))) for i in range(dim)]
        H = Hyperplane.of(coeffs, order)
        kv = {}
        for f in fields[1:]:
            k, _, v = f.partition("=")
            kv[k.strip()] = v.strip()
        if "exp_before" not in kv or "exp_restriction" not in kv:
            raise ParseError("step needs exp_before and exp_restriction", lineno)
        mu_star = _parse_tuple(kv["mu_star"], lineno) if "mu_star" in kv else None
        pos += 1
        sub = None
        if pos < len(lines) and lines[pos][1] > indent:
            sub, pos = _parse_block(lines, pos)
        steps.append(AdditionStep(H, _parse_set(kv["exp_before"], lineno),
                                  _parse_set(kv["exp_restriction"], lineno), mu_star, sub))
    else:
        raise ParseError("certificate block not closed with 'end'", lines[-1][0])
    return InductionCertificate(dim, order, base, steps, final), pos


# -- tables ----------------------------------------------------------------

def render_table(cert: InductionCertificate, verification: Verification | None = None,
                 *, mu_star: bool = False) -> str:
    """Aligned induction table: exp(A', mu') | alpha_H | exp(A'', mu*)."""
    head = ["exp(A', mu')", "alpha_H", "exp(A'', mu*)"]
    if mu_star:
        head.append("mu*")
    rows = []
    checks = verification.steps if verification is not None else None
    for i, st in enumerate(cert.steps):
        ms = checks[i].mu_star if checks and i < len(checks) else st.mu_star
        row = [format_exps(st.exp_before), _form_text(st.hyperplane), format_exps(st.exp_restriction)]
        if mu_star:
            row.append(format_tuple(ms) if ms is not None else "")
        rows.append(row)
    final = verification.exponents if verification is not None and verification.ok \
        else cert.claimed_exponents()
    rows.append([format_exps(final), "", ""] + ([""] if mu_star else []))
    widths = [max(len(r[c]) for r in rows + [head]) for c in range(len(head))]
    fmt = lambda r: "  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip()
    rule = "-" * len(fmt(["-" * w for w in widths]))
    out = [fmt(head), rule] + [fmt(r) for r in rows]
    return "\n".join(out) + "\n"
