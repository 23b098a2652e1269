"""Command-line front end."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import catalog
from .arrangement import (
    Arrangement,
    Hyperplane,
    ParseError,
    format_arrangement,
    format_form,
    intersection_lattice,
    parse_arrangement,
    ziegler_multiplicity,
)
from .derivations import (
    Derivation,
    decide_freeness,
    delta_basis,
    euler_first_basis,
    euler_restriction_detail,
    saito_check,
)
from .arrangement import concentrated_multiplicity, essentialize
from .induction import (
    Exhausted,
    FiltrationCertificate,
    InductionCertificate,
    format_certificate,
    format_exps,
    format_tuple,
    free_filtration_search,
    parse_certificate,
    render_table,
    search_certificate,
    verify_certificate,
)
from .poly import parse_poly

OK, NEGATIVE, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class Output:
    """Human tables or key=value lines, depending on --format."""

    def __init__(self, machine: bool, stream=None):
        self.machine = machine
        self.stream = stream or sys.stdout

    def kv(self, key: str, value) -> None:
        if isinstance(value, (tuple, list)):
            value = ",".join(str(v) for v in value)
        if self.machine:
            print(f"{key}={value}", file=self.stream)
        else:
            print(f"{key.replace('_', ' ')}: {value}", file=self.stream)

    def text(self, body: str) -> None:
        if not self.machine:
            self.stream.write(body if body.endswith("\n") else body + "\n")


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def write_text(path: str | None, text: str, out: Output) -> None:
    if path is None:
        if not out.machine:
            sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def summary(args, out: Output) -> Output:
    """Where to print key/value summaries when stdout may carry a file."""
    if args.out is None and not out.machine:
        return Output(False, sys.stderr)
    return out


def load_arrangement(path: str):
    text = read_text(path)
    try:
        return parse_arrangement(text)
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def parse_pivot(text: str, A: Arrangement) -> int:
    """Pivot given as comma-separated coordinates or as a linear form in x1..xl."""
    try:
        if "x" in text:
            p = parse_poly(text, A.dim, A.order)
            coeffs = [p.coefficient(tuple(int(j == i) for j in range(A.dim))) for i in range(A.dim)]
        else:
            from .scalars import parse_scalar

            coeffs = [parse_scalar(t, A.order) for t in text.split(",")]
        return A.index(Hyperplane.of(coeffs, A.order))
    except (ValueError, KeyError, IndexError) as exc:
        raise UsageError(f"bad pivot {text!r}: {exc}") from None


def parse_derivations(text: str, A: Arrangement) -> list[Derivation]:
    """One derivation per line: its coefficients separated by ';'."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(";")]
        if len(parts) != A.dim:
            raise UsageError(f"line {lineno}: expected {A.dim} coefficients, got {len(parts)}")
        try:
            polys = [parse_poly(p, A.dim, A.order) for p in parts]
            out.append(Derivation.from_polys(polys))
        except ValueError as exc:
            raise UsageError(f"line {lineno}: {exc}") from None
    return out


def progress(stats) -> None:
    print(f"[search] nodes={stats.nodes} failed={stats.failed_states} depth={stats.max_depth}",
          file=sys.stderr)


# -- subcommands ------------------------------------------------------------

def cmd_lattice(args, out: Output) -> int:
    A, _ = load_arrangement(args.file)
    levels = intersection_lattice(A, args.max_rank)
    out.kv("rank", A.rank())
    out.kv("flats_per_rank", [len(lv) for lv in levels])
    if args.verbose and not out.machine:
        for r, lv in enumerate(levels):
            for X in lv:
                out.text(f"  rank {r}: " + " ".join(str(i + 1) for i in X.localized))
    return OK


def cmd_free(args, out: Output) -> int:
    A, mu = load_arrangement(args.file)
    res = decide_freeness(A, mu)
    out.kv("verdict", res.verdict)
    if res.free:
        out.kv("exponents", res.exponents)
        if args.basis:
            for th in sorted(res.basis, key=lambda t: t.degree):
                out.text(f"  [{th.degree}] {th}")
    else:
        out.kv("reason", res.reason)
        if res.witness:
            out.kv("generator_degrees", [f"{d}x{c}" for d, c in sorted(res.witness.items())])
    return OK if res.free else NEGATIVE


def cmd_ziegler(args, out: Output) -> int:
    A, _ = load_arrangement(args.file)
    i0 = parse_pivot(args.pivot, A)
    B, kappa = ziegler_multiplicity(A, i0)
    text = format_arrangement(B, kappa, comment=f"Ziegler restriction along {format_form(A.hyperplanes[i0].form)}")
    write_text(args.out, text, out)
    info = summary(args, out)
    info.kv("hyperplanes", len(B))
    info.kv("total_multiplicity", sum(kappa))
    return OK


def cmd_euler(args, out: Output) -> int:
    A, mu = load_arrangement(args.file)
    i0 = parse_pivot(args.pivot, A)
    er = euler_restriction_detail(A, mu, i0)
    write_text(args.out, format_arrangement(er.arrangement, er.multiplicity), out)
    info = summary(args, out)
    info.kv("mu_star", format_tuple(er.multiplicity))
    info.kv("rules", [v.rule.replace(" ", "_") for v in er.values])
    return OK


def cmd_delta(args, out: Output) -> int:
    A, _ = load_arrangement(args.file)
    i0 = parse_pivot(args.pivot, A)
    if args.m0 < 1:
        raise UsageError("--m0 must be positive")
    if A.rank() != A.dim:
        # essentialization keeps the hyperplane order, so i0 still names the pivot
        A, _ = essentialize(A)
        out.text("# working in the essentialization")
    delta = concentrated_multiplicity(A, i0, args.m0)
    res = decide_freeness(A, delta)
    out.kv("verdict", res.verdict)
    if not res.free:
        return NEGATIVE
    out.kv("exponents", res.exponents)
    try:
        basis = delta_basis(A, euler_first_basis(A, i0), i0, args.m0)
        out.kv("delta_basis", "saito-verified")
        if args.basis:
            for th in basis:
                out.text(f"  [{th.degree}] {th}")
    except ValueError as exc:
        out.kv("delta_basis", f"failed ({exc})")
        return NEGATIVE
    er = euler_restriction_detail(A, delta, i0)
    _, kappa = ziegler_multiplicity(A, i0)
    out.kv("delta_star", format_tuple(er.multiplicity))
    out.kv("equals_kappa", er.multiplicity == kappa)
    return OK


def cmd_saito(args, out: Output) -> int:
    A, mu = load_arrangement(args.file)
    derivs = parse_derivations(read_text(args.derivations), A)
    if len(derivs) != A.dim:
        raise UsageError(f"need exactly {A.dim} derivations, got {len(derivs)}")
    ok = saito_check(derivs, A, mu, expand=args.expand)
    out.kv("verdict", "basis" if ok else "not-a-basis")
    out.kv("degrees", [th.degree for th in derivs])
    return OK if ok else NEGATIVE


def cmd_search(args, out: Output) -> int:
    A, mu = load_arrangement(args.file)
    jobs = 1 if args.deterministic else args.jobs
    res = search_certificate(A, mu, budget=args.budget, exhaustive=args.exhaustive,
                             heuristic=args.heuristic, jobs=jobs,
                             progress=None if args.quiet else progress)
    if isinstance(res, Exhausted):
        out.kv("verdict", "NotFound")
        out.kv("complete", res.complete)
        out.kv("proof", res.complete)
        out.kv("reason", res.reason)
        out.kv("nodes", res.stats.nodes)
        out.kv("failed_states", res.stats.failed_states)
        out.kv("max_depth", res.stats.max_depth)
        return NEGATIVE
    v = verify_certificate(res, (A, mu))
    out.kv("verdict", "InductivelyFree" if v.ok else "Rejected")
    out.kv("exponents", v.exponents)
    out.kv("steps", len(res.steps))
    out.text(render_table(res, v, mu_star=args.mu_star))
    if args.out:
        write_text(args.out, format_certificate(res), out)
    return OK if v.ok else NEGATIVE


def cmd_verify(args, out: Output) -> int:
    text = read_text(args.certificate)
    try:
        cert = parse_certificate(text)
    except ParseError as exc:
        raise UsageError(f"{args.certificate}: {exc}") from None
    target = load_arrangement(args.target) if args.target else None
    v = verify_certificate(cert, target)
    out.kv("verdict", "Verified" if v.ok else "Rejected")
    if not v.ok:
        out.kv("error", v.error)
        if v.failed_step is not None:
            out.kv("failed_step", v.failed_step)
        return NEGATIVE
    out.kv("exponents", v.exponents)
    out.kv("steps", len(cert.steps))
    for a in dict.fromkeys(v.assumptions):
        out.kv("assumption", a)
    out.text(render_table(cert, v, mu_star=args.mu_star))
    if out.machine:
        for chk in v.steps:
            out.kv(f"step_{chk.index}",
                   f"{format_form(chk.hyperplane.form)};{format_exps(chk.exp_before)};"
                   f"{format_exps(chk.exp_restriction)};{format_tuple(chk.mu_star)}")
    return OK


def cmd_filtrate(args, out: Output) -> int:
    A, mu = load_arrangement(args.file)
    res = free_filtration_search(A, mu, use_tube=not args.no_tube, budget=args.budget)
    if not isinstance(res, FiltrationCertificate):
        out.kv("verdict", "NotFound")
        out.kv("longest_chain", res.longest)
        out.kv("reason", res.reason)
        return NEGATIVE
    out.kv("verdict", "FreeFiltration")
    out.kv("method", res.method)
    out.kv("length", len(res.chain))
    if not out.machine:
        for nu, e in zip(res.chain, res.exponents):
            out.text(f"  {format_tuple(nu)}  {format_exps(e)}")
    return OK


TABLES = {
    "d": (("l",), lambda l: catalog.d_table_certificate(l)),
    "grr4": (("r",), lambda r: catalog.grr4_table_certificate(r)),
    "g29": ((), lambda: catalog.g29_table_certificate()),
}


def cmd_catalog(args, out: Output) -> int:
    if args.action == "list":
        for name, params, desc in catalog.list_families():
            ps = " ".join(f"<{p}>" for p in params)
            out.text(f"{name:10s} {ps:16s} {desc}")
            if out.machine:
                out.kv("entry", name)
        for name, (params, _) in TABLES.items():
            ps = " ".join(f"<{p}>" for p in params)
            out.text(f"table {name:4s} {ps:16s} induction table certificate")
        return OK
    if not args.name:
        raise UsageError(f"catalog {args.action} needs a name")
    try:
        params = [int(p) for p in args.params]
    except ValueError:
        raise UsageError("catalog parameters must be integers") from None
    if args.action == "table":
        if args.name not in TABLES:
            raise UsageError(f"unknown table {args.name!r}")
        names, build = TABLES[args.name]
        if len(params) != len(names):
            raise UsageError(f"table {args.name} takes {len(names)} parameter(s)")
        cert = build(*params)
        write_text(args.out, format_certificate(cert), out)
        summary(args, out).kv("steps", len(cert.steps))
        return OK
    try:
        entry = catalog.get_entry(args.name, *params)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    comment = entry.note + (f"; exponents {format_exps(entry.exponents)}" if entry.exponents else "")
    write_text(args.out, format_arrangement(entry.arrangement, entry.multiplicity, comment), out)
    info = summary(args, out)
    info.kv("hyperplanes", len(entry.arrangement))
    if entry.exponents:
        info.kv("published_exponents", entry.exponents)
    return OK


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "machine"), default="table")
    common.add_argument("--deterministic", action="store_true",
                        help="single-threaded, byte-identical output")

    p = argparse.ArgumentParser(prog="multiarr", parents=[common],
                                description="Free and inductively free multiarrangements.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lattice", parents=[common], help="intersection lattice statistics")
    s.add_argument("file")
    s.add_argument("--max-rank", type=int)
    s.add_argument("-v", "--verbose", action="store_true")

    s = sub.add_parser("free", parents=[common], help="decide freeness")
    s.add_argument("file")
    s.add_argument("--basis", action="store_true", help="print a homogeneous basis")

    s = sub.add_parser("ziegler", parents=[common], help="Ziegler restriction (A'', kappa)")
    s.add_argument("file")
    s.add_argument("--pivot", required=True)
    s.add_argument("--out")

    s = sub.add_parser("euler", parents=[common], help="Euler restriction (A'', mu*)")
    s.add_argument("file")
    s.add_argument("--pivot", required=True)
    s.add_argument("--out")

    s = sub.add_parser("delta", parents=[common], help="concentrated multiplicity delta_{H0,m0}")
    s.add_argument("file")
    s.add_argument("--pivot", required=True)
    s.add_argument("--m0", type=int, default=2)
    s.add_argument("--basis", action="store_true")

    s = sub.add_parser("saito", parents=[common], help="Saito criterion for given derivations")
    s.add_argument("file")
    s.add_argument("derivations")
    s.add_argument("--expand", action="store_true", help="compare full determinant with Q")

    s = sub.add_parser("search", parents=[common], help="search an induction certificate")
    s.add_argument("file")
    s.add_argument("--budget", type=int, default=20000)
    s.add_argument("--exhaustive", action="store_true", help="no budget; failures are proofs")
    s.add_argument("--heuristic", action="store_true", help="try largest exponent gaps first")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--mu-star", action="store_true")
    s.add_argument("--quiet", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("verify", parents=[common], help="verify an induction certificate")
    s.add_argument("certificate")
    s.add_argument("--target")
    s.add_argument("--mu-star", action="store_true")

    s = sub.add_parser("filtrate", parents=[common], help="search a free filtration")
    s.add_argument("file")
    s.add_argument("--no-tube", action="store_true")
    s.add_argument("--budget", type=int, default=100000)

    s = sub.add_parser("catalog", parents=[common], help="built-in arrangements and tables")
    s.add_argument("action", choices=("list", "get", "table"))
    s.add_argument("name", nargs="?")
    s.add_argument("params", nargs="*")
    s.add_argument("--out")
    return p


COMMANDS = {
    "lattice": cmd_lattice, "free": cmd_free, "ziegler": cmd_ziegler, "euler": cmd_euler,
    "delta": cmd_delta, "saito": cmd_saito, "search": cmd_search, "verify": cmd_verify,
    "filtrate": cmd_filtrate, "catalog": cmd_catalog,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Output(args.format == "machine")
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
