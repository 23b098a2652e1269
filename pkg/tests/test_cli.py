import subprocess
import sys

import pytest

from multiarr.arrangement import format_arrangement, parse_arrangement
from multiarr.catalog import coxeter_arrangement, example_kappa2, grr4_restriction_basis
from multiarr.cli import NEGATIVE, OK, USAGE, main
from multiarr.induction import parse_certificate, verify_certificate


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def machine(text):
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out.setdefault(k, v)
    return out


@pytest.fixture
def a5(tmp_path):
    p = tmp_path / "a5.txt"
    p.write_text(format_arrangement(coxeter_arrangement("A", 5)))
    return p


def test_free_negative_on_example(tmp_path, capsys):
    p = tmp_path / "k2.txt"
    p.write_text(format_arrangement(example_kappa2()))
    code, out, _ = run(capsys, "free", str(p), "--format", "machine")
    assert code == NEGATIVE
    assert machine(out)["verdict"] == "NonFree"


def test_ziegler_then_free(a5, tmp_path, capsys):
    z = tmp_path / "z.txt"
    code, _, _ = run(capsys, "ziegler", str(a5), "--pivot", "1,-1,0,0,0", "--out", str(z))
    assert code == OK
    code, out, _ = run(capsys, "free", str(z), "--format", "machine")
    assert code == OK
    assert machine(out)["exponents"] == "0,2,3,4"
    A, kappa = parse_arrangement(z.read_text())
    assert sum(kappa) == 9


def test_ziegler_to_stdout_is_a_valid_file(a5, capsys):
    code, out, err = run(capsys, "ziegler", str(a5), "--pivot", "x1 - x2")
    assert code == OK
    A, kappa = parse_arrangement(out)
    assert len(A) == 6 and "hyperplanes" in err


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "free", str(tmp_path / "missing.txt"))[0] == USAGE
    bad = tmp_path / "bad.txt"
    bad.write_text("dim 2 cyclo 1\n1, 0\n1\n")
    code, _, err = run(capsys, "free", str(bad))
    assert code == USAGE and "line 3" in err
    good = tmp_path / "good.txt"
    good.write_text(format_arrangement(coxeter_arrangement("B", 2)))
    assert run(capsys, "ziegler", str(good), "--pivot", "1,1,1")[0] == USAGE
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == USAGE
    assert run(capsys, "catalog", "get", "nope")[0] == USAGE
    cert = tmp_path / "c.txt"
    cert.write_text("certificate dim 2\n")
    assert run(capsys, "verify", str(cert))[0] == USAGE


def test_euler_and_delta(tmp_path, capsys):
    p = tmp_path / "a3.txt"
    p.write_text(format_arrangement(coxeter_arrangement("A", 3)))
    code, out, _ = run(capsys, "delta", str(p), "--pivot", "1,-1,0", "--m0", "3", "--format", "machine")
    assert code == OK
    kv = machine(out)
    assert kv["exponents"] == "2,3" and kv["equals_kappa"] == "True"
    code, out, _ = run(capsys, "euler", str(p), "--pivot", "1,-1,0", "--format", "machine")
    assert code == OK and machine(out)["mu_star"] == "(1)"


def test_saito_command(tmp_path, capsys):
    A, mu, (th1, th2) = grr4_restriction_basis(3)
    arr = tmp_path / "r.txt"
    arr.write_text(format_arrangement(A, mu))
    ders = tmp_path / "d.txt"
    ders.write_text("\n".join(" ; ".join(str(f) for f in th.coeffs) for th in (th1, th2)) + "\n")
    code, out, _ = run(capsys, "saito", str(arr), str(ders), "--format", "machine")
    assert code == OK and machine(out)["verdict"] == "basis"
    ders.write_text("\n".join(" ; ".join(str(f) for f in th.coeffs) for th in (th1, th1)) + "\n")
    assert run(capsys, "saito", str(arr), str(ders))[0] == NEGATIVE


def test_search_verify_round_trip(tmp_path, capsys):
    p = tmp_path / "b3.txt"
    p.write_text(format_arrangement(coxeter_arrangement("B", 3)))
    cert = tmp_path / "b3.cert"
    code, out, _ = run(capsys, "search", str(p), "--deterministic", "--quiet", "--out", str(cert))
    assert code == OK and "InductivelyFree" in out
    code, out, _ = run(capsys, "verify", str(cert), "--target", str(p), "--format", "machine")
    assert code == OK and machine(out)["exponents"] == "1,3,5"
    text = cert.read_text()
    bad = text.replace("exp_restriction = {1, 3}", "exp_restriction = {1, 4}", 1)
    if bad != text:
        cert.write_text(bad)
        assert run(capsys, "verify", str(cert))[0] == NEGATIVE


def test_deterministic_output_is_reproducible(tmp_path, capsys):
    p = tmp_path / "d4.txt"
    p.write_text(format_arrangement(coxeter_arrangement("D", 4)))
    outs = []
    for jobs in ("1", "4"):
        c = tmp_path / f"d4_{jobs}.cert"
        assert run(capsys, "search", str(p), "--quiet", "--jobs", jobs, "--out", str(c))[0] == OK
        outs.append(c.read_text())
    assert outs[0] == outs[1]


def test_search_exhaustive_negative(tmp_path, capsys):
    p = tmp_path / "k2.txt"
    p.write_text(format_arrangement(example_kappa2()))
    code, out, _ = run(capsys, "search", str(p), "--exhaustive", "--quiet", "--format", "machine")
    assert code == NEGATIVE and machine(out)["proof"] == "True"


def test_filtrate_and_lattice(tmp_path, capsys):
    p = tmp_path / "b.txt"
    p.write_text("dim 2 cyclo 1\n1, 0 : 2\n0, 1 : 2\n")
    code, out, _ = run(capsys, "filtrate", str(p), "--format", "machine")
    assert code == OK and machine(out)["length"] == "3"
    code, out, _ = run(capsys, "lattice", str(p))
    assert code == OK


def test_catalog_commands(tmp_path, capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == OK and "g29-kappa" in out
    f = tmp_path / "g.txt"
    assert run(capsys, "catalog", "get", "G1", "3", "3", "--out", str(f))[0] == OK
    A, _ = parse_arrangement(f.read_text())
    assert len(A) == 12
    t = tmp_path / "t.cert"
    assert run(capsys, "catalog", "table", "d", "4", "--out", str(t))[0] == OK
    assert verify_certificate(parse_certificate(t.read_text())).ok


def test_verify_g29_table(tmp_path, capsys):
    t = tmp_path / "g29.cert"
    assert run(capsys, "catalog", "table", "g29", "--out", str(t))[0] == OK
    code, out, _ = run(capsys, "verify", str(t))
    assert code == OK
    rows = [l for l in out.splitlines() if l.strip() and l.lstrip()[0] == "{"]
    assert len(rows) == 19  # 18 additions plus the final exponents
    assert "{9, 13, 17}" in out


def test_module_entry_point(a5):
    proc = subprocess.run([sys.executable, "-m", "multiarr", "free", str(a5), "--format", "machine"],
                          capture_output=True, text=True)
    assert proc.returncode == OK
    assert "verdict=Free" in proc.stdout
