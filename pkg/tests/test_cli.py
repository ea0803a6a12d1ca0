import shutil
import subprocess
from pathlib import Path

import pytest

from bikoszul import ainfty, bar, cli
from bikoszul.ainfty import Report

DATA = Path(__file__).resolve().parents[1] / "src" / "bikoszul" / "data"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# --- classify and oracle -----------------------------------------------------


@pytest.mark.parametrize(
    "name, maxdeg, verdict",
    [
        ("trunc3", 9, "verdict: 3-Koszul up to degree 9"),
        ("trunc4", 12, "verdict: 4-Koszul up to degree 12"),
        ("exterior2", 8, "verdict: Koszul up to degree 8"),
        ("free2", 6, "verdict: Koszul (resolution terminates at p=1)"),
        ("mixed2", 8, "verdict: other (e.g. internal degree 6 in homological degree 4) up to degree 8"),
        ("bikoszul3", 8, "verdict: bi-Koszul (d=3) up to degree 8"),
    ],
)
def test_classify_verdicts(capsys, name, maxdeg, verdict):
    code, out, _ = run(capsys, "classify", DATA / f"{name}.alg", "--maxdeg", maxdeg)
    assert code == 0
    assert verdict in out.splitlines()


@pytest.mark.parametrize(
    "name, verdict",
    [
        ("trunc3", "verdict: 3-Koszul up to degree 9"),
        ("exterior2", "verdict: Koszul up to degree 8"),
        ("free2", "verdict: Koszul (resolution terminates at p=1)"),
    ],
)
def test_classify_with_declared_bound(capsys, name, verdict):
    code, out, _ = run(capsys, "classify", DATA / f"{name}.alg")
    assert code == 0 and verdict in out.splitlines()


def test_classify_table_rows(capsys):
    code, out, _ = run(capsys, "classify", DATA / "trunc3.alg", "--maxdeg", 9)
    rows = [l for l in out.splitlines() if l.startswith("tor ")]
    assert rows == [
        "tor p=0 q=0 dim=1",
        "tor p=1 q=1 dim=1",
        "tor p=2 q=3 dim=1",
        "tor p=3 q=4 dim=1",
        "tor p=4 q=6 dim=1",
        "tor p=5 q=7 dim=1",
        "tor p=6 q=9 dim=1",
    ]


@pytest.mark.parametrize("name", ["trunc3", "trunc4_qq", "exterior2", "mixed2", "free2"])
def test_oracle_tables_match_classify(capsys, name):
    _, a, _ = run(capsys, "classify", DATA / f"{name}.alg", "--maxdeg", 6)
    code, b, _ = run(capsys, "oracle", DATA / f"{name}.alg", "--maxdeg", 6)
    assert code == 0
    assert [l for l in a.splitlines() if l.startswith("tor ")] == [
        l for l in b.splitlines() if l.startswith("tor ")
    ]
    assert b.splitlines()[-1] == "agreement with main pipeline: yes"


def test_oracle_free_algebra_termination_note(capsys):
    _, out, _ = run(capsys, "oracle", DATA / "free2.alg", "--maxdeg", 5)
    assert "# no classes beyond p=1" in out.splitlines()


def test_oracle_disagreement_exits_6(capsys, monkeypatch):
    def skewed(pres, maxdeg=None, pmax=None):
        out = bar.tor_dimensions(pres, maxdeg, pmax)
        out[1] = {1: 99}
        return out

    monkeypatch.setattr(bar, "brute_force_tor", skewed)
    code, out, _ = run(capsys, "oracle", DATA / "trunc3.alg", "--maxdeg", 6)
    assert code == cli.EXIT_ORACLE == 6
    assert out.splitlines()[-1] == "agreement with main pipeline: NO"


# --- transfer ----------------------------------------------------------------


def test_transfer_cubic_writes_m3(capsys, tmp_path):
    out = tmp_path / "t3.ainf"
    code, stdout, _ = run(capsys, "transfer", DATA / "trunc3.alg", "--maxdeg", 9, "-o", out)
    assert code == 0
    text = out.read_text()
    assert any(l.startswith("m 3 ") for l in text.splitlines())
    assert "certification: all checkable identities pass" in stdout
    assert ainfty.parse_structure(text).arities() == [2, 3]


def test_transfer_exterior_only_products(capsys):
    code, out, _ = run(capsys, "transfer", DATA / "exterior2.alg", "--maxdeg", 5)
    assert code == 0
    entries = [l for l in out.splitlines() if l.startswith("m ")]
    assert entries and all(l.startswith("m 2 ") for l in entries)


def test_transfer_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.ainf", tmp_path / "b.ainf"
    run(capsys, "transfer", DATA / "mixed2.alg", "--maxdeg", 6, "-o", a)
    run(capsys, "transfer", DATA / "mixed2.alg", "--maxdeg", 6, "-o", b)
    assert a.read_bytes() == b.read_bytes()


def test_transfer_self_certification_failure_exits_4(capsys, monkeypatch):
    monkeypatch.setattr(ainfty, "check_SI_suite", lambda s, nmax=None: [Report("SI(3)", False)])
    code, out, _ = run(capsys, "transfer", DATA / "trunc3.alg", "--maxdeg", 6)
    assert code == cli.EXIT_SELFCERT == 4
    assert "# certification: FAIL" in out


# --- verify ------------------------------------------------------------------


def test_verify_valid(capsys):
    code, out, _ = run(capsys, "verify", DATA / "trunc3_qq.ainf")
    assert code == 0 and "FAIL" not in out


def test_verify_flipped_exits_5_with_witness(capsys):
    code, out, _ = run(capsys, "verify", DATA / "trunc3_qq_flipped.ainf")
    assert code == cli.EXIT_VERIFY == 5
    assert "first violation: SI(4) at (2 2 2 3) residual -2*5" in out.splitlines()


def test_verify_identity_morphism(capsys, tmp_path):
    s = ainfty.parse_structure((DATA / "trunc3_qq.ainf").read_text())
    m = tmp_path / "id.mor"
    m.write_text(ainfty.format_morphism(ainfty.identity_morphism(s)))
    src = DATA / "trunc3_qq.ainf"
    code, out, _ = run(capsys, "verify", src, "--morphism", m, "--target", src)
    assert code == 0
    assert "MI(3): pass" in out


def test_verify_bad_morphism_exits_5(capsys, tmp_path):
    s = ainfty.parse_structure((DATA / "trunc3_qq.ainf").read_text())
    f1 = {(i,): {i: 1} for i in range(s.dim)}
    f1[(1,)] = {1: 2}
    m = tmp_path / "bad.mor"
    m.write_text(ainfty.format_morphism(ainfty.AInftyMorphism(s, s, {1: f1})))
    src = DATA / "trunc3_qq.ainf"
    code, out, _ = run(capsys, "verify", src, "--morphism", m, "--target", src)
    assert code == 5 and "first violation: MI(" in out


def test_verify_warns_on_unknown(capsys):
    code, out, _ = run(capsys, "verify", DATA / "trunc3_qq.ainf", "--nmax", 14)
    assert code == 0
    assert any(l.startswith("warning: SI(") for l in out.splitlines())


# --- enumerate ---------------------------------------------------------------


@pytest.mark.parametrize("d, arities", [(2, "{2, 3, 4}"), (4, "{2, 3, 4, 5}"), (5, "{2, 3, 4, 5, 6}")])
def test_enumerate_arities(capsys, d, arities):
    code, out, _ = run(capsys, "enumerate", "--d", d)
    assert code == 0 and out.splitlines()[0] == f"arities d={d}: {arities}"


def test_enumerate_symbolic(capsys):
    code, out, _ = run(capsys, "enumerate", "--symbolic")
    assert code == 0
    assert out.splitlines() == [
        "S1: (0, 0, 2) (1, 1, d) (1, 1, d+1) (1, 2, 3) (2, 4, 4)",
        "S2: (0, 0, 2) (1, 2, 2) (1, 2, 3)",
        "S3[d]: (0, 0, d) (0, 1, 2) (1, 3, 3)",
        "S3[d+1]: (0, 0, d+1) (0, 1, 2) (0, 1, 3) (1, 3, 3) (1, 3, 4)",
    ]


def test_enumerate_rows_are_machine_readable(capsys):
    _, out, _ = run(capsys, "enumerate", "--d", 5)
    rows = [l for l in out.splitlines() if l.startswith("row ")]
    assert rows and all(len(l.split(" -> ")) == 2 for l in rows)


# --- analyze -----------------------------------------------------------------


def summary(out):
    return [l for l in out.splitlines() if l.startswith("summary: ")][0]


def test_analyze_truncated(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "truncated_d4.ainf")
    assert code == 0
    assert summary(out) == "summary: truncated: yes; strongly: yes; roundtrip: identical"


def test_analyze_bikoszul_synthetic(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "bikoszul_d5.ainf", "--pmax", 8)
    assert code == 0
    assert "[m2,m3]-finitely generated by E^1..E^3: pass (up to p=8)" in out.splitlines()


def test_analyze_transferred_bikoszul(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "bikoszul3.ainf")
    assert code == 0
    lines = out.splitlines()
    assert "d: 3 (inferred from E^2 support)" in lines
    assert "[m2,m3]-finitely generated by E^1..E^3: pass (up to p=4)" in lines
    assert "warning: strong criterion rows beyond the stored truncation" in lines


def test_analyze_koszul_vacuous(capsys, tmp_path):
    out_file = tmp_path / "e2.ainf"
    run(capsys, "transfer", DATA / "exterior2.alg", "--maxdeg", 5, "-o", out_file)
    code, out, _ = run(capsys, "analyze", out_file)
    assert code == 0
    assert out.splitlines() == ["reduced: yes (vacuous)", "truncated: n/a (no Delta_d profile)"]


@pytest.mark.parametrize(
    "name, code",
    [("bikoszul_d5_uncovered", 7), ("bikoszul_d5_weak", 8), ("bridge_d4", 9), ("truncated_d4_perturbed", 9)],
)
def test_analyze_failure_codes(capsys, name, code):
    got, out, _ = run(capsys, "analyze", DATA / f"{name}.ainf")
    assert got == code


def test_analyze_verbose_lists_rows(capsys):
    _, out, _ = run(capsys, "analyze", DATA / "bikoszul_d5.ainf", "--pmax", 6, "-v")
    assert any(l.strip().startswith("gen p=") for l in out.splitlines())


# --- errors ------------------------------------------------------------------


def test_parse_error_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.alg"
    bad.write_text("field QQ\ngens x\nrel x*z\nmaxdeg 4\n")
    code, _, err = run(capsys, "classify", bad)
    assert code == 2 and "line 3" in err


def test_structure_beyond_declared_bidegrees_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.ainf"
    bad.write_text("ainfty v1\nfield QQ\ntrunc 1\nbasis 1 0 0\nbasis 2 1 1\nm 2 : 2 2 -> 1*2\n")
    code, _, err = run(capsys, "verify", bad)
    assert code == 2 and "parse error" in err


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "classify", tmp_path / "nope.alg")
    assert code == 2


def test_truncation_too_small_exit_3(capsys):
    code, _, err = run(capsys, "classify", DATA / "trunc4.alg", "--maxdeg", 3)
    assert code == 3 and "truncation" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["enumerate"],
        ["classify", str(DATA / "trunc3.alg"), "--maxdeg", "0"],
        ["verify", str(DATA / "trunc3_qq.ainf"), "--morphism", "x.mor"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as ei:
        cli.main(argv)
    assert ei.value.code == 2
    capsys.readouterr()


def test_stdin_input(capsys, monkeypatch):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO("field GF 2\ngens x\nrel x^3\nmaxdeg 6\n"))
    code, out, _ = run(capsys, "classify", "-")
    assert code == 0 and "verdict: 3-Koszul up to degree 6" in out


@pytest.mark.skipif(shutil.which("bikoszul") is None, reason="console script not installed")
def test_console_script_deterministic():
    cmd = ["bikoszul", "enumerate", "--d", "6"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"arities d=6: {2, 3, 4, 6, 7}")
