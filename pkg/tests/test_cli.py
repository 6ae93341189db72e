"""Command line: exit codes, JSON reports, file roundtrips and suite determinism."""
import io as sio
import json
import subprocess
import sys
from pathlib import Path

import pytest

from hsw import io
from hsw.cli import dispatch
from hsw.graded import GradedLinearMap, GradedVectorSpace
from hsw.lie2 import CrossedModule, GradedLieAlgebra
from hsw.linalg import Matrix, q
from hsw.mc import MCElement
from hsw.random_instances import abelian_cm

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


@pytest.fixture(scope="module")
def ex(tmp_path_factory):
    d = tmp_path_factory.mktemp("examples")
    subprocess.run([sys.executable, str(SCRIPTS / "make_examples.py"), str(d)], check=True)
    return d


def run(*argv):
    out, err = sio.StringIO(), sio.StringIO()
    code = dispatch([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


# passing commands

@pytest.mark.parametrize("argv", [
    ("lie2", "check", "cm.json"),
    ("lie2", "dgla", "cm.json"),
    ("mc", "check", "mc.json"),
    ("mc", "lp", "mc.json"),
    ("grpd", "check", "groupoid.json"),
    ("grpd", "cohomology", "groupoid.json"),
    ("grpd", "partition-inverse", "cover.json"),
    ("vb", "check", "vb.json"),
    ("vb", "bridge", "equivalence.json"),
    ("rep", "check", "module.json"),
])
def test_examples_pass(ex, argv):
    code, out, _ = run(argv[0], argv[1], ex / argv[2], *argv[3:])
    assert code == 0, out
    assert out.startswith(f"PASS {argv[0]} {argv[1]}")


def test_qp_cartan_json():
    code, out, _ = run("qp", "cartan", "--algebra", "sl2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "pass"
    assert "cartan" in doc["result"]


def test_qp_amm_on_points(ex):
    code, out, _ = run("qp", "amm", "--algebra", ex / "sl2.json", "--points", ex / "points.json", "--rank",
                       "--nondeg", "--check")
    assert code == 0, out


# violations

def test_mc_violation_exit_1(tmp_path):
    cm = abelian_cm({2: 1}, {1: 1, 2: 1}, {2: Matrix([[1]])})
    io.write(tmp_path / "bad.json", "mc", MCElement(cm, {(2, 0): q(3)}, {(1, 0): q(1)}))
    code, out, _ = run("mc", "check", tmp_path / "bad.json", "--format", "json")
    assert code == 1
    assert json.loads(out)["findings"][0]["tag"] == "mc-curvature"


def test_gauge_not_nilpotent_exit_1(tmp_path):
    # adjoint crossed module of [x, y] = y with x in degree 0 and y in degree 1
    V = GradedVectorSpace.of({0: 1, 1: 1})
    L = GradedLieAlgebra.from_upper(V, {((0, 0), (1, 0)): {(1, 0): 1}})
    cm = CrossedModule(L, L, GradedLinearMap.identity(V), dict(L.table))
    io.write(tmp_path / "m.json", "mc", MCElement(cm, {}, {(1, 0): q(1)}))
    # dgla degree 0 is A_1 + G_0; x sits in the second slot
    io.write(tmp_path / "b.json", "element", {(0, 1): q(1)})
    code, out, _ = run("mc", "gauge", tmp_path / "m.json", "--b", tmp_path / "b.json", "--nilpotency", 4)
    assert code == 1
    assert "NotNilpotent" in out


# usage and input errors

@pytest.mark.parametrize("argv", [
    ("bogus",),
    ("mc", "nope", "x.json"),
    ("suite", "nonexistent"),
    ("qp", "amm"),
])
def test_usage_errors_exit_2(argv):
    code, _, err = run(*argv)
    assert code == 2
    assert "schema" in err


def test_wrong_kind_exit_2(ex):
    code, _, err = run("grpd", "check", ex / "mc.json")
    assert code == 2 and "input error" in err


def test_float_rejected_outside_qp(ex):
    code, _, _ = run("mc", "check", ex / "mc.json", "--scalar", "float")
    assert code == 2


# files and reports

def test_twist_output_roundtrip(ex, tmp_path):
    out_file = tmp_path / "twisted.json"
    code, _, _ = run("mc", "twist", ex / "mc.json", "--T", ex / "T.json", "-o", out_file)
    assert code == 0
    assert run("mc", "check", out_file)[0] == 0
    m = io.read(out_file, "mc")
    io.write(tmp_path / "again.json", "mc", m)
    assert (tmp_path / "again.json").read_text() == out_file.read_text()


def test_suite_is_deterministic():
    a = run("suite", "core_algebra", "--count", 3, "--format", "json")
    b = run("suite", "core_algebra", "--count", 3, "--format", "json")
    assert a[0] == 0 and a[1] == b[1]
    assert "elapsed_s" not in a[1] and "timing_s" not in a[1]


def test_timing_flag_adds_elapsed():
    code, out, _ = run("suite", "core_algebra", "--count", 2, "--format", "json", "--timing")
    doc = json.loads(out)
    assert code == 0 and "timing_s" in doc and "elapsed_s" in doc["result"]["suites"][0]


def test_color(monkeypatch, ex):
    monkeypatch.setenv("HSW_COLOR", "1")
    assert run("grpd", "check", ex / "groupoid.json")[1].startswith("\033[32mPASS")
    monkeypatch.setenv("HSW_COLOR", "0")
    assert run("grpd", "check", ex / "groupoid.json")[1].startswith("PASS")


def test_console_script_entry_point(ex):
    r = subprocess.run([sys.executable, "-m", "hsw.cli", "grpd", "check", str(ex / "groupoid.json")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("PASS")
