import json
import subprocess
import sys
from fractions import Fraction

import pytest

from almostosc.cli import main, run_check, run_classify, run_simulate, verify_example
from almostosc.equation import trajectory_to_csv
from almostosc.specfile import load_bundled

BALANCED_SPEC = """\
r = "1"
q = "1"
e = "1"
c = "0"
k = 0
gamma = "1"
alpha = "3"
horizon = 200
[init]
x = [1, 1]
"""


def cli(*args):
    return subprocess.run([sys.executable, "-m", "almostosc", *args], capture_output=True, text=True)


def rows(csv_text):
    lines = csv_text.splitlines()
    assert lines[0] == "n,x,z,dz,qd"
    return [line.split(",") for line in lines[1:]]


def test_simulate_example1_alternates():
    out = cli("simulate", "example1", "--n", "60")
    assert out.returncode == 0, out.stderr
    table = rows(out.stdout)
    assert [int(row[0]) for row in table] == list(range(1, 62))
    assert all(Fraction(row[1]) == (-1) ** (int(row[0]) + 1) for row in table)
    assert "residual self-check" in out.stderr


def test_simulate_example3_closed_form():
    out = cli("simulate", "example3", "--n", "50")
    assert out.returncode == 0, out.stderr
    assert all(Fraction(row[1]) == Fraction(1, int(row[0]) + 1) for row in rows(out.stdout))


def test_simulate_matches_library(tmp_path):
    dest = tmp_path / "traj.csv"
    out = cli("simulate", "example2", "--n", "40", "--out", str(dest))
    assert out.returncode == 0
    assert out.stdout == ""
    assert dest.read_text() == trajectory_to_csv(run_simulate(load_bundled("example2"), 40))


def test_simulate_undefined_cells_blank():
    table = rows(cli("simulate", "example2", "--n", "10").stdout)
    # k = 2: z starts at n0 + k, dz and qd stop at N
    assert table[0][2] == "" and table[2][2] != ""
    assert table[-1][3] == "" and table[-2][3] != ""


@pytest.mark.parametrize("name,tag", [
    ("example1", "XOscillatoryEvidence"),
    ("example2", "DeltaXOscillatoryEvidence"),
    ("example3", "TendsToZeroEvidence"),
])
def test_classify_tags(name, tag):
    out = cli("classify", name, "--n", "400")
    assert out.returncode == 0, out.stderr
    doc = json.loads(out.stdout)
    assert doc["tag"] == tag
    assert set(doc["reports"]) == {"x_oscillation", "dx_oscillation", "tends_to_zero"}
    assert out.stdout == run_classify(load_bundled(name), 400).to_json()


def test_check_example1_divergent():
    out = cli("check", "example1", "--n", "1000")
    assert out.returncode == 0, out.stderr
    doc = json.loads(out.stdout)
    assert doc["s1"]["verdict"] == "DivergentEvidence"
    assert doc["s2"]["verdict"] == "DivergentEvidence"
    assert doc["summary"].endswith(": yes")
    assert doc == run_check(load_bundled("example1"), 1000)
    assert "yes" in out.stderr


def test_check_balanced_is_bounded(tmp_path):
    path = tmp_path / "balanced.toml"
    path.write_text(BALANCED_SPEC)
    doc = json.loads(cli("check", str(path)).stdout)
    assert doc["s1"]["verdict"] == "BoundedEvidence"
    assert doc["summary"].endswith(": no")


def test_check_overrides(tmp_path):
    path = tmp_path / "balanced.toml"
    path.write_text(BALANCED_SPEC)
    out = tmp_path / "check.json"
    assert main(["check", str(path), "--n", "50", "--d", "2", "--m", "3", "--p", "n", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["s1"]["meta"]["p"] == "n"
    assert doc["s1"]["meta"]["d"] == 2.0
    assert doc["s2"]["plus"]["meta"]["M"] == 3.0
    assert doc["s1"]["meta"]["defaulted"] == ["R"]


def test_check_rejects_equal_exponents(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(BALANCED_SPEC.replace('alpha = "3"', 'alpha = "1"'))
    out = cli("check", str(path))
    assert out.returncode == 2
    assert "alpha > gamma" in out.stderr


def test_missing_init_is_input_error(tmp_path):
    path = tmp_path / "noinit.toml"
    path.write_text(BALANCED_SPEC.split("[init]")[0])
    out = cli("simulate", str(path))
    assert out.returncode == 2
    assert "init" in out.stderr


def test_unknown_key_is_input_error(tmp_path):
    path = tmp_path / "typo.toml"
    path.write_text("gama = \"3\"\n" + BALANCED_SPEC)
    out = cli("classify", str(path))
    assert out.returncode == 2
    assert "gama" in out.stderr


def test_bad_expression_is_input_error(tmp_path):
    path = tmp_path / "expr.toml"
    path.write_text(BALANCED_SPEC.replace('r = "1"', 'r = "2 + * n"'))
    assert cli("simulate", str(path)).returncode == 2


def test_missing_file_is_input_error():
    assert cli("simulate", "/nonexistent/spec.toml").returncode == 2


def test_float_overflow_is_failure():
    # the neutral extraction in example 3 is unstable in floating point
    out = cli("simulate", "example3", "--mode", "float", "--n", "200")
    assert out.returncode == 1
    assert "overflow" in out.stderr


@pytest.mark.parametrize("name", ["example1", "example2", "example3"])
def test_verify_example(name):
    out = cli("verify-example", name, "--n", "100")
    assert out.returncode == 0, out.stderr
    assert "residual exactly 0" in out.stdout
    assert out.stdout.strip() == verify_example(name, 100).message


def test_verify_example_unknown_name():
    assert cli("verify-example", "example9").returncode == 2


def test_nonpositive_horizon():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "example1", "--n", "0"])
    assert exc.value.code == 2


def test_check_takes_defaults_from_solution():
    # x_n = 1/(n+1) is positive and decreasing: d = min z, M = (tail min x)^3
    doc = run_check(load_bundled("example3"), 200)
    assert doc["s1"]["meta"]["d"] == pytest.approx(1 / 201 + 2 / 200)
    assert doc["s2"]["plus"]["meta"]["M"] == pytest.approx(1 / 202 ** 3)
    # z alternates in sign for example 1, so d falls back to 1
    assert run_check(load_bundled("example1"), 50)["s1"]["meta"]["d"] == 1.0
