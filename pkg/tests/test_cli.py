import json
import subprocess
import sys

import pytest

from reticular.cli import main
from reticular.tangent import CAP_ENV


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_example(capsys):
    code, out, _ = run(capsys, "classify", "--germ", "y^2;y^3", "--n", "1")
    assert (code, out) == (0, "¹(⁰A₁⁰A₂)\n")
    code, out, _ = run(capsys, "classify", "--germ", "y^2;y^3", "--n", "1", "--ascii")
    assert out == "1(A1,A2)\n"


def test_classify_budget_reject(capsys):
    code, out, _ = run(capsys, "classify", "--germ", "y^3;y^3;y^2", "--n", "2")
    assert code == 1
    assert out.startswith("Reject(budget-exceeded)")


def test_classify_family_and_json(capsys):
    code, out, _ = run(capsys, "classify", "--family", "y^2 + t + q - z; y^3 + q*y - z", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["label"] == "1(A1,A2)" and data["config"]["subcommand"] == "classify"


def test_germ_from_file(tmp_path, capsys):
    f = tmp_path / "germ.txt"
    f.write_text("y^2\n\nx*y + y^3\n")
    code, out, _ = run(capsys, "classify", "--file", str(f), "--n", "2")
    assert (code, out) == (0, "¹(⁰A₁⁰C₃⁺)\n")


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["classify"],
    ["classify", "--germ", "y^+", "--n", "1"],
    ["classify", "--germ", "y^2", "--file", "x.txt"],
    ["codim", "--germ", "y^2 + w"],
    ["unfold", "--germ", "y^2;y^3"],
    ["front", "--out", "x"],
    ["front", "--family", "1(A1,A2)", "--slice", "q2", "--out", "x"],
    ["catalog", "--n", "3"],
])
def test_usage_errors_exit_2(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_syntax_error_shows_grammar_hint(capsys):
    _, _, err = run(capsys, "codim", "--germ", "y^2 + * y")
    assert "position" in err and "germ grammar" in err


def test_codim_and_determine(capsys):
    code, out, _ = run(capsys, "codim", "--germ", "x^2+y^3;y^2", "--json")
    data = json.loads(out)
    assert code == 0 and data["mu"] == [4, 1] and data["phi"][0] == ["x*y", "y", "x", "1"]
    code, out, _ = run(capsys, "determine", "--germ", "y^3")
    assert code == 0
    assert "determinacy order 3" in out and "l=2: false" in out and "l=3: true" in out


def test_jet_cap_env(capsys, monkeypatch):
    monkeypatch.setenv(CAP_ENV, "3")
    _, out, _ = run(capsys, "codim", "--germ", "y^5", "--json")
    assert json.loads(out)["config"]["options"]["cap"] == 3
    assert json.loads(out)["mu"] == ["inf"]
    monkeypatch.delenv(CAP_ENV)
    _, out, _ = run(capsys, "codim", "--germ", "y^5", "--json")
    assert json.loads(out)["mu"] == [4]


def test_unfold(capsys):
    code, out, _ = run(capsys, "unfold", "--germ", "y^2;y^3", "--n", "1")
    assert code == 0 and "family: y^2 + t + q - z; y^3 + q*y - z" in out and "stable: yes" in out
    code, out, _ = run(capsys, "unfold", "--germ", "y^2;y^2;y^2", "--n", "2", "--codim", "1", "--signs=++")
    assert code == 1
    assert "-+" in out and "--" in out


def test_catalog_listing(capsys, tmp_path):
    code, out, _ = run(capsys, "catalog", "--n", "1", "--out", str(tmp_path))
    assert code == 0 and len(out.splitlines()) == 9
    assert (tmp_path / "catalog_n1.tsv").read_text() == out
    assert (tmp_path / "manifest.json").exists()


def test_catalog_verify_n1(capsys):
    code, out, _ = run(capsys, "catalog", "--n", "1", "--verify")
    assert code == 0
    assert "5/5 catalog lines pass in every sign variant" in out


def test_catalog_verify_n2_reports_the_unstable_rows(capsys):
    code, out, _ = run(capsys, "catalog", "--n", "2", "--verify", "--no-minimal")
    # two sign variants of the triple fold line are not stable
    assert code == 1
    assert "14/15 catalog lines pass in every sign variant" in out
    fails = [line for line in out.splitlines() if line.startswith("FAIL")]
    assert len(fails) == 2 and all("1(A1,A1,A1)" in line for line in fails)


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_front_outputs_are_reproducible(tmp_path, capsys):
    argv = ["front", "--family", "1(A1,A2)", "--grid", "201"]
    code, out, _ = run(capsys, *argv, "--out", str(tmp_path / "a"))
    assert code == 0
    run(capsys, *argv, "--out", str(tmp_path / "b"))
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert set(a) == {"1_A1_A2_p_t0.svg", "1_A1_A2_p_t1.svg", "1_A1_A2_p_t2.svg", "1_A1_A2_p_filmstrip.svg",
                      "1_A1_A2_p.csv", "1_A1_A2_p_events.json", "1_A1_A2_p_report.txt", "manifest.json"}
    for name in a:
        if name != "manifest.json":
            assert a[name] == b[name], name
    ma, mb = json.loads(a["manifest.json"]), json.loads(b["manifest.json"])
    assert ma["files"] == mb["files"]
    assert ma["options"]["grid"] == 201 and ma["options"]["t_values"] == [-0.5, 0.0, 0.5]
    assert "F1/F2: 0 crossing(s)" in out and "F1/F2: 2 crossing(s)" in out


def test_front_manifest_reruns(tmp_path, capsys):
    run(capsys, "front", "--family", "1(A1,A1)", "--frames", "2", "--grid", "101", "--out", str(tmp_path / "a"))
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    argv = list(manifest["argv"])
    argv[argv.index("--out") + 1] = str(tmp_path / "b")
    assert main(argv) == 0
    capsys.readouterr()
    again = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert again["files"] == manifest["files"]


def test_front_slice_and_signs(tmp_path, capsys):
    code, out, _ = run(capsys, "front", "--family", "1_B2_B2", "--n", "2", "--signs=+", "--slice", "q2=-1/10",
                       "--grid", "401", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "1_B2_B2_p_q2_m1d10_filmstrip.svg").exists()
    assert "F1/F2: 1 crossing(s)" in out and "F1/F2: 2 crossing(s)" in out


def test_front_inline_family(tmp_path, capsys):
    code, _, _ = run(capsys, "front", "--family", "y^2 + t + q^2 - z; y^2 - z", "--frames", "1", "--grid", "51",
                     "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "1_A1_A1_0_t0.svg").exists()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "reticular", "classify", "--germ", "y^2;x^2", "--n", "1", "--ascii"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "1(A1,B2)\n"
