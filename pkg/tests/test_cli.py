import json
import math
import shutil
import subprocess

import pytest

from flatcrit.cli import main


def run(args, tmp_path):
    rep = tmp_path / "report.json"
    code = main(list(args) + ["--report", str(rep)])
    return code, (json.loads(rep.read_text()) if rep.exists() else None)


def test_criterion_torus(tmp_path, capsys):
    code, rep = run(["criterion", "--surface", "torus.tsf", "--T", "5"], tmp_path)
    assert code == 0
    assert abs(rep["outputs"]["integral"] - (1 - math.exp(-10)) / 2) < 1e-9
    assert "integral = 0.4999773" in capsys.readouterr().out
    assert rep["units"]["integral"] and rep["parameters"]["T"] == 5


def test_broken_surface_exit_2(tmp_path, capsys):
    bad = tmp_path / "broken.tsf"
    bad.write_text("[field]\nD = 0\n[polygon P]\n0, 0\n1, 0\n1, 2\n0, 1\n[gluing]\nP.0 <-> P.2\nP.1 <-> P.3\n")
    code, rep = run(["validate", "--surface", str(bad)], tmp_path)
    assert code == 2
    assert "holonomy mismatch polygon P edge 2" in capsys.readouterr().err
    assert rep["exit_code"] == 2


def test_missing_file_exit_2(tmp_path):
    code, _ = run(["area", "--surface", str(tmp_path / "nope.tsf")], tmp_path)
    assert code == 2


def test_precondition_exit_3(tmp_path):
    code, rep = run(["criterion", "--surface", "torus.tsf", "--T", "-1"], tmp_path)
    assert code == 3 and "positive" in rep["error"]
    code, _ = run(["criterion", "--surface", "chamanara-5.tsf", "--T", "1"], tmp_path)
    assert code == 3


def test_systole_curve_csv(tmp_path):
    out = tmp_path / "curve.csv"
    code, _ = run(["systole-curve", "--surface", "octagon.tsf", "--T", "3", "--out", str(out)], tmp_path)
    assert code == 0
    assert out.read_text().splitlines()[0] == "t,delta_prime,d_prime,integral_to_t"


def test_seed_is_mandatory(tmp_path):
    for cmd in (["birkhoff", "--surface", "torus.tsf", "--direction", "1,1", "--T", "5"],
                ["equidist", "--surface", "torus.tsf", "--direction", "1,1", "--T", "5"],
                ["escape", "--level", "3", "--T", "5"]):
        with pytest.raises(SystemExit) as exc:
            main(cmd)
        assert exc.value.code == 2


def test_threads_independent(tmp_path):
    base = ["escape", "--level", "4", "--T", "50", "--samples", "200", "--seed", "3"]
    _, r1 = run(base, tmp_path)
    _, r2 = run(base + ["--threads", "2"], tmp_path)
    assert r1["outputs"] == r2["outputs"]


def test_veech_verify_commands(tmp_path):
    code, rep = run(["veech-verify", "--surface", "octagon.tsf", "--cert", "octagon-shear.cert"], tmp_path)
    assert code == 0 and rep["outputs"]["passed"] is True
    code, rep = run(["veech-verify", "--surface", "chamanara-5.tsf", "--cert", "chamanara-baker.cert"], tmp_path)
    assert code == 0 and rep["outputs"]["passed"] and rep["outputs"]["truncated_segments"] > 0 and rep["warnings"]


def test_chamanara_writes_verifiable_files(tmp_path):
    surf, cert = tmp_path / "c.tsf", tmp_path / "c.cert"
    code, _ = run(["chamanara", "--level", "4", "--out", str(surf), "--cert-out", str(cert)], tmp_path)
    assert code == 0
    code, rep = run(["veech-verify", "--surface", str(surf), "--cert", str(cert)], tmp_path)
    assert rep["outputs"]["passed"]


def test_other_commands_run(tmp_path):
    cmds = [
        ["area", "--surface", "octagon.tsf"],
        ["saddle", "--surface", "octagon.tsf", "--L", "1.01", "--out", str(tmp_path / "sc.csv")],
        ["cheung-eskin", "--surface", "torus.tsf", "--T", "10"],
        ["recurrence", "--gen", "1/2,0,0,2", "--times", "0:2:5", "--word-bound", "2"],
        ["flow", "--surface", "torus.tsf", "--start", "T:1/3,1/5", "--direction", "1,2", "--length", "4"],
        ["birkhoff", "--surface", "torus.tsf", "--direction", "1,1/2+1/2*sqrt(5)", "--T", "100", "--seed", "1"],
        ["equidist", "--surface", "torus.tsf", "--direction", "1,1/2+1/2*sqrt(5)", "--T", "100", "--seed", "1"],
    ]
    for c in cmds:
        code, rep = run(c, tmp_path)
        assert code == 0, (c, rep)
    code, rep = run(cmds[1], tmp_path)
    assert rep["outputs"]["count"] == 8


def test_thm12_command(tmp_path):
    prof = tmp_path / "p.csv"
    rows = ["t,eps,C,sumD,delta"] + [f"{k / 100},0.1,1,1,1" for k in range(1001)]
    prof.write_text("\n".join(rows) + "\n")
    code, rep = run(["thm12", "--profile", str(prof)], tmp_path)
    assert code == 0 and abs(rep["outputs"]["integral"] - 1e-3) < 1e-9
    prof.write_text("t,eps\n0,1\n")
    assert run(["thm12", "--profile", str(prof)], tmp_path)[0] == 2


def test_plot_determinism_and_errors(tmp_path):
    csv = tmp_path / "s.csv"
    csv.write_text("t,delta_prime,d_prime,integral_to_t\n0,1,0,0\n1,0.5,0.69,0.4\n2,0.25,1.38,0.45\n")
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run(["plot", "--csv", str(csv), "--kind", "systole", "--out", str(a)], tmp_path)[0] == 0
    assert run(["plot", "--csv", str(csv), "--kind", "systole", "--out", str(b)], tmp_path)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    svg = a.read_text()
    assert svg.count("<polyline") == 1
    assert len(svg.split('points="')[1].split('"')[0].split()) == 3
    empty = tmp_path / "e.csv"
    empty.write_text("t,delta_prime,d_prime,integral_to_t\n")
    code, rep = run(["plot", "--csv", str(empty), "--kind", "systole", "--out", str(tmp_path / "e.svg")], tmp_path)
    assert code == 2 and rep["error"] == "no rows"
    code, _ = run(["plot", "--csv", str(csv), "--kind", "recurrence", "--out", str(tmp_path / "x.svg")], tmp_path)
    assert code == 2


@pytest.mark.skipif(shutil.which("flatcrit") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["flatcrit", "area", "--surface", "torus.tsf", "--report", str(tmp_path / "r.json")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "area = 1" in res.stdout
