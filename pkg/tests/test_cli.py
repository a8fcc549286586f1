import json
import math
import os
import subprocess
import sys

import pytest

from chiral_rabi.cli import main, read_csv_table
from chiral_rabi.model import ModelParams

INLINE = ["--Omega", "1", "--Delta", "0.5", "--lambda", "0.3"]


@pytest.fixture
def model(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(ModelParams.chiral3(1.0, 0.5, 0.3, math.pi / 6).to_json())
    return str(path)


def header_config(path):
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# chiral-rabi ")
    assert lines[1].startswith("# config: ")
    return json.loads(lines[1][len("# config: "):])


def test_spectrum_table(model, tmp_path):
    out = tmp_path / "spec.csv"
    assert main(["spectrum", "--model", model, "--nmax", "80", "--levels", "20", "--out", str(out)]) == 0
    rows = read_csv_table(out)
    assert len(rows) == 20
    assert list(rows[0]) == ["level_index", "E", "sector", "kind", "degeneracy_cluster"]
    cfg = header_config(out)
    assert cfg["nmax"] == 80 and cfg["model"]["phi"] == pytest.approx(math.pi / 6)


def test_spectrum_displaced_limit(tmp_path):
    out = tmp_path / "spec.csv"
    assert main(["spectrum", "--Omega", "1", "--Delta", "0", "--lambda", "0.3", "--nmax", "40",
                 "--levels", "12", "--out", str(out)]) == 0
    for i, row in enumerate(read_csv_table(out)):
        assert abs(float(row["E"]) - (i // 3 - 0.09)) < 1e-8
        assert row["kind"] == "exceptional" and row["degeneracy_cluster"] == "3"


def test_spectrum_json(model, capsys):
    assert main(["spectrum", "--model", model, "--nmax", "30", "--levels", "5", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["levels"]) == 5 and doc["config"]["command"] == "spectrum"


def test_truncation_warning(capsys):
    assert main(["spectrum", "--Omega", "1", "--Delta", "0.5", "--lambda", "1.5", "--nmax", "20",
                 "--levels", "15"]) == 0
    assert "warning" in capsys.readouterr().err


def test_malformed_model(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["spectrum", "--model", str(bad)]) == 2
    assert main(["spectrum", "--model", str(tmp_path / "missing.json")]) == 2


def test_conflicting_flags(model):
    assert main(["spectrum", "--model", model, "--Delta", "0.2"]) == 2
    assert main(["spectrum", "--Omega", "1"]) == 2


def test_cfroots_and_check(model, tmp_path):
    out = tmp_path / "cf.csv"
    spec = tmp_path / "spec.csv"
    assert main(["cfroots", "--model", model, "--range", "-1.5:3", "--out", str(out), "--curve"]) == 0
    for s in range(3):
        rows = read_csv_table(tmp_path / f"cf_s{s}.csv")
        assert list(rows[0]) == ["s", "E", "Re_F", "Im_F", "abs_S0", "flag"]
        assert {r["flag"] for r in rows} <= {"Regular", "NearPole", "NotConverged"}
    roots = json.loads((tmp_path / "cf_roots.json").read_text())
    assert {"s", "E", "residual", "bracket_lo", "bracket_hi"} <= set(roots["roots"][0])
    assert (tmp_path / "cf_curve.csv").exists()
    assert main(["spectrum", "--model", model, "--nmax", "80", "--levels", "12", "--out", str(spec)]) == 0
    assert main(["check", "--roots", str(tmp_path / "cf_roots.json"), "--spectrum", str(spec)]) == 0


def test_check_detects_mismatch(model, tmp_path):
    assert main(["cfroots", "--model", model, "--range", "-1.5:3", "--out", str(tmp_path / "cf.json"),
                 "--format", "json"]) == 0
    other = tmp_path / "other.csv"
    assert main(["spectrum", *INLINE, "--nmax", "60", "--levels", "12", "--out", str(other)]) == 0
    assert main(["check", "--roots", str(tmp_path / "cf.json"), "--spectrum", str(other)]) == 1


def test_cfroots_default_range(capsys):
    assert main(["cfroots", *INLINE, "--sector", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["roots"] and all(r["s"] == 1 for r in doc["roots"])
    assert doc["scan"]["1"]["inversions"] >= 3


@pytest.mark.parametrize("argv,code", [
    (["cfroots", "--N", "2", *INLINE], 3),
    (["cfroots", "--Omega", "1", "--Delta", "0.5", "--lambda", "0"], 3),
    (["cfroots", *INLINE, "--step", "0"], 2),
    (["cfroots", *INLINE, "--step", "-0.1"], 2),
    (["cfroots", *INLINE, "--range", "2:1"], 2),
])
def test_cfroots_errors(argv, code):
    assert main(argv) == code


def test_sweep_chirality(tmp_path):
    out = tmp_path / "flow.csv"
    assert main(["sweep", *INLINE, "--param", "phi", "--range", f"0:{2 * math.pi / 3}", "--points", "5",
                 "--nmax", "40", "--levels", "10", "--out", str(out)]) == 0
    rows = read_csv_table(out)
    assert list(rows[0]) == ["sweep_value", "level_index", "E", "sector"]
    by_x = {}
    for r in rows:
        by_x.setdefault(float(r["sweep_value"]), []).append(r)
    assert len(by_x) == 5
    # at phi = pi/6 the sector-1 and sector-2 levels differ
    mid = by_x[sorted(by_x)[1]]
    e1 = sorted(float(r["E"]) for r in mid if r["sector"] == "1")
    e2 = sorted(float(r["E"]) for r in mid if r["sector"] == "2")
    assert max(abs(a - b) for a, b in zip(e1, e2)) > 1e-3


def test_sweep_guides(tmp_path):
    out = tmp_path / "flow.csv"
    assert main(["sweep", *INLINE, "--param", "lambda", "--range", "0:1", "--points", "6", "--nmax", "30",
                 "--levels", "6", "--guides", "4", "--out", str(out)]) == 0
    guides = read_csv_table(tmp_path / "flow_guides.csv")
    assert len(guides) == 6 * 5
    for g in guides:
        lam, n = float(g["sweep_value"]), int(g["script_N"])
        assert abs(float(g["E_guide"]) - (n - lam ** 2)) < 1e-14


def test_sweep_empty_range():
    assert main(["sweep", *INLINE, "--param", "phi", "--range", "1:1"]) == 2


def test_exceptional_command(capsys):
    code = main(["exceptional", "--Omega", "1", "--Delta", "0.5", "--lambda", "0.2", "--scriptN", "1",
                 "--sweep", "Delta:0.3:0.6", "--nmax", "25", "--grid", "31"])
    assert code == 0
    res = json.loads(capsys.readouterr().out)["result"]
    assert res["gap"] < 1e-6 and res["param"] == "Delta"
    assert main(["exceptional", *INLINE, "--scriptN", "1", "--sweep", "Delta:0.5:0.51", "--nmax", "20",
                 "--grid", "5"]) == 1


def test_converge_command(tmp_path):
    out = tmp_path / "conv.csv"
    assert main(["converge", *INLINE, "--nmax", "10,20,40", "--out", str(out)]) == 0
    rows = read_csv_table(out)
    assert list(rows[0]) == ["level_index", "n_max_10", "n_max_20", "n_max_40", "drift_last"]


def test_blocks_export(tmp_path):
    out = tmp_path / "blocks.csv"
    assert main(["blocks", *INLINE, "--nmax", "5", "--sector", "2", "--out", str(out)]) == 0
    rows = read_csv_table(out)
    assert {r["s"] for r in rows} == {"2"}
    assert main(["blocks", *INLINE, "--sector", "7"]) == 2


def test_deterministic_output(model, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["spectrum", "--model", model, "--nmax", "40", "--levels", "10", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    ja, jb = tmp_path / "a.json", tmp_path / "b.json"
    for p in (ja, jb):
        assert main(["cfroots", "--model", model, "--range", "-1:1", "--format", "json", "--out", str(p)]) == 0
    assert ja.read_bytes() == jb.read_bytes()


def test_module_entry_point_and_locale(model, tmp_path):
    out = tmp_path / "spec.csv"
    env = dict(os.environ, LC_ALL="de_DE.UTF-8", LC_NUMERIC="de_DE.UTF-8")
    proc = subprocess.run([sys.executable, "-m", "chiral_rabi", "spectrum", "--model", model,
                           "--nmax", "30", "--levels", "4", "--out", str(out)],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    for row in read_csv_table(out):
        float(row["E"])
        assert "," not in row["E"]


def test_argparse_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--nmax", "ten"])
    assert exc.value.code == 2
