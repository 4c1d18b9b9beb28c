import json
from pathlib import Path

import jsonschema
import pytest

from liyorke import metrics as M
from liyorke.analysis import AnalysisConfig
from liyorke.cli import main
from liyorke.report import (
    csv_rows,
    load_schema,
    parse_csv,
    run_analysis,
    theorem_report,
    to_csv,
    to_json,
)
from liyorke.harness import run_theorem_suite
from liyorke.systems import doubling_map

ROOT = Path(__file__).resolve().parents[1]


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list(capsys):
    code, out, _ = _run(capsys, "list")
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("doubling "))
    assert "weakly_mixing" in line
    code, out, _ = _run(capsys, "list", "--metrics")
    assert "spillover" in out
    code, out, _ = _run(capsys, "list", "--json")
    names = [d["name"] for d in json.loads(out)]
    assert names == ["rotation", "doubling", "product-doubling-2", "product-rotation-2", "hybrid-0.5"]


def test_analyze_doubling(capsys):
    code, out, _ = _run(capsys, "analyze", "--system", "doubling", "--metric", "circle",
                        "--pairs", "10000", "--seed", "7", "--threads", "4")
    doc = json.loads(out)
    assert code == 0 and doc["results"]["density"]["value"] >= 0.99
    jsonschema.validate(doc, load_schema())


def test_analyze_rotation_and_product(capsys):
    _, out, _ = _run(capsys, "analyze", "--system", "rotation", "--metric", "circle",
                     "--horizon", "1000")
    assert json.loads(out)["results"]["density"]["value"] == 0.0
    _, out, _ = _run(capsys, "analyze", "--system", "product-doubling-2", "--metric",
                     "sum-circle", "--horizon", "1000", "--pairs", "4000")
    assert abs(json.loads(out)["results"]["density"]["value"] - 0.5) < 0.03


def test_analyze_usage_errors(capsys):
    code, _, err = _run(capsys, "analyze", "--system", "tent", "--metric", "circle")
    assert code == 2 and "tent" in err
    code, _, err = _run(capsys, "analyze", "--system", "doubling", "--metric", "hamming")
    assert code == 2
    code, _, err = _run(capsys, "analyze", "--system", "doubling", "--metric", "circle",
                        "--eps", "0.1", "--delta", "0.1")
    assert code == 2 and "eps" in err
    code, _, _ = _run(capsys, "analyze", "--system", "doubling", "--metric", "circle",
                      "--sections", "density,plots")
    assert code == 2
    with pytest.raises(SystemExit) as e:
        main(["analyze", "--system", "doubling"])
    assert e.value.code == 2


def test_analyze_all_sections_csv_json_agree(tmp_path):
    cfg = AnalysisConfig(horizon=1000, pairs=200, seed=2)
    doc = run_analysis(doubling_map(), M.circle_arc(), cfg,
                       sections=["density", "profile", "coverage", "scrambled", "score"],
                       profile_points=2, target=4, budget=50, wm_samples=10_000, wm_horizon=8)
    jsonschema.validate(doc, load_schema())
    back = parse_csv(to_csv(doc))
    rows = csv_rows(json.loads(to_json(doc)))
    assert len(back) == len(rows)
    for parsed, (_, stat, value, hw, _) in zip(back, rows):
        assert parsed["statistic"] == stat
        assert parsed["value"] == value and type(parsed["value"]) is type(value)
        assert parsed["half_width"] == (None if hw == "" else hw)
    assert set(doc["timings"]) == set(doc["results"])


def test_float_repr_round_trip():
    doc = {"kind": "analysis", "metric": {"name": "circle"},
           "results": {"density": {"value": 0.1 + 0.2, "half_width": 1 / 3}}}
    row = parse_csv(to_csv(doc))[0]
    assert row["value"] == 0.1 + 0.2 and row["half_width"] == 1 / 3


def test_theorems_cli(tmp_path, capsys):
    out = tmp_path / "t.json"
    code, _, err = _run(capsys, "theorems", "--scale", "quick", "--seed", "7", "--out", str(out))
    assert code == 0 and "8/8" in err
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, load_schema())
    assert doc["schema"] == 1 and doc["summary"]["failed"] == []


def test_theorems_override_exit_one(capsys):
    code, _, err = _run(capsys, "theorems", "--scale", "quick", "--metric-override", "discrete",
                        "--out", "/dev/null")
    assert code == 1
    assert "failed: TC1" in err


def test_theorems_csv(tmp_path):
    checks = run_theorem_suite(7, "quick", only=["TC3", "TC8"])
    doc = theorem_report(checks, 7, "quick")
    rows = parse_csv(to_csv(doc))
    assert {r["check_id/metric"] for r in rows} == {"TC3", "TC8"}
    assert all(r["verdict"] == "PASS" for r in rows)
    spread = next(r for r in rows if r["check_id/metric"] == "TC8" and r["statistic"] == "max_spread")
    assert spread["value"] == checks[1].evidence["max_spread"]


def test_published_schema_matches_package():
    assert json.loads((ROOT / "docs" / "report.schema.json").read_text()) == load_schema()
    jsonschema.Draft202012Validator.check_schema(load_schema())


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "liyorke", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "doubling" in r.stdout
