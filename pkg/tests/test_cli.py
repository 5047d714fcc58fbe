import json
import subprocess
import sys

import jsonschema
import pytest

from ilwb.cli import main
from ilwb.corpus import data_text, load_schema


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def check(name, text):
    data = json.loads(text)
    jsonschema.validate(data, load_schema(name))
    return data


@pytest.fixture
def files(tmp_path):
    p2 = tmp_path / "p2.json"
    p2.write_text(json.dumps({"size": 3, "relations": {"E": [[0, 1], [1, 0], [1, 2], [2, 1]]}}))
    chain = tmp_path / "chain.json"
    chain.write_text(json.dumps({"size": 3, "relations": {"L": [[0, 1], [0, 2], [1, 2]]}}))
    interp = tmp_path / "complete.json"
    interp.write_text(data_text("complete_graph.json"))
    bad = tmp_path / "bad.thy"
    bad.write_text("language { E/2; }\ntheory {\n  axiom forall x. F(x) => false;\n}\n")
    return {"p2": str(p2), "chain": str(chain), "interp": str(interp), "bad": str(bad)}


def test_check_theory(capsys):
    code, out, _ = run(capsys, "check-theory", "graph")
    data = check("check_theory", out)
    assert code == 0 and data["axioms"] == 2 and data["coherent"] and not data["decidable"]


def test_check_theory_reports_parse_errors(capsys, files):
    code, _, err = run(capsys, "check-theory", files["bad"])
    assert code == 2 and "F" in err


def test_models(capsys):
    code, out, _ = run(capsys, "models", "--theory", "graph", "--cap", "2")
    data = check("models", out)
    assert code == 0 and data["count"] == 4
    for M in data["models"]:
        jsonschema.validate(M, load_schema("model"))


def test_eval(capsys, files):
    code, out, _ = run(capsys, "eval", "--theory", "graph", "--model", files["p2"], "--formula", "exists y. E(x, y)")
    data = check("eval", out)
    assert code == 0 and data["tuples"] == [[0], [1], [2]] and data["variables"] == ["x"]


def test_eval_bad_formula(capsys, files):
    code, _, _ = run(capsys, "eval", "--theory", "graph", "--model", files["p2"], "--formula", "E(x")
    assert code == 2


def test_morleyize(capsys):
    code, out, _ = run(capsys, "morleyize", "--theory", "graph", "--formula", "exists y. E(x, y)")
    data = check("morleyize", out)
    assert code == 0 and data["fragment_size"] == len(data["index"])
    assert all(name.startswith("R_") for name in data["index"])


def test_interp_apply(capsys, files):
    code, out, _ = run(capsys, "interp-apply", "--interp", files["interp"], "--model", files["chain"])
    data = check("interp_apply", out)
    assert code == 0 and data["satisfies_source_theory"]
    assert len(data["model"]["relations"]["E"]) == 6
    check("interpretation", data_text("complete_graph.json"))


def test_interp_apply_rejects_non_models(capsys, files, tmp_path):
    code, _, err = run(capsys, "interp-apply", "--interp", files["interp"], "--model", files["p2"])
    assert code == 2 and "E" in err
    cycle = tmp_path / "cycle.json"
    cycle.write_text(json.dumps({"size": 2, "relations": {"L": [[0, 1], [1, 0]]}}))
    code, _, err = run(capsys, "interp-apply", "--interp", files["interp"], "--model", str(cycle))
    assert code == 1 and "target theory" in err


def test_define_synth_orbits(capsys):
    code, out, _ = run(capsys, "define-synth", "--theory", "decidable_graph", "--cap", "2")
    data = check("define_synth", out)
    assert code == 0 and len(data["orbits"]) == 3


def test_define_synth_points(capsys, tmp_path):
    pts = tmp_path / "pts.json"
    pts.write_text("[[3, 0], [3, 1]]")
    code, out, _ = run(capsys, "define-synth", "--theory", "decidable_graph", "--cap", "2", "--points", str(pts))
    data = check("define_synth", out)
    assert code == 0 and sorted(data["points"]) == [[3, 0], [3, 1]]
    pts.write_text("[[3, 0]]")
    code, _, err = run(capsys, "define-synth", "--theory", "decidable_graph", "--cap", "2", "--points", str(pts))
    assert code == 1 and "invariant" in err


def test_groupoid_dump(capsys):
    code, out, _ = run(capsys, "groupoid-dump", "--theory", "graph", "--cap", "2", "--with-action")
    data = check("groupoid_dump", out)
    assert code == 0 and len(data["objects"]) == 4 and len(data["morphisms"]) == 6


def test_big_caps_need_the_flag(capsys):
    code, _, err = run(capsys, "models", "--theory", "graph", "--cap", "5")
    assert code == 2 and "--i-know-this-is-big" in err


def test_budget_exit_code(capsys):
    code, _, _ = run(capsys, "groupoid-dump", "--theory", "graph", "--cap", "3", "--budget", "10")
    assert code == 3


def test_usage_errors(capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "models", "--theory", "no-such-theory")[0] == 2


def test_verify_text_and_json(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--suite", "groupoid", "--cap", "2", "--format", "text")
    assert code == 0 and out.strip().endswith("0 failed")
    target = tmp_path / "report.json"
    code, _, _ = run(capsys, "verify", "--suite", "morley", "--cap", "2", "--out", str(target))
    data = check("verify", target.read_text())
    assert code == 0 and data["failed"] == 0


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "ilwb.cli", "models", "--theory", "graph", "--cap", "1"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["count"] == 2
