import json
import subprocess
import sys

import pytest

from ldl.cli import main
from ldl.netio import DenseNetwork, save_network
from support import CORPUS

ROB = f"{CORPUS}/robustness2d.ldl"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    save_network(DenseNetwork.identity(2), tmp_path / "id.net")
    ctx = {
        "samplers": {"x": {"kind": "empirical", "points": [[0.05, 0.0]]}},
        "bindings": {"eps": 0.1, "delta": 0.01, "xhat": [0.0, 0.0]},
    }
    (tmp_path / "toy.ctx").write_text(json.dumps(ctx))
    return tmp_path


def test_check_ok(capsys):
    code, out, _ = run(capsys, "check", f"{CORPUS}/robustness.ldl")
    assert code == 0
    assert "Real -> Real -> Vec 784 -> Bool" in out


def test_check_type_error(capsys, tmp_path):
    p = tmp_path / "bad.ldl"
    p.write_text("network f : Vec 784 -> Vec 10\nlet p : Vec 784 -> Bool = lam (x : Vec 784) . x ! 800 <= 1.0\n")
    code, _, err = run(capsys, "check", str(p))
    assert code == 2 and "800" in err
    code, _, err = run(capsys, "--json-errors", "check", str(p))
    e = json.loads(err)
    assert code == 2 and e["error"] == "IndexOutOfRange" and e["line"] == 2


def test_check_parse_error(capsys, tmp_path):
    p = tmp_path / "bad.ldl"
    p.write_text("let p : Bool = 1.0 <=")
    code, _, err = run(capsys, "check", str(p), "--json-errors")
    assert code == 1 and json.loads(err)["exit"] == 1


def test_missing_file(capsys):
    code, _, err = run(capsys, "check", "/nonexistent/spec.ldl")
    assert code == 3 and "No such file" in err


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eval"])
    assert exc.value.code == 5


def test_eval_toy_instance(capsys, files):
    code, out, _ = run(capsys, "eval", ROB, "--ctx", str(files / "toy.ctx"), "--net", str(files / "id.net"), "--logic", "dl2")
    assert code == 0
    assert abs(float(out) - 3e-6) <= 1e-12


def test_eval_satisfied_instance(capsys, files):
    args = ["eval", ROB, "--ctx", str(files / "toy.ctx"), "--net", f"f={files / 'id.net'}", "--arg", "delta=0.2"]
    code, out, _ = run(capsys, *args, "--logic", "dl2")
    assert code == 0 and float(out) == 0.0
    code, out, _ = run(capsys, *args, "--logic", "godel")
    assert code == 0 and 0.0 <= float(out) <= 1.0


def test_eval_trace(capsys, files):
    code, _, err = run(capsys, "eval", ROB, "--ctx", str(files / "toy.ctx"), "--net", str(files / "id.net"), "--trace")
    assert code == 0 and "forall" in err


def test_eval_errors(capsys, files):
    code, _, err = run(capsys, "eval", ROB, "--ctx", str(files / "toy.ctx"))
    assert code == 4 and "no network" in err
    save_network(DenseNetwork.identity(3), files / "three.net")
    code, _, _ = run(capsys, "eval", ROB, "--ctx", str(files / "toy.ctx"), "--net", str(files / "three.net"))
    assert code == 4


def test_compile_is_deterministic(capsys, tmp_path):
    code, out, _ = run(capsys, "compile", ROB, "--logic", "godel")
    assert code == 0
    code, _, _ = run(capsys, "compile", ROB, "--logic", "godel", "-o", str(tmp_path / "g.jsonl"))
    assert code == 0 and (tmp_path / "g.jsonl").read_text() == out
    assert json.loads(out.splitlines()[0])["format"] == "ldl-graph"


def test_compile_dl2_negation_error(capsys, tmp_path):
    p = tmp_path / "n.ldl"
    p.write_text("let p : Bool -> Bool = lam (b : Bool) . not b\n")
    code, _, err = run(capsys, "compile", str(p), "--logic", "dl2")
    assert code == 4 and "negation" in err


def test_props_structured(capsys):
    code, out, _ = run(capsys, "props", "--logic", "godel", "--property", "idempotence", "--trials", "200", "--report", "structured")
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    assert rows[0]["logic"] == "godel" and rows[0]["verdict"] == "holds"


def test_train_report(capsys, tmp_path):
    from ldl.netio import save_dataset
    from ldl.trainer import make_synthetic_dataset

    save_network(DenseNetwork.identity(2, "softmax"), tmp_path / "n.net")
    save_dataset(make_synthetic_dataset(0, 30, 1.0), tmp_path / "d.csv")
    (tmp_path / "t.ctx").write_text(json.dumps({"bindings": {"eps": 0.5, "delta": 0.05}}))
    code, _, _ = run(
        capsys, "train", "--spec", ROB, "--net", str(tmp_path / "n.net"), "--data", str(tmp_path / "d.csv"),
        "--ctx", str(tmp_path / "t.ctx"), "--logic", "godel", "--epochs", "2", "--eval-samples", "10",
        "--perturbation", "0.5", "--report", str(tmp_path / "r.jsonl"), "--save-net", str(tmp_path / "out.net"),
    )
    assert code == 0
    rows = [json.loads(line) for line in (tmp_path / "r.jsonl").read_text().splitlines()]
    assert [r["epoch"] for r in rows] == [1, 2]
    assert (tmp_path / "out.net").exists()


def test_console_script_exit_code():
    r = subprocess.run([sys.executable, "-m", "ldl.cli", "check", "/nonexistent.ldl"], capture_output=True)
    assert r.returncode == 3
