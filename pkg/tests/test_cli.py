import json
import subprocess
import sys
from pathlib import Path

import pytest

from mvquad.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(p)


def test_synthesize_step(capsys):
    code, out, _ = run(capsys, "synthesize", "--config", str(CONFIGS / "step.json"))
    assert code == 0
    rule = json.loads(out)
    assert set(rule) == {"nodes", "weights", "target", "residual", "reduced", "total_mass"}
    assert len(rule["nodes"]) == 2 and rule["reduced"] is False
    assert rule["weights"] == pytest.approx([0.5, 0.5], abs=1e-6)


def test_integrate_moments(capsys):
    code, out, _ = run(capsys, "integrate", "--config", str(CONFIGS / "moments.json"))
    assert code == 0
    assert json.loads(out)["target"] == pytest.approx([0.5, 1 / 3, 0.25], abs=1e-9)


def test_negative_tolerance(capsys, tmp_path):
    cfg = write(tmp_path, "bad.json", {"domain": {"type": "interval", "a": 0, "b": 1},
                                       "functions": ["t"], "tolerance": -1})
    code, out, err = run(capsys, "synthesize", "--config", cfg)
    assert code == 2 and out == "" and "config error" in err


def test_parse_error_position(capsys, tmp_path):
    cfg = write(tmp_path, "bad.json", {"domain": {"type": "interval", "a": 0, "b": 1},
                                       "functions": ["t + * 2"]})
    code, _, err = run(capsys, "synthesize", "--config", cfg)
    assert code == 2 and "position 4" in err


def test_malformed_json(capsys, tmp_path):
    code, _, _ = run(capsys, "integrate", "--config", write(tmp_path, "bad.json", "{not json"))
    assert code == 2


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["synthesize"])
    assert info.value.code == 2


def test_numerical_failure_exit_one(capsys, tmp_path):
    cfg = write(tmp_path, "log.json", {"domain": {"type": "interval", "a": -1, "b": 1},
                                       "functions": ["log(t)"]})
    code, _, err = run(capsys, "synthesize", "--config", cfg)
    assert code == 1 and "integrate" in err


def test_synthesize_then_verify(capsys, tmp_path):
    for name in ["moments.json", "circle.json", "step.json", "discrete.json"]:
        rule = str(tmp_path / f"{name}.rule")
        assert run(capsys, "synthesize", "--config", str(CONFIGS / name), "--output", rule)[0] == 0
        code, out, _ = run(capsys, "verify", "--config", str(CONFIGS / name), "--rule", rule)
        assert code == 0 and json.loads(out)["passed"], name


def test_unnormalized_flag(capsys, tmp_path):
    rule = str(tmp_path / "r.json")
    assert run(capsys, "synthesize", "--config", str(CONFIGS / "step.json"),
               "--unnormalized", "--output", rule)[0] == 0
    data = json.loads(Path(rule).read_text())
    assert sum(data["weights"]) == pytest.approx(2.0, abs=1e-12)
    assert data["total_mass"] == pytest.approx(2.0)
    code, out, _ = run(capsys, "verify", "--config", str(CONFIGS / "step.json"), "--rule", rule)
    assert code == 0


def test_verify_rejects_tampered_rule(capsys, tmp_path):
    rule = str(tmp_path / "r.json")
    run(capsys, "synthesize", "--config", str(CONFIGS / "moments.json"), "--output", rule)
    data = json.loads(Path(rule).read_text())
    data["weights"][0] += 1e-3
    Path(rule).write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", "--config", str(CONFIGS / "moments.json"), "--rule", rule)
    assert code == 1 and not json.loads(out)["passed"]


def test_trace_goes_to_stderr(capsys):
    code, out, err = run(capsys, "synthesize", "--config", str(CONFIGS / "circle.json"), "--trace")
    assert code == 0
    json.loads(out)
    lines = [json.loads(x) for x in err.splitlines() if x.startswith("{")]
    assert lines


@pytest.mark.parametrize("prop,extra", [("markov", ["--epsilon", "0.5"]), ("hull", []),
                                        ("fap", ["--trials", "50"])])
def test_check(capsys, prop, extra):
    name = "discrete.json" if prop == "fap" else "moments.json"
    code, out, _ = run(capsys, "check", "--config", str(CONFIGS / name), "--property", prop, *extra)
    assert code == 0 and json.loads(out)["passed"]


def test_bit_identical_stdout(capsys):
    outs = [run(capsys, "synthesize", "--config", str(CONFIGS / "circle.json"))[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mvquad", "integrate", "--config",
                           str(CONFIGS / "moments.json")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["total_mass"] == 1.0
