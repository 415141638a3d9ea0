import copy
import json
from pathlib import Path

import numpy as np
import pytest

from qbridge.cli import main
from qbridge.config import parse_spec
from qbridge.experiment import prior_intermediate_state, prior_joint

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def load(name):
    return json.loads((CONFIGS / name).read_text())


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(tmp_path, command, config, *extra, out="out.json"):
    target = tmp_path / out
    code = main([command, "--config", config, "--out", str(target), *extra])
    return code, target


def test_solve_writes_checks_and_result(tmp_path):
    code, out = run(tmp_path, "solve", str(CONFIGS / "amplitude_damping.json"))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["passed"] and all(c["pass"] for c in doc["checks"])
    assert doc["result"]["kl"] > 0


def test_zero_kl_when_targets_match_prior(tmp_path):
    doc = load("amplitude_damping.json")
    pm = prior_joint(parse_spec(doc))
    doc["experiment"]["alpha_tilde"] = pm.alpha.tolist()
    doc["experiment"]["beta_tilde"] = pm.beta.tolist()
    code, out = run(tmp_path, "solve", write(tmp_path, doc))
    assert code == 0
    assert abs(json.loads(out.read_text())["result"]["kl"]) <= 1e-14


def test_degenerate_prior_is_an_input_error(tmp_path):
    code, _ = run(tmp_path, "solve", str(CONFIGS / "degenerate_prior.json"))
    assert code == 1


def test_bad_json_and_schema(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(tmp_path, "solve", str(bad))[0] == 1
    doc = load("amplitude_damping.json")
    doc["schema_version"] = "99"
    assert run(tmp_path, "solve", write(tmp_path, doc))[0] == 1
    assert run(tmp_path, "solve", str(tmp_path / "missing.json"))[0] == 1
    assert main(["solve"]) == 1


def test_numerical_failure_exit_code(tmp_path):
    code, _ = run(tmp_path, "solve", str(CONFIGS / "shared_basis.json"), "--max-iter", "1")
    assert code == 2


def test_intermediate_csv_layout(tmp_path):
    code, out = run(tmp_path, "intermediate", str(CONFIGS / "amplitude_damping.json"), out="a.csv")
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "tau,prior_p0,prior_p1,bridge_p0,bridge_p1"
    assert len(lines) == 102
    row = np.array(lines[1].split(","), dtype=float)
    assert row[1] + row[2] == pytest.approx(1.0, abs=1e-12)


def test_simulate_is_byte_identical_across_workers(tmp_path):
    cfg = str(CONFIGS / "sanov.json")
    _, one = run(tmp_path, "simulate", cfg, "--workers", "1", out="one.json")
    _, four = run(tmp_path, "simulate", cfg, "--workers", "4", out="four.json")
    assert one.read_bytes() == four.read_bytes()


def test_simulate_zero_trials(tmp_path):
    doc = load("sanov.json")
    doc["simulate"]["trials"] = 0
    code, out = run(tmp_path, "simulate", write(tmp_path, doc))
    assert code == 0
    sample = json.loads(out.read_text())["result"]["prior_sample"]
    assert sample["n_trials"] == 0 and np.sum(sample["counts"]) == 0


def test_verify_round_trip(tmp_path):
    _, out = run(tmp_path, "solve", str(CONFIGS / "amplitude_damping.json"))
    assert main(["verify", "--result", str(out)]) == 0
    doc = json.loads(out.read_text())
    tampered = copy.deepcopy(doc)
    tampered["checks"][0]["pass"] = False
    path = write(tmp_path, tampered, "tampered.json")
    assert main(["verify", "--result", path]) == 2


def test_anomalous_weak_value(tmp_path):
    code, out = run(tmp_path, "weak", str(CONFIGS / "anomalous_weak.json"))
    assert code == 0
    res = json.loads(out.read_text())["result"]
    assert res["weak_values"]["0,0"] == pytest.approx(-3.7320508075688772, abs=1e-10)


def test_eigenstate_weak_values(tmp_path):
    code, out = run(tmp_path, "weak", str(CONFIGS / "eigenstate_weak.json"))
    assert code == 0
    res = json.loads(out.read_text())["result"]
    assert res["weak_values"]["0,0"] == pytest.approx(1.0, abs=1e-12)
    assert res["weak_values"]["1,1"] == pytest.approx(-1.0, abs=1e-12)
    assert res["weak_values"]["0,1"] is None


def test_prior_flat_in_tau_without_damping():
    doc = load("amplitude_damping.json")
    doc["experiment"]["channel"] = {"amplitude_damping": {"gamma": 1e-12}}
    spec = parse_spec(doc)
    curve = np.stack([prior_intermediate_state(spec.at_tau(t)).probs for t in (0.1, 0.5, 0.9)])
    assert np.abs(curve - curve[0]).max() <= 1e-10
