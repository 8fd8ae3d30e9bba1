import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from renewalkit.experiment_cli import (
    EXIT_BUDGET,
    EXIT_OK,
    EXIT_SPEC,
    EXIT_VERDICT,
    load_schema,
    main,
    parse_spec,
)
from renewalkit.errors import SpecInvalid

SPECS = Path(__file__).resolve().parents[1] / "specs"


def write_spec(tmp_path, raw, name="spec.json"):
    raw = dict(raw, output={"dir": "out"})
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return p


def load(name):
    return json.loads((SPECS / name).read_text())


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_print_schema_is_valid_draft(capsys):
    code, out = run(["print-schema"], capsys)
    assert code == EXIT_OK
    schema = json.loads(out)
    jsonschema.Draft202012Validator.check_schema(schema)
    assert schema == load_schema()


def test_all_shipped_specs_validate():
    for p in sorted(SPECS.glob("*.json")):
        parse_spec(json.loads(p.read_text()), SPECS)


def test_decompose_pm1(tmp_path, capsys):
    spec = write_spec(tmp_path, load("decompose_pm1.json"))
    code, out = run(["run", spec], capsys)
    assert code == EXIT_OK
    summary = json.loads(out)["summary"]
    assert (summary["r"], summary["nu"], summary["q"]) == (1, 1, 2)
    dec = json.loads((tmp_path / "out" / "decompose.json").read_text())
    assert dec["decomposition"]["q"] == 2


def test_density_gaussian_csv(tmp_path, capsys):
    raw = load("density_gauss_d2.json")
    raw["params"]["extent"] = 3
    spec = write_spec(tmp_path, raw)
    code, _ = run(["run", spec], capsys)
    assert code == EXIT_OK
    info = json.loads((tmp_path / "out" / "density.json").read_text())
    assert info["reference_max_abs_error"] < 1e-6
    with open(tmp_path / "out" / "density.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["x0", "x1", "psi", "reference"]
    assert max(abs(float(r["psi"]) - float(r["reference"])) for r in rows) < 1e-6


def test_manifest_digests_and_replay(tmp_path, capsys):
    spec = write_spec(tmp_path, load("renewal_pareto_mc.json"))
    code, _ = run(["run", spec], capsys)
    assert code == EXIT_OK
    manifest = tmp_path / "out" / "manifest.json"
    m = json.loads(manifest.read_text())
    assert m["stochastic"] and m["exit_code"] == 0 and m["outputs"]
    for e in m["outputs"]:
        assert len(e["sha256"]) == 64
    code, out = run(["replay", manifest], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK and rep["digests_ok"] and rep["rerun"] == "identical"


def test_replay_other_seed_is_non_comparable(tmp_path, capsys):
    spec = write_spec(tmp_path, load("renewal_pareto_mc.json"))
    run(["run", spec], capsys)
    code, out = run(["replay", tmp_path / "out" / "manifest.json", "--seed", "99"], capsys)
    rep = json.loads(out)
    assert code == EXIT_OK and rep["rerun"] == "non_comparable" and rep["ok"]


def test_corrupted_artifact_names_file(tmp_path, capsys):
    spec = write_spec(tmp_path, load("renewal_pareto_mc.json"))
    run(["run", spec], capsys)
    target = tmp_path / "out" / "renewal.csv"
    data = bytearray(target.read_bytes())
    data[-2] = ord("7") if data[-2] != ord("7") else ord("3")
    target.write_bytes(bytes(data))
    code, out = run(["replay", tmp_path / "out" / "manifest.json", "--no-rerun"], capsys)
    rep = json.loads(out)
    assert code == EXIT_VERDICT
    assert rep["error"] == "digest_mismatch" and rep["path"].endswith("renewal.csv")


def test_workers_do_not_change_bytes(tmp_path, capsys):
    raw = load("ldp_pareto_mc.json")
    digests = []
    for w in (1, 3):
        spec = write_spec(tmp_path, raw, f"spec{w}.json")
        code, _ = run(["run", spec, "--workers", w, "--out", tmp_path / f"w{w}"], capsys)
        assert code == EXIT_OK
        m = json.loads((tmp_path / f"w{w}" / "manifest.json").read_text())
        digests.append({e["path"]: e["sha256"] for e in m["outputs"]})
    assert digests[0] == digests[1]


def test_spec_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": "renewal", "seed": 0, "output": {"dir": "o"}}))
    assert run(["run", bad], capsys)[0] == EXIT_SPEC
    bad.write_text("{not json")
    assert run(["run", bad], capsys)[0] == EXIT_SPEC
    bad.write_text(json.dumps({"scenario": "nope", "seed": 0, "output": {"dir": "o"}}))
    assert run(["run", bad], capsys)[0] == EXIT_SPEC
    assert run(["run", tmp_path / "missing.json"], capsys)[0] == EXIT_SPEC
    with pytest.raises(SpecInvalid):
        parse_spec({"scenario": "density", "seed": -1, "output": {"dir": "o"}})


def test_budget_exit_3_keeps_manifest(tmp_path, capsys):
    raw = load("renewal_pareto_mc.json")
    raw["budget"] = {"max_samples": 10}
    spec = write_spec(tmp_path, raw)
    code, _ = run(["run", spec], capsys)
    assert code == EXIT_BUDGET
    m = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert m["status"] == "budget_exceeded" and m["exit_code"] == EXIT_BUDGET


def test_verdict_failure_exit_4(tmp_path, capsys):
    raw = load("renewal_pareto_mc.json")
    raw["params"]["max_rel_error"] = 1e-9
    spec = write_spec(tmp_path, raw)
    assert run(["run", spec], capsys)[0] == EXIT_VERDICT


def test_console_script(tmp_path):
    spec = write_spec(tmp_path, load("decompose_pm1.json"))
    exe = shutil.which("renewalkit")
    cmd = [exe] if exe else [sys.executable, "-m", "renewalkit.cli"]
    res = subprocess.run(cmd + ["run", str(spec)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["status"] == "ok"
