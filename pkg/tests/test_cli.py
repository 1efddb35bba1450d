import json
import subprocess
import sys

import pytest

from cartansplit.cli import ExperimentConfig, main, parse_config
from cartansplit.errors import ConfigParseError, ConfigValidationError

IDENTITY = {"map": {"zeta0": [[0, 0]]}}
DISC_CFG = {"domain": {"kind": "disc", "radius": 1.0}, "map": {"zeta0": [[0, 0], [0, 0], [1e-4, 0]]},
            "h": 1 / 64, "max_m": 4}


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    d = tmp_path / "out"
    monkeypatch.setenv("CARTANSPLIT_OUTPUT_DIR", str(d))
    return d


def test_defaults():
    cfg = parse_config("{}")
    assert cfg == ExperimentConfig()
    assert cfg.domain.kind == "ellipse" and cfg.strip == [-0.3, 0.3] and cfg.mode == "practical"


def test_round_trip():
    cfg = parse_config(json.dumps({"strip": [-0.2, 0.25], "mode": "certified", "zeta_count": 5}))
    again = parse_config(cfg.to_json())
    assert again == cfg


def test_strip_bounds_rejected():
    with pytest.raises(ConfigValidationError, match="strip bounds") as exc:
        parse_config('{"strip": [0.3, -0.3]}')
    assert exc.value.field == "strip"


@pytest.mark.parametrize("text,field", [('{"bogus": 1}', "config.bogus"), ('{"domain": {"kind": "square"}}', "domain.kind"),
                                        ('{"h": -1}', "h"), ('{"zeta_count": 1}', "zeta_count"),
                                        ('{"map": {"zeta0": [1, 2]}}', "map.zeta0")])
def test_validation_fields(text, field):
    with pytest.raises(ConfigValidationError) as exc:
        parse_config(text)
    assert exc.value.field == field


def test_malformed_json():
    with pytest.raises(ConfigParseError, match="line 2"):
        parse_config('{\n "h": }')


def test_split_identity(tmp_path, outdir, capsys):
    assert main(["split", "--config", write(tmp_path, IDENTITY)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["residual"] == 0 and out["steps"] == 0
    summary = json.loads((outdir / "split.json").read_text())
    assert summary["degree_ok"] and summary["constants"]["mode"] == "practical"
    assert (outdir / "trace.csv").read_text().startswith("m,R_m,eps_in")


def test_split_deterministic_and_table(tmp_path, outdir, capsys):
    path = write(tmp_path, DISC_CFG)
    assert main(["split", "--config", path]) == 0
    first = (outdir / "trace.csv").read_text()
    assert main(["split", "--config", path]) == 0
    assert (outdir / "trace.csv").read_text() == first
    capsys.readouterr()
    assert main(["table", "--trace", str(outdir / "trace.csv")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split()[0] == "m" and len(lines) == first.count("\n")


def test_error_record(tmp_path, outdir, capsys):
    code = main(["split", "--config", write(tmp_path, {"strip": [0.3, -0.3]})])
    assert code == 2
    rec = json.loads(capsys.readouterr().out)
    assert rec["error"] == "validation-error" and rec["field"] == "strip"
    code = main(["split", "--config", write(tmp_path, {"map": {"zeta0": [[0.5, 0]]}})])
    assert code == 3
    rec = json.loads(capsys.readouterr().out)
    assert rec["error"] == "aborted-with-trace"
    assert json.loads((outdir / "error.json").read_text()) == rec


def test_constants_command(tmp_path, capsys):
    assert main(["constants", "--config", write(tmp_path, {"mode": "certified"})]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["R0"] == rec["R0_formula"] and rec["eps_eta"] > 0
    assert rec["R_schedule"][1] == rec["R0"] / 8


def test_verify_suite(outdir, capsys):
    assert main(["verify", "--suite", "geometry"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert all(l.startswith("[PASS] geometry:") for l in out[:-1])
    assert main(["verify", "--suite", "nope"]) == 2


def test_sweep_identity_family(tmp_path, outdir, capsys):
    cfg = dict(IDENTITY, workers=2, domain={"kind": "disc", "drift": [0.0, 0.05]})
    assert main(["sweep", "--config", write(tmp_path, cfg)]) == 0
    report = json.loads((outdir / "family.json").read_text())
    assert len(report["members"]) == 11 and report["failed"] == []
    assert report["kappa"] == 0
    assert all(t[2] == 0 for t in report["moduli"]["alpha"])


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "cartansplit", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "verify" in res.stdout
