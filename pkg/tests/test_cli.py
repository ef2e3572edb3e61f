import json
from pathlib import Path

import pytest

from singlab.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main
from singlab.config import RunConfig, format_config, parse_config
from singlab.runio import read_snapshot

SMALL = """scenario = "monotone_ladder"
grid.n = 1
grid.N = 16
operator.s = 0.5
physics.gamma = 2.0
physics.T = 0.1
physics.tau = 1e-3
ladder.k = [1, 2, 4, 8]
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    cfg = write_cfg(tmp, SMALL)
    out = tmp / "run"
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_OK
    return tmp, cfg, out


def test_run_layout(small_run):
    _, _, out = small_run
    labels = sorted(p.name for p in (out / "snapshots").iterdir())
    assert labels == ["k1", "k2", "k4", "k8"]
    for label in labels:
        u, meta = read_snapshot(out / "snapshots" / label / "m00100.f64")
        assert u.shape == (15,) and meta["m"] == 100 and meta["t"] == pytest.approx(0.1)
    for rel in ("verdicts.csv", "diagnostics/k8.csv", "plots/norms.svg", "plots/increments.svg"):
        assert (out / rel).is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["scenario"] == "monotone_ladder" and manifest["passed"]
    assert all((out / rel).is_file() for rel in manifest["files"])


def test_manifest_config_round_trip(small_run):
    _, cfg, out = small_run
    manifest = json.loads((out / "manifest.json").read_text())
    restored = RunConfig.from_dict(manifest["config"])
    assert restored == parse_config(Path(cfg).read_text())
    assert format_config(restored) == format_config(parse_config(Path(cfg).read_text()))


def test_rerun_is_bit_identical(small_run, tmp_path):
    _, cfg, out = small_run
    again = tmp_path / "again"
    assert main(["run", "--config", cfg, "--out", str(again)]) == EXIT_OK
    first = sorted(p.relative_to(out) for p in out.rglob("*") if p.is_file())
    second = sorted(p.relative_to(again) for p in again.rglob("*") if p.is_file())
    assert first == second
    for rel in first:
        assert (out / rel).read_bytes() == (again / rel).read_bytes(), rel


def test_report(small_run, capsys):
    _, _, out = small_run
    assert main(["report", str(out)]) == EXIT_OK
    captured = capsys.readouterr()
    assert "scenario monotone_ladder: PASS" in captured.out
    assert "ladder order" in captured.out and captured.err == ""


def test_report_flags_tampered_csv(small_run, tmp_path, capsys):
    import shutil

    _, _, out = small_run
    copy = tmp_path / "copy"
    shutil.copytree(out, copy)
    with open(copy / "diagnostics" / "k1.csv", "a") as fh:
        fh.write("999,0,0,0,0,0\n")
    (copy / "plots" / "norms.svg").unlink()
    assert main(["report", str(copy)]) == EXIT_OK
    err = capsys.readouterr().err
    assert "row-count mismatch in diagnostics/k1.csv" in err
    assert "missing file plots/norms.svg" in err


def test_report_errors(tmp_path, capsys):
    assert main(["report", str(tmp_path)]) == EXIT_CONFIG
    (tmp_path / "manifest.json").write_text("{not json")
    assert main(["report", str(tmp_path)]) == EXIT_CONFIG
    assert "corrupt manifest" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("grid.n = 1\n", "missing required key 'grid.N'"),
        ('scenario = "monotone_ladders"\ngrid.n = 1\ngrid.N = 8\n', "available: aronson_serrin"),
        ("grid.n = 1\ngrid.N = 8\nparams.nope = 1\n", "run.cfg:3: scenario 'monotone_ladder' does not take params.nope"),
        ('scenario = "structure_checks"\ngrid.n = 1\ngrid.N = 8\nphysics.T = 1.0\n', "run.cfg:4:"),
        ('grid.n = 1\ngrid.N = 8\nphysics.f = "no_such_preset"\n', "no_such_preset"),
    ],
)
def test_run_config_errors(tmp_path, capsys, text, fragment):
    assert main(["run", "--config", write_cfg(tmp_path, text), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert fragment in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_run_without_config_and_bad_flags(tmp_path):
    assert main(["run"]) == EXIT_CONFIG
    assert main(["run", "--config", write_cfg(tmp_path, SMALL), "--threads", "0"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG


def test_failed_check_exit_code(tmp_path):
    text = SMALL.replace('"monotone_ladder"', '"bounded_data"').replace("physics.gamma = 2.0", "physics.gamma = 0.5")
    text += "params.plateau_tol = 1e-12\n"
    assert main(["run", "--config", write_cfg(tmp_path, text), "--out", str(tmp_path / "o")]) == EXIT_FAIL
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["passed"] is False


def test_exponents_verb(capsys):
    assert main(["exponents", "--n", "3", "--gamma", "1/2", "--m", "1", "--format", "json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["m_bar"]["exact"] == "20/17" and data["q_bar"]["exact"] == "5/3"
    assert main(["exponents", "--n", "3", "--gamma", "1/2", "--r", "inf", "--q", "inf"]) == EXIT_OK
    assert "aronson_serrin" in capsys.readouterr().out
    assert main(["exponents", "--n", "2", "--gamma", "1/2"]) == EXIT_CONFIG


def test_oracle_verb(capsys):
    assert main(["oracle", "--N", "128"]) == EXIT_OK
    assert "max rel. error" in capsys.readouterr().out
    assert main(["oracle", "--N", "16", "--tol", "1e-12"]) == EXIT_FAIL
