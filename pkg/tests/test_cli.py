import json

import numpy as np
import pytest
from click.testing import CliRunner

from qvolume.cli import main
from qvolume.matio import write_matrix


@pytest.fixture()
def runner():
    return CliRunner()


def run_json(runner, args, env=None):
    r = runner.invoke(main, args, env=env, catch_exceptions=False)
    assert r.exit_code == 0, r.output
    return json.loads(r.stdout)


def test_ratio_json_schema(runner):
    d = run_json(runner, ["ratio", "--family", "bell_diagonal",
                          "--samples", "4e4", "--block-size", "4e3",
                          "--seed", "11"])
    assert list(d) == ["schema_version", "family", "sampler", "predicate",
                       "samples", "blocks", "ratio_mean", "ratio_sigma",
                       "seed", "chains", "wall_seconds"]
    assert d["schema_version"] == 1
    assert d["samples"] == 40000
    assert d["blocks"] == 10
    assert abs(d["ratio_mean"] - 0.5) < 0.05


def test_ratio_deterministic_apart_from_wall_time(runner, tmp_path):
    args = ["ratio", "--family", "bell_diagonal", "--samples", "3e4",
            "--block-size", "3e3", "--seed", "5"]
    a = run_json(runner, args)
    b = run_json(runner, args)
    a.pop("wall_seconds")
    b.pop("wall_seconds")
    assert a == b


def test_ratio_multiphase_per_phase(runner):
    d = run_json(runner, ["ratio", "--family", "bell_diagonal",
                          "--sampler", "multiphase", "--samples", "5e3",
                          "--reps", "4", "--seed", "2"])
    assert d["sampler"] == "multiphase"
    assert len(d["per_phase"]) == 4
    assert all(h[0] == 5000 for h in d["per_phase"])


def test_ratio_csv_block_rows(runner):
    r = runner.invoke(main, ["ratio", "--family", "bell_diagonal",
                             "--samples", "2e4", "--block-size", "5e3",
                             "--seed", "1", "--format", "csv"])
    assert r.exit_code == 0
    lines = r.stdout.strip().splitlines()
    assert lines[0].startswith("schema_version,family,sampler")
    assert lines[2] == "chain,block,fraction"
    rows = [ln.split(",") for ln in lines[3:]]
    assert len(rows) == 4
    fractions = [float(x[2]) for x in rows]
    summary = lines[1].split(",")
    assert float(summary[6]) == pytest.approx(np.mean(fractions))


def test_out_file_and_env_seed(runner, tmp_path):
    out = tmp_path / "r.json"
    r = runner.invoke(main, ["ratio", "--family", "bell_diagonal",
                             "--samples", "2e4", "--block-size", "5e3",
                             "--out", str(out)],
                      env={"QVOLUME_SEED": "77"})
    assert r.exit_code == 0
    d = json.loads(out.read_text())
    assert d["seed"] == 77


def test_config_file_with_flag_override(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("family=bell_diagonal\nsamples=2e4\nblock-size=5e3\n"
                   "seed=3\n# comment\n")
    a = run_json(runner, ["ratio", "--config", str(cfg)])
    assert a["seed"] == 3 and a["samples"] == 20000
    b = run_json(runner, ["ratio", "--config", str(cfg), "--seed", "4"])
    assert b["seed"] == 4


def test_config_file_unknown_key(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("family=bell_diagonal\nnope=1\n")
    r = runner.invoke(main, ["ratio", "--config", str(cfg)])
    assert r.exit_code == 1


def test_exit_codes(runner):
    r = runner.invoke(main, ["ratio", "--family", "not_a_family"])
    assert r.exit_code == 1
    r = runner.invoke(main, ["ratio", "--family", "bell_diagonal",
                             "--samples", "1e3", "--block-size", "1e3"])
    assert r.exit_code == 1  # fewer than two blocks: config error
    r = runner.invoke(main, ["ratio", "--family", "qubit_qutrit",
                             "--sampler", "multiphase", "--samples", "50",
                             "--reps", "3", "--seed", "1"])
    assert r.exit_code == 2  # repetitions starved below min hits


def test_bell_command_cg_body(runner):
    r = runner.invoke(main, ["bell", "--family", "bell_diagonal",
                             "--predicate", "cg-body", "--samples", "5e4",
                             "--block-size", "5e3", "--seed", "6"])
    assert r.exit_code == 0
    d = json.loads(r.stdout)
    assert d["predicate"] == "cg-body"
    assert d["config"]["family"] == "bell_diagonal"
    assert 0.01 < d["ratio_mean"] < 0.08


def test_bell_command_cg_scan(runner):
    r = runner.invoke(main, ["bell", "--family", "bell_diagonal",
                             "--predicate", "cg-scan", "--samples", "2e4",
                             "--block-size", "2e3", "--scan-settings", "200",
                             "--seed", "6"])
    assert r.exit_code == 0
    d = json.loads(r.stdout)
    assert d["config"]["scan_settings"] == 200
    assert 0 <= d["ratio_mean"] < 0.05


def test_scan_curve_csv(runner):
    r = runner.invoke(main, ["scan-curve", "--family", "bell_diagonal",
                             "--samples", "1e4", "--scan-settings", "64",
                             "--grid-points", "4", "--seed", "2"])
    assert r.exit_code == 0
    lines = r.stdout.strip().splitlines()
    assert lines[0] == "m,R_CG,R_CHSH,R_CG+CHSH"
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    ms = [row[0] for row in rows]
    assert ms == sorted(ms) and ms[-1] == 64
    for col in (1, 2, 3):
        vals = [row[col] for row in rows]
        assert vals == sorted(vals)  # nested prefixes: exactly monotone
    for row in rows:
        assert row[3] >= max(row[1], row[2])


def test_scan_curve_rejects_non_two_qubit(runner):
    r = runner.invoke(main, ["scan-curve", "--family", "qubit_qutrit",
                             "--samples", "1e3"])
    assert r.exit_code == 1


def test_check_psd(runner, tmp_path):
    good = tmp_path / "good.mat"
    write_matrix(good, np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex))
    d = run_json(runner, ["check-psd", str(good)])
    assert d["psd"] is True
    assert len(d["coefficients"]) == 5
    bad = tmp_path / "bad.mat"
    write_matrix(bad, np.diag([0.7, 0.4, 0.1, -0.2]).astype(complex))
    d = run_json(runner, ["check-psd", str(bad)])
    assert d["psd"] is False


def test_ppt_check(runner, tmp_path):
    psi = np.zeros(4)
    psi[0] = psi[3] = 1 / np.sqrt(2)
    ent = tmp_path / "bell.mat"
    write_matrix(ent, np.outer(psi, psi).astype(complex))
    d = run_json(runner, ["ppt-check", str(ent), "--na", "2", "--nb", "2"])
    assert d["ppt"] is False
    sep = tmp_path / "mixed.mat"
    write_matrix(sep, np.eye(6, dtype=complex) / 6)
    d = run_json(runner, ["ppt-check", str(sep), "--na", "2", "--nb", "3"])
    assert d["ppt"] is True
    r = runner.invoke(main, ["ppt-check", str(sep), "--na", "2", "--nb", "2"])
    assert r.exit_code == 1  # partition does not match the matrix


def test_basis_dump(runner):
    d = run_json(runner, ["basis-dump", "--family", "bell_diagonal"])
    assert d["d"] == 3 and d["n"] == 4
    assert d["scales"] == [0.5, 0.5, 0.5]
    g0 = np.array([[complex(z) for z in row] for row in d["generators"][0]])
    assert np.allclose(g0, g0.conj().T)
