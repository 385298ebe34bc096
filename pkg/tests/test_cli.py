import json

import pytest

from parsim.cli import main
from parsim.system_model import random_model, s1, save_model


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_fixture_and_file(tmp_path, capsys):
    code, out, _ = _run(capsys, "validate", "S1")
    assert code == 0 and json.loads(out)["passed"]
    save_model(random_model(2, 1, 1, rng=0), tmp_path / "m.json")
    assert _run(capsys, "validate", tmp_path / "m.json")[0] == 0


def test_validate_unstable_exit_3(tmp_path, capsys):
    doc = s1().to_dict()
    doc["A"] = [[1.5]]
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    code, out, _ = _run(capsys, "validate", tmp_path / "bad.json")
    assert code == 3
    assert not json.loads(out)["passed"]


def test_unknown_fixture_exit_3(capsys):
    assert _run(capsys, "validate", "nope")[0] == 3


def test_simulate_identify_roundtrip(tmp_path, capsys):
    save_model(s1(), tmp_path / "truth.json")
    data = tmp_path / "traj.npz"
    assert _run(capsys, "simulate", "--length", 5000, "--seed", 3, "--out", data)[0] == 0
    code, out, _ = _run(capsys, "identify", "--data", data, "--n-x", 1, "--p", 2, "--f", 3,
                        "--truth", tmp_path / "truth.json", "--out", tmp_path / "est.json")
    assert code == 0
    doc = json.loads(out)
    assert max(doc["aligned_errors"].values()) < 0.1
    assert doc["A"][0][0] == pytest.approx(0.5, abs=0.1)
    est = json.loads((tmp_path / "est.json").read_text())
    assert est["realization"]["p"] == 2


def test_identify_pe_failure_exit_2(tmp_path, capsys):
    data = tmp_path / "traj.npz"
    _run(capsys, "simulate", "--length", 300, "--noiseless", "--sigma-e", 0, "--out", data)
    code, _, err = _run(capsys, "identify", "--data", data, "--n-x", 1, "--p", 2, "--f", 3)
    assert code == 2 and "excitation" in err


def test_bounds_json(capsys):
    code, out, _ = _run(capsys, "bounds", "--p", 2, "--f", 3, "--N", 10 ** 6)
    assert code == 0
    reps = json.loads(out)
    assert [r["i"] for r in reps] == [1, 2, 3]
    assert reps[0]["constants_used"] == {"c": 1.0, "c0": 1.0}


def test_sweep_and_report(tmp_path, capsys):
    cfg = {"model": "S1", "f": 3, "p_rule": 2, "N_grid": [300, 600], "trials": 2}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    code, out, _ = _run(capsys, "sweep", tmp_path / "cfg.json", "--out", out_dir)
    assert code == 0 and "wrote 4 rows" in out
    assert (out_dir / "rows.csv").exists() and (out_dir / "summary.json").exists()
    code, out, _ = _run(capsys, "report", out_dir)
    assert code == 0 and "4 rows, 0 failed" in out and "slope[err_theta_max]" in out


def test_sweep_bad_config_exit_3(tmp_path, capsys):
    (tmp_path / "cfg.json").write_text(json.dumps({"N_grid": [500, 100]}))
    assert _run(capsys, "sweep", tmp_path / "cfg.json")[0] == 3
    (tmp_path / "junk.json").write_text("{not json")
    assert _run(capsys, "sweep", tmp_path / "junk.json")[0] == 3


def test_sweep_all_failed_exit_2(tmp_path, capsys):
    cfg = {"N_grid": [4], "trials": 1, "p_rule": 2}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    code, _, err = _run(capsys, "sweep", tmp_path / "cfg.json", "--out", tmp_path / "o")
    assert code == 2 and "N=4" in err


def test_malformed_model_file_exit_3(tmp_path, capsys):
    (tmp_path / "junk.json").write_text("{oops")
    assert _run(capsys, "validate", tmp_path / "junk.json")[0] == 3
    (tmp_path / "partial.json").write_text('{"A": [[0.5]]}')
    code, _, err = _run(capsys, "validate", tmp_path / "partial.json")
    assert code == 3 and "lacks key" in err
