from __future__ import annotations

import csv
import json

import pytest

from ncqft.cli import COLUMNS, main


def _run(tmp_path, command, config=None, *extra):
    args = [command, "--out", str(tmp_path / "out")]
    if config is not None:
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(config))
        args += ["--config", str(cfg)]
    return main(args + list(extra))


def _rows(tmp_path, command):
    with open(tmp_path / "out" / f"{command}.csv") as fh:
        return list(csv.DictReader(fh))


def _meta(tmp_path, command):
    return json.loads((tmp_path / "out" / f"{command}.meta.json").read_text())


def test_check_group_finite(tmp_path):
    assert _run(tmp_path, "check-group", {"group": {"eps": [0, 1, 2]}}) == 0
    rows = _rows(tmp_path, "check-group")
    assert list(rows[0]) == COLUMNS
    assert {r["quantity"] for r in rows} >= {"associativity_mismatches", "commutativity_mismatches"}
    meta = _meta(tmp_path, "check-group")
    assert meta["passed"] and meta["version"] and len(meta["config_hash"]) == 64


def test_check_group_continuum(tmp_path):
    cfg = {"group": {"model": "continuum", "d": 4, "eps": [0, 1.5]}}
    assert _run(tmp_path, "check-group", cfg) == 0


def test_config_errors_write_nothing(tmp_path):
    assert _run(tmp_path, "check-group", {"group": {"n": 4}}) == 2
    assert _run(tmp_path, "check-group", {"group": {"bogus": 1}}) == 2
    assert _run(tmp_path, "gauge-check", {"gauge": {"group": "O"}}) == 2
    assert _run(tmp_path, "check-group", None, "--threads", "-1") == 2
    assert not (tmp_path / "out").exists()


def test_plancherel_and_negative_control(tmp_path):
    assert _run(tmp_path, "plancherel", {"group": {"eps": [0, 1]}}) == 0
    assert _run(tmp_path, "plancherel", {"plancherel": {"corrupt_weights": True}}) == 1
    rows = _rows(tmp_path, "plancherel")
    assert any(float(r["rel_error"]) > 1e-3 for r in rows if r["quantity"] == "parseval_noncommutative")


def test_symbol_exp_and_mc_fallback(tmp_path):
    cfg = {"calculus": {"N": [8, 16], "fields": 1}}
    assert _run(tmp_path, "symbol-exp", cfg) == 0
    modes = {r["quantity"]: r["mode"] for r in _rows(tmp_path, "symbol-exp")}
    assert modes["action_chain_sum"] == "exact"
    cfg["calculus"]["budget"] = 100
    assert _run(tmp_path, "symbol-exp", cfg) == 0
    rows = _rows(tmp_path, "symbol-exp")
    mc = [r for r in rows if r["quantity"] == "action_chain_sum"][0]
    assert mc["mode"] == "mc" and float(mc["stderr"]) > 0


def test_classical_limit(tmp_path):
    cfg = {"group": {"model": "continuum", "n": 16, "h": 0.5, "eps": [1]},
           "classical": {"N": 32}}
    assert _run(tmp_path, "classical-limit", cfg) == 0
    assert "informational" in _meta(tmp_path, "classical-limit")
    cfg["weight"] = None
    assert _run(tmp_path, "classical-limit", cfg) == 2


def test_gauge_check_and_broken_control(tmp_path):
    cfg = {"gauge": {"m": [1, 2], "draws": 2}}
    assert _run(tmp_path, "gauge-check", cfg) == 0
    cfg["gauge"]["broken"] = True
    assert _run(tmp_path, "gauge-check", cfg) == 1


def test_partition_zero_action_and_determinism(tmp_path):
    cfg = {"partition": {"zero_action": True}, "sampler": {"M": [50]}}
    assert _run(tmp_path, "partition", cfg) == 0
    row = [r for r in _rows(tmp_path, "partition") if r["quantity"] == "W_J"][0]
    assert float(row["value_re"]) == 1.0 and float(row["value_im"]) == 0.0
    assert _meta(tmp_path, "partition")["status"] == "exploratory"
    cfg = {"sampler": {"M": [30]}}
    _run(tmp_path, "partition", cfg, "--seed", "4")
    a = [{k: v for k, v in r.items() if k != "runtime_ms"} for r in _rows(tmp_path, "partition")]
    _run(tmp_path, "partition", cfg, "--seed", "4")
    b = [{k: v for k, v in r.items() if k != "runtime_ms"} for r in _rows(tmp_path, "partition")]
    assert a == b


def test_budget_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("NCQ_BUDGET", "100")
    assert _run(tmp_path, "symbol-exp", {"calculus": {"N": [4], "fields": 1}}) == 0
    assert _meta(tmp_path, "symbol-exp")["budget"] == 100


def test_version_flag(capsys):
    with pytest.raises(SystemExit):
        main(["--version"])
    assert "0.1.0" in capsys.readouterr().out
