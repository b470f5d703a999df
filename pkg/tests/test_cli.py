"""Command-line contract: exit codes, JSON payloads, replay stability."""

import json

import numpy as np
import pytest

from orliczmax.cli import main
from orliczmax.grid import read_grid


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_young_eval(capsys):
    code, out, err = run(capsys, "young", "eval", "--phi",
                         '{"kind": "power", "r": 2.0}', "--at", "1,2,3")
    assert code == 0
    d = json.loads(out)
    assert d["values"] == [1.0, 4.0, 9.0]
    assert d["run_config"]["command"] == "young"


def test_bp_check_flagship(capsys):
    phi = '{"kind": "power_log", "alpha": 2.0, "beta": 1.5}'
    code, out, _ = run(capsys, "bp", "check", "--phi", phi, "--p", "2", "--mode", "bp")
    assert code == 0
    assert json.loads(out)["verdict"]["label"] == "Converges"
    code, out, _ = run(capsys, "bp", "check", "--phi", phi, "--p", "2",
                       "--n", "2", "--mode", "bp_star")
    assert code == 0
    assert json.loads(out)["verdict"]["label"] == "Diverges"


def test_replay_is_byte_identical(capsys):
    args = ("bp", "check", "--phi", '{"kind": "power", "r": 1.5}', "--p", "2")
    _, out1, _ = run(capsys, *args)
    _, out2, _ = run(capsys, *args)
    assert out1 == out2


def test_gen_then_maximal_fixed_point(capsys, tmp_path):
    src = str(tmp_path / "ones.grid")
    dst = str(tmp_path / "m.grid")
    code, _, _ = run(capsys, "gen", "--kind", "ones", "--shape", "12,12",
                     "--out", src)
    assert code == 0
    code, out, _ = run(capsys, "maximal", "--input", src, "--basis", "rect",
                       "--out", dst)
    assert code == 0
    m = read_grid(dst)
    assert np.all(m.values == 1.0)
    sidecar = json.load(open(dst + ".json"))
    assert sidecar["provenance"]["operator"] == "strong_maximal"


def test_gen_deterministic(capsys, tmp_path):
    a = str(tmp_path / "a.grid")
    b = str(tmp_path / "b.grid")
    run(capsys, "gen", "--kind", "random", "--shape", "10,10", "--seed", "5",
        "--out", a)
    run(capsys, "gen", "--kind", "random", "--shape", "10,10", "--seed", "5",
        "--out", b)
    assert open(a).read() == open(b).read()


def test_bad_descriptor_exits_one(capsys):
    code, out, err = run(capsys, "young", "eval", "--phi", "garbage")
    assert code == 1
    assert out == ""
    e = json.loads(err)
    assert e["error"] == "JSONDecodeError"


def test_budget_exits_two(capsys, tmp_path, monkeypatch):
    src = str(tmp_path / "f.grid")
    run(capsys, "gen", "--kind", "random", "--shape", "16,16", "--out", src)
    monkeypatch.setenv("ORLICZMAX_BUDGET", "10")
    code, _, err = run(capsys, "maximal", "--input", src,
                       "--out", str(tmp_path / "m.grid"))
    assert code == 2
    assert json.loads(err)["error"] == "BudgetExceeded"


def test_explicit_budget_flag_overrides_env(capsys, tmp_path, monkeypatch):
    src = str(tmp_path / "f.grid")
    run(capsys, "gen", "--kind", "random", "--shape", "8,8", "--out", src)
    monkeypatch.setenv("ORLICZMAX_BUDGET", "10")
    code, _, _ = run(capsys, "maximal", "--input", src, "--budget", "1000000",
                     "--out", str(tmp_path / "m.grid"))
    assert code == 0


def test_weights_ap_config(capsys, tmp_path):
    src = str(tmp_path / "w.grid")
    run(capsys, "gen", "--kind", "random", "--shape", "10,10", "--seed", "3",
        "--out", src)
    cfg = tmp_path / "ap.json"
    cfg.write_text(json.dumps({"w": src, "p": 2.0,
                               "family": {"mode": "stratified", "count": 64,
                                          "seed": 0}}))
    code, out, _ = run(capsys, "weights", "test", "--kind", "ap",
                       "--config", str(cfg))
    assert code == 0
    rep = json.loads(out)["report"]
    assert rep["kind"] == "ap"
    assert rep["sup_constant"] >= 1.0


def test_covering_demo(capsys, tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({
        "shape": [16, 16],
        "rects": [{"lo": [0, 0], "hi": [8, 8]},
                  {"lo": [4, 4], "hi": [12, 12]},
                  {"lo": [10, 10], "hi": [16, 16]}],
    }))
    code, out, _ = run(capsys, "covering", "demo", "--family", str(fam),
                       "--alpha", "0.5")
    assert code == 0
    d = json.loads(out)
    assert d["verification"]["ok"]
    assert d["largest_delta"] > 0


def test_verify_counterexample(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "counterexample")
    assert code == 0
    d = json.loads(out)
    assert d["divergence"]["nondecreasing"]


def test_out_file_written(capsys, tmp_path):
    dest = str(tmp_path / "verdict.json")
    code, out, _ = run(capsys, "bp", "check", "--phi",
                       '{"kind": "power", "r": 1.5}', "--p", "2", "--out", dest)
    assert code == 0
    assert json.loads(out) == {"written": dest}
    assert json.load(open(dest))["verdict"]["label"] == "Converges"
