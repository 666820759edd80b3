import csv
import json

import pytest
import yaml

from emgcombo.cli import EXIT_CONFIG, EXIT_DATA, EXIT_MISSING, EXIT_USAGE, main
from emgcombo.config import RunConfig, dump_config, load_config
from emgcombo.simgen import ConfigError

SMALL = {
    "simulator": {"calibration_s": 0.25, "held_s": 0.25, "pulsed_s": 0.25, "rest_s": 0.25},
    "logr": {"n_iter": 20},
    "grid": {"n_subjects": 2, "n_seeds": 1, "archs": ["Parallel"], "algos": ["LogR"], "fractions": [0.1], "augment_methods": ["fit-gmm-1"]},
}


@pytest.fixture()
def small_cfg(tmp_path):
    base = RunConfig().to_dict()
    for k, v in SMALL.items():
        base[k].update(v)
    p = tmp_path / "small.yaml"
    p.write_text(yaml.safe_dump(base))
    return p


def test_config_round_trip(tmp_path):
    cfg = RunConfig()
    p = tmp_path / "c.yaml"
    p.write_text(dump_config(cfg))
    assert load_config(p) == cfg
    assert dump_config(load_config(p)) == dump_config(cfg)


def test_config_rejects_unknown_and_invalid(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("grid: {n_seeds: 0}\n")
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text("wat: 1\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_init_config(tmp_path, capsys):
    assert main(["init-config"]) == 0
    assert "simulator:" in capsys.readouterr().out
    assert main(["init-config", "--out", str(tmp_path / "x.yaml")]) == 0
    assert load_config(tmp_path / "x.yaml") == RunConfig()


def test_simulate_exp_replay(tmp_path, small_cfg):
    sim = tmp_path / "sim"
    assert main(["simulate", "--config", str(small_cfg), "--out", str(sim)]) == 0
    assert len(list((sim / "sessions").glob("*.session.json"))) == 2
    ex = tmp_path / "ex"
    assert main(["exp1", "--config", str(small_cfg), "--sessions", str(sim / "sessions"), "--out", str(ex)]) == 0
    rows = list(csv.DictReader((ex / "exp1_results.csv").open()))
    assert len(rows) == 2 * 1 * 3
    man = json.loads((ex / "manifest.json").read_text())
    assert set(man["artifacts"]) == {"exp1_results.csv"}
    assert man["config"]["seed"] == 0
    assert main(["replay", str(ex)]) == 0


def test_exp2_and_exp3_simulate_when_no_sessions(tmp_path, small_cfg):
    for cmd, n in (("exp2", 3 + 6), ("exp3", 1 + 1)):
        out = tmp_path / cmd
        assert main([cmd, "--config", str(small_cfg), "--out", str(out)]) == 0
        assert len(list(csv.DictReader((out / f"{cmd}_results.csv").open()))) == 2 * n


def test_heatmap_and_evaluate(tmp_path, small_cfg):
    sim = tmp_path / "sim"
    main(["simulate", "--config", str(small_cfg), "--out", str(sim)])
    hm = tmp_path / "hm"
    assert main(["heatmap", str(sim / "sessions" / "S00"), "--out", str(hm)]) == 0
    lines = (hm / "heatmap_S00.csv").read_text().splitlines()
    assert len(lines) == 24 and len(lines[1].split(",")) == 23
    ev = tmp_path / "ev"
    args = ["evaluate", str(sim / "sessions" / "S00"), "--config", str(small_cfg), "--algo", "LogR", "--out", str(ev)]
    assert main(args + ["--strategy", "subset_uniform", "--fraction", "0.1"]) == 0
    body = json.loads((ev / "evaluation.json").read_text())
    assert len(body["confusion"]) == 15


def test_featurize_reproduces_saved_features(tmp_path, small_cfg):
    cfg = yaml.safe_load(small_cfg.read_text())
    cfg["simulator"]["keep_raw"] = True
    cfg["grid"]["n_subjects"] = 1
    p = tmp_path / "raw.yaml"
    p.write_text(yaml.safe_dump(cfg))
    sim = tmp_path / "sim"
    assert main(["simulate", "--config", str(p), "--out", str(sim)]) == 0
    assert main(["featurize", str(sim / "sessions"), "--out", str(tmp_path / "f")]) == 0
    assert (tmp_path / "f" / "S00.features.csv").read_bytes() == (sim / "sessions" / "S00.features.csv").read_bytes()


def test_featurize_without_raw_is_a_data_error(tmp_path, small_cfg):
    sim = tmp_path / "sim"
    main(["simulate", "--config", str(small_cfg), "--out", str(sim)])
    assert main(["featurize", str(sim / "sessions"), "--out", str(tmp_path / "f")]) == EXIT_DATA


def test_exit_codes(tmp_path, capsys):
    assert main(["exp1", "--nope"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    assert main(["exp1", "--config", str(tmp_path / "missing.yaml")]) == EXIT_MISSING
    bad = tmp_path / "bad.yaml"
    bad.write_text("simulator: {noise_std: -1}\n")
    assert main(["exp1", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["heatmap", str(tmp_path / "none"), "--out", str(tmp_path)]) == EXIT_MISSING
    err = capsys.readouterr().err
    assert '"exit_code": 3' in err


def test_inputs_not_mutated(tmp_path, small_cfg):
    sim = tmp_path / "sim"
    main(["simulate", "--config", str(small_cfg), "--out", str(sim)])
    before = {p.name: p.read_bytes() for p in (sim / "sessions").iterdir()}
    main(["heatmap", str(sim / "sessions"), "--out", str(tmp_path / "hm")])
    assert before == {p.name: p.read_bytes() for p in (sim / "sessions").iterdir()}
