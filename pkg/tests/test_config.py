import json
import logging

import pytest

from radtd import common
from radtd.config import RunConfig, build_run_config, config_schema, load_config_file, make_config, merge_layers
from radtd.errors import ConfigError


def test_defaults():
    cfg = make_config()
    assert (cfg.w, cfg.m, cfg.tau, cfg.k, cfg.L, cfg.C) == (15, 1, 1, 10, 10, 1e3)
    assert cfg.epsilon is None and cfg.confidence == 0.99
    assert cfg.urp_features == 196


def test_manual_epsilon_clears_confidence():
    cfg = make_config(epsilon=0.3)
    assert cfg.confidence is None


def test_epsilon_and_confidence_together_rejected():
    with pytest.raises(ConfigError, match="exactly one"):
        make_config(epsilon=0.3, confidence=0.9)


@pytest.mark.parametrize(
    "overrides",
    [{"w": 2}, {"m": 14}, {"L": 197}, {"C": 0.0}, {"hop": 0}, {"epsilon": 1.0}, {"confidence": 1.0}, {"k": 0}],
)
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        make_config(**overrides)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        make_config(window=15)


def test_merge_layers_skips_none_and_merges_nested():
    merged = merge_layers({"radtd": {"w": 20, "k": 5}, "jobs": 2}, {"radtd": {"w": None, "k": 7}, "jobs": None})
    assert merged == {"radtd": {"w": 20, "k": 7}, "jobs": 2}


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"radtd": {"w": 20, "L": 12}, "seeds": [1, 2]}), encoding="utf-8")
    run_cfg = build_run_config(load_config_file(str(path)), {"radtd": {"w": 25}})
    assert run_cfg.radtd.w == 25
    assert run_cfg.radtd.L == 12
    assert run_cfg.seeds == (1, 2)


def test_flag_confidence_replaces_file_epsilon():
    run_cfg = build_run_config({"radtd": {"epsilon": 0.4}}, {"radtd": {"confidence": 0.95}})
    assert run_cfg.radtd.epsilon is None
    assert run_cfg.radtd.confidence == 0.95


def test_flag_epsilon_replaces_file_confidence():
    run_cfg = build_run_config({"radtd": {"confidence": 0.9}}, {"radtd": {"epsilon": 0.2}})
    assert run_cfg.radtd.confidence is None
    assert run_cfg.radtd.epsilon == 0.2


def test_schema_alias_and_methods():
    run_cfg = build_run_config({"schema": {"values": ["a", "b"]}, "methods": ["radtd"]})
    assert run_cfg.schema_.values == ("a", "b")
    with pytest.raises(ConfigError, match="unknown methods"):
        build_run_config({"methods": ["lstm"]})


def test_config_file_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config_file(str(tmp_path / "none.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config_file(str(bad))


def test_config_schema_names_sections():
    schema = config_schema()
    assert {"radtd", "schema", "methods", "seeds"} <= set(schema["properties"])


def test_fingerprint_keys():
    fp = make_config().fingerprint("urp", ("value",))
    assert fp["feature_length"] == 196
    assert fp["channels"] == ["value"]
    assert make_config().fingerprint("raw", ("a", "b"))["feature_length"] == 30


def test_run_config_rejects_zero_jobs():
    with pytest.raises(ConfigError):
        build_run_config({"jobs": 0})
    assert RunConfig().jobs == 1


def test_derive_seed_is_stable():
    assert common.derive_seed(3, "a", 1) == common.derive_seed(3, "a", 1)
    assert common.derive_seed(3, "a", 1) != common.derive_seed(3, "a", 2)
    assert 0 <= common.derive_seed(0) < 2**32


def test_json_logging(capsys):
    common.configure_logging("INFO", "json")
    logging.getLogger("radtd.test").info("[fit] name=%s", "demo")
    line = capsys.readouterr().err.strip().splitlines()[-1]
    record = json.loads(line)
    assert record["message"] == "[fit] name=demo"
