import pytest

from radstyle.config import (ClientSettings, ExperimentConfig, HarnessConfig,
                             MetricsConfig, load_config)
from radstyle.errors import ConfigError, IoError


def test_defaults():
    cfg = HarnessConfig()
    assert cfg.metrics.names == ("radcliq", "radgraph_f1", "chexbert",
                                 "bleu2", "bert_score")
    assert cfg.experiment.shots == (0, 1, 5, 10)
    assert cfg.experiment.pool_split == "train"
    assert cfg.experiment.eval_split == "test"
    assert cfg.client.mode == "identity-mock"
    assert cfg.metrics.radcliq_bias == 4.0
    assert set(cfg.metrics.radcliq_weights) == {"radgraph_f1", "chexbert",
                                                "bleu2", "bert_score"}


def test_load_yaml(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "dataset: data.jsonl\n"
        "graphs: graphs.json\n"
        "serializer:\n"
        "  delimiter: ' | '\n"
        "  include_headers: false\n"
        "client:\n"
        "  mode: fixed-mock\n"
        "  fixed_text: nothing to report\n"
        "experiment:\n"
        "  shots: [0, 3]\n"
        "  seed: 9\n"
        "output:\n"
        "  directory: out\n")
    cfg = load_config(path)
    assert cfg.dataset == "data.jsonl"
    assert cfg.serializer.delimiter == " | "
    assert not cfg.serializer.include_headers
    assert cfg.client.mode == "fixed-mock"
    assert cfg.experiment.shots == (0, 3)
    assert cfg.experiment.seed == 9
    assert cfg.output.directory == "out"


def test_load_json_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"dataset": "d.jsonl", "metrics": {"names": ["bleu2"]}}')
    cfg = load_config(path)
    assert cfg.metrics.names == ("bleu2",)


def test_empty_config_gives_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_config(path) == HarnessConfig()


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("datasett: d.jsonl\n")
    with pytest.raises(ConfigError, match="datasett"):
        load_config(path)


def test_unknown_nested_key_rejected(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("client:\n  modee: http\n")
    with pytest.raises(ConfigError, match="modee"):
        load_config(path)


def test_malformed_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("a: [unclosed\n")
    with pytest.raises(ConfigError, match="malformed"):
        load_config(path)


def test_missing_file():
    with pytest.raises(IoError):
        load_config("/nonexistent/run.yaml")


def test_client_mode_validated():
    with pytest.raises(ConfigError, match="unknown client mode"):
        ClientSettings(mode="telepathy")


def test_experiment_validation():
    with pytest.raises(ConfigError, match="non-negative"):
        ExperimentConfig(shots=(0, -1))
    with pytest.raises(ConfigError, match="must differ"):
        ExperimentConfig(pool_split="test", eval_split="test")


def test_metrics_config_weights_independent():
    a = MetricsConfig()
    b = MetricsConfig()
    assert a.radcliq_weights == b.radcliq_weights
    assert a.radcliq_weights is not b.radcliq_weights
