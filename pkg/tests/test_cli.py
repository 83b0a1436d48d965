import json

import pytest

import radstyle.cli as cli
from radstyle.config import load_config
from radstyle.errors import RequestError
from radstyle.harness import load_dataset, parse_table_csv
from radstyle.prompting import INSTRUCTION, SYSTEM_PROMPT
from radstyle.synthetic import make_synthetic_corpus

from test_graph import entity_doc


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_corpus")
    return make_synthetic_corpus(out, n_records=12, n_train=8, seed=1)


SINGLE_GRAPH = {
    "text": "FINDINGS : lungs clear . IMPRESSION : no edema",
    "1": entity_doc("1", "lungs", "ANAT-DP", 2),
    "2": entity_doc("2", "clear", "OBS-DP", 3,
                    relations=[("located_at", "1")]),
    "3": entity_doc("3", "edema", "OBS-DA", 7),
}


def test_serialize_single_graph(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(SINGLE_GRAPH), encoding="utf-8")
    assert cli.main(["serialize", str(path)]) == 0
    out = capsys.readouterr().out
    assert out == "findings: lungs clear. impression: no edema\n"


def test_serialize_flags(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(SINGLE_GRAPH), encoding="utf-8")
    assert cli.main(["serialize", str(path), "--delimiter", " | ",
                     "--no-headers"]) == 0
    assert capsys.readouterr().out == "lungs clear | no edema\n"


def test_serialize_sidecar_prints_study_per_line(tmp_path, capsys):
    path = tmp_path / "graphs.json"
    path.write_text(json.dumps({"s1": SINGLE_GRAPH, "s2": SINGLE_GRAPH}),
                    encoding="utf-8")
    assert cli.main(["serialize", str(path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("s1\tfindings:")
    assert lines[1].startswith("s2\t")


def test_serialize_bad_label_exits_one(tmp_path, capsys):
    doc = {"1": entity_doc("1", "lungs", "OBS-XX", 0)}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    assert cli.main(["serialize", str(path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_serialize_malformed_json_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{nope", encoding="utf-8")
    assert cli.main(["serialize", str(path)]) == 1
    assert "malformed JSON" in capsys.readouterr().err


def test_serialize_missing_file_exits_one(tmp_path, capsys):
    assert cli.main(["serialize", str(tmp_path / "absent.json")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_prompt_for_eval_study(corpus, capsys):
    records = load_dataset(corpus["dataset"])
    study = next(r for r in records if r.split == "test")
    assert cli.main(["prompt", "--shots", "2", "--dataset",
                     str(corpus["dataset"]), "--eval-study",
                     study.study_id]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["k"] == 2
    messages = doc["messages"]
    assert len(messages) == 6
    assert messages[0] == {"role": "system", "content": SYSTEM_PROMPT}
    assert messages[-1]["content"] == (
        f"{INSTRUCTION}\n{study.serialization}")


def test_prompt_is_deterministic(corpus, capsys):
    records = load_dataset(corpus["dataset"])
    study = next(r for r in records if r.split == "test")
    argv = ["prompt", "--shots", "3", "--dataset", str(corpus["dataset"]),
            "--eval-study", study.study_id]
    assert cli.main(argv) == 0
    first = capsys.readouterr().out
    assert cli.main(argv) == 0
    assert capsys.readouterr().out == first


def test_prompt_for_raw_serialization(corpus, capsys):
    assert cli.main(["prompt", "--shots", "0", "--dataset",
                     str(corpus["dataset"]), "--eval-serialization",
                     "findings: cardiomegaly"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["k"] == 0
    assert doc["messages"][1]["content"].endswith("findings: cardiomegaly")


def test_prompt_requires_an_eval_target(corpus, capsys):
    assert cli.main(["prompt", "--shots", "0", "--dataset",
                     str(corpus["dataset"])]) == 1
    assert "--eval-study or --eval-serialization" in capsys.readouterr().err


def test_prompt_unknown_study_exits_one(corpus, capsys):
    assert cli.main(["prompt", "--shots", "0", "--dataset",
                     str(corpus["dataset"]), "--eval-study", "zzz"]) == 1
    assert "no study 'zzz'" in capsys.readouterr().err


def test_evaluate_writes_outputs_and_prints_table(corpus, capsys):
    assert cli.main(["evaluate", "--mode", "ser2rep", "--config",
                     str(corpus["config"])]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("method")
    assert "ser2rep" in out and "baseline" in out
    assert "scores:" in out
    cfg = load_config(corpus["config"])
    outdir = corpus["config"].parent / "results"
    table = parse_table_csv(
        (outdir / "mock_table.csv").read_text(encoding="utf-8"))
    assert table.metric_names == cfg.metrics.names
    assert (outdir / "mock_scores.jsonl").exists()
    assert (outdir / "mock_table.txt").exists()


def test_evaluate_bad_config_exits_one(tmp_path, capsys):
    path = tmp_path / "c.yaml"
    path.write_text("datasett: d.jsonl\n", encoding="utf-8")
    assert cli.main(["evaluate", "--mode", "ser2rep",
                     "--config", str(path)]) == 1
    assert "datasett" in capsys.readouterr().err


def test_evaluate_client_failure_exits_two(corpus, capsys, monkeypatch):
    def explode(cfg, mode):
        raise RequestError(503, "upstream down")
    monkeypatch.setattr(cli, "evaluate", explode)
    assert cli.main(["evaluate", "--mode", "ser2rep", "--config",
                     str(corpus["config"])]) == 2
    assert "client error" in capsys.readouterr().err


def style_files(tmp_path):
    human = {f"r{i}": [f"rad {i} human report {j}" for j in range(6)]
             for i in range(2)}
    gen = {f"r{i}": [f"rad {i} generated report {j}" for j in range(2)]
           for i in range(2)}
    hp = tmp_path / "human.json"
    gp = tmp_path / "generated.json"
    hp.write_text(json.dumps(human), encoding="utf-8")
    gp.write_text(json.dumps(gen), encoding="utf-8")
    return hp, gp


def test_style_eval_assemble_then_score(tmp_path, capsys):
    hp, gp = style_files(tmp_path)
    out = tmp_path / "sets.json"
    assert cli.main(["style-eval", "assemble", "--human", str(hp),
                     "--generated", str(gp), "--sets", "4",
                     "--seed", "7", "--out", str(out)]) == 0
    assert "wrote 4 sets" in capsys.readouterr().out
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert len(doc["sets"]) == 4

    answers = tmp_path / "answers.json"
    answers.write_text(json.dumps(
        {"e1": [s["generated_index"] for s in doc["sets"]],
         "e2": [(s["generated_index"] + 1) % 4 for s in doc["sets"]]}),
        encoding="utf-8")
    assert cli.main(["style-eval", "score", "--sets", str(out),
                     "--answers", str(answers)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("e1: 4/4 correct")
    assert lines[1].startswith("e2: 0/4 correct")
    assert lines[2].startswith("pooled: 4/8 correct")


def test_style_eval_assemble_render_hides_answer(tmp_path, capsys):
    hp, gp = style_files(tmp_path)
    out = tmp_path / "sets.json"
    assert cli.main(["style-eval", "assemble", "--human", str(hp),
                     "--generated", str(gp), "--sets", "2", "--seed", "0",
                     "--out", str(out), "--render"]) == 0
    rendered = capsys.readouterr().out
    assert "=== Set 1 ===" in rendered
    assert "Report 4:" in rendered
    assert "generated_index" not in rendered


def test_style_eval_assemble_shortfall_exits_one(tmp_path, capsys):
    hp, gp = style_files(tmp_path)
    out = tmp_path / "sets.json"
    assert cli.main(["style-eval", "assemble", "--human", str(hp),
                     "--generated", str(gp), "--sets", "40",
                     "--out", str(out)]) == 1
    assert "radiologist" in capsys.readouterr().err


def test_style_eval_score_rejects_bad_sets_file(tmp_path, capsys):
    sets = tmp_path / "sets.json"
    sets.write_text(json.dumps({"sets": "nope"}), encoding="utf-8")
    answers = tmp_path / "answers.json"
    answers.write_text(json.dumps({"e": []}), encoding="utf-8")
    assert cli.main(["style-eval", "score", "--sets", str(sets),
                     "--answers", str(answers)]) == 1
    assert "'sets' array" in capsys.readouterr().err


def test_ztest_output(capsys):
    assert cli.main(["ztest", "--x", "5", "--n", "23",
                     "--p0", "0.25"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("x=5 n=23 p0=0.25 ")
    assert "z=-0.379144" in out
    assert "p=0.647709" in out


def test_ztest_default_chance_rate(capsys):
    assert cli.main(["ztest", "--x", "10", "--n", "40"]) == 0
    assert "p0=0.25" in capsys.readouterr().out


def test_parser_rejects_unknown_mode():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["evaluate", "--mode", "nope",
                                       "--config", "c"])
