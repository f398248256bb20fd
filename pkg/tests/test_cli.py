import json
import os

import pytest

from topiclens.cli import Config, load_config_file, run_command, worker_count
from topiclens.topics import TopicModel

SYNTH = ["--topics", "4", "--tags-per-topic", "3", "--posts-per-tag", "30", "--untagged", "50"]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A synthetic pair and a model built from each side."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert run_command(["synth", "--out-dir", str(data), "--pair", "--shared-fraction", "0.5",
                        "--seed", "4", *SYNTH]) == 0
    lex = str(data / "lexicon.tsv")
    for side in "ab":
        assert run_command(["build", "--input", str(data / f"{side}.jsonl"), "--top-tags", "12",
                            "--user-dict", lex, "--out", str(root / f"{side}.model.json")]) == 0
    return root, data, lex


def test_synth_outputs(workspace):
    _, data, _ = workspace
    names = sorted(os.listdir(data))
    assert names == ["a.jsonl", "a.jsonl.manifest.json", "b.jsonl", "b.jsonl.manifest.json",
                     "lexicon.tsv", "lexicon.tsv.manifest.json", "truth.json"]
    truth = json.loads((data / "truth.json").read_text(encoding="utf-8"))
    assert truth["shared"] == [0, 1]
    assert truth["manifest"]["spec"]["seed"] == 4


def test_build_writes_model(workspace):
    root, data, _ = workspace
    model = TopicModel.load(root / "a.model.json")
    assert model.platform == "a"
    assert sum(len(t.hashtags) for t in model.topics) == 12
    manifest = model.manifest
    assert manifest["command"] == "build"
    assert manifest["inputs"]["input"]["name"] == "a.jsonl"
    assert manifest["inputs"]["user_dict.0"]["name"] == "lexicon.tsv"
    assert manifest["config"]["top_tags"] == 12


def test_assign_uses_tags_for_tagged_posts(workspace, tmp_path):
    root, data, lex = workspace
    out = tmp_path / "assign.jsonl"
    assert run_command(["assign", "--model", str(root / "a.model.json"), "--input",
                        str(data / "a.jsonl"), "--user-dict", lex, "--out", str(out)]) == 0
    rows = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    posts = [json.loads(line) for line in (data / "a.jsonl").read_text(encoding="utf-8").splitlines()]
    assert [r["id"] for r in rows] == [p["id"] for p in posts]
    truth = json.loads((data / "truth.json").read_text(encoding="utf-8"))
    model = TopicModel.load(root / "a.model.json")
    tagged = {p["id"] for p in posts if "#" in p["text"]}
    for r in rows:
        assert set(r) == {"id", "topic_id", "via", "distance"}
        if r["id"] in tagged:
            assert r["via"] == "tag" and r["distance"] is None
            hashtags = model.topic(r["topic_id"]).hashtags
            assert {truth["tags"][h] for h in hashtags} == {truth["posts"][r["id"]]}
    assert json.loads((tmp_path / "assign.jsonl.manifest.json").read_text())["command"] == "assign"


def test_calibrate(workspace, tmp_path):
    root, data, lex = workspace
    out = tmp_path / "cal.json"
    assert run_command(["calibrate", "--model", str(root / "a.model.json"), "--input",
                        str(data / "a.jsonl"), "--user-dict", lex, "--target", "0.5",
                        "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["intra"]["count"] == 4 * 3 * 30
    assert 0 < report["recommended_threshold"] <= 1
    assert report["intra_includes_self"] is True


def test_compare(workspace, tmp_path):
    root, data, lex = workspace
    report, matrix = tmp_path / "report.json", tmp_path / "m.csv"
    assert run_command(["compare", "--model-a", str(root / "a.model.json"), "--model-b",
                        str(root / "b.model.json"), "--top-k", "3", "--out", str(report),
                        "--matrix", str(matrix), "--corpus-a", str(data / "a.jsonl"),
                        "--user-dict", lex]) == 0
    data_out = json.loads(report.read_text(encoding="utf-8"))
    assert data_out["cdf"][-1][1] == 1.0
    assert data_out["coverage_a_on_b"]["total"] == 4 * 3 * 30 + 50
    assert data_out["coverage_b_on_a"] is None
    lines = matrix.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 4 and lines[0].count(",") == 3
    assert (tmp_path / "m.csv.manifest.json").exists()


def test_rerank_deleted(tmp_path):
    corpus = tmp_path / "w.jsonl"
    rows = [{"id": f"p{i}", "text": f"#t{i % 2}# 中国人民"} for i in range(6)]
    rows += [{"id": "d1", "text": "中国", "deleted": True}, {"id": "d2", "text": "人民", "deleted": True}]
    corpus.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    model, out = tmp_path / "m.json", tmp_path / "r.json"
    assert run_command(["build", "--input", str(corpus), "--out", str(model)]) == 0
    assert run_command(["rerank-deleted", "--model", str(model), "--input", str(corpus),
                        "--out", str(out), "--threshold", "1.0"]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["deleted_posts"] == 2
    assert report["manifest"]["command"] == "rerank-deleted"


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["build", "--input", "x.jsonl"],
    ["build", "--input", "x", "--out", "y", "--bogus"],
    ["build", "--input", "x", "--out", "y", "--threshold", "1.5"],
    ["build", "--input", "x", "--out", "y", "--top-tags", "0"],
])
def test_usage_errors_exit_2(argv):
    assert run_command(argv) == 2


def test_pipeline_errors_exit_1(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert run_command(["build", "--input", str(tmp_path / "missing.jsonl"), "--out", str(out)]) == 1
    assert "error" in capsys.readouterr().err
    assert not out.exists()
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert run_command(["build", "--input", str(empty), "--out", str(out)]) == 1
    assert run_command(["build", "--input", str(empty), "--out", str(out),
                        "--t2s", str(tmp_path / "nope.tsv")]) == 1
    assert not out.exists()
    assert not [p for p in os.listdir(tmp_path) if p.endswith(".tmp")]


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('top_tags = 7\nselection = "tfidf"\nthreshold = 0.8\n')
    corpus = tmp_path / "w.jsonl"
    corpus.write_text("".join(json.dumps({"id": str(i), "text": f"#t{i}# 中国人民"}) + "\n"
                              for i in range(10)), encoding="utf-8")
    out = tmp_path / "m.json"
    assert run_command(["build", "--config", str(cfg), "--input", str(corpus),
                        "--threshold", "0.7", "--out", str(out)]) == 0
    model = TopicModel.load(out)
    assert model.config["top_tags"] == 7 and model.config["selection"] == "tfidf"
    assert model.threshold == 0.7
    cfg.write_text("colour = 3\n")
    assert run_command(["build", "--config", str(cfg), "--input", str(corpus), "--out", str(out)]) == 1


def test_config_invariants():
    with pytest.raises(ValueError):
        Config(top_tags=5, top_topics=6)
    with pytest.raises(ValueError):
        Config(linkage="single")
    assert Config(top_tags=5, top_topics=5).top_topics == 5


def test_config_file_lists(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('dictionary = "a.tsv"\nuser_dict = ["b.tsv", "c.tsv"]\n')
    assert load_config_file(cfg) == {"dictionary": ("a.tsv",), "user_dict": ("b.tsv", "c.tsv")}


def test_worker_count(monkeypatch):
    monkeypatch.setenv("TOPICLENS_THREADS", "3")
    assert worker_count(10) == 3
    monkeypatch.setenv("TOPICLENS_THREADS", "0")
    assert worker_count(10) == 1
    monkeypatch.setenv("TOPICLENS_THREADS", "many")
    with pytest.raises(ValueError):
        worker_count(10)


def test_top_topics_limits_model(workspace, tmp_path):
    _, data, lex = workspace
    out = tmp_path / "m.json"
    assert run_command(["build", "--input", str(data / "a.jsonl"), "--top-tags", "12",
                        "--top-topics", "2", "--user-dict", lex, "--out", str(out)]) == 0
    assert len(TopicModel.load(out).topics) == 2
