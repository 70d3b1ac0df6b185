"""End-to-end smoke checks for the python bindings."""

import json
import pathlib

import pytest

import trex

REPO = pathlib.Path(__file__).resolve().parents[2]
SMOKE = str(REPO / "fixtures" / "smoke_matres.json")


def test_datasets_and_schema_shape():
    assert trex.datasets() == ["matres", "tbdense", "tddman"]
    sizes = {"matres": 4, "tbdense": 6, "tddman": 5}
    for name, size in sizes.items():
        schema = trex.schema(name)
        assert len(schema["labels"]) == size
        assert "vague" in schema["output_space"]
        assert len(schema["content_hash"]) == 64


def test_inverse_and_orientation():
    for name in trex.datasets():
        for label in trex.schema(name)["output_space"]:
            assert trex.inverse_of(name, trex.inverse_of(name, label)) == label
            assert trex.orient(name, "a", label, "b", "a", "b") == label
            assert trex.orient(name, "b", label, "a", "a", "b") == trex.inverse_of(name, label)
            back = trex.ranking_answer_relation(trex.ranking_answer_relation(label))
            assert back == label
    with pytest.raises(trex.Error):
        trex.orient("matres", "a", "before", "c", "a", "b")


def test_normalizer_refusals_and_labels():
    for raw in (
        "Cannot determine.",
        "I cannot answer that question as it is unclear from the given information.",
        "Unknown.",
    ):
        verdict = trex.parse_label(raw, "matres")
        assert verdict == {"label": "vague", "status": "abstain", "ambiguous": False}
        assert trex.parse_yesno(raw) == "unknown"
        assert trex.is_refusal(raw)
    assert trex.parse_label("The first is included in the second.", "tbdense")["label"] == "is_included"
    assert trex.parse_yesno("Yes.") == "yes"
    assert trex.strip_event_tags("a [EVENT e1]ran[/EVENT] b") == "a ran b"


def test_corpus_and_fixture_round_trip():
    corpus = trex.load_corpus(SMOKE)
    assert corpus["dataset"] == "matres"
    assert sum(len(d["pairs"]) for d in corpus["documents"]) == 20

    spec = {
        "dataset": "matres",
        "seed": 5,
        "documents": [
            {
                "doc_id": "d0",
                "events": ["e1", "e2"],
                "relations": [{"e1": "e1", "e2": "e2", "label": "before"}],
            }
        ],
    }
    first = trex.generate_fixture(spec)
    assert first == trex.generate_fixture(spec, seed=5)
    assert first != trex.generate_fixture(spec, seed=6)


def test_aggregate_conflict_rule():
    gold = [{"doc_id": "d", "e1": "e1", "e2": "e2", "label": "before"}]
    agree = [
        {"anchor": "e1", "relation": "before", "other": "e2", "source": "t0"},
        {"anchor": "e2", "relation": "after", "other": "e1", "source": "t1"},
    ]
    preds = trex.aggregate_event_ranking(agree, gold, "matres")
    assert preds[0]["label"] == "before" and preds[0]["flags"] == {}

    clash = agree + [{"anchor": "e1", "relation": "after", "other": "e2", "source": "t2"}]
    preds = trex.aggregate_event_ranking(clash, gold, "matres")
    assert preds[0]["label"] == "vague" and preds[0]["flags"].get("conflict_vague")

    preds = trex.aggregate_event_ranking([], gold, "matres")
    assert preds[0]["label"] == "vague" and preds[0]["flags"].get("undetected_vague")


def test_run_score_and_cli(tmp_path):
    out = str(tmp_path / "run")
    outcome = trex.run(
        {"dataset": SMOKE, "strategy": "zero-shot", "provider": "gold-oracle", "out": out}
    )
    assert outcome["manifest"]["failed_pairs"] == 0
    assert len(outcome["predictions"]) == 20

    report = trex.score_run(out)
    assert report["overall"]["f1"] == 1.0
    assert report["gold_pairs"] == 20

    corpus = trex.load_corpus(SMOKE)
    gold = [
        pair | {"doc_id": doc["doc_id"]}
        for doc in corpus["documents"]
        for pair in doc["pairs"]
    ]
    direct = trex.score(outcome["predictions"], gold, "matres")
    assert direct["overall"]["f1"] == 1.0

    assert trex.cli(["score", "--run", out]) == 0
    assert (tmp_path / "run" / "report.json").exists()
    assert trex.cli(["replay", "--run", out]) == 0
    assert trex.cli(["bogus-subcommand"]) != 0

    with pytest.raises(trex.Error):
        trex.score_run(str(tmp_path / "missing"))


def test_report_json_matches_cli_output(tmp_path):
    out = str(tmp_path / "run")
    trex.run({"dataset": SMOKE, "strategy": "event-ranking", "provider": "gold-oracle", "out": out})
    assert trex.cli(["score", "--run", out]) == 0
    on_disk = json.loads((tmp_path / "run" / "report.json").read_text())
    assert on_disk == trex.score_run(out)
