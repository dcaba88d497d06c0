import json
import random

import pytest

from aggsim import examples
from aggsim.documents import (
    MODEL_FORMAT,
    SCENARIO_FORMAT,
    canonical_json,
    kb_from_doc,
    kb_to_doc,
    model_digest,
    model_doc_digest,
    model_from_doc,
    model_to_doc,
    scenario_criteria,
    scenario_digest,
    scenario_doc_digest,
    scenario_from_doc,
    scenario_to_doc,
    validate_model_doc,
    validate_scenario_doc,
)
from aggsim.engine import simulate
from aggsim.errors import DocumentError
from aggsim.structure import flatten
from aggsim.synthesis import synthesize_dynamic_model

from conftest import random_model, random_nested_model, random_scenario


class TestCanonicalJson:
    def test_sorted_keys_and_tight_separators(self):
        assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'

    def test_unicode_not_escaped(self):
        assert canonical_json({"s": "é"}) == '{"s":"é"}'


class TestModelDocuments:
    def test_round_trip_preserves_document(self):
        doc = model_to_doc(examples.reservoir_model())
        assert doc["format"] == MODEL_FORMAT
        again = model_to_doc(model_from_doc(doc))
        assert again == doc

    def test_round_trip_preserves_behavior(self):
        model = examples.reservoir_model()
        back = model_from_doc(model_to_doc(model))
        sc = examples.fill_drain_scenario()
        assert simulate(back, sc, 42).to_jsonl() == simulate(model, sc, 42).to_jsonl()

    def test_random_models_round_trip(self):
        rng = random.Random(17)
        for _ in range(10):
            doc = model_to_doc(random_model(rng))
            assert model_to_doc(model_from_doc(doc)) == doc

    def test_digest_is_stable_hex(self):
        d1 = model_digest(examples.reservoir_model())
        d2 = model_doc_digest(model_to_doc(examples.reservoir_model()))
        assert d1 == d2 and len(d1) == 64
        int(d1, 16)

    def test_digest_ignores_metadata(self):
        doc = model_to_doc(examples.reservoir_model())
        base = model_doc_digest(doc)
        doc["metadata"] = {"author": "nobody", "note": "scratch"}
        assert model_doc_digest(doc) == base

    def test_digest_tracks_semantic_changes(self):
        doc = model_to_doc(examples.reservoir_model())
        base = model_doc_digest(doc)
        doc["horizon"] = 9.0
        assert model_doc_digest(doc) != base

    def test_nested_and_flat_models_share_a_digest(self):
        rng = random.Random(23)
        nested = random_nested_model(rng)
        flat = type(nested)(
            horizon=nested.horizon,
            aggregates=nested.aggregates,
            topology=flatten(nested.topology),
            reestimation=nested.reestimation,
        )
        assert model_digest(nested) == model_digest(flat)

    def test_bad_format_rejected(self):
        doc = model_to_doc(examples.reservoir_model())
        doc["format"] = "something-else/9"
        with pytest.raises(DocumentError):
            model_from_doc(doc)

    def test_validate_clean_doc(self):
        assert validate_model_doc(model_to_doc(examples.reservoir_model())) == []

    def test_validate_reports_findings(self):
        doc = model_to_doc(examples.reservoir_model())
        doc["topology"]["slots"]["tank"] = {"aggregate": "ghost-aggregate"}
        findings = validate_model_doc(doc)
        assert findings and any("ghost" in f for f in findings)

    def test_validate_malformed_doc_reports_parse_failure(self):
        assert validate_model_doc({"format": MODEL_FORMAT}) != []


class TestScenarioDocuments:
    def test_round_trip(self):
        doc = scenario_to_doc(examples.fill_drain_scenario())
        assert doc["format"] == SCENARIO_FORMAT
        assert scenario_to_doc(scenario_from_doc(doc)) == doc

    def test_random_scenarios_round_trip(self):
        rng = random.Random(29)
        for i in range(10):
            model = random_model(rng)
            doc = scenario_to_doc(random_scenario(rng, model, f"s{i}"))
            assert scenario_to_doc(scenario_from_doc(doc)) == doc

    def test_digest_ignores_criteria_and_model_ref(self):
        doc = scenario_to_doc(examples.fill_scenario())
        base = scenario_doc_digest(doc)
        doc["model_digest"] = "f" * 64
        doc["criteria"] = {"level": {"kind": "terminal-distance",
                                     "scope": "tank", "target": [7.0]}}
        assert scenario_doc_digest(doc) == base
        assert scenario_digest(examples.fill_scenario()) == base

    def test_digest_tracks_time_diagram(self):
        a = scenario_doc_digest(scenario_to_doc(examples.fill_scenario()))
        b = scenario_doc_digest(scenario_to_doc(examples.fill_drain_scenario()))
        assert a != b

    def test_criteria_section_parses(self):
        doc = scenario_to_doc(examples.fill_scenario())
        doc["criteria"] = {
            "level": {"kind": "terminal-distance", "scope": "tank", "target": [7.0]},
            "high": {"kind": "time-in-region", "scope": "tank", "target": "HIGH",
                     "direction": "maximize"},
        }
        crits = scenario_criteria(doc)
        assert set(crits) == {"level", "high"}
        assert crits["level"].target == (7.0,)
        assert crits["high"].direction == "maximize"

    def test_validate_against_model(self):
        model_doc = model_to_doc(examples.reservoir_model())
        doc = scenario_to_doc(examples.fill_scenario())
        assert validate_scenario_doc(doc, model_doc) == []
        doc["time_diagram"] = [{"t": 1.0, "target": "ghost", "symbol": "GO"}]
        assert validate_scenario_doc(doc, model_doc) != []

    def test_validate_checks_model_digest_reference(self):
        model_doc = model_to_doc(examples.reservoir_model())
        doc = scenario_to_doc(examples.fill_scenario())
        doc["model_digest"] = "0" * 64
        findings = validate_scenario_doc(doc, model_doc)
        assert any("digest" in f for f in findings)

    def test_bad_format_rejected(self):
        with pytest.raises(DocumentError):
            scenario_from_doc({"format": "nope/0", "id": "x"})


class TestKnowledgeDocuments:
    def test_round_trip(self):
        doc = examples.synthesis_kb_doc()
        kb = kb_from_doc(doc)
        again = kb_to_doc(kb)
        assert kb_to_doc(kb_from_doc(again)) == again

    def test_round_trip_preserves_synthesis_result(self):
        doc = examples.synthesis_kb_doc()
        a = model_to_doc(synthesize_dynamic_model(kb_from_doc(doc)))
        b = model_to_doc(synthesize_dynamic_model(kb_from_doc(kb_to_doc(kb_from_doc(doc)))))
        assert a == b

    def test_malformed_section_rejected(self):
        doc = examples.synthesis_kb_doc()
        del doc["knowledge"]["correspondence"][0]["template"]
        with pytest.raises(DocumentError):
            kb_from_doc(doc)


class TestJsonSafety:
    def test_documents_are_json_serializable(self):
        rng = random.Random(31)
        model = random_model(rng)
        json.dumps(model_to_doc(model))
        json.dumps(scenario_to_doc(random_scenario(rng, model, "s")))
        json.dumps(kb_to_doc(kb_from_doc(examples.synthesis_kb_doc())))
