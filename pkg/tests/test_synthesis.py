import pytest

from aggsim.documents import kb_from_doc, model_to_doc
from aggsim.errors import (
    AmbiguousAssignment,
    BoundExceeded,
    DuplicateId,
    InvariantViolation,
    MultipleRoots,
    OrphanNode,
    TypeMismatch,
    UnboundSlot,
    UncoveredGoal,
    UnknownRule,
)
from aggsim.examples import synthesis_kb_doc
from aggsim.structure import validate_topology
from aggsim.synthesis import (
    CanonicalTemplate,
    CorrespondenceRule,
    KnowledgeBase,
    bind_template,
    build_objectives_tree,
    infer,
    synthesize_dynamic_model,
    transform_template,
)


class TestObjectivesTree:
    def test_well_formed_tree(self):
        tree = build_objectives_tree({"1": "root", "1.1": "a", "1.2": "b"})
        assert tree.root().identifier == "1"
        assert [n.identifier for n in tree.leaves()] == ["1.1", "1.2"]
        assert [n.identifier for n in tree.children("1")] == ["1.1", "1.2"]

    def test_multiple_roots_rejected(self):
        with pytest.raises(MultipleRoots):
            build_objectives_tree(["1", "2"])

    def test_orphan_rejected(self):
        with pytest.raises(OrphanNode):
            build_objectives_tree(["1", "1.2.1"])

    def test_duplicate_rejected(self):
        with pytest.raises(DuplicateId):
            build_objectives_tree([{"id": "1"}, {"id": "1"}])

    def test_deep_paths(self):
        tree = build_objectives_tree(["1", "1.2", "1.2.1", "1.2.2"])
        assert [n.identifier for n in tree.leaves()] == ["1.2.1", "1.2.2"]


def stage_template():
    doc = synthesis_kb_doc()["knowledge"]["templates"]["stage"]
    return CanonicalTemplate("stage", doc["spec"], doc["slots"], doc["tr"])


class TestTemplates:
    def test_undeclared_slot_rejected(self):
        with pytest.raises(InvariantViolation):
            CanonicalTemplate(
                "t",
                {
                    "variables": ["x"],
                    "initial": [{"slot": "mystery"}],
                    "initial_law": "L",
                    "laws": {"L": {"kind": "constant"}},
                    "partition": {},
                },
                slots={},
            )

    def test_bind_produces_working_aggregate(self):
        bound = bind_template(stage_template(), {"rate": 1.0, "init": 0.0})
        agg = bound.instantiate("1.1")
        assert agg.id == "1.1"
        assert agg.law_table()["RUN"].rates == (1.0,)

    def test_unbound_slot(self):
        with pytest.raises(UnboundSlot):
            bind_template(stage_template(), {"rate": 1.0})

    def test_type_mismatch(self):
        with pytest.raises(TypeMismatch):
            bind_template(stage_template(), {"rate": "fast", "init": 0.0})

    def test_identity_transform_is_equal(self):
        t = stage_template()
        assert transform_template(t, "identity") == t

    def test_add_output_port(self):
        t2 = transform_template(stage_template(), "add-alarm-port")
        assert "ALARM" in t2.spec["outputs"]

    def test_unknown_rule(self):
        with pytest.raises(UnknownRule):
            transform_template(stage_template(), "summon")

    def test_destructive_transform_rejected(self):
        doc = synthesis_kb_doc()["knowledge"]["templates"]["stage"]
        tr = dict(doc["tr"])
        tr["gut"] = {"remove": {"path": "laws"}}
        t = CanonicalTemplate("stage", doc["spec"], doc["slots"], tr)
        with pytest.raises(InvariantViolation):
            transform_template(t, "gut")


class TestInfer:
    def test_single_step(self):
        rules = [{"id": "r", "when": [["is", "?x", "A"]], "then": [["is", "?x", "B"]]}]
        facts = [("is", "n1", "A")]
        got = infer(rules, facts)
        assert ("is", "n1", "B") in got

    def test_no_applicable_rule_is_fixpoint(self):
        facts = [("fact", "a")]
        assert infer([{"id": "r", "when": [["other", "?x"]], "then": [["y", "?x"]]}], facts) == facts

    def test_bound_exceeded(self):
        # reachability over a chain needs one pass per hop; a bound smaller
        # than the chain keeps deriving on every pass and must be reported
        rules = [
            {"id": "t", "when": [["next", "?a", "?b"], ["reach", "?a"]],
             "then": [["reach", "?b"]]},
        ]
        facts = [("next", f"n{i}", f"n{i + 1}") for i in range(6)] + [("reach", "n0")]
        with pytest.raises(BoundExceeded):
            infer(rules, facts, bound=3)
        assert ("reach", "n6") in infer(rules, facts, bound=10)

    def test_chained_inference_reaches_fixpoint(self):
        rules = [
            {"id": "t", "when": [["next", "?a", "?b"], ["reach", "?a"]],
             "then": [["reach", "?b"]]},
        ]
        facts = [("next", "a", "b"), ("next", "b", "c"), ("reach", "a")]
        got = infer(rules, facts)
        assert ("reach", "c") in got

    def test_monotone_in_facts(self):
        rules = [{"id": "r", "when": [["p", "?x"]], "then": [["q", "?x"]]}]
        small = set(infer(rules, [("p", "a")]))
        large = set(infer(rules, [("p", "a"), ("p", "b")]))
        assert small <= large

    def test_mutually_producing_rules_bounded(self):
        # a <-> b closes after one pass; tiny bound still converges
        rules = [
            {"id": "ab", "when": [["a"]], "then": [["b"]]},
            {"id": "ba", "when": [["b"]], "then": [["a"]]},
        ]
        got = infer(rules, [("a",)], bound=2)
        assert set(got) == {("a",), ("b",)}


class TestSynthesis:
    def test_three_leaf_corpus(self):
        model = synthesize_dynamic_model(kb_from_doc(synthesis_kb_doc()))
        ids = [a for a, _ in model.aggregates]
        assert ids == ["1.1", "1.2", "1.4"]
        assert len(model.topology.couplings) == 2
        # bijection: slot ids equal the leaf identifiers
        assert sorted(dict(model.topology.slots)) == ids
        assert validate_topology(model.topology, model.aggregate_map()) == []

    def test_uncovered_goal_names_the_leaf(self):
        with pytest.raises(UncoveredGoal) as err:
            synthesize_dynamic_model(kb_from_doc(synthesis_kb_doc(extra_leaf=True)))
        assert err.value.identifier == "1.3"

    def test_longest_prefix_wins(self):
        doc = synthesis_kb_doc()
        doc["knowledge"]["correspondence"].insert(
            0, {"goal": "1", "template": "stage", "bindings": {"rate": 9.0, "init": 9.0}}
        )
        model = synthesize_dynamic_model(kb_from_doc(doc))
        # leaf rules are more specific than the catch-all on "1"
        assert model.aggregate_map()["1.1"].law_table()["RUN"].rates == (1.0,)

    def test_exact_tie_is_ambiguous(self):
        doc = synthesis_kb_doc()
        doc["knowledge"]["correspondence"].append(
            {"goal": "1.1", "template": "stage", "bindings": {"rate": 2.0, "init": 0.0}}
        )
        with pytest.raises(AmbiguousAssignment):
            synthesize_dynamic_model(kb_from_doc(doc))

    def test_synthesis_is_deterministic(self):
        a = model_to_doc(synthesize_dynamic_model(kb_from_doc(synthesis_kb_doc())))
        b = model_to_doc(synthesize_dynamic_model(kb_from_doc(synthesis_kb_doc())))
        assert a == b

    def test_unknown_template_rejected_at_kb_build(self):
        doc = synthesis_kb_doc()
        doc["knowledge"]["correspondence"][0]["template"] = "ghost"
        with pytest.raises(UnknownRule):
            kb_from_doc(doc)

    def test_empty_tree_empty_rules_is_empty_model(self):
        kb = KnowledgeBase(
            tree=build_objectives_tree([]), templates=(), horizon=2.0
        )
        model = synthesize_dynamic_model(kb)
        assert model.aggregates == () and model.topology.couplings == ()
