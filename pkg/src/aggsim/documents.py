"""JSON document formats, canonical serialization, and digests.

Documents are plain JSON.  The canonical form (sorted keys, minimal
separators, unescaped unicode, Python's shortest round-trip float
formatting) is the input to the SHA-256 digests that tie run logs to the
exact model and scenario they were produced from.  Digests cover the
semantic core of a document — metadata, criterion references, and embedded
knowledge-base sections do not change a digest.
"""

from __future__ import annotations

import hashlib
import json
from typing import Mapping

from . import docspec
from .criteria import Criterion
from .engine import (
    AfterEffectEntry,
    Delivery,
    DynamicModel,
    MonitoringEntry,
    ReestimationRule,
    Scenario,
    TimeEntry,
)
from .errors import AggsimError, DocumentError
from .structure import validate_topology
from .synthesis import (
    CanonicalTemplate,
    CorrespondenceRule,
    KnowledgeBase,
    RelationRule,
    build_objectives_tree,
)

MODEL_FORMAT = "aggsim-model/1"
SCENARIO_FORMAT = "aggsim-scenario/1"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


# --- model documents ----------------------------------------------------


def model_to_doc(model: DynamicModel) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "horizon": model.horizon,
        "aggregates": {
            agg_id: docspec.aggregate_to_spec(agg) for agg_id, agg in model.aggregates
        },
        "topology": docspec.topology_to_spec(model.topology),
    }
    if model.reestimation:
        doc["reestimation"] = [
            {"scope": r.scope, "when": [dict(c) for c in r.when], "action": dict(r.action)}
            for r in model.reestimation
        ]
    return doc


def model_from_doc(doc: Mapping) -> DynamicModel:
    try:
        fmt = doc.get("format", MODEL_FORMAT)
        if fmt != MODEL_FORMAT:
            raise DocumentError(f"unsupported model format {fmt!r}")
        aggregates = tuple(
            (agg_id, docspec.aggregate_from_spec(agg_id, spec))
            for agg_id, spec in sorted(doc["aggregates"].items())
        )
        reestimation = tuple(
            ReestimationRule(r["scope"], tuple(r.get("when", ())), r["action"])
            for r in doc.get("reestimation", ())
        )
        return DynamicModel(
            horizon=float(doc["horizon"]),
            aggregates=aggregates,
            topology=docspec.topology_from_spec(doc["topology"]),
            reestimation=reestimation,
        )
    except DocumentError:
        raise
    except (KeyError, TypeError, AttributeError) as exc:
        raise DocumentError(f"bad model document: {exc}") from exc
    except AggsimError as exc:
        raise DocumentError(str(exc)) from exc


def _model_core(doc: Mapping) -> dict:
    """Digest input: the semantic core, with the topology flattened so a
    model and its flattened form share one digest (they run identically)."""
    from .structure import flatten

    core = {
        k: doc[k]
        for k in ("format", "horizon", "aggregates", "reestimation")
        if k in doc
    }
    core["topology"] = docspec.topology_to_spec(
        flatten(docspec.topology_from_spec(doc["topology"]))
    )
    return core


def model_doc_digest(doc: Mapping) -> str:
    return digest(_model_core(doc))


def model_digest(model: DynamicModel) -> str:
    return model_doc_digest(model_to_doc(model))


# --- scenario documents -------------------------------------------------------


def scenario_to_doc(scenario: Scenario) -> dict:
    doc: dict = {"format": SCENARIO_FORMAT, "id": scenario.scenario_id}
    if scenario.bindings:
        doc["bindings"] = dict(scenario.bindings)
    if scenario.time_diagram:
        doc["time_diagram"] = [
            {"t": e.time, "target": e.target, "symbol": e.symbol}
            for e in scenario.time_diagram
        ]
    if scenario.after_effects:
        doc["after_effects"] = [
            {
                "source": ae.source,
                "from": ae.from_region,
                "to": ae.to_region,
                "deliveries": [
                    {"target": d.target, "input": d.input, "delay": d.delay}
                    for d in ae.deliveries
                ],
            }
            for ae in scenario.after_effects
        ]
    if scenario.monitoring:
        doc["monitoring"] = [
            {"t": m.time, "target": m.target, "kind": m.kind, "fields": m.record()}
            for m in scenario.monitoring
        ]
    return doc


def scenario_from_doc(doc: Mapping) -> Scenario:
    try:
        fmt = doc.get("format", SCENARIO_FORMAT)
        if fmt != SCENARIO_FORMAT:
            raise DocumentError(f"unsupported scenario format {fmt!r}")
        return Scenario(
            scenario_id=doc.get("id", "scenario"),
            bindings=tuple(sorted(doc.get("bindings", {}).items())),
            time_diagram=tuple(
                TimeEntry(float(e["t"]), e["target"], e["symbol"])
                for e in doc.get("time_diagram", ())
            ),
            after_effects=tuple(
                AfterEffectEntry(
                    ae["source"],
                    ae["from"],
                    ae["to"],
                    tuple(
                        Delivery(d["target"], d["input"], float(d.get("delay", 0.0)))
                        for d in ae.get("deliveries", ())
                    ),
                )
                for ae in doc.get("after_effects", ())
            ),
            monitoring=tuple(
                MonitoringEntry(
                    float(m["t"]),
                    m["target"],
                    m["kind"],
                    tuple(sorted(m.get("fields", {}).items())),
                )
                for m in doc.get("monitoring", ())
            ),
        )
    except DocumentError:
        raise
    except (KeyError, TypeError, AttributeError) as exc:
        raise DocumentError(f"bad scenario document: {exc}") from exc


def _scenario_core(doc: Mapping) -> dict:
    return {
        k: doc[k]
        for k in (
            "format",
            "id",
            "bindings",
            "time_diagram",
            "after_effects",
            "monitoring",
        )
        if k in doc
    }


def scenario_doc_digest(doc: Mapping) -> str:
    return digest(_scenario_core(doc))


def scenario_digest(scenario: Scenario) -> str:
    return scenario_doc_digest(scenario_to_doc(scenario))


# --- criterion references --------------------------------------------------------


def criterion_from_spec(spec: Mapping) -> Criterion:
    try:
        return Criterion(
            kind=spec["kind"],
            scope=spec["scope"],
            target=spec.get("target"),
            direction=spec.get("direction", "minimize"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise DocumentError(f"bad criterion spec: {exc}") from exc


def criterion_to_spec(criterion: Criterion) -> dict:
    target = criterion.target
    if isinstance(target, tuple):
        target = list(target)
    return {
        "kind": criterion.kind,
        "scope": criterion.scope,
        "target": target,
        "direction": criterion.direction,
    }


def scenario_criteria(doc: Mapping) -> dict[str, Criterion]:
    return {
        name: criterion_from_spec(spec)
        for name, spec in sorted(doc.get("criteria", {}).items())
    }


# --- knowledge-base documents ------------------------------------------------------


def kb_from_doc(doc: Mapping) -> KnowledgeBase:
    """Read a knowledge base from a document's "knowledge" section (or a
    bare section)."""
    section = doc.get("knowledge", doc)
    try:
        templates = tuple(
            (
                tid,
                CanonicalTemplate(
                    template_id=tid,
                    spec=t["spec"],
                    slots=tuple(sorted(t.get("slots", {}).items())),
                    tr=tuple(sorted(t.get("tr", {}).items())),
                ),
            )
            for tid, t in sorted(section.get("templates", {}).items())
        )
        return KnowledgeBase(
            tree=build_objectives_tree(section.get("objectives", ())),
            templates=templates,
            correspondence=tuple(
                CorrespondenceRule(
                    r["goal"], r["template"], tuple(sorted(r.get("bindings", {}).items()))
                )
                for r in section.get("correspondence", ())
            ),
            relations=tuple(
                RelationRule(r["id"], tuple(tuple(p) for p in r.get("when", ())), r["coupling"])
                for r in section.get("relations", ())
            ),
            inference=tuple(section.get("inference", ())),
            facts=tuple(tuple(f) for f in section.get("facts", ())),
            horizon=float(section.get("horizon", 1.0)),
            inference_bound=int(section.get("inference_bound", 100)),
        )
    except DocumentError:
        raise
    except (KeyError, TypeError, AttributeError) as exc:
        raise DocumentError(f"bad knowledge-base document: {exc}") from exc


def kb_to_doc(kb: KnowledgeBase) -> dict:
    return {
        "knowledge": {
            "objectives": [
                {
                    "id": n.identifier,
                    "label": n.label,
                    **({"target": list(n.target)} if n.target is not None else {}),
                    **({"link": n.link} if n.link else {}),
                }
                for n in kb.tree.nodes
            ],
            "templates": {
                tid: {"spec": t.spec, "slots": dict(t.slots), "tr": dict(t.tr)}
                for tid, t in kb.templates
            },
            "correspondence": [
                {"goal": r.goal, "template": r.template, "bindings": dict(r.bindings)}
                for r in kb.correspondence
            ],
            "relations": [
                {"id": r.rule_id, "when": [list(p) for p in r.when], "coupling": r.coupling}
                for r in kb.relations
            ],
            "inference": list(kb.inference),
            "facts": [list(f) for f in kb.facts],
            "horizon": kb.horizon,
            "inference_bound": kb.inference_bound,
        }
    }


# --- validation reports --------------------------------------------------------------


def validate_model_doc(doc: Mapping) -> list[str]:
    """All findings for a model document; empty means clean."""
    try:
        model = model_from_doc(doc)
    except AggsimError as exc:
        return [str(exc)]
    return validate_topology(model.topology, model.aggregate_map())


def validate_scenario_doc(doc: Mapping, model_doc: Mapping = None) -> list[str]:
    """Findings for a scenario document, optionally against its model."""
    findings: list[str] = []
    try:
        scenario = scenario_from_doc(doc)
    except AggsimError as exc:
        return [str(exc)]
    try:
        scenario_criteria(doc)
    except AggsimError as exc:
        findings.append(str(exc))
    if model_doc is not None:
        want = doc.get("model_digest")
        if want and want != model_doc_digest(model_doc):
            findings.append("scenario's model digest does not match the model")
        try:
            model = model_from_doc(model_doc)
        except AggsimError as exc:
            findings.append(str(exc))
            return findings
        from .engine import Run
        from .errors import ScenarioValidationError, ModelValidationError

        try:
            Run(model, scenario, seed=0)
        except ScenarioValidationError as exc:
            findings.extend(exc.findings)
        except ModelValidationError as exc:
            findings.extend(exc.findings)
    return findings
