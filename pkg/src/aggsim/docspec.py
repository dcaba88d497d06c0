"""Converters between domain objects and their JSON document sections.

Used by the document layer (model/scenario files) and by template
instantiation in the synthesis module.  Converters are strict: unknown
shapes raise DocumentError with a finding message.
"""

from __future__ import annotations

from typing import Mapping

from .aggregate import Aggregate, OperatorRule, OutputRule
from .errors import AggsimError, DocumentError
from .laws import AnalyticLaw
from .paramspace import Partition, Region
from .structure import BOUNDARY, Coupling, Endpoint, Topology


# --- laws ---------------------------------------------------------------


def law_from_spec(spec: Mapping) -> AnalyticLaw:
    try:
        return AnalyticLaw(
            kind=spec["kind"],
            rates=tuple(spec.get("rates", ())),
            lambdas=tuple(spec.get("lambdas", ())),
            tables=tuple(tuple(tuple(p) for p in t) for t in spec.get("tables", ())),
            drift=tuple(spec.get("drift", ())),
            sigma=tuple(spec.get("sigma", ())),
            substream=spec.get("substream", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"bad law spec: {exc}") from exc


def law_to_spec(law: AnalyticLaw) -> dict:
    spec = {"kind": law.kind}
    if law.rates:
        spec["rates"] = list(law.rates)
    if law.lambdas:
        spec["lambdas"] = list(law.lambdas)
    if law.tables:
        spec["tables"] = [[list(p) for p in t] for t in law.tables]
    if law.drift:
        spec["drift"] = list(law.drift)
    if law.sigma:
        spec["sigma"] = list(law.sigma)
    if law.substream:
        spec["substream"] = law.substream
    return spec


# --- partitions -----------------------------------------------------------


def partition_from_spec(spec: Mapping) -> Partition:
    try:
        regions = tuple(
            Region(name, tuple(tuple(b) for b in bounds))
            for name, bounds in sorted(spec["regions"].items())
        )
        return Partition(tuple(tuple(b) for b in spec["box"]), regions)
    except (KeyError, TypeError, AttributeError) as exc:
        raise DocumentError(f"bad partition spec: {exc}") from exc


def partition_to_spec(partition: Partition) -> dict:
    return {
        "box": [list(b) for b in partition.box],
        "regions": {
            r.name: [list(b) for b in r.bounds] for r in partition.regions
        },
    }


# --- operator and output rules ----------------------------------------------


def operator_rule_from_spec(spec: Mapping) -> OperatorRule:
    return OperatorRule(
        trigger=spec["trigger"],
        guard=tuple(spec.get("guard", ())),
        actions=tuple(spec.get("actions", ())),
    )


def operator_rule_to_spec(rule: OperatorRule) -> dict:
    out = {"trigger": rule.trigger}
    if rule.guard:
        out["guard"] = [dict(c) for c in rule.guard]
    if rule.actions:
        out["actions"] = [dict(a) for a in rule.actions]
    return out


def output_rule_from_spec(spec: Mapping) -> OutputRule:
    return OutputRule(
        symbol=spec["symbol"],
        when=spec["when"],
        period=spec.get("period"),
        payload={k: dict(v) for k, v in spec.get("payload", {}).items()},
    )


def output_rule_to_spec(rule: OutputRule) -> dict:
    out = {"symbol": rule.symbol, "when": rule.when}
    if rule.period is not None:
        out["period"] = rule.period
    if rule.payload:
        out["payload"] = {k: dict(v) for k, v in rule.payload}
    return out


# --- aggregates ----------------------------------------------------------------


def aggregate_from_spec(agg_id: str, spec: Mapping) -> Aggregate:
    try:
        rules = spec.get("rules", {})
        return Aggregate(
            id=agg_id,
            variables=tuple(spec["variables"]),
            initial=tuple(spec["initial"]),
            initial_law=spec["initial_law"],
            initial_mode=spec.get("initial_mode", "default"),
            laws=tuple(
                (name, law_from_spec(s)) for name, s in sorted(spec["laws"].items())
            ),
            partition=partition_from_spec(spec["partition"]),
            controls=tuple(spec.get("controls", ())),
            inputs=tuple(
                (sym, tuple(d.get("fields", ())))
                for sym, d in sorted(spec.get("inputs", {}).items())
            ),
            outputs=tuple(spec.get("outputs", ())),
            monitoring=tuple(
                (kind, tuple(d.get("fields", ())))
                for kind, d in sorted(spec.get("monitoring", {}).items())
            ),
            h_control=tuple(
                operator_rule_from_spec(r) for r in rules.get("control", ())
            ),
            h_input=tuple(operator_rule_from_spec(r) for r in rules.get("input", ())),
            h_monitoring=tuple(
                operator_rule_from_spec(r) for r in rules.get("monitoring", ())
            ),
            emits=tuple(output_rule_from_spec(e) for e in spec.get("emits", ())),
        )
    except DocumentError:
        raise
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"aggregate {agg_id!r}: bad spec ({exc})") from exc
    except AggsimError as exc:
        raise DocumentError(f"aggregate {agg_id!r}: {exc}") from exc


def aggregate_to_spec(agg: Aggregate) -> dict:
    spec = {
        "variables": list(agg.variables),
        "initial": list(agg.initial),
        "initial_law": agg.initial_law,
        "initial_mode": agg.initial_mode,
        "laws": {name: law_to_spec(law) for name, law in agg.laws},
        "partition": partition_to_spec(agg.partition),
    }
    if agg.controls:
        spec["controls"] = list(agg.controls)
    if agg.inputs:
        spec["inputs"] = {s: {"fields": list(f)} for s, f in agg.inputs}
    if agg.outputs:
        spec["outputs"] = list(agg.outputs)
    if agg.monitoring:
        spec["monitoring"] = {k: {"fields": list(f)} for k, f in agg.monitoring}
    rules = {}
    if agg.h_control:
        rules["control"] = [operator_rule_to_spec(r) for r in agg.h_control]
    if agg.h_input:
        rules["input"] = [operator_rule_to_spec(r) for r in agg.h_input]
    if agg.h_monitoring:
        rules["monitoring"] = [operator_rule_to_spec(r) for r in agg.h_monitoring]
    if rules:
        spec["rules"] = rules
    if agg.emits:
        spec["emits"] = [output_rule_to_spec(e) for e in agg.emits]
    return spec


# --- topology ----------------------------------------------------------------


def endpoint_from_spec(spec: Mapping, role: str) -> Endpoint:
    if "boundary" in spec:
        return Endpoint(BOUNDARY, symbol=spec["boundary"])
    slot = spec.get("slot")
    if slot is None:
        raise DocumentError(f"coupling {role} needs a slot or boundary")
    if role == "source" and "transition" in spec:
        frm, to = spec["transition"]
        return Endpoint(slot, transition=(frm, to))
    key = "output" if role == "source" else "input"
    if key not in spec:
        raise DocumentError(f"coupling {role} needs {key!r} or a transition")
    return Endpoint(slot, symbol=spec[key])


def endpoint_to_spec(ep: Endpoint, role: str) -> dict:
    if ep.slot == BOUNDARY:
        return {"boundary": ep.symbol}
    if role == "source" and ep.transition is not None:
        return {"slot": ep.slot, "transition": list(ep.transition)}
    key = "output" if role == "source" else "input"
    return {"slot": ep.slot, key: ep.symbol}


def coupling_from_spec(spec: Mapping) -> Coupling:
    return Coupling(
        source=endpoint_from_spec(spec["source"], "source"),
        dest=endpoint_from_spec(spec["dest"], "dest"),
        translation=dict(spec.get("translation", {})),
        delay=float(spec.get("delay", 0.0)),
    )


def coupling_to_spec(c: Coupling) -> dict:
    spec = {
        "source": endpoint_to_spec(c.source, "source"),
        "dest": endpoint_to_spec(c.dest, "dest"),
        "delay": c.delay,
    }
    if c.translation:
        spec["translation"] = dict(c.translation)
    return spec


def topology_from_spec(spec: Mapping) -> Topology:
    try:
        slots = []
        for name, content in sorted(spec["slots"].items()):
            if "aggregate" in content:
                slots.append((name, content["aggregate"]))
            elif "topology" in content:
                slots.append((name, topology_from_spec(content["topology"])))
            else:
                raise DocumentError(f"slot {name!r} needs an aggregate or a topology")
        couplings = tuple(coupling_from_spec(c) for c in spec.get("couplings", ()))
        return Topology(tuple(slots), couplings)
    except DocumentError:
        raise
    except (KeyError, TypeError, AttributeError) as exc:
        raise DocumentError(f"bad topology spec: {exc}") from exc


def topology_to_spec(topology: Topology) -> dict:
    slots = {}
    for name, content in topology.slots:
        if isinstance(content, Topology):
            slots[name] = {"topology": topology_to_spec(content)}
        else:
            slots[name] = {"aggregate": content}
    out = {"slots": slots}
    if topology.couplings:
        out["couplings"] = [coupling_to_spec(c) for c in topology.couplings]
    return out
