"""Model synthesis from declarative knowledge.

An objectives tree decomposes a global goal into subgoals along dotted
identifiers.  Canonical templates are aggregate definitions with named,
typed free slots; binding a template yields a template model that can be
instantiated as a concrete aggregate.  A knowledge base pairs these
declarative parts with procedural ones: correspondence rules that assign a
template to every leaf goal, and relation rules that derive couplings from
inferred facts.  synthesize_dynamic_model turns a validated knowledge base
into a runnable dynamic model whose slot names are the leaf identifiers,
so the goal decomposition stays visible in the topology.

The rule language is positive (no negation or retraction): inference is
monotone and reaches a unique fixpoint under the fixed evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import docspec
from .engine import DynamicModel
from .errors import (
    AmbiguousAssignment,
    BoundExceeded,
    DuplicateId,
    InvalidCoupling,
    InvariantViolation,
    MultipleRoots,
    OrphanNode,
    TypeMismatch,
    UnboundSlot,
    UncoveredGoal,
    UnknownRule,
)
from .structure import Topology


# --- objectives tree -----------------------------------------------------


@dataclass(frozen=True)
class GoalNode:
    """One node: dotted identifier, goal label, optional target, link label."""

    identifier: str
    label: str = ""
    target: Optional[tuple[float, ...]] = None
    link: str = ""

    def __post_init__(self):
        if self.target is not None:
            object.__setattr__(
                self, "target", tuple(float(v) for v in self.target)
            )

    @property
    def parent_id(self) -> Optional[str]:
        if "." not in self.identifier:
            return None
        return self.identifier.rsplit(".", 1)[0]


@dataclass(frozen=True)
class ObjectivesTree:
    """Goal decomposition; structure implied by the dotted identifiers."""

    nodes: tuple[GoalNode, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.identifier))
        )
        ids = [n.identifier for n in self.nodes]
        seen = set()
        for i in ids:
            if i in seen:
                raise DuplicateId(f"duplicate identifier {i!r}")
            seen.add(i)
        roots = [n for n in self.nodes if n.parent_id is None]
        if len(roots) > 1:
            raise MultipleRoots(
                "multiple roots: " + ", ".join(n.identifier for n in roots)
            )
        for n in self.nodes:
            p = n.parent_id
            if p is not None and p not in seen:
                raise OrphanNode(f"{n.identifier!r} has no parent node {p!r}")

    def node_map(self) -> dict[str, GoalNode]:
        return {n.identifier: n for n in self.nodes}

    def children(self, identifier: str) -> list[GoalNode]:
        return [n for n in self.nodes if n.parent_id == identifier]

    def root(self) -> Optional[GoalNode]:
        for n in self.nodes:
            if n.parent_id is None:
                return n
        return None

    def leaves(self) -> list[GoalNode]:
        parents = {n.parent_id for n in self.nodes}
        return [n for n in self.nodes if n.identifier not in parents]


def build_objectives_tree(specs) -> ObjectivesTree:
    """Build and validate a tree from node specs.

    Accepts a mapping identifier -> label, an iterable of identifiers, or an
    iterable of dicts with keys id, label, target, link.
    """
    nodes = []
    if isinstance(specs, Mapping):
        specs = [{"id": k, "label": v} for k, v in sorted(specs.items())]
    for item in specs:
        if isinstance(item, str):
            item = {"id": item}
        nodes.append(
            GoalNode(
                identifier=item["id"],
                label=item.get("label", ""),
                target=item.get("target"),
                link=item.get("link", ""),
            )
        )
    return ObjectivesTree(tuple(nodes))


# --- canonical templates ----------------------------------------------------

SLOT_TYPES = ("number", "string", "array", "object")


def _walk_slots(node, found: set):
    if isinstance(node, dict):
        if set(node.keys()) == {"slot"}:
            found.add(node["slot"])
            return
        for v in node.values():
            _walk_slots(v, found)
    elif isinstance(node, (list, tuple)):
        for v in node:
            _walk_slots(v, found)


def _substitute(node, values: Mapping[str, object]):
    if isinstance(node, dict):
        if set(node.keys()) == {"slot"}:
            return values[node["slot"]]
        return {k: _substitute(v, values) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_substitute(v, values) for v in node]
    return node


@dataclass(frozen=True)
class CanonicalTemplate:
    """Aggregate definition with typed free slots and transformation rules.

    spec is an aggregate document section in which any value may be the
    placeholder {"slot": name}; slots declares each placeholder's type; tr
    names the permitted structure transformations.
    """

    template_id: str
    spec: dict
    slots: tuple[tuple[str, str], ...] = ()
    tr: tuple[tuple[str, dict], ...] = ()

    def __post_init__(self):
        if isinstance(self.slots, dict):
            object.__setattr__(self, "slots", tuple(sorted(self.slots.items())))
        if isinstance(self.tr, dict):
            object.__setattr__(self, "tr", tuple(sorted(self.tr.items())))
        declared = dict(self.slots)
        for name, typ in declared.items():
            if typ not in SLOT_TYPES:
                raise TypeMismatch(f"slot {name!r} has unknown type {typ!r}")
        used: set[str] = set()
        _walk_slots(self.spec, used)
        undeclared = used - set(declared)
        if undeclared:
            raise InvariantViolation(
                f"{self.template_id}: undeclared slots {sorted(undeclared)}"
            )
        _check_template_shape(self.template_id, self.spec)

    def free_slots(self) -> dict[str, str]:
        return dict(self.slots)

    def tr_rules(self) -> dict[str, dict]:
        return dict(self.tr)


def _check_template_shape(template_id: str, spec: Mapping):
    """Structural invariants that hold even with slots still free."""
    for key in ("variables", "initial", "initial_law", "laws", "partition"):
        if key not in spec:
            raise InvariantViolation(f"{template_id}: template lacks {key!r}")
    laws = spec["laws"]
    if isinstance(laws, Mapping) and not laws:
        raise InvariantViolation(f"{template_id}: template has an empty law table")
    variables = spec["variables"]
    if isinstance(variables, (list, tuple)) and not variables:
        raise InvariantViolation(f"{template_id}: template has no variables")


@dataclass(frozen=True)
class TemplateModel:
    """A template with every free slot bound to a concrete value."""

    template: CanonicalTemplate
    bindings: tuple[tuple[str, object], ...]

    def __post_init__(self):
        if isinstance(self.bindings, dict):
            object.__setattr__(self, "bindings", tuple(sorted(self.bindings.items())))

    def resolved_spec(self) -> dict:
        return _substitute(self.template.spec, dict(self.bindings))

    def instantiate(self, agg_id: str):
        return docspec.aggregate_from_spec(agg_id, self.resolved_spec())


_TYPE_CHECKS = {
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "string": lambda v: isinstance(v, str),
    "array": lambda v: isinstance(v, (list, tuple)),
    "object": lambda v: isinstance(v, dict),
}


def bind_template(
    template: CanonicalTemplate, bindings: Mapping[str, object]
) -> TemplateModel:
    free = template.free_slots()
    missing = sorted(set(free) - set(bindings))
    if missing:
        raise UnboundSlot(f"{template.template_id}: unbound slots {missing}")
    for name, typ in free.items():
        if not _TYPE_CHECKS[typ](bindings[name]):
            raise TypeMismatch(
                f"{template.template_id}: slot {name!r} expects {typ}, "
                f"got {type(bindings[name]).__name__}"
            )
    relevant = {k: v for k, v in bindings.items() if k in free}
    return TemplateModel(template, tuple(sorted(relevant.items())))


def _get_path(spec: dict, path: str):
    node = spec
    for part in path.split("."):
        node = node[part]
    return node


def _set_path(spec: dict, path: str, value):
    parts = path.split(".")
    node = spec
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def _del_path(spec: dict, path: str):
    parts = path.split(".")
    node = spec
    for part in parts[:-1]:
        node = node[part]
    del node[parts[-1]]


def transform_template(
    template: CanonicalTemplate, rule_name: str
) -> CanonicalTemplate:
    """Apply one permitted transformation; the result is re-validated.

    Rule ops: {"identity": true} | {"add_output": symbol}
    {"add_input": {"symbol": s, "fields": [...]}}
    {"set": {"path": dotted, "value": v}} | {"remove": {"path": dotted}}
    """
    rules = template.tr_rules()
    if rule_name not in rules:
        raise UnknownRule(f"{template.template_id}: no transformation {rule_name!r}")
    op = rules[rule_name]
    import copy

    spec = copy.deepcopy(template.spec)
    try:
        if "identity" in op:
            pass
        elif "add_output" in op:
            spec.setdefault("outputs", [])
            if op["add_output"] not in spec["outputs"]:
                spec["outputs"] = list(spec["outputs"]) + [op["add_output"]]
        elif "add_input" in op:
            entry = op["add_input"]
            inputs = dict(spec.get("inputs", {}))
            inputs[entry["symbol"]] = {"fields": list(entry.get("fields", ()))}
            spec["inputs"] = inputs
        elif "set" in op:
            _set_path(spec, op["set"]["path"], op["set"]["value"])
        elif "remove" in op:
            _del_path(spec, op["remove"]["path"])
        else:
            raise UnknownRule(
                f"{template.template_id}: unrecognized transformation op {op!r}"
            )
    except (KeyError, TypeError) as exc:
        raise InvariantViolation(
            f"{template.template_id}: transformation {rule_name!r} failed ({exc})"
        ) from exc
    return CanonicalTemplate(template.template_id, spec, template.slots, template.tr)


# --- forward-chaining inference --------------------------------------------


def _is_var(term) -> bool:
    return isinstance(term, str) and term.startswith("?")


def _match_pattern(pattern: Sequence, fact: tuple, env: dict) -> Optional[dict]:
    if len(pattern) != len(fact):
        return None
    env = dict(env)
    for p, f in zip(pattern, fact):
        if _is_var(p):
            if p in env and env[p] != f:
                return None
            env[p] = f
        elif p != f:
            return None
    return env


def _match_all(patterns: Sequence, facts: Sequence[tuple], env: dict):
    if not patterns:
        yield env
        return
    head, rest = patterns[0], patterns[1:]
    for fact in facts:
        got = _match_pattern(head, fact, env)
        if got is not None:
            yield from _match_all(rest, facts, got)


def _instantiate_term(term, env: dict):
    if _is_var(term):
        if term not in env:
            raise UnknownRule(f"unbound variable {term!r} in rule conclusion")
        return env[term]
    return term


def infer(
    rules: Sequence[Mapping], facts: Sequence[Sequence], bound: int = 100
) -> list[tuple]:
    """Forward-chain to fixpoint; each pass derives from the previous pass.

    A rule is {"id": ..., "when": [patterns], "then": [conclusions]} where
    terms starting with "?" are variables.  Raises BoundExceeded if every
    one of `bound` passes still derived new facts.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    known: dict[tuple, None] = {tuple(f): None for f in facts}
    for _ in range(bound):
        fact_list = list(known)
        added = []
        for rule in rules:
            patterns = [tuple(p) for p in rule.get("when", ())]
            for env in _match_all(patterns, fact_list, {}):
                for concl in rule.get("then", ()):
                    new = tuple(_instantiate_term(t, env) for t in concl)
                    if new not in known:
                        added.append(new)
        if not added:
            return list(known)
        for f in added:
            known.setdefault(f, None)
    raise BoundExceeded(f"no fixpoint after {bound} inference passes")


# --- knowledge base and synthesis -------------------------------------------


@dataclass(frozen=True)
class CorrespondenceRule:
    """Assigns a template model to goals matching a dotted-identifier prefix."""

    goal: str  # identifier prefix, e.g. "1.2" matches "1.2" and "1.2.x"
    template: str
    bindings: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if isinstance(self.bindings, dict):
            object.__setattr__(self, "bindings", tuple(sorted(self.bindings.items())))

    def matches(self, identifier: str) -> bool:
        return identifier == self.goal or identifier.startswith(self.goal + ".")


@dataclass(frozen=True)
class RelationRule:
    """Derives couplings from inferred facts; ground values substitute ?vars."""

    rule_id: str
    when: tuple[tuple, ...]
    coupling: dict

    def __post_init__(self):
        object.__setattr__(self, "when", tuple(tuple(p) for p in self.when))
        object.__setattr__(self, "coupling", dict(self.coupling))


@dataclass(frozen=True)
class KnowledgeBase:
    """Declarative + procedural knowledge needed to synthesize a model."""

    tree: ObjectivesTree
    templates: tuple[tuple[str, CanonicalTemplate], ...]
    correspondence: tuple[CorrespondenceRule, ...] = ()
    relations: tuple[RelationRule, ...] = ()
    inference: tuple[dict, ...] = ()  # generic rules run before relation rules
    facts: tuple[tuple, ...] = ()
    horizon: float = 1.0
    inference_bound: int = 100

    def __post_init__(self):
        if isinstance(self.templates, dict):
            object.__setattr__(self, "templates", tuple(sorted(self.templates.items())))
        object.__setattr__(self, "correspondence", tuple(self.correspondence))
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "inference", tuple(dict(r) for r in self.inference))
        object.__setattr__(self, "facts", tuple(tuple(f) for f in self.facts))
        templates = dict(self.templates)
        for rule in self.correspondence:
            if rule.template not in templates:
                raise UnknownRule(
                    f"correspondence rule for {rule.goal!r} references "
                    f"unknown template {rule.template!r}"
                )
        seen = set()
        for rule in self.relations:
            if rule.rule_id in seen:
                raise DuplicateId(f"duplicate relation rule id {rule.rule_id!r}")
            seen.add(rule.rule_id)

    def template_map(self) -> dict[str, CanonicalTemplate]:
        return dict(self.templates)


def _substitute_vars(node, env: dict):
    if isinstance(node, dict):
        return {k: _substitute_vars(v, env) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_substitute_vars(v, env) for v in node]
    if _is_var(node):
        return env[node]
    return node


def assign_templates(kb: KnowledgeBase) -> dict[str, TemplateModel]:
    """Leaf goal -> bound template model; longest goal-prefix match wins."""
    templates = kb.template_map()
    out: dict[str, TemplateModel] = {}
    for leaf in kb.tree.leaves():
        matching = [r for r in kb.correspondence if r.matches(leaf.identifier)]
        if not matching:
            raise UncoveredGoal(leaf.identifier)
        best_len = max(len(r.goal) for r in matching)
        best = [r for r in matching if len(r.goal) == best_len]
        if len(best) > 1:
            raise AmbiguousAssignment(
                f"goal {leaf.identifier!r} matched by rules "
                + ", ".join(repr(r.goal) for r in best)
            )
        rule = best[0]
        out[leaf.identifier] = bind_template(
            templates[rule.template], dict(rule.bindings)
        )
    return out


def derive_couplings(kb: KnowledgeBase) -> list:
    """Run inference, then ground every relation rule against the fact set."""
    derived = infer(list(kb.inference), list(kb.facts), kb.inference_bound)
    couplings = []
    seen = set()
    for rule in kb.relations:
        for env in _match_all(list(rule.when), derived, {}):
            spec = _substitute_vars(rule.coupling, env)
            coupling = docspec.coupling_from_spec(spec)
            if coupling not in seen:
                seen.add(coupling)
                couplings.append(coupling)
    return couplings


def synthesize_dynamic_model(kb: KnowledgeBase) -> DynamicModel:
    """Transform declarative knowledge into a runnable dynamic model.

    Every leaf goal gets exactly one aggregate (slot id = goal identifier),
    relation rules produce the coupling set, and the result must pass
    topology validation with an empty report.
    """
    assignments = assign_templates(kb)
    aggregates = {}
    slots = []
    for identifier in sorted(assignments):
        agg = assignments[identifier].instantiate(identifier)
        aggregates[identifier] = agg
        slots.append((identifier, identifier))
    couplings = derive_couplings(kb)
    topology = Topology(tuple(slots), tuple(couplings))
    from .structure import validate_topology

    findings = validate_topology(topology, aggregates)
    if findings:
        raise InvalidCoupling("; ".join(findings))
    return DynamicModel(
        horizon=kb.horizon,
        aggregates=tuple(sorted(aggregates.items())),
        topology=topology,
    )
