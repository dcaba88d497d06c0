"""Set-theoretic system structures, hierarchy topology and self-organization.

Covers three related concerns: the component-tuple view of a system (a
constructed graph plus named parameter/goal/strategy records and read-only
combination projections), the seven structural mutations a self-organizing
system may perform, and the hierarchy of subsystem slots with couplings,
including flattening nested topologies into an equivalent single level.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Callable, Mapping, Optional, Sequence, Union

from .errors import (
    DanglingRelation,
    DuplicateEntity,
    InvalidCoupling,
    UnknownComponent,
    UnknownEntity,
    UnknownLaw,
)

# --- constructed structures -------------------------------------------------


@dataclass(frozen=True)
class Struct:
    """A graph built from elements and relations by a composition law."""

    nodes: tuple[tuple[str, tuple], ...]            # (id, attrs-items)
    edges: tuple[tuple[str, str, str, tuple], ...]  # (id, src, dst, attrs-items)

    @classmethod
    def build(cls, nodes: Mapping[str, dict], edges: Mapping[str, tuple]) -> "Struct":
        return cls(
            tuple(sorted((n, tuple(sorted(a.items()))) for n, a in nodes.items())),
            tuple(
                sorted(
                    (e, s, d, tuple(sorted(a.items())))
                    for e, (s, d, a) in edges.items()
                )
            ),
        )

    def node_ids(self) -> set[str]:
        return {n for n, _ in self.nodes}

    def edge_ids(self) -> set[str]:
        return {e for e, _, _, _ in self.edges}

    def node_map(self) -> dict[str, dict]:
        return {n: dict(a) for n, a in self.nodes}

    def edge_map(self) -> dict[str, tuple[str, str, dict]]:
        return {e: (s, d, dict(a)) for e, s, d, a in self.edges}


def _direct(elements, relations) -> Struct:
    nodes = {e: {} for e in elements}
    edges = {}
    for rel in relations:
        if isinstance(rel, (tuple, list)) and len(rel) == 2:
            src, dst = rel
            rid, attrs = f"{src}->{dst}", {}
        else:
            rid, src, dst = rel[0], rel[1], rel[2]
            attrs = dict(rel[3]) if len(rel) > 3 else {}
        if src not in nodes or dst not in nodes:
            raise DanglingRelation(f"relation {rid} references missing element")
        edges[rid] = (src, dst, attrs)
    return Struct.build(nodes, edges)


COMPOSITION_LAWS: dict[str, Callable] = {"direct": _direct}


def compose(elements: Sequence[str], relations: Sequence, law: str = "direct") -> Struct:
    """Construct a structure from elements E and relations R by a named law."""
    if law not in COMPOSITION_LAWS:
        raise UnknownLaw(f"composition law {law!r} is not registered")
    return COMPOSITION_LAWS[law](list(elements), list(relations))


@dataclass(frozen=True)
class ParametrizedStructure:
    """Struct(P): the base structure plus parametrized element/relation records."""

    base: Struct
    element_params: tuple[tuple[str, tuple], ...]
    relation_params: tuple[tuple[str, tuple], ...]


def parametrize(struct: Struct, assignments: Mapping[str, dict]) -> ParametrizedStructure:
    """Attach parameter records to existing nodes/edges; the base is unchanged."""
    nodes, edges = struct.node_ids(), struct.edge_ids()
    eparams, rparams = [], []
    for entity, values in sorted(assignments.items()):
        row = (entity, tuple(sorted(values.items())))
        if entity in nodes:
            eparams.append(row)
        elif entity in edges:
            rparams.append(row)
        else:
            raise UnknownEntity(f"no element or relation named {entity!r}")
    return ParametrizedStructure(struct, tuple(eparams), tuple(rparams))


# --- self-organization mutations ---------------------------------------------

MUTATION_KINDS = (
    "disconnect-node",
    "connect-node",
    "acquire-node",
    "discard-node",
    "acquire-link",
    "discard-link",
    "modify-link",
)


@dataclass(frozen=True)
class MutationOp:
    """One of the seven structure mutations."""

    kind: str
    node: Optional[str] = None
    link: Optional[str] = None
    src: Optional[str] = None
    dst: Optional[str] = None
    attrs: tuple = ()
    links: tuple = ()  # for connect-node: (link_id, src, dst, attrs-items)

    def __post_init__(self):
        if self.kind not in MUTATION_KINDS:
            raise ValueError(f"unknown mutation kind {self.kind!r}")
        if isinstance(self.attrs, dict):
            object.__setattr__(self, "attrs", tuple(sorted(self.attrs.items())))


def mutate(struct: Struct, op: MutationOp) -> Struct:
    """Apply one mutation, returning a new structure with no dangling links."""
    nodes = struct.node_map()
    edges = struct.edge_map()
    if op.kind == "acquire-node":
        if op.node in nodes:
            raise DuplicateEntity(f"node {op.node!r} already exists")
        nodes[op.node] = dict(op.attrs)
    elif op.kind == "discard-node":
        if op.node not in nodes:
            raise UnknownEntity(f"node {op.node!r} does not exist")
        del nodes[op.node]
        edges = {
            e: v for e, v in edges.items() if v[0] != op.node and v[1] != op.node
        }
    elif op.kind == "disconnect-node":
        if op.node not in nodes:
            raise UnknownEntity(f"node {op.node!r} does not exist")
        edges = {
            e: v for e, v in edges.items() if v[0] != op.node and v[1] != op.node
        }
    elif op.kind == "connect-node":
        if op.node not in nodes:
            raise UnknownEntity(f"node {op.node!r} does not exist")
        for lid, src, dst, attrs in op.links:
            if lid in edges:
                raise DuplicateEntity(f"link {lid!r} already exists")
            if op.node not in (src, dst):
                raise UnknownEntity(f"link {lid!r} is not incident to {op.node!r}")
            if src not in nodes or dst not in nodes:
                raise UnknownEntity(f"link {lid!r} references a missing node")
            edges[lid] = (src, dst, dict(attrs))
    elif op.kind == "acquire-link":
        if op.link in edges:
            raise DuplicateEntity(f"link {op.link!r} already exists")
        if op.src not in nodes or op.dst not in nodes:
            raise UnknownEntity(f"link {op.link!r} references a missing node")
        edges[op.link] = (op.src, op.dst, dict(op.attrs))
    elif op.kind == "discard-link":
        if op.link not in edges:
            raise UnknownEntity(f"link {op.link!r} does not exist")
        del edges[op.link]
    elif op.kind == "modify-link":
        if op.link not in edges:
            raise UnknownEntity(f"link {op.link!r} does not exist")
        src, dst, attrs = edges[op.link]
        attrs = dict(attrs)
        attrs.update(dict(op.attrs))
        edges[op.link] = (src, dst, attrs)
    return Struct.build(nodes, edges)


def apply_strategy(struct: Struct, ops: Sequence[MutationOp]) -> Struct:
    for op in ops:
        struct = mutate(struct, op)
    return struct


# --- full system model and projections ----------------------------------------

SYSTEM_COMPONENTS = (
    "E", "R", "Struct", "P", "W", "G", "Plans", "Strat", "C", "Rs", "S_E",
)


@dataclass(frozen=True)
class SystemModel:
    """The full component tuple of a complex system.

    W, Plans, Strat, Rs and S_E are carried as named declarative records;
    strategies name mutation sequences executable through mutate.
    """

    elements: tuple[str, ...] = ()
    relations: tuple = ()
    struct: Optional[Struct] = None
    parameters: tuple[tuple[str, tuple], ...] = ()
    properties: tuple[tuple[str, tuple], ...] = ()
    goals: tuple[str, ...] = ()
    plans: tuple[tuple[str, str], ...] = ()
    strategies: tuple[tuple[str, tuple[MutationOp, ...]], ...] = ()
    controls: tuple[str, ...] = ()
    resources: tuple[tuple[str, float], ...] = ()
    environment: tuple[tuple[str, tuple], ...] = ()

    def components(self) -> dict[str, object]:
        return {
            "E": self.elements,
            "R": self.relations,
            "Struct": self.struct,
            "P": self.parameters,
            "W": self.properties,
            "G": self.goals,
            "Plans": self.plans,
            "Strat": self.strategies,
            "C": self.controls,
            "Rs": self.resources,
            "S_E": self.environment,
        }


def project(model: SystemModel, names: Sequence[str]) -> Mapping[str, object]:
    """Read-only view of the requested component combination."""
    comps = model.components()
    view = {}
    for name in names:
        if name not in comps:
            raise UnknownComponent(f"{name!r} is not a system component")
        view[name] = comps[name]
    return MappingProxyType(view)


# --- hierarchy topology and couplings -----------------------------------------

BOUNDARY = "."  # endpoint marker for a nested topology's own ports


@dataclass(frozen=True)
class Endpoint:
    """Coupling endpoint: an aggregate slot's symbol/transition or a boundary port."""

    slot: str                       # slot name, or BOUNDARY for the enclosing topology
    symbol: Optional[str] = None    # output symbol (source) or input symbol (dest)
    transition: Optional[tuple[str, str]] = None  # (from, to) region pair as source

    def __post_init__(self):
        if self.transition is not None:
            object.__setattr__(self, "transition", tuple(self.transition))
        if self.symbol is None and self.transition is None:
            raise InvalidCoupling("endpoint needs a symbol or a transition")


@dataclass(frozen=True)
class Coupling:
    """Connection function entry: source event routed to a destination input."""

    source: Endpoint
    dest: Endpoint
    translation: tuple[tuple[str, str], ...] = ()
    delay: float = 0.0

    def __post_init__(self):
        if isinstance(self.translation, dict):
            object.__setattr__(
                self, "translation", tuple(sorted(self.translation.items()))
            )
        object.__setattr__(self, "delay", float(self.delay))

    def translation_map(self) -> dict[str, str]:
        return dict(self.translation)


def translate_payload(payload: dict, translation: Mapping[str, str]) -> dict:
    """Rename mapped fields; unmapped fields pass through unchanged."""
    return {translation.get(k, k): v for k, v in payload.items()}


def compose_translations(first: Mapping[str, str], second: Mapping[str, str]) -> dict:
    keys = set(first) | set(second)
    out = {}
    for k in keys:
        mid = first.get(k, k)
        end = second.get(mid, mid)
        if end != k:
            out[k] = end
    # fields only touched by the second map
    for k in second:
        if k not in out and k not in first and second[k] != k:
            out[k] = second[k]
    return out


@dataclass(frozen=True)
class Topology:
    """Hierarchy of subsystem slots; each slot holds an aggregate id or a
    nested topology.  Slot ids must be unique across the whole tree."""

    slots: tuple[tuple[str, Union[str, "Topology"]], ...]
    couplings: tuple[Coupling, ...] = ()

    def __post_init__(self):
        if isinstance(self.slots, dict):
            object.__setattr__(self, "slots", tuple(self.slots.items()))
        object.__setattr__(self, "couplings", tuple(self.couplings))

    def slot_map(self) -> dict[str, Union[str, "Topology"]]:
        return dict(self.slots)

    def leaf_slots(self) -> dict[str, str]:
        """All leaf slots in the tree: slot id -> aggregate id."""
        out = {}
        for name, content in self.slots:
            if isinstance(content, Topology):
                out.update(content.leaf_slots())
            else:
                out[name] = content
        return out

    def is_flat(self) -> bool:
        return all(not isinstance(c, Topology) for _, c in self.slots)


def flatten(topology: Topology) -> Topology:
    """Rewrite a nested topology as a single level of leaf slots.

    Coupling chains through boundary ports are collapsed into direct
    couplings with summed delays and composed payload translations.  Leaf
    slot ids are preserved, so a flattened model runs identically.
    """
    leaves = topology.leaf_slots()
    chains = _collect_chains(topology)
    couplings = []
    for src_ep, dst_ep, delay, translation in chains:
        couplings.append(
            Coupling(src_ep, dst_ep, tuple(sorted(translation.items())), delay)
        )
    couplings.sort(
        key=lambda c: (
            c.source.slot,
            c.source.symbol or "",
            c.source.transition or (),
            c.dest.slot,
            c.dest.symbol or "",
            c.delay,
        )
    )
    return Topology(tuple(sorted(leaves.items())), tuple(couplings))


def _collect_chains(topology: Topology):
    """Resolve every aggregate-to-aggregate coupling path in the tree.

    Builds a port graph: leaf sources, leaf destinations, and the boundary
    input/output ports of each nested topology.  Every coupling contributes
    one edge; flat couplings are the paths from a leaf source to a leaf
    destination, with delays summed and translations composed along the way.
    """
    edges: dict[tuple, list[tuple[tuple, float, dict]]] = {}

    def add_edge(a, b, delay, transl):
        edges.setdefault(a, []).append((b, delay, transl))

    def walk(topo: Topology, path: str):
        slots = topo.slot_map()

        def src_port(ep: Endpoint):
            if ep.slot == BOUNDARY:
                return ("bin", path, ep.symbol)
            content = slots.get(ep.slot)
            if content is None:
                raise InvalidCoupling(f"coupling references unknown slot {ep.slot!r}")
            if isinstance(content, Topology):
                return ("bout", f"{path}/{ep.slot}", ep.symbol)
            return ("src", ep.slot, ep.symbol, ep.transition)

        def dst_port(ep: Endpoint):
            if ep.slot == BOUNDARY:
                return ("bout", path, ep.symbol)
            content = slots.get(ep.slot)
            if content is None:
                raise InvalidCoupling(f"coupling references unknown slot {ep.slot!r}")
            if isinstance(content, Topology):
                return ("bin", f"{path}/{ep.slot}", ep.symbol)
            return ("dst", ep.slot, ep.symbol)

        for c in topo.couplings:
            add_edge(src_port(c.source), dst_port(c.dest), c.delay, c.translation_map())
        for name, content in topo.slots:
            if isinstance(content, Topology):
                walk(content, f"{path}/{name}")

    walk(topology, "")

    finished = []
    sources = [p for p in edges if p[0] == "src"]

    def dfs(port, delay, transl, origin, on_path):
        for nxt, d, tr in edges.get(port, ()):
            total = delay + d
            combined = compose_translations(transl, tr)
            if nxt[0] == "dst":
                _, slot, symbol = nxt
                finished.append((origin, Endpoint(slot, symbol=symbol), total, combined))
            elif nxt not in on_path:
                dfs(nxt, total, combined, origin, on_path | {nxt})

    for port in sorted(sources, key=repr):
        _, slot, symbol, transition = port
        origin = Endpoint(slot, symbol=symbol, transition=transition)
        dfs(port, 0.0, {}, origin, frozenset({port}))
    return finished


def validate_topology(topology: Topology, aggregates: Mapping[str, object]) -> list[str]:
    """Report structural violations; an empty list means the topology is valid.

    Checks: unknown aggregate ids, duplicate slot ids, unknown coupling slots,
    symbol/alphabet mismatches after translation, negative delays, and cycles
    of zero total delay (potential infinite event cascades).
    """
    findings: list[str] = []
    seen: set[str] = set()

    def walk(topo: Topology):
        for name, content in topo.slots:
            if name in seen:
                findings.append(f"duplicate slot id {name!r}")
            seen.add(name)
            if isinstance(content, Topology):
                walk(content)
            elif content not in aggregates:
                findings.append(f"slot {name!r} references unknown aggregate {content!r}")
        for c in topo.couplings:
            if c.delay < 0:
                findings.append(f"coupling into {c.dest.slot!r} has negative delay")

    walk(topology)
    if findings:
        return findings

    try:
        flat = flatten(topology)
    except InvalidCoupling as exc:
        return [str(exc)]
    leaves = flat.slot_map()
    for c in flat.couplings:
        src_agg = aggregates.get(leaves.get(c.source.slot))
        dst_agg = aggregates.get(leaves.get(c.dest.slot))
        if src_agg is None:
            findings.append(f"coupling source slot {c.source.slot!r} unknown")
            continue
        if dst_agg is None:
            findings.append(f"coupling destination slot {c.dest.slot!r} unknown")
            continue
        if c.source.transition is not None:
            regions = set(src_agg.partition.region_names())
            for r in c.source.transition:
                if r not in regions:
                    findings.append(
                        f"coupling from {c.source.slot!r} references unknown region {r!r}"
                    )
        elif c.source.symbol not in src_agg.outputs:
            findings.append(
                f"coupling source {c.source.slot!r}.{c.source.symbol!r} "
                "is not an output symbol"
            )
        dst_inputs = {s for s, _ in dst_agg.inputs}
        if c.dest.symbol not in dst_inputs:
            findings.append(
                f"coupling destination {c.dest.slot!r}.{c.dest.symbol!r} "
                "is not an input symbol"
            )
    # zero-delay cycles over the flattened coupling graph
    zero_edges: dict[str, set[str]] = {}
    for c in flat.couplings:
        if c.delay == 0:
            zero_edges.setdefault(c.source.slot, set()).add(c.dest.slot)
    state: dict[str, int] = {}

    def has_cycle(node: str) -> bool:
        state[node] = 1
        for nxt in zero_edges.get(node, ()):
            if state.get(nxt) == 1:
                return True
            if state.get(nxt) is None and has_cycle(nxt):
                return True
        state[node] = 2
        return False

    for node in list(zero_edges):
        if state.get(node) is None and has_cycle(node):
            findings.append(f"zero-delay coupling cycle through {node!r}")
            break
    return findings
