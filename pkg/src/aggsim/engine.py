"""Hybrid simulation engine: continuous evolution between discrete events.

A run alternates continuous advances under each aggregate's active analytic
law with discrete events: boundary crossings of the parameter partition,
control symbols from the scenario's time diagram, external inputs routed
through couplings and the after-effect scheme, monitoring records, and
scheduled outputs.  Every record in the run log carries the deterministic
ordering key under which it was processed, so a run is a pure function of
(model, scenario, seed) and replays byte-identically.

Nested topologies are flattened at run construction; a model and its
flattened form therefore produce the same log by construction, and the
flattening itself is validated separately in the structure module tests.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from . import aggregate as agg_ops
from .aggregate import AggState, Aggregate
from .errors import (
    ModelValidationError,
    NonFiniteValue,
    PastTime,
    RunFinished,
    ScenarioValidationError,
    SchemaError,
    UnknownSymbol,
    UnknownTarget,
    ZeroDelayCascade,
)
from .laws import AnalyticLaw, law_substream
from .paramspace import Partition, Region, classify_coords
from .structure import Coupling, Topology, flatten, translate_payload, validate_topology

EVENT_RANK = {
    "boundary-transition": 0,
    "control": 1,
    "external-input": 2,
    "monitoring": 3,
    "scheduled-output": 4,
}
SAMPLE_RANK = -1
TERMINAL_RANK = 9


@dataclass(frozen=True)
class EngineOptions:
    cadence: Optional[float] = None  # default horizon / 200
    crossing_tol: float = 1e-9
    max_cascade: int = 10_000
    walk_step: Optional[float] = None  # default: the sampling cadence


@dataclass(frozen=True)
class TimeEntry:
    time: float
    target: str
    symbol: str


@dataclass(frozen=True)
class Delivery:
    target: str
    input: str
    delay: float = 0.0


@dataclass(frozen=True)
class AfterEffectEntry:
    source: str
    from_region: str
    to_region: str
    deliveries: tuple[Delivery, ...]

    def __post_init__(self):
        object.__setattr__(self, "deliveries", tuple(self.deliveries))


@dataclass(frozen=True)
class MonitoringEntry:
    time: float
    target: str
    kind: str
    fields: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if isinstance(self.fields, dict):
            object.__setattr__(self, "fields", tuple(sorted(self.fields.items())))

    def record(self) -> dict:
        return dict(self.fields)


@dataclass(frozen=True)
class Scenario:
    """Control scenario: identifier bindings, time diagram, after-effects.

    Empty bindings mean the identity binding (identifier = leaf slot id).
    """

    scenario_id: str = "scenario"
    bindings: tuple[tuple[str, str], ...] = ()
    time_diagram: tuple[TimeEntry, ...] = ()
    after_effects: tuple[AfterEffectEntry, ...] = ()
    monitoring: tuple[MonitoringEntry, ...] = ()

    def __post_init__(self):
        if isinstance(self.bindings, dict):
            object.__setattr__(self, "bindings", tuple(sorted(self.bindings.items())))
        object.__setattr__(self, "time_diagram", tuple(self.time_diagram))
        object.__setattr__(self, "after_effects", tuple(self.after_effects))
        object.__setattr__(self, "monitoring", tuple(self.monitoring))


@dataclass(frozen=True)
class ReestimationRule:
    """Condition-action rule re-evaluating the situation after every event.

    Fires on the false-to-true edge of its condition.  Clauses:
        {"var": i, "op": op, "value": v} | {"region": name}
    Actions:
        {"set_law": name} | {"reset_vars": [values]}
        {"force_transition_check": true}
        {"split_region": {"region": r, "axis": a, "at": v, "names": [lo, hi]}}
        {"emit": {"symbol": s, "payload": {field: expr}}}
    """

    scope: str  # slot id
    when: tuple[dict, ...]
    action: dict

    def __post_init__(self):
        object.__setattr__(self, "when", tuple(dict(c) for c in self.when))
        object.__setattr__(self, "action", dict(self.action))


@dataclass(frozen=True)
class DynamicModel:
    """A runnable model: horizon, aggregates, topology, re-estimation rules."""

    horizon: float
    aggregates: tuple[tuple[str, Aggregate], ...]
    topology: Topology
    reestimation: tuple[ReestimationRule, ...] = ()

    def __post_init__(self):
        if isinstance(self.aggregates, dict):
            object.__setattr__(
                self, "aggregates", tuple(sorted(self.aggregates.items()))
            )
        object.__setattr__(self, "reestimation", tuple(self.reestimation))
        if self.horizon <= 0:
            raise ModelValidationError(["horizon must be positive"])

    def aggregate_map(self) -> dict[str, Aggregate]:
        return dict(self.aggregates)


@dataclass(frozen=True)
class RunLog:
    """Deterministic, replayable record of one run."""

    header: dict
    records: tuple[dict, ...]

    def to_jsonl(self) -> str:
        from .documents import canonical_json

        lines = [canonical_json(self.header)]
        lines += [canonical_json(r) for r in self.records]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "RunLog":
        import json

        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = json.loads(lines[0])
        return cls(header, tuple(json.loads(ln) for ln in lines[1:]))

    def records_of(self, rtype: str, target: Optional[str] = None) -> list[dict]:
        return [
            r
            for r in self.records
            if r["type"] == rtype and (target is None or r.get("target") == target)
        ]

    def terminal_states(self) -> dict:
        for r in reversed(self.records):
            if r["type"] == "terminal":
                return r["states"]
        return {}


class _SubState:
    """Runtime state of one bound subsystem."""

    def __init__(self, ident: str, slot: str, agg: Aggregate, seed: int):
        self.ident = ident
        self.slot = slot
        self.agg = agg
        self.laws = agg.law_table()
        self.partition = agg.partition
        self.anchor_t = 0.0
        self.vars = agg.initial
        self.law_name = agg.initial_law
        self.mode = agg.initial_mode
        self.region = classify_coords(self.vars, self.partition)
        self._seed = seed
        self._streams: dict[str, object] = {}
        self._walk_path: Optional[list[tuple[float, tuple[float, ...]]]] = None
        self.walk_step = 1.0  # set by the run

    @property
    def law(self) -> AnalyticLaw:
        return self.laws[self.law_name]

    def state(self, t: float) -> AggState:
        return AggState(self.value_at(t), self.law_name, self.mode)

    def _stream(self, label: str):
        if label not in self._streams:
            self._streams[label] = law_substream(self._seed, self.agg.id, label)
        return self._streams[label]

    def _extend_walk(self, t: float):
        law = self.law
        if self._walk_path is None:
            self._walk_path = [(self.anchor_t, self.vars)]
        rng = self._stream(law.substream)
        path = self._walk_path
        while path[-1][0] < t - 1e-15:
            pt, pv = path[-1]
            nt = pt + self.walk_step
            nv = tuple(
                v
                + AnalyticLaw._coef(law.drift, i)
                + AnalyticLaw._coef(law.sigma, i) * rng.gauss(0.0, 1.0)
                for i, v in enumerate(pv)
            )
            for v in nv:
                if not math.isfinite(v):
                    raise NonFiniteValue(f"{self.ident}: random walk diverged")
            path.append((nt, nv))

    def value_at(self, t: float) -> tuple[float, ...]:
        law = self.law
        if not law.is_stochastic:
            return law.value_at(self.vars, t - self.anchor_t)
        self._extend_walk(t)
        path = self._walk_path
        if t <= path[0][0]:
            return path[0][1]
        for (t0, v0), (t1, v1) in zip(path, path[1:]):
            if t0 <= t <= t1:
                if t1 == t0:
                    return v1
                w = (t - t0) / (t1 - t0)
                return tuple(a + w * (b - a) for a, b in zip(v0, v1))
        return path[-1][1]

    def reanchor(self, t: float, vars_: Sequence[float], law_name: str, mode: str):
        self.anchor_t = t
        self.vars = tuple(float(v) for v in vars_)
        self.law_name = law_name
        self.mode = mode
        self._walk_path = None

    def boundaries(self) -> list[tuple[int, float]]:
        out = []
        for axis in range(self.partition.dims):
            for b in self.partition.boundaries(axis):
                out.append((axis, b))
        return out

    def _axis_roots(self, axis: int, b: float, t_from: float, w: float) -> list[float]:
        law = self.law
        x0 = self.vars[axis] if not law.is_stochastic else None
        roots: list[float] = []
        if law.kind == "constant":
            return roots
        if law.kind == "linear-rate":
            r = AnalyticLaw._coef(law.rates, axis)
            if r != 0.0:
                t = self.anchor_t + (b - x0) / r
                roots.append(t)
        elif law.kind == "exponential":
            lam = AnalyticLaw._coef(law.lambdas, axis)
            if lam != 0.0 and x0 != 0.0 and b / x0 > 0.0:
                t = self.anchor_t + math.log(b / x0) / lam
                roots.append(t)
        elif law.kind == "table-interpolation":
            pts = law.tables[axis] if axis < len(law.tables) else ()
            for (tau0, v0), (tau1, v1) in zip(pts, pts[1:]):
                if (v0 < b <= v1) or (v1 < b <= v0) or (v0 >= b > v1) or (v1 >= b > v0):
                    if v1 != v0:
                        tau = tau0 + (b - v0) / (v1 - v0) * (tau1 - tau0)
                        roots.append(self.anchor_t + tau)
        else:  # seeded-random-walk: piecewise linear between grid samples
            self._extend_walk(w)
            for (t0, v0), (t1, v1) in zip(self._walk_path, self._walk_path[1:]):
                if t1 <= t_from or t0 > w:
                    continue
                a0, a1 = v0[axis], v1[axis]
                if (a0 < b <= a1) or (a0 >= b > a1):
                    if a1 != a0:
                        roots.append(t0 + (b - a0) / (a1 - a0) * (t1 - t0))
        return [t for t in roots if t_from < t <= w]

    def earliest_crossing(self, t_from: float, w: float):
        """Earliest boundary crossing in (t_from, w], or None."""
        if w <= t_from:
            return None
        cands: set[float] = set()
        for axis, b in self.boundaries():
            cands.update(self._axis_roots(axis, b, t_from, w))
        if not cands:
            return None
        ordered = sorted(cands)
        current = self.region
        cuts = ordered + [w]
        for i, root in enumerate(ordered):
            span_end = cuts[i + 1]
            probe_t = 0.5 * (root + span_end) if span_end > root else root
            reg = classify_coords(self.value_at(probe_t), self.partition)
            if reg != current:
                return (root, current, reg)
        return None


def _heap_key(time: float, rank: int, target: str, seq: int):
    return (time, rank, target, seq)


class Run:
    """A single simulation run; owns its state, advanced by step()."""

    def __init__(
        self,
        model: DynamicModel,
        scenario: Scenario,
        seed: int,
        opts: Optional[EngineOptions] = None,
        header_extra: Optional[dict] = None,
    ):
        self.model = model
        self.scenario = scenario
        self.seed = int(seed)
        self.opts = opts or EngineOptions()
        aggs = model.aggregate_map()
        findings = validate_topology(model.topology, aggs)
        if findings:
            raise ModelValidationError(findings)
        self.flat = flatten(model.topology)
        leaves = self.flat.slot_map()

        bindings = dict(scenario.bindings) or {s: s for s in leaves}
        sfind = []
        if set(bindings.values()) != set(leaves) or len(set(bindings.values())) != len(
            bindings
        ):
            sfind.append("bindings must map identifiers one-to-one onto leaf slots")
        self.ident_of_slot = {slot: ident for ident, slot in bindings.items()}
        self.subs: dict[str, _SubState] = {}
        horizon = model.horizon
        self.cadence = self.opts.cadence or horizon / 200.0
        walk_step = self.opts.walk_step or self.cadence
        for ident, slot in sorted(bindings.items()):
            agg = aggs.get(leaves.get(slot))
            if agg is None:
                sfind.append(f"identifier {ident!r} binds to unknown slot {slot!r}")
                continue
            sub = _SubState(ident, slot, agg, self.seed)
            sub.walk_step = walk_step
            self.subs[ident] = sub
        for entry in scenario.time_diagram:
            if not (0.0 <= entry.time <= horizon):
                sfind.append(f"time diagram entry at {entry.time} outside horizon")
            sub = self.subs.get(entry.target)
            if sub is None:
                sfind.append(f"time diagram targets unknown identifier {entry.target!r}")
            elif entry.symbol not in sub.agg.controls:
                sfind.append(
                    f"{entry.symbol!r} not in control alphabet of {entry.target!r}"
                )
        for ae in scenario.after_effects:
            src = self.subs.get(ae.source)
            if src is None:
                sfind.append(f"after-effect source {ae.source!r} unknown")
            else:
                regions = set(src.agg.partition.region_names())
                if ae.from_region not in regions or ae.to_region not in regions:
                    sfind.append(
                        f"after-effect on {ae.source!r} references unknown regions"
                    )
            for d in ae.deliveries:
                dst = self.subs.get(d.target)
                if dst is None:
                    sfind.append(f"after-effect delivery target {d.target!r} unknown")
                elif d.input not in {s for s, _ in dst.agg.inputs}:
                    sfind.append(
                        f"{d.input!r} not in input alphabet of {d.target!r}"
                    )
                if d.delay < 0:
                    sfind.append("after-effect delay must be non-negative")
        for m in scenario.monitoring:
            sub = self.subs.get(m.target)
            if sub is None:
                sfind.append(f"monitoring record targets unknown {m.target!r}")
            elif m.kind not in {k for k, _ in sub.agg.monitoring}:
                sfind.append(f"{m.kind!r} not in monitoring schema of {m.target!r}")
            if not (0.0 <= m.time <= horizon):
                sfind.append(f"monitoring record at {m.time} outside horizon")
        if sfind:
            raise ScenarioValidationError(sfind)

        self.t = 0.0
        self.finished = False
        self._heap: list = []
        self._eseq = 0
        self._rseq = 0
        self.records: list[dict] = []
        self._cascade_t = None
        self._cascade_n = 0
        self._last_sample_t = None
        self._next_cadence_k = 1
        self._rule_last = [False] * len(model.reestimation)

        # couplings indexed by source for fast routing (slot ids)
        self._out_couplings: dict[tuple[str, str], list[Coupling]] = {}
        self._trans_couplings: dict[tuple[str, str, str], list[Coupling]] = {}
        from .structure import BOUNDARY

        for c in self.flat.couplings:
            if c.source.slot == BOUNDARY or c.dest.slot == BOUNDARY:
                continue  # root-level exported ports have no internal peer
            if c.source.transition is not None:
                key = (c.source.slot, *c.source.transition)
                self._trans_couplings.setdefault(key, []).append(c)
            else:
                self._out_couplings.setdefault(
                    (c.source.slot, c.source.symbol), []
                ).append(c)

        for entry in scenario.time_diagram:
            self._push(entry.time, "control", entry.target, {"symbol": entry.symbol})
        for m in scenario.monitoring:
            self._push(
                m.time, "monitoring", m.target, {"kind": m.kind, "record": m.record()}
            )
        for ident, sub in sorted(self.subs.items()):
            for idx, rule in enumerate(sub.agg.emits):
                if rule.when != "on-schedule":
                    continue
                k = 1
                while k * rule.period <= horizon + 1e-12:
                    self._push(
                        min(k * rule.period, horizon),
                        "scheduled-output",
                        ident,
                        {"emit_index": idx},
                    )
                    k += 1

        self.header = {
            "type": "header",
            "format": "aggsim-runlog/1",
            "seed": self.seed,
            "horizon": horizon,
            "cadence": self.cadence,
            "crossing_tol": self.opts.crossing_tol,
            "scenario_id": scenario.scenario_id,
        }
        if header_extra:
            self.header.update(header_extra)
        else:
            from .documents import model_digest, scenario_digest

            self.header["model_digest"] = model_digest(model)
            self.header["scenario_digest"] = scenario_digest(scenario)

        self._log_samples(0.0)
        # initialize re-estimation edges without firing
        for i, rule in enumerate(model.reestimation):
            self._rule_last[i] = self._rule_condition(rule, 0.0)

    # --- plumbing -----------------------------------------------------------

    def _push(self, time: float, cls: str, target: str, payload: dict):
        self._eseq += 1
        heapq.heappush(
            self._heap,
            (_heap_key(time, EVENT_RANK[cls], target, self._eseq), cls, payload),
        )

    def _log(self, rec: dict, key):
        self._rseq += 1
        rec = dict(rec)
        rec["n"] = self._rseq
        rec["key"] = [key[0], key[1], key[2], self._rseq]
        self.records.append(rec)

    def _log_samples(self, t: float):
        if self._last_sample_t is not None and t <= self._last_sample_t:
            return
        self._last_sample_t = t
        for ident in sorted(self.subs):
            sub = self.subs[ident]
            vals = sub.value_at(t)
            self._log(
                {
                    "type": "sample",
                    "t": t,
                    "target": ident,
                    "vars": list(vals),
                    "region": sub.region,
                    "law": sub.law_name,
                    "mode": sub.mode,
                },
                (t, SAMPLE_RANK, ident),
            )

    def _advance_to(self, t_new: float):
        while True:
            p = self._next_cadence_k * self.cadence
            if p >= t_new - 1e-15 or p > self.model.horizon:
                break
            if p > self.t:
                self._log_samples(p)
            self._next_cadence_k += 1
        self._log_samples(t_new)

    # --- run loop -----------------------------------------------------------

    def step(self) -> "Run":
        """Process one event, or make one continuous advance."""
        if self.finished:
            raise RunFinished("run already finished")
        horizon = self.model.horizon
        if self._heap and self._heap[0][0][0] <= self.t + 0.0:
            key, cls, payload = heapq.heappop(self._heap)
            if key[0] <= horizon:
                self._process_event(key, cls, payload)
            return self
        te = self._heap[0][0][0] if self._heap else math.inf
        w = min(te, horizon)
        crossing = None
        cross_ident = None
        for ident in sorted(self.subs):
            got = self.subs[ident].earliest_crossing(self.t, w)
            if got is None:
                continue
            if crossing is None or got[0] < crossing[0]:
                crossing, cross_ident = got, ident
        if crossing is not None:
            tc = crossing[0]
            # all subsystems crossing at exactly tc
            hits = []
            for ident in sorted(self.subs):
                got = self.subs[ident].earliest_crossing(self.t, w)
                if got is not None and got[0] == tc:
                    hits.append((ident, got))
            self._advance_to(tc)
            self.t = tc
            for ident, (t_, frm, to) in hits:
                self._push(
                    tc, "boundary-transition", ident, {"from": frm, "to": to}
                )
            return self
        if te <= horizon:
            self._advance_to(te)
            self.t = te
            return self
        if self.t < horizon:
            self._advance_to(horizon)
            self.t = horizon
            return self
        self._finish()
        return self

    def run_to_end(self) -> "Run":
        while not self.finished:
            self.step()
        return self

    def _finish(self):
        states = {}
        for ident in sorted(self.subs):
            sub = self.subs[ident]
            states[ident] = {
                "vars": list(sub.value_at(self.t)),
                "region": sub.region,
                "law": sub.law_name,
                "mode": sub.mode,
            }
        self._log(
            {"type": "terminal", "t": self.t, "states": states},
            (self.t, TERMINAL_RANK, ""),
        )
        self.finished = True

    # --- event processing -------------------------------------------------------

    def _guard_cascade(self, t: float):
        if self._cascade_t == t:
            self._cascade_n += 1
        else:
            self._cascade_t, self._cascade_n = t, 1
        if self._cascade_n > self.opts.max_cascade:
            raise ZeroDelayCascade(
                f"more than {self.opts.max_cascade} events at t={t}"
            )

    def _process_event(self, key, cls: str, payload: dict):
        t, rank, target, _ = key
        self._guard_cascade(t)
        ctx = (t, rank, target)
        sub = self.subs[target]
        if cls == "boundary-transition":
            self._fire_transition(sub, t, payload["from"], payload["to"], ctx)
        elif cls == "control":
            outcome = agg_ops.apply_control(sub.agg, sub.state(t), payload["symbol"], t)
            self._log(
                {
                    "type": "control",
                    "t": t,
                    "target": target,
                    "symbol": payload["symbol"],
                    "matched": outcome.matched,
                },
                ctx,
            )
            self._absorb(sub, t, outcome, ctx)
        elif cls == "external-input":
            outcome = agg_ops.apply_input(
                sub.agg, sub.state(t), payload["symbol"], payload.get("payload"), t
            )
            self._log(
                {
                    "type": "input",
                    "t": t,
                    "target": target,
                    "symbol": payload["symbol"],
                    "payload": payload.get("payload") or {},
                    "matched": outcome.matched,
                },
                ctx,
            )
            self._absorb(sub, t, outcome, ctx)
        elif cls == "monitoring":
            outcome = agg_ops.apply_monitoring(
                sub.agg, sub.state(t), payload["kind"], payload.get("record"), t
            )
            self._log(
                {
                    "type": "monitoring",
                    "t": t,
                    "target": target,
                    "kind": payload["kind"],
                    "record": payload.get("record") or {},
                    "matched": outcome.matched,
                },
                ctx,
            )
            self._absorb(sub, t, outcome, ctx)
        elif cls == "scheduled-output":
            rule = sub.agg.emits[payload["emit_index"]]
            state = sub.state(t)
            pl = {
                name: agg_ops.eval_payload_expr(expr, state, None)
                for name, expr in rule.payload
            }
            self._route_output(sub, t, rule.symbol, pl, "schedule", ctx)
        self._run_reestimation(t, ctx)

    def _absorb(self, sub: _SubState, t: float, outcome, ctx):
        """Fold a rule outcome into the subsystem: re-anchor, route, jump-check."""
        before = sub.state(t)
        after = outcome.state
        if outcome.matched and (
            after.vars != before.vars
            or after.law != sub.law_name
            or after.mode != sub.mode
        ):
            sub.reanchor(t, after.vars, after.law, after.mode)
        for symbol, pl in outcome.emissions:
            self._route_output(sub, t, symbol, pl, "transition", ctx)
        self._jump_check(sub, t, ctx)

    def _jump_check(self, sub: _SubState, t: float, ctx):
        reg = classify_coords(sub.value_at(t), sub.partition)
        if reg != sub.region:
            self._fire_transition(sub, t, sub.region, reg, ctx)

    def _fire_transition(self, sub: _SubState, t: float, frm: str, to: str, ctx):
        if frm == to:
            return
        vals = sub.value_at(t)
        sub.region = to
        self._log(
            {
                "type": "transition",
                "t": t,
                "target": sub.ident,
                "from": frm,
                "to": to,
                "vars": list(vals),
            },
            ctx,
        )
        # output operator on transitions
        state = sub.state(t)
        for symbol, pl in agg_ops.emit_output(sub.agg, state, t, "transition"):
            self._route_output(sub, t, symbol, pl, "transition", ctx)
        # after-effect scheme
        payload = {f"value_{i}": v for i, v in enumerate(vals)}
        for ae in self.scenario.after_effects:
            if ae.source == sub.ident and ae.from_region == frm and ae.to_region == to:
                for d in ae.deliveries:
                    self._push(
                        t + d.delay,
                        "external-input",
                        d.target,
                        {"symbol": d.input, "payload": dict(payload)},
                    )
        # transition-sourced couplings of the connection function
        for c in self._trans_couplings.get((sub.slot, frm, to), ()):
            dst_ident = self.ident_of_slot[c.dest.slot]
            self._push(
                t + c.delay,
                "external-input",
                dst_ident,
                {
                    "symbol": c.dest.symbol,
                    "payload": translate_payload(payload, c.translation_map()),
                },
            )

    def _route_output(self, sub, t, symbol, payload, cause, ctx):
        self._log(
            {
                "type": "output",
                "t": t,
                "target": sub.ident,
                "symbol": symbol,
                "payload": payload,
                "cause": cause,
            },
            ctx,
        )
        for c in self._out_couplings.get((sub.slot, symbol), ()):
            dst_ident = self.ident_of_slot[c.dest.slot]
            self._push(
                t + c.delay,
                "external-input",
                dst_ident,
                {
                    "symbol": c.dest.symbol,
                    "payload": translate_payload(payload, c.translation_map()),
                },
            )

    # --- re-estimation rules -------------------------------------------------

    def _rule_condition(self, rule: ReestimationRule, t: float) -> bool:
        ident = self.ident_of_slot.get(rule.scope)
        if ident is None:
            return False
        sub = self.subs[ident]
        vals = sub.value_at(t)
        for clause in rule.when:
            if "var" in clause:
                idx, op, val = clause["var"], clause["op"], clause["value"]
                if idx >= len(vals) or not agg_ops._GUARD_OPS[op](vals[idx], val):
                    return False
            elif "region" in clause:
                if sub.region != clause["region"]:
                    return False
            else:
                return False
        return True

    def _run_reestimation(self, t: float, ctx):
        for i, rule in enumerate(self.model.reestimation):
            now = self._rule_condition(rule, t)
            fired = now and not self._rule_last[i]
            self._rule_last[i] = now
            if not fired:
                continue
            ident = self.ident_of_slot[rule.scope]
            sub = self.subs[ident]
            action = rule.action
            self._log(
                {
                    "type": "rule",
                    "t": t,
                    "target": ident,
                    "rule_index": i,
                    "action": sorted(action.keys()),
                },
                ctx,
            )
            if "set_law" in action:
                sub.reanchor(t, sub.value_at(t), action["set_law"], sub.mode)
            elif "reset_vars" in action:
                sub.reanchor(t, action["reset_vars"], sub.law_name, sub.mode)
            elif "split_region" in action:
                self._split_region(sub, action["split_region"])
            elif "emit" in action:
                spec = action["emit"]
                state = sub.state(t)
                pl = {
                    name: agg_ops.eval_payload_expr(expr, state, None)
                    for name, expr in sorted(spec.get("payload", {}).items())
                }
                self._route_output(sub, t, spec["symbol"], pl, "transition", ctx)
            # force_transition_check needs no action: the next advance re-searches
            self._jump_check(sub, t, ctx)

    def _split_region(self, sub: _SubState, spec: dict):
        """Insert a new boundary at runtime: the chosen region splits in two."""
        name, axis, at = spec["region"], spec["axis"], float(spec["at"])
        lo_name, hi_name = spec["names"]
        regions = []
        for r in sub.partition.regions:
            if r.name != name:
                regions.append(r)
                continue
            lo, hi = r.bounds[axis]
            if not (lo < at < hi):
                raise ModelValidationError(
                    [f"split value {at} outside region {name!r} on axis {axis}"]
                )
            b_lo = list(r.bounds)
            b_hi = list(r.bounds)
            b_lo[axis] = (lo, at)
            b_hi[axis] = (at, hi)
            regions.append(Region(lo_name, tuple(b_lo)))
            regions.append(Region(hi_name, tuple(b_hi)))
        sub.partition = Partition(sub.partition.box, tuple(regions))
        sub.region = classify_coords(sub.value_at(self.t), sub.partition)

    # --- interactive operations ----------------------------------------------

    def inject_control(self, t: float, target: str, symbol: str):
        if self.finished:
            raise RunFinished("cannot inject into a finished run")
        if t < self.t:
            raise PastTime(f"t={t} is before the run's current time {self.t}")
        sub = self.subs.get(target)
        if sub is None:
            raise UnknownTarget(f"no subsystem bound to identifier {target!r}")
        if symbol not in sub.agg.controls:
            raise UnknownSymbol(f"{symbol!r} not in control alphabet of {target!r}")
        self._push(t, "control", target, {"symbol": symbol})

    def ingest_monitoring(self, records: Sequence[dict]):
        for rec in records:
            target = rec.get("target")
            sub = self.subs.get(target)
            if sub is None:
                raise SchemaError(f"monitoring record for unknown subsystem {target!r}")
            kind = rec.get("kind")
            if kind not in {k for k, _ in sub.agg.monitoring}:
                raise SchemaError(f"{kind!r} not in monitoring schema of {target!r}")
            t = float(rec.get("t", self.t))
            if t < self.t:
                raise PastTime(f"monitoring record at {t} is in the past")
            self._push(
                t, "monitoring", target, {"kind": kind, "record": dict(rec.get("fields", {}))}
            )

    def log(self) -> RunLog:
        return RunLog(dict(self.header), tuple(self.records))


def simulate(
    model: DynamicModel,
    scenario: Scenario,
    seed: int,
    opts: Optional[EngineOptions] = None,
) -> RunLog:
    """Run a scenario to the horizon; pure in (model, scenario, seed, opts)."""
    return Run(model, scenario, seed, opts).run_to_end().log()


def replay(header: Mapping, model: DynamicModel, scenario: Scenario) -> RunLog:
    """Re-execute a run from its log header; byte-identical by construction."""
    from .documents import model_digest, scenario_digest
    from .errors import DigestMismatch

    if header.get("model_digest") != model_digest(model):
        raise DigestMismatch("model digest does not match the log header")
    if header.get("scenario_digest") != scenario_digest(scenario):
        raise DigestMismatch("scenario digest does not match the log header")
    opts = EngineOptions(
        cadence=header.get("cadence"), crossing_tol=header.get("crossing_tol", 1e-9)
    )
    return simulate(model, scenario, int(header["seed"]), opts)
