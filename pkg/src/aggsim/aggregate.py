"""Aggregate subsystems: alphabets, transition operators, output operator.

An aggregate couples a continuous part (a table of analytic laws over its
variables) with a discrete part: operator rule sets that react to control
symbols, external inputs and monitoring records by synthesizing new initial
conditions and selecting new behavior (the active law and a mode tag).

Guards and actions are kept as plain validated dicts so aggregate
definitions round-trip through the JSON model documents unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    PayloadSchemaError,
    SchemaError,
    UnknownLawError,
    UnknownSymbol,
)
from .laws import AnalyticLaw
from .paramspace import Partition

_GUARD_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}

OUTPUT_CAUSES = ("transition", "schedule", "request")


@dataclass(frozen=True)
class AggState:
    """Per-run state Z: variable values, active law name, mode tag."""

    vars: tuple[float, ...]
    law: str
    mode: str

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(float(v) for v in self.vars))


@dataclass(frozen=True)
class OperatorRule:
    """One element of H: trigger symbol, guard clauses (ANDed), actions.

    Guard clause forms:
        {"var": i, "op": "<", "value": 5.0}
        {"mode": "FILL", "op": "=="}      (op defaults to ==)
    Action forms:
        {"set_law": name} {"set_mode": tag}
        {"set_var": {"index": i, "value": c}} or {..., "field": name}
        {"add_var": {"index": i, "value": c}} or {..., "field": name}
        {"emit": {"symbol": s, "payload": {field: expr}}}
    """

    trigger: str
    guard: tuple[dict, ...] = ()
    actions: tuple[dict, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "guard", tuple(dict(c) for c in self.guard))
        object.__setattr__(self, "actions", tuple(dict(a) for a in self.actions))
        for clause in self.guard:
            if "var" in clause:
                if clause.get("op") not in _GUARD_OPS:
                    raise ValueError(f"bad guard op in {clause!r}")
            elif "mode" in clause:
                if clause.get("op", "==") not in ("==", "!="):
                    raise ValueError(f"bad mode guard in {clause!r}")
            else:
                raise ValueError(f"unrecognized guard clause {clause!r}")
        for action in self.actions:
            if not any(
                k in action for k in ("set_law", "set_mode", "set_var", "add_var", "emit")
            ):
                raise ValueError(f"unrecognized action {action!r}")


@dataclass(frozen=True)
class OutputRule:
    """One entry of the output operator Q."""

    symbol: str
    when: str  # on-transition | on-schedule | on-request
    period: Optional[float] = None
    payload: tuple[tuple[str, dict], ...] = ()

    def __post_init__(self):
        if self.when not in ("on-transition", "on-schedule", "on-request"):
            raise ValueError(f"bad emission condition {self.when!r}")
        if self.when == "on-schedule":
            if self.period is None or self.period <= 0:
                raise ValueError("on-schedule output needs a positive period")
        if isinstance(self.payload, dict):
            object.__setattr__(self, "payload", tuple(sorted(self.payload.items())))
        else:
            object.__setattr__(
                self, "payload", tuple((k, dict(v)) for k, v in self.payload)
            )


@dataclass(frozen=True)
class Aggregate:
    """Subsystem definition: alphabets, laws, operator rules, outputs."""

    id: str
    variables: tuple[str, ...]
    initial: tuple[float, ...]
    initial_law: str
    laws: tuple[tuple[str, AnalyticLaw], ...]
    partition: Partition
    controls: tuple[str, ...] = ()
    inputs: tuple[tuple[str, tuple[str, ...]], ...] = ()      # symbol -> payload fields
    outputs: tuple[str, ...] = ()
    monitoring: tuple[tuple[str, tuple[str, ...]], ...] = ()  # kind -> record fields
    initial_mode: str = "default"
    h_control: tuple[OperatorRule, ...] = ()
    h_input: tuple[OperatorRule, ...] = ()
    h_monitoring: tuple[OperatorRule, ...] = ()
    emits: tuple[OutputRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "initial", tuple(float(v) for v in self.initial))
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if isinstance(self.laws, dict):
            object.__setattr__(self, "laws", tuple(self.laws.items()))
        if isinstance(self.inputs, dict):
            object.__setattr__(
                self, "inputs", tuple((k, tuple(v)) for k, v in self.inputs.items())
            )
        if isinstance(self.monitoring, dict):
            object.__setattr__(
                self,
                "monitoring",
                tuple((k, tuple(v)) for k, v in self.monitoring.items()),
            )
        if len(self.initial) != len(self.variables):
            raise ValueError(f"{self.id}: initial values do not match variables")
        law_names = {name for name, _ in self.laws}
        if self.initial_law not in law_names:
            raise UnknownLawError(f"{self.id}: unknown initial law {self.initial_law!r}")
        input_syms = {s for s, _ in self.inputs}
        ctrl = set(self.controls)
        out = set(self.outputs)
        if (input_syms & ctrl) or (input_syms & out) or (ctrl & out):
            raise ValueError(f"{self.id}: input/control/output alphabets overlap")
        if self.partition.dims != len(self.variables):
            raise ValueError(f"{self.id}: partition does not match variables")
        for rules, alphabet, chan in (
            (self.h_control, ctrl, "control"),
            (self.h_input, input_syms, "input"),
            (self.h_monitoring, {k for k, _ in self.monitoring}, "monitoring"),
        ):
            for rule in rules:
                if rule.trigger not in alphabet:
                    raise UnknownSymbol(
                        f"{self.id}: {chan} rule triggers on unknown {rule.trigger!r}"
                    )
                for action in rule.actions:
                    if "set_law" in action and action["set_law"] not in law_names:
                        raise UnknownLawError(
                            f"{self.id}: rule references unknown law "
                            f"{action['set_law']!r}"
                        )
        for e in self.emits:
            if e.symbol not in out:
                raise UnknownSymbol(f"{self.id}: emits unknown output {e.symbol!r}")

    def law_table(self) -> dict[str, AnalyticLaw]:
        return dict(self.laws)

    def input_schema(self, symbol: str) -> tuple[str, ...]:
        for s, fields in self.inputs:
            if s == symbol:
                return fields
        raise UnknownSymbol(f"{self.id}: {symbol!r} not in input alphabet")

    def monitoring_schema(self, kind: str) -> tuple[str, ...]:
        for k, fields in self.monitoring:
            if k == kind:
                return fields
        raise SchemaError(f"{self.id}: {kind!r} not in monitoring schema")

    def initial_state(self) -> AggState:
        return AggState(self.initial, self.initial_law, self.initial_mode)


def eval_guard(guard: Sequence[dict], state: AggState) -> bool:
    for clause in guard:
        if "var" in clause:
            idx = clause["var"]
            if idx >= len(state.vars):
                return False
            if not _GUARD_OPS[clause["op"]](state.vars[idx], clause["value"]):
                return False
        else:
            op = clause.get("op", "==")
            match = state.mode == clause["mode"]
            if (op == "==") != match:
                return False
    return True


def eval_payload_expr(expr: dict, state: AggState, payload: Optional[dict]) -> float:
    if "var" in expr:
        return state.vars[expr["var"]]
    if "const" in expr:
        return float(expr["const"])
    if "field" in expr:
        if payload is None or expr["field"] not in payload:
            raise PayloadSchemaError(f"payload field {expr['field']!r} missing")
        return float(payload[expr["field"]])
    raise ValueError(f"unrecognized payload expression {expr!r}")


def _resolve_amount(spec: dict, payload: Optional[dict]) -> float:
    if "field" in spec:
        if payload is None or spec["field"] not in payload:
            raise PayloadSchemaError(f"payload field {spec['field']!r} missing")
        return float(payload[spec["field"]])
    return float(spec["value"])


@dataclass(frozen=True)
class RuleOutcome:
    state: AggState
    emissions: tuple[tuple[str, dict], ...]
    matched: bool


def apply_rules(
    rules: Sequence[OperatorRule],
    state: AggState,
    symbol: str,
    payload: Optional[dict],
    t: float,
) -> RuleOutcome:
    """Apply the first matching rule (declaration order); no match is a no-op."""
    for rule in rules:
        if rule.trigger != symbol or not eval_guard(rule.guard, state):
            continue
        vars_ = list(state.vars)
        law, mode = state.law, state.mode
        emissions = []
        for action in rule.actions:
            if "set_law" in action:
                law = action["set_law"]
            elif "set_mode" in action:
                mode = action["set_mode"]
            elif "set_var" in action:
                spec = action["set_var"]
                vars_[spec["index"]] = _resolve_amount(spec, payload)
            elif "add_var" in action:
                spec = action["add_var"]
                vars_[spec["index"]] += _resolve_amount(spec, payload)
            elif "emit" in action:
                spec = action["emit"]
                probe = AggState(tuple(vars_), law, mode)
                out_payload = {
                    name: eval_payload_expr(expr, probe, payload)
                    for name, expr in sorted(spec.get("payload", {}).items())
                }
                emissions.append((spec["symbol"], out_payload))
        return RuleOutcome(AggState(tuple(vars_), law, mode), tuple(emissions), True)
    return RuleOutcome(state, (), False)


def _check_payload(fields: tuple[str, ...], payload: Optional[dict], what: str):
    payload = payload or {}
    for f in fields:
        if f not in payload:
            raise PayloadSchemaError(f"{what}: missing field {f!r}")
        v = payload[f]
        if not isinstance(v, (int, float)) or not math.isfinite(float(v)):
            raise PayloadSchemaError(f"{what}: field {f!r} is not a finite number")


def apply_control(agg: Aggregate, state: AggState, u: str, t: float) -> RuleOutcome:
    if u not in agg.controls:
        raise UnknownSymbol(f"{agg.id}: control {u!r} not in alphabet")
    return apply_rules(agg.h_control, state, u, None, t)


def apply_input(
    agg: Aggregate, state: AggState, x: str, payload: Optional[dict], t: float
) -> RuleOutcome:
    fields = agg.input_schema(x)
    _check_payload(fields, payload, f"{agg.id} input {x}")
    return apply_rules(agg.h_input, state, x, payload, t)


def apply_monitoring(
    agg: Aggregate, state: AggState, kind: str, record: Optional[dict], t: float
) -> RuleOutcome:
    fields = agg.monitoring_schema(kind)
    try:
        _check_payload(fields, record, f"{agg.id} monitoring {kind}")
    except PayloadSchemaError as exc:
        raise SchemaError(str(exc)) from exc
    return apply_rules(agg.h_monitoring, state, kind, record, t)


def emit_output(
    agg: Aggregate, state: AggState, t: float, cause: str
) -> list[tuple[str, dict]]:
    """Outputs whose emission condition matches the cause, in declaration order."""
    if cause not in OUTPUT_CAUSES:
        raise ValueError(f"unknown output cause {cause!r}")
    out = []
    for rule in agg.emits:
        if cause == "transition" and rule.when != "on-transition":
            continue
        if cause == "request" and rule.when != "on-request":
            continue
        if cause == "schedule":
            if rule.when != "on-schedule":
                continue
            k = round(t / rule.period)
            if abs(t - k * rule.period) > 1e-9:
                continue
        payload = {
            name: eval_payload_expr(expr, state, None) for name, expr in rule.payload
        }
        out.append((rule.symbol, payload))
    return out
