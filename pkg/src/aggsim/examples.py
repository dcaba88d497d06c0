"""Built-in example corpus: a reservoir model and a small knowledge base.

The reservoir is deliberately closed-form checkable: a tank fills at rate
1.0 from level 0, the LOW/HIGH boundary sits at 5, and an after-effect
delivers an OVERFLOW input to a counter one time unit after the LOW→HIGH
transition.  All reference values used in the tests (transition at t=5,
counter increment at t=6, terminal level 8 or 5) follow from linear
arithmetic, not from simulation itself.
"""

from __future__ import annotations

from .aggregate import Aggregate, OperatorRule, OutputRule
from .criteria import Criterion
from .engine import (
    AfterEffectEntry,
    Delivery,
    DynamicModel,
    Scenario,
    TimeEntry,
)
from .laws import AnalyticLaw
from .paramspace import Partition, Region
from .structure import Topology


def tank_aggregate(fill_rate: float = 1.0, drain_rate: float = -0.5) -> Aggregate:
    return Aggregate(
        id="tank",
        variables=("level",),
        initial=(0.0,),
        initial_law="FILL",
        laws={
            "FILL": AnalyticLaw("linear-rate", rates=(fill_rate,)),
            "DRAIN": AnalyticLaw("linear-rate", rates=(drain_rate,)),
        },
        partition=Partition(
            box=((-100.0, 100.0),),
            regions=(
                Region("LOW", ((-100.0, 5.0),)),
                Region("HIGH", ((5.0, 100.0),)),
            ),
        ),
        controls=("FILL", "DRAIN"),
        monitoring={"gauge": ("level",)},
        h_control=(
            OperatorRule(trigger="FILL", actions=({"set_law": "FILL"},)),
            OperatorRule(trigger="DRAIN", actions=({"set_law": "DRAIN"},)),
        ),
        h_monitoring=(
            OperatorRule(
                trigger="gauge",
                actions=({"set_var": {"index": 0, "field": "level"}},),
            ),
        ),
    )


def counter_aggregate() -> Aggregate:
    return Aggregate(
        id="counter",
        variables=("count",),
        initial=(0.0,),
        initial_law="HOLD",
        laws={"HOLD": AnalyticLaw("constant")},
        partition=Partition(
            box=((-1e6, 1e6),),
            regions=(Region("ALL", ((-1e6, 1e6),)),),
        ),
        inputs={"OVERFLOW": ()},
        h_input=(
            OperatorRule(
                trigger="OVERFLOW",
                actions=({"add_var": {"index": 0, "value": 1.0}},),
            ),
        ),
    )


def reservoir_model(horizon: float = 8.0) -> DynamicModel:
    return DynamicModel(
        horizon=horizon,
        aggregates={"tank": tank_aggregate(), "counter": counter_aggregate()},
        topology=Topology(
            slots=(("counter", "counter"), ("tank", "tank")), couplings=()
        ),
    )


def overflow_after_effect(delay: float = 1.0) -> AfterEffectEntry:
    return AfterEffectEntry(
        source="tank",
        from_region="LOW",
        to_region="HIGH",
        deliveries=(Delivery(target="counter", input="OVERFLOW", delay=delay),),
    )


def fill_scenario() -> Scenario:
    return Scenario(
        scenario_id="fill-only", after_effects=(overflow_after_effect(),)
    )


def fill_drain_scenario(drain_at: float = 6.0) -> Scenario:
    return Scenario(
        scenario_id="fill-then-drain",
        time_diagram=(TimeEntry(drain_at, "tank", "DRAIN"),),
        after_effects=(overflow_after_effect(),),
    )


def level_criterion(target: float = 7.0) -> Criterion:
    return Criterion(kind="terminal-distance", scope="tank", target=(target,))


def high_time_criterion() -> Criterion:
    return Criterion(kind="time-in-region", scope="tank", target="HIGH")


# --- knowledge-base corpus ---------------------------------------------------


def _stage_template_spec() -> dict:
    """Linear stage with a free rate and initial level; one output, one input."""
    return {
        "variables": ["level"],
        "initial": [{"slot": "init"}],
        "initial_law": "RUN",
        "laws": {"RUN": {"kind": "linear-rate", "rates": [{"slot": "rate"}]}},
        "partition": {
            "box": [[-100.0, 100.0]],
            "regions": {
                "LOW": [[-100.0, 5.0]],
                "HIGH": [[5.0, 100.0]],
            },
        },
        "inputs": {"FEED": {"fields": []}},
        "outputs": ["LEVEL"],
        "emits": [
            {
                "symbol": "LEVEL",
                "when": "on-schedule",
                "period": 1.0,
                "payload": {"level": {"var": 0}},
            }
        ],
        "rules": {
            "input": [
                {
                    "trigger": "FEED",
                    "actions": [{"add_var": {"index": 0, "value": 1.0}}],
                }
            ]
        },
    }


def synthesis_kb_doc(extra_leaf: bool = False) -> dict:
    """Three-leaf objectives tree with full coverage; the optional fourth
    leaf "1.3" has no correspondence rule and must be reported uncovered."""
    objectives = [
        {"id": "1", "label": "keep the plant level", "link": "root"},
        {"id": "1.1", "label": "stage one level", "link": "feeds"},
        {"id": "1.2", "label": "stage two level", "link": "feeds"},
        {"id": "1.4", "label": "stage three level", "link": "feeds"},
    ]
    if extra_leaf:
        objectives.append({"id": "1.3", "label": "unassigned stage", "link": "feeds"})
    return {
        "knowledge": {
            "objectives": objectives,
            "templates": {
                "stage": {
                    "spec": _stage_template_spec(),
                    "slots": {"rate": "number", "init": "number"},
                    "tr": {
                        "identity": {"identity": True},
                        "add-alarm-port": {"add_output": "ALARM"},
                    },
                }
            },
            "correspondence": [
                {"goal": "1.1", "template": "stage", "bindings": {"rate": 1.0, "init": 0.0}},
                {"goal": "1.2", "template": "stage", "bindings": {"rate": 0.5, "init": 0.0}},
                {"goal": "1.4", "template": "stage", "bindings": {"rate": 0.0, "init": 1.0}},
            ],
            "relations": [
                {
                    "id": "feed-chain",
                    "when": [["feeds", "?a", "?b"]],
                    "coupling": {
                        "source": {"slot": "?a", "output": "LEVEL"},
                        "dest": {"slot": "?b", "input": "FEED"},
                        "translation": {"level": "amount"},
                        "delay": 0.5,
                    },
                }
            ],
            "inference": [
                {
                    "id": "stage-order",
                    "when": [["next", "?a", "?b"]],
                    "then": [["feeds", "?a", "?b"]],
                }
            ],
            "facts": [["next", "1.1", "1.2"], ["next", "1.2", "1.4"]],
            "horizon": 4.0,
        }
    }
