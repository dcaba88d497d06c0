"""Shared corpus generators for the test suite.

All generators take an explicit random.Random so every test is seeded and
reproducible.  Models are built from closed-form laws so reference values
can be derived independently of the engine.
"""

from __future__ import annotations

import random

import pytest

from aggsim.aggregate import Aggregate, OperatorRule, OutputRule
from aggsim.engine import (
    AfterEffectEntry,
    Delivery,
    DynamicModel,
    Scenario,
    TimeEntry,
)
from aggsim.laws import AnalyticLaw
from aggsim.paramspace import Partition, Region
from aggsim.structure import BOUNDARY, Coupling, Endpoint, Topology


def two_region_partition(boundary: float, lo: float = -50.0, hi: float = 50.0):
    return Partition(
        ((lo, hi),),
        (Region("LO", ((lo, boundary),)), Region("HI", ((boundary, hi),))),
    )


def random_law(rng: random.Random, init: float, stochastic: bool = False):
    kinds = ["linear", "linear", "exponential", "constant", "table"]
    if stochastic:
        kinds.append("walk")
    kind = rng.choice(kinds)
    if kind == "linear":
        rate = 0.0
        while abs(rate) < 0.2:
            rate = round(rng.uniform(-2.0, 2.0), 3)
        return AnalyticLaw("linear-rate", rates=(rate,))
    if kind == "exponential":
        lam = round(rng.uniform(-0.4, 0.4), 3)
        return AnalyticLaw("exponential", lambdas=(lam,))
    if kind == "constant":
        return AnalyticLaw("constant")
    if kind == "table":
        taus = sorted({0.0} | {round(rng.uniform(0.5, 6.0), 3) for _ in range(3)})
        vals = [init] + [round(rng.uniform(-8.0, 12.0), 3) for _ in taus[1:]]
        return AnalyticLaw("table-interpolation", tables=(tuple(zip(taus, vals)),))
    return AnalyticLaw(
        "seeded-random-walk",
        drift=(round(rng.uniform(-0.05, 0.05), 4),),
        sigma=(round(rng.uniform(0.05, 0.3), 4),),
        substream=f"walk-{rng.randint(0, 999)}",
    )


def random_aggregate(rng: random.Random, agg_id: str, stochastic: bool = False):
    init = round(rng.uniform(0.5, 3.0), 3)
    boundary = round(rng.uniform(4.0, 8.0), 3)
    return Aggregate(
        id=agg_id,
        variables=("x",),
        initial=(init,),
        initial_law="MAIN",
        laws={
            "MAIN": random_law(rng, init, stochastic),
            "ALT": random_law(rng, init, stochastic),
            "HOLD": AnalyticLaw("constant"),
        },
        partition=two_region_partition(boundary),
        controls=("GO", "STOP"),
        inputs={"IN": ()},
        outputs=("OUT",),
        monitoring={"gauge": ("x",)},
        h_control=(
            OperatorRule("GO", actions=({"set_law": "ALT"},)),
            OperatorRule("STOP", actions=({"set_law": "HOLD"},)),
        ),
        h_input=(
            OperatorRule("IN", actions=({"add_var": {"index": 0, "value": 0.25}},)),
        ),
        h_monitoring=(
            OperatorRule(
                "gauge", actions=({"set_var": {"index": 0, "field": "x"}},)
            ),
        ),
        emits=(
            OutputRule(
                "OUT",
                "on-schedule",
                period=rng.choice([1.0, 1.5, 2.0]),
                payload={"x": {"var": 0}},
            ),
        ),
    )


def random_model(rng: random.Random, n: int | None = None, stochastic: bool = False):
    n = n or rng.randint(2, 3)
    names = [f"a{i}" for i in range(n)]
    aggs = {name: random_aggregate(rng, name, stochastic) for name in names}
    couplings = []
    for src in names:
        for dst in names:
            if src != dst and rng.random() < 0.4:
                couplings.append(
                    Coupling(
                        Endpoint(src, symbol="OUT"),
                        Endpoint(dst, symbol="IN"),
                        delay=round(rng.uniform(0.1, 0.5), 3),
                    )
                )
    topology = Topology(tuple(sorted((n_, n_) for n_ in names)), tuple(couplings))
    return DynamicModel(
        horizon=rng.choice([4.0, 5.0, 6.0]), aggregates=aggs, topology=topology
    )


def random_scenario(rng: random.Random, model: DynamicModel, sid: str = "random"):
    idents = sorted(dict(model.topology.leaf_slots()))
    entries = []
    for _ in range(rng.randint(0, 3)):
        entries.append(
            TimeEntry(
                round(rng.uniform(0.0, model.horizon), 2),
                rng.choice(idents),
                rng.choice(["GO", "STOP"]),
            )
        )
    entries.sort(key=lambda e: e.time)
    aes = []
    if rng.random() < 0.6 and len(idents) > 1:
        src, dst = rng.sample(idents, 2)
        aes.append(
            AfterEffectEntry(
                src, "LO", "HI", (Delivery(dst, "IN", round(rng.uniform(0.2, 0.8), 3)),)
            )
        )
    return Scenario(scenario_id=sid, time_diagram=tuple(entries), after_effects=tuple(aes))


def random_nested_model(rng: random.Random, n_leaves: int | None = None):
    """2-3 level topology with positive-delay couplings routed through
    boundary ports; returns the hierarchical model (flatten it yourself)."""
    n_leaves = n_leaves or rng.randint(3, 8)
    leaves = [f"l{i}" for i in range(n_leaves)]
    aggs = {name: random_aggregate(rng, name) for name in leaves}
    max_depth = rng.choice([1, 2])
    depth = {l: rng.randint(0, max_depth) for l in leaves}
    depth[leaves[0]] = max_depth  # guarantee the full depth exists
    depth[leaves[-1]] = 0

    def d(): # positive per-hop delay
        return round(rng.uniform(0.05, 0.3), 3)

    coup: dict[int, list[Coupling]] = {0: [], 1: [], 2: []}
    n_links = rng.randint(1, n_leaves)
    for n in range(n_links):
        s, t = rng.sample(leaves, 2)
        ds, dt = depth[s], depth[t]
        m = min(ds, dt)
        if ds == m:
            src_ep = Endpoint(s, symbol="OUT")
        else:
            coup[ds].append(
                Coupling(Endpoint(s, symbol="OUT"), Endpoint(BOUNDARY, symbol=f"u{n}_{ds}"), delay=d())
            )
            for lev in range(ds - 1, m, -1):
                coup[lev].append(
                    Coupling(
                        Endpoint(f"C{lev + 1}", symbol=f"u{n}_{lev + 1}"),
                        Endpoint(BOUNDARY, symbol=f"u{n}_{lev}"),
                        delay=d(),
                    )
                )
            src_ep = Endpoint(f"C{m + 1}", symbol=f"u{n}_{m + 1}")
        if dt == m:
            dst_ep = Endpoint(t, symbol="IN")
        else:
            for lev in range(m + 1, dt + 1):
                inner_dst = (
                    Endpoint(t, symbol="IN")
                    if lev == dt
                    else Endpoint(f"C{lev + 1}", symbol=f"d{n}_{lev + 1}")
                )
                coup[lev].append(
                    Coupling(Endpoint(BOUNDARY, symbol=f"d{n}_{lev}"), inner_dst, delay=d())
                )
            dst_ep = Endpoint(f"C{m + 1}", symbol=f"d{n}_{m + 1}")
        coup[m].append(Coupling(src_ep, dst_ep, delay=d()))

    def level_slots(lev):
        return [(l, l) for l in leaves if depth[l] == lev]

    slots2 = level_slots(2)
    slots1 = level_slots(1)
    if slots2:
        slots1 = slots1 + [("C2", Topology(tuple(slots2), tuple(coup[2])))]
    slots0 = level_slots(0)
    if slots1:
        slots0 = slots0 + [("C1", Topology(tuple(slots1), tuple(coup[1])))]
    topology = Topology(tuple(slots0), tuple(coup[0]))
    return DynamicModel(horizon=5.0, aggregates=aggs, topology=topology)


@pytest.fixture
def rng():
    return random.Random(20260823)
