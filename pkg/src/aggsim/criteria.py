"""Efficiency criteria over run logs, scenario comparison, and sweeps.

A criterion scores one complete run log for one subsystem scope.  compare
simulates every scenario with the same seed and ranks them; strategy
enumeration generates all bounded switching schedules over a time grid so
the search stays exhaustive and reproducible; sensitivity sweeps one model
parameter over a list of values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations, product
from typing import Optional, Sequence

from .engine import DynamicModel, EngineOptions, RunLog, Scenario, TimeEntry, simulate
from .errors import (
    EmptyLog,
    EnumerationLimitExceeded,
    ScopeMismatch,
    UnknownParameterPath,
)

CRITERION_KINDS = ("terminal-distance", "trajectory-integral", "time-in-region")
DIRECTIONS = ("minimize", "maximize")


@dataclass(frozen=True)
class Criterion:
    """kind-specific target:
    terminal-distance   target point (tuple of floats)
    trajectory-integral integrand spec {"var": i} or {"const": c}
    time-in-region      region name
    """

    kind: str
    scope: str  # subsystem identifier
    target: object = None
    direction: str = "minimize"

    def __post_init__(self):
        if self.kind not in CRITERION_KINDS:
            raise ValueError(f"unknown criterion kind {self.kind!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.kind == "terminal-distance":
            if not isinstance(self.target, (list, tuple)):
                raise ValueError("terminal-distance needs a target point")
            object.__setattr__(
                self, "target", tuple(float(v) for v in self.target)
            )
        elif self.kind == "trajectory-integral":
            if not isinstance(self.target, dict) or not (
                "var" in self.target or "const" in self.target
            ):
                raise ValueError("trajectory-integral needs an integrand spec")
            object.__setattr__(self, "target", dict(self.target))
        elif not isinstance(self.target, str):
            raise ValueError("time-in-region needs a region name")

    # dict targets break the frozen-dataclass hash; identity hash is enough
    def __hash__(self):
        return id(self)


@dataclass(frozen=True)
class Ranking:
    entries: tuple[tuple[str, float], ...]  # (scenario id, score), ranked
    criterion: Criterion
    seed: int
    model_digest: str

    def best(self) -> str:
        return self.entries[0][0]


def _samples(log: RunLog, scope: str) -> list[dict]:
    recs = [
        r
        for r in log.records
        if r["type"] == "sample" and r["target"] == scope
    ]
    if not any(r.get("target") == scope or scope in r.get("states", {}) for r in log.records):
        raise ScopeMismatch(f"no records for subsystem {scope!r} in this log")
    return recs


def evaluate(log: RunLog, criterion: Criterion) -> float:
    """Pure score of a complete log; see Criterion for target semantics."""
    if not log.records:
        raise EmptyLog("cannot evaluate an empty log")
    scope = criterion.scope
    terminal = log.terminal_states()
    if not terminal:
        raise EmptyLog("log has no terminal record")
    if scope not in terminal:
        raise ScopeMismatch(f"no subsystem {scope!r} in this log")

    if criterion.kind == "terminal-distance":
        vals = terminal[scope]["vars"]
        target = criterion.target
        if len(vals) != len(target):
            raise ScopeMismatch(
                f"target has {len(target)} coordinates, state has {len(vals)}"
            )
        return math.sqrt(sum((a - b) ** 2 for a, b in zip(vals, target)))

    if criterion.kind == "trajectory-integral":
        samples = _samples(log, scope)
        if len(samples) < 2:
            raise EmptyLog(f"not enough samples for {scope!r}")
        spec = criterion.target
        if "var" in spec:
            f = lambda r: r["vars"][spec["var"]]
        else:
            c = float(spec["const"])
            f = lambda r: c
        total = 0.0
        for a, b in zip(samples, samples[1:]):
            total += 0.5 * (f(a) + f(b)) * (b["t"] - a["t"])
        return total

    # time-in-region: stitch spans from the initial region and transitions
    region = criterion.target
    events: list[tuple[float, str]] = []
    first_sample = None
    for r in log.records:
        if r["type"] == "sample" and r["target"] == scope and first_sample is None:
            first_sample = r
        if r["type"] == "transition" and r["target"] == scope:
            events.append((r["t"], r["to"]))
    if first_sample is None:
        raise ScopeMismatch(f"no records for subsystem {scope!r} in this log")
    horizon = log.header["horizon"]
    total = 0.0
    current, t_prev = first_sample["region"], first_sample["t"]
    for t, to in events:
        if current == region:
            total += t - t_prev
        current, t_prev = to, t
    if current == region:
        total += horizon - t_prev
    return total


def compare(
    model: DynamicModel,
    scenarios: Sequence[Scenario],
    criterion: Criterion,
    seed: int,
    opts: Optional[EngineOptions] = None,
) -> Ranking:
    """Simulate every scenario with the same seed and rank by score."""
    if not scenarios:
        raise ValueError("compare needs at least one scenario")
    scores = []
    digest = ""
    for sc in scenarios:
        try:
            log = simulate(model, sc, seed, opts)
            score = evaluate(log, criterion)
        except Exception as exc:
            exc.args = (f"scenario {sc.scenario_id!r}: {exc}",)
            raise
        digest = log.header["model_digest"]
        scores.append((sc.scenario_id, score))
    sign = 1.0 if criterion.direction == "minimize" else -1.0
    ordered = sorted(scores, key=lambda e: (sign * e[1], e[0]))
    return Ranking(tuple(ordered), criterion, int(seed), digest)


def enumerate_strategies(
    model: DynamicModel,
    alphabet: Sequence[str],
    grid: Sequence[float],
    max_switches: int,
    target: str,
    limit: int = 10_000,
) -> list[Scenario]:
    """All switching schedules with at most max_switches grid switch points.

    Every schedule starts with one symbol at t=0 and changes symbol at each
    chosen switch time, so a schedule with k switches draws k grid points
    and k+1 symbols.  Raises EnumerationLimitExceeded before generating if
    the count Sum_k C(|grid|, k) * |U|^(k+1) exceeds the limit.
    """
    alphabet = list(alphabet)
    grid = sorted(float(t) for t in grid)
    if max_switches < 0:
        raise ValueError("max switches must be non-negative")
    for t in grid:
        if not (0.0 <= t <= model.horizon):
            raise ValueError(f"grid time {t} outside the horizon")
    count = sum(
        math.comb(len(grid), k) * len(alphabet) ** (k + 1)
        for k in range(min(max_switches, len(grid)) + 1)
    )
    if count > limit:
        raise EnumerationLimitExceeded(f"{count} candidate scenarios exceed {limit}")
    out = []
    n = 0
    for k in range(min(max_switches, len(grid)) + 1):
        for times in combinations(grid, k):
            for symbols in product(alphabet, repeat=k + 1):
                entries = [TimeEntry(0.0, target, symbols[0])]
                entries += [
                    TimeEntry(t, target, s) for t, s in zip(times, symbols[1:])
                ]
                out.append(
                    Scenario(
                        scenario_id=f"strategy-{n:04d}",
                        time_diagram=tuple(entries),
                    )
                )
                n += 1
    return out


def _resolve_parameter(model: DynamicModel, path: str):
    """Split a dotted path into the model document and a setter closure."""
    from . import documents

    doc = documents.model_to_doc(model)
    parts = path.split(".")
    node = doc
    for part in parts[:-1]:
        if isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError) as exc:
                raise UnknownParameterPath(path) from exc
        elif isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise UnknownParameterPath(path)
    leaf = parts[-1]
    if isinstance(node, list):
        try:
            idx = int(leaf)
            node[idx]
        except (ValueError, IndexError) as exc:
            raise UnknownParameterPath(path) from exc
        return doc, lambda v: node.__setitem__(idx, v)
    if not isinstance(node, dict) or leaf not in node:
        raise UnknownParameterPath(path)
    return doc, lambda v: node.__setitem__(leaf, v)


def sensitivity(
    model: DynamicModel,
    parameter_path: str,
    values: Sequence[float],
    scenario: Scenario,
    criterion: Criterion,
    seed: int,
    opts: Optional[EngineOptions] = None,
) -> list[tuple[float, float]]:
    """Score the scenario once per parameter value; same seed throughout.

    The path is dotted into the model document, e.g.
    "aggregates.tank.laws.FILL.rates.0".
    """
    from . import documents

    doc, setter = _resolve_parameter(model, parameter_path)
    table = []
    for v in sorted(float(x) for x in values):
        setter(v)
        varied = documents.model_from_doc(doc)
        log = simulate(varied, scenario, seed, opts)
        table.append((v, evaluate(log, criterion)))
    return table
