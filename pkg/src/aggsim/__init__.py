"""Hybrid discrete-continuous simulation of hierarchical aggregate models.

Aggregates evolve continuously under analytic laws between discrete
events — partition-boundary crossings, scenario-driven control symbols,
coupled input deliveries, monitoring records — and every run is a pure,
replayable function of (model, scenario, seed).
"""

from .aggregate import AggState, Aggregate, OperatorRule, OutputRule
from .criteria import (
    Criterion,
    Ranking,
    compare,
    enumerate_strategies,
    evaluate,
    sensitivity,
)
from .engine import (
    AfterEffectEntry,
    Delivery,
    DynamicModel,
    EngineOptions,
    MonitoringEntry,
    ReestimationRule,
    Run,
    RunLog,
    Scenario,
    TimeEntry,
    replay,
    simulate,
)
from .errors import AggsimError
from .laws import AnalyticLaw, evolve, law_substream
from .paramspace import (
    Partition,
    Region,
    SpacePoint,
    Trajectory,
    Transition,
    classify_point,
    detect_transitions,
    split_at_transitions,
)
from .structure import (
    Coupling,
    Endpoint,
    MutationOp,
    Struct,
    Topology,
    flatten,
    mutate,
    validate_topology,
)
from .synthesis import (
    CanonicalTemplate,
    KnowledgeBase,
    ObjectivesTree,
    TemplateModel,
    bind_template,
    build_objectives_tree,
    infer,
    synthesize_dynamic_model,
    transform_template,
)

__version__ = "0.1.0"
