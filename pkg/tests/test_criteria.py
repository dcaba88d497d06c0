import math

import pytest

from aggsim import examples
from aggsim.criteria import (
    Criterion,
    compare,
    enumerate_strategies,
    evaluate,
    sensitivity,
)
from aggsim.engine import RunLog, Scenario, simulate
from aggsim.errors import (
    EmptyLog,
    EnumerationLimitExceeded,
    ScopeMismatch,
    UnknownParameterPath,
)


@pytest.fixture(scope="module")
def fill_log():
    return simulate(examples.reservoir_model(), examples.fill_scenario(), 42)


class TestCriterionValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Criterion("vibes", "tank")

    def test_unknown_direction(self):
        with pytest.raises(ValueError):
            Criterion("terminal-distance", "tank", (0.0,), direction="sideways")

    def test_kind_specific_targets(self):
        with pytest.raises(ValueError):
            Criterion("terminal-distance", "tank", target=None)
        with pytest.raises(ValueError):
            Criterion("trajectory-integral", "tank", target={"nope": 1})
        with pytest.raises(ValueError):
            Criterion("time-in-region", "tank", target=7)


class TestEvaluate:
    def test_terminal_distance_zero_at_target(self, fill_log):
        c = Criterion("terminal-distance", "tank", target=(8.0,))
        assert evaluate(fill_log, c) == 0.0

    def test_terminal_distance_euclidean(self, fill_log):
        c = Criterion("terminal-distance", "tank", target=(5.0,))
        assert abs(evaluate(fill_log, c) - 3.0) < 1e-12

    def test_const_integrand_equals_horizon(self, fill_log):
        c = Criterion("trajectory-integral", "tank", target={"const": 1.0})
        assert abs(evaluate(fill_log, c) - 8.0) < 1e-9

    def test_var_integrand_trapezoid(self, fill_log):
        # level(t) = t over [0, 8]: integral = 32, exact for a linear law
        c = Criterion("trajectory-integral", "tank", target={"var": 0})
        assert abs(evaluate(fill_log, c) - 32.0) < 1e-9

    def test_time_in_region(self, fill_log):
        c = Criterion("time-in-region", "tank", target="HIGH")
        assert abs(evaluate(fill_log, c) - 3.0) < 1e-9
        c = Criterion("time-in-region", "tank", target="LOW")
        assert abs(evaluate(fill_log, c) - 5.0) < 1e-9

    def test_time_in_absent_region_is_zero(self, fill_log):
        c = Criterion("time-in-region", "tank", target="NOWHERE")
        assert evaluate(fill_log, c) == 0.0

    def test_empty_log(self):
        c = Criterion("terminal-distance", "tank", target=(0.0,))
        with pytest.raises(EmptyLog):
            evaluate(RunLog(header={}, records=()), c)

    def test_scope_mismatch(self, fill_log):
        c = Criterion("terminal-distance", "ghost", target=(0.0,))
        with pytest.raises(ScopeMismatch):
            evaluate(fill_log, c)

    def test_target_arity_mismatch(self, fill_log):
        c = Criterion("terminal-distance", "tank", target=(0.0, 0.0))
        with pytest.raises(ScopeMismatch):
            evaluate(fill_log, c)


class TestCompare:
    def scenarios(self):
        return [examples.fill_scenario(), examples.fill_drain_scenario()]

    def test_minimize_ranks_closest_first(self):
        ranking = compare(
            examples.reservoir_model(),
            self.scenarios(),
            examples.level_criterion(target=7.0),
            seed=42,
        )
        assert [e[0] for e in ranking.entries] == ["fill-only", "fill-then-drain"]
        assert abs(ranking.entries[0][1] - 1.0) < 1e-12
        assert abs(ranking.entries[1][1] - 2.0) < 1e-12
        assert ranking.best() == "fill-only"

    def test_maximize_flips_the_order(self):
        ranking = compare(
            examples.reservoir_model(),
            self.scenarios(),
            Criterion("time-in-region", "tank", "HIGH", direction="maximize"),
            seed=42,
        )
        assert ranking.best() == "fill-only"  # 3.0 in HIGH beats 2.5

    def test_ties_break_by_scenario_id(self):
        a = examples.fill_scenario()
        b = Scenario(
            scenario_id="a-fill-clone",
            time_diagram=a.time_diagram,
            after_effects=a.after_effects,
        )
        ranking = compare(
            examples.reservoir_model(),
            [a, b],
            examples.level_criterion(target=7.0),
            seed=42,
        )
        assert [e[0] for e in ranking.entries] == ["a-fill-clone", "fill-only"]

    def test_empty_scenario_list_rejected(self):
        with pytest.raises(ValueError):
            compare(examples.reservoir_model(), [], examples.level_criterion(), 0)

    def test_failure_names_the_scenario(self):
        bad = Scenario(scenario_id="broken")
        with pytest.raises(Exception) as err:
            compare(
                examples.reservoir_model(),
                [bad],
                Criterion("terminal-distance", "ghost", (0.0,)),
                seed=0,
            )
        assert "broken" in str(err.value)

    def test_ranking_carries_provenance(self):
        ranking = compare(
            examples.reservoir_model(),
            self.scenarios(),
            examples.level_criterion(),
            seed=7,
        )
        assert ranking.seed == 7
        assert len(ranking.model_digest) == 64


class TestEnumerateStrategies:
    def test_count_formula(self):
        model = examples.reservoir_model()
        got = enumerate_strategies(model, ["FILL", "DRAIN"], [4.0], 1, "tank")
        # C(1,0)*2 + C(1,1)*4 = 6
        assert len(got) == 6
        assert [s.scenario_id for s in got] == [f"strategy-{n:04d}" for n in range(6)]

    def test_every_schedule_starts_at_zero(self):
        got = enumerate_strategies(
            examples.reservoir_model(), ["FILL", "DRAIN"], [2.0, 4.0], 2, "tank"
        )
        expected = sum(
            math.comb(2, k) * 2 ** (k + 1) for k in range(3)
        )
        assert len(got) == expected
        for sc in got:
            assert sc.time_diagram[0].time == 0.0
            times = [e.time for e in sc.time_diagram]
            assert times == sorted(times)

    def test_zero_switches_is_one_symbol_each(self):
        got = enumerate_strategies(
            examples.reservoir_model(), ["FILL", "DRAIN"], [4.0], 0, "tank"
        )
        assert len(got) == 2
        assert all(len(s.time_diagram) == 1 for s in got)

    def test_limit_enforced_before_generation(self):
        with pytest.raises(EnumerationLimitExceeded):
            enumerate_strategies(
                examples.reservoir_model(),
                ["FILL", "DRAIN"],
                [float(k) / 4 for k in range(20)],
                10,
                "tank",
                limit=100,
            )

    def test_grid_point_outside_horizon_rejected(self):
        with pytest.raises(ValueError):
            enumerate_strategies(
                examples.reservoir_model(), ["FILL"], [9.0], 1, "tank"
            )

    def test_negative_switch_budget_rejected(self):
        with pytest.raises(ValueError):
            enumerate_strategies(
                examples.reservoir_model(), ["FILL"], [4.0], -1, "tank"
            )

    def test_brute_force_agrees_with_compare(self):
        model = examples.reservoir_model()
        criterion = examples.level_criterion(target=7.0)
        strategies = enumerate_strategies(model, ["FILL", "DRAIN"], [4.0], 1, "tank")
        ranking = compare(model, strategies, criterion, seed=0)
        by_hand = min(
            ((sc.scenario_id, evaluate(simulate(model, sc, 0), criterion)) for sc in strategies),
            key=lambda e: (e[1], e[0]),
        )
        assert ranking.entries[0] == by_hand


class TestSensitivity:
    def test_sweep_over_fill_rate(self):
        table = sensitivity(
            examples.reservoir_model(),
            "aggregates.tank.laws.FILL.rates.0",
            [1.5, 0.5, 1.0],
            examples.fill_scenario(),
            examples.level_criterion(target=7.0),
            seed=0,
        )
        # rate r gives terminal level 8r; |8r - 7| = 1, 3, 5
        assert [(v, round(s, 9)) for v, s in table] == [
            (0.5, 3.0),
            (1.0, 1.0),
            (1.5, 5.0),
        ]

    def test_unknown_path_rejected(self):
        with pytest.raises(UnknownParameterPath):
            sensitivity(
                examples.reservoir_model(),
                "aggregates.tank.laws.NOPE.rates.0",
                [1.0],
                examples.fill_scenario(),
                examples.level_criterion(),
                seed=0,
            )
        with pytest.raises(UnknownParameterPath):
            sensitivity(
                examples.reservoir_model(),
                "aggregates.tank.laws.FILL.rates.5",
                [1.0],
                examples.fill_scenario(),
                examples.level_criterion(),
                seed=0,
            )

    def test_empty_values_gives_empty_table(self):
        table = sensitivity(
            examples.reservoir_model(),
            "aggregates.tank.laws.FILL.rates.0",
            [],
            examples.fill_scenario(),
            examples.level_criterion(),
            seed=0,
        )
        assert table == []

    def test_model_object_is_not_mutated(self):
        model = examples.reservoir_model()
        before = model.aggregate_map()["tank"].law_table()["FILL"].rates
        sensitivity(
            model,
            "aggregates.tank.laws.FILL.rates.0",
            [9.0],
            examples.fill_scenario(),
            examples.level_criterion(),
            seed=0,
        )
        assert model.aggregate_map()["tank"].law_table()["FILL"].rates == before
