import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aggsim.errors import NonFiniteValue, UnknownLawError
from aggsim.laws import AnalyticLaw, evolve, law_substream, sample_times


class TestClosedForms:
    def test_constant_holds_initial(self):
        law = AnalyticLaw("constant")
        assert law.value_at((3.0, -1.0), 100.0) == (3.0, -1.0)

    def test_linear_rate(self):
        law = AnalyticLaw("linear-rate", rates=(2.0, -1.0))
        assert law.value_at((0.0, 10.0), 3.0) == (6.0, 7.0)

    def test_linear_rate_pads_with_last_coefficient(self):
        law = AnalyticLaw("linear-rate", rates=(2.0,))
        assert law.value_at((0.0, 0.0), 1.0) == (2.0, 2.0)

    def test_exponential(self):
        law = AnalyticLaw("exponential", lambdas=(0.5,))
        (v,) = law.value_at((2.0,), 3.0)
        assert abs(v - 2.0 * math.exp(1.5)) < 1e-12

    def test_table_interpolation_and_clamping(self):
        law = AnalyticLaw(
            "table-interpolation", tables=(((0.0, 1.0), (2.0, 5.0)),)
        )
        assert law.value_at((1.0,), -1.0) == (1.0,)   # clamped low
        assert law.value_at((1.0,), 1.0) == (3.0,)    # interior
        assert law.value_at((1.0,), 10.0) == (5.0,)   # clamped high

    def test_unknown_kind_rejected(self):
        with pytest.raises(UnknownLawError):
            AnalyticLaw("quadratic")

    def test_walk_has_no_closed_form(self):
        law = AnalyticLaw("seeded-random-walk", sigma=(1.0,), substream="w")
        with pytest.raises(UnknownLawError):
            law.value_at((0.0,), 1.0)

    def test_non_finite_coefficient_rejected(self):
        with pytest.raises(NonFiniteValue):
            AnalyticLaw("linear-rate", rates=(float("inf"),))

    def test_exponential_overflow_reported(self):
        law = AnalyticLaw("exponential", lambdas=(1.0,))
        with pytest.raises((NonFiniteValue, OverflowError)):
            law.value_at((1.0,), 1e6)


class TestSubstreams:
    def test_same_inputs_same_stream(self):
        a = law_substream(42, "tank", "noise")
        b = law_substream(42, "tank", "noise")
        assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]

    def test_streams_isolated_by_label_and_aggregate(self):
        base = [law_substream(42, "tank", "noise").random() for _ in range(3)]
        assert base != [law_substream(42, "tank", "other").random() for _ in range(3)]
        assert base != [law_substream(42, "pump", "noise").random() for _ in range(3)]
        assert base != [law_substream(43, "tank", "noise").random() for _ in range(3)]


class TestSampleTimes:
    def test_grid_includes_both_ends(self):
        times = sample_times(0.0, 1.0, 0.25)
        assert times[0] == 0.0 and times[-1] == 1.0
        assert times == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_non_divisible_step_still_ends_at_t_b(self):
        times = sample_times(0.0, 1.0, 0.3)
        assert times[-1] == 1.0
        assert all(b > a for a, b in zip(times, times[1:]))

    def test_positive_step_required(self):
        with pytest.raises(ValueError):
            sample_times(0.0, 1.0, 0.0)


class TestEvolve:
    def test_deterministic_law_attaches_itself(self):
        law = AnalyticLaw("linear-rate", rates=(1.0,))
        tr = evolve(law, (0.0,), (0.0, 4.0), step=1.0)
        assert tr.law is law
        assert tr.samples[-1][1].flat == (4.0,)

    def test_walk_reproducible_for_same_substream(self):
        law = AnalyticLaw(
            "seeded-random-walk", drift=(0.1,), sigma=(0.5,), substream="w"
        )
        a = evolve(law, (0.0,), (0.0, 5.0), 0.1, rng=law_substream(7, "x", "w"))
        b = evolve(law, (0.0,), (0.0, 5.0), 0.1, rng=law_substream(7, "x", "w"))
        assert a.samples == b.samples

    def test_walk_differs_across_seeds(self):
        law = AnalyticLaw(
            "seeded-random-walk", drift=(0.1,), sigma=(0.5,), substream="w"
        )
        a = evolve(law, (0.0,), (0.0, 5.0), 0.1, rng=law_substream(7, "x", "w"))
        b = evolve(law, (0.0,), (0.0, 5.0), 0.1, rng=law_substream(8, "x", "w"))
        assert a.samples != b.samples

    def test_walk_requires_rng(self):
        law = AnalyticLaw("seeded-random-walk", sigma=(1.0,), substream="w")
        with pytest.raises(ValueError):
            evolve(law, (0.0,), (0.0, 1.0), 0.5)

    @given(
        rate=st.floats(min_value=-3.0, max_value=3.0, allow_nan=False),
        init=st.floats(min_value=-5.0, max_value=5.0, allow_nan=False),
        span=st.floats(min_value=0.5, max_value=6.0, allow_nan=False),
    )
    def test_linear_samples_match_arithmetic(self, rate, init, span):
        law = AnalyticLaw("linear-rate", rates=(rate,))
        tr = evolve(law, (init,), (0.0, span), step=span / 5)
        for t, p in tr.samples:
            assert abs(p.flat[0] - (init + rate * t)) < 1e-9
