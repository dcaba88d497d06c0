"""Analytic inter-event evolution laws and deterministic random substreams.

Laws are evaluated in closed form relative to an anchor (initial values at
the start of the current continuous segment), so there is no integration
error and boundary crossings can be localized exactly.  The one stochastic
law, the seeded random walk, draws from a named substream derived from the
run's master seed, which makes runs replayable and keeps the streams of
different aggregates isolated from each other.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import NonFiniteValue, UnknownLawError
from .paramspace import SpacePoint, Trajectory, build_trajectory

LAW_KINDS = (
    "constant",
    "linear-rate",
    "exponential",
    "table-interpolation",
    "seeded-random-walk",
)


@dataclass(frozen=True)
class AnalyticLaw:
    """One evolution law over the flattened variables of an aggregate.

    kind-specific coefficients, all per variable:
      linear-rate          rates
      exponential          lambdas
      table-interpolation  tables: ((tau, value), ...) per variable
      seeded-random-walk   drift, sigma, plus a substream label
    """

    kind: str
    rates: tuple[float, ...] = ()
    lambdas: tuple[float, ...] = ()
    tables: tuple[tuple[tuple[float, float], ...], ...] = ()
    drift: tuple[float, ...] = ()
    sigma: tuple[float, ...] = ()
    substream: str = ""

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise UnknownLawError(f"unknown law kind {self.kind!r}")
        object.__setattr__(self, "rates", tuple(float(v) for v in self.rates))
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "drift", tuple(float(v) for v in self.drift))
        object.__setattr__(self, "sigma", tuple(float(v) for v in self.sigma))
        object.__setattr__(
            self,
            "tables",
            tuple(
                tuple((float(t), float(v)) for t, v in table) for table in self.tables
            ),
        )
        for vals in (self.rates, self.lambdas, self.drift, self.sigma):
            for v in vals:
                if not math.isfinite(v):
                    raise NonFiniteValue(f"non-finite coefficient {v!r}")
        if self.kind == "seeded-random-walk" and not self.substream:
            raise UnknownLawError("seeded-random-walk needs a substream label")

    @property
    def is_stochastic(self) -> bool:
        return self.kind == "seeded-random-walk"

    def value_at(self, init: Sequence[float], tau: float) -> tuple[float, ...]:
        """Closed-form value at elapsed time tau since the anchor."""
        if self.kind == "constant":
            return tuple(init)
        if self.kind == "linear-rate":
            out = tuple(
                x + self._coef(self.rates, i) * tau for i, x in enumerate(init)
            )
        elif self.kind == "exponential":
            out = tuple(
                x * math.exp(self._coef(self.lambdas, i) * tau)
                for i, x in enumerate(init)
            )
        elif self.kind == "table-interpolation":
            out = tuple(
                self._table_value(i, x, tau) for i, x in enumerate(init)
            )
        else:
            raise UnknownLawError(
                f"{self.kind} has no closed form; evolve it with a substream"
            )
        for v in out:
            if not math.isfinite(v):
                raise NonFiniteValue(f"law {self.kind} produced {v!r}")
        return out

    @staticmethod
    def _coef(coefs, i) -> float:
        if not coefs:
            return 0.0
        return coefs[i] if i < len(coefs) else coefs[-1]

    def _table_value(self, i: int, init: float, tau: float) -> float:
        if i >= len(self.tables) or not self.tables[i]:
            return init
        pts = self.tables[i]
        if tau <= pts[0][0]:
            return pts[0][1]
        if tau >= pts[-1][0]:
            return pts[-1][1]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t0 <= tau <= t1:
                if t1 == t0:
                    return v1
                return v0 + (tau - t0) / (t1 - t0) * (v1 - v0)
        return pts[-1][1]


def law_substream(master_seed: int, aggregate_id: str, label: str) -> random.Random:
    """Deterministic, isolated RNG for one (aggregate, law substream) pair."""
    material = f"{master_seed}/{aggregate_id}/{label}".encode()
    seed = int.from_bytes(hashlib.sha256(material).digest()[:8], "big")
    return random.Random(seed)


def sample_times(t_a: float, t_b: float, step: float) -> list[float]:
    """Grid t_a, t_a+step, ... with t_b always included."""
    if step <= 0:
        raise ValueError("step must be positive")
    times = []
    k = 0
    while True:
        t = t_a + k * step
        if t >= t_b - 1e-15 * max(1.0, abs(t_b)):
            break
        times.append(t)
        k += 1
    times.append(t_b)
    return times


def evolve(
    law: AnalyticLaw,
    init: SpacePoint | Sequence[float],
    interval: tuple[float, float],
    step: float,
    rng: Optional[random.Random] = None,
) -> Trajectory:
    """Sample a law over an interval; deterministic given the substream.

    Deterministic laws keep the law attached to the returned trajectory so
    that transitions can later be localized by bisection.
    """
    t_a, t_b = float(interval[0]), float(interval[1])
    if t_b <= t_a:
        raise ValueError("degenerate interval")
    init_vals = init.flat if isinstance(init, SpacePoint) else tuple(
        float(v) for v in init
    )
    times = sample_times(t_a, t_b, step)
    if law.is_stochastic:
        if rng is None:
            raise ValueError("seeded-random-walk needs an rng substream")
        vals = list(init_vals)
        samples = [(times[0], SpacePoint((tuple(vals),)))]
        for t in times[1:]:
            vals = [
                v
                + AnalyticLaw._coef(law.drift, i)
                + AnalyticLaw._coef(law.sigma, i) * rng.gauss(0.0, 1.0)
                for i, v in enumerate(vals)
            ]
            for v in vals:
                if not math.isfinite(v):
                    raise NonFiniteValue("random walk diverged")
            samples.append((t, SpacePoint((tuple(vals),))))
        return build_trajectory((t_a, t_b), samples)
    samples = [
        (t, SpacePoint((law.value_at(init_vals, t - t_a),))) for t in times
    ]
    return build_trajectory((t_a, t_b), samples, law=law, law_init=init_vals)
