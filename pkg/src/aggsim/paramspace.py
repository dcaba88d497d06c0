"""Parameter space: points, trajectories, subspace partitions, transitions.

The continuous state of a subsystem is a point in a q-dimensional parameter
space (each parameter itself a small vector of variables).  A partition
divides the space into disjoint axis-aligned box regions; the discrete state
of the system over a time interval is the region its trajectory bundle stays
in, and a state transition is the trajectory crossing a region boundary.

Bounds are lower-closed / upper-open, so every in-box point classifies into
exactly one region.  A coordinate exactly at the top edge of the domain box
is folded into the region touching that edge, which keeps classification
total on the closed box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    BundleArityError,
    EmptySamples,
    HeterogeneousInterval,
    NonMonotoneTime,
    OutOfDomain,
    PartitionError,
    SampleOutsideInterval,
)


@dataclass(frozen=True)
class SpacePoint:
    """A point in parameter space: q parameters, each a tuple of variables."""

    params: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.params) < 1:
            raise ValueError("SpacePoint needs at least one parameter")
        object.__setattr__(
            self, "params", tuple(tuple(float(v) for v in p) for p in self.params)
        )
        for p in self.params:
            if len(p) < 1:
                raise ValueError("each parameter needs at least one variable")
            for v in p:
                if not math.isfinite(v):
                    raise ValueError(f"non-finite coordinate {v!r}")

    @classmethod
    def of(cls, *values: float) -> "SpacePoint":
        """Single-parameter point over the given variables."""
        return cls((tuple(values),))

    @property
    def flat(self) -> tuple[float, ...]:
        return tuple(v for p in self.params for v in p)

    @property
    def dims(self) -> int:
        return sum(len(p) for p in self.params)


@dataclass(frozen=True)
class Region:
    """Axis-aligned box over the flattened variable axes, [lo, hi) per axis."""

    name: str
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "bounds", tuple((float(a), float(b)) for a, b in self.bounds)
        )
        for lo, hi in self.bounds:
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise PartitionError(f"region {self.name}: bad bounds [{lo}, {hi})")

    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi in self.bounds)


@dataclass(frozen=True)
class Partition:
    """Disjoint box regions exactly covering a declared domain box."""

    box: tuple[tuple[float, float], ...]
    regions: tuple[Region, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "box", tuple((float(a), float(b)) for a, b in self.box)
        )
        object.__setattr__(self, "regions", tuple(self.regions))
        if not self.regions:
            raise PartitionError("partition needs at least one region")
        dims = len(self.box)
        names = [r.name for r in self.regions]
        if len(set(names)) != len(names):
            raise PartitionError("duplicate region names")
        for r in self.regions:
            if len(r.bounds) != dims:
                raise PartitionError(f"region {r.name}: dimension mismatch")
            for (lo, hi), (blo, bhi) in zip(r.bounds, self.box):
                if lo < blo - 1e-12 or hi > bhi + 1e-12:
                    raise PartitionError(f"region {r.name} exceeds the domain box")
        for i, a in enumerate(self.regions):
            for b in self.regions[i + 1:]:
                if _boxes_overlap(a.bounds, b.bounds):
                    raise PartitionError(f"regions {a.name} and {b.name} overlap")
        box_vol = math.prod(hi - lo for lo, hi in self.box)
        cover = sum(r.volume() for r in self.regions)
        if abs(cover - box_vol) > 1e-9 * max(box_vol, 1.0):
            raise PartitionError("regions do not cover the domain box exactly")

    @property
    def dims(self) -> int:
        return len(self.box)

    def region_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.regions)

    def boundaries(self, axis: int) -> tuple[float, ...]:
        """Interior boundary values along one axis (domain edges excluded)."""
        blo, bhi = self.box[axis]
        vals = set()
        for r in self.regions:
            lo, hi = r.bounds[axis]
            if lo > blo:
                vals.add(lo)
            if hi < bhi:
                vals.add(hi)
        return tuple(sorted(vals))


def _boxes_overlap(a, b) -> bool:
    return all(max(alo, blo) < min(ahi, bhi) for (alo, ahi), (blo, bhi) in zip(a, b))


def classify_coords(coords: Sequence[float], partition: Partition) -> str:
    """Classify a flattened coordinate vector into its region name."""
    if len(coords) != partition.dims:
        raise OutOfDomain(
            f"point has {len(coords)} axes, partition has {partition.dims}"
        )
    for v, (lo, hi) in zip(coords, partition.box):
        if v < lo or v > hi:
            raise OutOfDomain(f"coordinate {v} outside domain box [{lo}, {hi}]")
    for r in partition.regions:
        if _region_contains(r, coords, partition.box):
            return r.name
    raise OutOfDomain(f"no region contains {tuple(coords)}")


def _region_contains(region: Region, coords, box) -> bool:
    for v, (lo, hi), (_, bhi) in zip(coords, region.bounds, box):
        if v < lo:
            return False
        # half-open on top except at the domain-box edge
        if v >= hi and not (v == bhi and hi == bhi):
            return False
    return True


def classify_point(point: SpacePoint, partition: Partition) -> str:
    return classify_coords(point.flat, partition)


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution of a point over a closed time interval.

    When the trajectory was produced by an analytic law, the law and its
    anchor are attached so that boundary crossings can be localized by
    bisection on the law instead of interpolation between samples.
    """

    interval: tuple[float, float]
    samples: tuple[tuple[float, SpacePoint], ...]
    law: object = None            # duck-typed: value_at(init, tau) -> tuple
    law_init: Optional[tuple[float, ...]] = None

    @property
    def dims(self) -> int:
        return self.samples[0][1].dims

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.samples)

    def value_at(self, t: float) -> tuple[float, ...]:
        """Coordinates at time t: from the law if attached, else interpolated."""
        t0 = self.interval[0]
        if self.law is not None and self.law_init is not None:
            return tuple(self.law.value_at(self.law_init, t - t0))
        return _interp_samples(self.samples, t)


def _interp_samples(samples, t: float) -> tuple[float, ...]:
    if t <= samples[0][0]:
        return samples[0][1].flat
    if t >= samples[-1][0]:
        return samples[-1][1].flat
    for (t0, p0), (t1, p1) in zip(samples, samples[1:]):
        if t0 <= t <= t1:
            if t1 == t0:
                return p1.flat
            w = (t - t0) / (t1 - t0)
            return tuple(a + w * (b - a) for a, b in zip(p0.flat, p1.flat))
    return samples[-1][1].flat


def build_trajectory(
    interval: tuple[float, float],
    samples: Sequence[tuple[float, SpacePoint]],
    law=None,
    law_init=None,
) -> Trajectory:
    """Validate and assemble a Trajectory."""
    t_a, t_b = float(interval[0]), float(interval[1])
    if not samples:
        raise EmptySamples("trajectory needs at least one sample")
    samples = tuple((float(t), p) for t, p in samples)
    times = [t for t, _ in samples]
    for a, b in zip(times, times[1:]):
        if b <= a:
            raise NonMonotoneTime(f"timestamps not strictly increasing at {b}")
    if times[0] != t_a:
        raise SampleOutsideInterval(f"first sample at {times[0]}, interval starts {t_a}")
    if times[-1] > t_b:
        raise SampleOutsideInterval(f"sample at {times[-1]} beyond interval end {t_b}")
    dims = samples[0][1].dims
    for _, p in samples:
        if p.dims != dims:
            raise ValueError("inconsistent sample dimensions")
    return Trajectory((t_a, t_b), samples, law=law, law_init=law_init)


@dataclass(frozen=True)
class IntervalState:
    """Trajectory bundle over an interval, homogeneous in one region."""

    interval: tuple[float, float]
    bundle: tuple[Trajectory, ...]
    region: str


def interval_state(
    bundle: Sequence[Trajectory],
    interval: tuple[float, float],
    partition: Partition,
    expected_params: Optional[int] = None,
) -> IntervalState:
    """Combine one trajectory per parameter into a region-homogeneous state.

    The bundle trajectories must share timestamps; their concatenated
    coordinates must match the partition's axes.  If samples span more than
    one region the caller has to split the interval at the transitions first.
    """
    bundle = tuple(bundle)
    if expected_params is not None and len(bundle) != expected_params:
        raise BundleArityError(
            f"expected {expected_params} trajectories, got {len(bundle)}"
        )
    if not bundle:
        raise BundleArityError("empty trajectory bundle")
    times = bundle[0].times
    for tr in bundle[1:]:
        if tr.times != times:
            raise BundleArityError("bundle trajectories must share timestamps")
    for tr in bundle:
        if tr.interval != (float(interval[0]), float(interval[1])):
            raise SampleOutsideInterval("bundle trajectory not on the given interval")
    total_dims = sum(tr.dims for tr in bundle)
    if total_dims != partition.dims:
        raise BundleArityError(
            f"bundle spans {total_dims} axes, partition has {partition.dims}"
        )
    regions = set()
    for i in range(len(times)):
        coords = tuple(v for tr in bundle for v in tr.samples[i][1].flat)
        regions.add(classify_coords(coords, partition))
    if len(regions) > 1:
        raise HeterogeneousInterval(
            f"samples span regions {sorted(regions)}; split the interval first"
        )
    return IntervalState((float(interval[0]), float(interval[1])), bundle, regions.pop())


@dataclass(frozen=True)
class Transition:
    """A boundary crossing: localized instant and the regions on both sides."""

    time: float
    from_region: str
    to_region: str
    point: SpacePoint


def detect_transitions(
    trajectory: Trajectory, partition: Partition, tol: float = 1e-9
) -> list[Transition]:
    """Find all boundary crossings of a trajectory, in time order.

    Candidate crossing instants are located per axis and per boundary value
    between consecutive samples — by bisection on the generating law when one
    is attached, by linear interpolation otherwise.  The region sequence is
    then read off at midpoints between candidates, so a trajectory that only
    touches a boundary produces no transition.
    """
    if trajectory.dims != partition.dims:
        raise OutOfDomain("trajectory and partition dimensions differ")
    samples = trajectory.samples
    candidates: list[float] = []
    for (t0, p0), (t1, p1) in zip(samples, samples[1:]):
        x0s, x1s = p0.flat, p1.flat
        for axis in range(partition.dims):
            x0, x1 = x0s[axis], x1s[axis]
            for b in partition.boundaries(axis):
                lo_hi = (x0 < b <= x1) or (x1 < b <= x0)
                hi_lo = (x0 >= b > x1) or (x1 >= b > x0)
                if not (lo_hi or hi_lo):
                    continue
                tc = _localize(trajectory, axis, b, t0, t1, x0, x1, tol)
                candidates.append(tc)
    if not candidates:
        return []
    candidates = sorted(set(candidates))
    t_a = samples[0][0]
    t_b = samples[-1][0]
    # region on each open span between candidates, read at span midpoints
    cuts = [t_a] + candidates + [t_b]
    span_regions = []
    for lo, hi in zip(cuts, cuts[1:]):
        mid = 0.5 * (lo + hi)
        span_regions.append(classify_coords(trajectory.value_at(mid), partition))
    transitions = []
    for i, tc in enumerate(candidates):
        frm, to = span_regions[i], span_regions[i + 1]
        if frm != to:
            coords = trajectory.value_at(tc)
            transitions.append(
                Transition(tc, frm, to, SpacePoint((tuple(coords),)))
            )
    return transitions


def _localize(trajectory, axis, b, t0, t1, x0, x1, tol) -> float:
    if trajectory.law is None or trajectory.law_init is None:
        if x1 == x0:
            return t0
        return t0 + (b - x0) / (x1 - x0) * (t1 - t0)
    lo, hi = t0, t1
    f = lambda t: trajectory.value_at(t)[axis] - b
    flo = f(lo)
    if flo == 0.0:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (flo < 0) == (fm < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def split_at_transitions(
    trajectory: Trajectory, partition: Partition, tol: float = 1e-9
) -> list[IntervalState]:
    """Split a trajectory at its detected transitions into homogeneous states.

    At a crossing instant the point sits exactly on the boundary, which by
    convention belongs to the upper region; endpoints whose classification
    disagrees with the span's region are pulled inside by the localization
    tolerance so each resulting state is homogeneous.
    """
    trans = detect_transitions(trajectory, partition, tol)
    t_a, t_b = trajectory.interval
    cuts = [t_a] + [tr.time for tr in trans] + [t_b]
    states = []
    for lo, hi in zip(cuts, cuts[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        region = classify_coords(trajectory.value_at(mid), partition)
        eps = min(tol, 0.25 * (hi - lo))
        while classify_coords(trajectory.value_at(lo), partition) != region:
            lo = lo + eps
            eps *= 2
        eps = min(tol, 0.25 * (hi - lo))
        while classify_coords(trajectory.value_at(hi), partition) != region:
            hi = hi - eps
            eps *= 2
        times = [t for t in trajectory.times if lo < t < hi]
        pts = [(lo, SpacePoint((trajectory.value_at(lo),)))]
        pts += [(t, SpacePoint((trajectory.value_at(t),))) for t in times]
        pts.append((hi, SpacePoint((trajectory.value_at(hi),))))
        pts = [p for i, p in enumerate(pts) if i == 0 or p[0] > pts[i - 1][0]]
        sub = build_trajectory((lo, hi), pts, law=None)
        states.append(IntervalState((lo, hi), (sub,), region))
    return states
