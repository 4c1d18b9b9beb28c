"""Li-Yorke statistics from orbit distance trajectories.

liminf and limsup are estimated by the minimum and maximum of
``d(T^n p, T^n q)`` over the tail window ``burn_in <= n < horizon``.
Every sampled pair draws from its own :class:`RngStream` keyed by the pair
index, so results do not depend on chunking or on the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from . import metrics as M
from .systems import (
    ConfigurationError,
    OrbitBatch,
    Point,
    RngStream,
    SystemSpec,
    derive_seed,
    lower_points,
    sample_batch,
    system_program,
)


@dataclass(frozen=True)
class AnalysisConfig:
    horizon: int = 10_000
    burn_in: Optional[int] = None
    eps: float = 0.01
    delta: float = 0.1
    pairs: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.horizon // 2)
        if self.horizon < 2:
            raise ConfigurationError("horizon must be at least 2")
        if not 0 <= self.burn_in < self.horizon:
            raise ConfigurationError("burn_in must lie in [0, horizon)")
        if not 0 < self.eps < self.delta <= 1:
            raise ConfigurationError("need 0 < eps < delta <= 1")
        if self.pairs < 1:
            raise ConfigurationError("pairs must be positive")

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "burn_in": self.burn_in,
            "eps": self.eps,
            "delta": self.delta,
            "pairs": self.pairs,
            "seed": self.seed,
        }


@dataclass
class PairStats:
    tail_min: float
    tail_max: float
    dists: Optional[np.ndarray] = None


@dataclass(frozen=True)
class LiYorkeVerdict:
    proximal: bool
    separated: bool

    @property
    def li_yorke(self) -> bool:
        return self.proximal and self.separated


@dataclass
class Estimate:
    """A Monte Carlo proportion with its normal-approximation 95% half-width."""

    value: float
    half_width: float
    successes: int
    count: int

    @classmethod
    def from_counts(cls, successes: int, count: int) -> "Estimate":
        f = successes / count
        return cls(f, 1.96 * math.sqrt(f * (1.0 - f) / count), int(successes), int(count))

    @property
    def standard_error(self) -> float:
        return self.half_width / 1.96

    def to_dict(self) -> dict:
        return {"value": self.value, "half_width": self.half_width,
                "successes": self.successes, "count": self.count}


@dataclass
class PairSample:
    tail_min: np.ndarray
    tail_max: np.ndarray
    initial: dict = field(default_factory=dict)

    def verdicts(self, config: AnalysisConfig):
        return classify_arrays(self.tail_min, self.tail_max, config)


@dataclass
class DistanceCoverage:
    grid: np.ndarray
    hit_rate: np.ndarray
    pair_fractions: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.pair_fractions.mean())

    def to_dict(self) -> dict:
        return {"grid": self.grid.tolist(), "hit_rate": self.hit_rate.tolist(),
                "mean_coverage": self.mean, "pairs": len(self.pair_fractions)}


@dataclass
class ScrambledSet:
    points: list
    complete: bool
    candidates_used: int
    target: int

    @property
    def size(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        return {"size": self.size, "target": self.target, "complete": self.complete,
                "candidates_used": self.candidates_used}


# ---------------------------------------------------------------------------
# chunked evaluation


def _chunk_size(horizon: int) -> int:
    return int(max(16, min(2048, (1 << 22) // max(horizon, 1))))


def _map_chunks(fn, total: int, chunk: int, threads: int = 1) -> list:
    bounds = [(a, min(a + chunk, total)) for a in range(0, total, chunk)]
    if threads <= 1 or len(bounds) <= 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda ab: fn(*ab), bounds))


def sample_pairs(system: SystemSpec, seed: int, start: int, stop: int, horizon: int):
    """Pairs ``start..stop-1``; pair ``i`` is drawn from ``RngStream(seed, i)``."""
    draws = [sample_batch(system, RngStream(seed, i).generator(), 2, horizon)
             for i in range(start, stop)]
    both = OrbitBatch.concat(draws)
    return both.take(np.arange(0, len(both), 2)), both.take(np.arange(1, len(both), 2))


def sample_partners(system, x_batch: OrbitBatch, seed, start, stop, horizon):
    """``x`` repeated against partners ``start..stop-1`` from ``RngStream(seed, i)``."""
    draws = [sample_batch(system, RngStream(seed, i).generator(), 1, horizon)
             for i in range(start, stop)]
    return x_batch.repeat(0, stop - start), OrbitBatch.concat(draws)


def classify_arrays(tail_min, tail_max, config: AnalysisConfig):
    proximal = np.asarray(tail_min) <= config.eps
    separated = np.asarray(tail_max) >= config.delta
    return proximal, separated, proximal & separated


# ---------------------------------------------------------------------------
# operations


def pair_stats(system, metric, p: Point, q: Point, config: AnalysisConfig,
               keep_trajectory: bool = False) -> PairStats:
    h = M.required_horizon(metric, config.horizon)
    P = lower_points(system, [p], h)
    Q = lower_points(system, [q], h)
    if keep_trajectory:
        d = M.trajectories(metric, system, P, Q, 0, config.horizon)[0]
        tail = d[config.burn_in:]
        return PairStats(float(tail.min()), float(tail.max()), d)
    lo, hi = M.tail_extrema(metric, system, P, Q, config.burn_in, config.horizon)
    return PairStats(float(lo[0]), float(hi[0]))


def classify(stats: PairStats, config: AnalysisConfig) -> LiYorkeVerdict:
    return LiYorkeVerdict(stats.tail_min <= config.eps, stats.tail_max >= config.delta)


def sample_pair_stats(system, metric, config: AnalysisConfig, *, purpose: str = "density",
                      initial_metrics: Sequence[M.MetricSpec] = (), threads: int = 1,
                      pairs: Optional[int] = None, with_coordinates: bool = False) -> PairSample:
    """Tail extrema for i.i.d. µ x µ pairs, plus optional time-0 distances.

    With ``with_coordinates`` the time-0 interval coordinates are returned
    in ``initial["p_x"]`` and ``initial["q_x"]``.
    """
    total = config.pairs if pairs is None else pairs
    seed = derive_seed(config.seed, purpose)
    h = max([M.required_horizon(metric, config.horizon)]
            + [M.required_horizon(m, 1) for m in initial_metrics])

    def work(a, b):
        P, Q = sample_pairs(system, seed, a, b, h)
        lo, hi = M.tail_extrema(metric, system, P, Q, config.burn_in, config.horizon)
        init = [M.values_at_zero(m, system, P, Q) for m in initial_metrics]
        if with_coordinates:
            sp = system_program(system)
            init += [kernels.coords(P, sp, 0, 1)[0][:, 0], kernels.coords(Q, sp, 0, 1)[0][:, 0]]
        return lo, hi, init

    parts = _map_chunks(work, total, _chunk_size(h), threads)
    init = {}
    names = [m.name for m in initial_metrics] + (["p_x", "q_x"] if with_coordinates else [])
    for j, name in enumerate(names):
        init[name] = np.concatenate([p[2][j] for p in parts])
    return PairSample(
        np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]), init
    )


def li_yorke_density(system, metric, config: AnalysisConfig, threads: int = 1) -> Estimate:
    """Fraction of sampled pairs classified Li-Yorke."""
    if config.pairs < 100:
        raise ConfigurationError("density needs at least 100 pairs")
    sample = sample_pair_stats(system, metric, config, threads=threads)
    ly = sample.verdicts(config)[2]
    return Estimate.from_counts(int(ly.sum()), len(ly))


def sensitivity_profile(system, metric, x: Point, config: AnalysisConfig,
                        threads: int = 1) -> float:
    """Fraction of sampled ``y`` whose orbit separates from ``x`` by at least delta."""
    if config.pairs < 100:
        raise ConfigurationError("profile needs at least 100 partners")
    h = M.required_horizon(metric, config.horizon)
    X = lower_points(system, [x], h)
    seed = derive_seed(config.seed, "profile")

    def work(a, b):
        P, Q = sample_partners(system, X, seed, a, b, h)
        return M.tail_extrema(metric, system, P, Q, config.burn_in, config.horizon)[1]

    tmax = np.concatenate(_map_chunks(work, config.pairs, _chunk_size(h), threads))
    return float(np.count_nonzero(tmax >= config.delta) / len(tmax))


def coverage_grid(step: float, upper: float = 1.0) -> np.ndarray:
    if step <= 0:
        raise ConfigurationError("grid step must be positive")
    count = int(math.floor(1.0 / step + 1e-9))
    grid = np.arange(count + 1) * step
    return grid[grid <= upper + 1e-12]


def distance_coverage(system, metric, config: AnalysisConfig, grid_step: float, tol: float,
                      grid_max: Optional[float] = None, threads: int = 1) -> DistanceCoverage:
    """How much of the distance grid the tail of each pair's orbit comes within ``tol`` of."""
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    upper = M.metric_diameter(metric) if grid_max is None else grid_max
    grid = coverage_grid(grid_step, upper)
    h = M.required_horizon(metric, config.horizon)
    seed = derive_seed(config.seed, "coverage")

    def work(a, b):
        P, Q = sample_pairs(system, seed, a, b, h)
        return M.coverage_hits(metric, system, P, Q, config.burn_in, config.horizon, grid, tol)

    hits = np.concatenate(_map_chunks(work, config.pairs, _chunk_size(h), threads))
    return DistanceCoverage(grid, hits.mean(axis=0), hits.mean(axis=1))


def greedy_scrambled_set(system, metric, config: AnalysisConfig, target: int,
                         budget: int) -> ScrambledSet:
    """Accept a candidate iff it forms a Li-Yorke pair with every member so far."""
    if target < 2:
        raise ConfigurationError("target size must be at least 2")
    h = M.required_horizon(metric, config.horizon)
    seed = derive_seed(config.seed, "scrambled")
    members: list[OrbitBatch] = []
    used = 0
    while len(members) < target and used < budget:
        cand = sample_batch(system, RngStream(seed, used).generator(), 1, h)
        used += 1
        if members:
            Q = OrbitBatch.concat(members)
            lo, hi = M.tail_extrema(metric, system, cand.repeat(0, len(Q)), Q,
                                    config.burn_in, config.horizon)
            if not classify_arrays(lo, hi, config)[2].all():
                continue
        members.append(cand)
    points = [b.point(0, system) for b in members]
    return ScrambledSet(points, len(points) >= target, used, target)
