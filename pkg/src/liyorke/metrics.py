"""Metric constructions, evaluation along orbits, and certification.

A :class:`MetricSpec` is an immutable tree.  Everything except
``dynamic_sup`` lowers to a flat :class:`MetricProgram` that the compiled
kernels evaluate directly: an optional cell partition (different cells are
at distance 1), an intra-cell base distance, and an optional additive label
term.  ``dynamic_sup`` is evaluated on top of its base's trajectories.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .systems import (
    ConfigurationError,
    OrbitBatch,
    Point,
    RngStream,
    SystemSpec,
    lower_points,
    sample_batch,
    system_program,
)

BASE_CIRCLE = 0
BASE_EUCLID = 1
BASE_PULLBACK = 2
BASE_DISCRETE = 3

CELLS_NONE = 0
CELLS_UNIFORM = 1
CELLS_SPILLOVER = 2

DEFAULT_SUP_HORIZON = 1024
DEFAULT_PULLBACK = ((0.0, 0.25, 0.5, 1.0), (0.0, 0.5, 0.75, 1.0))


@dataclass(frozen=True)
class CellSchedule:
    """Partition of ``[0, 1)`` into a base cell and shrinking dyadic blocks.

    ``D_0 = [0, 1 - 2^-k0)``; block ``k >= k0`` is
    ``[1 - 2^-k, 1 - 2^-(k+1))`` cut into ``2^(k-1)`` cells of width
    ``2^-2k``.  Cells of block ``k`` carry indices ``1 + 2^(k-1) - 2^(k0-1)``
    onwards.  Block ``max_block`` also absorbs the float tail next to 1.
    """

    first_block: int = 1
    max_block: int = 52

    def __post_init__(self):
        if not 1 <= self.first_block <= self.max_block <= 52:
            raise ConfigurationError("need 1 <= first_block <= max_block <= 52")

    @property
    def base_end(self) -> float:
        return 1.0 - 2.0 ** -self.first_block

    def block_start_index(self, k: int) -> int:
        return 1 + 2 ** (k - 1) - 2 ** (self.first_block - 1)

    def cell_index(self, x: float) -> int:
        return int(kernels.spillover_cells(np.array([x]), self.first_block, self.max_block)[0])

    def block_of(self, n: int) -> int:
        """Block containing cell index ``n >= 1``."""
        if n < 1:
            raise ValueError("cell 0 is the base cell")
        k = self.first_block
        while k < self.max_block and self.block_start_index(k + 1) <= n:
            k += 1
        return k

    def cell_bounds(self, n: int) -> tuple[float, float]:
        if n == 0:
            return 0.0, self.base_end
        k = self.block_of(n)
        c = n - self.block_start_index(k)
        if c >= 2 ** (k - 1):
            raise ValueError(f"no cell {n}")
        lo = 1.0 - 2.0**-k + c * 2.0 ** (-2 * k)
        hi = lo + 2.0 ** (-2 * k)
        if k == self.max_block and c == 2 ** (k - 1) - 1:
            hi = 1.0
        return lo, hi

    def cell_width(self, n: int) -> float:
        lo, hi = self.cell_bounds(n)
        return hi - lo


@dataclass(frozen=True)
class MetricSpec:
    kind: str
    base: Optional["MetricSpec"] = None
    label_distance: float = 1.0
    m: int = 0
    schedule: Optional[CellSchedule] = None
    horizon: int = DEFAULT_SUP_HORIZON
    knots: tuple = field(default=())
    values: tuple = field(default=())

    def __post_init__(self):
        k = self.kind
        if k in ("circle", "euclidean", "discrete"):
            return
        if k == "pullback":
            xs, ys = np.asarray(self.knots, float), np.asarray(self.values, float)
            if len(xs) < 2 or len(xs) != len(ys):
                raise ConfigurationError("pullback needs matching knot/value lists")
            if xs[0] != 0.0 or xs[-1] != 1.0 or ys[0] < 0.0 or ys[-1] > 1.0:
                raise ConfigurationError("pullback map must send [0,1] into [0,1]")
            if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
                raise ConfigurationError("pullback map must be strictly increasing")
            return
        if self.base is None:
            raise ConfigurationError(f"{k} metric needs a base metric")
        if k == "dynamic_sup":
            if self.base.kind == "dynamic_sup":
                raise ConfigurationError("nested dynamic_sup is not supported")
            if self.horizon < 1:
                raise ConfigurationError("dynamic_sup horizon must be >= 1")
            return
        if self.base.kind not in ("circle", "euclidean", "pullback", "discrete"):
            if not (k == "sum_product" and self.base.kind in ("arc_partition", "spillover")):
                raise ConfigurationError(f"unsupported base {self.base.kind!r} for {k}")
        if k == "sum_product":
            if not 0.0 < self.label_distance <= 1.0:
                raise ConfigurationError("label_distance must lie in (0, 1]")
        elif k == "arc_partition":
            if self.m < 2:
                raise ConfigurationError("arc partition needs m >= 2")
        elif k == "spillover":
            if self.schedule is None:
                raise ConfigurationError("spillover metric needs a cell schedule")
        else:
            raise ConfigurationError(f"unknown metric kind {k!r}")

    @property
    def name(self) -> str:
        k = self.kind
        if k == "sum_product":
            return f"sum-{self.base.name}"
        if k == "arc_partition":
            return f"arc-partition-{self.m}"
        if k == "dynamic_sup":
            return f"dynamic-sup-{self.base.name}"
        return k

    @property
    def flat(self) -> bool:
        return self.kind != "dynamic_sup"

    def descriptor(self) -> dict:
        d = {"kind": self.kind, "name": self.name}
        if self.base is not None:
            d["base"] = self.base.descriptor()
        if self.kind == "sum_product":
            d["label_distance"] = self.label_distance
        elif self.kind == "arc_partition":
            d["m"] = self.m
        elif self.kind == "spillover":
            d["first_block"] = self.schedule.first_block
            d["max_block"] = self.schedule.max_block
        elif self.kind == "dynamic_sup":
            d["horizon"] = self.horizon
        elif self.kind == "pullback":
            d["knots"] = list(self.knots)
            d["values"] = list(self.values)
        return d


def circle_arc() -> MetricSpec:
    return MetricSpec("circle")


def euclidean() -> MetricSpec:
    return MetricSpec("euclidean")


def discrete() -> MetricSpec:
    return MetricSpec("discrete")


def pullback_monotone(knots=DEFAULT_PULLBACK[0], values=DEFAULT_PULLBACK[1]) -> MetricSpec:
    return MetricSpec("pullback", knots=tuple(map(float, knots)), values=tuple(map(float, values)))


def sum_product(base: MetricSpec, label_distance: float = 1.0) -> MetricSpec:
    return MetricSpec("sum_product", base=base, label_distance=float(label_distance))


def arc_partition(m: int, intra: Optional[MetricSpec] = None) -> MetricSpec:
    return MetricSpec("arc_partition", base=intra or euclidean(), m=int(m))


def spillover_cells(schedule: Optional[CellSchedule] = None, intra: Optional[MetricSpec] = None):
    return MetricSpec("spillover", base=intra or euclidean(), schedule=schedule or CellSchedule())


def dynamic_sup(base: MetricSpec, horizon: int = DEFAULT_SUP_HORIZON) -> MetricSpec:
    return MetricSpec("dynamic_sup", base=base, horizon=int(horizon))


def build_eigenfunction_partition(m: int) -> MetricSpec:
    """Cells are the preimages of the ``m`` arcs under ``x -> exp(2 pi i x)``."""
    if m < 2:
        raise ConfigurationError("eigenfunction partition needs m >= 2")
    return arc_partition(m, euclidean())


def build_spillover_metric(system: SystemSpec) -> MetricSpec:
    """Sensitive metric over the default schedule; refused for periodic parts."""
    tags = system.ground_truth
    if "has_periodic_part" in tags:
        raise ConfigurationError(
            f"{system.name} has a positive-measure periodic part; "
            "no compatible metric can make it sensitive"
        )
    if "ergodic" not in tags:
        raise ConfigurationError(f"{system.name} is not conservative ergodic")
    return spillover_cells(CellSchedule(), euclidean())


def metric_catalog() -> list[MetricSpec]:
    """Metrics exposed on the command line; ``discrete`` is a negative control."""
    return [
        circle_arc(),
        euclidean(),
        pullback_monotone(),
        sum_product(circle_arc(), 1.0),
        arc_partition(8, euclidean()),
        spillover_cells(),
        dynamic_sup(circle_arc()),
        discrete(),
    ]


def metric_by_name(name: str) -> MetricSpec:
    name = name.strip().lower()
    simple = {
        "circle": circle_arc,
        "circle-arc": circle_arc,
        "euclidean": euclidean,
        "discrete": discrete,
        "pullback": pullback_monotone,
        "spillover": spillover_cells,
    }
    if name in simple:
        return simple[name]()
    if name.startswith("sum-"):
        return sum_product(metric_by_name(name[4:]), 1.0)
    if name.startswith("arc-partition-"):
        return arc_partition(int(name[len("arc-partition-"):]))
    if name.startswith("dynamic-sup-"):
        return dynamic_sup(metric_by_name(name[len("dynamic-sup-"):]))
    raise KeyError(name)


# ---------------------------------------------------------------------------
# lowering


@dataclass(frozen=True)
class MetricProgram:
    base: int
    cells: int = CELLS_NONE
    m: int = 0
    first_block: int = 1
    max_block: int = 52
    label_weight: float = 0.0
    knots: np.ndarray = field(default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    slopes: np.ndarray = field(default_factory=lambda: np.zeros(0))


_BASES = {
    "circle": BASE_CIRCLE,
    "euclidean": BASE_EUCLID,
    "pullback": BASE_PULLBACK,
    "discrete": BASE_DISCRETE,
}


def lower_metric(metric: MetricSpec) -> MetricProgram:
    if not metric.flat:
        raise ConfigurationError("dynamic_sup has no flat program")
    label_weight = 0.0
    if metric.kind == "sum_product":
        label_weight = metric.label_distance
        metric = metric.base
    cells, m, k0, kmax = CELLS_NONE, 0, 1, 52
    if metric.kind == "arc_partition":
        cells, m = CELLS_UNIFORM, metric.m
        metric = metric.base
    elif metric.kind == "spillover":
        cells = CELLS_SPILLOVER
        k0, kmax = metric.schedule.first_block, metric.schedule.max_block
        metric = metric.base
    knots = values = slopes = np.zeros(0)
    if metric.kind == "pullback":
        knots = np.asarray(metric.knots, float)
        values = np.asarray(metric.values, float)
        slopes = np.diff(values) / np.diff(knots)
    return MetricProgram(
        _BASES[metric.kind], cells, m, k0, kmax, label_weight, knots, values, slopes
    )


# ---------------------------------------------------------------------------
# evaluation along orbits


def required_horizon(metric: MetricSpec, n1: int) -> int:
    """Orbit length the point expansions must support to evaluate up to ``n1``."""
    return n1 + (metric.horizon - 1 if metric.kind == "dynamic_sup" else 0)


def sliding_max(a: np.ndarray, width: int) -> np.ndarray:
    """``out[..., n] = max(a[..., n:n+width])`` in linear time (van Herk/Gil-Werman)."""
    a = np.asarray(a)
    t = a.shape[-1]
    out_len = t - width + 1
    if out_len <= 0:
        raise ValueError("window longer than input")
    if width == 1:
        return a.copy()
    nblk = -(-t // width)
    pad = nblk * width - t
    b = np.concatenate([a, np.full(a.shape[:-1] + (pad,), -np.inf)], axis=-1) if pad else a
    blocks = b.reshape(a.shape[:-1] + (nblk, width))
    prefix = np.maximum.accumulate(blocks, axis=-1).reshape(b.shape)
    suffix = np.flip(np.maximum.accumulate(np.flip(blocks, -1), axis=-1), -1).reshape(b.shape)
    idx = np.arange(out_len)
    return np.maximum(suffix[..., idx], prefix[..., idx + width - 1])


def trajectories(metric, system, P: OrbitBatch, Q: OrbitBatch, n0: int, n1: int) -> np.ndarray:
    """``d(T^n p_i, T^n q_i)`` for ``n0 <= n < n1``, shape ``(len(P), n1 - n0)``."""
    sp = system_program(system)
    if metric.flat:
        return kernels.pair_distances(P, Q, sp, lower_metric(metric), n0, n1)
    base = kernels.pair_distances(P, Q, sp, lower_metric(metric.base), n0, n1 + metric.horizon - 1)
    return sliding_max(base, metric.horizon)


def tail_extrema(metric, system, P: OrbitBatch, Q: OrbitBatch, n0: int, n1: int):
    """Per-pair min and max of the metric over ``n0 <= n < n1``."""
    sp = system_program(system)
    if metric.flat:
        return kernels.pair_extrema(P, Q, sp, lower_metric(metric), n0, n1)
    d = trajectories(metric, system, P, Q, n0, n1)
    return d.min(axis=1), d.max(axis=1)


def coverage_hits(metric, system, P, Q, n0, n1, grid, tol) -> np.ndarray:
    """Boolean ``(pairs, grid)``: some ``n`` in range has ``|d_n - r| <= tol``."""
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    sp = system_program(system)
    if metric.flat:
        return kernels.pair_coverage(P, Q, sp, lower_metric(metric), n0, n1, grid, tol)
    d = trajectories(metric, system, P, Q, n0, n1)
    return np.stack([(np.abs(d - r) <= tol).any(axis=1) for r in grid], axis=1)


def values_at_zero(metric, system, P: OrbitBatch, Q: OrbitBatch) -> np.ndarray:
    return tail_extrema(metric, system, P, Q, 0, 1)[1]


def evaluate(metric: MetricSpec, p: Point, q: Point, system: Optional[SystemSpec] = None) -> float:
    """The distance ``d(p, q)``; ``dynamic_sup`` needs the system it follows."""
    if not metric.flat:
        if system is None:
            raise ConfigurationError("dynamic_sup metric needs a system to follow orbits")
        P = lower_points(system, [p], metric.horizon)
        Q = lower_points(system, [q], metric.horizon)
        return float(values_at_zero(metric, system, P, Q)[0])
    prog = lower_metric(metric)
    return float(
        kernels.flat_distance(
            prog,
            np.array([float(p.coordinate)]),
            np.array([p.label]),
            np.array([float(q.coordinate)]),
            np.array([q.label]),
        )[0]
    )


# ---------------------------------------------------------------------------
# certification


@dataclass
class CompatibilityCertificate:
    centers: int
    radii: list
    samples: int
    min_ball_mass: float
    compatible: bool
    violation: Optional[tuple] = None  # (center point, radius)
    masses: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        d = {
            "centers": self.centers,
            "radii": list(self.radii),
            "samples": self.samples,
            "min_ball_mass": self.min_ball_mass,
            "verdict": "compatible" if self.compatible else "violation",
        }
        if self.violation is not None:
            p, r = self.violation
            d["violation"] = {"center": float(p.coordinate), "label": p.label, "radius": r}
        return d


def check_mu_compatible(
    metric: MetricSpec,
    system: SystemSpec,
    centers: int,
    radii: Sequence[float],
    samples: int,
    rng: RngStream,
) -> CompatibilityCertificate:
    """Estimate the mass of open balls around sampled centers by hit fractions.

    Any ball with zero hits among ``samples`` draws is a violation.
    """
    if samples < 1000:
        raise ConfigurationError("need at least 1000 samples per ball")
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii):
        raise ConfigurationError("radii must be positive")
    gen = rng.generator()
    h = required_horizon(metric, 1)
    C = sample_batch(system, gen, centers, h)
    S = sample_batch(system, gen, samples, h)
    masses = np.empty((centers, len(radii)))
    for c in range(centers):
        d = values_at_zero(metric, system, C.repeat(c, samples), S)
        for j, r in enumerate(radii):
            masses[c, j] = np.count_nonzero(d < r) / samples
    violation = None
    bad = np.argwhere(masses == 0)
    if len(bad):
        c, j = bad[0]
        violation = (C.point(int(c), system), radii[j])
    return CompatibilityCertificate(
        centers, radii, samples, float(masses.min()), violation is None, violation, masses
    )


@dataclass
class IsometryVerdict:
    isometry: bool
    pairs: int
    max_defect: float
    violation: Optional[tuple] = None  # (p, q, n)

    def to_dict(self) -> dict:
        d = {"verdict": "isometry" if self.isometry else "violation",
             "pairs": self.pairs, "max_defect": self.max_defect}
        if self.violation is not None:
            p, q, n = self.violation
            d["violation"] = {"p": float(p.coordinate), "q": float(q.coordinate), "n": n}
        return d


def isometry_defects(metric, system, P: OrbitBatch, Q: OrbitBatch) -> np.ndarray:
    d = trajectories(metric, system, P, Q, 0, 2)
    return np.abs(d[:, 1] - d[:, 0])


def check_isometry(metric, system, pairs: int, tol: float, rng: RngStream) -> IsometryVerdict:
    """Compare ``d(Tp, Tq)`` with ``d(p, q)`` on sampled pairs."""
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    gen = rng.generator()
    h = required_horizon(metric, 2)
    P = sample_batch(system, gen, pairs, h)
    Q = sample_batch(system, gen, pairs, h)
    defect = isometry_defects(metric, system, P, Q)
    bad = np.flatnonzero(defect > tol)
    violation = None
    if len(bad):
        i = int(bad[0])
        violation = (P.point(i, system), Q.point(i, system), 1)
    return IsometryVerdict(violation is None, pairs, float(defect.max(initial=0.0)), violation)


def metric_diameter(metric: MetricSpec) -> float:
    """Supremum of the metric over the state space (used to bound coverage grids)."""
    k = metric.kind
    if k == "circle":
        return 0.5
    if k == "pullback":
        return metric.values[-1] - metric.values[0]
    if k == "dynamic_sup":
        return metric_diameter(metric.base)
    return 1.0


def cell_diameter(metric: MetricSpec, n: int) -> float:
    """Intra-cell diameter of spillover cell ``n`` under a Euclidean intra metric."""
    if metric.kind != "spillover":
        raise ConfigurationError("cell diameters are defined for spillover metrics")
    w = metric.schedule.cell_width(n)
    if metric.base.kind == "circle":
        return min(w, 0.5)
    return w if metric.base.kind == "euclidean" else math.nan
