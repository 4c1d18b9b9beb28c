"""State space, transformation catalog and measure-distributed sampling.

Every catalog system lives on ``[0, 1) x {0, ..., k-1}`` with Lebesgue
measure times counting measure as its invariant probability.  Points carry
either a float coordinate or an exact :class:`fractions.Fraction`; the
doubling map and the expanding half of the periodic hybrid act exactly on
fractions, which gives the exact-rational orbit mode used by the oracles.

For bulk work the orbit engine never touches :class:`Point` objects.  It
uses :class:`OrbitBatch`, a struct-of-arrays in which every expanding point
keeps its binary expansion packed into 64-bit words, so ``T^n`` for the
doubling map is a bit shift and orbits stay exact far beyond the 53 bits
of a double.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

Real = Union[float, Fraction]

GOLDEN_ALPHA = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_PRECISION = 1024

MODE_ROTATION = 0
MODE_FIXED = 1
MODE_DYADIC = 2

TAGS = (
    "measure_preserving",
    "ergodic",
    "weakly_mixing",
    "product_ergodic",
    "isometry_admitting",
    "aperiodic",
    "has_periodic_part",
)

_BASE_TAGS = {
    "rotation": frozenset(
        {"measure_preserving", "ergodic", "isometry_admitting", "aperiodic"}
    ),
    "doubling": frozenset(
        {"measure_preserving", "ergodic", "weakly_mixing", "product_ergodic", "aperiodic"}
    ),
    "hybrid": frozenset({"measure_preserving", "has_periodic_part"}),
    "identity": frozenset({"measure_preserving", "has_periodic_part", "isometry_admitting"}),
}

_PRODUCT_TAGS = {
    # T x R_k with R_k the cyclic rotation on k points
    "rotation": frozenset({"measure_preserving", "ergodic", "isometry_admitting", "aperiodic"}),
    "doubling": frozenset({"measure_preserving", "ergodic", "aperiodic"}),
    "hybrid": frozenset({"measure_preserving", "has_periodic_part"}),
    "identity": frozenset({"measure_preserving", "has_periodic_part", "isometry_admitting"}),
}


class DomainError(ValueError):
    """A point does not belong to the state space of a system."""


class ConfigurationError(ValueError):
    """Invalid parameters for a system, metric or analysis."""


@dataclass(frozen=True)
class Point:
    coordinate: Real
    label: int = 0

    def __post_init__(self):
        if not 0 <= self.coordinate < 1:
            raise DomainError(f"coordinate {self.coordinate!r} outside [0, 1)")
        if self.label < 0:
            raise DomainError(f"negative label {self.label}")

    def __float__(self):
        return float(self.coordinate)


@dataclass(frozen=True)
class SystemSpec:
    """A catalog transformation.

    Build instances with the factory functions (:func:`irrational_rotation`,
    :func:`doubling_map`, :func:`product_with_finite_rotation`,
    :func:`periodic_hybrid`) rather than directly.
    """

    kind: str
    alpha: float = 0.0
    periodic_fraction: float = 0.0
    base: Optional["SystemSpec"] = None
    components: int = 1
    test_only: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.kind == "rotation":
            if not 0.0 < self.alpha < 1.0:
                raise ConfigurationError("rotation angle must lie in (0, 1)")
            if Fraction(self.alpha).denominator < 2**20:
                # a float is always rational; reject short periods outright
                raise ConfigurationError("rotation angle has a short rational period")
        elif self.kind == "hybrid":
            if not 0.0 < self.periodic_fraction < 1.0:
                raise ConfigurationError("periodic_fraction must lie in (0, 1)")
        elif self.kind == "product":
            if self.base is None or self.base.kind == "product":
                raise ConfigurationError("product needs a non-product base system")
            if self.components < 2:
                raise ConfigurationError("finite rotation needs k >= 2 points")
        elif self.kind not in ("doubling", "identity"):
            raise ConfigurationError(f"unknown system kind {self.kind!r}")

    @property
    def component_count(self) -> int:
        return self.components if self.kind == "product" else 1

    @property
    def core(self) -> "SystemSpec":
        """The interval factor (the base of a product, else self)."""
        return self.base if self.kind == "product" else self

    @property
    def ground_truth(self) -> frozenset:
        if self.kind == "product":
            return _PRODUCT_TAGS[self.base.kind]
        return _BASE_TAGS[self.kind]

    @property
    def name(self) -> str:
        if self.kind == "rotation":
            return "rotation" if self.alpha == GOLDEN_ALPHA else f"rotation-{self.alpha!r}"
        if self.kind == "hybrid":
            return f"hybrid-{self.periodic_fraction!r}"
        if self.kind == "product":
            return f"product-{self.base.name}-{self.components}"
        return self.kind

    def descriptor(self) -> dict:
        d = {"kind": self.kind, "name": self.name, "tags": sorted(self.ground_truth)}
        if self.kind == "rotation":
            d["alpha"] = self.alpha
        elif self.kind == "hybrid":
            d["periodic_fraction"] = self.periodic_fraction
        elif self.kind == "product":
            d["base"] = self.base.descriptor()
            d["k"] = self.components
        return d


def irrational_rotation(alpha: float = GOLDEN_ALPHA) -> SystemSpec:
    return SystemSpec("rotation", alpha=float(alpha))


def doubling_map() -> SystemSpec:
    return SystemSpec("doubling")


def product_with_finite_rotation(base: SystemSpec, k: int = 2) -> SystemSpec:
    return SystemSpec("product", base=base, components=int(k))


def periodic_hybrid(periodic_fraction: float = 0.5) -> SystemSpec:
    """Identity on ``[0, f)``, doubling rescaled onto ``[f, 1)``."""
    return SystemSpec("hybrid", periodic_fraction=float(periodic_fraction))


def identity_map() -> SystemSpec:
    """Degenerate ``f -> 1`` limit of the hybrid; used by tests only."""
    return SystemSpec("identity", test_only=True)


def catalog() -> list[SystemSpec]:
    """Systems exposed on the command line, in listing order."""
    return [
        irrational_rotation(),
        doubling_map(),
        product_with_finite_rotation(doubling_map(), 2),
        product_with_finite_rotation(irrational_rotation(), 2),
        periodic_hybrid(0.5),
    ]


def system_by_name(name: str) -> SystemSpec:
    """Parse a catalog name such as ``doubling`` or ``product-doubling-3``."""
    name = name.strip().lower()
    if name in ("rotation", "irrational-rotation"):
        return irrational_rotation()
    if name in ("doubling", "doubling-map"):
        return doubling_map()
    if name.startswith("rotation-"):
        return irrational_rotation(float(name[len("rotation-"):]))
    if name.startswith("hybrid-"):
        return periodic_hybrid(float(name[len("hybrid-"):]))
    if name.startswith("product-"):
        base, _, k = name[len("product-"):].rpartition("-")
        if not base or not k.isdigit():
            raise KeyError(name)
        return product_with_finite_rotation(system_by_name(base), int(k))
    if name == "identity":
        return identity_map()
    raise KeyError(name)


# ---------------------------------------------------------------------------
# exact and float iteration of single points


def _check_point(system: SystemSpec, p: Point) -> None:
    if p.label >= system.component_count:
        raise DomainError(
            f"label {p.label} out of range for {system.component_count} component(s)"
        )


def _frac_mul_pow2(x: Fraction, n: int) -> Fraction:
    return Fraction((x.numerator << n) % x.denominator, x.denominator)


def _rotation_shift(alpha: float, n: int) -> float:
    t = n * alpha
    return t - math.floor(t)


def _iterate_core(system: SystemSpec, x: Real, n: int) -> Real:
    kind = system.kind
    if kind == "identity" or n == 0:
        return x
    if kind == "rotation":
        y = float(x) + _rotation_shift(system.alpha, n)
        return y - 1.0 if y >= 1.0 else y
    if kind == "doubling":
        if isinstance(x, Fraction):
            return _frac_mul_pow2(x, n)
        # doubling a double is exact, so the float orbit is the true orbit
        return float(_frac_mul_pow2(Fraction(x), n))
    if kind == "hybrid":
        f = Fraction(system.periodic_fraction)
        xf = Fraction(x)
        if xf < f:
            return x
        s = _frac_mul_pow2((xf - f) / (1 - f), n)
        y = f + (1 - f) * s
        return y if isinstance(x, Fraction) else float(y)
    raise ConfigurationError(f"cannot iterate {kind!r}")


def iterate(system: SystemSpec, p: Point, n: int) -> Point:
    """Return ``T^n(p)``.

    Fraction coordinates are iterated exactly wherever the map is
    rational (doubling, hybrid); rotations always produce floats.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    _check_point(system, p)
    x = _iterate_core(system.core, p.coordinate, n)
    label = (p.label + n) % system.components if system.kind == "product" else p.label
    return Point(x, label)


def exact_orbit(system: SystemSpec, p: Point, length: int) -> list[Point]:
    """``[p, T p, ..., T^{length-1} p]`` computed step by step."""
    out = [p]
    for _ in range(length - 1):
        out.append(iterate(system, out[-1], 1))
    return out


# ---------------------------------------------------------------------------
# random streams


_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Counter-based substream: Philox keyed by ``(seed, stream_index)``."""

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_index & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, *labels: Union[int, str]) -> int:
    """Deterministic 64-bit child seed for a named purpose."""
    key = [zlib.crc32(x.encode()) if isinstance(x, str) else int(x) & 0xFFFFFFFF for x in labels]
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# batched orbit representation


def words_for_horizon(horizon: int) -> int:
    """Words of binary expansion needed to read 64-bit windows up to ``horizon - 1``."""
    return (max(int(horizon), 1) >> 6) + 2


@dataclass(frozen=True)
class SystemProgram:
    alpha: float
    offset: float
    scale: float
    ncomp: int


def system_program(system: SystemSpec) -> SystemProgram:
    core = system.core
    alpha = core.alpha if core.kind == "rotation" else 0.0
    if core.kind == "hybrid":
        f = core.periodic_fraction
        offset, scale = f, 1.0 - f
    else:
        offset, scale = 0.0, 1.0
    return SystemProgram(alpha, offset, scale, system.component_count)


@dataclass
class OrbitBatch:
    """Struct-of-arrays view of ``len(mode)`` points ready for the kernels.

    ``mode`` selects how the interval coordinate evolves: rotation from
    ``x0``, fixed at ``x0``, or the dyadic shift of ``words`` mapped through
    ``offset + scale * s``.
    """

    mode: np.ndarray
    x0: np.ndarray
    label0: np.ndarray
    words: np.ndarray

    def __post_init__(self):
        self.mode = np.ascontiguousarray(self.mode, dtype=np.int8)
        self.x0 = np.ascontiguousarray(self.x0, dtype=np.float64)
        self.label0 = np.ascontiguousarray(self.label0, dtype=np.int64)
        self.words = np.ascontiguousarray(self.words, dtype=np.uint64)
        if self.words.ndim != 2 or self.words.shape[0] != len(self.mode):
            raise ValueError("words must have one row per point")

    def __len__(self):
        return len(self.mode)

    @property
    def horizon(self) -> int:
        """Largest ``n`` (exclusive) for which windows stay inside ``words``."""
        w = self.words.shape[1]
        return (w - 1) * 64 if w >= 2 else 0

    def take(self, idx) -> "OrbitBatch":
        idx = np.asarray(idx)
        return OrbitBatch(self.mode[idx], self.x0[idx], self.label0[idx], self.words[idx])

    def repeat(self, i: int, count: int) -> "OrbitBatch":
        return self.take(np.full(count, i, dtype=np.intp))

    @staticmethod
    def concat(batches: Sequence["OrbitBatch"]) -> "OrbitBatch":
        width = max(b.words.shape[1] for b in batches)
        words = [np.pad(b.words, ((0, 0), (0, width - b.words.shape[1]))) for b in batches]
        return OrbitBatch(
            np.concatenate([b.mode for b in batches]),
            np.concatenate([b.x0 for b in batches]),
            np.concatenate([b.label0 for b in batches]),
            np.concatenate(words) if words else np.zeros((0, width), np.uint64),
        )

    def point(self, i: int, system: SystemSpec) -> Point:
        """Materialize point ``i`` with its exact coordinate."""
        mode = int(self.mode[i])
        label = int(self.label0[i])
        if mode != MODE_DYADIC:
            return Point(float(self.x0[i]), label)
        row = self.words[i]
        num = int.from_bytes(row.astype(">u8").tobytes(), "big")
        s = Fraction(num, 1 << (64 * len(row)))
        core = system.core
        if core.kind == "hybrid":
            f = Fraction(core.periodic_fraction)
            return Point(f + (1 - f) * s, label)
        return Point(s, label)

    def points(self, system: SystemSpec) -> list[Point]:
        return [self.point(i, system) for i in range(len(self))]


def _expansion_words(s: Fraction, width: int) -> np.ndarray:
    num = (s.numerator << (64 * width)) // s.denominator
    return np.frombuffer(num.to_bytes(8 * width, "big"), dtype=">u8").astype(np.uint64)


def lower_points(system: SystemSpec, points: Iterable[Point], horizon: int) -> OrbitBatch:
    """Convert points into an :class:`OrbitBatch` valid for ``n < horizon``.

    Expansions of non-dyadic rationals are truncated; every window read
    below ``horizon`` still holds exact binary digits of the true orbit.
    """
    points = list(points)
    core = system.core
    width = words_for_horizon(horizon) if core.kind in ("doubling", "hybrid") else 0
    m = len(points)
    mode = np.zeros(m, np.int8)
    x0 = np.zeros(m)
    label0 = np.zeros(m, np.int64)
    words = np.zeros((m, width), np.uint64)
    f = Fraction(core.periodic_fraction) if core.kind == "hybrid" else None
    for i, p in enumerate(points):
        _check_point(system, p)
        label0[i] = p.label
        if core.kind == "rotation":
            mode[i], x0[i] = MODE_ROTATION, float(p.coordinate)
        elif core.kind == "identity":
            mode[i], x0[i] = MODE_FIXED, float(p.coordinate)
        elif core.kind == "doubling":
            mode[i] = MODE_DYADIC
            words[i] = _expansion_words(Fraction(p.coordinate), width)
        else:
            c = Fraction(p.coordinate)
            if c < f:
                mode[i], x0[i] = MODE_FIXED, float(p.coordinate)
            else:
                mode[i] = MODE_DYADIC
                words[i] = _expansion_words((c - f) / (1 - f), width)
    return OrbitBatch(mode, x0, label0, words)


def sample_batch(
    system: SystemSpec, gen: np.random.Generator, count: int, horizon: int = DEFAULT_PRECISION
) -> OrbitBatch:
    """Draw ``count`` i.i.d. points from the invariant measure.

    The draw order is fixed per system kind so that a stream always maps
    to the same points.
    """
    core = system.core
    width = words_for_horizon(horizon) if core.kind in ("doubling", "hybrid") else 0
    mode = np.zeros(count, np.int8)
    x0 = np.zeros(count)
    words = np.zeros((count, width), np.uint64)
    if core.kind == "rotation":
        x0 = gen.random(count)
    elif core.kind == "identity":
        mode[:] = MODE_FIXED
        x0 = gen.random(count)
    elif core.kind == "doubling":
        mode[:] = MODE_DYADIC
        words = gen.integers(0, 2**64, size=(count, width), dtype=np.uint64)
    else:
        f = core.periodic_fraction
        u = gen.random(count)
        v = gen.random(count)
        words = gen.integers(0, 2**64, size=(count, width), dtype=np.uint64)
        fixed = u < f
        mode = np.where(fixed, MODE_FIXED, MODE_DYADIC).astype(np.int8)
        x0 = np.where(fixed, f * v, 0.0)
    if system.kind == "product":
        label0 = gen.integers(0, system.components, size=count, dtype=np.int64)
    else:
        label0 = np.zeros(count, np.int64)
    return OrbitBatch(mode, x0, label0, words)


def sample_point(
    system: SystemSpec, rng: RngStream, precision: int = DEFAULT_PRECISION
) -> Point:
    """One µ-distributed point; expanding systems get ``precision`` exact bits."""
    return sample_batch(system, rng.generator(), 1, precision).point(0, system)
