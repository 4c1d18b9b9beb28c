"""Weak-mixing detection by Cesàro decay of interval correlations.

For a finite measure-preserving system, weak mixing is equivalent to

    (1/N) sum_{n<N} |mu(T^-n A ∩ B) - mu(A) mu(B)|  ->  0

for all measurable ``A, B``.  The score takes the maximum of this average
over a dyadic interval partition (refined by the finite label on product
systems).  Exact oracles for the doubling map and for rotations are
provided for checking the Monte Carlo estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import kernels
from .systems import (
    ConfigurationError,
    RngStream,
    SystemSpec,
    derive_seed,
    sample_batch,
    system_program,
)


@dataclass
class CorrelationReport:
    k: int
    horizon: int
    samples: int
    cells: int
    score: float
    matrix: np.ndarray
    estimates: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        return {"k": self.k, "horizon": self.horizon, "samples": self.samples,
                "cells": self.cells, "score": self.score}


def _check_k(k: int) -> None:
    if k < 1 or k & (k - 1):
        raise ConfigurationError(f"partition size {k} is not a power of 2")


def cell_of(x: np.ndarray, lab: np.ndarray, k: int) -> np.ndarray:
    c = np.minimum(np.floor(x * k).astype(np.int64), k - 1)
    return lab * k + c


def weak_mixing_score(system: SystemSpec, k: int, horizon: int, samples: int,
                      rng: RngStream, keep_estimates: bool = False) -> CorrelationReport:
    """Monte Carlo correlation score.

    For each ``n`` a fresh batch of ``samples`` points is drawn from its own
    substream; ``x`` in cell ``j`` and ``T^n x`` in cell ``i`` are counted.
    """
    _check_k(k)
    if samples < 10_000:
        raise ConfigurationError("need at least 10^4 samples per lag")
    cells = k * system.component_count
    sp = system_program(system)
    seed = derive_seed(rng.seed, rng.stream_index, "correlation")
    total = np.zeros((cells, cells))
    est = np.empty((horizon, cells, cells)) if keep_estimates else None
    for n in range(horizon):
        batch = sample_batch(system, RngStream(seed, n).generator(), samples, n + 1)
        x0, l0 = kernels.coords(batch, sp, 0, 1)
        xn, ln = kernels.coords(batch, sp, n, n + 1)
        cj = cell_of(x0[:, 0], l0[:, 0], k)
        ci = cell_of(xn[:, 0], ln[:, 0], k)
        joint = np.bincount(ci * cells + cj, minlength=cells * cells).reshape(cells, cells)
        joint = joint / samples
        mu_i = np.bincount(ci, minlength=cells) / samples
        mu_j = np.bincount(cj, minlength=cells) / samples
        total += np.abs(joint - np.outer(mu_i, mu_j))
        if est is not None:
            est[n] = joint
    matrix = total / horizon
    return CorrelationReport(k, horizon, samples, cells, float(matrix.max()), matrix, est)


def classify_weak_mixing(report: CorrelationReport, threshold: float) -> bool:
    if threshold <= 0:
        raise ConfigurationError("threshold must be positive")
    return report.score < threshold


# ---------------------------------------------------------------------------
# exact oracles


def _frac_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _doubling_mass_below(t: Fraction, n: int, c: Fraction, d: Fraction) -> Fraction:
    """Lebesgue measure of ``{x in [0, t): frac(2^n x) in [c, d)}``."""
    u = t * 2**n
    whole = _frac_floor(u)
    part = u - whole
    return (whole * (d - c) + min(max(part, c), d) - c) / 2**n


def doubling_correlations(k: int, n: int) -> list[list[Fraction]]:
    """``p[i][j] = mu(I_j ∩ T^-n I_i)`` for the doubling map, exactly."""
    _check_k(k)
    w = Fraction(1, k)
    out = []
    for i in range(k):
        c, d = i * w, (i + 1) * w
        out.append([_doubling_mass_below((j + 1) * w, n, c, d)
                    - _doubling_mass_below(j * w, n, c, d) for j in range(k)])
    return out


def _circle_overlap(a: Fraction, b: Fraction, w: Fraction) -> Fraction:
    total = Fraction(0)
    for m in (-1, 0, 1):
        lo = max(a, b + m)
        hi = min(a + w, b + w + m)
        if hi > lo:
            total += hi - lo
    return total


def rotation_correlations(alpha: float, k: int, n: int) -> list[list[Fraction]]:
    """``p[i][j] = mu(I_j ∩ (I_i - n alpha))`` by exact interval overlap."""
    _check_k(k)
    w = Fraction(1, k)
    t = Fraction(alpha) * n
    t -= _frac_floor(t)
    out = []
    for i in range(k):
        b = i * w - t
        b -= _frac_floor(b)
        out.append([_circle_overlap(j * w, b, w) for j in range(k)])
    return out


def exact_correlations(system: SystemSpec, k: int, n: int) -> np.ndarray:
    """Exact joint cell masses ``p[i, j] = mu(T^-n C_i ∩ C_j)`` as floats."""
    core = system.core
    if core.kind == "doubling":
        base = doubling_correlations(k, n)
    elif core.kind == "rotation":
        base = rotation_correlations(core.alpha, k, n)
    elif core.kind == "identity":
        base = [[Fraction(int(i == j), k) for j in range(k)] for i in range(k)]
    else:
        raise ConfigurationError(f"no exact oracle for {core.kind}")
    base = np.array([[float(v) for v in row] for row in base])
    r = system.component_count
    if r == 1:
        return base
    out = np.zeros((r * k, r * k))
    for lj in range(r):
        li = (lj + n) % r
        out[li * k:(li + 1) * k, lj * k:(lj + 1) * k] = base / r
    return out


def exact_score(system: SystemSpec, k: int, horizon: int) -> float:
    """The correlation score with exact masses in place of estimates."""
    cells = k * system.component_count
    mu = 1.0 / cells
    total = np.zeros((cells, cells))
    for n in range(horizon):
        total += np.abs(exact_correlations(system, k, n) - mu * mu)
    return float((total / horizon).max())


def oracle_zscores(report: CorrelationReport, system: SystemSpec) -> np.ndarray:
    """``(p_hat - p) / se`` per ``(n, i, j)``; zero where both vanish."""
    if report.estimates is None:
        raise ValueError("report was computed without keep_estimates")
    z = np.zeros_like(report.estimates)
    for n in range(report.horizon):
        p = exact_correlations(system, report.k, n)
        se = np.sqrt(p * (1.0 - p) / report.samples)
        diff = report.estimates[n] - p
        with np.errstate(divide="ignore", invalid="ignore"):
            z[n] = np.where(se > 0, diff / np.where(se > 0, se, 1.0),
                            np.where(diff == 0, 0.0, math.inf))
    return z
