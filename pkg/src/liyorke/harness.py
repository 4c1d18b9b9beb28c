"""Runnable checks, one per theorem, with deterministic evidence.

The ground-truth tags of each system decide what a check expects; the
estimators decide what is observed.  A check passes when the observed
statistics match the expectation at the thresholds it records.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import metrics as M
from . import spectral
from .analysis import (
    AnalysisConfig,
    distance_coverage,
    greedy_scrambled_set,
    li_yorke_density,
    sample_pair_stats,
    sensitivity_profile,
)
from .systems import (
    RngStream,
    derive_seed,
    doubling_map,
    irrational_rotation,
    periodic_hybrid,
    product_with_finite_rotation,
    sample_point,
)


@dataclass(frozen=True)
class Scale:
    name: str
    horizon: int
    pairs: int
    long_horizon: int
    coverage_pairs: int
    profile_points: int
    profile_partners: int
    corr_samples: int
    compat_samples: int
    hybrid_pairs: int
    iso_pairs: int
    greedy_budget: int
    rotation_budget: int
    density_min: float
    coverage_min: float
    spill_min: float
    product_band: tuple
    wm_k: int = 2
    wm_horizon: int = 64
    wm_threshold: float = 0.03


SCALES = {
    "quick": Scale("quick", horizon=1000, pairs=1000, long_horizon=1000, coverage_pairs=100,
                   profile_points=10, profile_partners=200, corr_samples=20_000,
                   compat_samples=10_000, hybrid_pairs=500, iso_pairs=500,
                   greedy_budget=5000, rotation_budget=200, density_min=0.98,
                   coverage_min=0.9, spill_min=0.97, product_band=(0.44, 0.56)),
    "full": Scale("full", horizon=10_000, pairs=10_000, long_horizon=100_000,
                  coverage_pairs=200, profile_points=10, profile_partners=1000,
                  corr_samples=100_000, compat_samples=10_000, hybrid_pairs=1000,
                  iso_pairs=1000, greedy_budget=5000, rotation_budget=1000,
                  density_min=0.99, coverage_min=0.95, spill_min=0.99,
                  product_band=(0.46, 0.54)),
}

EPS = 0.01
DELTA = 0.1
COMPAT_RADII = (0.01, 0.1)


@dataclass
class TheoremCheck:
    id: str
    title: str
    claim: str
    systems: list
    metrics: list
    expected: str = "PASS"
    observed: str = "FAIL"
    thresholds: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.observed == self.expected

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "claim": self.claim,
            "systems": self.systems,
            "metrics": self.metrics,
            "expected": self.expected,
            "observed": self.observed,
            "thresholds": self.thresholds,
            "evidence": self.evidence,
        }


def _py(x):
    """Plain Python scalars/containers for JSON evidence."""
    if isinstance(x, dict):
        return {str(k): _py(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_py(v) for v in x]
    if isinstance(x, np.ndarray):
        return _py(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


class _Ctx:
    def __init__(self, seed: int, scale: Scale, threads: int, override: Optional[M.MetricSpec]):
        self.seed = seed
        self.scale = scale
        self.threads = threads
        self.override = override

    def metric(self, default: M.MetricSpec) -> M.MetricSpec:
        return self.override if self.override is not None else default

    def config(self, check_id: str, *, horizon=None, pairs=None) -> AnalysisConfig:
        return AnalysisConfig(horizon=horizon or self.scale.horizon,
                              pairs=pairs or self.scale.pairs, eps=EPS, delta=DELTA,
                              seed=derive_seed(self.seed, check_id))

    def compat(self, check_id, metric, system, samples=None, centers=16):
        cert = M.check_mu_compatible(metric, system, centers, COMPAT_RADII,
                                     samples or self.scale.compat_samples,
                                     RngStream(derive_seed(self.seed, check_id, "compat"), 0))
        return cert


def _finish(check: TheoremCheck, ok: bool, evidence: dict) -> TheoremCheck:
    check.observed = "PASS" if ok else "FAIL"
    check.evidence = _py(evidence)
    return check


# ---------------------------------------------------------------------------
# the checks


def tc1_product_ergodic(ctx: _Ctx) -> TheoremCheck:
    s = ctx.scale
    system = doubling_map()
    metric = ctx.metric(M.circle_arc())
    chk = TheoremCheck(
        "TC1", "ergodic product implies Li-Yorke",
        "T x T ergodic: a.e. pair is Li-Yorke and orbit distances approach every attained value",
        [system.name], [metric.name],
        thresholds={"eps": EPS, "delta": DELTA, "density_min": s.density_min,
                    "coverage_min": s.coverage_min, "grid_step": 0.05, "tol": 0.01})
    cert = ctx.compat("TC1", metric, system)
    dens = li_yorke_density(system, metric, ctx.config("TC1"), ctx.threads)
    cov_cfg = ctx.config("TC1-coverage", horizon=s.long_horizon, pairs=s.coverage_pairs)
    cov = distance_coverage(system, metric, cov_cfg, 0.05, 0.01, threads=ctx.threads)
    expect = "product_ergodic" in system.ground_truth
    ok = (cert.compatible and expect and dens.value >= s.density_min
          and cov.mean >= s.coverage_min)
    return _finish(chk, ok, {
        "compatibility": cert.to_dict(),
        "density": dens.to_dict(),
        "coverage": cov.to_dict(),
        "density_config": ctx.config("TC1").to_dict(),
        "coverage_config": cov_cfg.to_dict(),
    })


def tc2_weak_mixing_equivalence(ctx: _Ctx) -> TheoremCheck:
    s = ctx.scale
    cases = [
        (doubling_map(), M.circle_arc()),
        (irrational_rotation(), M.circle_arc()),
        (product_with_finite_rotation(doubling_map(), 2), M.sum_product(M.circle_arc(), 1.0)),
    ]
    cases = [(sys_, ctx.metric(m)) for sys_, m in cases]
    chk = TheoremCheck(
        "TC2", "Li-Yorke M-sensitive iff weakly mixing",
        "for finite measure-preserving ergodic systems, density of Li-Yorke pairs is full "
        "exactly when the correlation score decays",
        [c[0].name for c in cases], [c[1].name for c in cases],
        thresholds={"eps": EPS, "delta": DELTA, "density_min": s.density_min,
                    "wm_k": s.wm_k, "wm_horizon": s.wm_horizon,
                    "wm_threshold": s.wm_threshold, "wm_samples": s.corr_samples})
    rows = []
    ok = True
    for i, (system, metric) in enumerate(cases):
        cid = f"TC2-{i}"
        cert = ctx.compat(cid, metric, system)
        dens = li_yorke_density(system, metric, ctx.config(cid), ctx.threads)
        rep = spectral.weak_mixing_score(system, s.wm_k, s.wm_horizon, s.corr_samples,
                                         RngStream(derive_seed(ctx.seed, cid, "wm"), 0))
        wm_obs = spectral.classify_weak_mixing(rep, s.wm_threshold)
        wm_true = "weakly_mixing" in system.ground_truth
        if wm_true:
            ly_obs = dens.value >= s.density_min
        else:
            ly_obs = not (dens.value + dens.half_width < s.density_min)
        row_ok = cert.compatible and ly_obs == wm_true and wm_obs == wm_true
        ok = ok and row_ok
        rows.append({"system": system.name, "metric": metric.name,
                     "weakly_mixing_tag": wm_true, "density": dens.to_dict(),
                     "li_yorke_observed": ly_obs, "wm_score": rep.score,
                     "weakly_mixing_observed": wm_obs,
                     "compatibility": cert.to_dict()["verdict"], "pass": row_ok})
    return _finish(chk, ok, {"cases": rows})


def tc3_eigenfunction_obstruction(ctx: _Ctx) -> TheoremCheck:
    m = 8
    system = irrational_rotation()
    metric = ctx.metric(M.build_eigenfunction_partition(m))
    chk = TheoremCheck(
        "TC3", "eigenfunction obstruction",
        f"arc-partition metric: pairs at arc distance >= 1/{m} stay at distance 1 forever, "
        "so none is proximal",
        [system.name], [metric.name], thresholds={"m": m, "eps": EPS, "exact": True})
    cfg = ctx.config("TC3", pairs=1000)
    cert = ctx.compat("TC3", metric, system)
    sample = sample_pair_stats(system, metric, cfg, initial_metrics=[M.circle_arc()],
                               threads=ctx.threads)
    far = sample.initial["circle"] >= 1.0 / m
    proximal = sample.tail_min[far] <= EPS
    not_one = np.count_nonzero(sample.tail_min[far] != 1.0)
    ok = cert.compatible and far.any() and not proximal.any() and not_one == 0
    return _finish(chk, ok, {
        "compatibility": cert.to_dict(), "config": cfg.to_dict(),
        "far_pairs": int(far.sum()), "proximal_far_pairs": int(proximal.sum()),
        "far_pairs_with_distance_below_1": int(not_one),
    })


def tc4_separation_of_notions(ctx: _Ctx) -> TheoremCheck:
    s = ctx.scale
    system = product_with_finite_rotation(doubling_map(), 2)
    metric = ctx.metric(M.sum_product(M.circle_arc(), 1.0))
    lo, hi = s.product_band
    chk = TheoremCheck(
        "TC4", "W-measurably sensitive but not Li-Yorke M-sensitive",
        "doubling x two-point rotation with the sum metric: every x separates from a.e. y, "
        "yet cross-label pairs are never proximal",
        [system.name], [metric.name],
        thresholds={"eps": EPS, "delta": DELTA, "profile_min": s.density_min,
                    "density_band": [lo, hi], "profile_points": s.profile_points,
                    "profile_partners": s.profile_partners})
    cert = ctx.compat("TC4", metric, system)
    prof_cfg = ctx.config("TC4-profile", pairs=s.profile_partners)
    xseed = derive_seed(ctx.seed, "TC4", "x")
    profiles = []
    for i in range(s.profile_points):
        x = sample_point(system, RngStream(xseed, i), precision=prof_cfg.horizon)
        profiles.append(sensitivity_profile(system, metric, x, prof_cfg, ctx.threads))
    dens = li_yorke_density(system, metric, ctx.config("TC4"), ctx.threads)
    expect = ("weakly_mixing" not in system.ground_truth
              and "aperiodic" in system.ground_truth)
    ok = (cert.compatible and expect and min(profiles) >= s.density_min
          and lo <= dens.value <= hi)
    return _finish(chk, ok, {
        "compatibility": cert.to_dict(), "profiles": profiles,
        "min_profile": min(profiles), "density": dens.to_dict(),
    })


def tc5_spillover(ctx: _Ctx) -> TheoremCheck:
    s = ctx.scale
    system = irrational_rotation()
    metric = ctx.metric(M.build_spillover_metric(system))
    chk = TheoremCheck(
        "TC5", "spillover yields a sensitive compatible metric",
        "cells of shrinking diameter force every distinct rotation pair apart infinitely often",
        [system.name], [metric.name],
        thresholds={"reach": 1.0, "fraction_min": s.spill_min, "horizon": s.long_horizon})
    cert = ctx.compat("TC5", metric, system, samples=100_000, centers=8)
    cfg = ctx.config("TC5", horizon=s.long_horizon, pairs=1000)
    sample = sample_pair_stats(system, metric, cfg, initial_metrics=[M.euclidean()],
                               threads=ctx.threads)
    distinct = sample.initial["euclidean"] > 0
    reached = sample.tail_max[distinct] == 1.0
    frac = float(reached.mean()) if distinct.any() else 0.0
    ok = cert.compatible and frac >= s.spill_min
    return _finish(chk, ok, {
        "compatibility": cert.to_dict(), "config": cfg.to_dict(),
        "distinct_pairs": int(distinct.sum()), "reached_one": int(reached.sum()),
        "fraction": frac,
    })


def tc6_periodic_obstruction(ctx: _Ctx) -> TheoremCheck:
    s = ctx.scale
    system = periodic_hybrid(0.5)
    f = system.periodic_fraction
    if ctx.override is not None:
        metrics = [ctx.override]
    else:
        metrics = [m for m in M.metric_catalog() if m.kind != "discrete"]
    chk = TheoremCheck(
        "TC6", "periodic part blocks sensitivity",
        "on the identity region distances are constant, so close pairs never separate "
        "under any metric",
        [system.name], [m.name for m in metrics],
        thresholds={"delta": DELTA, "eps": EPS, "density_max": 0.8, "exact": True})
    cfg = ctx.config("TC6", pairs=s.hybrid_pairs)
    xseed = derive_seed(ctx.seed, "TC6", "x")
    i = 0
    while True:
        x = sample_point(system, RngStream(xseed, i), precision=cfg.horizon)
        if x.coordinate < f:
            break
        i += 1
    prof_cfg = ctx.config("TC6-profile", pairs=200)
    rows = []
    ok = True
    for metric in metrics:
        sample = sample_pair_stats(system, metric, cfg, initial_metrics=[metric],
                                   with_coordinates=True, threads=ctx.threads)
        d0 = sample.initial[metric.name]
        inside = (sample.initial["p_x"] < f) & (sample.initial["q_x"] < f) & (d0 < DELTA)
        separated = sample.tail_max[inside] >= DELTA
        ly = sample.verdicts(cfg)[2]
        density = float(ly.mean())
        profile = sensitivity_profile(system, metric, x, prof_cfg, ctx.threads)
        row_ok = bool(inside.any() and not separated.any() and density <= 0.8 and profile < 1.0)
        ok = ok and row_ok
        rows.append({"metric": metric.name, "close_identity_pairs": int(inside.sum()),
                     "separated_close_pairs": int(separated.sum()),
                     "li_yorke_density": density, "profile_at_x": profile, "pass": row_ok})
    expect = "has_periodic_part" in system.ground_truth
    return _finish(chk, ok and expect, {"x": float(x.coordinate), "metrics": rows,
                                        "config": cfg.to_dict()})


def tc7_scrambled(ctx: _Ctx) -> TheoremCheck:
    s = ctx.scale
    target = 50
    dbl, rot = doubling_map(), irrational_rotation()
    metric_d = ctx.metric(M.circle_arc())
    chk = TheoremCheck(
        "TC7", "scrambled sets",
        "a Li-Yorke M-sensitive system has large scrambled sets; an isometry has none",
        [dbl.name, rot.name], [metric_d.name],
        thresholds={"target": target, "budget": s.greedy_budget, "eps": EPS, "delta": DELTA,
                    "rotation_budget": s.rotation_budget})
    cfg = ctx.config("TC7")
    big = greedy_scrambled_set(dbl, metric_d, cfg, target, s.greedy_budget)
    small = greedy_scrambled_set(rot, ctx.metric(M.circle_arc()), ctx.config("TC7-rot"),
                                 2, s.rotation_budget)
    ok = big.complete and big.size == target and small.size == 1 and not small.complete
    return _finish(chk, ok, {"doubling": big.to_dict(), "rotation": small.to_dict()})


def tc8_isometry_null(ctx: _Ctx) -> TheoremCheck:
    s = ctx.scale
    system = irrational_rotation()
    metric = ctx.metric(M.circle_arc())
    tol = 1e-9
    chk = TheoremCheck(
        "TC8", "isometry admits no Li-Yorke pairs",
        "a compatible metric for which T is an isometry keeps every orbit distance constant",
        [system.name], [metric.name],
        thresholds={"tol": tol, "spread_max": 2 * tol, "eps": EPS, "delta": DELTA})
    cert = ctx.compat("TC8", metric, system)
    iso = M.check_isometry(metric, system, s.iso_pairs, tol,
                           RngStream(derive_seed(ctx.seed, "TC8", "iso"), 0))
    cfg = ctx.config("TC8", pairs=s.iso_pairs)
    sample = sample_pair_stats(system, metric, cfg, threads=ctx.threads)
    spread = float((sample.tail_max - sample.tail_min).max())
    ly = int(sample.verdicts(cfg)[2].sum())
    ok = cert.compatible and iso.isometry and spread <= 2 * tol and ly == 0
    return _finish(chk, ok, {"compatibility": cert.to_dict(), "isometry": iso.to_dict(),
                             "max_spread": spread, "li_yorke_pairs": ly,
                             "config": cfg.to_dict()})


CHECKS: dict[str, Callable[[_Ctx], TheoremCheck]] = {
    "TC1": tc1_product_ergodic,
    "TC2": tc2_weak_mixing_equivalence,
    "TC3": tc3_eigenfunction_obstruction,
    "TC4": tc4_separation_of_notions,
    "TC5": tc5_spillover,
    "TC6": tc6_periodic_obstruction,
    "TC7": tc7_scrambled,
    "TC8": tc8_isometry_null,
}


def run_check(check_id: str, seed: int = 7, scale: str = "quick", threads: int = 1,
              metric_override: Optional[M.MetricSpec] = None) -> TheoremCheck:
    return CHECKS[check_id](_Ctx(seed, SCALES[scale], threads, metric_override))


def run_theorem_suite(seed: int = 7, scale: str = "full", threads: int = 1,
                      metric_override: Optional[M.MetricSpec] = None,
                      only: Optional[list] = None) -> list[TheoremCheck]:
    """Run every check (or those in ``only``) and return them in id order."""
    if scale not in SCALES:
        raise KeyError(f"unknown scale {scale!r}")
    ctx = _Ctx(seed, SCALES[scale], threads, metric_override)
    ids = only or list(CHECKS)
    return [CHECKS[i](ctx) for i in ids]
