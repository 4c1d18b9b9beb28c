"""Report documents (JSON and CSV) for analyses and theorem suites.

Floats are written with Python's shortest round-trip ``repr`` in both
renderings, so a value parsed back from CSV equals the JSON value exactly.
"""
from __future__ import annotations

import csv
import io
import json
import time
from importlib import resources
from typing import Optional, Sequence

from . import __version__
from . import metrics as M
from . import spectral
from .analysis import (
    AnalysisConfig,
    distance_coverage,
    greedy_scrambled_set,
    li_yorke_density,
    sensitivity_profile,
)
from .harness import TheoremCheck, _py
from .systems import RngStream, SystemSpec, derive_seed, sample_point

SCHEMA_VERSION = 1
SECTIONS = ("density", "profile", "coverage", "scrambled", "score")
CSV_COLUMNS = ("check_id/metric", "statistic", "value", "half_width", "verdict")


def load_schema() -> dict:
    return json.loads(resources.files("liyorke").joinpath("report.schema.json").read_text())


def run_analysis(system: SystemSpec, metric: M.MetricSpec, config: AnalysisConfig, *,
                 sections: Sequence[str] = ("density",), grid_step: float = 0.05,
                 tol: float = 0.01, profile_points: int = 10, target: int = 10,
                 budget: int = 1000, wm_k: int = 8, wm_horizon: int = 64,
                 wm_samples: int = 10_000, wm_threshold: float = 0.03,
                 threads: int = 1) -> dict:
    """Run the requested sections and return an analysis report document."""
    unknown = set(sections) - set(SECTIONS)
    if unknown:
        raise KeyError(f"unknown section(s): {', '.join(sorted(unknown))}")
    results: dict = {}
    timings: dict = {}

    def timed(name, fn):
        t0 = time.perf_counter()
        results[name] = fn()
        timings[name] = time.perf_counter() - t0

    if "density" in sections:
        timed("density", lambda: li_yorke_density(system, metric, config, threads).to_dict())
    if "profile" in sections:
        def profiles():
            xs = derive_seed(config.seed, "profile-x")
            out = []
            for i in range(profile_points):
                x = sample_point(system, RngStream(xs, i), precision=config.horizon)
                out.append({"x": float(x.coordinate), "label": x.label,
                            "value": sensitivity_profile(system, metric, x, config, threads)})
            return out
        timed("profile", profiles)
    if "coverage" in sections:
        timed("coverage", lambda: distance_coverage(system, metric, config, grid_step, tol,
                                                    threads=threads).to_dict())
    if "scrambled" in sections:
        timed("scrambled", lambda: greedy_scrambled_set(system, metric, config, target,
                                                        budget).to_dict())
    if "score" in sections:
        def score():
            rep = spectral.weak_mixing_score(system, wm_k, wm_horizon, wm_samples,
                                             RngStream(derive_seed(config.seed, "score"), 0))
            d = rep.to_dict()
            d["threshold"] = wm_threshold
            d["weakly_mixing"] = spectral.classify_weak_mixing(rep, wm_threshold)
            return d
        timed("score", score)

    return {
        "schema": SCHEMA_VERSION,
        "kind": "analysis",
        "tool_version": __version__,
        "seed": config.seed,
        "system": system.descriptor(),
        "metric": metric.descriptor(),
        "config": dict(config.to_dict(), sections=list(sections), grid_step=grid_step,
                       tol=tol, profile_points=profile_points, target=target, budget=budget,
                       wm_k=wm_k, wm_horizon=wm_horizon, wm_samples=wm_samples,
                       wm_threshold=wm_threshold),
        "results": _py(results),
        "timings": timings,
    }


def theorem_report(checks: Sequence[TheoremCheck], seed: int, scale: str,
                   metric_override: Optional[M.MetricSpec] = None) -> dict:
    """Suite document.  No wall-clock fields, so reruns are byte-identical."""
    passed = sum(c.passed for c in checks)
    return {
        "schema": SCHEMA_VERSION,
        "kind": "theorems",
        "tool_version": __version__,
        "seed": seed,
        "scale": scale,
        "metric_override": None if metric_override is None else metric_override.descriptor(),
        "summary": {"passed": passed, "total": len(checks),
                    "failed": [c.id for c in checks if not c.passed]},
        "checks": [c.to_dict() for c in checks],
    }


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# CSV


def _leaves(prefix: str, obj):
    """Numeric leaves of a nested document as ``(dotted.path, value)``."""
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _leaves(f"{prefix}.{k}" if prefix else str(k), obj[k])
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _leaves(f"{prefix}[{i}]", v)
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        yield prefix, obj


def csv_rows(doc: dict) -> list[tuple]:
    rows = []
    if doc["kind"] == "analysis":
        name = doc["metric"]["name"]
        res = doc["results"]
        for section in SECTIONS:
            if section not in res:
                continue
            body = res[section]
            if section == "density":
                rows.append((name, "density", body["value"], body["half_width"], ""))
                continue
            verdict = ""
            if section == "score":
                verdict = "weakly_mixing" if body["weakly_mixing"] else "not_weakly_mixing"
            elif section == "scrambled":
                verdict = "complete" if body["complete"] else "partial"
            for path, v in _leaves(section, body):
                rows.append((name, path, v, "", verdict))
    else:
        for chk in doc["checks"]:
            for path, v in _leaves("", chk["evidence"]):
                rows.append((chk["id"], path, v, "", chk["observed"]))
            rows.append((chk["id"], "verdict", "", "", chk["observed"]))
    return rows


def _cell(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in csv_rows(doc):
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    """Rows as dicts with ``value``/``half_width`` parsed back to numbers."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        for key in ("value", "half_width"):
            s = row[key]
            if s == "":
                row[key] = None
            elif any(c in s for c in ".eEn"):
                row[key] = float(s)
            else:
                row[key] = int(s)
        out.append(row)
    return out
