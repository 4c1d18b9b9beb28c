import json

import pytest

from liyorke import metrics as M
from liyorke.harness import CHECKS, SCALES, run_check, run_theorem_suite


@pytest.fixture(scope="module")
def quick():
    return run_theorem_suite(seed=7, scale="quick")


def test_quick_suite_all_pass(quick):
    assert [c.id for c in quick] == list(CHECKS)
    failed = [c.id for c in quick if not c.passed]
    assert failed == []


def test_evidence_is_json_and_names_thresholds(quick):
    for c in quick:
        d = c.to_dict()
        json.dumps(d, allow_nan=False)
        assert d["expected"] == "PASS"
        assert d["thresholds"] and d["evidence"]


def test_tc8_in_isolation():
    c = run_check("TC8", seed=3)
    assert c.passed
    assert c.evidence["max_spread"] <= 2e-9
    assert c.evidence["li_yorke_pairs"] == 0


def test_tc3_exact_counts(quick):
    ev = next(c for c in quick if c.id == "TC3").evidence
    assert ev["far_pairs"] > 0
    assert ev["proximal_far_pairs"] == 0 and ev["far_pairs_with_distance_below_1"] == 0


def test_tc6_every_metric(quick):
    ev = next(c for c in quick if c.id == "TC6").evidence
    names = {r["metric"] for r in ev["metrics"]}
    assert names == {m.name for m in M.metric_catalog() if m.kind != "discrete"}
    assert all(r["separated_close_pairs"] == 0 and r["close_identity_pairs"] > 0
               for r in ev["metrics"])


def test_reproducible_and_thread_independent():
    a = [c.to_dict() for c in run_theorem_suite(11, "quick", only=["TC1", "TC4"])]
    b = [c.to_dict() for c in run_theorem_suite(11, "quick", threads=4, only=["TC1", "TC4"])]
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_discrete_override_fails_checks():
    checks = run_theorem_suite(7, "quick", metric_override=M.discrete(), only=["TC1", "TC8"])
    assert not any(c.passed for c in checks)
    assert checks[0].evidence["compatibility"]["verdict"] == "violation"


def test_unknown_scale():
    with pytest.raises(KeyError):
        run_theorem_suite(scale="huge")
    assert set(SCALES) == {"quick", "full"}
