"""The compiled core and the numpy fallback must agree bit for bit."""
import numpy as np
import pytest

from liyorke import kernels
from liyorke import metrics as M
from liyorke.kernels import _fallback
from liyorke.systems import RngStream, catalog, identity_map, sample_batch, system_program

import oracles

needs_core = pytest.mark.skipif("cython" not in kernels.available_backends(),
                                reason="compiled core not built")

FLAT = [m for m in M.metric_catalog() if m.flat] + [
    M.sum_product(M.spillover_cells(), 0.5),
    M.arc_partition(3, M.circle_arc()),
    M.spillover_cells(M.CellSchedule(3, 20), M.circle_arc()),
]


def _pairs(system, count, h, seed=0):
    gen = RngStream(seed).generator()
    return sample_batch(system, gen, count, h), sample_batch(system, gen, count, h)


@needs_core
@pytest.mark.parametrize("system", catalog() + [identity_map()], ids=lambda s: s.name)
@pytest.mark.parametrize("metric", FLAT, ids=lambda m: m.name)
def test_backends_identical(system, metric):
    core = kernels.load_backend("cython")
    P, Q = _pairs(system, 40, 700)
    sp, prog = system_program(system), M.lower_metric(metric)
    a = core.pair_distances(P, Q, sp, prog, 3, 700)
    b = _fallback.pair_distances(P, Q, sp, prog, 3, 700)
    np.testing.assert_array_equal(a, b)
    for x, y in zip(core.pair_extrema(P, Q, sp, prog, 100, 700),
                    _fallback.pair_extrema(P, Q, sp, prog, 100, 700)):
        np.testing.assert_array_equal(x, y)
    grid = np.linspace(0, 1, 21)
    np.testing.assert_array_equal(core.pair_coverage(P, Q, sp, prog, 0, 700, grid, 0.01),
                                  _fallback.pair_coverage(P, Q, sp, prog, 0, 700, grid, 0.01))
    for x, y in zip(core.coords(P, sp, 0, 700), _fallback.coords(P, sp, 0, 700)):
        np.testing.assert_array_equal(x, y)


@needs_core
def test_spillover_cells_identical_near_one():
    core = kernels.load_backend("cython")
    x = np.concatenate([RngStream(4).generator().random(10_000),
                        1.0 - 2.0 ** -np.arange(0, 60, 0.25), np.nextafter(1.0, 0.0)[None]])
    for k0, kmax in [(1, 52), (2, 10), (5, 5)]:
        np.testing.assert_array_equal(core.spillover_cells(x, k0, kmax),
                                      _fallback.spillover_cells(x, k0, kmax))


def test_spillover_cells_vs_walk():
    gen = RngStream(8).generator()
    x = np.concatenate([gen.random(2000), 1.0 - gen.random(2000) ** 8,
                        1.0 - 2.0 ** -np.arange(1, 53, dtype=float)])
    x = x[x < 1.0]
    got = kernels.spillover_cells(x, 1, 52)
    want = [oracles.spillover_cell(float(v)) for v in x]
    np.testing.assert_array_equal(got, want)


@pytest.mark.parametrize("metric", FLAT, ids=lambda m: m.name)
def test_distances_vs_scalar_oracle(metric):
    system = catalog()[2]  # product-doubling-2
    P, Q = _pairs(system, 30, 200, seed=3)
    d = M.trajectories(metric, system, P, Q, 0, 200)
    sp = system_program(system)
    xp, lp = kernels.coords(P, sp, 0, 200)
    xq, lq = kernels.coords(Q, sp, 0, 200)
    for i in range(30):
        for n in (0, 7, 199):
            want = _scalar(metric, xp[i, n], lp[i, n], xq[i, n], lq[i, n])
            assert d[i, n] == pytest.approx(want, abs=1e-15)


def _scalar(metric, x, lx, y, ly):
    k = metric.kind
    if k == "sum_product":
        return min(1.0, _scalar(metric.base, x, 0, y, 0) + (metric.label_distance if lx != ly else 0.0))
    if k == "circle":
        return oracles.circle(x, y)
    if k == "euclidean":
        return oracles.euclid(x, y)
    if k == "discrete":
        return 0.0 if x == y else 1.0
    if k == "pullback":
        return oracles.pullback(x, y, metric.knots, metric.values)
    if k == "arc_partition":
        same = oracles.arc_cell(x, metric.m) == oracles.arc_cell(y, metric.m)
        return _scalar(metric.base, x, 0, y, 0) if same else 1.0
    if k == "spillover":
        s = metric.schedule
        same = (oracles.spillover_cell(x, s.first_block, s.max_block)
                == oracles.spillover_cell(y, s.first_block, s.max_block))
        return _scalar(metric.base, x, 0, y, 0) if same else 1.0
    raise AssertionError(k)


def test_use_backend_switches(monkeypatch):
    prev = kernels.use_backend("python")
    try:
        assert kernels.BACKEND == "python"
    finally:
        kernels.use_backend(prev)
    monkeypatch.setenv("LIYORKE_BACKEND", "python")
    assert kernels.load_backend().NAME == "python"


def test_sliding_max_brute_force():
    a = RngStream(6).generator().random((5, 97))
    for w in (1, 2, 5, 16, 97):
        got = M.sliding_max(a, w)
        want = np.stack([a[:, n:n + w].max(axis=1) for n in range(97 - w + 1)], axis=1)
        np.testing.assert_array_equal(got, want)
    with pytest.raises(ValueError):
        M.sliding_max(a, 98)


def test_benchmark_smoke(capsys):
    import runpy
    from pathlib import Path
    bench = runpy.run_path(str(Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"))
    bench["main"](["--pairs", "20", "--horizon", "200", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "doubling" in out and "ns/step" in out
