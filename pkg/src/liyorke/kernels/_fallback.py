"""Pure numpy implementation of the orbit kernels.

Every arithmetic step mirrors ``_core.pyx`` operation for operation so the
two backends return identical doubles.
"""
import numpy as np

NAME = "python"

_BLOCK = 2048
_TWO_M53 = 2.0**-53
_BELOW_ONE = np.nextafter(1.0, 0.0)


def _windows(words, n):
    """64-bit windows of the expansions starting at bit offsets ``n``."""
    i = (n >> 6).astype(np.intp)
    b = (n & 63).astype(np.uint64)
    hi = words[:, i] << b[None, :]
    lo = (words[:, i + 1] >> np.uint64(1)) >> (np.uint64(63) - b)[None, :]
    return hi | lo


def coords(batch, sp, n0, n1):
    """Interval coordinates and labels of ``T^n`` for ``n0 <= n < n1``."""
    n = np.arange(n0, n1, dtype=np.int64)
    m = len(batch)
    x = np.empty((m, len(n)))
    rot = batch.mode == 0
    if rot.any():
        t = n.astype(np.float64) * sp.alpha
        t = t - np.floor(t)
        xr = batch.x0[rot, None] + t[None, :]
        x[rot] = np.where(xr >= 1.0, xr - 1.0, xr)
    fixed = batch.mode == 1
    if fixed.any():
        x[fixed] = batch.x0[fixed, None]
    dy = batch.mode == 2
    if dy.any():
        if n1 > batch.horizon:
            raise ValueError(f"expansions support n < {batch.horizon}, asked for {n1}")
        w = _windows(batch.words[dy], n)
        s = (w >> np.uint64(11)).astype(np.float64) * _TWO_M53
        xd = sp.offset + sp.scale * s
        x[dy] = np.where(xd >= 1.0, _BELOW_ONE, xd)
    lab = (batch.label0[:, None] + n[None, :]) % sp.ncomp
    return x, lab


def spillover_cells(x, first_block, max_block):
    x = np.asarray(x, dtype=np.float64)
    c0 = 1.0 - np.ldexp(1.0, -first_block)
    r = 1.0 - x
    mant, e = np.frexp(r)
    k = -e.astype(np.int64) + (mant == 0.5)
    k = np.minimum(k, max_block)
    k = np.maximum(k, first_block)
    start = 1.0 - np.ldexp(1.0, -k)
    c = np.floor(np.ldexp(x - start, 2 * k)).astype(np.int64)
    ncell = np.left_shift(1, k - 1)
    c = np.minimum(c, ncell - 1)
    idx = 1 + ncell - (1 << (first_block - 1)) + c
    return np.where(x < c0, 0, idx)


def _cells(prog, x):
    if prog.cells == 1:
        c = np.floor(x * prog.m).astype(np.int64)
        return np.minimum(c, prog.m - 1)
    return spillover_cells(x, prog.first_block, prog.max_block)


def _pullback(prog, x):
    j = np.searchsorted(prog.knots, x, side="right") - 1
    j = np.clip(j, 0, len(prog.knots) - 2)
    return prog.values[j] + (x - prog.knots[j]) * prog.slopes[j]


def flat_distance(prog, x, lx, y, ly):
    if prog.base == 0:
        t = np.abs(x - y)
        d = np.minimum(t, 1.0 - t)
    elif prog.base == 1:
        d = np.abs(x - y)
    elif prog.base == 2:
        d = np.abs(_pullback(prog, x) - _pullback(prog, y))
    else:
        d = np.where((x == y) & (lx == ly), 0.0, 1.0)
    if prog.cells:
        d = np.where(_cells(prog, x) != _cells(prog, y), 1.0, d)
    if prog.label_weight > 0.0:
        d = np.where(lx != ly, d + prog.label_weight, d)
    return np.minimum(d, 1.0)


def _blocks(n0, n1):
    for a in range(n0, n1, _BLOCK):
        yield a, min(a + _BLOCK, n1)


def _block_distances(P, Q, sp, prog, a, b):
    x, lx = coords(P, sp, a, b)
    y, ly = coords(Q, sp, a, b)
    return flat_distance(prog, x, lx, y, ly)


def pair_distances(P, Q, sp, prog, n0, n1):
    out = np.empty((len(P), n1 - n0))
    for a, b in _blocks(n0, n1):
        out[:, a - n0:b - n0] = _block_distances(P, Q, sp, prog, a, b)
    return out


def pair_extrema(P, Q, sp, prog, n0, n1):
    tmin = np.full(len(P), np.inf)
    tmax = np.full(len(P), -np.inf)
    for a, b in _blocks(n0, n1):
        d = _block_distances(P, Q, sp, prog, a, b)
        np.minimum(tmin, d.min(axis=1), out=tmin)
        np.maximum(tmax, d.max(axis=1), out=tmax)
    return tmin, tmax


def pair_coverage(P, Q, sp, prog, n0, n1, grid, tol):
    hit = np.zeros((len(P), len(grid)), dtype=bool)
    for a, b in _blocks(n0, n1):
        d = _block_distances(P, Q, sp, prog, a, b)
        for g, r in enumerate(grid):
            hit[:, g] |= (np.abs(d - r) <= tol).any(axis=1)
    return hit
