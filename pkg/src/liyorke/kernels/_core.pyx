# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled orbit kernels.

Fuses orbit generation, metric evaluation and the per-pair reduction so
trajectories are never materialized unless asked for.  Arithmetic matches
``_fallback.py`` step for step; build with ``-ffp-contract=off``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs, frexp, ldexp, nextafter
from libc.stdint cimport uint64_t, int64_t, int8_t

cnp.import_array()

NAME = "cython"

cdef double TWO_M53 = 2.0 ** -53


cdef struct SysProg:
    double alpha
    double offset
    double scale
    int64_t ncomp


cdef struct MetProg:
    int base
    int cells
    int64_t m
    int first_block
    int max_block
    double label_weight
    const double* knots
    const double* values
    const double* slopes
    Py_ssize_t nknots


cdef struct Pt:
    double x
    int64_t lab


cdef SysProg _sysprog(sp):
    cdef SysProg s
    s.alpha = sp.alpha
    s.offset = sp.offset
    s.scale = sp.scale
    s.ncomp = sp.ncomp
    return s


cdef class _Batch:
    cdef const int8_t[::1] mode
    cdef const double[::1] x0
    cdef const int64_t[::1] label0
    cdef const uint64_t[:, ::1] words
    cdef Py_ssize_t width
    cdef Py_ssize_t n

    def __init__(self, batch, long n1):
        self.mode = batch.mode
        self.x0 = batch.x0
        self.label0 = batch.label0
        self.words = batch.words
        self.width = batch.words.shape[1]
        self.n = len(batch.mode)
        if n1 > batch.horizon and np.any(batch.mode == 2):
            raise ValueError(f"expansions support n < {batch.horizon}, asked for {n1}")


cdef class _Prog:
    cdef MetProg p
    cdef object keep

    def __init__(self, prog):
        self.keep = (
            np.ascontiguousarray(prog.knots, dtype=np.float64),
            np.ascontiguousarray(prog.values, dtype=np.float64),
            np.ascontiguousarray(prog.slopes, dtype=np.float64),
        )
        cdef const double[::1] kn = self.keep[0]
        cdef const double[::1] va = self.keep[1]
        cdef const double[::1] sl = self.keep[2]
        self.p.base = prog.base
        self.p.cells = prog.cells
        self.p.m = prog.m
        self.p.first_block = prog.first_block
        self.p.max_block = prog.max_block
        self.p.label_weight = prog.label_weight
        self.p.nknots = kn.shape[0]
        self.p.knots = &kn[0] if kn.shape[0] else NULL
        self.p.values = &va[0] if va.shape[0] else NULL
        self.p.slopes = &sl[0] if sl.shape[0] else NULL


cdef inline Pt _coord(_Batch B, Py_ssize_t i, int64_t n, SysProg* s) noexcept nogil:
    cdef Pt out
    cdef double t, x
    cdef uint64_t w, hi, lo
    cdef Py_ssize_t wi
    cdef unsigned int b
    cdef int8_t mode = B.mode[i]
    if mode == 0:
        t = <double>n * s.alpha
        t = t - floor(t)
        x = B.x0[i] + t
        if x >= 1.0:
            x = x - 1.0
    elif mode == 1:
        x = B.x0[i]
    else:
        wi = n >> 6
        b = n & 63
        hi = B.words[i, wi] << b
        lo = (B.words[i, wi + 1] >> 1) >> (63 - b)
        w = hi | lo
        x = s.offset + s.scale * (<double>(w >> 11) * TWO_M53)
        if x >= 1.0:
            x = nextafter(1.0, 0.0)
    out.x = x
    out.lab = (B.label0[i] + n) % s.ncomp
    return out


cdef inline int64_t _spill(double x, int k0, int kmax) noexcept nogil:
    cdef double c0 = 1.0 - ldexp(1.0, -k0)
    cdef int e
    cdef double mant, start
    cdef int k
    cdef int64_t c, ncell
    if x < c0:
        return 0
    mant = frexp(1.0 - x, &e)
    k = -e + (1 if mant == 0.5 else 0)
    if k > kmax:
        k = kmax
    if k < k0:
        k = k0
    start = 1.0 - ldexp(1.0, -k)
    c = <int64_t>floor(ldexp(x - start, 2 * k))
    ncell = (<int64_t>1) << (k - 1)
    if c > ncell - 1:
        c = ncell - 1
    return 1 + ncell - ((<int64_t>1) << (k0 - 1)) + c


cdef inline int64_t _cell(MetProg* p, double x) noexcept nogil:
    cdef int64_t c
    if p.cells == 1:
        c = <int64_t>floor(x * p.m)
        if c > p.m - 1:
            c = p.m - 1
        return c
    return _spill(x, p.first_block, p.max_block)


cdef inline double _pullback(MetProg* p, double x) noexcept nogil:
    # last j with knots[j] <= x, clipped to [0, nknots - 2]
    cdef Py_ssize_t lo = 0, hi = p.nknots, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if p.knots[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    cdef Py_ssize_t j = lo - 1
    if j < 0:
        j = 0
    if j > p.nknots - 2:
        j = p.nknots - 2
    return p.values[j] + (x - p.knots[j]) * p.slopes[j]


cdef inline double _dist(MetProg* p, Pt a, Pt b) noexcept nogil:
    cdef double d, t
    if p.base == 0:
        t = fabs(a.x - b.x)
        d = t if t < 1.0 - t else 1.0 - t
    elif p.base == 1:
        d = fabs(a.x - b.x)
    elif p.base == 2:
        d = fabs(_pullback(p, a.x) - _pullback(p, b.x))
    else:
        d = 0.0 if (a.x == b.x and a.lab == b.lab) else 1.0
    if p.cells:
        if _cell(p, a.x) != _cell(p, b.x):
            d = 1.0
    if p.label_weight > 0.0 and a.lab != b.lab:
        d = d + p.label_weight
    return d if d < 1.0 else 1.0


def _check(P, Q, long n0, long n1):
    if len(P) != len(Q):
        raise ValueError("pair batches differ in length")
    if not 0 <= n0 <= n1:
        raise ValueError("need 0 <= n0 <= n1")


def pair_extrema(P, Q, sp, prog, long n0, long n1):
    _check(P, Q, n0, n1)
    cdef _Batch A = _Batch(P, n1)
    cdef _Batch B = _Batch(Q, n1)
    cdef _Prog G = _Prog(prog)
    cdef SysProg s = _sysprog(sp)
    cdef Py_ssize_t m = A.n, i
    cdef int64_t n
    cdef double d, lo, hi
    tmin = np.full(m, np.inf)
    tmax = np.full(m, -np.inf)
    cdef double[::1] vmin = tmin
    cdef double[::1] vmax = tmax
    with nogil:
        for i in range(m):
            lo = vmin[i]
            hi = vmax[i]
            for n in range(n0, n1):
                d = _dist(&G.p, _coord(A, i, n, &s), _coord(B, i, n, &s))
                if d < lo:
                    lo = d
                if d > hi:
                    hi = d
            vmin[i] = lo
            vmax[i] = hi
    return tmin, tmax


def pair_distances(P, Q, sp, prog, long n0, long n1):
    _check(P, Q, n0, n1)
    cdef _Batch A = _Batch(P, n1)
    cdef _Batch B = _Batch(Q, n1)
    cdef _Prog G = _Prog(prog)
    cdef SysProg s = _sysprog(sp)
    cdef Py_ssize_t m = A.n, i
    cdef int64_t n
    out = np.empty((m, n1 - n0))
    cdef double[:, ::1] v = out
    with nogil:
        for i in range(m):
            for n in range(n0, n1):
                v[i, n - n0] = _dist(&G.p, _coord(A, i, n, &s), _coord(B, i, n, &s))
    return out


def pair_coverage(P, Q, sp, prog, long n0, long n1, grid, double tol):
    _check(P, Q, n0, n1)
    cdef _Batch A = _Batch(P, n1)
    cdef _Batch B = _Batch(Q, n1)
    cdef _Prog G = _Prog(prog)
    cdef SysProg s = _sysprog(sp)
    cdef const double[::1] r = np.ascontiguousarray(grid, dtype=np.float64)
    cdef Py_ssize_t m = A.n, ng = r.shape[0], i, g, left
    cdef int64_t n
    cdef double d
    hits = np.zeros((m, ng), dtype=np.uint8)
    cdef unsigned char[:, ::1] h = hits
    with nogil:
        for i in range(m):
            left = ng
            for n in range(n0, n1):
                if left == 0:
                    break
                d = _dist(&G.p, _coord(A, i, n, &s), _coord(B, i, n, &s))
                for g in range(ng):
                    if h[i, g] == 0 and fabs(d - r[g]) <= tol:
                        h[i, g] = 1
                        left -= 1
    return hits.astype(bool)


def coords(batch, sp, long n0, long n1):
    cdef _Batch A = _Batch(batch, n1)
    cdef SysProg s = _sysprog(sp)
    cdef Py_ssize_t m = A.n, i
    cdef int64_t n
    cdef Pt p
    x = np.empty((m, n1 - n0))
    lab = np.empty((m, n1 - n0), dtype=np.int64)
    cdef double[:, ::1] vx = x
    cdef int64_t[:, ::1] vl = lab
    with nogil:
        for i in range(m):
            for n in range(n0, n1):
                p = _coord(A, i, n, &s)
                vx[i, n - n0] = p.x
                vl[i, n - n0] = p.lab
    return x, lab


def spillover_cells(x, int first_block, int max_block):
    cdef const double[::1] v = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(v.shape[0], dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(v.shape[0]):
            o[i] = _spill(v[i], first_block, max_block)
    return out


def flat_distance(prog, x, lx, y, ly):
    cdef _Prog G = _Prog(prog)
    xb, lxb, yb, lyb = np.broadcast_arrays(
        np.asarray(x, np.float64), np.asarray(lx, np.int64),
        np.asarray(y, np.float64), np.asarray(ly, np.int64))
    shape = xb.shape
    cdef const double[::1] vx = np.ascontiguousarray(xb).ravel()
    cdef const int64_t[::1] vlx = np.ascontiguousarray(lxb).ravel()
    cdef const double[::1] vy = np.ascontiguousarray(yb).ravel()
    cdef const int64_t[::1] vly = np.ascontiguousarray(lyb).ravel()
    out = np.empty(vx.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef Pt a, b
    with nogil:
        for i in range(vx.shape[0]):
            a.x = vx[i]
            a.lab = vlx[i]
            b.x = vy[i]
            b.lab = vly[i]
            o[i] = _dist(&G.p, a, b)
    return out.reshape(shape)
