# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled path kernels; same algorithm as ``_fallback`` (see its docstring)."""

from libc.math cimport sqrt, log, cos, sin, hypot, exp, fabs, ldexp, atan2, copysign, INFINITY
from libc.stdint cimport uint32_t, uint64_t, int64_t
from cython.parallel cimport prange

import numpy as np

DEF MAXL = 48
DEF BISECT_ITERS = 48
DEF EPS_GEOM = 1e-9
DEF TWO_PI = 6.283185307179586
DEF INV_SQRT2 = 0.7071067811865476

cdef struct Dom:
    int tag
    double p[8]
    const double* verts
    int nverts
    int map_tag
    double mp[3]

cdef struct Cfg:
    double H
    int M
    double beta
    double floor
    int64_t max_steps
    uint64_t seed
    double tick

cdef struct Tree:
    int64_t lo[MAXL]
    int64_t hi[MAXL]
    double wlx[MAXL]
    double wly[MAXL]
    double whx[MAXL]
    double why[MAXL]


# ---------------------------------------------------------------- RNG

cdef inline void philox4x32(uint32_t* c, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t c0, c1, c2, c3
    cdef int r
    c0 = c[0]; c1 = c[1]; c2 = c[2]; c3 = c[3]
    for r in range(10):
        p0 = <uint64_t>0xD2511F53 * c0
        p1 = <uint64_t>0xCD9E8D57 * c2
        c0 = <uint32_t>(p1 >> 32) ^ c1 ^ k0
        c1 = <uint32_t>p1
        c2 = <uint32_t>(p0 >> 32) ^ c3 ^ k1
        c3 = <uint32_t>p0
        if r < 9:
            k0 = k0 + <uint32_t>0x9E3779B9
            k1 = k1 + <uint32_t>0xBB67AE85
    c[0] = c0; c[1] = c1; c[2] = c2; c[3] = c3


cdef inline void node_normals(uint64_t seed, uint64_t path, uint64_t level, uint64_t index,
                              double* gx, double* gy) noexcept nogil:
    cdef uint32_t c[4]
    cdef double u1, u2, r, th
    c[0] = <uint32_t>index
    c[1] = <uint32_t>(((index >> 32) & 0xFFFFFF) | (level << 24))
    c[2] = <uint32_t>path
    c[3] = <uint32_t>(path >> 32)
    philox4x32(c, <uint32_t>seed, <uint32_t>(seed >> 32))
    u1 = (<double>(c[0] >> 5) * 67108864.0 + <double>(c[1] >> 6)) * (1.0 / 9007199254740992.0)
    u2 = (<double>(c[2] >> 5) * 67108864.0 + <double>(c[3] >> 6)) * (1.0 / 9007199254740992.0)
    r = sqrt(-2.0 * log(1.0 - u1))
    th = TWO_PI * u2
    gx[0] = r * cos(th)
    gy[0] = r * sin(th)


def philox(uint64_t c0, uint64_t c1, uint64_t c2, uint64_t c3, uint64_t k0, uint64_t k1):
    """Philox4x32-10 of one counter block; exposed for known-answer tests."""
    cdef uint32_t c[4]
    c[0] = <uint32_t>c0; c[1] = <uint32_t>c1; c[2] = <uint32_t>c2; c[3] = <uint32_t>c3
    philox4x32(c, <uint32_t>k0, <uint32_t>k1)
    return (c[0], c[1], c[2], c[3])


def normals(uint64_t seed, uint64_t path, uint64_t level, uint64_t index):
    cdef double gx, gy
    node_normals(seed, path, level, index, &gx, &gy)
    return gx, gy


# ---------------------------------------------------------------- geometry

cdef inline double margin_tag(const Dom* d, int tag, double x, double y) noexcept nogil:
    cdef double a, b, rho, g, h, bar, best, x1, y1, x2, y2, ex, ey, t, dist, xint
    cdef int i, j, n
    cdef bint inside
    if tag == 0:
        return d.p[2] - hypot(x - d.p[0], y - d.p[1])
    if tag == 1:
        return min(y, d.p[0] - hypot(x, y))
    if tag == 2:
        rho = hypot(x, y)
        return min(rho - d.p[0], d.p[1] - rho)
    if tag == 3:
        a = (x - fabs(y)) / 1.4142135623730951
        rho = hypot(x, y)
        g = 1.0 - x * x + y * y
        b = g / (sqrt(rho * rho + g) + rho)
        return min(a, b)
    if tag == 4:
        h = d.p[0] / 2
        return min(h - hypot(x - h, y), hypot(x - 0.5, y) - 0.5)
    if tag == 5:
        bar = min(d.p[0] - fabs(y), 1.0 - fabs(x))
        best = max(0.5 - hypot(x - 1.0, y), 0.5 - hypot(x + 1.0, y))
        return max(bar, best)
    if tag == 6:
        return min(x - d.p[0], d.p[1] - x)
    if tag == 7:
        n = d.nverts
        inside = False
        dist = INFINITY
        for i in range(n):
            j = i + 1
            if j == n:
                j = 0
            x1 = d.verts[2 * i]; y1 = d.verts[2 * i + 1]
            x2 = d.verts[2 * j]; y2 = d.verts[2 * j + 1]
            if (y1 > y) != (y2 > y):
                xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if x < xint:
                    inside = not inside
            ex = x2 - x1; ey = y2 - y1
            t = ((x - x1) * ex + (y - y1) * ey) / (ex * ex + ey * ey)
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            dist = min(dist, hypot(x - x1 - t * ex, y - y1 - t * ey))
        return dist if inside else -dist
    return -1.0


cdef inline void cdiv(double a, double b, double c, double e, double* re, double* im) noexcept nogil:
    cdef double den = c * c + e * e
    re[0] = (a * c + b * e) / den
    im[0] = (b * c - a * e) / den


cdef inline double map_g(const Dom* d, double x, double y) noexcept nogil:
    cdef int mt = d.map_tag
    cdef double a
    if mt == 0:
        return 1.0 / (4.0 * hypot(x, y))
    if mt == 1:
        a = hypot(x, y)
        return 1.0 / (a * a * a * a)
    if mt == 2:
        return exp(2.0 * x)
    if mt == 3:
        a = hypot(x, y - 1.0)
        return 4.0 * d.mp[2] * d.mp[2] / (a * a * a * a)
    return d.mp[0] * d.mp[0]


cdef inline void map_fwd(const Dom* d, double x, double y, double* u, double* v) noexcept nogil:
    cdef int mt = d.map_tag
    cdef double r, e, re, im
    if mt == 0:
        r = hypot(x, y)
        u[0] = sqrt((r + x) / 2)
        v[0] = copysign(sqrt((r - x) / 2), y)
    elif mt == 1:
        cdiv(1.0, 0.0, x, y, u, v)
    elif mt == 2:
        e = exp(x)
        u[0] = e * cos(y)
        v[0] = e * sin(y)
    elif mt == 3:
        cdiv(x, y + 1.0, x, y - 1.0, &re, &im)
        u[0] = d.mp[0] + d.mp[2] * re
        v[0] = d.mp[1] + d.mp[2] * im
    else:
        u[0] = d.mp[0] * x + d.mp[1]
        v[0] = d.mp[0] * y + d.mp[2]


cdef inline bint map_inv(const Dom* d, double u, double v, double* x, double* y) noexcept nogil:
    cdef int mt = d.map_tag
    cdef double R
    if mt == 0:
        if u > 0 or (u == 0 and v >= 0):
            x[0] = u * u - v * v
            y[0] = 2 * u * v
            return True
        return False
    if mt == 1:
        if u == 0 and v == 0:
            return False
        cdiv(1.0, 0.0, u, v, x, y)
        return True
    if mt == 2:
        if u == 0 and v == 0:
            return False
        x[0] = log(hypot(u, v))
        y[0] = atan2(v, u)
        return True
    if mt == 3:
        R = d.mp[2]
        u = u - d.mp[0]
        v = v - d.mp[1]
        if u - R == 0 and v == 0:
            return False
        # i * (w + R) / (w - R)
        cdiv(u + R, v, u - R, v, x, y)
        R = x[0]
        x[0] = -y[0]
        y[0] = R
        return True
    x[0] = (u - d.mp[1]) / d.mp[0]
    y[0] = (v - d.mp[2]) / d.mp[0]
    return True


cdef inline double univalence(const Dom* d, double x, double y) noexcept nogil:
    cdef int mt = d.map_tag
    if mt == 2:
        return 3.141592653589793
    if mt == 0 or mt == 1:
        return hypot(x, y)
    if mt == 3:
        return hypot(x, y - 1.0)
    return INFINITY


cdef inline double margin(const Dom* d, double x, double y) noexcept nogil:
    cdef double zx, zy, mb, g, rho, m
    if d.tag != 8:
        return margin_tag(d, d.tag, x, y)
    if not map_inv(d, x, y, &zx, &zy):
        return -1.0
    mb = margin_tag(d, 6, zx, zy)
    g = sqrt(map_g(d, zx, zy))
    if mb > 0:
        rho = min(mb, univalence(d, zx, zy))
        m = g * rho / 4.0
    else:
        m = g * mb
    if m != m or m == INFINITY or m == -INFINITY:
        return -1.0
    return m


cdef inline void bisect(const Dom* d, double px, double py, double qx, double qy,
                        double* ex, double* ey) noexcept nogil:
    cdef double mx, my
    cdef int k
    for k in range(BISECT_ITERS):
        mx = 0.5 * (px + qx)
        my = 0.5 * (py + qy)
        if margin(d, mx, my) > 0:
            px = mx; py = my
        else:
            qx = mx; qy = my
    ex[0] = 0.5 * (px + qx)
    ey[0] = 0.5 * (py + qy)


cdef inline void bisect_base(const Dom* d, double px, double py, double qx, double qy,
                             double* ex, double* ey) noexcept nogil:
    cdef double mx, my
    cdef int k
    for k in range(BISECT_ITERS):
        mx = 0.5 * (px + qx)
        my = 0.5 * (py + qy)
        if margin_tag(d, d.tag, mx, my) > 0:
            px = mx; py = my
        else:
            qx = mx; qy = my
    ex[0] = 0.5 * (px + qx)
    ey[0] = 0.5 * (py + qy)


# ---------------------------------------------------------------- tree walk

cdef inline void tree_init(Tree* tr, int M) noexcept nogil:
    cdef int l
    for l in range(M + 1):
        tr.lo[l] = -1
        tr.hi[l] = -1


cdef inline void tree_advance(Tree* tr, const Cfg* cfg, uint64_t path, int64_t t, int m) noexcept nogil:
    cdef int l, M = cfg.M
    cdef int64_t mid
    cdef double gx, gy, mx, my, sd
    if not (tr.lo[0] <= t and t < tr.hi[0]):
        if tr.lo[0] < 0:
            tr.lo[0] = 0
            tr.wlx[0] = 0.0
            tr.wly[0] = 0.0
        else:
            tr.lo[0] = tr.hi[0]
            tr.wlx[0] = tr.whx[0]
            tr.wly[0] = tr.why[0]
        tr.hi[0] = tr.lo[0] + ((<int64_t>1) << M)
        node_normals(cfg.seed, path, 0, <uint64_t>(tr.hi[0] >> M), &gx, &gy)
        sd = sqrt(cfg.H)
        tr.whx[0] = tr.wlx[0] + sd * gx
        tr.why[0] = tr.wly[0] + sd * gy
    for l in range(1, m + 1):
        if tr.lo[l] <= t and t < tr.hi[l]:
            continue
        mid = (tr.lo[l - 1] + tr.hi[l - 1]) >> 1
        node_normals(cfg.seed, path, l, <uint64_t>(mid >> (M - l)), &gx, &gy)
        sd = sqrt(ldexp(cfg.H, -(l - 1))) / 2
        mx = 0.5 * (tr.wlx[l - 1] + tr.whx[l - 1]) + sd * gx
        my = 0.5 * (tr.wly[l - 1] + tr.why[l - 1]) + sd * gy
        if t < mid:
            tr.lo[l] = tr.lo[l - 1]; tr.hi[l] = mid
            tr.wlx[l] = tr.wlx[l - 1]; tr.wly[l] = tr.wly[l - 1]
            tr.whx[l] = mx; tr.why[l] = my
        else:
            tr.lo[l] = mid; tr.hi[l] = tr.hi[l - 1]
            tr.wlx[l] = mx; tr.wly[l] = my
            tr.whx[l] = tr.whx[l - 1]; tr.why[l] = tr.why[l - 1]


cdef inline int choose_level(const Cfg* cfg, double d, int64_t t) noexcept nogil:
    cdef double target = cfg.beta * d * d
    cdef int m = 0
    if target < cfg.floor:
        target = cfg.floor
    if target > cfg.H:
        target = cfg.H
    while m < cfg.M and ldexp(cfg.H, -m) > target:
        m += 1
    while m < cfg.M and (t & (((<int64_t>1) << (cfg.M - m)) - 1)) != 0:
        m += 1
    return m


cdef void walk_plain(const Dom* d, const Cfg* cfg, double ax, double ay, uint64_t path,
                     double* out) noexcept nogil:
    cdef Tree tr
    cdef int64_t t = 0, steps = 0
    cdef double wx = 0.0, wy = 0.0, zx, zy, nx, ny, ex, ey, dist
    cdef int m
    tree_init(&tr, cfg.M)
    while True:
        zx = ax + wx
        zy = ay + wy
        if steps >= cfg.max_steps:
            out[0] = t * cfg.tick; out[1] = zx; out[2] = zy; out[3] = steps; out[4] = 1
            return
        dist = margin(d, zx, zy)
        m = choose_level(cfg, dist, t)
        tree_advance(&tr, cfg, path, t, m)
        steps += 1
        nx = ax + tr.whx[m]
        ny = ay + tr.why[m]
        if margin(d, nx, ny) <= 0:
            bisect(d, zx, zy, nx, ny, &ex, &ey)
            out[0] = tr.hi[m] * cfg.tick; out[1] = ex; out[2] = ey; out[3] = steps; out[4] = 0
            return
        t = tr.hi[m]
        wx = tr.whx[m]
        wy = tr.why[m]


cdef void walk_coupled(const Dom* d, const Cfg* cfg, double ax, double ay,
                       double la, double lb, double lc, uint64_t path,
                       double* outA, double* outB) noexcept nogil:
    cdef Tree tr
    cdef int64_t t = 0, steps = 0
    cdef double wx = 0.0, wy = 0.0, zx, zy, nx, ny, ex, ey, dist, dA, dB
    cdef double s0, sprev, snew, bx, by, ox, oy, nbx, nby, dot
    cdef bint aliveA = True, aliveB = True, merged
    cdef int m
    s0 = la * ax + lb * ay + lc
    bx = ax - 2 * s0 * la
    by = ay - 2 * s0 * lb
    merged = s0 == 0.0
    sprev = s0
    tree_init(&tr, cfg.M)
    while aliveA or aliveB:
        zx = ax + wx
        zy = ay + wy
        if merged:
            ox = zx; oy = zy
        else:
            dot = la * wx + lb * wy
            ox = bx + wx - 2 * dot * la
            oy = by + wy - 2 * dot * lb
        if steps >= cfg.max_steps:
            if aliveA:
                outA[0] = t * cfg.tick; outA[1] = zx; outA[2] = zy; outA[3] = steps; outA[4] = 1
            if aliveB:
                outB[0] = t * cfg.tick; outB[1] = ox; outB[2] = oy; outB[3] = steps; outB[4] = 1
            return
        dA = margin(d, zx, zy) if aliveA else INFINITY
        dB = margin(d, ox, oy) if (aliveB and not merged) else INFINITY
        dist = min(dA, dB)
        m = choose_level(cfg, dist, t)
        tree_advance(&tr, cfg, path, t, m)
        steps += 1
        nx = ax + tr.whx[m]
        ny = ay + tr.why[m]
        if aliveA and not merged:
            snew = la * nx + lb * ny + lc
            if snew * sprev <= 0:
                merged = True
            sprev = snew
        if merged:
            nbx = nx; nby = ny
        else:
            dot = la * tr.whx[m] + lb * tr.why[m]
            nbx = bx + tr.whx[m] - 2 * dot * la
            nby = by + tr.why[m] - 2 * dot * lb
        if aliveA and margin(d, nx, ny) <= 0:
            bisect(d, zx, zy, nx, ny, &ex, &ey)
            outA[0] = tr.hi[m] * cfg.tick; outA[1] = ex; outA[2] = ey; outA[3] = steps; outA[4] = 0
            aliveA = False
        if aliveB and margin(d, nbx, nby) <= 0:
            bisect(d, ox, oy, nbx, nby, &ex, &ey)
            outB[0] = tr.hi[m] * cfg.tick; outB[1] = ex; outB[2] = ey; outB[3] = steps; outB[4] = 0
            aliveB = False
        t = tr.hi[m]
        wx = tr.whx[m]
        wy = tr.why[m]


cdef void walk_conformal(const Dom* d, const Cfg* cfg, double ax, double ay, uint64_t path,
                         double sx, double sy, bint has_sing, double* out) noexcept nogil:
    cdef Tree tr
    cdef int64_t t = 0, steps = 0
    cdef double wx = 0.0, wy = 0.0, zx, zy, nx, ny, ex, ey, dist, K = 0.0, gprev, gnew, u, v
    cdef int m
    tree_init(&tr, cfg.M)
    gprev = map_g(d, ax, ay)
    while True:
        zx = ax + wx
        zy = ay + wy
        if steps >= cfg.max_steps:
            map_fwd(d, zx, zy, &u, &v)
            out[0] = K * cfg.tick; out[1] = u; out[2] = v; out[3] = steps; out[4] = 1
            return
        dist = margin_tag(d, d.tag, zx, zy)
        m = choose_level(cfg, dist, t)
        while True:
            tree_advance(&tr, cfg, path, t, m)
            nx = ax + tr.whx[m]
            ny = ay + tr.why[m]
            if not has_sing or hypot(nx - sx, ny - sy) >= EPS_GEOM:
                break
            if m >= cfg.M:
                # persistent approach to the singular point
                map_fwd(d, zx, zy, &u, &v)
                out[0] = K * cfg.tick; out[1] = u; out[2] = v; out[3] = steps + 1; out[4] = 1
                return
            m += 1
        steps += 1
        if margin_tag(d, d.tag, nx, ny) <= 0:
            bisect_base(d, zx, zy, nx, ny, &ex, &ey)
            gnew = map_g(d, ex, ey)
            K += (tr.hi[m] - t) * (0.5 * (gprev + gnew))
            map_fwd(d, ex, ey, &u, &v)
            out[0] = K * cfg.tick; out[1] = u; out[2] = v; out[3] = steps; out[4] = 0
            return
        gnew = map_g(d, nx, ny)
        K += (tr.hi[m] - t) * (0.5 * (gprev + gnew))
        gprev = gnew
        t = tr.hi[m]
        wx = tr.whx[m]
        wy = tr.why[m]


# ---------------------------------------------------------------- driver

cdef _unpack(kd, Dom* d, double[:, ::1] verts):
    cdef int i
    d.tag = kd.tag
    for i in range(8):
        d.p[i] = 0.0
    for i in range(min(8, len(kd.params))):
        d.p[i] = kd.params[i]
    d.nverts = verts.shape[0]
    d.verts = &verts[0, 0] if verts.shape[0] > 0 else NULL
    d.map_tag = kd.map_tag
    for i in range(3):
        d.mp[i] = kd.map_params[i] if i < len(kd.map_params) else 0.0


def _pack_out(double[:, ::1] o):
    a = np.asarray(o)
    return {"time": a[:, 0].copy(), "x": a[:, 1].copy(), "y": a[:, 2].copy(),
            "steps": a[:, 3].astype(np.int64), "truncated": a[:, 4] != 0}


def run(kd, int mode, start, paths, cfg, line=None, int threads=1):
    """See ``_fallback.run``; identical contract."""
    cdef Dom d
    cdef Cfg c
    cdef double[:, ::1] verts = np.ascontiguousarray(
        np.asarray(kd.vertices, dtype=np.float64).reshape(-1, 2))
    cdef uint64_t[::1] pv = np.ascontiguousarray(np.asarray(paths, dtype=np.uint64))
    cdef Py_ssize_t n = pv.shape[0], i
    cdef double[:, ::1] outA = np.zeros((max(n, 1), 5))
    cdef double[:, ::1] outB = np.zeros((max(n, 1), 5))
    cdef double ax = float(start[0]), ay = float(start[1])
    cdef double la = 0, lb = 0, lc = 0, sx = 0, sy = 0
    cdef bint has_sing = False
    _unpack(kd, &d, verts)
    c.H = cfg[0]; c.M = cfg[1]; c.beta = cfg[2]; c.floor = cfg[3]
    c.max_steps = cfg[4]; c.seed = cfg[5]
    c.tick = ldexp(c.H, -c.M)
    if c.M < 0 or c.M >= MAXL:
        raise ValueError("tree depth out of range")
    if mode == 1:
        la, lb, lc = line
    if mode == 2:
        if d.map_tag in (0, 1):
            has_sing = True
        elif d.map_tag == 3:
            has_sing = True; sy = 1.0
    if threads < 1:
        threads = 1
    with nogil:
        if mode == 0:
            for i in prange(n, num_threads=threads, schedule="dynamic", chunksize=64):
                walk_plain(&d, &c, ax, ay, pv[i], &outA[i, 0])
        elif mode == 1:
            for i in prange(n, num_threads=threads, schedule="dynamic", chunksize=64):
                walk_coupled(&d, &c, ax, ay, la, lb, lc, pv[i], &outA[i, 0], &outB[i, 0])
        else:
            for i in prange(n, num_threads=threads, schedule="dynamic", chunksize=64):
                walk_conformal(&d, &c, ax, ay, pv[i], sx, sy, has_sing, &outA[i, 0])
    if n == 0:
        empty = {"time": np.zeros(0), "x": np.zeros(0), "y": np.zeros(0),
                 "steps": np.zeros(0, np.int64), "truncated": np.zeros(0, bool)}
        return (empty, dict(empty)) if mode == 1 else empty
    if mode == 1:
        return _pack_out(outA[:n]), _pack_out(outB[:n])
    return _pack_out(outA[:n])


def margin_many(kd, x, y):
    """Vectorized margin through the compiled geometry (for consistency tests)."""
    cdef Dom d
    cdef double[:, ::1] verts = np.ascontiguousarray(
        np.asarray(kd.vertices, dtype=np.float64).reshape(-1, 2))
    cdef double[::1] xv = np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())
    cdef double[::1] yv = np.ascontiguousarray(np.asarray(y, dtype=np.float64).ravel())
    cdef double[::1] res = np.empty(xv.shape[0])
    cdef Py_ssize_t i
    _unpack(kd, &d, verts)
    for i in range(xv.shape[0]):
        res[i] = margin(&d, xv[i], yv[i])
    return np.asarray(res).reshape(np.shape(x))
