"""Pure numpy implementation of the path kernels.

Used when the compiled ``_kernel`` extension is unavailable (or when
PTAU_BACKEND=python).  It follows the compiled kernel step for step;
the two backends agree to rounding in libm, not bit for bit.

Brownian paths come from a dyadic "virtual Brownian tree": the increment
over coarse interval k (length dt_max) and every bridge midpoint below it
are drawn from a Philox4x32-10 counter keyed by (seed, path, level, index).
A walker choosing any aligned dyadic step therefore samples the same
underlying path, whatever its step-size policy.
"""

from __future__ import annotations

import math

import numpy as np

from . import domain as D
from .geometry import EPS_GEOM

MASK32 = np.uint64(0xFFFFFFFF)
_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = np.uint64(0x9E3779B9)
_PHILOX_W1 = np.uint64(0xBB67AE85)
BISECT_ITERS = 48

MODE_PLAIN, MODE_COUPLED, MODE_CONFORMAL = 0, 1, 2


def philox4x32(c0, c1, c2, c3, k0, k1, rounds: int = 10):
    """Philox4x32 on arrays of 32-bit words held in uint64."""
    c0, c1, c2, c3 = (np.asarray(v, np.uint64) & MASK32 for v in (c0, c1, c2, c3))
    k0 = np.asarray(k0, np.uint64) & MASK32
    k1 = np.asarray(k1, np.uint64) & MASK32
    for r in range(rounds):
        p0 = _PHILOX_M0 * c0
        p1 = _PHILOX_M1 * c2
        c0, c1, c2, c3 = ((p1 >> np.uint64(32)) ^ c1 ^ k0, p1 & MASK32,
                          (p0 >> np.uint64(32)) ^ c3 ^ k1, p0 & MASK32)
        if r < rounds - 1:
            k0 = (k0 + _PHILOX_W0) & MASK32
            k1 = (k1 + _PHILOX_W1) & MASK32
    return c0, c1, c2, c3


def node_normals(seed: int, path, level, index):
    """Two standard normals per (path, level, index) tree node."""
    path = np.asarray(path, np.uint64)
    index = np.asarray(index, np.uint64)
    level = np.asarray(level, np.uint64)
    seed = np.uint64(seed)
    c1 = ((index >> np.uint64(32)) & np.uint64(0xFFFFFF)) | (level << np.uint64(24))
    x0, x1, x2, x3 = philox4x32(index & MASK32, c1, path & MASK32, path >> np.uint64(32),
                                seed & MASK32, seed >> np.uint64(32))
    scale = 1.0 / 9007199254740992.0
    u1 = ((x0 >> np.uint64(5)).astype(np.float64) * 67108864.0
          + (x1 >> np.uint64(6)).astype(np.float64)) * scale
    u2 = ((x2 >> np.uint64(5)).astype(np.float64) * 67108864.0
          + (x3 >> np.uint64(6)).astype(np.float64)) * scale
    r = np.sqrt(-2.0 * np.log(1.0 - u1))
    th = 2.0 * math.pi * u2
    return r * np.cos(th), r * np.sin(th)


# ------------------------------------------------------------- domain margins

def _margin_tag(tag, p, verts, x, y):
    if tag == D.TAG_DISK:
        return p[2] - np.hypot(x - p[0], y - p[1])
    if tag == D.TAG_HALF_DISK:
        return np.minimum(y, p[0] - np.hypot(x, y))
    if tag == D.TAG_ANNULUS:
        rho = np.hypot(x, y)
        return np.minimum(rho - p[0], p[1] - rho)
    if tag == D.TAG_HYPERBOLIC:
        wedge = (x - np.abs(y)) / math.sqrt(2.0)
        rho = np.hypot(x, y)
        g = 1.0 - x * x + y * y
        return np.minimum(wedge, g / (np.sqrt(rho * rho + g) + rho))
    if tag == D.TAG_CRESCENT:
        h = p[0] / 2
        return np.minimum(h - np.hypot(x - h, y), np.hypot(x - 0.5, y) - 0.5)
    if tag == D.TAG_DUMBBELL:
        bar = np.minimum(p[0] - np.abs(y), 1.0 - np.abs(x))
        return np.maximum(bar, np.maximum(0.5 - np.hypot(x - 1.0, y), 0.5 - np.hypot(x + 1.0, y)))
    if tag == D.TAG_STRIP:
        return np.minimum(x - p[0], p[1] - x)
    if tag == D.TAG_POLYGON:
        inside = np.zeros(x.shape, bool)
        dist = np.full(x.shape, np.inf)
        n = len(verts)
        for i in range(n):
            x1, y1 = verts[i]
            x2, y2 = verts[(i + 1) % n]
            crosses = (y1 > y) != (y2 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (x < xint)
            ex, ey = x2 - x1, y2 - y1
            t = np.clip(((x - x1) * ex + (y - y1) * ey) / (ex * ex + ey * ey), 0.0, 1.0)
            dist = np.minimum(dist, np.hypot(x - x1 - t * ex, y - y1 - t * ey))
        return np.where(inside, dist, -dist)
    raise ValueError(f"unknown domain tag {tag}")


def _map_fwd(mt, mp, z):
    if mt == 0:
        return np.sqrt(z)
    if mt == 1:
        return 1.0 / z
    if mt == 2:
        return np.exp(z)
    if mt == 3:
        return complex(mp[0], mp[1]) + mp[2] * (z + 1j) / (z - 1j)
    return mp[0] * z + complex(mp[1], mp[2])


def _map_g(mt, mp, z):
    """|f'(z)|^2."""
    if mt == 0:
        return 1.0 / (4.0 * np.abs(z))
    if mt == 1:
        a = np.abs(z)
        return 1.0 / (a * a * a * a)
    if mt == 2:
        return np.exp(2.0 * z.real)
    if mt == 3:
        a = np.abs(z - 1j)
        return 4.0 * mp[2] * mp[2] / (a * a * a * a)
    return np.full(z.shape, mp[0] * mp[0])


def _map_inv(mt, mp, w):
    with np.errstate(divide="ignore", invalid="ignore"):
        if mt == 0:
            ok = (w.real > 0) | ((w.real == 0) & (w.imag >= 0))
            return np.where(ok, w * w, np.nan)
        if mt == 1:
            return 1.0 / w
        if mt == 2:
            return np.log(w)
        if mt == 3:
            z0 = complex(mp[0], mp[1])
            return 1j * (w - z0 + mp[2]) / (w - z0 - mp[2])
        return (w - complex(mp[1], mp[2])) / mp[0]


def _map_singular(mt, mp):
    if mt in (0, 1):
        return 0j
    if mt == 3:
        return 1j
    return None


def _univalence(mt, z):
    if mt == 2:
        return np.full(z.shape, math.pi)
    s = {0: 0j, 1: 0j, 3: 1j}.get(mt)
    if s is None:
        return np.full(z.shape, np.inf)
    return np.abs(z - s)


def margin(kd: D.KernelDomain, x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if kd.tag != D.TAG_CONFORMAL:
        return _margin_tag(kd.tag, kd.params, kd.vertices, x, y)
    mt, mp = kd.map_tag, kd.map_params
    z = _map_inv(mt, mp, x + 1j * y)
    bad = ~np.isfinite(z)
    z = np.where(bad, 0.5 * (kd.params[0] + kd.params[1]), z)
    mb = _margin_tag(D.TAG_STRIP, kd.params, None, z.real, z.imag)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.sqrt(_map_g(mt, mp, z))
        rho = np.minimum(mb, _univalence(mt, z))
        m = np.where(mb > 0, g * rho / 4.0, g * mb)
    return np.where(bad | ~np.isfinite(m), -1.0, m)


# ------------------------------------------------------------------ walker

class _Tree:
    """Per-path cache of the dyadic Brownian tree along the current time."""

    def __init__(self, n, levels, H, seed, paths):
        L = levels + 1
        self.M = levels
        self.seed = seed
        self.paths = paths
        self.lo = np.full((n, L), -1, np.int64)
        self.hi = np.full((n, L), -1, np.int64)
        self.wlx = np.zeros((n, L))
        self.wly = np.zeros((n, L))
        self.whx = np.zeros((n, L))
        self.why = np.zeros((n, L))
        self.sd0 = math.sqrt(H)
        # bridge midpoint std for a parent of length H/2^(l-1)
        self.sd = np.array([0.0] + [math.sqrt(math.ldexp(H, -(l - 1))) / 2 for l in range(1, L)])

    def advance(self, rows, t, m):
        """Make level m's interval containing t current for the given rows;
        returns the tree value at its right end."""
        M = self.M
        # level 0
        lo0, hi0 = self.lo[rows, 0], self.hi[rows, 0]
        need = ~((lo0 <= t) & (t < hi0))
        if need.any():
            r = rows[need]
            fresh = self.lo[r, 0] < 0
            lo = np.where(fresh, 0, self.hi[r, 0])
            wx = np.where(fresh, 0.0, self.whx[r, 0])
            wy = np.where(fresh, 0.0, self.why[r, 0])
            hi = lo + (np.int64(1) << np.int64(M))
            gx, gy = node_normals(self.seed, self.paths[r], 0, hi >> np.int64(M))
            self.lo[r, 0], self.hi[r, 0] = lo, hi
            self.wlx[r, 0], self.wly[r, 0] = wx, wy
            self.whx[r, 0] = wx + self.sd0 * gx
            self.why[r, 0] = wy + self.sd0 * gy
        for l in range(1, M + 1):
            want = m >= l
            if not want.any():
                break
            rr = rows[want]
            tt = t[want]
            ok = (self.lo[rr, l] <= tt) & (tt < self.hi[rr, l])
            if ok.all():
                continue
            r = rr[~ok]
            tt = tt[~ok]
            plo, phi = self.lo[r, l - 1], self.hi[r, l - 1]
            mid = (plo + phi) >> np.int64(1)
            gx, gy = node_normals(self.seed, self.paths[r], l, mid >> np.int64(M - l))
            mx = 0.5 * (self.wlx[r, l - 1] + self.whx[r, l - 1]) + self.sd[l] * gx
            my = 0.5 * (self.wly[r, l - 1] + self.why[r, l - 1]) + self.sd[l] * gy
            left = tt < mid
            self.lo[r, l] = np.where(left, plo, mid)
            self.hi[r, l] = np.where(left, mid, phi)
            self.wlx[r, l] = np.where(left, self.wlx[r, l - 1], mx)
            self.wly[r, l] = np.where(left, self.wly[r, l - 1], my)
            self.whx[r, l] = np.where(left, mx, self.whx[r, l - 1])
            self.why[r, l] = np.where(left, my, self.why[r, l - 1])
        return self.hi[rows, m], self.whx[rows, m], self.why[rows, m]


def _choose_level(d, t, beta, floor, H, M):
    target = np.clip(beta * d * d, floor, H)
    lens = np.ldexp(H, -np.arange(M + 1))
    m = np.minimum(np.sum(lens[None, :] > target[:, None], axis=1), M)
    # align: a level-m step must start on a multiple of 2^(M-m) ticks
    tz = np.full(t.shape, M, np.int64)
    nz = t != 0
    low = t[nz] & -t[nz]
    tz[nz] = np.minimum(np.log2(low.astype(np.float64)).astype(np.int64), M)
    return np.maximum(m, M - tz)


def _bisect(kd, px, py, qx, qy):
    """Boundary crossing between inside points p and outside points q."""
    for _ in range(BISECT_ITERS):
        mx, my = 0.5 * (px + qx), 0.5 * (py + qy)
        ins = margin(kd, mx, my) > 0
        px, py = np.where(ins, mx, px), np.where(ins, my, py)
        qx, qy = np.where(ins, qx, mx), np.where(ins, qy, my)
    return 0.5 * (px + qx), 0.5 * (py + qy)



def run(kd: D.KernelDomain, mode: int, start, paths, cfg, line=None, threads: int = 1):
    """Simulate one exit per path index.

    cfg = (dt_max, levels, beta, dt_floor, max_steps, seed).
    mode 0: plain; mode 1: reflection coupled pair over ``line`` (a, b, c);
    mode 2: walk in kd (the base) and accumulate |f'|^2 along the path for
    the map stored in kd.map_tag/map_params.
    Returns a dict of per-path arrays.
    """
    H, M, beta, floor, max_steps, seed = cfg
    paths = np.asarray(paths, np.uint64)
    n = len(paths)
    ax, ay = float(start[0]), float(start[1])
    tick = math.ldexp(H, -M)
    tree = _Tree(n, M, H, seed, paths)

    base_kd = kd
    if mode == MODE_CONFORMAL:
        base_kd = D.KernelDomain(kd.tag, kd.params, kd.vertices)
        mt, mp = kd.map_tag, kd.map_params
        sing = _map_singular(mt, mp)

    t = np.zeros(n, np.int64)
    wx = np.zeros(n)
    wy = np.zeros(n)
    steps = np.zeros(n, np.int64)
    out = {
        "time": np.zeros(n), "x": np.full(n, ax), "y": np.full(n, ay),
        "steps": np.zeros(n, np.int64), "truncated": np.zeros(n, bool),
    }
    aliveA = np.ones(n, bool)

    if mode == MODE_COUPLED:
        la, lb, lc = line
        s0 = la * ax + lb * ay + lc
        bx, by = ax - 2 * s0 * la, ay - 2 * s0 * lb
        merged = np.full(n, s0 == 0.0)
        aliveB = np.ones(n, bool)
        sprev = np.full(n, s0)
        out2 = {
            "time": np.zeros(n), "x": np.full(n, bx), "y": np.full(n, by),
            "steps": np.zeros(n, np.int64), "truncated": np.zeros(n, bool),
        }
    if mode == MODE_CONFORMAL:
        K = np.zeros(n)
        gprev = _map_g(mt, mp, np.full(n, complex(ax, ay)))

    def posB(rows, wxr, wyr):
        # reflected linear part applied to the tree value
        dot = la * wxr + lb * wyr
        x = np.where(merged[rows], ax + wxr, bx + wxr - 2 * dot * la)
        y = np.where(merged[rows], ay + wyr, by + wyr - 2 * dot * lb)
        return x, y

    while True:
        if mode == MODE_COUPLED:
            live = np.flatnonzero(aliveA | aliveB)
        else:
            live = np.flatnonzero(aliveA)
        if live.size == 0:
            break
        # truncation
        over = steps[live] >= max_steps
        if over.any():
            r = live[over]
            for o, alive in ((out, aliveA),) + (((out2, aliveB),) if mode == MODE_COUPLED else ()):
                rr = r[alive[r]]
                o["truncated"][rr] = True
                o["steps"][rr] = steps[rr]
                if mode == MODE_CONFORMAL:
                    o["time"][rr] = K[rr] * tick
                    w = _map_fwd(mt, mp, (ax + wx[rr]) + 1j * (ay + wy[rr]))
                    o["x"][rr], o["y"][rr] = w.real, w.imag
                else:
                    o["time"][rr] = t[rr] * tick
                    if o is out:
                        o["x"][rr], o["y"][rr] = ax + wx[rr], ay + wy[rr]
                    else:
                        o["x"][rr], o["y"][rr] = posB(rr, wx[rr], wy[rr])
                alive[rr] = False
            live = live[~over]
            if live.size == 0:
                continue

        zx, zy = ax + wx[live], ay + wy[live]
        if mode == MODE_COUPLED:
            dA = np.where(aliveA[live], margin(base_kd, zx, zy), np.inf)
            pbx, pby = posB(live, wx[live], wy[live])
            dB = np.where(aliveB[live] & ~merged[live], margin(base_kd, pbx, pby), np.inf)
            d = np.minimum(dA, dB)
            d = np.where(np.isfinite(d), d, dA)
        else:
            d = margin(base_kd, zx, zy)
        m = _choose_level(d, t[live], beta, floor, H, M)

        if mode == MODE_CONFORMAL and sing is not None:
            # refine steps that would land on the singularity
            todo = np.arange(live.size)
            hi = np.empty(live.size, np.int64)
            nwx = np.empty(live.size)
            nwy = np.empty(live.size)
            while todo.size:
                h_, x_, y_ = tree.advance(live[todo], t[live[todo]], m[todo])
                hi[todo], nwx[todo], nwy[todo] = h_, x_, y_
                near = np.abs((ax + x_) + 1j * (ay + y_) - sing) < EPS_GEOM
                can = near & (m[todo] < M)
                m[todo[can]] += 1
                stuck = near & (m[todo] >= M) & ~can
                if stuck.any():
                    rr = live[todo[stuck]]
                    steps[rr] = max_steps  # truncates on the next pass
                todo = todo[can]
        else:
            hi, nwx, nwy = tree.advance(live, t[live], m)

        dt_ticks = hi - t[live]
        steps[live] += 1

        nzx, nzy = ax + nwx, ay + nwy
        if mode == MODE_PLAIN:
            outside = margin(base_kd, nzx, nzy) <= 0
            if outside.any():
                r = live[outside]
                ex, ey = _bisect(base_kd, zx[outside], zy[outside], nzx[outside], nzy[outside])
                out["time"][r] = hi[outside] * tick
                out["x"][r], out["y"][r] = ex, ey
                out["steps"][r] = steps[r]
                aliveA[r] = False
        elif mode == MODE_CONFORMAL:
            outside = margin(base_kd, nzx, nzy) <= 0
            gnew = np.empty(live.size)
            ins = ~outside
            gnew[ins] = _map_g(mt, mp, nzx[ins] + 1j * nzy[ins])
            if outside.any():
                r = live[outside]
                ex, ey = _bisect(base_kd, zx[outside], zy[outside], nzx[outside], nzy[outside])
                gnew[outside] = _map_g(mt, mp, ex + 1j * ey)
                K[r] += dt_ticks[outside] * (0.5 * (gprev[r] + gnew[outside]))
                w = _map_fwd(mt, mp, ex + 1j * ey)
                out["time"][r] = K[r] * tick
                out["x"][r], out["y"][r] = w.real, w.imag
                out["steps"][r] = steps[r]
                aliveA[r] = False
            r = live[ins]
            K[r] += dt_ticks[ins] * (0.5 * (gprev[r] + gnew[ins]))
            gprev[r] = gnew[ins]
        else:
            # coupled pair: merge on crossing the line, then exits
            aA = aliveA[live]
            snew = la * nzx + lb * nzy + lc
            cross = aA & ~merged[live] & (snew * sprev[live] <= 0)
            sprev[live] = snew
            oldBx, oldBy = posB(live, wx[live], wy[live])
            merged[live[cross]] = True
            nbx, nby = posB(live, nwx, nwy)
            outA = aA & (margin(base_kd, nzx, nzy) <= 0)
            aB = aliveB[live]
            outB = aB & (margin(base_kd, nbx, nby) <= 0)
            if outA.any():
                r = live[outA]
                ex, ey = _bisect(base_kd, zx[outA], zy[outA], nzx[outA], nzy[outA])
                out["time"][r] = hi[outA] * tick
                out["x"][r], out["y"][r] = ex, ey
                out["steps"][r] = steps[r]
                aliveA[r] = False
            if outB.any():
                r = live[outB]
                ex, ey = _bisect(base_kd, oldBx[outB], oldBy[outB], nbx[outB], nby[outB])
                out2["time"][r] = hi[outB] * tick
                out2["x"][r], out2["y"][r] = ex, ey
                out2["steps"][r] = steps[r]
                aliveB[r] = False

        t[live] = hi
        wx[live], wy[live] = nwx, nwy

    if mode == MODE_COUPLED:
        return out, out2
    return out
