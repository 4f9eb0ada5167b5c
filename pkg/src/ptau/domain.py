"""Planar domains with vectorized membership and distance-to-boundary.

Every domain exposes ``margin_xy``: positive inside, negative outside, and
for inside points a lower bound on the Euclidean distance to the boundary
(exact for disks, half-disks, annuli, crescents, strips and polygons).
Membership is ``margin > 0``; points within ``EPS_GEOM`` of the boundary may
land on either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .geometry import (
    EPS_GEOM,
    ConformalMapSpec,
    GeometryError,
    Point,
    _as_point,
    abs_derivative_sq_complex,
    inverse_complex,
    map_complex,
    univalence_radius,
)

# Tag ids shared with the compiled kernel and the numpy fallback.
TAG_DISK, TAG_HALF_DISK, TAG_ANNULUS, TAG_HYPERBOLIC = 0, 1, 2, 3
TAG_CRESCENT, TAG_DUMBBELL, TAG_STRIP, TAG_POLYGON, TAG_CONFORMAL = 4, 5, 6, 7, 8
MAP_IDS = {"square_root": 0, "reciprocal": 1, "exponential": 2,
           "mobius_disk_to_circle": 3, "affine": 4}

# Finite window used to probe and draw unbounded domains.
PROBE_EXTENT = 4.0


class DomainError(ValueError):
    """Invalid domain parameters, or a query point outside the domain."""


@dataclass(frozen=True)
class KernelDomain:
    """Flat description consumed by the simulation backends."""

    tag: int
    params: np.ndarray
    vertices: np.ndarray
    map_tag: int = -1
    map_params: np.ndarray = field(default_factory=lambda: np.zeros(3))


class Domain:
    tag: str = ""

    # -- to be provided by subclasses
    def margin_xy(self, x, y):
        raise NotImplementedError

    def bbox(self) -> Tuple[float, float, float, float]:
        """Finite (xmin, xmax, ymin, ymax) window covering the domain, clipped
        to PROBE_EXTENT for unbounded shapes."""
        raise NotImplementedError

    def boundary_curves(self, n: int = 512) -> List[Tuple[np.ndarray, np.ndarray]]:
        raise NotImplementedError

    def params_json(self) -> dict:
        raise NotImplementedError

    def kernel(self) -> KernelDomain:
        raise NotImplementedError

    # -- shared
    def contains_xy(self, x, y):
        return self.margin_xy(np.asarray(x, float), np.asarray(y, float)) > 0

    def contains(self, p) -> bool:
        p = _as_point(p)
        return bool(self.contains_xy(p.x, p.y))

    def distance_to_boundary(self, p) -> float:
        p = _as_point(p)
        m = float(self.margin_xy(np.float64(p.x), np.float64(p.y)))
        if not m > 0:
            raise DomainError(f"point ({p.x}, {p.y}) is not inside {self.tag}")
        return m

    def boundary_points(self, n: int = 2048) -> Tuple[np.ndarray, np.ndarray]:
        k = len(self.boundary_curves(8))
        curves = self.boundary_curves(max(8, n // max(1, k)))
        xs = np.concatenate([c[0] for c in curves])
        ys = np.concatenate([c[1] for c in curves])
        return xs, ys

    def to_json(self) -> dict:
        return {"tag": self.tag, "params": self.params_json()}


def _circle_curve(cx, cy, r, n, t0=0.0, t1=2 * math.pi):
    t = np.linspace(t0, t1, n)
    return cx + r * np.cos(t), cy + r * np.sin(t)


def _keep_on_union_boundary(curves, others):
    """Split each curve where it runs inside one of the ``others`` margins."""
    out = []
    for (x, y), rivals in zip(curves, others):
        inside = np.zeros(x.shape, bool)
        for m in rivals:
            inside |= m(x, y) > EPS_GEOM
        keep = ~inside
        # split into runs of kept points
        idx = np.flatnonzero(np.diff(np.concatenate([[0], keep.astype(int), [0]])))
        for a, b in zip(idx[::2], idx[1::2]):
            if b - a >= 2:
                out.append((x[a:b], y[a:b]))
    return out


@dataclass(frozen=True)
class Disk(Domain):
    center: Point = Point(0.0, 0.0)
    radius: float = 1.0
    tag = "disk"

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise DomainError("disk radius must be positive")

    def margin_xy(self, x, y):
        return self.radius - np.hypot(x - self.center.x, y - self.center.y)

    def bbox(self):
        c, r = self.center, self.radius
        return (c.x - r, c.x + r, c.y - r, c.y + r)

    def boundary_curves(self, n=512):
        return [_circle_curve(self.center.x, self.center.y, self.radius, n)]

    def params_json(self):
        return {"center": [self.center.x, self.center.y], "radius": self.radius}

    def kernel(self):
        return KernelDomain(TAG_DISK, np.array([self.center.x, self.center.y, self.radius]),
                            np.zeros((0, 2)))


@dataclass(frozen=True)
class HalfDisk(Domain):
    """{|z| < radius, Im z > 0}."""

    radius: float = 1.0
    tag = "half_disk"

    def __post_init__(self):
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise DomainError("half_disk radius must be positive")

    def margin_xy(self, x, y):
        return np.minimum(y, self.radius - np.hypot(x, y))

    def bbox(self):
        return (-self.radius, self.radius, 0.0, self.radius)

    def boundary_curves(self, n=512):
        r = self.radius
        arc = _circle_curve(0.0, 0.0, r, n, 0.0, math.pi)
        base = (np.linspace(-r, r, n), np.zeros(n))
        return [arc, base]

    def params_json(self):
        return {"radius": self.radius}

    def kernel(self):
        return KernelDomain(TAG_HALF_DISK, np.array([self.radius]), np.zeros((0, 2)))


@dataclass(frozen=True)
class Annulus(Domain):
    r_inner: float = 1.0
    r_outer: float = 2.0
    tag = "annulus"

    def __post_init__(self):
        object.__setattr__(self, "r_inner", float(self.r_inner))
        object.__setattr__(self, "r_outer", float(self.r_outer))
        if not (0 < self.r_inner < self.r_outer):
            raise DomainError("annulus needs 0 < r_inner < r_outer")

    def margin_xy(self, x, y):
        rho = np.hypot(x, y)
        return np.minimum(rho - self.r_inner, self.r_outer - rho)

    def bbox(self):
        R = self.r_outer
        return (-R, R, -R, R)

    def boundary_curves(self, n=512):
        return [_circle_curve(0, 0, self.r_outer, n), _circle_curve(0, 0, self.r_inner, n)]

    def params_json(self):
        return {"r_inner": self.r_inner, "r_outer": self.r_outer}

    def kernel(self):
        return KernelDomain(TAG_ANNULUS, np.array([self.r_inner, self.r_outer]), np.zeros((0, 2)))


@dataclass(frozen=True)
class HyperbolicRegion(Domain):
    """{x > |y|, x^2 - y^2 < 1}: the component of {|x| > |y|, x^2 - y^2 < 1}
    in the right half-plane, i.e. the image of the strip 0 < Re z < 1 under
    the principal square root."""

    tag = "hyperbolic_region"

    def margin_xy(self, x, y):
        wedge = (x - np.abs(y)) / math.sqrt(2.0)
        rho = np.hypot(x, y)
        g = 1.0 - x * x + y * y
        # |grad(x^2 - y^2)| = 2|z|: a displacement s changes x^2 - y^2 by at most
        # 2|z| s + s^2, so the hyperbola is at least sqrt(|z|^2 + g) - |z| away.
        hyp = g / (np.sqrt(rho * rho + g) + rho)
        return np.minimum(wedge, hyp)

    def bbox(self):
        e = PROBE_EXTENT
        return (0.0, e, -e, e)

    def boundary_curves(self, n=512):
        e = PROBE_EXTENT
        t = np.linspace(0, e / math.sqrt(2), n)
        tmax = math.asinh(e / math.sqrt(2))
        s = np.linspace(-tmax, tmax, n)
        return [(t, t), (t, -t), (np.cosh(s), np.sinh(s))]

    def params_json(self):
        return {}

    def kernel(self):
        return KernelDomain(TAG_HYPERBOLIC, np.zeros(1), np.zeros((0, 2)))


@dataclass(frozen=True)
class Crescent(Domain):
    """Inside {|z - R/2| < R/2}, outside {|z - 1/2| <= 1/2}; R > 1."""

    R: float = 2.0
    tag = "crescent"

    def __post_init__(self):
        object.__setattr__(self, "R", float(self.R))
        if not self.R > 1:
            raise DomainError("crescent needs R > 1")

    def margin_xy(self, x, y):
        h = self.R / 2
        big = h - np.hypot(x - h, y)
        small = np.hypot(x - 0.5, y) - 0.5
        return np.minimum(big, small)

    def bbox(self):
        return (0.0, self.R, -self.R / 2, self.R / 2)

    def boundary_curves(self, n=512):
        return [_circle_curve(self.R / 2, 0, self.R / 2, n), _circle_curve(0.5, 0, 0.5, n)]

    def params_json(self):
        return {"R": self.R}

    def kernel(self):
        return KernelDomain(TAG_CRESCENT, np.array([self.R]), np.zeros((0, 2)))


@dataclass(frozen=True)
class Dumbbell(Domain):
    """{|y| < eps, |x| < 1} union the disks of radius 1/2 about -1 and 1."""

    eps: float = 0.1
    tag = "dumbbell"

    def __post_init__(self):
        object.__setattr__(self, "eps", float(self.eps))
        if not (0 < self.eps < 0.5):
            raise DomainError("dumbbell needs 0 < eps < 1/2")

    def _pieces(self):
        e = self.eps
        return [
            lambda x, y: np.minimum(e - np.abs(y), 1.0 - np.abs(x)),
            lambda x, y: 0.5 - np.hypot(x - 1.0, y),
            lambda x, y: 0.5 - np.hypot(x + 1.0, y),
        ]

    def margin_xy(self, x, y):
        # A ball inside one piece is inside the union.
        bar, right, left = self._pieces()
        return np.maximum(bar(x, y), np.maximum(right(x, y), left(x, y)))

    def bbox(self):
        return (-1.5, 1.5, -0.5, 0.5)

    def boundary_curves(self, n=512):
        e = self.eps
        bar, right, left = self._pieces()
        xs = np.linspace(-1, 1, n)
        curves = [
            (xs, np.full(n, e)), (xs, np.full(n, -e)),
            _circle_curve(1.0, 0, 0.5, n), _circle_curve(-1.0, 0, 0.5, n),
        ]
        others = [[right, left], [right, left], [bar, left], [bar, right]]
        return _keep_on_union_boundary(curves, others)

    def params_json(self):
        return {"eps": self.eps}

    def kernel(self):
        return KernelDomain(TAG_DUMBBELL, np.array([self.eps]), np.zeros((0, 2)))


@dataclass(frozen=True)
class Strip(Domain):
    """{a_low < Re z < a_high}."""

    a_low: float = 0.0
    a_high: float = 1.0
    tag = "strip"

    def __post_init__(self):
        object.__setattr__(self, "a_low", float(self.a_low))
        object.__setattr__(self, "a_high", float(self.a_high))
        if not self.a_low < self.a_high:
            raise DomainError("strip needs a_low < a_high")

    def margin_xy(self, x, y):
        return np.minimum(x - self.a_low, self.a_high - x) + 0.0 * y

    def bbox(self):
        e = PROBE_EXTENT
        return (self.a_low, self.a_high, -e, e)

    def boundary_curves(self, n=512):
        e = PROBE_EXTENT
        ys = np.linspace(-e, e, n)
        return [(np.full(n, self.a_low), ys), (np.full(n, self.a_high), ys)]

    def params_json(self):
        return {"a_low": self.a_low, "a_high": self.a_high}

    def kernel(self):
        return KernelDomain(TAG_STRIP, np.array([self.a_low, self.a_high]), np.zeros((0, 2)))


def _polygon_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and 0 not in (d1, d2, d3, d4):
        return True
    return False


@dataclass(frozen=True)
class Polygon(Domain):
    """Simple polygon, vertices stored counterclockwise."""

    vertices: Tuple[Point, ...] = ()
    tag = "polygon"

    def __post_init__(self):
        pts = tuple(_as_point(p) for p in self.vertices)
        if len(pts) < 3:
            raise DomainError("polygon needs at least 3 vertices")
        v = np.array([p.as_tuple() for p in pts])
        area = _polygon_area(v)
        if abs(area) <= EPS_GEOM:
            raise DomainError("polygon is degenerate (zero area)")
        if area < 0:
            pts = pts[::-1]
        n = len(pts)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_cross(pts[i].as_tuple(), pts[(i + 1) % n].as_tuple(),
                                   pts[j].as_tuple(), pts[(j + 1) % n].as_tuple()):
                    raise DomainError(f"polygon edges {i} and {j} intersect")
        object.__setattr__(self, "vertices", pts)

    @property
    def array(self) -> np.ndarray:
        return np.array([p.as_tuple() for p in self.vertices])

    @property
    def area(self) -> float:
        return _polygon_area(self.array)

    def edges(self):
        n = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    def margin_xy(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        v = self.array
        inside = np.zeros(np.broadcast(x, y).shape, bool)
        dist = np.full(inside.shape, np.inf)
        n = len(v)
        for i in range(n):
            x1, y1 = v[i]
            x2, y2 = v[(i + 1) % n]
            crosses = (y1 > y) != (y2 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (x < xint)
            ex, ey = x2 - x1, y2 - y1
            t = np.clip(((x - x1) * ex + (y - y1) * ey) / (ex * ex + ey * ey), 0.0, 1.0)
            dist = np.minimum(dist, np.hypot(x - x1 - t * ex, y - y1 - t * ey))
        return np.where(inside, dist, -dist)

    def bbox(self):
        v = self.array
        return (v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max())

    def boundary_curves(self, n=512):
        v = np.vstack([self.array, self.array[:1]])
        per = max(2, n // len(self.vertices))
        xs, ys = [], []
        for i in range(len(self.vertices)):
            t = np.linspace(0, 1, per, endpoint=False)
            xs.append(v[i, 0] + t * (v[i + 1, 0] - v[i, 0]))
            ys.append(v[i, 1] + t * (v[i + 1, 1] - v[i, 1]))
        xs.append(v[:1, 0])
        ys.append(v[:1, 1])
        return [(np.concatenate(xs), np.concatenate(ys))]

    def params_json(self):
        return {"vertices": [[p.x, p.y] for p in self.vertices]}

    def kernel(self):
        return KernelDomain(TAG_POLYGON, np.zeros(1), np.ascontiguousarray(self.array))


@dataclass(frozen=True)
class ConformalImage(Domain):
    """f(base) for a strip ``base`` and a map from the closed catalogue."""

    base: Strip = Strip()
    map: ConformalMapSpec = ConformalMapSpec.square_root()
    tag = "conformal_image"

    def __post_init__(self):
        if not isinstance(self.base, Strip):
            raise DomainError("conformal_image base must be a strip")
        if not isinstance(self.map, ConformalMapSpec):
            raise DomainError("conformal_image map must be a ConformalMapSpec")

    def margin_xy(self, x, y):
        w = np.asarray(x, float) + 1j * np.asarray(y, float)
        z = inverse_complex(self.map, w)
        bad = ~np.isfinite(z)
        z = np.where(bad, 0.5 * (self.base.a_low + self.base.a_high), z)
        mb = self.base.margin_xy(z.real, z.imag)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.sqrt(abs_derivative_sq_complex(self.map, z))
            rho = np.minimum(mb, univalence_radius(self.map, z))
            # Koebe quarter theorem on the disk of radius rho about z.
            m = np.where(mb > 0, g * rho / 4.0, g * mb)
        return np.where(bad | ~np.isfinite(m), -1.0, m)

    def bbox(self):
        xs, ys = self.boundary_points(4096)
        e = PROBE_EXTENT
        return (max(xs.min(), -e), min(xs.max(), e), max(ys.min(), -e), min(ys.max(), e))

    def boundary_curves(self, n=512):
        out = []
        e = PROBE_EXTENT
        for bx, by in self.base.boundary_curves(n):
            by = by * (math.pi / e if self.map.tag == "exponential" else 1.0)
            w = map_complex(self.map, bx + 1j * by)
            ok = np.isfinite(w) & (np.abs(w) < 10 * e)
            out.append((w.real[ok], w.imag[ok]))
        return out

    def params_json(self):
        return {"base": self.base.to_json(), "map": self.map.to_json()}

    def kernel(self):
        return KernelDomain(TAG_CONFORMAL, np.array([self.base.a_low, self.base.a_high]),
                            np.zeros((0, 2)), MAP_IDS[self.map.tag],
                            np.array((list(self.map.params) + [0.0, 0.0, 0.0])[:3]))


def isosceles_triangle(theta: float) -> Polygon:
    """Triangle with vertices -1, 1 and i*tan(theta)."""
    theta = float(theta)
    if not (0 < theta < math.pi / 2):
        raise DomainError("base angle must lie in (0, pi/2)")
    return Polygon((Point(-1.0, 0.0), Point(1.0, 0.0), Point(0.0, math.tan(theta))))


# ------------------------------------------------------------------ module API

def contains(d: Domain, p) -> bool:
    return d.contains(p)


def distance_to_boundary(d: Domain, p) -> float:
    return d.distance_to_boundary(p)


def _req(params: dict, key: str, where: str):
    if key not in params:
        raise DomainError(f"{where}: missing field 'params.{key}'")
    return params[key]


def _num(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _pt(value, where: str) -> Point:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise DomainError(f"{where}: expected [x, y], got {value!r}")
    try:
        return Point(_num(value[0], where + "[0]"), _num(value[1], where + "[1]"))
    except GeometryError as exc:
        raise DomainError(f"{where}: {exc}") from None


def from_json(doc) -> Domain:
    """Build a domain from {"tag": ..., "params": {...}}; errors name the field."""
    if not isinstance(doc, dict):
        raise DomainError("domain document must be a JSON object")
    tag = doc.get("tag")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise DomainError("field 'params' must be an object")
    w = f"tag {tag!r}"
    try:
        if tag == "polygon":
            verts = _req(params, "vertices", w)
            if not isinstance(verts, list):
                raise DomainError(f"{w}: 'params.vertices' must be a list")
            return Polygon(tuple(_pt(v, f"params.vertices[{i}]") for i, v in enumerate(verts)))
        if tag == "isosceles_triangle":
            return isosceles_triangle(_num(_req(params, "theta", w), "params.theta"))
        if tag == "disk":
            return Disk(_pt(params.get("center", [0.0, 0.0]), "params.center"),
                        _num(_req(params, "radius", w), "params.radius"))
        if tag == "half_disk":
            return HalfDisk(_num(params.get("radius", 1.0), "params.radius"))
        if tag == "annulus":
            return Annulus(_num(_req(params, "r_inner", w), "params.r_inner"),
                           _num(_req(params, "r_outer", w), "params.r_outer"))
        if tag == "hyperbolic_region":
            return HyperbolicRegion()
        if tag == "crescent":
            return Crescent(_num(_req(params, "R", w), "params.R"))
        if tag == "dumbbell":
            return Dumbbell(_num(_req(params, "eps", w), "params.eps"))
        if tag == "strip":
            return Strip(_num(_req(params, "a_low", w), "params.a_low"),
                         _num(_req(params, "a_high", w), "params.a_high"))
        if tag == "conformal_image":
            base = from_json(_req(params, "base", w))
            m = _req(params, "map", w)
            if not isinstance(m, dict):
                raise DomainError("field 'params.map' must be an object")
            return ConformalImage(base, ConformalMapSpec.from_json(m))
    except GeometryError as exc:
        raise DomainError(f"{w}: {exc}") from None
    raise DomainError(f"field 'tag': unknown domain tag {tag!r}")


def named_images() -> Sequence[Tuple[Domain, ConformalImage]]:
    """Named domains paired with their strip presentations."""
    return (
        (HyperbolicRegion(), ConformalImage(Strip(0.0, 1.0), ConformalMapSpec.square_root())),
        (Crescent(2.0), ConformalImage(Strip(0.5, 1.0), ConformalMapSpec.reciprocal())),
        (Annulus(1.0, 2.0), ConformalImage(Strip(0.0, math.log(2.0)),
                                           ConformalMapSpec.exponential())),
    )
