"""Rules that rule out regions where a p-th center cannot lie, and their
composition into a candidate region.

Four rules are implemented:

* partial symmetry line: if one side of U folds over L into U, no center
  lies strictly on that side;
* delta-convex symmetry axis: every center lies on the axis;
* circle reflection: if the part of U inside C inverts into U, no center
  lies inside C;
* conformal comparison: for U = f(strip), the image of the strip half where
  |f'| is smaller is excluded.

Polygons are checked exactly with shapely.  Other shapes are checked on
quasi-random probes (2048 boundary points, 10^4 interior points).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import shapely
from scipy.stats import qmc
from shapely import affinity
from shapely.geometry import LineString
from shapely.geometry import Polygon as ShapelyPolygon

from .domain import (
    Annulus,
    ConformalImage,
    Crescent,
    Disk,
    Domain,
    DomainError,
    Dumbbell,
    HalfDisk,
    HyperbolicRegion,
    Polygon,
    Strip,
    PROBE_EXTENT,
)
from .geometry import (
    EPS_GEOM,
    Circle,
    ConformalMapSpec,
    Line,
    Point,
    _as_point,
    abs_derivative_sq_complex,
    circle_through_chord,
    inverse_complex,
    map_complex,
    reflect_over_circle_xy,
    reflect_over_line_xy,
)

N_BOUNDARY_PROBES = 2048
N_INTERIOR_PROBES = 10_000
SWEEP_STEPS = 256  # circle angles k * pi / 256
_REL_TIE = 1e-12
_ON_LINE = 1e-12


class ExclusionError(ValueError):
    """A rule was asked about a line or circle that misses the domain."""


class RuleNotApplicable(ValueError):
    """The rule's hypothesis fails for this input."""


class SymmetricSide(str, Enum):
    NOT_AXIS = "not_axis"
    POSITIVE = "positive"
    NEGATIVE = "negative"
    BOTH = "both"


# ------------------------------------------------------------------ probes

@lru_cache(maxsize=32)
def _halton(n: int) -> np.ndarray:
    # skip the first point, which is the corner (0, 0)
    return qmc.Halton(d=2, scramble=False).random(n + 1)[1:]


def _window(d: Domain):
    # bbox() already clips unbounded shapes to PROBE_EXTENT
    return d.bbox()


def interior_probes(d: Domain, n: int = N_INTERIOR_PROBES, keep=None):
    """About n low-discrepancy points inside d (and inside ``keep`` if given)."""
    x0, x1, y0, y1 = _window(d)
    k = n
    for _ in range(8):
        u = _halton(k)
        x = x0 + (x1 - x0) * u[:, 0]
        y = y0 + (y1 - y0) * u[:, 1]
        m = d.contains_xy(x, y)
        if keep is not None:
            m &= keep(x, y)
        got = int(m.sum())
        if got >= n or k >= 2_000_000:
            break
        k = min(2_000_000, int(k * max(2.0, 1.3 * n / max(got, 1))))
    return x[m][:n], y[m][:n]


def _boundary_probes(d: Domain, n: int = N_BOUNDARY_PROBES):
    if isinstance(d, Polygon):
        # Chebyshev spacing crowds probes near vertices, where reflected
        # edges are most likely to poke out.
        per = max(8, n // len(d.vertices))
        s = 0.5 * (1 - np.cos(np.linspace(0, math.pi, per)))
        xs, ys = [], []
        for p, q in d.edges():
            xs.append(p.x + s * (q.x - p.x))
            ys.append(p.y + s * (q.y - p.y))
        return np.concatenate(xs), np.concatenate(ys)
    return d.boundary_points(n)


# --------------------------------------------------------- excluded regions

@dataclass(frozen=True)
class HalfPlane:
    """Points strictly on one side of a line.  With ``rotations`` the line is
    swept around the origin, which excludes |z| > dist(origin, line)."""

    line: Line
    side: int
    rotations: bool = False

    def mask(self, x, y):
        if self.rotations:
            return np.hypot(x, y) > abs(self.line.c)
        return self.side * self.line.signed_xy(x, y) > 0

    def to_json(self):
        return {"type": "half_plane", "line": self.line.to_json(),
                "side": "positive" if self.side > 0 else "negative",
                "rotations": self.rotations}


@dataclass(frozen=True)
class OffLine:
    """Everything not on the line."""

    line: Line

    def mask(self, x, y):
        return np.abs(self.line.signed_xy(x, y)) > _ON_LINE

    def to_json(self):
        return {"type": "off_line", "line": self.line.to_json()}


@dataclass(frozen=True)
class DiskInterior:
    circle: Circle

    def mask(self, x, y):
        c = self.circle
        return (x - c.center.x) ** 2 + (y - c.center.y) ** 2 < c.radius ** 2

    def to_json(self):
        return {"type": "disk_interior", "circle": self.circle.to_json()}


@dataclass(frozen=True)
class MapImage:
    """f(base ∩ {side * axis > 0}); side 0 means f(base minus the axis)."""

    base: Strip
    map: ConformalMapSpec
    axis: Line
    side: int

    def mask(self, x, y):
        w = np.asarray(x, float) + 1j * np.asarray(y, float)
        with np.errstate(all="ignore"):
            z = inverse_complex(self.map, w)
        ok = np.isfinite(z)
        z = np.where(ok, z, 0.0)
        s = self.axis.signed_xy(z.real, z.imag)
        hit = np.abs(s) > _ON_LINE if self.side == 0 else self.side * s > 0
        return ok & self.base.contains_xy(z.real, z.imag) & hit

    def to_json(self):
        return {"type": "map_image", "base": self.base.to_json(), "map": self.map.to_json(),
                "axis": self.axis.to_json(),
                "side": {1: "positive", -1: "negative", 0: "off_axis"}[self.side]}


# ------------------------------------------------------------ certificates

RULES = ("partial_symmetry_line", "delta_convex_axis", "circle_reflection",
         "conformal_comparison", "antiholomorphic_self_map")


@dataclass(frozen=True)
class ExclusionCertificate:
    rule: str
    excluded: object
    line: Optional[Line] = None
    circle: Optional[Circle] = None
    map: Optional[ConformalMapSpec] = None
    base: Optional[Strip] = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}")

    def excludes_xy(self, x, y):
        return self.excluded.mask(np.asarray(x, float), np.asarray(y, float))

    def excludes(self, p) -> bool:
        p = _as_point(p)
        return bool(self.excludes_xy(p.x, p.y))

    def partner_xy(self, x, y):
        """Point in the surviving region whose moment dominates that of (x, y)."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        ex = self.excluded
        if self.rule in ("circle_reflection", "antiholomorphic_self_map"):
            return reflect_over_circle_xy(x, y, self.circle)
        if self.rule == "delta_convex_axis":
            s = self.line.signed_xy(x, y)
            return x - s * self.line.a, y - s * self.line.b
        if self.rule == "partial_symmetry_line":
            if ex.rotations:
                # reflect across the rotated copy of the line facing (x, y)
                r = np.hypot(x, y)
                d = abs(self.line.c)
                k = np.where(r > 0, (2 * d - r) / np.where(r > 0, r, 1.0), 1.0)
                return x * k, y * k
            return reflect_over_line_xy(x, y, self.line)
        # conformal comparison: mirror in the strip, then map back
        w = x + 1j * y
        z = inverse_complex(self.map, w)
        if ex.side == 0:
            s = ex.axis.signed_xy(z.real, z.imag)
            zx, zy = z.real - s * ex.axis.a, z.imag - s * ex.axis.b
        else:
            zx, zy = reflect_over_line_xy(z.real, z.imag, ex.axis)
        out = map_complex(self.map, zx + 1j * zy)
        return out.real, out.imag

    def support_line(self) -> Optional[Line]:
        """Line that must contain every center, if this rule pins one down."""
        if self.rule == "delta_convex_axis":
            return self.line
        if self.rule == "conformal_comparison" and self.excluded.side == 0:
            ax = self.excluded.axis
            b = self.base
            t = np.linspace(0.1, 0.9, 5)
            zx = b.a_low + t * (b.a_high - b.a_low)
            zy = (-ax.c / ax.b) + 0 * t  # family axes are horizontal
            w = map_complex(self.map, zx + 1j * zy)
            L = Line.through(Point.from_complex(w[0]), Point.from_complex(w[-1]))
            if np.all(np.abs(L.signed_xy(w.real, w.imag)) < 1e-9):
                return L
        return None

    def to_json(self) -> dict:
        params = {}
        if self.line is not None:
            params["line"] = self.line.to_json()
        if self.circle is not None:
            params["circle"] = self.circle.to_json()
        if self.map is not None:
            params["map"] = self.map.to_json()
        if self.base is not None:
            params["base"] = self.base.to_json()
        if self.rule == "partial_symmetry_line":
            params["side"] = "positive" if self.excluded.side > 0 else "negative"
            params["rotations"] = self.excluded.rotations
        return {"rule": self.rule, "params": params, "excluded_region": self.excluded.to_json()}


# ------------------------------------------------------------ rule checks

def _shape(d: Polygon) -> ShapelyPolygon:
    return ShapelyPolygon(d.array)


def _halfplane_shape(L: Line, side: int, size: float) -> ShapelyPolygon:
    q = np.array(L.foot((0.0, 0.0)).as_tuple())
    dvec = np.array(L.direction())
    nvec = side * np.array((L.a, L.b))
    pts = [q - size * dvec, q + size * dvec, q + size * dvec + size * nvec,
           q - size * dvec + size * nvec]
    return ShapelyPolygon(pts)


def _reflect_shape(g, L: Line):
    a, b, c = L.a, L.b, L.c
    return affinity.affine_transform(
        g, [1 - 2 * a * a, -2 * a * b, -2 * a * b, 1 - 2 * b * b, -2 * a * c, -2 * b * c])


def _polygon_size(d: Polygon) -> float:
    v = d.array
    return 10.0 * (1.0 + float(np.abs(v).max()))


def _polygon_sides(d: Polygon, L: Line) -> SymmetricSide:
    P = _shape(d)
    size = _polygon_size(d)
    area_tol = 1e-12 * P.area
    pieces = {s: P.intersection(_halfplane_shape(L, s, size)) for s in (1, -1)}
    if any(pieces[s].area <= area_tol for s in (1, -1)):
        raise ExclusionError("line does not cross the polygon")
    fat = P.buffer(EPS_GEOM, join_style="mitre")
    ok = {s: fat.covers(_reflect_shape(pieces[s], L)) for s in (1, -1)}
    return _side_from(ok[1], ok[-1])


def _side_from(pos: bool, neg: bool) -> SymmetricSide:
    if pos and neg:
        return SymmetricSide.BOTH
    if pos:
        return SymmetricSide.POSITIVE
    if neg:
        return SymmetricSide.NEGATIVE
    return SymmetricSide.NOT_AXIS


def check_partial_symmetry_axis(d: Domain, L: Line) -> SymmetricSide:
    """Which sides of d fold over L into d."""
    if isinstance(d, Polygon):
        return _polygon_sides(d, L)
    ix, iy = interior_probes(d)
    si = L.signed_xy(ix, iy)
    if not (np.any(si > 0) and np.any(si < 0)):
        raise ExclusionError("line does not cross the domain")
    bx, by = _boundary_probes(d)
    sb = L.signed_xy(bx, by)
    ok = {}
    for s in (1, -1):
        x = np.concatenate([bx[s * sb > 0], ix[s * si > 0]])
        y = np.concatenate([by[s * sb > 0], iy[s * si > 0]])
        rx, ry = reflect_over_line_xy(x, y, L)
        ok[s] = bool(np.all(d.margin_xy(rx, ry) > -EPS_GEOM))
    return _side_from(ok[1], ok[-1])


def _perpendicular_sections_connected(d: Polygon, axis: Line) -> bool:
    P = _shape(d)
    size = _polygon_size(d)
    dx, dy = axis.direction()
    q = axis.foot((0.0, 0.0))
    v = d.array
    s = np.unique(np.round((v[:, 0] - q.x) * dx + (v[:, 1] - q.y) * dy, 12))
    mids = 0.5 * (s[1:] + s[:-1])
    for t in mids:
        cx, cy = q.x + t * dx, q.y + t * dy
        cut = LineString([(cx - size * axis.a, cy - size * axis.b),
                          (cx + size * axis.a, cy + size * axis.b)])
        sec = P.intersection(cut)
        if sec.geom_type != "LineString" or sec.is_empty:
            return False
        if sec.distance(shapely.Point(cx, cy)) > EPS_GEOM:
            return False
    return True


def check_delta_convex(d: Domain, axis: Line) -> bool:
    """True if every segment from z to its mirror image stays in d."""
    if check_partial_symmetry_axis(d, axis) is not SymmetricSide.BOTH:
        raise ExclusionError("line is not a symmetry axis of the domain")
    if isinstance(d, Polygon):
        return _perpendicular_sections_connected(d, axis)
    x, y = interior_probes(d)
    rx, ry = reflect_over_line_xy(x, y, axis)
    t = np.linspace(0.0, 1.0, 33)[1:-1, None]
    sx = x[None, :] + t * (rx - x)[None, :]
    sy = y[None, :] + t * (ry - y)[None, :]
    return bool(np.all(d.margin_xy(sx, sy) > -EPS_GEOM))


def _inside_circle(C: Circle):
    return lambda x, y: (x - C.center.x) ** 2 + (y - C.center.y) ** 2 < C.radius ** 2


def check_circle_reflection(d: Domain, C: Circle) -> bool:
    """True if inverting the part of d inside C lands in d outside C."""
    inside = _inside_circle(C)
    x, y = interior_probes(d, N_BOUNDARY_PROBES, keep=inside)
    if len(x) == 0:
        raise ExclusionError("circle does not meet the domain")
    bx, by = _boundary_probes(d, 8 * N_BOUNDARY_PROBES)
    k = inside(bx, by)
    # dense sample of the boundary arcs that actually sit inside C
    x = np.concatenate([x, bx[k]])
    y = np.concatenate([y, by[k]])
    rx, ry = reflect_over_circle_xy(x, y, C)
    outside = (rx - C.center.x) ** 2 + (ry - C.center.y) ** 2 >= C.radius ** 2 * (1 - 1e-12)
    return bool(np.all(d.margin_xy(rx, ry) > -EPS_GEOM) and np.all(outside))


def check_self_inversion(d: Domain, C: Circle) -> bool:
    """True if inversion in C maps d into itself (an antiholomorphic self-map)."""
    x, y = interior_probes(d)
    bx, by = _boundary_probes(d)
    x = np.concatenate([x, bx])
    y = np.concatenate([y, by])
    rx, ry = reflect_over_circle_xy(x, y, C)
    return bool(np.all(d.margin_xy(rx, ry) > -EPS_GEOM))


def _strip_axis_kind(base: Strip, axis: Line) -> str:
    if abs(axis.a) < 1e-12:
        return "horizontal"
    mid = 0.5 * (base.a_low + base.a_high)
    if abs(axis.b) < 1e-12 and abs(-axis.c / axis.a - mid) < EPS_GEOM:
        return "vertical"
    raise ExclusionError("axis is not a symmetry axis of the strip")


def _compare_sides(base: Strip, f: ConformalMapSpec, axis: Line, kind: str) -> int:
    """+1 if |f'| is weakly larger on the positive side, -1 if on the negative
    side, 0 on an exact tie; raises when neither side dominates."""
    u = _halton(N_BOUNDARY_PROBES)
    e = PROBE_EXTENT
    if kind == "vertical":
        mid = -axis.c / axis.a
        x = mid + (base.a_high - mid) * u[:, 0]
        y = -e + 2 * e * u[:, 1]
    else:
        y0 = -axis.c / axis.b
        x = base.a_low + (base.a_high - base.a_low) * u[:, 0]
        y = y0 + e * u[:, 1]
    # orient the probes to the positive side of the axis
    fx, fy = reflect_over_line_xy(x, y, axis)
    neg = axis.signed_xy(x, y) < 0
    x, y = np.where(neg, fx, x), np.where(neg, fy, y)
    rx, ry = reflect_over_line_xy(x, y, axis)
    with np.errstate(all="ignore"):
        g1 = abs_derivative_sq_complex(f, x + 1j * y)
        g2 = abs_derivative_sq_complex(f, rx + 1j * ry)
    ok = np.isfinite(g1) & np.isfinite(g2)
    rel = (g1[ok] - g2[ok]) / np.maximum(np.maximum(g1[ok], g2[ok]), 1e-300)
    if np.all(np.abs(rel) <= _REL_TIE):
        return 0
    if np.all(rel >= -_REL_TIE):
        return 1
    if np.all(rel <= _REL_TIE):
        return -1
    raise RuleNotApplicable("|f'| is larger on different sides at different points")


def conformal_comparison_excludes(base: Strip, f: ConformalMapSpec, axis: Line) -> ExclusionCertificate:
    """Certificate excluding the image of the strip half where |f'| is smaller.

    On an exact tie across a horizontal axis, every parallel horizontal line
    is tried as well; if each keeps the side facing the axis, everything off
    the axis image is excluded.
    """
    if not isinstance(base, Strip):
        raise ExclusionError("conformal comparison needs a strip base")
    kind = _strip_axis_kind(base, axis)
    s = _compare_sides(base, f, axis, kind)
    if s != 0:
        ex = MapImage(base, f, axis, -s)
        return ExclusionCertificate("conformal_comparison", ex, line=axis, map=f, base=base)
    if kind != "horizontal":
        raise RuleNotApplicable("|f'| is symmetric about the axis")
    y0 = -axis.c / axis.b
    for off in np.concatenate([-np.geomspace(1e-3, PROBE_EXTENT, 24),
                               np.geomspace(1e-3, PROBE_EXTENT, 24)]):
        Ls = Line.horizontal(y0 + off)
        toward = -1 if off > 0 else 1  # side of Ls facing the original axis
        if _compare_sides(base, f, Ls, "horizontal") != toward:
            raise RuleNotApplicable("parallel axes do not all favour the central axis")
    ex = MapImage(base, f, axis, 0)
    return ExclusionCertificate("conformal_comparison", ex, line=axis, map=f, base=base)


# ------------------------------------------------------------ certificate builders

def _line_cert(d: Domain, L: Line, rotations: bool = False) -> List[ExclusionCertificate]:
    side = check_partial_symmetry_axis(d, L)
    out = []
    if side is SymmetricSide.BOTH:
        if check_delta_convex(d, L):
            out.append(ExclusionCertificate("delta_convex_axis", OffLine(L), line=L))
    elif side in (SymmetricSide.POSITIVE, SymmetricSide.NEGATIVE):
        s = 1 if side is SymmetricSide.POSITIVE else -1
        out.append(ExclusionCertificate("partial_symmetry_line", HalfPlane(L, s, rotations), line=L))
    return out


def _circle_cert(d: Domain, C: Circle) -> List[ExclusionCertificate]:
    if check_circle_reflection(d, C):
        return [ExclusionCertificate("circle_reflection", DiskInterior(C), circle=C)]
    return []


def _comparison_certs(base: Strip, f: ConformalMapSpec) -> List[ExclusionCertificate]:
    out = []
    for axis in (Line.horizontal(0.0), Line.vertical(0.5 * (base.a_low + base.a_high))):
        try:
            out.append(conformal_comparison_excludes(base, f, axis))
        except RuleNotApplicable:
            pass
    return out


def _named_certificates(d: Domain) -> List[ExclusionCertificate]:
    if isinstance(d, Disk):
        c = d.center
        return _line_cert(d, Line.vertical(c.x)) + _line_cert(d, Line.horizontal(c.y))
    if isinstance(d, HalfDisk):
        r = d.radius
        return (_line_cert(d, Line.vertical(0.0)) + _line_cert(d, Line.horizontal(r / 2))
                + _circle_cert(d, Circle(Point(0.0, -r), r * math.sqrt(2.0))))
    if isinstance(d, Annulus):
        r, R = d.r_inner, d.r_outer
        C = Circle(Point(0.0, 0.0), math.sqrt(r * R))
        out = []
        if check_self_inversion(d, C):
            out.append(ExclusionCertificate("antiholomorphic_self_map", DiskInterior(C), circle=C))
        out += _comparison_certs(Strip(math.log(r), math.log(R)), ConformalMapSpec.exponential())
        out += _line_cert(d, Line.vertical((R + r) / 2), rotations=True)
        return out
    if isinstance(d, HyperbolicRegion):
        return (_comparison_certs(Strip(0.0, 1.0), ConformalMapSpec.square_root())
                + _line_cert(d, Line.vertical(0.5)))
    if isinstance(d, Crescent):
        R = d.R
        return (_comparison_certs(Strip(1.0 / R, 1.0), ConformalMapSpec.reciprocal())
                + _line_cert(d, Line.vertical((R + 1) / 2)))
    if isinstance(d, Dumbbell):
        out = _line_cert(d, Line.horizontal(0.0)) + _line_cert(d, Line.vertical(0.0))
        return out + _line_cert(d, Line.vertical(1.0)) + _line_cert(d, Line.vertical(-1.0))
    if isinstance(d, Strip):
        return _line_cert(d, Line.vertical(0.5 * (d.a_low + d.a_high)))
    if isinstance(d, ConformalImage):
        return _comparison_certs(d.base, d.map)
    raise DomainError(f"no rule catalogue for {d.tag}")


def _same_line(L1: Line, L2: Line) -> bool:
    return abs(L1.a - L2.a) < 1e-9 and abs(L1.b - L2.b) < 1e-9 and abs(L1.c - L2.c) < 1e-9


def _polygon_candidate_lines(d: Polygon) -> List[Line]:
    v = d.array
    n = len(v)
    lines: List[Line] = []

    def add(L):
        if not any(_same_line(L, M) for M in lines):
            lines.append(L)

    for i in range(n):
        for j in range(i + 1, n):
            add(Line.perpendicular_bisector(Point(*v[i]), Point(*v[j])))
    for i in range(n):
        p, a, b = v[i], v[i - 1], v[(i + 1) % n]
        u1 = (a - p) / np.hypot(*(a - p))
        u2 = (b - p) / np.hypot(*(b - p))
        w = u1 + u2
        if np.hypot(*w) < 1e-12:  # straight angle
            w = np.array((-u1[1], u1[0]))
        add(Line.through(Point(*p), Point(*(p + w))))
    return lines


def _interior_angle(d: Polygon, i: int) -> float:
    v = d.array
    n = len(v)
    p, a, b = v[i], v[i - 1], v[(i + 1) % n]
    # vertices are CCW, so the interior sits to the left of each edge
    t1 = math.atan2(*(b - p)[::-1])
    t0 = math.atan2(*(a - p)[::-1])
    return (t0 - t1) % (2 * math.pi)


def _polygon_circle_certs(d: Polygon, axes: Sequence[Line]) -> List[ExclusionCertificate]:
    v = d.array
    n = len(v)
    out = []
    for axis in axes:
        for i in range(n):
            j = (i + 1) % n
            rx, ry = reflect_over_line_xy(v[i, 0], v[i, 1], axis)
            if abs(rx - v[j, 0]) > EPS_GEOM or abs(ry - v[j, 1]) > EPS_GEOM:
                continue
            # sweep the grid plus the angles that make the reflected edge
            # tangent to its neighbours
            angles = {k * math.pi / SWEEP_STEPS for k in range(1, SWEEP_STEPS)}
            angles |= {0.5 * _interior_angle(d, i), 0.5 * _interior_angle(d, j)}
            best = None
            for a in sorted(a for a in angles if 0 < a < math.pi):
                C = circle_through_chord(Point(*v[i]), Point(*v[j]), a)
                try:
                    good = check_circle_reflection(d, C)
                except ExclusionError:
                    good = False
                if not good:
                    break
                best = C
            if best is not None:
                out.append(ExclusionCertificate("circle_reflection", DiskInterior(best), circle=best))
    return out


def _polygon_certificates(d: Polygon) -> List[ExclusionCertificate]:
    certs = []
    for L in _polygon_candidate_lines(d):
        try:
            certs += _line_cert(d, L)
        except ExclusionError:
            continue
    axes = [c.line for c in certs if c.rule == "delta_convex_axis"]
    independent = any(not a.is_parallel(b) for a in axes for b in axes)
    if axes and not independent:
        certs += _polygon_circle_certs(d, axes)
    return certs


# ------------------------------------------------------------ regions

@dataclass(frozen=True)
class CandidateRegion:
    """Where the p-th centers can still be.

    kind is "segment" (possibly a single point), "annular_band" (centered at
    the origin), "polygonal", "line" (an unbounded axis) or "domain" (no rule
    applied).
    """

    kind: str
    certificates: Tuple[ExclusionCertificate, ...] = ()
    p0: Optional[Point] = None
    p1: Optional[Point] = None
    r_low: Optional[float] = None
    r_high: Optional[float] = None
    line: Optional[Line] = None
    polygons: Tuple[Tuple[Point, ...], ...] = ()
    domain: Optional[Domain] = field(default=None, compare=False)

    @property
    def is_point(self) -> bool:
        return self.kind == "segment" and self.p0 == self.p1

    @property
    def is_1d(self) -> bool:
        return self.kind in ("segment", "annular_band")

    def param_range(self) -> Tuple[float, float]:
        if self.kind == "segment":
            return 0.0, 1.0
        if self.kind == "annular_band":
            return self.r_low, self.r_high
        raise ValueError(f"{self.kind} region has no 1-D parametrization")

    def point_at(self, t: float) -> Point:
        if self.kind == "segment":
            return Point(self.p0.x + t * (self.p1.x - self.p0.x),
                         self.p0.y + t * (self.p1.y - self.p0.y))
        if self.kind == "annular_band":
            return Point(t, 0.0)
        raise ValueError(f"{self.kind} region has no 1-D parametrization")

    def contains(self, p, tol: float = 1e-9) -> bool:
        p = _as_point(p)
        if self.kind == "segment":
            ax, ay = self.p0.as_tuple()
            bx, by = self.p1.as_tuple()
            ex, ey = bx - ax, by - ay
            L2 = ex * ex + ey * ey
            t = 0.0 if L2 == 0 else min(1.0, max(0.0, ((p.x - ax) * ex + (p.y - ay) * ey) / L2))
            return math.hypot(p.x - ax - t * ex, p.y - ay - t * ey) <= tol
        if self.kind == "annular_band":
            return self.r_low - tol <= math.hypot(p.x, p.y) <= self.r_high + tol
        if self.kind == "line":
            return abs(self.line.signed(p)) <= tol
        if self.kind == "polygonal":
            return any(ShapelyPolygon([q.as_tuple() for q in ring]).buffer(tol).covers(
                shapely.Point(p.x, p.y)) for ring in self.polygons)
        return self.domain is None or self.domain.contains(p)

    def to_json(self) -> dict:
        doc = {"kind": self.kind}
        if self.kind == "segment":
            doc["endpoints"] = [list(self.p0.as_tuple()), list(self.p1.as_tuple())]
            doc["is_point"] = self.is_point
        elif self.kind == "annular_band":
            doc["center"] = [0.0, 0.0]
            doc["r_low"] = self.r_low
            doc["r_high"] = self.r_high
        elif self.kind == "line":
            doc["line"] = self.line.to_json()
        elif self.kind == "polygonal":
            doc["polygons"] = [[list(q.as_tuple()) for q in ring] for ring in self.polygons]
        if self.domain is not None:
            doc["domain"] = self.domain.to_json()
        doc["certificates"] = [c.to_json() for c in self.certificates]
        return doc


def _kept(d: Domain, certs):
    def f(x, y):
        m = d.contains_xy(x, y)
        for c in certs:
            m &= ~c.excludes_xy(x, y)
        return m
    return f


def _kept_interval(kept, pt, t0: float, t1: float, n: int = 8193):
    """Hull of {t in [t0, t1]: kept(pt(t))}, edges refined by bisection.
    Returns None when nothing is kept; flags whether an end of the window
    was reached."""
    t = np.linspace(t0, t1, n)
    m = kept(*pt(t))
    idx = np.flatnonzero(m)
    if len(idx) == 0:
        return None

    def refine(a, b):  # kept(a) != kept(b); return the crossing
        ka = bool(kept(*pt(np.array([a]))))
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid in (a, b):
                break
            if bool(kept(*pt(np.array([mid])))) == ka:
                a = mid
            else:
                b = mid
        return b if not ka else a

    i, j = idx[0], idx[-1]
    lo = t[0] if i == 0 else refine(t[i], t[i - 1])
    hi = t[-1] if j == n - 1 else refine(t[j], t[j + 1])
    return lo, hi, (i == 0 or j == n - 1)


def _window_radius(d: Domain) -> float:
    x0, x1, y0, y1 = _window(d)
    return math.hypot(max(abs(x0), abs(x1)), max(abs(y0), abs(y1))) + 1.0


def region_from_certificates(d: Domain, certs: Sequence[ExclusionCertificate]) -> CandidateRegion:
    """Intersect the complements of the excluded regions with d."""
    certs = tuple(certs)
    kept = _kept(d, certs)
    if not certs:
        return CandidateRegion("domain", certs, domain=d)

    if isinstance(d, Annulus):
        def ray(t):
            return t, np.zeros_like(t)
        got = _kept_interval(kept, ray, d.r_inner, d.r_outer)
        if got is None:
            raise RuntimeError("exclusions cover the whole annulus")
        return CandidateRegion("annular_band", certs, r_low=got[0], r_high=got[1], domain=d)

    axes: List[Line] = []
    for c in certs:
        L = c.support_line()
        if L is not None and not any(_same_line(L, M) for M in axes):
            axes.append(L)
    for a in axes:
        for b in axes:
            if not a.is_parallel(b):
                p = a.intersect(b)
                p = Point(p.x + 0.0, p.y + 0.0)
                return CandidateRegion("segment", certs, p0=p, p1=p, domain=d)
    if axes:
        L = axes[0]
        q = L.foot((0.0, 0.0))
        dx, dy = L.direction()
        T = _window_radius(d)

        def along(t):
            return q.x + t * dx, q.y + t * dy

        got = _kept_interval(kept, along, -T, T)
        if got is None:
            raise RuntimeError("exclusions cover the whole axis")
        lo, hi, open_end = got
        if open_end:
            return CandidateRegion("line", certs, line=L, domain=d)
        a, b = (Point(*(float(v) + 0.0 for v in along(t))) for t in (lo, hi))
        a, b = sorted((a, b), key=lambda p: (p.x, p.y))
        return CandidateRegion("segment", certs, p0=a, p1=b, domain=d)

    if isinstance(d, Polygon):
        region = _shape(d)
        size = _polygon_size(d)
        for c in certs:
            ex = c.excluded
            if isinstance(ex, HalfPlane):
                region = region.difference(_halfplane_shape(ex.line, ex.side, size))
            elif isinstance(ex, DiskInterior):
                C = ex.circle
                region = region.difference(shapely.Point(C.center.x, C.center.y).buffer(
                    C.radius, quad_segs=256))
        geoms = getattr(region, "geoms", [region])
        rings = tuple(tuple(Point(*xy) for xy in g.exterior.coords[:-1])
                      for g in geoms if not g.is_empty)
        return CandidateRegion("polygonal", certs, polygons=rings, domain=d)
    return CandidateRegion("domain", certs, domain=d)


def certificates_for(d: Domain) -> List[ExclusionCertificate]:
    if isinstance(d, Polygon):
        return _polygon_certificates(d)
    return _named_certificates(d)


def localize(d: Domain) -> CandidateRegion:
    """Smallest candidate region the rule catalogue can certify for d."""
    return region_from_certificates(d, certificates_for(d))


def support_region(d: Domain) -> CandidateRegion:
    """The region certified by the axis-type rules alone (before trimming by
    half-planes and disks): for most named domains, the whole axis chord."""
    return region_from_certificates(d, [c for c in certificates_for(d)
                                        if c.support_line() is not None])
