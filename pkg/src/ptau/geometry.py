"""Plane geometry: points, lines, circles, reflections and the closed set of
conformal maps used to transport Brownian motion between domains.

Everything here is immutable.  Coordinates are float64; coincidence tests
use the absolute tolerance ``EPS_GEOM``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

EPS_GEOM = 1e-9


class GeometryError(ValueError):
    """Raised for singular or out-of-range geometric input."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"non-finite point ({x}, {y})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_complex(cls, z: complex) -> "Point":
        return cls(z.real, z.imag)

    def __complex__(self) -> complex:
        return complex(self.x, self.y)

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def dist(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def _as_point(p) -> Point:
    if isinstance(p, Point):
        return p
    if isinstance(p, complex):
        return Point.from_complex(p)
    return Point(*p)


@dataclass(frozen=True)
class Line:
    """The line a*x + b*y + c = 0, normalized so that a**2 + b**2 == 1 and the
    first nonzero of (a, b) is positive."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = float(self.a), float(self.b), float(self.c)
        n = math.hypot(a, b)
        if n == 0.0 or not math.isfinite(n) or not math.isfinite(c):
            raise GeometryError("degenerate line coefficients")
        a, b, c = a / n, b / n, c / n
        if a < 0 or (a == 0 and b < 0):
            a, b, c = -a, -b, -c
        # avoid signed zeros so equal lines compare equal
        object.__setattr__(self, "a", a + 0.0)
        object.__setattr__(self, "b", b + 0.0)
        object.__setattr__(self, "c", c + 0.0)

    @classmethod
    def through(cls, p, q) -> "Line":
        p, q = _as_point(p), _as_point(q)
        dx, dy = q.x - p.x, q.y - p.y
        if math.hypot(dx, dy) < EPS_GEOM:
            raise GeometryError("coincident points do not define a line")
        return cls(dy, -dx, dx * p.y - dy * p.x)

    @classmethod
    def horizontal(cls, y0: float) -> "Line":
        return cls(0.0, 1.0, -y0)

    @classmethod
    def vertical(cls, x0: float) -> "Line":
        return cls(1.0, 0.0, -x0)

    @classmethod
    def perpendicular_bisector(cls, p, q) -> "Line":
        p, q = _as_point(p), _as_point(q)
        dx, dy = q.x - p.x, q.y - p.y
        if math.hypot(dx, dy) < EPS_GEOM:
            raise GeometryError("coincident points have no bisector")
        mx, my = (p.x + q.x) / 2, (p.y + q.y) / 2
        return cls(dx, dy, -(dx * mx + dy * my))

    def signed(self, p) -> float:
        p = _as_point(p)
        return self.a * p.x + self.b * p.y + self.c

    def signed_xy(self, x, y):
        return self.a * x + self.b * y + self.c

    def direction(self) -> Tuple[float, float]:
        return (-self.b, self.a)

    def foot(self, p) -> Point:
        """Orthogonal projection of p onto the line."""
        s = self.signed(p)
        p = _as_point(p)
        return Point(p.x - s * self.a, p.y - s * self.b)

    def contains(self, p, tol: float = EPS_GEOM) -> bool:
        return abs(self.signed(p)) <= tol

    def intersect(self, other: "Line") -> Point:
        det = self.a * other.b - self.b * other.a
        if abs(det) < EPS_GEOM:
            raise GeometryError("parallel lines")
        x = (self.b * other.c - self.c * other.b) / det
        y = (self.c * other.a - self.a * other.c) / det
        return Point(x, y)

    def is_parallel(self, other: "Line", tol: float = EPS_GEOM) -> bool:
        return abs(self.a * other.b - self.b * other.a) < tol

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c}


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        r = float(self.radius)
        if not (r > 0 and math.isfinite(r)):
            raise GeometryError(f"circle radius must be positive, got {r}")
        object.__setattr__(self, "radius", r)

    def power(self, p) -> float:
        """Signed |p - c| - R: negative inside, positive outside."""
        return _as_point(p).dist(self.center) - self.radius

    def inside(self, p) -> bool:
        return self.power(p) < 0

    def to_json(self) -> dict:
        return {"center": [self.center.x, self.center.y], "radius": self.radius}


def reflect_over_line(p, L: Line) -> Point:
    p = _as_point(p)
    s = L.signed(p)
    return Point(p.x - 2 * s * L.a, p.y - 2 * s * L.b)


def reflect_over_line_xy(x, y, L: Line):
    """Vectorized reflection of coordinate arrays."""
    s = L.a * x + L.b * y + L.c
    return x - 2 * s * L.a, y - 2 * s * L.b


def reflect_over_circle(p, C: Circle) -> Point:
    """Inversion z -> z0 + R^2 / conj(z - z0)."""
    p = _as_point(p)
    w = complex(p) - complex(C.center)
    if abs(w) < EPS_GEOM:
        raise GeometryError("the center of a circle has no image under inversion")
    return Point.from_complex(complex(C.center) + C.radius ** 2 / w.conjugate())


def reflect_over_circle_xy(x, y, C: Circle):
    dx, dy = x - C.center.x, y - C.center.y
    r2 = dx * dx + dy * dy
    k = C.radius ** 2 / r2
    return C.center.x + k * dx, C.center.y + k * dy


def circle_through_symmetric_base(angle: float) -> Circle:
    """Circle through -1 and 1 crossing the real axis at ``angle``.

    For angle < pi/2 the center sits below the real axis, so only a cap of
    height (1 - cos angle)/sin angle pokes into the upper half-plane.
    """
    angle = float(angle)
    if not (0.0 < angle < math.pi):
        raise GeometryError("angle must lie in (0, pi)")
    return Circle(Point(0.0, -math.cos(angle) / math.sin(angle)), 1.0 / math.sin(angle))


def circle_through_chord(p, q, angle: float) -> Circle:
    """Circle through p and q meeting the segment pq at ``angle``, bulging to the
    left of the direction p -> q.  Generalizes circle_through_symmetric_base."""
    p, q = _as_point(p), _as_point(q)
    half = p.dist(q) / 2
    if half < EPS_GEOM:
        raise GeometryError("chord endpoints coincide")
    if not (0.0 < angle < math.pi):
        raise GeometryError("angle must lie in (0, pi)")
    ux, uy = (q.x - p.x) / (2 * half), (q.y - p.y) / (2 * half)
    nx, ny = -uy, ux  # left normal
    mx, my = (p.x + q.x) / 2, (p.y + q.y) / 2
    off = -half * math.cos(angle) / math.sin(angle)
    return Circle(Point(mx + off * nx, my + off * ny), half / math.sin(angle))


# ---------------------------------------------------------------- conformal maps

MAP_TAGS = ("square_root", "reciprocal", "exponential", "mobius_disk_to_circle", "affine")


@dataclass(frozen=True)
class ConformalMapSpec:
    """One of a closed set of holomorphic maps with exact derivative formulas.

    ``params`` holds the tag's parameters: mobius_disk_to_circle carries
    (z0.x, z0.y, R) and affine carries (scale, shift.x, shift.y).
    """

    tag: str
    params: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.tag not in MAP_TAGS:
            raise GeometryError(f"unknown map tag {self.tag!r}")
        params = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", params)
        want = {"mobius_disk_to_circle": 3, "affine": 3}.get(self.tag, 0)
        if len(params) != want:
            raise GeometryError(f"{self.tag} takes {want} parameters, got {len(params)}")
        if not all(math.isfinite(v) for v in params):
            raise GeometryError("non-finite map parameter")
        if self.tag == "mobius_disk_to_circle" and not params[2] > 0:
            raise GeometryError("mobius_disk_to_circle needs R > 0")
        if self.tag == "affine" and params[0] == 0:
            raise GeometryError("affine scale must be nonzero")

    @classmethod
    def square_root(cls):
        return cls("square_root")

    @classmethod
    def reciprocal(cls):
        return cls("reciprocal")

    @classmethod
    def exponential(cls):
        return cls("exponential")

    @classmethod
    def mobius_disk_to_circle(cls, z0, R: float):
        z0 = _as_point(z0)
        return cls("mobius_disk_to_circle", (z0.x, z0.y, R))

    @classmethod
    def affine(cls, scale: float, shift=(0.0, 0.0)):
        shift = _as_point(shift)
        return cls("affine", (scale, shift.x, shift.y))

    @property
    def singularity(self):
        """Finite singular point of the map, or None."""
        if self.tag in ("square_root", "reciprocal"):
            return 0j
        if self.tag == "mobius_disk_to_circle":
            return 1j
        return None

    def to_json(self) -> dict:
        return {"tag": self.tag, "params": list(self.params)}

    @classmethod
    def from_json(cls, doc: dict) -> "ConformalMapSpec":
        if not isinstance(doc, dict) or not isinstance(doc.get("tag"), str):
            raise GeometryError("map needs a string field 'tag'")
        params = doc.get("params", ())
        if not isinstance(params, (list, tuple)):
            raise GeometryError("map field 'params' must be a list")
        return cls(doc["tag"], tuple(params))


def _check_regular(f: ConformalMapSpec, z: complex):
    s = f.singularity
    if s is not None and abs(z - s) < EPS_GEOM:
        raise GeometryError(f"{f.tag} is singular at {z}")


def eval_map(f: ConformalMapSpec, p) -> Point:
    z = complex(_as_point(p))
    _check_regular(f, z)
    return Point.from_complex(complex(map_complex(f, np.asarray(z))))


def eval_abs_derivative_sq(f: ConformalMapSpec, p) -> float:
    z = complex(_as_point(p))
    _check_regular(f, z)
    return float(abs_derivative_sq_complex(f, np.asarray(z)))


def map_complex(f: ConformalMapSpec, z):
    z = np.asarray(z, dtype=complex)
    if f.tag == "square_root":
        return np.sqrt(z)
    if f.tag == "reciprocal":
        return 1.0 / z
    if f.tag == "exponential":
        return np.exp(z)
    if f.tag == "mobius_disk_to_circle":
        z0 = complex(f.params[0], f.params[1])
        return z0 + f.params[2] * (z + 1j) / (z - 1j)
    scale, sx, sy = f.params
    return scale * z + complex(sx, sy)


def abs_derivative_sq_complex(f: ConformalMapSpec, z):
    z = np.asarray(z, dtype=complex)
    if f.tag == "square_root":
        return 1.0 / (4.0 * np.abs(z))
    if f.tag == "reciprocal":
        return 1.0 / np.abs(z) ** 4
    if f.tag == "exponential":
        return np.exp(2.0 * z.real)
    if f.tag == "mobius_disk_to_circle":
        return (2.0 * f.params[2]) ** 2 / np.abs(z - 1j) ** 4
    return np.full(z.shape, f.params[0] ** 2)


def inverse_complex(f: ConformalMapSpec, w):
    """A right inverse of the map on its image.  Points outside the image
    (for square_root: Re w <= 0 apart from the positive imaginary axis)
    come back as nan."""
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        if f.tag == "square_root":
            ok = (w.real > 0) | ((w.real == 0) & (w.imag >= 0))
            return np.where(ok, w * w, np.nan)
        if f.tag == "reciprocal":
            return 1.0 / w
        if f.tag == "exponential":
            return np.log(w)
        if f.tag == "mobius_disk_to_circle":
            z0 = complex(f.params[0], f.params[1])
            R = f.params[2]
            return 1j * (w - z0 + R) / (w - z0 - R)
        scale, sx, sy = f.params
        return (w - complex(sx, sy)) / scale


def univalence_radius(f: ConformalMapSpec, z):
    """Radius of a disk around z on which the map is certainly one-to-one."""
    z = np.asarray(z, dtype=complex)
    if f.tag == "exponential":
        return np.full(z.shape, math.pi)
    s = f.singularity
    if s is None:
        return np.full(z.shape, np.inf)
    return np.abs(z - s)
