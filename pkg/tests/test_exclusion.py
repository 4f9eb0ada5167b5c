import json
import math

import numpy as np
import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st

from ptau.analysis import triangle_bounds
from ptau.domain import (
    Annulus,
    ConformalImage,
    Crescent,
    Disk,
    Dumbbell,
    HalfDisk,
    HyperbolicRegion,
    Polygon,
    Strip,
    isosceles_triangle,
)
from ptau.exclusion import (
    RULES,
    ExclusionError,
    RuleNotApplicable,
    SymmetricSide,
    certificates_for,
    check_circle_reflection,
    check_delta_convex,
    check_partial_symmetry_axis,
    check_self_inversion,
    conformal_comparison_excludes,
    interior_probes,
    localize,
    region_from_certificates,
    support_region,
)
from ptau.geometry import Circle, ConformalMapSpec, Line, circle_through_symmetric_base
from ptau.sampler import SimConfig, coupled_exit_times, exit_times, moment_from_times

SQUARE = Polygon(((-1, -1), (1, -1), (1, 1), (-1, 1)))
EQUILATERAL = isosceles_triangle(math.pi / 3)
RHOMBUS = Polygon(((-2, 0), (0, -1), (2, 0), (0, 1)))
TRIANGLE = isosceles_triangle(math.pi / 4)


# ------------------------------------------------------------ rule checks

def test_square_diagonal_slope_two_is_not_axis():
    assert check_partial_symmetry_axis(SQUARE, Line(2.0, -1.0, 0.0)) is SymmetricSide.NOT_AXIS


def test_square_true_axes():
    for L in (Line.vertical(0), Line.horizontal(0), Line(1, -1, 0), Line(1, 1, 0)):
        assert check_partial_symmetry_axis(SQUARE, L) is SymmetricSide.BOTH


@pytest.mark.parametrize("L", [Line.vertical(0.3), Line.horizontal(-0.6), Line(1, 2, 0.4),
                               Line(3, -1, -0.2)])
def test_disk_chords_are_axes(L):
    side = check_partial_symmetry_axis(Disk(), L)
    assert side is not SymmetricSide.NOT_AXIS
    # the cap away from the center (whose signed distance is c) folds in
    want = SymmetricSide.POSITIVE if L.c < 0 else SymmetricSide.NEGATIVE
    assert side is want


def test_half_disk_horizontal_line():
    assert check_partial_symmetry_axis(HalfDisk(1.0), Line.horizontal(0.5)) is SymmetricSide.POSITIVE
    assert check_partial_symmetry_axis(HalfDisk(1.0), Line.vertical(0.0)) is SymmetricSide.BOTH


def test_line_missing_domain_raises():
    with pytest.raises(ExclusionError):
        check_partial_symmetry_axis(Disk(), Line.vertical(3.0))


def test_dumbbell_delta_convexity():
    d = Dumbbell(0.1)
    assert not check_delta_convex(d, Line.vertical(0.0))
    assert check_delta_convex(d, Line.horizontal(0.0))
    with pytest.raises(ExclusionError):
        check_delta_convex(d, Line.horizontal(0.05))


@st.composite
def symmetric_convex_polygons(draw):
    pts = draw(st.lists(st.tuples(st.floats(0.05, 3), st.floats(-3, 3)), min_size=2, max_size=8))
    hull = shapely.MultiPoint(pts + [(-x, y) for x, y in pts]).convex_hull
    if hull.geom_type != "Polygon" or hull.area < 1e-2:
        return None
    ring = [(x, y) for x, y in hull.exterior.coords[:-1]]
    # mirror the right half exactly so the axis is exact in floating point
    right = [(x, y) for x, y in ring if x > 1e-12]
    on_axis = [(0.0, y) for x, y in ring if abs(x) <= 1e-12]
    pts = right + [(-x, y) for x, y in right] + on_axis
    hull = shapely.MultiPoint(pts).convex_hull
    return Polygon(tuple(hull.exterior.coords[:-1]))


@settings(max_examples=40, deadline=None)
@given(symmetric_convex_polygons())
def test_convex_symmetric_polygons_are_delta_convex(d):
    if d is None:
        return
    L = Line.vertical(0.0)
    assert check_partial_symmetry_axis(d, L) is SymmetricSide.BOTH
    assert check_delta_convex(d, L)


def test_circle_reflection_examples():
    assert check_circle_reflection(HalfDisk(1.0), Circle((0, -1), math.sqrt(2)))
    assert check_circle_reflection(TRIANGLE, circle_through_symmetric_base(math.pi / 8))
    assert not check_circle_reflection(HalfDisk(1.0), Circle((0, -1), 2.0))
    with pytest.raises(ExclusionError):
        check_circle_reflection(HalfDisk(1.0), Circle((5, 5), 1.0))


def test_self_inversion():
    assert check_self_inversion(Annulus(1.0, 4.0), Circle((0, 0), 2.0))
    assert not check_self_inversion(Annulus(1.0, 4.0), Circle((0, 0), 1.5))


def test_comparison_sqrt_real_axis():
    cert = conformal_comparison_excludes(Strip(0.0, 1.0), ConformalMapSpec.square_root(), Line.horizontal(0))
    assert cert.rule == "conformal_comparison"
    assert cert.excludes((0.8, 0.1)) and cert.excludes((0.7, -0.3))
    assert not cert.excludes((0.8, 0.0))
    assert cert.support_line() == Line.horizontal(0.0)


def test_comparison_sqrt_vertical_axis():
    cert = conformal_comparison_excludes(Strip(0.0, 1.0), ConformalMapSpec.square_root(),
                                         Line.vertical(0.5))
    x, y = interior_probes(HyperbolicRegion(), 2000)
    np.testing.assert_array_equal(cert.excludes_xy(x, y), x * x - y * y > 0.5)


def test_comparison_reciprocal():
    R = 2.0
    base = Strip(1 / R, 1.0)
    cert = conformal_comparison_excludes(base, ConformalMapSpec.reciprocal(), Line.vertical((1 + 1 / R) / 2))
    d = Crescent(R)
    x, y = interior_probes(d, 2000)
    c = R / (R + 1)
    far = np.abs(np.hypot(x - c, y) - c) > 1e-9
    np.testing.assert_array_equal(cert.excludes_xy(x, y)[far], (np.hypot(x - c, y) < c)[far])


def test_comparison_not_applicable():
    aff = ConformalMapSpec.affine(2.0)
    with pytest.raises(RuleNotApplicable):
        conformal_comparison_excludes(Strip(0.0, 1.0), aff, Line.vertical(0.5))
    with pytest.raises(RuleNotApplicable):
        conformal_comparison_excludes(Strip(0.0, 1.0), aff, Line.horizontal(0.0))
    with pytest.raises(ExclusionError):
        conformal_comparison_excludes(Strip(0.0, 1.0), aff, Line.vertical(0.2))


# ------------------------------------------------------------ localize

def seg(region):
    assert region.kind == "segment"
    return region.p0.as_tuple(), region.p1.as_tuple()


def test_localize_half_disk():
    (x0, y0), (x1, y1) = seg(localize(HalfDisk(1.0)))
    assert x0 == x1 == 0.0
    assert abs(y0 - (math.sqrt(2) - 1)) < 1e-9 and abs(y1 - 0.5) < 1e-9


def test_localize_crescent():
    (x0, y0), (x1, y1) = seg(localize(Crescent(2.0)))
    assert y0 == y1 == 0.0
    assert abs(x0 - 4 / 3) < 1e-9 and abs(x1 - 1.5) < 1e-9


@pytest.mark.parametrize("R", [1.5, 3.0, 7.0])
def test_localize_crescent_family(R):
    (x0, _), (x1, _) = seg(localize(Crescent(R)))
    assert abs(x0 - 2 * R / (R + 1)) < 1e-9 and abs(x1 - (R + 1) / 2) < 1e-9


def test_localize_hyperbolic():
    (x0, y0), (x1, y1) = seg(localize(HyperbolicRegion()))
    assert y0 == y1 == 0.0
    assert abs(x0 - 0.5) < 1e-9 and abs(x1 - 1 / math.sqrt(2)) < 1e-9


@pytest.mark.parametrize("r, R", [(1.0, 2.0), (0.3, 5.0), (2.0, 2.2)])
def test_localize_annulus(r, R):
    reg = localize(Annulus(r, R))
    assert reg.kind == "annular_band"
    assert abs(reg.r_low - math.sqrt(r * R)) < 1e-9 and abs(reg.r_high - (R + r) / 2) < 1e-9


@pytest.mark.parametrize("d, center", [(SQUARE, (0, 0)), (EQUILATERAL, (0, math.tan(math.pi / 3) / 3)),
                                       (RHOMBUS, (0, 0)), (Disk((0.5, -1.0), 2.0), (0.5, -1.0))],
                         ids=["square", "equilateral", "rhombus", "disk"])
def test_two_axes_give_a_point(d, center):
    reg = localize(d)
    assert reg.is_point
    assert math.hypot(reg.p0.x - center[0], reg.p0.y - center[1]) < 1e-9
    assert sum(c.rule == "delta_convex_axis" for c in reg.certificates) >= 2


def test_localize_dumbbell_and_strip():
    (x0, y0), (x1, y1) = seg(localize(Dumbbell(0.05)))
    assert (x0, y0, x1, y1) == (-1.0, 0.0, 1.0, 0.0)
    reg = localize(Strip(0.0, 2.0))
    assert reg.kind == "line" and reg.line == Line.vertical(1.0)


def test_localize_without_rules_returns_domain():
    d = ConformalImage(Strip(0.0, 1.0), ConformalMapSpec.affine(2.0, (1.0, 0.0)))
    reg = localize(d)
    assert reg.kind == "domain" and reg.certificates == ()


@pytest.mark.parametrize("theta", [0.35, 0.6, math.pi / 4, 0.9, 1.2, 1.45])
def test_triangle_localize_matches_closed_form(theta):
    """Polygon sweep and the closed-form bounds are independent routes."""
    (_, y0), (_, y1) = seg(localize(isosceles_triangle(theta)))
    rep = triangle_bounds(theta)
    assert abs(y0 - rep.lower) < 1e-9
    assert abs(y1 - rep.upper) < 1e-9


def test_triangle_mediator_sign():
    # above pi/3 the perpendicular bisector of the slanted edge caps the segment
    theta = 1.2
    N = math.tan(theta)
    (_, _), (_, y1) = seg(localize(isosceles_triangle(theta)))
    assert abs(y1 - (N * N - 1) / (2 * N)) < 1e-9
    assert abs(y1 - (1 / N - 1 / math.sin(2 * theta))) > 0.5


NAMED = [HalfDisk(1.0), Crescent(2.0), HyperbolicRegion(), Annulus(1.0, 2.0), TRIANGLE, Dumbbell(0.05)]


def _region_points(reg, k=41, ends=True):
    t = np.linspace(0, 1, k) if ends else np.linspace(0, 1, k)[1:-1]
    if reg.kind == "annular_band":
        r = reg.r_low + t * (reg.r_high - reg.r_low)
        a = np.linspace(0, 2 * math.pi, 7)[:, None]
        return (r * np.cos(a)).ravel(), (r * np.sin(a)).ravel()
    pts = [reg.point_at(s) for s in t]
    return np.array([p.x for p in pts]), np.array([p.y for p in pts])


@pytest.mark.parametrize("d", NAMED, ids=lambda d: d.tag)
def test_certificates_never_exclude_the_residual(d):
    reg = localize(d)
    x, y = _region_points(reg, ends=False)  # endpoints sit on the excluded sets' boundaries
    for c in reg.certificates:
        assert not c.excludes_xy(x, y).any(), c.rule


@pytest.mark.parametrize("d", NAMED, ids=lambda d: d.tag)
def test_region_inside_domain_closure(d):
    reg = localize(d)
    x, y = _region_points(reg)
    assert (d.margin_xy(x, y) > -1e-9).all()


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(NAMED), st.data())
def test_adding_rules_never_enlarges_region(d, data):
    certs = certificates_for(d)
    keep = data.draw(st.lists(st.booleans(), min_size=len(certs), max_size=len(certs)))
    subset = [c for c, k in zip(certs, keep) if k]
    full = region_from_certificates(d, certs)
    part = region_from_certificates(d, subset)
    x, y = _region_points(full)
    for px, py in zip(x, y):
        assert part.contains((px, py), tol=1e-7)


def test_support_region_is_axis_chord():
    reg = support_region(HalfDisk(1.0))
    (x0, y0), (x1, y1) = seg(reg)
    assert x0 == x1 == 0 and abs(y0) < 1e-9 and abs(y1 - 1.0) < 1e-9
    (x0, _), (x1, _) = seg(support_region(HyperbolicRegion()))
    assert abs(x0) < 1e-9 and abs(x1 - 1.0) < 1e-9


def test_certificate_json():
    reg = localize(HalfDisk(1.0))
    doc = json.loads(json.dumps(reg.to_json()))
    assert doc["kind"] == "segment"
    assert {c["rule"] for c in doc["certificates"]} <= set(RULES)
    assert {c["rule"] for c in doc["certificates"]} == {"delta_convex_axis", "partial_symmetry_line",
                                                        "circle_reflection"}
    for c in doc["certificates"]:
        assert "excluded_region" in c and "type" in c["excluded_region"]


# ------------------------------------------------------------ soundness

SOUND = [HalfDisk(1.0), Crescent(2.0), HyperbolicRegion(), Annulus(1.0, 2.0), TRIANGLE]


def _probe(d, cert):
    """An excluded point, well inside d, whose partner moves furthest."""
    x, y = interior_probes(d, 400, keep=cert.excludes_xy)
    px, py = cert.partner_xy(x, y)
    ok = (d.margin_xy(x, y) > 0.02) & (d.margin_xy(px, py) > 0.02) & (np.hypot(x, y) < 2.5)
    i = int(np.argmax(np.where(ok, np.hypot(px - x, py - y), -1)))
    assert ok[i]
    return (float(x[i]), float(y[i])), (float(px[i]), float(py[i]))


@pytest.mark.parametrize("d", SOUND, ids=lambda d: d.tag)
def test_certificates_statistically_sound(d):
    cfg = SimConfig(seed=123)
    for cert in localize(d).certificates:
        a, b = _probe(d, cert)
        ta = exit_times(d, a, 20_000, cfg)
        tb = exit_times(d, b, 20_000, cfg.replace(seed=124))
        for p in (1.0, 2.0):
            ea = moment_from_times(ta["time"], ta["truncated"], p)
            eb = moment_from_times(tb["time"], tb["truncated"], p)
            slack = 3 * math.hypot(ea.std_error, eb.std_error)
            assert eb.mean >= ea.mean - slack, (cert.rule, a, b, p, ea.mean, eb.mean)


@pytest.mark.parametrize("d", SOUND, ids=lambda d: d.tag)
def test_line_certificates_pathwise(d):
    for cert in localize(d).certificates:
        if cert.rule != "partial_symmetry_line" or cert.excluded.rotations:
            continue
        a, _ = _probe(d, cert)
        A, B = coupled_exit_times(d, a, cert.line, 2000, SimConfig(seed=8))
        assert (A["time"] <= B["time"]).all()
