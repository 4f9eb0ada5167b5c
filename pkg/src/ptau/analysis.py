"""Closed-form exit-time formulas, certified bounds, and a noisy 1-D search
for the p-th center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .domain import Annulus, Crescent, Domain, DomainError, HalfDisk, HyperbolicRegion
from .exclusion import CandidateRegion
from .geometry import Point
from .sampler import MomentEstimate, SimConfig, exit_times, moment_from_times

SIGNIFICANCE = 3.0  # standard errors
_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class AnalysisError(ValueError):
    """Arguments outside the domain of a formula, or an unsupported region."""


# ------------------------------------------------------------------ annulus

def _check_radii(r, R):
    if not (0 < r < R and math.isfinite(R)):
        raise AnalysisError("need 0 < r < R")


def annulus_mean_exit(z_abs: float, r: float, R: float) -> float:
    """E_z[tau] for standard planar Brownian motion in r < |z| < R.

    This is the radial solution of Laplacian(h) = -2 vanishing on both
    circles: h = (A(|z|) - |z|^2) / 2 with
    A(s) = (R^2 ln(s/r) - r^2 ln(s/R)) / ln(R/r).
    """
    _check_radii(r, R)
    if not (r <= z_abs <= R):
        raise AnalysisError("|z| must lie in [r, R]")
    if z_abs in (r, R):
        return 0.0
    a = (R * R * math.log(z_abs / r) - r * r * math.log(z_abs / R)) / math.log(R / r)
    return 0.5 * (a - z_abs * z_abs)


def annulus_argmax(r: float, R: float) -> float:
    """Radius maximizing the mean exit time from the annulus."""
    _check_radii(r, R)
    # (R - r)(R + r) rather than R^2 - r^2: the latter cancels for thin annuli
    return math.sqrt((R - r) * (R + r) / (2.0 * math.log1p((R - r) / r)))


def lmtd(a: float, b: float) -> float:
    """Logarithmic mean (a - b) / ln(a / b)."""
    if not (0 < b < a):
        raise AnalysisError("need 0 < b < a")
    return (a - b) / math.log1p((a - b) / b)


def _chain_gaps(x: float):
    """With s = sqrt(a/b) = e^x and everything divided by sqrt(ab), the chain
    becomes 1 < sinh(x)/x < cosh(x/2)^2 <= cosh(x).  Returns the three gaps,
    computed without cancellation for small x."""
    if x < 1e-3:
        x2 = x * x
        g1 = x2 / 6 + x2 * x2 / 120 + x2 ** 3 / 5040
        g2 = x2 / 12 + x2 * x2 * (1 / 48 - 1 / 120) + x2 ** 3 * (1 / 1440 - 1 / 5040)
    else:
        g1 = math.sinh(x) / x - 1.0
        g2 = math.cosh(x / 2) ** 2 - math.sinh(x) / x
    g3 = math.sinh(x / 2) ** 2
    return g1, g2, g3


def lmtd_check(a: float, b: float) -> bool:
    """sqrt(ab) < LMTD(a, b) < (a + b + 2 sqrt(ab)) / 4 <= (a + b) / 2."""
    if a == b:
        raise AnalysisError("a = b is the excluded limit case")
    if not (0 < b < a and math.isfinite(a)):
        raise AnalysisError("need 0 < b < a")
    g1, g2, g3 = _chain_gaps(0.5 * math.log1p((a - b) / b))
    return g1 > 0 and g2 > 0 and g3 >= 0


# ------------------------------------------------------------------ bounds

@dataclass(frozen=True)
class BoundsReport:
    domain: dict
    lower: float
    upper: float
    lower_rule: str
    upper_rule: str
    coordinate: str
    values: Dict[str, float] = field(default_factory=dict)
    flags: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise AnalysisError(f"empty interval [{self.lower}, {self.upper}]")

    @property
    def interval(self) -> Tuple[float, float]:
        return self.lower, self.upper

    def to_json(self) -> dict:
        return {"domain": self.domain, "coordinate": self.coordinate,
                "interval": [self.lower, self.upper],
                "lower": {"value": self.lower, "rule": self.lower_rule},
                "upper": {"value": self.upper, "rule": self.upper_rule},
                "values": dict(self.values), "flags": list(self.flags)}


def triangle_bounds(theta: float) -> BoundsReport:
    """Bounds on the imaginary axis for the triangle with vertices -1, 1 and
    i tan(theta).

    The circle bound is the top of the circle through -1 and 1 meeting the
    base at angle theta/2.  The angle bisector at 1 and the perpendicular
    bisector of the edge from 1 to i tan(theta) swap roles at pi/3.
    """
    if not (0 < theta < math.pi / 2):
        raise AnalysisError("theta must lie in (0, pi/2)")
    N = math.tan(theta)
    circle = (1 - math.cos(theta / 2)) / math.sin(theta / 2)
    bisector = math.tan(theta / 2)
    mediator = (N * N - 1) / (2 * N)
    half = N / 2
    values = {"circle": circle, "bisector": bisector, "mediator": mediator, "half_height": half}
    flags = ("near_pi_over_3",) if abs(theta - math.pi / 3) < 1e-6 else ()
    if theta <= math.pi / 3:
        lower, lrule = (circle, "circle_reflection") if circle >= mediator else \
            (mediator, "partial_symmetry_line:mediator")
        upper, urule = bisector, "partial_symmetry_line:bisector"
        if theta == math.pi / 3:
            lower, lrule = max(lower, mediator), "partial_symmetry_line:mediator"
            upper = lower
    else:
        lower, lrule = (bisector, "partial_symmetry_line:bisector") if bisector >= circle else \
            (circle, "circle_reflection")
        upper, urule = (mediator, "partial_symmetry_line:mediator") if mediator <= half else \
            (half, "half_height")
    dom = {"tag": "isosceles_triangle", "params": {"theta": theta}}
    return BoundsReport(dom, lower, upper, lrule, urule, "imaginary_axis", values, flags)


def named_bounds(d: Domain) -> BoundsReport:
    """Closed-form candidate interval for the named domains."""
    if isinstance(d, HalfDisk):
        r = d.radius
        return BoundsReport(d.to_json(), r * (math.sqrt(2) - 1), r / 2, "circle_reflection",
                            "partial_symmetry_line", "imaginary_axis")
    if isinstance(d, Annulus):
        r, R = d.r_inner, d.r_outer
        return BoundsReport(d.to_json(), math.sqrt(r * R), (R + r) / 2,
                            "antiholomorphic_self_map", "partial_symmetry_line", "radius",
                            {"argmax": annulus_argmax(r, R)})
    if isinstance(d, HyperbolicRegion):
        return BoundsReport(d.to_json(), 0.5, 1 / math.sqrt(2), "partial_symmetry_line",
                            "conformal_comparison", "real_axis")
    if isinstance(d, Crescent):
        R = d.R
        return BoundsReport(d.to_json(), 2 * R / (R + 1), (R + 1) / 2, "conformal_comparison",
                            "partial_symmetry_line", "real_axis")
    raise AnalysisError(f"no closed-form bounds for {d.tag}")


# ------------------------------------------------------------------ search

@dataclass(frozen=True)
class Evaluation:
    t: float
    point: Point
    estimate: MomentEstimate


@dataclass(frozen=True)
class CenterEstimate:
    """Best evaluated point of a common-random-numbers golden-section search.

    ``bracket`` runs between the nearest evaluated parameters on either side
    that are worse than the best by more than SIGNIFICANCE paired standard
    errors (or to the region's end when there is none).  ``plateau`` spans
    the evaluated parameters statistically tied with the best.
    """

    point: Point
    value: MomentEstimate
    t: float
    bracket: Tuple[float, float]
    plateau: Tuple[float, float]
    parameter: str
    region: Tuple[float, float]
    evaluations: Tuple[Evaluation, ...]
    flagged: bool = False
    reason: str = ""

    def bracket_points(self, region: CandidateRegion) -> Tuple[Point, Point]:
        return region.point_at(self.bracket[0]), region.point_at(self.bracket[1])

    def to_json(self) -> dict:
        return {"point": list(self.point.as_tuple()), "t": self.t, "parameter": self.parameter,
                "value": self.value.to_json(), "bracket": list(self.bracket),
                "plateau": list(self.plateau), "region": list(self.region),
                "significance": SIGNIFICANCE, "flagged": self.flagged, "reason": self.reason,
                "evaluations": len(self.evaluations)}

    def evaluations_csv(self) -> str:
        rows = ["t,x,y,mean,std_error,n,truncation_rate"]
        for e in sorted(self.evaluations, key=lambda e: e.t):
            m = e.estimate
            rows.append(f"{e.t!r},{e.point.x!r},{e.point.y!r},{m.mean!r},{m.std_error!r},"
                        f"{m.n},{m.truncation_rate!r}")
        return "\n".join(rows) + "\n"


def search_center(d: Domain, region: CandidateRegion, p: float, budget: int = 16,
                  cfg: SimConfig = SimConfig(), n: int = 20_000,
                  threads: Optional[int] = None) -> CenterEstimate:
    """Maximize E[tau^p] over a segment or annular band.

    Every evaluation reuses the same path indices, so the sampled objective
    is a fixed function of the parameter and golden-section search applies.
    """
    if not region.is_1d:
        raise AnalysisError(f"cannot search a {region.kind} region")
    if budget < 10:
        raise AnalysisError("budget must be at least 10 evaluations")
    if not p > 0:
        raise AnalysisError("p must be positive")
    lo, hi = region.param_range()
    param = "radius" if region.kind == "annular_band" else "t"
    values: Dict[float, np.ndarray] = {}
    evals = []

    def f(t):
        if t not in values:
            pt = region.point_at(t)
            if not d.contains(pt):
                raise DomainError(f"search point {pt} left the domain")
            out = exit_times(d, pt, n, cfg, threads=threads)
            values[t] = out["time"] ** p
            evals.append(Evaluation(t, pt, moment_from_times(out["time"], out["truncated"], p)))
        return evals[[e.t for e in evals].index(t)].estimate.mean

    if region.is_point:
        f(0.0)
        e = evals[0]
        return CenterEstimate(e.point, e.estimate, 0.0, (0.0, 0.0), (0.0, 0.0), param,
                              (lo, hi), tuple(evals))

    # golden-section on the fixed objective, then bisection on the bracket edges
    n_refine = max(4, budget // 3)
    a, b = lo, hi
    c = b - _PHI * (b - a)
    e_ = a + _PHI * (b - a)
    fc, fe = f(c), f(e_)
    while len(evals) < budget - n_refine:
        if fc >= fe:
            b, e_, fe = e_, c, fc
            c = b - _PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e_, fe
            e_ = a + _PHI * (b - a)
            fe = f(e_)

    def classify():
        best = max(evals, key=lambda e: e.estimate.mean)
        vb = values[best.t]
        worse, tied = [], [best.t]
        for e in evals:
            if e is best:
                continue
            diff = vb - values[e.t]
            se = float(np.std(diff, ddof=1)) / math.sqrt(len(diff))
            (worse if math.fsum(diff) / len(diff) > SIGNIFICANCE * se else tied).append(e.t)
        left = max((t for t in worse if t < best.t), default=lo)
        right = min((t for t in worse if t > best.t), default=hi)
        inner = [t for t in tied if left < t < right]
        return best, left, right, min(inner), max(inner)

    side = 0
    while len(evals) < budget:
        best, left, right, t_lo, t_hi = classify()
        mid = 0.5 * (left + t_lo) if side == 0 else 0.5 * (t_hi + right)
        side ^= 1
        if mid in values or not lo < mid < hi:
            mid = 0.5 * (left + t_lo) if side == 0 else 0.5 * (t_hi + right)
            if mid in values or not lo < mid < hi:
                break
        f(mid)

    best, left, right, t_lo, t_hi = classify()
    flagged = left == lo and right == hi
    return CenterEstimate(best.point, best.estimate, best.t, (left, right), (t_lo, t_hi), param,
                          (lo, hi), tuple(evals), flagged,
                          "noise exceeds signal: bracket is the whole region" if flagged else "")
