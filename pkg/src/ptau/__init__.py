"""Exit-time moments of planar Brownian motion and where they peak."""

from ._backend import NAME as BACKEND
from .analysis import (
    BoundsReport,
    CenterEstimate,
    annulus_argmax,
    annulus_mean_exit,
    lmtd_check,
    named_bounds,
    search_center,
    triangle_bounds,
)
from .domain import (
    Annulus,
    ConformalImage,
    Crescent,
    Disk,
    Dumbbell,
    HalfDisk,
    HyperbolicRegion,
    Polygon,
    Strip,
    contains,
    distance_to_boundary,
    from_json,
    isosceles_triangle,
)
from .exclusion import (
    CandidateRegion,
    ExclusionCertificate,
    check_circle_reflection,
    check_delta_convex,
    check_partial_symmetry_axis,
    conformal_comparison_excludes,
    localize,
)
from .geometry import Circle, ConformalMapSpec, Line, Point
from .sampler import (
    ExitSample,
    MomentEstimate,
    SimConfig,
    conformal_exit_sample,
    coupled_exit_pair,
    estimate_moment,
    sample_exit,
)

__version__ = "0.1.0"
