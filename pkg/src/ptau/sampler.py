"""Monte Carlo exit times of planar Brownian motion.

Three engines share one path kernel:

* ``sample_exit`` / ``estimate_moment``: direct simulation in a domain.
* ``coupled_exit_pair``: a path from ``a`` and its mirror image from
  sigma_L(a), glued together once the first path touches L.
* ``conformal_exit_sample``: a path in a strip whose clock runs at
  |f'(Z)|^2, giving the exit time of f(Z) from f(strip).

Step control is adaptive, dt ~ beta * dist(z, boundary)^2 clamped to
[dt_floor, dt_max] and rounded down to a dyadic fraction of dt_max, so every
walker samples the same underlying Brownian path for a given
(seed, path_index) whatever steps it takes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from . import _backend
from .domain import Domain, DomainError, KernelDomain, Strip, MAP_IDS
from .geometry import EPS_GEOM, ConformalMapSpec, Line, Point, _as_point, reflect_over_line

MAX_TRUNCATION_RATE = 1e-3


class SamplerError(ValueError):
    """Invalid simulation request (bad start point, bad config, unmet precondition)."""


@dataclass(frozen=True)
class SimConfig:
    dt_max: float = 1e-3
    beta: float = 0.1
    dt_floor: float = 1e-7
    max_steps: int = 10_000_000
    seed: int = 0
    path_index_base: int = 0

    def __post_init__(self):
        if not (0 < self.dt_floor <= self.dt_max):
            raise SamplerError("need 0 < dt_floor <= dt_max")
        if not (0 < self.beta <= 1):
            raise SamplerError("beta must lie in (0, 1]")
        if self.max_steps < 1:
            raise SamplerError("max_steps must be >= 1")
        if not (0 <= self.seed < 2 ** 64 and 0 <= self.path_index_base < 2 ** 64):
            raise SamplerError("seed and path_index_base are 64-bit unsigned")

    @property
    def levels(self) -> int:
        """Depth of the dyadic tree: the finest step is dt_max / 2**levels >= dt_floor."""
        m = 0
        while m < 46 and math.ldexp(self.dt_max, -(m + 1)) >= self.dt_floor:
            m += 1
        return m

    def kernel_args(self):
        return (float(self.dt_max), self.levels, float(self.beta), float(self.dt_floor),
                int(self.max_steps), int(self.seed))

    def replace(self, **kw) -> "SimConfig":
        d = asdict(self)
        d.update(kw)
        return SimConfig(**d)


@dataclass(frozen=True)
class ExitSample:
    exit_time: float
    exit_point: Point
    steps_used: int
    truncated: bool


@dataclass(frozen=True)
class MomentEstimate:
    p: float
    mean: float
    std_error: float
    n: int
    truncation_rate: float

    @property
    def valid(self) -> bool:
        return self.truncation_rate < MAX_TRUNCATION_RATE

    def to_json(self) -> dict:
        d = asdict(self)
        d["valid"] = self.valid
        return d


def _path_indices(cfg: SimConfig, n: int) -> np.ndarray:
    base = np.uint64(cfg.path_index_base)
    return base + np.arange(n, dtype=np.uint64)


def _samples(out, i: int) -> ExitSample:
    return ExitSample(float(out["time"][i]), Point(out["x"][i], out["y"][i]),
                      int(out["steps"][i]), bool(out["truncated"][i]))


def _check_start(d: Domain, start: Point, what: str = "start"):
    if not d.contains(start):
        raise DomainError(f"{what} ({start.x}, {start.y}) is not inside the {d.tag}")


def _threads(threads):
    return _backend.threads() if threads is None else max(1, int(threads))


def exit_times(d: Domain, start, n: int, cfg: SimConfig = SimConfig(), *,
               threads: Optional[int] = None, backend: Optional[str] = None):
    """Raw per-path output for paths path_index_base .. path_index_base + n - 1."""
    start = _as_point(start)
    _check_start(d, start)
    k = _backend.get(backend)
    return k.run(d.kernel(), 0, start.as_tuple(), _path_indices(cfg, n), cfg.kernel_args(),
                 None, _threads(threads))


def sample_exit(d: Domain, start, cfg: SimConfig = SimConfig(), path_index: int = 0,
                backend: Optional[str] = None) -> ExitSample:
    start = _as_point(start)
    _check_start(d, start)
    k = _backend.get(backend)
    out = k.run(d.kernel(), 0, start.as_tuple(), np.array([path_index], np.uint64),
                cfg.kernel_args(), None, 1)
    return _samples(out, 0)


def moment_from_times(times, truncated, p: float) -> MomentEstimate:
    """Mean of times**p with standard error.  fsum keeps the result
    independent of how the samples were produced."""
    times = np.asarray(times, float)
    n = len(times)
    vals = times ** p
    mean = math.fsum(vals) / n
    var = math.fsum((vals - mean) ** 2) / (n - 1) if n > 1 else 0.0
    return MomentEstimate(float(p), mean, math.sqrt(var / n), n,
                          float(np.count_nonzero(truncated)) / n)


def estimate_moment(d: Domain, start, p: float, n: int, cfg: SimConfig = SimConfig(), *,
                    threads: Optional[int] = None, backend: Optional[str] = None) -> MomentEstimate:
    """Estimate E_start[tau^p].  Truncated paths enter the mean at their
    truncation time; an estimate with truncation_rate >= 0.1% is returned
    but marked invalid."""
    if not p > 0:
        raise SamplerError("p must be positive")
    if n < 100:
        raise SamplerError("n must be at least 100")
    out = exit_times(d, start, n, cfg, threads=threads, backend=backend)
    return moment_from_times(out["time"], out["truncated"], p)


# ---------------------------------------------------------------- coupling

def _line_args(L: Line):
    return (L.a, L.b, L.c)


def _check_coupling(d: Domain, a: Point, L: Line):
    from .exclusion import SymmetricSide, check_partial_symmetry_axis

    _check_start(d, a, "a")
    _check_start(d, reflect_over_line(a, L), "sigma_L(a)")
    side = check_partial_symmetry_axis(d, L)
    s = L.signed(a)
    if abs(s) <= EPS_GEOM:
        return
    want = SymmetricSide.POSITIVE if s > 0 else SymmetricSide.NEGATIVE
    if side not in (want, SymmetricSide.BOTH):
        raise SamplerError(f"a is not on a symmetric side of the line (found {side.value})")


def coupled_exit_times(d: Domain, a, L: Line, n: int, cfg: SimConfig = SimConfig(), *,
                       threads: Optional[int] = None, backend: Optional[str] = None,
                       check: bool = True):
    """Per-path output for n reflection-coupled pairs: (paths from a, paths from sigma_L(a))."""
    a = _as_point(a)
    if check:
        _check_coupling(d, a, L)
    k = _backend.get(backend)
    return k.run(d.kernel(), 1, a.as_tuple(), _path_indices(cfg, n), cfg.kernel_args(),
                 _line_args(L), _threads(threads))


def coupled_exit_pair(d: Domain, a, L: Line, cfg: SimConfig = SimConfig(), path_index: int = 0,
                      backend: Optional[str] = None) -> Tuple[ExitSample, ExitSample]:
    """One reflection-coupled pair.  The second path is the mirror image of
    the first until the first touches L, and identical afterwards."""
    a = _as_point(a)
    _check_coupling(d, a, L)
    k = _backend.get(backend)
    A, B = k.run(d.kernel(), 1, a.as_tuple(), np.array([path_index], np.uint64),
                 cfg.kernel_args(), _line_args(L), 1)
    return _samples(A, 0), _samples(B, 0)


# ---------------------------------------------------------------- conformal

def _conformal_kd(base: Strip, f: ConformalMapSpec) -> KernelDomain:
    kd = base.kernel()
    mp = np.array((list(f.params) + [0.0, 0.0, 0.0])[:3])
    return KernelDomain(kd.tag, kd.params, kd.vertices, MAP_IDS[f.tag], mp)


def _check_conformal(base: Strip, f: ConformalMapSpec, start: Point):
    if not isinstance(base, Strip):
        raise SamplerError("conformal sampling runs in a strip")
    _check_start(base, start, "start_in_base")
    s = f.singularity
    if s is not None and abs(complex(start) - s) < EPS_GEOM:
        raise SamplerError("start sits on the singular point of the map")
    if f.tag == "square_root" and base.a_low < 0:
        raise SamplerError("square_root needs a strip inside Re z >= 0")
    if f.tag == "reciprocal" and base.a_low < 0 < base.a_high:
        raise SamplerError("reciprocal needs a strip avoiding Re z = 0")


def conformal_exit_times(base: Strip, f: ConformalMapSpec, start_in_base, n: int,
                         cfg: SimConfig = SimConfig(), *, threads: Optional[int] = None,
                         backend: Optional[str] = None):
    start = _as_point(start_in_base)
    _check_conformal(base, f, start)
    k = _backend.get(backend)
    return k.run(_conformal_kd(base, f), 2, start.as_tuple(), _path_indices(cfg, n),
                 cfg.kernel_args(), None, _threads(threads))


def conformal_exit_sample(base: Strip, f: ConformalMapSpec, start_in_base,
                          cfg: SimConfig = SimConfig(), path_index: int = 0,
                          backend: Optional[str] = None) -> ExitSample:
    """Exit of f(Z) from f(base), timed by kappa = int |f'(Z_s)|^2 ds (trapezoid rule)."""
    start = _as_point(start_in_base)
    _check_conformal(base, f, start)
    k = _backend.get(backend)
    out = k.run(_conformal_kd(base, f), 2, start.as_tuple(), np.array([path_index], np.uint64),
                cfg.kernel_args(), None, 1)
    return _samples(out, 0)


def estimate_conformal_moment(base: Strip, f: ConformalMapSpec, start_in_base, p: float, n: int,
                              cfg: SimConfig = SimConfig(), **kw) -> MomentEstimate:
    out = conformal_exit_times(base, f, start_in_base, n, cfg, **kw)
    return moment_from_times(out["time"], out["truncated"], p)
