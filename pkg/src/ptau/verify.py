"""Acceptance checks, shared by ``ptau verify`` and the test suite.

Each check returns a ``CheckResult`` with the measured values, so a failing
criterion reports what was observed instead of just "False".
"""

from __future__ import annotations

import inspect
import json
import math
import os
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .analysis import annulus_argmax, annulus_mean_exit, lmtd_check, named_bounds, search_center
from .domain import Annulus, Crescent, Disk, Dumbbell, HalfDisk, HyperbolicRegion, Strip
from .exclusion import localize, support_region
from .geometry import ConformalMapSpec, Line
from .sampler import SimConfig, coupled_exit_times, estimate_conformal_moment, estimate_moment


@dataclass(frozen=True)
class CheckResult:
    key: str
    title: str
    passed: bool
    measured: str
    target: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.key:>3}  {self.title}: {self.measured} (target: {self.target})"


# The value the annulus criterion is stated against.  It is the formula
# whose Laplacian is -4, i.e. twice the mean exit time of standard planar
# Brownian motion; annulus_mean_exit(1.4, 1, 2) = 0.248135 is the value under
# the normalization used everywhere else (disk center -> 1/2).
ANNULUS_STATED_TARGET = 0.49654


def _n(n, scale):
    return max(100, int(n * scale))


def check_annulus_formula(scale=1.0, cfg=SimConfig()) -> CheckResult:
    est = estimate_moment(Annulus(1.0, 2.0), (1.4, 0.0), 1.0, _n(100_000, scale), cfg)
    z = (est.mean - ANNULUS_STATED_TARGET) / est.std_error
    return CheckResult("1", "annulus(1,2) at |z|=1.4 vs stated 0.49654",
                       abs(z) <= 3.0,
                       f"mean={est.mean:.6f} se={est.std_error:.2e} z={z:.1f}",
                       "|mean - 0.49654| <= 3 SE")


def check_annulus_standard(scale=1.0, cfg=SimConfig()) -> CheckResult:
    exact = annulus_mean_exit(1.4, 1.0, 2.0)
    est = estimate_moment(Annulus(1.0, 2.0), (1.4, 0.0), 1.0, _n(100_000, scale), cfg)
    z = (est.mean - exact) / est.std_error
    return CheckResult("1s", "annulus(1,2) at |z|=1.4 vs Laplacian=-2 solution",
                       abs(z) <= 3.0,
                       f"mean={est.mean:.6f} se={est.std_error:.2e} z={z:.1f}",
                       f"|mean - {exact:.6f}| <= 3 SE")


def check_cross_sampler(scale=1.0, cfg=SimConfig()) -> CheckResult:
    n = _n(50_000, scale)
    ann = Annulus(1.0, 2.0)
    strip = Strip(0.0, math.log(2.0))
    f = ConformalMapSpec.exponential()
    worst = 0.0
    parts = []
    for rho in (1.1, 1.3, 1.5, 1.7, 1.9):
        a = estimate_moment(ann, (rho, 0.0), 1.0, n, cfg)
        b = estimate_conformal_moment(strip, f, (math.log(rho), 0.0), 1.0, n,
                                      cfg.replace(seed=cfg.seed + 1))
        z = abs(a.mean - b.mean) / math.hypot(a.std_error, b.std_error)
        worst = max(worst, z)
        parts.append(f"{rho}:{z:.1f}")
    return CheckResult("2", "exponential time change vs direct annulus", worst <= 3.0,
                       "z by radius " + " ".join(parts), "all z <= 3")


def check_coupling(scale=1.0, cfg=SimConfig()) -> CheckResult:
    rep = couple_report(HalfDisk(1.0), (0.0, 0.7), Line.horizontal(0.5), _n(10_000, scale), cfg)
    ok = rep["violations"] == 0 and rep["strict_fraction"] > 0.5
    return CheckResult("3", "half_disk coupling a=(0,0.7), line y=1/2", ok,
                       f"violations={rep['violations']} strict_fraction={rep['strict_fraction']:.4f}",
                       "0 violations and strict fraction > 0.5")


def couple_report(d, a, L: Line, n: int, cfg=SimConfig()) -> dict:
    A, B = coupled_exit_times(d, a, L, n, cfg)
    ta, tb = A["time"], B["time"]
    both_ok = ~(A["truncated"] | B["truncated"])
    return {"n": n, "violations": int(np.count_nonzero((ta > tb) & both_ok)),
            "strict": int(np.count_nonzero(ta < tb)),
            "strict_fraction": float(np.count_nonzero(ta < tb)) / n,
            "equal": int(np.count_nonzero(ta == tb)),
            "truncated": int(np.count_nonzero(~both_ok))}


def check_annulus_center(scale=1.0, cfg=SimConfig(), seed=20240) -> CheckResult:
    d = Annulus(1.0, 2.0)
    ce = search_center(d, localize(d), 1.0, 16, cfg, _n(100_000, scale))
    target = annulus_argmax(1.0, 2.0)
    # 1.47108 is the quoted target and the formula gives 1.4710685; require both
    inside = all(ce.bracket[0] <= v <= ce.bracket[1] for v in (target, 1.47108))
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(1000):
        r = rng.uniform(1e-3, 10.0)
        R = r * (1.0 + rng.uniform(1e-3, 20.0))
        m = annulus_argmax(r, R)
        bad += not (math.sqrt(r * R) < m < (R + r) / 2)
    return CheckResult("4", "annulus(1,2) center search and inequality chain", inside and bad == 0,
                       f"bracket=[{ce.bracket[0]:.5f}, {ce.bracket[1]:.5f}] best={ce.t:.5f} "
                       f"chain_failures={bad}/1000",
                       f"bracket contains {target:.7f} and 1.47108; 0 failures")


def check_lmtd(seed=7) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(10_000):
        a, b = rng.uniform(0.0, 1e6, 2)
        if a == b or min(a, b) <= 0:
            continue
        a, b = max(a, b), min(a, b)
        bad += not lmtd_check(a, b)
    return CheckResult("5", "LMTD chain on 10^4 random pairs", bad == 0, f"failures={bad}", "0")


def _localize_interval(doc: dict):
    kind = doc["kind"]
    if kind == "annular_band":
        return doc["r_low"], doc["r_high"]
    (x0, y0), (x1, y1) = doc["endpoints"]
    if abs(x1 - x0) >= abs(y1 - y0):
        return x0, x1
    return y0, y1


def check_localize_intervals() -> CheckResult:
    from .cli import localize_document
    from .domain import isosceles_triangle

    cases = [
        (HalfDisk(1.0), (math.sqrt(2) - 1, 0.5)),
        (Crescent(2.0), (4 / 3, 1.5)),
        (HyperbolicRegion(), (0.5, 1 / math.sqrt(2))),
        (isosceles_triangle(math.pi / 4), (0.19891236737965800691, 0.41421356237309504880)),
    ]
    for r, R in ((1.0, 2.0), (1.0, 4.0), (0.5, 3.0), (2.0, 2.5)):
        cases.append((Annulus(r, R), (math.sqrt(r * R), (R + r) / 2)))
    worst = 0.0
    for d, (lo, hi) in cases:
        got = _localize_interval(localize_document(d))
        worst = max(worst, abs(got[0] - lo), abs(got[1] - hi))
    return CheckResult("6", "localize reproduces the closed-form intervals", worst <= 1e-9,
                       f"max endpoint error={worst:.1e} over {len(cases)} domains", "<= 1e-9")


def check_containment(scale=1.0, cfg=SimConfig(), ps=(1.0, 2.0)) -> CheckResult:
    parts, ok = [], True
    for d in (HalfDisk(1.0), HyperbolicRegion(), Crescent(2.0)):
        region = support_region(d)
        lo, hi = named_bounds(d).interval
        for p in ps:
            ce = search_center(d, region, p, 16, cfg, _n(50_000, scale))
            a, b = ce.bracket_points(region)
            coord = (a.y, b.y) if d.tag == "half_disk" else (a.x, b.x)
            inside = lo <= min(coord) and max(coord) <= hi
            ok &= inside
            parts.append(f"{d.tag} p={p:g}: [{min(coord):.4f}, {max(coord):.4f}] in "
                         f"[{lo:.4f}, {hi:.4f}] {'yes' if inside else 'NO'}")
    return CheckResult("7", "search bracket inside certified interval", ok, "; ".join(parts),
                       "every bracket inside its interval")


def check_dumbbell(scale=1.0, cfg=SimConfig()) -> CheckResult:
    d = Dumbbell(0.05)
    n = _n(20_000, scale)
    a = estimate_moment(d, (1.0, 0.0), 1.0, n, cfg)
    b = estimate_moment(d, (0.0, 0.0), 1.0, n, cfg)
    z = (a.mean - b.mean) / math.hypot(a.std_error, b.std_error)
    return CheckResult("8", "dumbbell(0.05): lobe center beats the junction", z > 3.0,
                       f"E(1,0)={a.mean:.5f} E(0,0)={b.mean:.5f} z={z:.1f}", "z > 3")


def check_disk_bias(scale=1.0, cfg=SimConfig()) -> CheckResult:
    est = estimate_moment(Disk(), (0.0, 0.0), 1.0, _n(100_000, scale), cfg)
    rel = abs(est.mean - 0.5) / 0.5
    return CheckResult("9", "disk center discretization bias", rel < 0.01,
                       f"mean={est.mean:.6f} rel_err={rel:.2e} dt_floor={cfg.dt_floor:g}", "< 1%")


def check_determinism(n=20_000) -> CheckResult:
    outs = []
    with tempfile.TemporaryDirectory() as tmp:
        dom = os.path.join(tmp, "annulus.json")
        with open(dom, "w") as fh:
            json.dump(Annulus(1.0, 2.0).to_json(), fh)
        for t in (1, 4, 16):
            env = dict(os.environ, PTAU_THREADS=str(t))
            r = subprocess.run([sys.executable, "-m", "ptau", "estimate", "--domain", dom,
                                "--x", "1.4", "--y", "0", "--n", str(n), "--seed", "11"],
                               env=env, capture_output=True, check=True)
            outs.append(r.stdout)
    same = all(o == outs[0] for o in outs)
    return CheckResult("10", "estimate JSON identical for PTAU_THREADS 1/4/16", same and bool(outs[0]),
                       f"{len(outs[0])} bytes, identical={same}", "byte-identical")


def check_annulus_fd() -> CheckResult:
    h, worst = 1e-3, 0.0
    for rho in np.linspace(1.1, 1.9, 9):
        for ang in (0.0, 0.7, 2.0):
            x, y = rho * math.cos(ang), rho * math.sin(ang)

            def u(x, y):
                return annulus_mean_exit(math.hypot(x, y), 1.0, 2.0)
            lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4 * u(x, y)) / h ** 2
            worst = max(worst, abs(lap + 2.0))
    return CheckResult("F1", "annulus_mean_exit solves Laplacian = -2", worst < 1e-4,
                       f"max |lap + 2|={worst:.1e}", "< 1e-4")


SUITES: Dict[str, List[Callable[..., CheckResult]]] = {
    "formulas": [check_annulus_fd, check_lmtd, check_localize_intervals],
    "coupling": [check_coupling],
    "examples": [check_annulus_formula, check_annulus_standard, check_cross_sampler,
                 check_annulus_center, check_containment, check_dumbbell, check_disk_bias,
                 check_determinism],
}


def run_suite(name: str, scale: float = 1.0) -> List[CheckResult]:
    if name not in SUITES:
        raise KeyError(name)
    out = []
    for fn in SUITES[name]:
        takes_scale = "scale" in inspect.signature(fn).parameters
        out.append(fn(scale=scale) if takes_scale else fn())
    return out
