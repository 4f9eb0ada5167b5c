"""Random stream and backend agreement."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from ptau import _backend, _fallback
from ptau.domain import Annulus, Disk, Dumbbell, HalfDisk, Strip, isosceles_triangle
from ptau.geometry import ConformalMapSpec, Line
from ptau.sampler import SimConfig, conformal_exit_times, coupled_exit_times, exit_times

needs_compiled = pytest.mark.skipif("compiled" not in _backend.available(),
                                    reason="compiled kernel not built")

# Philox4x32-10 known-answer vectors (Random123 distribution, kat_vectors)
KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
]


@pytest.mark.parametrize("ctr, key, want", KAT)
def test_philox_known_answers_python(ctr, key, want):
    got = _fallback.philox4x32(*ctr, *key)
    assert tuple(int(v) for v in got) == want


@needs_compiled
@pytest.mark.parametrize("ctr, key, want", KAT)
def test_philox_known_answers_compiled(ctr, key, want):
    assert _backend.get("compiled").philox(*ctr, *key) == want


@needs_compiled
def test_node_normals_agree():
    k = _backend.get("compiled")
    rng = np.random.default_rng(0)
    for seed, path, level, index in rng.integers(0, 2 ** 40, (50, 4)):
        a = k.normals(int(seed), int(path), int(level % 40), int(index))
        b = _fallback.node_normals(int(seed), int(path), int(level % 40), int(index))
        assert a == (float(b[0]), float(b[1]))


def test_node_normals_are_standard_normal():
    gx, gy = _fallback.node_normals(7, np.arange(20_000, dtype=np.uint64), 3, 11)
    for g in (gx, gy):
        assert stats.kstest(g, "norm").pvalue > 1e-3
    assert abs(np.corrcoef(gx, gy)[0, 1]) < 0.03


CFG = SimConfig(seed=5)


def _runs():
    tri = isosceles_triangle(math.pi / 4)
    yield "disk", lambda b: exit_times(Disk(), (0.1, 0.2), 300, CFG, backend=b)
    yield "annulus", lambda b: exit_times(Annulus(1.0, 2.0), (1.4, 0.1), 300, CFG, backend=b)
    yield "dumbbell", lambda b: exit_times(Dumbbell(0.05), (0.9, 0.0), 300, CFG, backend=b)
    yield "triangle", lambda b: exit_times(tri, (0.0, 0.3), 300, CFG, backend=b)
    yield "coupled", lambda b: coupled_exit_times(HalfDisk(1.0), (0, 0.7), Line.horizontal(0.5),
                                                  300, CFG, backend=b)[1]


@needs_compiled
@pytest.mark.parametrize("name, run", list(_runs()), ids=[n for n, _ in _runs()])
def test_backends_identical_paths(name, run):
    a, b = run("compiled"), run("python")
    for key in ("time", "steps", "truncated"):
        np.testing.assert_array_equal(a[key], b[key])
    # the boundary crossing is bisected through hypot, which numpy and libm
    # round differently in the last bit
    np.testing.assert_allclose(a["x"], b["x"], rtol=0, atol=1e-15)
    np.testing.assert_allclose(a["y"], b["y"], rtol=0, atol=1e-15)


@needs_compiled
@pytest.mark.parametrize("f, strip, start", [
    (ConformalMapSpec.exponential(), Strip(0.0, math.log(2.0)), (0.3, 0.0)),
    (ConformalMapSpec.square_root(), Strip(0.0, 1.0), (0.5, 0.2)),
    (ConformalMapSpec.reciprocal(), Strip(0.5, 1.0), (0.7, -0.1)),
], ids=lambda v: getattr(v, "tag", ""))
def test_backends_agree_for_time_change(f, strip, start):
    # exp and sqrt come from libm in one backend and numpy in the other,
    # so the clock may differ in the last bit; the path itself may not
    a = conformal_exit_times(strip, f, start, 300, CFG, backend="compiled")
    b = conformal_exit_times(strip, f, start, 300, CFG, backend="python")
    np.testing.assert_array_equal(a["steps"], b["steps"])
    np.testing.assert_array_equal(a["truncated"], b["truncated"])
    np.testing.assert_allclose(a["time"], b["time"], rtol=1e-15, atol=0)
    np.testing.assert_allclose(a["x"], b["x"], rtol=0, atol=1e-13)
    np.testing.assert_allclose(a["y"], b["y"], rtol=0, atol=1e-13)


def test_backend_env_override():
    code = "from ptau import _backend; print(_backend.NAME)"
    env = dict(os.environ, PTAU_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_lookup_errors():
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_threads_env(monkeypatch):
    monkeypatch.setenv("PTAU_THREADS", "3")
    assert _backend.threads() == 3
    monkeypatch.setenv("PTAU_THREADS", "0")
    assert _backend.threads() == 1
