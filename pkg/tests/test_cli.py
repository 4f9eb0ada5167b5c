import json
import math
import os
import subprocess
import sys

import pytest

from ptau.cli import main


def write(tmp_path, doc, name="d.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


HALF = {"tag": "half_disk", "params": {"radius": 1.0}}
SQUARE = {"tag": "polygon", "params": {"vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]]}}


def test_localize_half_disk(tmp_path, capsys):
    code, out, _ = run(capsys, "localize", "--domain", write(tmp_path, HALF))
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "segment"
    (x0, y0), (x1, y1) = doc["endpoints"]
    assert x0 == x1 == 0 and not doc["is_point"]
    assert abs(y0 - (math.sqrt(2) - 1)) < 1e-9 and abs(y1 - 0.5) < 1e-9
    assert doc["certificates"]


def test_localize_crescent(tmp_path, capsys):
    code, out, _ = run(capsys, "localize", "--domain",
                       write(tmp_path, {"tag": "crescent", "params": {"R": 2.0}}))
    doc = json.loads(out)
    assert code == 0
    xs = sorted(p[0] for p in doc["endpoints"])
    assert abs(xs[0] - 4 / 3) < 1e-9 and abs(xs[1] - 1.5) < 1e-9


def test_localize_square_is_a_point(tmp_path, capsys):
    code, out, _ = run(capsys, "localize", "--domain", write(tmp_path, SQUARE))
    doc = json.loads(out)
    assert code == 0 and doc["is_point"]
    assert max(abs(v) for p in doc["endpoints"] for v in p) < 1e-12


def test_localize_svg(tmp_path, capsys):
    out = tmp_path / "r.svg"
    code, _, _ = run(capsys, "localize", "--domain", write(tmp_path, HALF), "--format", "svg",
                     "--out", out)
    assert code == 0
    text = out.read_text()
    assert text.startswith("<svg") or text.startswith("<?xml")
    assert "</svg>" in text


def test_localize_without_rule_exits_3(tmp_path, capsys):
    doc = {"tag": "conformal_image",
           "params": {"base": {"tag": "strip", "params": {"a_low": 0.0, "a_high": 1.0}},
                      "map": {"tag": "affine", "params": [1.0, 0.0, 0.0]}}}
    code, out, _ = run(capsys, "localize", "--domain", write(tmp_path, doc))
    assert code == 3
    assert json.loads(out)["kind"] == "domain"


@pytest.mark.parametrize("text, needle", [
    ("{not json", ":1:2"),
    (json.dumps({"tag": "annulus", "params": {"r_inner": 2, "r_outer": 1}}), "annulus"),
    (json.dumps({"tag": "annulus", "params": {"r_inner": 1}}), "params.r_outer"),
])
def test_bad_domain_exits_2(tmp_path, capsys, text, needle):
    code, _, err = run(capsys, "normalize", "--domain", write(tmp_path, text))
    assert code == 2 and needle in err


def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "localize", "--domain", tmp_path / "nope.json")
    assert code == 2 and "cannot read" in err


def test_estimate_point_outside_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "estimate", "--domain", write(tmp_path, HALF), "--x", 0, "--y", -0.5,
                       "--n", 200)
    assert code == 2 and err


def test_estimate(tmp_path, capsys):
    code, out, _ = run(capsys, "estimate", "--domain", write(tmp_path, HALF), "--x", 0, "--y", 0.45,
                       "--n", 2000, "--seed", 4)
    doc = json.loads(out)
    assert code == 0
    assert doc["seed"] == 4 and doc["estimate"]["n"] == 2000
    assert doc["estimate"]["truncation_rate"] == 0


def test_estimate_truncated_exits_4(tmp_path, capsys):
    code, out, _ = run(capsys, "estimate", "--domain", write(tmp_path, HALF), "--x", 0, "--y", 0.45,
                       "--n", 200, "--max-steps", 5)
    assert code == 4
    assert json.loads(out)["estimate"]["truncation_rate"] == 1.0


def test_seed_range(tmp_path, capsys):
    code, _, _ = run(capsys, "estimate", "--domain", write(tmp_path, HALF), "--x", 0, "--y", 0.45,
                     "--seed", -1)
    assert code == 2


def test_search_on_line_region_exits_3(tmp_path, capsys):
    strip = {"tag": "strip", "params": {"a_low": -1.0, "a_high": 1.0}}
    code, _, err = run(capsys, "search", "--domain", write(tmp_path, strip), "--n", 1000)
    assert code == 3 and "line" in err


def test_bad_map_exits_2(tmp_path, capsys):
    doc = {"tag": "conformal_image",
           "params": {"base": {"tag": "strip", "params": {"a_low": 0.0, "a_high": 1.0}},
                      "map": {"kind": "affine"}}}
    code, _, err = run(capsys, "normalize", "--domain", write(tmp_path, doc))
    assert code == 2 and "tag" in err


def test_search_json_and_csv(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "search", "--domain", write(tmp_path, HALF), "--n", 2000,
                       "--budget", 10, "--csv", trace)
    assert code in (0, 4)
    doc = json.loads(out)
    lo, hi = doc["center"]["bracket"]
    assert 0 <= lo <= doc["center"]["t"] <= hi <= 1
    assert len(doc["bracket_points"]) == 2
    header = trace.read_text().splitlines()[0]
    assert header.startswith("t,") or ",t," in header
    code2, out2, _ = run(capsys, "search", "--domain", write(tmp_path, HALF), "--n", 2000,
                         "--budget", 10, "--format", "csv")
    assert out2 == trace.read_text()


def test_search_small_budget_exits_2(tmp_path, capsys):
    code, _, _ = run(capsys, "search", "--domain", write(tmp_path, HALF), "--budget", 5, "--n", 500)
    assert code == 2


def test_couple_check_on_line_is_all_equal(tmp_path, capsys):
    code, out, _ = run(capsys, "couple-check", "--domain", write(tmp_path, HALF), "--ax", 0.1,
                       "--ay", 0.5, "--line", "y=0.5", "--n", 300)
    doc = json.loads(out)
    assert code == 0 and doc["violations"] == 0
    assert doc["equal"] == 300


def test_couple_check_off_line(tmp_path, capsys):
    code, out, _ = run(capsys, "couple-check", "--domain", write(tmp_path, HALF), "--ax", 0.0,
                       "--ay", 0.7, "--line", "0,1,-0.5", "--n", 1000)
    doc = json.loads(out)
    assert code == 0 and doc["violations"] == 0 and doc["strict"] > 0


def test_couple_check_bad_line(tmp_path, capsys):
    code, _, err = run(capsys, "couple-check", "--domain", write(tmp_path, HALF), "--ax", 0.0,
                       "--ay", 0.7, "--line", "z=3")
    assert code == 2 and "bad line" in err


def test_bounds(tmp_path, capsys):
    code, out, _ = run(capsys, "bounds", "--theta", math.pi / 4)
    lo, hi = json.loads(out)["interval"]
    assert code == 0 and abs(lo - 0.19891) < 1e-5 and abs(hi - 0.41421) < 1e-5
    code, out, _ = run(capsys, "bounds", "--domain",
                       write(tmp_path, {"tag": "annulus", "params": {"r_inner": 1, "r_outer": 4}}))
    assert json.loads(out)["interval"] == [2.0, 2.5]
    code, _, _ = run(capsys, "bounds", "--domain", write(tmp_path, SQUARE))
    assert code == 3
    code, _, _ = run(capsys, "bounds")
    assert code == 2


def test_normalize_roundtrip(tmp_path, capsys):
    src = {"tag": "polygon", "params": {"vertices": [[0, 0], [0, 1], [1, 1], [1, 0]]}}
    code, out, _ = run(capsys, "normalize", "--domain", write(tmp_path, src))
    assert code == 0
    again = tmp_path / "again.json"
    code, out2, _ = run(capsys, "normalize", "--domain", write(tmp_path, out, "n.json"), "--out", again)
    assert code == 0 and again.read_text() == out


def test_verify_formulas(capsys):
    code, out, _ = run(capsys, "verify", "formulas")
    assert "== formulas" in out
    assert all(line.startswith(("[PASS]", "[FAIL]", "==")) for line in out.splitlines() if line)
    assert code == 0 and out.count("[PASS]") == 3


def _cli(*argv, env=None):
    return subprocess.run([sys.executable, "-m", "ptau", *map(str, argv)], capture_output=True,
                          text=True, env=dict(os.environ, **(env or {})))


def test_output_independent_of_threads(tmp_path):
    dom = write(tmp_path, {"tag": "isosceles_triangle", "params": {"theta": 0.9}})
    outs = [_cli("estimate", "--domain", dom, "--x", 0, "--y", 0.3, "--n", 3000,
                 env={"PTAU_THREADS": t}).stdout for t in ("1", "4")]
    assert outs[0] and outs[0] == outs[1]


def test_module_entry_point_exit_code(tmp_path):
    r = _cli("normalize", "--domain", tmp_path / "missing.json")
    assert r.returncode == 2 and r.stderr.startswith("error:")
