"""Command-line surface: output formats, file products and exit codes."""

import contextlib
import io
import json

import pytest

from hilbertlab import cli


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


def test_distance_prints_value():
    code, out, _ = _run(["distance", "--body", "disk", "0,0", "0.5,0"])
    assert code == 0
    assert float(out.strip()) == pytest.approx(0.5493061443340549, abs=1e-12)


def test_unknown_body_is_a_validation_error():
    code, _, err = _run(["distance", "--body", "banana", "0,0", "0.5,0"])
    assert code == 1
    msg = json.loads(err)
    assert msg["error"] == "validation"


def test_exterior_point_is_a_validation_error():
    code, _, err = _run(["distance", "--body", "disk", "0,0", "2,0"])
    assert code == 1
    assert json.loads(err)["error"] == "validation"


def test_inline_json_body():
    spec = '{"kind": "regular_polygon", "k": 4}'
    code, out, _ = _run(["distance", "--body", spec, "0,0", "0.2,0"])
    assert code == 0
    assert float(out.strip()) > 0


def test_ball_writes_csv_and_svg(tmp_path):
    code, out, _ = _run(["ball", "--body", "disk", "--radius", "1.5",
                         "--m", "64", "--out", str(tmp_path)])
    assert code == 0
    report = json.loads(out)
    assert report["n_vertices"] == 64
    lines = (tmp_path / "ball.csv").read_text().strip().splitlines()
    assert lines[0] == "x0,x1"
    assert len(lines) == 65
    assert (tmp_path / "ball.svg").exists()


def test_horosphere_writes_polyline(tmp_path):
    code, out, _ = _run(["horosphere", "--body", "disk", "--base", "1,0",
                         "--m", "64", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "horosphere.csv").exists()


def test_net_and_graph_products(tmp_path):
    code, out, _ = _run(["net", "--body", "disk", "--radius", "2",
                         "--epsilon", "0.5", "--out", str(tmp_path)])
    assert code == 0
    report = json.loads(out)
    assert report["checks"]["separation_ok"]
    assert (tmp_path / "net.csv").exists()

    code, out, _ = _run(["graph", "--body", "disk", "--radius", "2",
                         "--epsilon", "0.5", "--out", str(tmp_path)])
    assert code == 0
    report = json.loads(out)
    assert report["n_vertices"] > 1
    assert report["quasi_isometry"]["three_rho_ok"]
    assert (tmp_path / "graph_adjacency.txt").exists()
    assert (tmp_path / "graph.dot").exists()


def test_growth_csv(tmp_path):
    code, out, _ = _run(["growth", "--body", "disk", "--radii", "1,2,3",
                         "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "growth.csv").read_text().strip().splitlines()
    assert lines[0] == "R,volume,std_error"
    assert len(lines) == 4
    assert json.loads(out)["classification"] in ("polynomial", "exponential",
                                                 "undetermined")


def test_folner_report(tmp_path):
    code, out, _ = _run(["folner", "--body", "triangle", "--radii", "2,4",
                         "--out", str(tmp_path)])
    assert code == 0
    vals = json.loads(out)["ratios"]
    assert len(vals) == 2 and vals["4.0"] < vals["2.0"]
    assert (tmp_path / "folner.csv").exists()


def test_spectrum_report():
    code, out, _ = _run(["spectrum", "--body", "disk", "--domain-radius", "3",
                         "--interior-radius", "2", "--epsilon", "0.5"])
    assert code == 0
    report = json.loads(out)
    assert 0 < report["rho"] < 1


def test_selftest_single_criterion():
    code, out, _ = _run(["selftest", "--criteria", "9"])
    assert code == 0
    assert "[PASS] criterion  9" in out
