import json
import time

import numpy as np
import pytest

from abundle import cli, fixtures, report
from abundle.errors import ParseError, UnknownFixture
from abundle.pmodule import pointwise_rank


@pytest.mark.parametrize("name", fixtures.fixture_names())
def test_fixture_rebuilds_bit_exactly(name):
    a, b = fixtures.build_fixture(name), fixtures.build_fixture(name)
    assert fixtures.dumps(a.descriptor) == fixtures.dumps(b.descriptor)
    assert np.array_equal(a.base.sample_plan.points, b.base.sample_plan.points)
    x = a.base.sample_plan.points[5]
    assert np.array_equal(a.xi(0, x), b.xi(0, x))
    loaded = fixtures.build(fixtures.loads(fixtures.dumps(a.descriptor)))
    assert np.array_equal(loaded.base.sample_plan.points, a.base.sample_plan.points)
    assert np.array_equal(loaded.fiber.p, a.fiber.p)
    assert np.array_equal(loaded.atlas.transition(1 % a.atlas.n_charts, 0, x), a.atlas.transition(1 % a.atlas.n_charts, 0, x))


def test_seed_and_grid_change_the_fixture():
    a = fixtures.build_fixture("phase-two-chart", seed=7)
    b = fixtures.build_fixture("phase-two-chart", seed=8)
    assert a.descriptor.cocycle != b.descriptor.cocycle
    c = fixtures.build_fixture("mixed-rank-grassmann", grid_size=6)
    assert pointwise_rank(c.fiber).tolist() == [1, 1, 1, 2, 2, 2]


def test_named_fixture_shapes():
    t = fixtures.build_fixture("trivial-line")
    assert t.atlas.n_charts == 1 and t.atlas.rank == 1
    p = fixtures.build_fixture("phase-two-chart")
    assert p.atlas.n_charts == 2 and p.fiber.is_free_ambient
    m = fixtures.build_fixture("mixed-rank-grassmann")
    assert not m.fiber.is_free_ambient


def test_unknown_and_malformed():
    with pytest.raises(UnknownFixture):
        fixtures.describe("no-such-fixture")
    with pytest.raises(ParseError):
        fixtures.loads("{not json")
    with pytest.raises(ParseError):
        fixtures.loads(json.dumps({"format": "other/1", "name": "x"}))
    good = json.loads(fixtures.dumps(fixtures.describe("trivial-line")))
    with pytest.raises(ParseError):
        fixtures.loads(json.dumps(dict(good, surprise=1)))
    bad = dict(good, cocycle={"generator": "mystery"})
    with pytest.raises(ParseError):
        fixtures.build(fixtures.loads(json.dumps(bad)))
    bad = dict(good, cocycle={"generator": "phase"})
    with pytest.raises(ParseError):
        fixtures.build(fixtures.loads(json.dumps(bad)))


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_trivial_line_all_suites_fast(capsys):
    t0 = time.perf_counter()
    code, out = run(["run", "--fixture", "trivial-line", "-q"], capsys)
    assert code == 0
    assert time.perf_counter() - t0 < 10


def test_broken_cocycle_fails(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, _ = run(["run", "--fixture", "broken-cocycle", "--suite", "cocycle",
                   "--report", str(path), "-q"], capsys)
    assert code == 1
    rep = json.loads(path.read_text())
    assert rep["verdict"] == "fail"
    comp = {e["name"]: e for e in rep["suites"][0]["entries"]}["composition"]
    assert not comp["passed"] and comp["residual"] == pytest.approx(1.0)


def test_report_determinism_and_env_dir(tmp_path, capsys, monkeypatch):
    args = ["run", "--fixture", "phase-two-chart", "--suite", "partition,reduction,calculus",
            "--samples", "8", "-q"]
    run(args + ["--report", str(tmp_path / "a.json")], capsys)
    monkeypatch.setenv(cli.REPORT_DIR_ENV, str(tmp_path / "env"))
    code, _ = run(args, capsys)
    assert code == 0
    a = json.loads((tmp_path / "a.json").read_text())
    b = json.loads((tmp_path / "env" / "phase-two-chart.report.json").read_text())
    a.pop("timing"), b.pop("timing")
    assert a == b
    assert a["format"] == report.REPORT_FORMAT
    assert [s["suite"] for s in a["suites"]] == ["calculus", "partition", "reduction"]
    assert a["verdict"] == "pass"
    assert all(e["anchor"] for s in a["suites"] for e in s["entries"])


def test_build_then_run_file(tmp_path, capsys):
    path = tmp_path / "fx.json"
    code, _ = run(["build", "--fixture", "mixed-rank-grassmann", "-o", str(path)], capsys)
    assert code == 0
    assert json.loads(path.read_text())["format"] == fixtures.FIXTURE_FORMAT
    code, out = run(["run", "--fixture", str(path), "--suite", "cocycle,partition"], capsys)
    assert code == 0 and "verdict: pass" in out.out


def test_cli_errors(tmp_path, capsys):
    assert run(["run", "--fixture", "nope"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[]")
    assert run(["run", "--fixture", str(bad)], capsys)[0] == 2
    assert run(["run", "--fixture", "trivial-line", "--grid-size", "0"], capsys)[0] == 2
    with pytest.raises(SystemExit):
        cli.main(["run", "--fixture", "trivial-line", "--suite", "bogus"])


def test_nonunitary_report(capsys, tmp_path):
    path = tmp_path / "n.json"
    code, _ = run(["run", "--fixture", "nonunitary-two-chart", "--suite", "reduction,gluing",
                   "--report", str(path), "-q"], capsys)
    assert code == 1
    rep = json.loads(path.read_text())
    red, glu = rep["suites"]
    assert not red["passed"] and "does not preserve the form" in red["entries"][0]["detail"]
    assert glu["passed"]


def test_histogram_bins():
    h = report.histogram([1e-20, 1e-15, 1e-15, 0.5, 1e5])
    assert sum(h["counts"]) == 5
    assert h["counts"][0] == 1 and h["counts"][-1] == 1
