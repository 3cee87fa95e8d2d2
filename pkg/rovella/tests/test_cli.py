import os
import tempfile

import numpy as np
import yaml

from rovella import __version__
from rovella.cli import main
from rovella.core.pressure import PressureCurve
from rovella.tableio import read_table

PL_RUN = {"map": "pl:0.4,0.6", "method": "closed-form", "n": 6, "N": 256, "roof": 1.0}
DOUBLING_RUN = {"map": "doubling", "method": "periodic-orbit", "n": 6, "N": 256, "roof": 1.0}


def _run(d, args, conf=None, **kwargs):
    argv = ["--out", d]
    if conf is not None:
        fp = os.path.join(d, "run.yml")
        with open(fp, "w") as f:
            yaml.safe_dump(conf, f)
        argv += ["--config", fp]
    return main(argv + args, **kwargs)


def _read_yaml(fp):
    with open(fp) as f:
        return yaml.safe_load(f)


def _first_line(fp):
    with open(fp) as f:
        return f.readline()


def test_validate():
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["validate"]) == 0
        doc = _read_yaml(os.path.join(d, "validation.yml"))
        assert doc["passed"] is True
        assert doc["domination"]["passed"] is True
        assert _first_line(os.path.join(d, "validation.yml")).startswith("# rovella {} config_sha256=".format(
            __version__))
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["validate"], DOUBLING_RUN) == 1
        assert _read_yaml(os.path.join(d, "validation.yml"))["passed"] is False


def test_usage_errors():
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["validate"], {"N": 3}) == 2
        assert _run(d, ["validate"], {"method": "closed-form"}) == 2
        assert _run(d, ["nosuchcommand"]) == 2
        assert main(["--config", os.path.join(d, "missing.yml"), "validate"]) == 2
        assert not os.path.exists(os.path.join(d, "validation.yml"))
    assert main(["--version"]) == 0


def test_simulate():
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["simulate", "--n-returns", "3"]) == 0
        traj = read_table(os.path.join(d, "trajectory.csv"))
        sections = read_table(os.path.join(d, "sections.csv"))
        assert len(sections) == 4
        assert traj.colnames == ["t", "x", "y", "z", "phase"]
        assert np.all(np.diff(traj["t"]) >= 0)
        assert set(traj["phase"]) == {"linear", "connecting"}
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["simulate", "--n-returns", "0"]) == 0
        assert len(read_table(os.path.join(d, "sections.csv"))) == 1
        # a start on the singular line halts the run
        assert _run(d, ["simulate", "--x0", "1e-13"]) == 1


def test_pressure():
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["pressure"], DOUBLING_RUN) == 0
        tab = read_table(os.path.join(d, "pressure.csv"))
        assert len(tab) == 81
        np.testing.assert_allclose(tab["p"], (1 - tab["t"]) * np.log(2), atol=1e-12)
        doc = _read_yaml(os.path.join(d, "domain.yml"))
        assert doc["convex"] is True
        assert doc["t_minus"] == "-inf" and doc["t_plus"] == "inf"

    def concave(curve):
        return PressureCurve(curve.t_grid, -curve.t_grid ** 2, map_id=curve.map_id)

    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["pressure"], DOUBLING_RUN, curve_hook=concave) == 1
        assert _read_yaml(os.path.join(d, "domain.yml"))["convex"] is False


def test_spectrum():
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["spectrum"], DOUBLING_RUN) == 0
        assert not os.path.exists(os.path.join(d, "spectrum.csv"))
        doc = _read_yaml(os.path.join(d, "spectrum.yml"))
        assert doc["domain"] == "empty"
        assert abs(doc["alpha"] - np.log(2)) < 1e-12
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["spectrum"], PL_RUN) == 0
        tab = read_table(os.path.join(d, "spectrum.csv"))
        assert len(tab) == 41
        np.testing.assert_allclose(tab["L_flow"] - tab["L_interval"], 2., atol=1e-12)
        ok = tab["resolved"] == 1
        assert np.all(tab["L_interval"][ok] <= 1 + 1e-9)
        assert np.all(np.diff(tab["alpha"]) > 0)


def test_lift():
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["lift", "--t", "1"], DOUBLING_RUN) == 0
        doc = _read_yaml(os.path.join(d, "suspension.yml"))
        assert abs(doc["h_flow"] - np.log(2)) < 1e-8
        assert abs(doc["flow_pressure"]) < 1e-8
        assert abs(doc["roof_integral"] - 1.) < 1e-12
        assert not os.path.exists(os.path.join(d, "square_measure.csv"))
    with tempfile.TemporaryDirectory() as d:
        # the flow roof needs the flow-derived map
        assert _run(d, ["lift"], dict(DOUBLING_RUN, roof="flow")) == 2

    # a finite admissible range, t = 1.8 lies above t+
    def finite_range(curve):
        return PressureCurve(curve.t_grid, 0.3 - 0.7 * curve.t_grid, map_id=curve.map_id)

    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["lift", "--t", "1.8"], PL_RUN, curve_hook=finite_range) == 1
        assert not os.path.exists(os.path.join(d, "suspension.yml"))
        assert _run(d, ["lift", "--t", "1"], PL_RUN, curve_hook=finite_range) == 0
        doc = _read_yaml(os.path.join(d, "suspension.yml"))
        assert doc["t_range"][0] < 0 < 1 < doc["t_range"][1] < 1.8


def test_lift_default_flow():
    with tempfile.TemporaryDirectory() as d:
        assert _run(d, ["lift", "--t", "1"]) == 0
        doc = _read_yaml(os.path.join(d, "suspension.yml"))
        assert doc["map"] == "rovella"
        assert abs(doc["flow_pressure"]) < 5e-3
        assert doc["roof_integral"] > 1.
        assert doc["h_flow"] > 0
        assert len(read_table(os.path.join(d, "square_measure.csv"))) > 0


def test_deterministic_output():
    with tempfile.TemporaryDirectory() as d1, tempfile.TemporaryDirectory() as d2:
        run = dict(PL_RUN, method="periodic-orbit")
        for d in (d1, d2):
            assert _run(d, ["pressure"], run) == 0
            assert _run(d, ["spectrum"], run) == 0
        for name in ("pressure.csv", "domain.yml", "spectrum.csv"):
            with open(os.path.join(d1, name), "rb") as f1, open(os.path.join(d2, name), "rb") as f2:
                assert f1.read() == f2.read()


if __name__ == "__main__":
    test_validate()
    test_usage_errors()
    test_simulate()
    test_pressure()
    test_spectrum()
    test_lift()
    test_lift_default_flow()
    test_deterministic_output()
