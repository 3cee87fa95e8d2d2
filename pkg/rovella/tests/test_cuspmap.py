import os
import tempfile

import numpy as np
import pytest
import yaml

from rovella.core.cuspmap import (Branch, CuspMapSpec, FlowParams, PLFullBranchMap, eval_derivative, eval_map,
                                  pl_pressure_closed_form, rovella_map, rovella_map_from_flow, schwarzian_check,
                                  validate_cusp_map)
from rovella.errors import DomainError, ParameterViolation


def test_flow_params():
    p = FlowParams()
    assert p.violations() == []
    assert p.beta == 4.5
    assert abs(p.ell - 1.1) < 1e-15
    assert p.validate() is p

    with pytest.raises(ParameterViolation) as e:
        FlowParams(lambda3=-5.0).validate()
    assert e.value.inequality == "-lambda2 > -lambda3"
    assert "beta > ell + 3" in FlowParams(lambda3=-5.0).violations()
    assert FlowParams(rho=3.0).violations() == ["rho * (1/2)^ell < 1"]
    assert FlowParams(lambda3=-0.5).violations()[0] == "-lambda3 > lambda1"
    assert "tau_c > 0" in FlowParams(tau_c=0.).violations()


def test_flow_params_yaml():
    with tempfile.TemporaryDirectory() as d:
        fp = os.path.join(d, "flow.yml")
        with open(fp, "w") as f:
            yaml.safe_dump(dict(FlowParams(rho=1.5).to_dict()), f)
        assert FlowParams.from_yaml(fp) == FlowParams(rho=1.5)
    with pytest.raises(ValueError):
        FlowParams.from_dict({"rho": 1.5, "sigma": 10})


def test_rovella_eval():
    cmap = rovella_map_from_flow(FlowParams())
    assert cmap.is_rovella
    assert not cmap.is_full_branch()
    # f(1/2) = rho 2^-ell - 1/2 and Df(1/2) = rho ell 2^(1 - ell)
    assert abs(eval_map(cmap, 0.5) - (1.8 * 0.5 ** 1.1 - 0.5)) < 1e-12
    assert abs(eval_map(cmap, -0.5) + (1.8 * 0.5 ** 1.1 - 0.5)) < 1e-12
    assert abs(eval_derivative(cmap, 0.5) - 1.8 * 1.1 * 0.5 ** 0.1) < 1e-12
    assert abs(np.log(eval_derivative(cmap, 0.5)) - np.log(1.8 * 1.1 * 0.5 ** 0.1)) < 1e-12
    # both one-sided limits at the cusp
    assert eval_map(cmap, 0., branch=1) == -0.5
    assert eval_map(cmap, 0., branch=0) == 0.5
    assert eval_derivative(cmap, 0., branch=1) == 0.
    with pytest.raises(DomainError):
        eval_map(cmap, 0.)
    with pytest.raises(DomainError):
        eval_map(cmap, 0.7)
    x = np.linspace(-0.45, 0.45, 7)
    np.testing.assert_allclose(cmap(x), [eval_map(cmap, _) for _ in x], atol=1e-15)


def test_preimages():
    cmap = rovella_map(1.8, 1.1)
    y = np.linspace(-0.5, 0.5, 101)
    pre = cmap.preimages(y)
    assert pre.shape == (2, 101)
    for j in range(2):
        ok = np.isfinite(pre[j])
        np.testing.assert_allclose(cmap.evaluate(pre[j][ok], j), y[ok], atol=1e-12)
    # every point has at least one preimage
    assert np.all(np.any(np.isfinite(pre), axis=0))

    pl = PLFullBranchMap((0.4, 0.6))
    np.testing.assert_allclose(pl.preimages([0.25])[:, 0], [0.1, 0.55], atol=1e-15)


def test_pl_map():
    pl = PLFullBranchMap((0.4, 0.6))
    assert pl.name == "pl:0.4,0.6"
    assert PLFullBranchMap((0.5, 0.5)).name == "doubling"
    assert pl.is_full_branch()
    assert abs(float(pl.evaluate(0.2)) - 0.5) < 1e-15
    assert abs(float(pl.evaluate(0.7)) - 0.5) < 1e-12
    assert abs(pl_pressure_closed_form(pl, 1.)) < 1e-15
    assert abs(pl_pressure_closed_form(pl, 0.) - np.log(2)) < 1e-15
    with pytest.raises(ValueError):
        PLFullBranchMap((0.4, 0.5))


def test_custom_branch_inverse():
    br = Branch(0., 1., func=lambda x: x ** 2, deriv=lambda x: 2 * x)
    y = np.array([0.04, 0.25, 0.81, 2.])
    x = br.inverse(y)
    np.testing.assert_allclose(x[:3], [0.2, 0.5, 0.9], atol=1e-12)
    assert np.isnan(x[3])
    cmap = CuspMapSpec([br])
    assert cmap.k == 1 and cmap.crit == (0., 1.)


def test_validate_rovella():
    report = validate_cusp_map(rovella_map_from_flow(FlowParams()))
    for axiom in ("(1)", "(2)", "(3)", "(f1)", "(f2)", "(f3)", "(f5)"):
        assert report.status(axiom) == "pass", report
    assert report.status("(f4)") == "not-checked"
    assert report.passed
    assert report.to_dict()["passed"]


def test_validate_random_flows():
    rng = np.random.default_rng(7)
    for _ in range(20):
        lam1 = rng.uniform(0.5, 2.)
        ell = rng.uniform(1.1, 2.)
        beta = ell + 3 + rng.uniform(0.1, 2.)
        p = FlowParams(lambda1=lam1, lambda2=-beta * lam1, lambda3=-ell * lam1, rho=rng.uniform(0.8, 1.8))
        report = validate_cusp_map(rovella_map_from_flow(p))
        for axiom in ("(1)", "(2)", "(3)", "(f1)", "(f2)", "(f3)", "(f5)"):
            assert report.status(axiom) == "pass", (p, report)


def test_validate_schwarzian_strict():
    # ell = 1: Df is constant, Sf = 0 satisfies (3) but not Sf < a < 0
    report = validate_cusp_map(rovella_map(1., 1.))
    assert report.status("(3)") == "pass"
    assert report.status("(f5)") == "fail"
    assert report.status("(2)") == "fail"


def test_validate_doubling():
    report = validate_cusp_map(PLFullBranchMap((0.5, 0.5)))
    assert report.status("(2)") == "fail"
    assert not report.passed
    assert schwarzian_check(PLFullBranchMap((0.5, 0.5))).passed


def test_holder_alpha():
    with pytest.raises(ValueError):
        validate_cusp_map(PLFullBranchMap((0.5, 0.5)), holder_alpha=0.9)


if __name__ == "__main__":
    test_flow_params()
    test_flow_params_yaml()
    test_rovella_eval()
    test_preimages()
    test_pl_map()
    test_custom_branch_inverse()
    test_validate_rovella()
    test_validate_random_flows()
    test_validate_schwarzian_strict()
    test_validate_doubling()
    test_holder_alpha()
