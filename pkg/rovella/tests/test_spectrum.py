import numpy as np
import pytest

from scipy.optimize import minimize_scalar

from rovella.core.cuspmap import FlowParams, PLFullBranchMap, pl_pressure_closed_form, rovella_map_from_flow
from rovella.core.pressure import PressureCurve, admissible_t_range, exponent_bounds, pressure_curve
from rovella.core.spectrum import (birkhoff_exponent, lyapunov_spectrum_flow, lyapunov_spectrum_interval,
                                   pressure_derivative, solve_t_alpha, spectrum_domain)
from rovella.errors import EmptyDomainError, NearCuspWarning, RangeError

PL46 = PLFullBranchMap((0.4, 0.6))
DOUBLING = PLFullBranchMap((0.5, 0.5))
LAMBDA_LEB = 0.4 * np.log(2.5) + 0.6 * np.log(5 / 3)


def _pl_curve(step=0.05, t_max=2.):
    n = int(round(2 * t_max / step))
    return pressure_curve(PL46, np.linspace(-t_max, t_max, n + 1), method="closed-form")


def _pl_domain(curve):
    return spectrum_domain(curve, admissible_t_range(curve, exponent_bounds(PL46, n=4)))


def test_pressure_derivative():
    curve = _pl_curve(step=0.01)
    d = pressure_derivative(curve, 1.)
    assert abs(d.value + 0.673012) < 1e-6
    assert not d.one_sided
    assert pressure_derivative(curve, -2.).one_sided
    dc = pressure_curve(DOUBLING, np.linspace(-2, 2, 81), method="closed-form")
    assert abs(pressure_derivative(dc, 0.3).value + np.log(2)) < 1e-12
    with pytest.raises(RangeError):
        pressure_derivative(curve, 3.)
    # slope tends to -lambda_m for large t
    far = _pl_curve(step=0.1, t_max=40.)
    assert abs(pressure_derivative(far, 39.).value + np.log(5 / 3)) < 1e-6


def test_spectrum_domain():
    dom = _pl_domain(_pl_curve())
    assert abs(dom.alpha1 - 0.510826) < 1e-6
    assert abs(dom.alpha2 - 0.916291) < 1e-6
    assert not dom.empty
    dc = pressure_curve(DOUBLING, np.linspace(-2, 2, 81), method="periodic-orbit", resolution=4)
    dd = spectrum_domain(dc, admissible_t_range(dc, exponent_bounds(DOUBLING, n=4)))
    assert dd.empty and abs(dd.alpha1 - np.log(2)) < 1e-12
    # without bounds the slope range of the sampled curve is used
    sc = PressureCurve.from_function(np.linspace(-1, 1, 21), lambda t: t ** 2 - t)
    ds = spectrum_domain(sc)
    assert abs(ds.alpha1 + 0.9) < 1e-12
    assert abs(ds.alpha2 - 2.9) < 1e-12


def test_solve_t_alpha():
    curve = _pl_curve(step=0.01)
    dom = _pl_domain(curve)
    lp = solve_t_alpha(curve, 0.673012, domain=dom)
    assert lp.resolved
    assert abs(lp.t_alpha - 1.) < 1e-4
    assert abs(lp.value - 1.) < 1e-4
    assert lp.residual <= 1e-8
    # close to alpha2 the root is far below the grid
    lp = solve_t_alpha(curve, 0.9, domain=dom)
    assert not lp.resolved and lp.t_alpha == curve.t_min
    with pytest.raises(RangeError):
        solve_t_alpha(curve, 1.0, domain=dom)
    dc = pressure_curve(DOUBLING, np.linspace(-2, 2, 81), method="closed-form")
    with pytest.raises(EmptyDomainError):
        solve_t_alpha(dc, np.log(2))


def test_interval_spectrum():
    curve = _pl_curve()
    dom = _pl_domain(curve)
    spec = lyapunov_spectrum_interval(curve, 41, domain=dom)
    assert len(spec) == 41
    ok = spec.resolved
    assert ok.sum() > 10
    assert np.all(spec.L_interval[ok] <= 1 + 1e-9)
    assert np.all(spec.L_interval[ok] >= 0)
    assert np.all(spec.legendre_residual[ok] <= 1e-9)
    assert np.all(np.diff(spec.t_alpha) <= 1e-10)
    # convex duality against every grid node
    for a, L in zip(spec.alpha[ok], spec.L_interval[ok]):
        assert np.all(curve.values + curve.t_grid * a >= a * L - 1e-9)
    # entropy route agrees up to the root residual
    np.testing.assert_allclose(spec.entropy_route[ok], spec.L_interval[ok], atol=1e-6)

    spec = lyapunov_spectrum_interval(curve, [LAMBDA_LEB], domain=dom)
    assert abs(spec.L_interval[0] - 1.) < 1e-4
    a0 = -float(curve.slope(0.))
    spec = lyapunov_spectrum_interval(curve, [a0], domain=dom)
    assert abs(spec.t_alpha[0]) < 1e-8
    assert abs(spec.L_interval[0] - np.log(2) / a0) < 1e-8


def test_unresolved_rows():
    curve = _pl_curve()
    spec = lyapunov_spectrum_interval(curve, [0.3, 0.673012, 1.2], domain=_pl_domain(curve))
    assert list(spec.resolved) == [False, True, False]
    assert np.isnan(spec.L_interval[0]) and np.isnan(spec.L_interval[2])
    tab = spec.to_table()
    assert tab.colnames == ["alpha", "t_alpha", "L_interval", "L_flow", "residual", "resolved"]


def test_spectrum_near_grid_end():
    # t_alpha close to the last node of a coarse grid
    curve = _pl_curve(step=0.05)
    alpha = 0.636326728656613
    lp = solve_t_alpha(curve, alpha, domain=_pl_domain(curve))
    assert lp.resolved
    assert 1.9 < lp.t_alpha < 2.
    exact = minimize_scalar(lambda t: pl_pressure_closed_form(PL46, t) + t * alpha, bounds=(1., 3.),
                            method="bounded", options=dict(xatol=1e-12)).fun / alpha
    assert abs(lp.value - exact) < 1e-6
    spec = lyapunov_spectrum_interval(curve, [alpha], domain=_pl_domain(curve))
    assert spec.resolved[0] and abs(spec.L_interval[0] - exact) < 1e-6
    spec = lyapunov_spectrum_interval(curve, 41, domain=_pl_domain(curve))
    assert np.all(np.diff(spec.t_alpha) <= 1e-10)
    # the interpolated slope is non-decreasing on a convex curve
    slopes = curve.slope(np.linspace(-2, 2, 4001))
    assert np.all(np.diff(slopes) >= -1e-12)


def test_flow_spectrum():
    curve = _pl_curve()
    dom = _pl_domain(curve)
    interval = lyapunov_spectrum_interval(curve, 21, domain=dom)
    flow = lyapunov_spectrum_flow(curve, 21, domain=dom)
    ok = interval.resolved
    np.testing.assert_allclose(flow.values[ok] - interval.values[ok], 2., atol=1e-12)
    np.testing.assert_array_equal(flow.t_alpha, interval.t_alpha)
    peak = lyapunov_spectrum_flow(curve, [LAMBDA_LEB], domain=dom)
    assert abs(peak.values[0] - 3.) < 1e-4

    dc = pressure_curve(DOUBLING, np.linspace(-2, 2, 81), method="periodic-orbit", resolution=4)
    dd = spectrum_domain(dc, admissible_t_range(dc, exponent_bounds(DOUBLING, n=4)))
    empty = lyapunov_spectrum_flow(dc, 21, domain=dd)
    assert empty.empty and len(empty) == 0
    doc = empty.to_dict()
    assert doc["domain"] == "empty"
    assert abs(doc["alpha"] - np.log(2)) < 1e-12


def test_birkhoff_exponent():
    assert abs(birkhoff_exponent(DOUBLING, 1 / 3, 10) - np.log(2)) < 1e-15
    assert abs(birkhoff_exponent(PL46, 0., 50) - np.log(2.5)) < 1e-15
    rng = np.random.default_rng(0)
    est = birkhoff_exponent(PL46, rng.uniform(0, 1), 10000)
    assert abs(est - 0.673012) < 0.02
    cmap = rovella_map_from_flow(FlowParams())
    with pytest.warns(NearCuspWarning):
        birkhoff_exponent(cmap, 1e-120, 3)


if __name__ == "__main__":
    test_pressure_derivative()
    test_spectrum_domain()
    test_solve_t_alpha()
    test_interval_spectrum()
    test_unresolved_rows()
    test_spectrum_near_grid_end()
    test_flow_spectrum()
    test_birkhoff_exponent()
