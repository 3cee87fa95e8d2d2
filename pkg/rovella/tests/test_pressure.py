import numpy as np
import pytest

from rovella.core.cuspmap import FlowParams, PLFullBranchMap, pl_pressure_closed_form, rovella_map_from_flow
from rovella.core.pressure import (PressureCurve, admissible_t_range, estimate_pressure, exponent_bounds,
                                   periodic_orbit_pressure, periodic_points, pressure_curve, ulam_pressure)
from rovella.core.ulam import UlamOperator, power_iteration, ulam_grid
from rovella.errors import RangeError, StructureError

PL46 = PLFullBranchMap((0.4, 0.6))
DOUBLING = PLFullBranchMap((0.5, 0.5))
ROVELLA = rovella_map_from_flow(FlowParams())


def test_periodic_points():
    words, pts = periodic_points(PL46, 3)
    assert words.shape == (8, 3)
    # pts[:, j + 1] = f(pts[:, j]) and the orbit closes
    for j in range(3):
        np.testing.assert_allclose(PL46.evaluate(pts[:, j], words[:, j].astype(int)), pts[:, (j + 1) % 3],
                                   atol=1e-12)
    with pytest.raises(StructureError):
        periodic_points(ROVELLA, 2)


def test_periodic_orbit_exact():
    for cmap in (PL46, DOUBLING):
        for n in range(1, 11):
            for t in (-2., -1., 0., 0.5, 1., 2.):
                est = periodic_orbit_pressure(cmap, t, n)
                assert abs(est.p - np.log(np.sum(np.asarray(cmap.weights) ** t))) <= 1e-12


def test_ulam_grid():
    lo, hi, branch = ulam_grid(ROVELLA, 1024)
    assert len(lo) == 1024
    np.testing.assert_allclose(lo[1:], hi[:-1], atol=0)
    assert lo[0] == -0.5 and hi[-1] == 0.5
    # cells do not straddle the cusp and shrink towards it
    assert 0. in hi and 0. in lo
    k = int(np.searchsorted(hi, 0.))
    assert hi[k] - lo[k] < 1e-6
    assert np.all(branch[lo >= 0] == 1) and np.all(branch[hi <= 0] == 0)


def test_ulam_doubling_convergence():
    errors = []
    for N in (256, 512, 1024, 2048, 4096):
        p0 = ulam_pressure(DOUBLING, 0., N).p
        p1 = ulam_pressure(DOUBLING, 1., N).p
        errors.append(max(abs(p0 - np.log(2)), abs(p1)))
    assert errors[-1] <= 5e-3
    assert all(e1 <= e0 + 1e-12 for e0, e1 in zip(errors[:-1], errors[1:]))


def test_ulam_pl():
    for t in (-1., 0., 1., 2.):
        assert abs(ulam_pressure(PL46, t, 1024).p - pl_pressure_closed_form(PL46, t)) <= 5e-3


def test_ulam_stochastic():
    # at t = 1 the affine Ulam matrix is row-stochastic
    op = UlamOperator(DOUBLING, 1., 256)
    rows = np.asarray(op.matrix.sum(axis=1)).ravel() * np.exp(op.log_scale)
    np.testing.assert_allclose(rows, 1., atol=1e-12)
    # at t = 0 Lebesgue is a left eigenvector
    op = UlamOperator(PL46, 0., 256)
    left = op.matrix.T @ op.width
    np.testing.assert_allclose(left / op.width, left[0] / op.width[0], rtol=1e-12)


def test_power_iteration():
    A = np.array([[2., 1.], [1., 2.]])
    from scipy import sparse
    res = power_iteration(sparse.csr_matrix(A))
    assert abs(res.rho - 3.) < 1e-10
    np.testing.assert_allclose(res.vector, [0.5, 0.5], atol=1e-10)
    assert res.ratio < 0.5
    # a 2-cycle: the plain iteration oscillates, the shifted one converges
    C = sparse.csr_matrix(np.array([[0., 2.], [0.5, 0.]]))
    res = power_iteration(C)
    assert abs(res.rho - 1.) < 1e-10
    np.testing.assert_allclose(res.vector, [2 / 3, 1 / 3], atol=1e-10)
    assert res.n_iter > 25
    assert res.ratio == 1.
    res = power_iteration(C, shift=1.)
    assert abs(res.rho - 1.) < 1e-10


def test_estimate_dispatch():
    assert estimate_pressure(PL46, 1., "closed-form").p == pl_pressure_closed_form(PL46, 1.)
    with pytest.raises(StructureError):
        estimate_pressure(ROVELLA, 1., "closed-form")
    with pytest.raises(ValueError):
        estimate_pressure(PL46, 1., "monte-carlo")


def test_curve_convexity():
    t_grid = np.linspace(-2, 2, 81)
    for method in ("closed-form", "periodic-orbit", "ulam"):
        curve = pressure_curve(PL46, t_grid, method=method)
        assert curve.convex and curve.monotone
        assert np.all(curve.second_differences >= -1e-8)
    curve = pressure_curve(ROVELLA, t_grid, method="ulam", resolution=1024)
    assert np.all(curve.second_differences >= -1e-8)
    assert curve.monotone
    assert pressure_curve(PL46, t_grid, method="closed-form").entropy_positive


def test_curve_parallel_order():
    t_grid = np.linspace(-1, 1, 9)
    c1 = pressure_curve(PL46, t_grid, method="periodic-orbit", resolution=6, n_jobs=1)
    c2 = pressure_curve(PL46, t_grid, method="periodic-orbit", resolution=6, n_jobs=2)
    np.testing.assert_array_equal(c1.values, c2.values)


def test_curve_slope():
    curve = PressureCurve.from_function(np.linspace(-2, 2, 401), lambda t: pl_pressure_closed_form(PL46, t),
                                        method="closed-form", map_id=PL46.name)
    assert abs(float(curve.slope(1.)) + 0.673012) < 1e-6
    assert abs(float(curve(1.))) < 1e-12
    with pytest.raises(RangeError):
        curve.check_range(2.5)
    assert not PressureCurve([0., 1., 2.], [0., 1., 0.]).convex
    tab = curve.to_table()
    assert tab.colnames == ["t", "p", "method", "resolution", "clamped_cells"]


def test_exponent_bounds():
    b = exponent_bounds(PL46, n=6)
    assert abs(b.lambda_m - np.log(5 / 3)) < 1e-12
    assert abs(b.lambda_M - np.log(2.5)) < 1e-12
    assert np.all(np.diff(b.lambda_m_by_depth) <= 0)
    b = exponent_bounds(DOUBLING, n=4)
    assert abs(b.lambda_m - np.log(2)) < 1e-12 and abs(b.lambda_M - np.log(2)) < 1e-12
    b = exponent_bounds(ROVELLA, n=4, N=128)
    assert b.method == "grid-cycle"
    assert 0 < b.lambda_m < b.lambda_M < np.log(1.9)


def test_slope_within_exponent_bounds():
    t_fine = np.linspace(-2, 2, 801)
    for cmap, method, res in ((PL46, "closed-form", 0), (PL46, "periodic-orbit", 8), (DOUBLING, "ulam", 256)):
        b = exponent_bounds(cmap, n=6)
        curve = pressure_curve(cmap, np.linspace(-2, 2, 81), method=method, resolution=res)
        slopes = curve.slope(t_fine)
        assert np.all(slopes >= -b.lambda_M - 1e-9)
        assert np.all(slopes <= -b.lambda_m + 1e-9)


def test_admissible_range_synthetic():
    t_grid = np.linspace(-2, 2, 81)
    curve = PressureCurve.from_function(t_grid, lambda t: max(-0.5 * t, -t + 0.3))
    dom = admissible_t_range(curve, (0.5, 1.))
    assert np.isneginf(dom.t_minus)
    assert abs(dom.t_plus - 0.6) < 1e-9
    assert "linear-above-t_plus" in dom.flags
    assert dom.contains(0.) and not dom.contains(0.7)

    curve = PressureCurve.from_function(t_grid, lambda t: max(-t, -0.5 * t + 0.3))
    dom = admissible_t_range(curve, (0.5, 1.))
    assert abs(dom.t_minus + 0.6) < 1e-9
    assert np.isposinf(dom.t_plus)
    assert "linear-below-t_minus" in dom.flags
    assert dom.to_dict()["t_plus"] == "inf"


def test_admissible_range_pl():
    t_grid = np.linspace(-2, 2, 81)
    curve = pressure_curve(PL46, t_grid, method="closed-form")
    dom = admissible_t_range(curve, exponent_bounds(PL46, n=4))
    assert np.isneginf(dom.t_minus) and np.isposinf(dom.t_plus)
    assert dom.resolved
    curve = pressure_curve(DOUBLING, t_grid, method="periodic-orbit", resolution=4)
    dom = admissible_t_range(curve, exponent_bounds(DOUBLING, n=4))
    assert dom.to_dict()["t_minus"] == "-inf" and dom.to_dict()["t_plus"] == "inf"


if __name__ == "__main__":
    test_periodic_points()
    test_periodic_orbit_exact()
    test_ulam_grid()
    test_ulam_doubling_convergence()
    test_ulam_pl()
    test_ulam_stochastic()
    test_power_iteration()
    test_estimate_dispatch()
    test_curve_convexity()
    test_curve_parallel_order()
    test_curve_slope()
    test_exponent_bounds()
    test_slope_within_exponent_bounds()
    test_admissible_range_synthetic()
    test_admissible_range_pl()
