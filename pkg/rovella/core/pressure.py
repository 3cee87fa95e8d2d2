# -*- coding: utf-8 -*-
"""
Aims
----
- pressure p(t) = P(-t log|Df|) by periodic-orbit sums (full-branch maps),
  by the Ulam method (any cusp map), or in closed form (piecewise linear maps)
- sampled pressure curves with convexity certificate and slope access
- Lyapunov exponent bounds and the admissible parameter range (t-, t+)

"""

import logging
from collections import namedtuple, OrderedDict
from dataclasses import dataclass

import joblib
import numpy as np
from astropy.table import Table
from scipy.interpolate import PchipInterpolator
from scipy.special import logsumexp
from tqdm import tqdm

from ..errors import StructureError, RangeError
from .cuspmap import PLFullBranchMap, pl_pressure_closed_form
from .ulam import UlamOperator, potential_values

__all__ = [
    "PressureEstimate",
    "PressureCurve",
    "PressureDomain",
    "ExponentBounds",
    "periodic_points",
    "periodic_orbit_pressure",
    "ulam_pressure",
    "closed_form_pressure",
    "pressure_curve",
    "exponent_bounds",
    "admissible_t_range",
]

METHODS = ("periodic-orbit", "ulam", "closed-form", "synthetic")
DEFAULT_RESOLUTION = {"periodic-orbit": 10, "ulam": 1024, "closed-form": 0, "synthetic": 0}

PressureEstimate = namedtuple(
    typename="PressureEstimate",
    field_names=[
        "p",  # pressure value
        "clamped",  # number of floor-clamped cells / orbit points
        "method",
        "resolution",  # orbit depth n or grid size N
    ]
)

ExponentBounds = namedtuple(
    typename="ExponentBounds",
    field_names=[
        "lambda_m",
        "lambda_M",
        "depths",  # 1, ..., n
        "lambda_m_by_depth",  # running min over depths <= n
        "lambda_M_by_depth",  # running max over depths <= n
        "method",  # periodic-orbit | grid-cycle
    ]
)


# ------------------------------------------------------------------
# estimators
# ------------------------------------------------------------------

def _words(k, n):
    """ All words of length n over k letters, shape (k^n, n). """
    codes = np.arange(k ** n, dtype=np.int64)
    return np.array([(codes // k ** (n - 1 - j)) % k for j in range(n)], dtype=np.int8).T


def _inverse_chain(cmap, words, y):
    """ Apply f_{w_{n-1}}^{-1}, ..., f_{w_0}^{-1} to y; returns all chain points. """
    lo, hi = cmap.domain
    n = words.shape[1]
    pts = np.empty(words.shape, dtype=float)
    for j in range(n - 1, -1, -1):
        y = np.clip(y, lo, hi)
        y_new = np.empty_like(y)
        for b, br in enumerate(cmap.branches):
            m = words[:, j] == b
            if np.any(m):
                y_new[m] = br.inverse(y[m])
        pts[:, j] = y_new
        y = y_new
    return pts


def periodic_points(cmap, n, n_bisect=64):
    """ The periodic orbit of every word of length n of a full-branch map.

    The periodic point of the word w is the fixed point of
    f_{w_0}^{-1} o ... o f_{w_{n-1}}^{-1}, located by bisection.

    Returns
    -------
    tuple
        (words, pts) of shape (k^n, n); pts[:, j] lies in branch words[:, j]
        and pts[:, j+1] = f(pts[:, j]).
    """
    if not cmap.is_full_branch():
        raise StructureError("@periodic_points: {} is not a full-branch map, use ulam_pressure".format(cmap.name))
    if not 1 <= n <= 22:
        raise ValueError("@periodic_points: depth n must be in [1, 22] [{}]".format(n))
    words = _words(cmap.k, n)
    lo = np.full(len(words), cmap.domain[0])
    hi = np.full(len(words), cmap.domain[1])
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        h = _inverse_chain(cmap, words, mid)[:, 0]
        above = h > mid
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    pts = _inverse_chain(cmap, words, 0.5 * (lo + hi))
    return words, pts


def _birkhoff_sums(cmap, words, pts, t, floor, extra):
    s = np.zeros(len(words))
    clamped = 0
    for j in range(words.shape[1]):
        psi, c = potential_values(cmap, pts[:, j], words[:, j].astype(int), t, floor, extra)
        s += psi
        clamped += c
    return s, clamped


def periodic_orbit_pressure(cmap, t, n, floor=1e-10, extra=None):
    """ p_n(t) = (1/n) log sum_{f^n x = x} exp(S_n psi(x)), psi = -t log|Df|.

    Parameters
    ----------
    cmap : CuspMapSpec
        Full-branch map.
    t : float
    n : int
        Orbit depth, 1 <= n <= 22.
    floor : float
        Lower clamp of |Df|.
    extra : callable, optional
        Additive potential term.

    Returns
    -------
    PressureEstimate
    """
    words, pts = periodic_points(cmap, n)
    s, clamped = _birkhoff_sums(cmap, words, pts, t, floor, extra)
    return PressureEstimate(p=float(logsumexp(s) / n), clamped=clamped, method="periodic-orbit", resolution=n)


def ulam_pressure(cmap, t, N, floor=1e-10, extra=None, tol=1e-12, max_iters=100000):
    """ log spectral radius of the Ulam matrix.

    Parameters
    ----------
    cmap : CuspMapSpec
    t : float
    N : int
        Grid size, >= 16.
    floor : float
        Lower clamp of |Df|, > 0.
    extra : callable, optional
        Additive potential term.
    tol, max_iters :
        Power iteration controls.

    Returns
    -------
    PressureEstimate
    """
    if N < 16:
        raise ValueError("@ulam_pressure: N must be >= 16 [{}]".format(N))
    op = UlamOperator(cmap, t, N, floor=floor, extra=extra)
    p, pi = op.pressure(tol=tol, max_iters=max_iters)
    return PressureEstimate(p=float(p), clamped=op.clamped, method="ulam", resolution=N)


def closed_form_pressure(cmap, t):
    if not isinstance(cmap, PLFullBranchMap):
        raise StructureError("@closed_form_pressure: only piecewise linear full-branch maps [{}]".format(cmap.name))
    return PressureEstimate(p=pl_pressure_closed_form(cmap, t), clamped=0, method="closed-form", resolution=0)


def estimate_pressure(cmap, t, method="ulam", resolution=None, floor=1e-10, extra=None):
    """ Dispatch to one of the estimators. """
    if resolution is None:
        resolution = DEFAULT_RESOLUTION.get(method, 0)
    if method == "periodic-orbit":
        return periodic_orbit_pressure(cmap, t, resolution, floor=floor, extra=extra)
    elif method == "ulam":
        return ulam_pressure(cmap, t, resolution, floor=floor, extra=extra)
    elif method == "closed-form":
        if extra is not None:
            raise StructureError("@estimate_pressure: closed form is only available for -t log|Df|")
        return closed_form_pressure(cmap, t)
    raise ValueError("@estimate_pressure: bad value for method [{}]".format(method))


# ------------------------------------------------------------------
# pressure curve
# ------------------------------------------------------------------

class PressureCurve:
    """ Sampled graph of t -> p(t).

    Between the nodes the curve is the monotone piecewise cubic (PCHIP)
    interpolant of the node values. Its slope is the exact derivative of the
    interpolant, so value and slope are consistent everywhere on the hull,
    and it does not overshoot the secants of the data.

    Parameters
    ----------
    t_grid : array
        Sorted parameters, >= 3 points.
    values : array
        p(t) estimates.
    method : str
    resolution : int
    map_id : str
    clamped : array, optional
        Clamp counts per t.

    Attributes
    ----------
    convex : bool
        All second differences >= -1e-8.
    monotone : bool
        All first differences <= 1e-8.
    """
    convexity_tol = 1e-8

    def __init__(self, t_grid, values, method="synthetic", resolution=0, map_id="synthetic", clamped=None):
        self.t_grid = np.asarray(t_grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.t_grid.ndim != 1 or len(self.t_grid) < 3:
            raise ValueError("@PressureCurve: need >= 3 grid points")
        if not np.all(np.diff(self.t_grid) > 0):
            raise ValueError("@PressureCurve: t_grid must be strictly increasing")
        if self.values.shape != self.t_grid.shape:
            raise ValueError("@PressureCurve: values and t_grid differ in shape")
        self.method = method
        self.resolution = resolution
        self.map_id = map_id
        self.clamped = np.zeros(len(self.t_grid), dtype=int) if clamped is None else np.asarray(clamped, dtype=int)
        self.first_differences = np.diff(self.values)
        self.second_differences = self.values[2:] - 2 * self.values[1:-1] + self.values[:-2]
        self.convex = bool(np.all(self.second_differences >= -self.convexity_tol))
        self.monotone = bool(np.all(self.first_differences <= self.convexity_tol))
        self._spline = PchipInterpolator(self.t_grid, self.values)
        self.node_slopes = self._spline(self.t_grid, 1)

    @property
    def t_min(self):
        return self.t_grid[0]

    @property
    def t_max(self):
        return self.t_grid[-1]

    def __len__(self):
        return len(self.t_grid)

    def check_range(self, t):
        if not self.t_min <= t <= self.t_max:
            raise RangeError("@PressureCurve: t = {} outside the grid [{}, {}]".format(t, self.t_min, self.t_max))

    def __call__(self, t):
        """ Interpolated p(t) inside the grid hull. """
        return self._spline(t)

    def slope(self, t):
        """ Interpolated Dp(t); equals the node slope at grid points. """
        return self._spline(t, 1)

    def entropy(self, t):
        """ h(mu_t) = p(t) - t Dp(t) """
        return self(t) - t * self.slope(t)

    @property
    def entropy_positive(self):
        return bool(np.all(self.values - self.t_grid * self.node_slopes > 0))

    @property
    def slope_jump(self):
        """ Largest jump between the one-sided slopes at interior nodes (C1 diagnostic). """
        d = self.first_differences / np.diff(self.t_grid)
        return float(np.max(np.abs(np.diff(d))))

    def to_table(self):
        return Table(
            [self.t_grid, self.values, np.full(len(self), self.method),
             np.full(len(self), self.resolution), self.clamped],
            names=["t", "p", "method", "resolution", "clamped_cells"])

    @staticmethod
    def from_function(t_grid, func, method="synthetic", map_id="synthetic"):
        """ Curve of a known function, e.g. a synthetic test curve. """
        t_grid = np.asarray(t_grid, dtype=float)
        return PressureCurve(t_grid, np.array([func(t) for t in t_grid]), method=method, map_id=map_id)

    def __repr__(self):
        return "<PressureCurve {} {}[{}] t in [{:.4g}, {:.4g}] ({} points){}>".format(
            self.map_id, self.method, self.resolution, self.t_min, self.t_max, len(self),
            "" if self.convex else " NONCONVEX")


def pressure_curve(cmap, t_grid, method="ulam", resolution=None, floor=1e-10, n_jobs=1, verbose=False):
    """ Sample p(t) over a parameter grid.

    Parameters
    ----------
    cmap : CuspMapSpec
    t_grid : array
        Sorted, >= 3 points.
    method : str
        periodic-orbit | ulam | closed-form
    resolution : int
        Orbit depth n or grid size N.
    floor : float
    n_jobs : int
        Number of joblib workers; results keep the grid order.
    verbose : bool
        Show a progress bar.

    Returns
    -------
    PressureCurve
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 3 or not np.all(np.diff(t_grid) > 0):
        raise ValueError("@pressure_curve: t_grid must be sorted with >= 3 points")
    if resolution is None:
        resolution = DEFAULT_RESOLUTION[method]
    ts = tqdm(t_grid, desc="@Pressure") if verbose else t_grid
    estimates = joblib.Parallel(n_jobs=n_jobs)(
        joblib.delayed(estimate_pressure)(cmap, t, method, resolution, floor) for t in ts)
    curve = PressureCurve(
        t_grid, [e.p for e in estimates], method=method, resolution=resolution, map_id=cmap.name,
        clamped=[e.clamped for e in estimates])
    if not curve.convex:
        logging.warning("@Pressure: convexity violated for {}, min second difference {:.3e}".format(
            cmap.name, curve.second_differences.min()))
    return curve


# ------------------------------------------------------------------
# exponent bounds and admissible range
# ------------------------------------------------------------------

def _grid_cycle_bounds(cmap, n, N, floor):
    """ Extreme cycle means of log|Df| over cycles of length <= n in the Ulam graph.
    Cells carry log|Df| at their midpoint, as in the Ulam potential. """
    op = UlamOperator(cmap, 0., N, floor=floor)
    rows, cols = op.matrix.nonzero()
    df = np.abs(cmap.derivative(op.mid, op.branch))
    w_max = w_min = np.log(np.maximum(df, floor))
    lam_M, lam_m = [], []
    D_max = np.full((N, N), -np.inf)
    D_min = np.full((N, N), np.inf)
    D_max[rows, cols] = w_max[rows]
    D_min[rows, cols] = w_min[rows]
    for k in range(1, n + 1):
        if k > 1:
            new_max = np.full((N, N), -np.inf)
            new_min = np.full((N, N), np.inf)
            # new[s, j] = ext_{i -> j} D[s, i] + w(i)
            np.maximum.at(new_max.T, cols, (D_max[:, rows] + w_max[rows]).T)
            np.minimum.at(new_min.T, cols, (D_min[:, rows] + w_min[rows]).T)
            D_max, D_min = new_max, new_min
        diag_max = np.diag(D_max)
        diag_min = np.diag(D_min)
        lam_M.append(diag_max.max() / k if np.any(np.isfinite(diag_max)) else -np.inf)
        lam_m.append(diag_min.min() / k if np.any(np.isfinite(diag_min)) else np.inf)
    return np.array(lam_m), np.array(lam_M)


def exponent_bounds(cmap, n=10, N=256, floor=1e-10):
    """ Estimate lambda_m = inf lambda(mu) and lambda_M = sup lambda(mu).

    Full-branch maps use the Birkhoff averages of log|Df| over all periodic
    orbits of period <= n. Other maps use the extreme cycle means of the
    Ulam graph on N cells with cycles of length <= n.

    Returns
    -------
    ExponentBounds
        Running extremes over depths, so the estimates widen with n.
    """
    assert n >= 1
    if cmap.is_full_branch():
        method = "periodic-orbit"
        lam_m, lam_M = [], []
        for m in range(1, n + 1):
            words, pts = periodic_points(cmap, m)
            s, _ = _birkhoff_sums(cmap, words, pts, -1., floor, None)
            lam_m.append(s.min() / m)
            lam_M.append(s.max() / m)
        lam_m, lam_M = np.array(lam_m), np.array(lam_M)
    else:
        method = "grid-cycle"
        lam_m, lam_M = _grid_cycle_bounds(cmap, n, N, floor)
    lam_m = np.minimum.accumulate(lam_m)
    lam_M = np.maximum.accumulate(lam_M)
    logging.info("@exponent_bounds: {} ({}, n={}): lambda_m = {:.6g}, lambda_M = {:.6g}".format(
        cmap.name, method, n, lam_m[-1], lam_M[-1]))
    return ExponentBounds(lambda_m=float(lam_m[-1]), lambda_M=float(lam_M[-1]), depths=np.arange(1, n + 1),
                          lambda_m_by_depth=lam_m, lambda_M_by_depth=lam_M, method=method)


def _fmt_inf(v):
    if np.isposinf(v):
        return "inf"
    if np.isneginf(v):
        return "-inf"
    return float(v)


@dataclass(frozen=True)
class PressureDomain:
    """ Exponent bounds and the admissible range (t_minus, t_plus). """
    lambda_m: float
    lambda_M: float
    t_minus: float
    t_plus: float
    flags: tuple = ()
    t_minus_bracket: tuple = (-np.inf, np.inf)
    t_plus_bracket: tuple = (-np.inf, np.inf)

    def contains(self, t):
        return self.t_minus < t < self.t_plus

    @property
    def resolved(self):
        return not any(f.endswith("unresolved") for f in self.flags)

    def to_dict(self):
        d = OrderedDict()
        d["lambda_m"] = _fmt_inf(self.lambda_m)
        d["lambda_M"] = _fmt_inf(self.lambda_M)
        d["t_minus"] = _fmt_inf(self.t_minus)
        d["t_plus"] = _fmt_inf(self.t_plus)
        d["flags"] = list(self.flags)
        return d


def _crossing(t, g, k0, k1):
    """ zero of the linear interpolant of g between nodes k0 and k1 """
    if g[k1] == g[k0]:
        return t[k0]
    return float(t[k0] - g[k0] * (t[k1] - t[k0]) / (g[k1] - g[k0]))


def admissible_t_range(curve, bounds, tol=1e-9, linear_tol=1e-6):
    """ Scan a pressure curve for t- = inf{t: p(t) > -lambda_M t} and
    t+ = sup{t: p(t) > -lambda_m t}.

    Parameters
    ----------
    curve : PressureCurve
    bounds : ExponentBounds or tuple
        (lambda_m, lambda_M)
    tol : float
        p(t) + lambda t must exceed tol to count as strictly above.
    linear_tol : float
        Slope tolerance of the linear-regime report.

    Returns
    -------
    PressureDomain
        Endpoints are -inf / inf when no crossing occurs inside the grid.
    """
    lam_m, lam_M = (bounds.lambda_m, bounds.lambda_M) if isinstance(bounds, ExponentBounds) else bounds
    t, p = curve.t_grid, curve.values
    flags = []
    if not curve.convex:
        logging.warning("@admissible_t_range: curve {} is not convex".format(curve.map_id))
        flags.append("nonconvex-curve")

    above_M = p + lam_M * t > tol
    above_m = p + lam_m * t > tol

    t_minus, t_minus_bracket = -np.inf, (-np.inf, t[0])
    if not np.any(above_M):
        flags.append("t_minus-unresolved")
        t_minus, t_minus_bracket = np.nan, (t[0], t[-1])
    elif not np.all(above_M):
        k = int(np.argmax(above_M))  # first node above
        if k == 0 or not np.all(above_M[k:]):
            flags.append("t_minus-unresolved")
        if k > 0:
            g = p + lam_M * t
            t_minus = _crossing(t, g, k - 1, k)
            t_minus_bracket = (float(t[k - 1]), float(t[k]))
            slopes = curve.node_slopes[t <= t[k - 1]][:-1]
            if slopes.size and np.all(np.abs(slopes + lam_M) <= linear_tol):
                flags.append("linear-below-t_minus")

    t_plus, t_plus_bracket = np.inf, (t[-1], np.inf)
    if not np.any(above_m):
        flags.append("t_plus-unresolved")
        t_plus, t_plus_bracket = np.nan, (t[0], t[-1])
    elif not np.all(above_m):
        k = len(t) - 1 - int(np.argmax(above_m[::-1]))  # last node above
        if k == len(t) - 1 or not np.all(above_m[:k + 1]):
            flags.append("t_plus-unresolved")
        if k < len(t) - 1:
            g = p + lam_m * t
            t_plus = _crossing(t, g, k, k + 1)
            t_plus_bracket = (float(t[k]), float(t[k + 1]))
            slopes = curve.node_slopes[t >= t[k + 1]][1:]
            if slopes.size and np.all(np.abs(slopes + lam_m) <= linear_tol):
                flags.append("linear-above-t_plus")

    if not (t_minus < 0 < 1 <= t_plus):
        flags.append("outside-acip-class")
    dom = PressureDomain(lambda_m=lam_m, lambda_M=lam_M, t_minus=t_minus, t_plus=t_plus, flags=tuple(flags),
                         t_minus_bracket=t_minus_bracket, t_plus_bracket=t_plus_bracket)
    logging.info("@admissible_t_range: {} t- = {}, t+ = {}, flags {}".format(
        curve.map_id, t_minus, t_plus, list(flags)))
    return dom
