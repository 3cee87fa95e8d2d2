# -*- coding: utf-8 -*-
"""
Aims
----
- Lyapunov spectrum of the interval map as the Legendre transform of the
  sampled pressure curve: L(alpha) = inf_t (p(t) + t alpha) / alpha
- the flow spectrum, shifted by 2
- the spectral domain (alpha1, alpha2) and finite-time Birkhoff exponents

"""

import logging
import warnings
from collections import namedtuple, OrderedDict

import numpy as np
from astropy.table import Table
from scipy.optimize import brentq, minimize_scalar

from ..errors import (DomainError, EmptyDomainError, InconsistencyError, NearCuspWarning, RangeError)

__all__ = [
    "Slope",
    "SpectrumDomain",
    "LegendrePoint",
    "SpectrumCurve",
    "pressure_derivative",
    "spectrum_domain",
    "solve_t_alpha",
    "lyapunov_spectrum_interval",
    "lyapunov_spectrum_flow",
    "birkhoff_exponent",
]

Slope = namedtuple(
    typename="Slope",
    field_names=[
        "value",  # Dp(t)
        "one_sided",  # True if an end node (one-sided difference) enters the estimate
    ]
)

SpectrumDomain = namedtuple(
    typename="SpectrumDomain",
    field_names=[
        "alpha1",  # lower end, from t+ (or lambda_m)
        "alpha2",  # upper end, from t- (or lambda_M)
        "empty",  # alpha1 = alpha2
    ]
)

LegendrePoint = namedtuple(
    typename="LegendrePoint",
    field_names=[
        "alpha",
        "t_alpha",  # Dp(t_alpha) = -alpha
        "value",  # (p(t_alpha) + t_alpha alpha) / alpha
        "residual",  # |Dp(t_alpha) + alpha|
        "resolved",  # False if t_alpha falls outside the grid hull
    ]
)


def pressure_derivative(curve, t):
    """ Dp(t) from the sampled curve.

    This is the derivative of the monotone cubic interpolant. Between an end
    node and its neighbour the interpolant only sees data on one side, and
    the result is flagged.

    Returns
    -------
    Slope
    """
    curve.check_range(t)
    tg = curve.t_grid
    one_sided = bool(t < tg[1] or t > tg[-2])
    return Slope(value=float(curve.slope(t)), one_sided=one_sided)


def spectrum_domain(curve, dom=None, tol=1e-9):
    """ The open interval (alpha1, alpha2) of admissible exponents.

    alpha1 = -D^-p(t+) and alpha2 = -D^+p(t-). An infinite end uses the
    limiting slope, i.e. lambda_m for t+ = inf and lambda_M for t- = -inf.
    Without a PressureDomain the slopes at the ends of the grid are used.

    Parameters
    ----------
    curve : PressureCurve
    dom : PressureDomain, optional
    tol : float
        alpha2 - alpha1 <= tol (relative) counts as an empty domain.

    Returns
    -------
    SpectrumDomain
    """
    t, p = curve.t_grid, curve.values
    seg = np.diff(p) / np.diff(t)
    if dom is None:
        alpha1, alpha2 = -seg[-1], -seg[0]
    else:
        if np.isposinf(dom.t_plus):
            alpha1 = dom.lambda_m
        elif np.isnan(dom.t_plus):
            alpha1 = -seg[-1]
        else:
            k = max(int(np.searchsorted(t, dom.t_plus, side="right")) - 1, 1)
            alpha1 = -seg[k - 1]
        if np.isneginf(dom.t_minus):
            alpha2 = dom.lambda_M
        elif np.isnan(dom.t_minus):
            alpha2 = -seg[0]
        else:
            k = min(int(np.searchsorted(t, dom.t_minus, side="left")), len(t) - 2)
            alpha2 = -seg[k]
    alpha1, alpha2 = float(alpha1), float(alpha2)
    empty = alpha2 - alpha1 <= tol * max(1., abs(alpha1), abs(alpha2))
    if empty:
        logging.info("@spectrum_domain: {} has an empty spectral domain at alpha = {:.12g}".format(
            curve.map_id, alpha1))
    return SpectrumDomain(alpha1=alpha1, alpha2=alpha2, empty=bool(empty))


def solve_t_alpha(curve, alpha, domain=None, residual_tol=1e-8):
    """ Solve Dp(t) = -alpha on the grid hull.

    Parameters
    ----------
    curve : PressureCurve
    alpha : float
        Exponent inside the open domain (alpha1, alpha2).
    domain : SpectrumDomain, optional
        Defaults to spectrum_domain(curve).

    Returns
    -------
    LegendrePoint
        resolved is False when t_alpha lies outside the grid; t_alpha is
        then the nearest grid end and no extrapolation is done.
    """
    dom = spectrum_domain(curve) if domain is None else domain
    if dom.empty:
        raise EmptyDomainError(dom.alpha1)
    if not dom.alpha1 < alpha < dom.alpha2:
        raise RangeError("@solve_t_alpha: alpha = {} outside ({}, {})".format(alpha, dom.alpha1, dom.alpha2))

    def func(t):
        return float(curve.slope(t)) + alpha

    resolved = True
    if func(curve.t_min) > 0:
        t_alpha, resolved = curve.t_min, False
    elif func(curve.t_max) < 0:
        t_alpha, resolved = curve.t_max, False
    else:
        t_alpha = brentq(func, curve.t_min, curve.t_max, xtol=1e-15, maxiter=500)
    residual = abs(func(t_alpha))
    if resolved and residual > residual_tol:
        raise InconsistencyError("@solve_t_alpha: root residual {:.3e} at alpha = {}".format(residual, alpha),
                                 first=residual, second=residual_tol)
    if not resolved:
        logging.info("@solve_t_alpha: alpha = {} needs t outside the grid, using t = {}".format(alpha, t_alpha))
    value = (float(curve(t_alpha)) + t_alpha * alpha) / alpha
    return LegendrePoint(alpha=alpha, t_alpha=float(t_alpha), value=float(value), residual=float(residual),
                         resolved=resolved)


def _direct_infimum(curve, alpha):
    """ inf_t (p(t) + t alpha) over the grid hull, refined around the best node """
    g = curve.values + curve.t_grid * alpha
    k = int(np.argmin(g))
    a = curve.t_grid[max(k - 1, 0)]
    b = curve.t_grid[min(k + 1, len(curve) - 1)]
    res = minimize_scalar(lambda t: float(curve(t)) + t * alpha, bounds=(a, b), method="bounded",
                          options=dict(xatol=1e-12))
    return min(float(res.fun), float(g[k]))


class SpectrumCurve:
    """ Sampled Lyapunov spectrum over the domain (alpha1, alpha2).

    Parameters
    ----------
    alpha, t_alpha, L_interval, residual, resolved : array
        Per-sample data; unresolved samples have resolved = False.
    domain : SpectrumDomain
    kind : str
        "interval" or "flow"; values returns L_interval or L_flow.
    map_id : str
    entropy_route : array, optional
        h(mu_{t_alpha}) / alpha per sample.
    p_at_t : array, optional
        p(t_alpha) used for the Legendre identity.
    """

    def __init__(self, alpha, t_alpha, L_interval, residual, resolved, domain, kind="interval",
                 map_id="", entropy_route=None, p_at_t=None):
        self.alpha = np.asarray(alpha, dtype=float)
        self.t_alpha = np.asarray(t_alpha, dtype=float)
        self.L_interval = np.asarray(L_interval, dtype=float)
        self.residual = np.asarray(residual, dtype=float)
        self.resolved = np.asarray(resolved, dtype=bool)
        self.domain = domain
        assert kind in ("interval", "flow")
        self.kind = kind
        self.map_id = map_id
        self.entropy_route = np.full(len(self.alpha), np.nan) if entropy_route is None else np.asarray(entropy_route)
        self.p_at_t = np.full(len(self.alpha), np.nan) if p_at_t is None else np.asarray(p_at_t)
        self._check()

    def _check(self):
        finite = np.isfinite(self.t_alpha)
        if np.any(np.diff(self.alpha[finite]) < 0):
            raise InconsistencyError("@SpectrumCurve: alpha must be increasing")
        if np.any(np.diff(self.t_alpha[finite]) > 1e-10):
            raise InconsistencyError("@SpectrumCurve: t_alpha increases with alpha")
        ok = np.isfinite(self.p_at_t) & finite
        if np.any(self.legendre_residual[ok] > 1e-9):
            raise InconsistencyError("@SpectrumCurve: Legendre identity residual {:.3e}".format(
                self.legendre_residual[ok].max()))

    @property
    def empty(self):
        return self.domain.empty

    @property
    def L_flow(self):
        return self.L_interval + 2.

    @property
    def values(self):
        return self.L_interval if self.kind == "interval" else self.L_flow

    @property
    def legendre_residual(self):
        """ |alpha L - p(t_alpha) - t_alpha alpha| """
        return np.abs(self.alpha * self.L_interval - self.p_at_t - self.t_alpha * self.alpha)

    @property
    def exceeds_one(self):
        """ interval values above 1 + 1e-9 on resolved samples """
        return bool(np.any(self.L_interval[self.resolved] > 1 + 1e-9))

    @property
    def smoothness(self):
        """ max |second difference| of L over resolved samples (C1 diagnostic) """
        L = self.L_interval[self.resolved]
        return float(np.max(np.abs(np.diff(L, 2)))) if len(L) > 2 else 0.

    def __len__(self):
        return len(self.alpha)

    def as_flow(self):
        return SpectrumCurve(self.alpha, self.t_alpha, self.L_interval, self.residual, self.resolved,
                             self.domain, kind="flow", map_id=self.map_id, entropy_route=self.entropy_route,
                             p_at_t=self.p_at_t)

    def to_table(self):
        return Table([self.alpha, self.t_alpha, self.L_interval, self.L_flow, self.residual,
                      self.resolved.astype(int)],
                     names=["alpha", "t_alpha", "L_interval", "L_flow", "residual", "resolved"])

    def to_dict(self):
        """ Document form, used for the empty domain. """
        d = OrderedDict()
        d["map"] = self.map_id
        d["kind"] = self.kind
        if self.empty:
            d["domain"] = "empty"
            d["alpha"] = float(self.domain.alpha1)
        else:
            d["domain"] = [float(self.domain.alpha1), float(self.domain.alpha2)]
            d["samples"] = len(self)
            d["unresolved"] = int((~self.resolved).sum())
            d["smoothness"] = self.smoothness
        return d

    @staticmethod
    def empty_curve(domain, kind="interval", map_id=""):
        z = np.zeros(0)
        return SpectrumCurve(z, z, z, z, np.zeros(0, dtype=bool), domain, kind=kind, map_id=map_id)

    def __repr__(self):
        if self.empty:
            return "<SpectrumCurve {} {} empty at alpha = {:.6g}>".format(self.map_id, self.kind, self.domain.alpha1)
        return "<SpectrumCurve {} {} alpha in ({:.6g}, {:.6g}), {} samples, {} unresolved>".format(
            self.map_id, self.kind, self.domain.alpha1, self.domain.alpha2, len(self), (~self.resolved).sum())


def _alpha_samples(alpha_grid, dom):
    if np.ndim(alpha_grid) == 0:
        n = int(alpha_grid)
        return np.linspace(dom.alpha1, dom.alpha2, n + 2)[1:-1]
    return np.sort(np.asarray(alpha_grid, dtype=float))


def lyapunov_spectrum_interval(curve, alpha_grid, domain=None, agreement_tol=1e-6):
    """ L(alpha) = inf_t (p(t) + t alpha) / alpha for the interval map.

    Every sample is computed by the root route (solve_t_alpha). Resolved
    samples are also computed by direct minimization over the grid hull, and
    the two must agree; an unresolved sample keeps the value at the grid end.

    Parameters
    ----------
    curve : PressureCurve
    alpha_grid : int or array
        Number of interior samples of the domain, or explicit exponents.
        Exponents outside the open domain become unresolved rows.
    domain : SpectrumDomain, optional
    agreement_tol : float

    Returns
    -------
    SpectrumCurve
    """
    dom = spectrum_domain(curve) if domain is None else domain
    if dom.empty:
        return SpectrumCurve.empty_curve(dom, map_id=curve.map_id)
    alpha = _alpha_samples(alpha_grid, dom)
    n = len(alpha)
    t_alpha, L, residual, p_at_t, entropy_route = (np.full(n, np.nan) for _ in range(5))
    resolved = np.zeros(n, dtype=bool)
    for i, a in enumerate(alpha):
        if not dom.alpha1 < a < dom.alpha2:
            logging.info("@lyapunov_spectrum: alpha = {} outside the domain, row unresolved".format(a))
            continue
        lp = solve_t_alpha(curve, a, domain=dom)
        direct = _direct_infimum(curve, a) / a if lp.resolved else lp.value
        if abs(direct - lp.value) > agreement_tol:
            raise InconsistencyError(
                "@lyapunov_spectrum: root route {:.12g} and direct infimum {:.12g} disagree at alpha = {}".format(
                    lp.value, direct, a), first=lp.value, second=direct)
        t_alpha[i], L[i], residual[i], resolved[i] = lp.t_alpha, lp.value, lp.residual, lp.resolved
        p_at_t[i] = float(curve(lp.t_alpha))
        entropy_route[i] = float(curve.entropy(lp.t_alpha)) / a
    spec = SpectrumCurve(alpha, t_alpha, L, residual, resolved, dom, kind="interval", map_id=curve.map_id,
                         entropy_route=entropy_route, p_at_t=p_at_t)
    if spec.exceeds_one:
        logging.warning("@lyapunov_spectrum: L exceeds 1 on {}".format(curve.map_id))
    return spec


def lyapunov_spectrum_flow(curve, alpha_grid, domain=None, agreement_tol=1e-6):
    """ Flow spectrum L(alpha) + 2, same t_alpha data as the interval spectrum. """
    return lyapunov_spectrum_interval(curve, alpha_grid, domain=domain, agreement_tol=agreement_tol).as_flow()


def birkhoff_exponent(cmap, x, n, floor=1e-10):
    """ (1/n) sum_{k<n} log|Df(f^k x)|

    Parameters
    ----------
    cmap : CuspMapSpec
    x : float
    n : int
    floor : float
        |Df| below floor raises a NearCuspWarning (with the step index) and is clamped.
    """
    assert n >= 1
    s = 0.
    x = float(x)
    for k in range(n):
        i = int(cmap.locate(x))
        if i < 0:
            raise DomainError("@birkhoff_exponent: orbit left the domain at step {} [x = {}]".format(k, x))
        br = cmap.branches[i]
        df = abs(float(br.deriv(x)))
        if df < floor:
            warnings.warn("@birkhoff_exponent: |Df| = {:.2e} below floor at step {}".format(df, k), NearCuspWarning)
            df = floor
        s += np.log(df)
        x = float(br.eval(x))
    return s / n
