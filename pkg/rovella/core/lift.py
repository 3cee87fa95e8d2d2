# -*- coding: utf-8 -*-
"""
Aims
----
- lift interval measures to the section square along the stable fibers
- suspend square measures under the roof function
- Abramov entropy, the flow potential and its return integral Delta
- flow pressure as the root of s -> P_base(Delta - s r)
- flow equilibrium states

"""

import logging
from collections import namedtuple, OrderedDict

import numpy as np
from astropy.table import Table
from scipy.integrate import quad
from scipy.optimize import brentq

from ..errors import (BracketError, DomainError, InconsistencyError, IntegrabilityError, RangeError,
                      SingularDerivativeError)
from .cuspmap import rovella_map_from_flow
from .flow import ConstantRoof, RoofFunction
from .measure import MeasureApprox, equilibrium_measure
from .pressure import estimate_pressure

__all__ = [
    "SquareMeasureApprox",
    "SuspensionMeasure",
    "FlowPotential",
    "RoofIntegral",
    "lift_to_square",
    "project_to_interval",
    "suspend",
    "abramov_entropy",
    "delta_potential",
    "flow_pressure",
    "flow_equilibrium",
    "roof_integrability_check",
]

RoofIntegral = namedtuple(
    typename="RoofIntegral",
    field_names=[
        "value",  # estimate of the integral of r against mu
        "finite",  # False when divergence is flagged
        "cusp_mass",  # mass on atoms / cells touching a singular point of r
        "method",  # "cells" or "atoms"
    ]
)


class SquareMeasureApprox:
    """ Atomic probability measure on the section square.

    Parameters
    ----------
    x, y : array
        Atom coordinates.
    weights : array
        Probabilities summing to 1.
    provenance : str
        "lifted-from-interval" or "direct".
    source : MeasureApprox, optional
        The interval measure it was built from.
    dropped_mass : float
        Source mass lost on atoms whose preimage chain met the singular line.
    n_dropped : int
    n_push : int
    increments : array
        Sup over atoms of |y^(m+1) - y^(m)| for every push m.
    """

    def __init__(self, x, y, weights, provenance="direct", source=None, dropped_mass=0., n_dropped=0,
                 n_push=0, increments=()):
        self.x = np.atleast_1d(np.asarray(x, dtype=float))
        self.y = np.atleast_1d(np.asarray(y, dtype=float))
        self.weights = np.atleast_1d(np.asarray(weights, dtype=float))
        assert self.x.shape == self.y.shape == self.weights.shape
        if np.any(self.weights < 0):
            raise ValueError("@SquareMeasureApprox: negative weights")
        if self.size and abs(self.weights.sum() - 1) > 1e-12:
            raise ValueError("@SquareMeasureApprox: weights sum to {!r}".format(self.weights.sum()))
        assert provenance in ("lifted-from-interval", "direct")
        self.provenance = provenance
        self.source = source
        self.dropped_mass = float(dropped_mass)
        self.n_dropped = int(n_dropped)
        self.n_push = int(n_push)
        self.increments = np.asarray(increments, dtype=float)

    @property
    def size(self):
        return len(self.x)

    @property
    def is_empty(self):
        return self.size == 0

    @property
    def support(self):
        return np.column_stack((self.x, self.y))

    @property
    def fiber_rate(self):
        """ largest ratio of successive increments, nan if undefined """
        inc = self.increments
        ok = (inc[:-1] > 0) & (inc[1:] > 0)
        if not np.any(ok):
            return np.nan
        return float(np.max(inc[1:][ok] / inc[:-1][ok]))

    def to_table(self):
        return Table([self.x, self.y, self.weights], names=["x", "y", "weight"])

    @staticmethod
    def direct(mu):
        """ atoms of an interval measure placed at y = 0 """
        return SquareMeasureApprox(mu.support, np.zeros(mu.size), mu.weights, provenance="direct", source=mu)

    def __repr__(self):
        return "<SquareMeasureApprox {} atoms {} n_push={} dropped={:.3g}>".format(
            self.size, self.provenance, self.n_push, self.dropped_mass)


def _nearest_atom(xs, ws, z):
    """ distance to and weight of the nearest sorted atom, vectorized """
    idx = np.clip(np.searchsorted(xs, z), 1, len(xs) - 1)
    left, right = xs[idx - 1], xs[idx]
    take_left = np.abs(z - left) <= np.abs(z - right)
    j = np.where(take_left, idx - 1, idx)
    return np.abs(z - xs[j]), ws[j]


def lift_to_square(mu, flow, n_push, cmap=None, x_min_cutoff=1e-12, tol=1e-9):
    """ Lift an interval measure to the square.

    Every atom x gets a backward chain x = f(z_1), z_1 = f(z_2), ... of length
    n_push and is placed at (x, y) with y the fiber coordinate of
    F^{n_push}(z_{n_push}, 0). The x coordinates are not moved, so the
    x-marginal is the source measure up to dropped atoms.

    A preimage coinciding (within tol) with an atom is preferred, otherwise
    the preimage whose nearest atom is heaviest.

    Parameters
    ----------
    mu : MeasureApprox
    flow : FlowParams
    n_push : int
        >= 0; 0 leaves every atom at y = 0.
    cmap : CuspMapSpec, optional
        Defaults to the Rovella map of flow.
    x_min_cutoff : float
        Atoms whose chain comes closer than this to the singular line are dropped.

    Returns
    -------
    SquareMeasureApprox
    """
    if n_push < 0:
        raise ValueError("@lift_to_square: n_push must be >= 0 [{}]".format(n_push))
    if mu.is_empty:
        return SquareMeasureApprox([], [], [], provenance="lifted-from-interval", source=mu, n_push=n_push)
    cmap = rovella_map_from_flow(flow) if cmap is None else cmap
    beta = flow.beta
    x = mu.support
    n = len(x)
    order = np.argsort(x)
    xs, ws = x[order], mu.weights[order]
    if n == 1:
        xs, ws = np.repeat(xs, 2), np.repeat(ws, 2)

    alive = np.abs(x) >= x_min_cutoff
    z = x.copy()
    y = np.zeros(n)
    P = np.ones(n)
    increments = np.zeros(n_push)
    for m in range(n_push):
        pre = cmap.preimages(z)
        score = np.full(pre.shape, -np.inf)
        for j in range(pre.shape[0]):
            ok = np.isfinite(pre[j])
            dist, wn = _nearest_atom(xs, ws, pre[j][ok])
            score[j][ok] = np.where(dist <= tol, 2. + wn, wn)
        best = np.argmax(score, axis=0)
        z_new = pre[best, np.arange(n)]
        alive &= np.isfinite(z_new)
        z_new = np.where(np.isfinite(z_new), z_new, 0.5)
        alive &= np.abs(z_new) >= x_min_cutoff
        term = P * np.where(z_new > 0, flow.cy_plus, flow.cy_minus)
        y += term
        increments[m] = np.max(np.abs(term[alive])) if np.any(alive) else 0.
        P *= np.abs(z_new) ** beta
        z = z_new

    dropped_mass = float(mu.weights[~alive].sum())
    n_dropped = int((~alive).sum())
    if n_dropped:
        logging.warning("@Lift: {} atoms dropped at the singular line, mass {:.3e}".format(n_dropped, dropped_mass))
    w = np.where(alive, mu.weights, 0.)
    if w.sum() > 0:
        w = w / w.sum()
    keep = alive if mu.lo is None else np.ones(n, dtype=bool)
    logging.info("@Lift: {} atoms, n_push = {}, last increment {:.3e}".format(
        n, n_push, increments[-1] if n_push else 0.))
    return SquareMeasureApprox(x[keep], y[keep], w[keep], provenance="lifted-from-interval", source=mu,
                               dropped_mass=dropped_mass, n_dropped=n_dropped, n_push=n_push,
                               increments=increments)


def project_to_interval(mu2, edges=None):
    """ x-marginal of a square measure.

    Parameters
    ----------
    mu2 : SquareMeasureApprox
    edges : array, optional
        Cell edges to aggregate onto. Defaults to the cells of the source
        measure if it has any, otherwise atoms with equal x are merged.

    Returns
    -------
    MeasureApprox
    """
    if mu2.is_empty:
        return MeasureApprox.empty()
    src = mu2.source
    keep = dict()
    if src is not None:
        keep = dict(t=src.t, lyapunov=src.lyapunov, entropy=src.entropy, pressure=src.pressure,
                    clamped=src.clamped, warnings=src.warnings)
    if edges is None and src is not None and src.has_cells:
        lo, hi, branch = src.lo, src.hi, src.branch
        edges = np.append(lo, hi[-1])
    elif edges is not None:
        edges = np.asarray(edges, dtype=float)
        lo, hi, branch = edges[:-1], edges[1:], None
    if edges is not None:
        w, _ = np.histogram(mu2.x, bins=edges, weights=mu2.weights)
        return MeasureApprox(0.5 * (lo + hi), w, lo=lo, hi=hi, branch=branch, source="projected", **keep)
    xu, inverse = np.unique(mu2.x, return_inverse=True)
    w = np.bincount(inverse, weights=mu2.weights)
    return MeasureApprox(xu, w, source="projected", **keep)


def roof_integrability_check(mu, roof, cusp_mass_tol=1e-6):
    """ Integral of the roof against an interval measure.

    Grid densities use the exact cell average of r, so the logarithmic
    singularity inside a cell is integrated analytically. Divergence is
    flagged when more than cusp_mass_tol of the mass sits on cells touching
    a singular point of r, or on atoms where r is infinite.

    Returns
    -------
    RoofIntegral
    """
    if mu.is_empty:
        return RoofIntegral(value=np.nan, finite=False, cusp_mass=0., method="atoms")
    if mu.has_cells:
        avg = roof.integral(mu.lo, mu.hi) / mu.width
        value = float(np.sum(mu.weights * avg))
        touch = np.zeros(mu.size, dtype=bool)
        for s in roof.singular_points:
            touch |= (mu.lo <= s) & (s <= mu.hi)
        cusp_mass = float(mu.weights[touch].sum())
        method = "cells"
    else:
        r = np.asarray(roof(mu.support), dtype=float)
        bad = ~np.isfinite(r)
        cusp_mass = float(mu.weights[bad].sum())
        value = float(np.sum(mu.weights[~bad] * r[~bad])) if not np.any(bad & (mu.weights > 0)) else np.inf
        method = "atoms"
    finite = bool(np.isfinite(value) and cusp_mass <= cusp_mass_tol)
    if not finite:
        logging.warning("@roof_integrability_check: divergence flagged, cusp mass {:.3e}".format(cusp_mass))
    return RoofIntegral(value=value, finite=finite, cusp_mass=cusp_mass, method=method)


def abramov_entropy(h_base, roof_integral):
    """ h_base / roof_integral """
    if not (np.isfinite(roof_integral) and roof_integral > 0):
        raise DomainError("@abramov_entropy: roof integral must be finite and > 0 [{}]".format(roof_integral))
    return h_base / roof_integral


class SuspensionMeasure:
    """ Normalized suspension of a base measure under the roof.

    Parameters
    ----------
    base : SquareMeasureApprox or MeasureApprox
    marginal : MeasureApprox
        x-marginal of the base.
    roof_integral : float
    h_base : float or None
    roof_check : RoofIntegral
    """

    def __init__(self, base, marginal, roof_integral, h_base, roof_check, base_id=""):
        self.base = base
        self.marginal = marginal
        self.roof_integral = float(roof_integral)
        self.normalization = self.roof_integral
        self.h_base = h_base
        self.entropy_flow = None if h_base is None else abramov_entropy(h_base, self.roof_integral)
        self.roof_check = roof_check
        self.base_id = base_id
        self.flow_pressure = None
        self.free_energy = None
        self.t = marginal.t

    @property
    def pressure_residual(self):
        if self.flow_pressure is None or self.free_energy is None:
            return None
        return abs(self.free_energy - self.flow_pressure)

    @property
    def clamped(self):
        return int(self.marginal.clamped)

    @property
    def dropped_mass(self):
        return getattr(self.base, "dropped_mass", 0.)

    @property
    def n_dropped(self):
        return getattr(self.base, "n_dropped", 0)

    def to_dict(self):
        def _f(v):
            return None if v is None else float(v)
        d = OrderedDict()
        d["base_id"] = self.base_id
        d["t"] = _f(self.t)
        d["roof_integral"] = self.roof_integral
        d["h_base"] = _f(self.h_base)
        d["h_flow"] = _f(self.entropy_flow)
        d["flow_pressure"] = _f(self.flow_pressure)
        d["flow_free_energy"] = _f(self.free_energy)
        d["pressure_residual"] = _f(self.pressure_residual)
        d["clamped_cells"] = self.clamped
        d["dropped_atoms"] = self.n_dropped
        d["dropped_mass"] = float(self.dropped_mass)
        d["cusp_mass"] = float(self.roof_check.cusp_mass)
        return d

    def __repr__(self):
        return "<SuspensionMeasure {} roof_integral={:.6g} h_flow={}>".format(
            self.base_id, self.roof_integral, self.entropy_flow)


def suspend(mu2, roof, entropy=None, cusp_mass_tol=1e-6, base_id=""):
    """ Suspend a base measure under the roof.

    Parameters
    ----------
    mu2 : SquareMeasureApprox or MeasureApprox
    roof : RoofFunction or ConstantRoof
    entropy : float, optional
        Base entropy; defaults to the entropy recorded on the interval measure.

    Returns
    -------
    SuspensionMeasure
    """
    marginal = project_to_interval(mu2) if isinstance(mu2, SquareMeasureApprox) else mu2
    check = roof_integrability_check(marginal, roof, cusp_mass_tol=cusp_mass_tol)
    if not check.finite:
        raise IntegrabilityError("@suspend: roof integral diverges [value = {}, cusp mass = {:.3e}]".format(
            check.value, check.cusp_mass))
    h = marginal.entropy if entropy is None else entropy
    return SuspensionMeasure(mu2, marginal, check.value, h, check, base_id=base_id)


class FlowPotential:
    """ Flow potential with a prescribed integral Delta(x) over one return.

    geometric : Delta(x) = -t log|Df(x)|, spread uniformly over [0, r(x)]
    constant : the potential is c everywhere, Delta(x) = c r(x)

    Parameters
    ----------
    cmap : CuspMapSpec, optional
        Needed for the geometric kind.
    t : float
    constant : float, optional
        Selects the constant kind.
    """

    def __init__(self, cmap=None, t=0., constant=None):
        self.cmap = cmap
        self.t = float(t)
        self.constant = None if constant is None else float(constant)
        if self.constant is None and cmap is None:
            raise ValueError("@FlowPotential: the geometric potential needs a map")

    @property
    def kind(self):
        return "geometric" if self.constant is None else "constant"

    @staticmethod
    def geometric(cmap, t):
        return FlowPotential(cmap, t=t)

    @staticmethod
    def const(value):
        return FlowPotential(constant=value)

    def delta(self, x, roof):
        x = float(x)
        if self.kind == "constant":
            return self.constant * float(roof(x))
        if any(x == c for c in self.cmap.cusps):
            raise SingularDerivativeError("@FlowPotential: x = {} is a cusp".format(x))
        df = abs(float(self.cmap.derivative(x)))
        if df == 0:
            raise SingularDerivativeError("@FlowPotential: Df({}) = 0".format(x))
        return -self.t * np.log(df)

    def pointwise(self, x, s, roof):
        """ value at height s in [0, r(x)] above x """
        r = float(roof(x))
        if not 0 <= s <= r:
            raise DomainError("@FlowPotential: s = {} outside [0, {}]".format(s, r))
        if self.kind == "constant":
            return self.constant
        return self.delta(x, roof) / r

    def base_terms(self, roof):
        """ (t, extra) such that the base potential is -t log|Df| + extra """
        if self.kind == "constant":
            c = self.constant
            return 0., lambda x: c * roof(x)
        return self.t, None

    def __repr__(self):
        if self.kind == "constant":
            return "<FlowPotential constant {}>".format(self.constant)
        return "<FlowPotential geometric t={}>".format(self.t)


def delta_potential(phi, roof, x, check=False, tol=1e-10):
    """ Delta(x) = integral of the flow potential over [0, r(x)].

    With check=True the closed form is compared with quadrature of the
    pointwise rule.
    """
    if x == 0 and 0. in getattr(roof, "singular_points", ()):
        raise SingularDerivativeError("@delta_potential: x = 0 never returns")
    value = phi.delta(x, roof)
    if check:
        r = float(roof(x))
        q, _ = quad(lambda s: phi.pointwise(x, s, roof), 0., r, epsabs=1e-13, epsrel=1e-13)
        if abs(q - value) > tol:
            raise InconsistencyError("@delta_potential: quadrature {} vs closed form {}".format(q, value),
                                     first=q, second=value)
    return value


def _grow_bracket(func, s_max):
    """ [lo, hi] around the root of a decreasing func, with func(lo) >= 0 >= func(hi). """
    f0 = func(0.)
    # 1 -> 2 -> 4 ... away from 0 on the side where the sign flips
    sign = 1. if f0 > 0 else -1.
    near, f_near, step = 0., f0, 1.
    while True:
        far = sign * min(step, s_max)
        f_far = func(far)
        if f_far * f0 <= 0 or abs(far) >= s_max:
            break
        near, f_near, step = far, f_far, 2 * step
    if sign > 0:
        return near, far, f_near, f_far
    return far, near, f_far, f_near


def flow_pressure(cmap, roof, potential, method="ulam", resolution=None, floor=1e-10,
                  bracket=None, s_max=64., xtol=1e-12):
    """ Flow pressure as the root s* of s -> P_base(Delta - s r).

    Parameters
    ----------
    cmap : CuspMapSpec
    roof : RoofFunction or ConstantRoof
    potential : FlowPotential or float
        A float is read as the geometric parameter t.
    method, resolution, floor :
        Passed to estimate_pressure.
    bracket : tuple, optional
        The root must change sign inside. By default the bracket grows from
        s = 0 by doubling steps away from it, in the direction of the root,
        up to |s| = s_max.
    s_max : float

    Returns
    -------
    float
    """
    phi = potential if isinstance(potential, FlowPotential) else FlowPotential.geometric(cmap, potential)
    t, extra = phi.base_terms(roof)

    def base_pressure(s):
        if extra is None:
            def total(x):
                return -s * roof(x)
        else:
            def total(x):
                return extra(x) - s * roof(x)
        return estimate_pressure(cmap, t, method=method, resolution=resolution, floor=floor, extra=total).p

    if bracket is None:
        lo, hi, f_lo, f_hi = _grow_bracket(base_pressure, s_max)
    else:
        lo, hi = bracket
        f_lo, f_hi = base_pressure(lo), base_pressure(hi)
    if not (f_lo >= 0 >= f_hi):
        raise BracketError("@flow_pressure: no sign change on [{}, {}] (P = {:.4g}, {:.4g})".format(lo, hi, f_lo, f_hi))
    s = brentq(base_pressure, lo, hi, xtol=xtol, maxiter=500)
    logging.info("@flow_pressure: {} {} -> {:.12g}".format(cmap.name, phi, s))
    return float(s)


def flow_equilibrium(cmap, t, flow=None, roof=None, N=1024, n_push=60, domain=None, method="ulam",
                     resolution=None, floor=1e-10, x_min_cutoff=1e-12):
    """ Flow equilibrium state of the geometric potential at t.

    equilibrium_measure -> lift_to_square (only with flow parameters) -> suspend,
    with the flow pressure and the flow free energy (h - t lambda) / int r attached.

    Parameters
    ----------
    cmap : CuspMapSpec
    t : float
    flow : FlowParams, optional
    roof : RoofFunction or ConstantRoof, optional
        Defaults to the roof of flow.
    domain : PressureDomain, optional
        If given, t must lie in (t-, t+).

    Returns
    -------
    SuspensionMeasure
    """
    if domain is not None and not domain.contains(t):
        raise RangeError("@flow_equilibrium: t = {} outside ({}, {})".format(t, domain.t_minus, domain.t_plus))
    if roof is None:
        if flow is None:
            raise ValueError("@flow_equilibrium: need flow parameters or a roof")
        roof = RoofFunction(flow)
    mu = equilibrium_measure(cmap, t, N=N, floor=floor)
    if flow is not None and not isinstance(roof, ConstantRoof):
        mu2 = lift_to_square(mu, flow, n_push, cmap=cmap, x_min_cutoff=x_min_cutoff)
    else:
        mu2 = SquareMeasureApprox.direct(mu)
    susp = suspend(mu2, roof, base_id="{}:t={}".format(cmap.name, t))
    susp.free_energy = (mu.entropy - t * mu.lyapunov) / susp.roof_integral
    susp.flow_pressure = flow_pressure(cmap, roof, FlowPotential.geometric(cmap, t), method=method,
                                       resolution=resolution, floor=floor)
    logging.info("@flow_equilibrium: {} h_flow={:.6g} flow pressure={:.6g} free energy={:.6g}".format(
        susp.base_id, susp.entropy_flow, susp.flow_pressure, susp.free_energy))
    return susp
