# -*- coding: utf-8 -*-
"""
Aims
----
- the closed-form geometric Rovella flow: linear phase near the singularity,
  exit from the cube, connecting map back to the section
- Poincare return map F = (f, g) and its roof function
- trajectory simulation and partial-hyperbolicity diagnostics

"""

import logging
from collections import namedtuple

import numpy as np

from ..errors import DomainError, InfiniteTimeError, NearSingularityError
from .cuspmap import D0, D1

__all__ = [
    "Point3",
    "SectionPoint",
    "TrajectorySegment",
    "RoofFunction",
    "ConstantRoof",
    "linear_flow",
    "exit_time",
    "cusp_map_L",
    "connecting_map",
    "poincare_return",
    "return_map_jacobian",
    "roof",
    "simulate",
    "domination_check",
    "fiber_contraction_check",
]

Point3 = namedtuple("Point3", ["x", "y", "z"])
SectionPoint = namedtuple("SectionPoint", ["x", "y"])

Simulation = namedtuple(
    typename="Simulation",
    field_names=[
        "segments",  # list of TrajectorySegment
        "hits",  # section points, the initial point first
        "return_times",  # flight time of each return, 0 for the initial point
        "sample_dt",  # default time step of sample_trajectory
    ]
)

DominationReport = namedtuple(
    typename="DominationReport",
    field_names=[
        "s_grid",
        "products",  # e^{(lambda2 - lambda3) s}
        "rate",  # lambda2 - lambda3
        "passed",  # product < 1 for every s > 0
    ]
)

FiberReport = namedtuple(
    typename="FiberReport",
    field_names=[
        "n",
        "lam",  # (1/2)^beta
        "best_C",  # smallest C with dist_n <= lam^n C dist_0 over all samples
        "max_step_ratio",  # largest one-step contraction ratio
        "product_error",  # max relative gap between measured and carried separations
        "n_samples",
        "n_skipped",  # samples whose orbit hit the singular line
        "passed",
    ]
)


def linear_flow(p, s, params):
    """ (x e^{lambda1 s}, y e^{lambda2 s}, z e^{lambda3 s}) """
    if s < 0:
        raise ValueError("@linear_flow: s must be >= 0 [{}]".format(s))
    return Point3(p[0] * np.exp(params.lambda1 * s),
                  p[1] * np.exp(params.lambda2 * s),
                  p[2] * np.exp(params.lambda3 * s))


def exit_time(x0, params):
    """ Time for the linear flow to carry |x0| to 1: -log|x0| / lambda1. """
    if x0 == 0:
        raise InfiniteTimeError("@exit_time: x0 = 0 lies on the singular line")
    return -np.log(np.abs(x0)) / params.lambda1


def cusp_map_L(p, params):
    """ L(x, y, 1) = (sgn x, y |x|^beta, |x|^ell) """
    x, y = p[0], p[1]
    if x == 0:
        raise DomainError("@cusp_map_L: x = 0 is not mapped")
    ax = abs(x)
    return Point3(float(np.sign(x)), y * ax ** params.beta, ax ** params.ell)


def connecting_map(side, p, params, tol=1e-12):
    """ T o E o R from the exit face |x| = 1 back to the section.

    Parameters
    ----------
    side : str or int
        "+" / +1 for the face x = 1, "-" / -1 for x = -1.
    p : Point3
        Exit point.
    params : FlowParams

    Returns
    -------
    SectionPoint
    """
    sign = 1 if side in ("+", 1, 1.) else -1
    if abs(abs(p[0]) - 1) > tol:
        raise DomainError("@connecting_map: |x| = {} is not 1".format(abs(p[0])))
    # R: (x, y, z) -> (+-z, y, +-x)
    x, y, z = sign * p[2], p[1], sign * p[0]
    # E: expansion along x
    x = params.rho * x
    # T: translation, third coordinate reset to 1
    if sign > 0:
        return SectionPoint(x + D0, y + params.cy_plus)
    return SectionPoint(x + D1, y + params.cy_minus)


def poincare_return(p, params):
    """ First return F(x, y) = (f(x), g(x, y)) to the section. """
    if p[0] == 0:
        raise DomainError("@poincare_return: x = 0 lies on the singular line")
    q = cusp_map_L(p, params)
    return connecting_map(int(q.x), q, params)


def return_map_jacobian(p, params):
    """ Partial derivatives of F at p.

    Returns
    -------
    tuple
        (df/dx, dg/dy, dg/dx)
    """
    x, y = p[0], p[1]
    if x == 0:
        raise DomainError("@return_map_jacobian: x = 0 lies on the singular line")
    ax = abs(x)
    dfdx = params.rho * params.ell * ax ** (params.ell - 1)
    dgdy = ax ** params.beta
    dgdx = params.beta * y * np.sign(x) * ax ** (params.beta - 1)
    return dfdx, dgdy, dgdx


class RoofFunction:
    """ Return time r(x) = -log|x| / lambda1 + tau_c of the flow.

    Parameters
    ----------
    params : FlowParams
    """
    singular_points = (0.,)

    def __init__(self, params):
        self.params = params

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return -np.log(np.abs(x)) / self.params.lambda1 + self.params.tau_c

    def integral(self, a, b):
        """ Exact integral of r over [a, b], vectorized.
        x - x log|x| is an antiderivative of -log|x| on both sides of 0. """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return (_xlogx_primitive(b) - _xlogx_primitive(a)) / self.params.lambda1 \
            + self.params.tau_c * (b - a)

    def __repr__(self):
        return "<RoofFunction lambda1={} tau_c={}>".format(self.params.lambda1, self.params.tau_c)


class ConstantRoof:
    """ r(x) = value """
    singular_points = ()

    def __init__(self, value):
        assert value > 0
        self.value = float(value)

    def __call__(self, x):
        return np.full(np.shape(x), self.value) if np.ndim(x) else self.value

    def integral(self, a, b):
        return self.value * (np.asarray(b, dtype=float) - np.asarray(a, dtype=float))

    def __repr__(self):
        return "<ConstantRoof {}>".format(self.value)


def _xlogx_primitive(x):
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ax > 0, x - x * np.log(np.where(ax > 0, ax, 1.)), 0.)


def roof(x, params):
    """ r(x) = exit_time(x) + tau_c """
    if x == 0:
        raise InfiniteTimeError("@roof: x = 0 never returns")
    return exit_time(x, params) + params.tau_c


class TrajectorySegment:
    """ One phase of a flow trajectory.

    Parameters
    ----------
    kind : str
        "linear" or "connecting".
    start : Point3
    duration : float
    end : Point3
        Required for connecting phases (affine interpolation target).
    params : FlowParams
    """

    def __init__(self, kind, start, duration, params, end=None):
        assert kind in ("linear", "connecting")
        self.kind = kind
        self.start = Point3(*start)
        self.duration = float(duration)
        self.params = params
        if kind == "connecting":
            assert end is not None
        self._end = None if end is None else Point3(*end)

    def sampler(self, s):
        """ Position after time s in [0, duration]. """
        if self.kind == "linear":
            return linear_flow(self.start, s, self.params)
        u = s / self.duration
        return Point3(*((1 - u) * np.array(self.start) + u * np.array(self._end)))

    @property
    def end(self):
        return self.sampler(self.duration)

    def sample(self, dt):
        """ Time stamps and positions at step dt, endpoint included.

        Returns
        -------
        tuple
            (s, xyz) with s of shape (m,) and xyz of shape (m, 3)
        """
        s = np.arange(0, self.duration, dt)
        s = np.hstack((s, self.duration)) if s[-1] < self.duration else s
        xyz = np.array([self.sampler(_) for _ in s])
        return s, xyz

    def __repr__(self):
        return "<TrajectorySegment {} duration={:.6g}>".format(self.kind, self.duration)


def simulate(p, n_returns, params, sample_dt=0.05, x_min_cutoff=1e-12):
    """ Follow the flow from a section point through n_returns returns.

    Parameters
    ----------
    p : SectionPoint
    n_returns : int
    params : FlowParams
    sample_dt : float
        Time step used when the segments are sampled.
    x_min_cutoff : float
        Halt with NearSingularityError when |x| drops below it.

    Returns
    -------
    Simulation
    """
    p = SectionPoint(float(p[0]), float(p[1]))
    segments = []
    hits = [p]
    return_times = [0.]
    for step in range(n_returns):
        if abs(p.x) < x_min_cutoff:
            raise NearSingularityError(step, p.x, x_min_cutoff)
        start = Point3(p.x, p.y, 1.)
        s = exit_time(p.x, params)
        linear = TrajectorySegment("linear", start, s, params)
        q = cusp_map_L(p, params)
        p_next = connecting_map(int(q.x), q, params)
        connecting = TrajectorySegment("connecting", q, params.tau_c, params,
                                       end=Point3(p_next.x, p_next.y, 1.))
        segments.extend([linear, connecting])
        hits.append(p_next)
        return_times.append(s + params.tau_c)
        p = p_next
    logging.info("@simulate: {} returns, {} segments".format(n_returns, len(segments)))
    return Simulation(segments=segments, hits=hits, return_times=return_times, sample_dt=sample_dt)


def sample_trajectory(sim, sample_dt=None):
    """ Concatenate the sampled segments of a Simulation.

    Returns
    -------
    tuple
        (t, xyz, phase) arrays with global time stamps.
    """
    if sample_dt is None:
        sample_dt = sim.sample_dt
    t_all, xyz_all, phase_all = [], [], []
    t0 = 0.
    for seg in sim.segments:
        s, xyz = seg.sample(sample_dt)
        t_all.append(t0 + s)
        xyz_all.append(xyz)
        phase_all.append(np.full(len(s), seg.kind))
        t0 += seg.duration
    if not t_all:
        return np.zeros(0), np.zeros((0, 3)), np.zeros(0, dtype="U10")
    return np.hstack(t_all), np.vstack(xyz_all), np.hstack(phase_all)


def domination_check(params, s_grid):
    """ Domination of the linear phase, splitting E^s = e2, E^cu = (e1, e3).

    ||Df_s|E^s|| * ||Df_{-s}|E^cu(f_s x)|| = e^{lambda2 s} e^{-lambda3 s}.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    assert np.all(s_grid >= 0)
    rate = params.lambda2 - params.lambda3
    products = np.exp(rate * s_grid)
    passed = bool(np.all(products[s_grid > 0] < 1))
    return DominationReport(s_grid=s_grid, products=products, rate=rate, passed=passed)


def fiber_contraction_check(params, n=3, samples=1000, seed=0, x_min_cutoff=1e-12, rel_eps=1e-8, rtol=1e-6):
    """ Contraction of stable leaves {x = const} under the return map.

    Pairs (x, y), (x, y') are iterated n times. The separation is carried
    through the fiber map exactly (dist -> dist |x|^beta) and compared with
    lam^n dist_0, lam = (1/2)^beta. The separation measured from the iterates
    enters the step ratio only while it exceeds rel_eps * |y|; below that the
    subtraction has lost its digits.

    Parameters
    ----------
    params : FlowParams
    n : int
        Number of returns per pair.
    samples : int
    seed : int
    x_min_cutoff : float
        Pairs whose orbit comes closer to the singular line are skipped.
    rel_eps : float
        Smallest resolved separation, relative to |y|.
    rtol : float
        Relative slack of the step-ratio test.

    Returns
    -------
    FiberReport
    """
    assert n >= 1
    rng = np.random.default_rng(seed)
    lam = 0.5 ** params.beta
    best_C = 0.
    max_step = 0.
    product_error = 0.
    n_skipped = 0
    n_resolved = 0
    for _ in range(samples):
        x = rng.uniform(-0.5, 0.5)
        y0, y1 = rng.uniform(-0.5, 0.5, size=2)
        p, q = SectionPoint(x, y0), SectionPoint(x, y1)
        dist0 = abs(y0 - y1)
        dist = dist0
        skipped = False
        for _ in range(n):
            if abs(p.x) < x_min_cutoff:
                skipped = True
                break
            _, dgdy, _ = return_map_jacobian(p, params)
            p, q = poincare_return(p, params), poincare_return(q, params)
            # leaves are mapped to leaves
            assert p.x == q.x
            dist_new = dist * dgdy
            measured = abs(p.y - q.y)
            if dist_new > rel_eps * max(abs(p.y), abs(q.y)):
                n_resolved += 1
                max_step = max(max_step, measured / dist)
                product_error = max(product_error, abs(measured - dist_new) / dist_new)
            dist = dist_new
        if skipped:
            n_skipped += 1
            continue
        if dist0 > 0:
            best_C = max(best_C, dist / dist0 / lam ** n)
    passed = bool(n_resolved > 0 and max_step <= lam * (1 + rtol) and best_C <= 1 + rtol)
    logging.info("@fiber_contraction_check: best C = {:.3e}, {} resolved steps, {} skipped".format(
        best_C, n_resolved, n_skipped))
    return FiberReport(n=n, lam=lam, best_C=best_C, max_step_ratio=max_step, product_error=product_error,
                       n_samples=samples - n_skipped, n_skipped=n_skipped, passed=passed)
