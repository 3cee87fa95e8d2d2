# -*- coding: utf-8 -*-
"""
Aims
----
- flow parameters of the contracting Lorenz (Rovella) flow
- one-dimensional cusp maps: Rovella maps and piecewise linear full-branch maps
- evaluation, derivatives, inverse branches
- checks of the cusp-map axioms and the negative Schwarzian condition

"""

import logging
from collections import namedtuple, OrderedDict
from dataclasses import dataclass, asdict

import numpy as np
import yaml
from scipy.special import logsumexp

from ..errors import ParameterViolation, DomainError, SingularDerivativeError

__all__ = [
    "FlowParams",
    "Branch",
    "AffineBranch",
    "RovellaBranch",
    "CuspMapSpec",
    "PLFullBranchMap",
    "rovella_map",
    "rovella_map_from_flow",
    "eval_map",
    "eval_derivative",
    "schwarzian_check",
    "validate_cusp_map",
    "pl_pressure_closed_form",
    "AxiomResult",
    "ValidationReport",
]

# branch offsets: f(0+) = D0, f(0-) = D1
D0 = -0.5
D1 = 0.5


@dataclass(frozen=True)
class FlowParams:
    """ Eigenvalues and constants of one Rovella flow.

    beta and ell are derived from the eigenvalues on access.
    """
    lambda1: float = 1.0
    lambda2: float = -4.5
    lambda3: float = -1.1
    rho: float = 1.8
    tau_c: float = 1.0
    cy_plus: float = 0.25
    cy_minus: float = -0.25

    @property
    def beta(self):
        return -self.lambda2 / self.lambda1

    @property
    def ell(self):
        return -self.lambda3 / self.lambda1

    def violations(self):
        """ Names of the failed defining inequalities (empty when valid). """
        failed = []
        if not self.lambda1 > 0:
            failed.append("lambda1 > 0")
        if not -self.lambda3 > self.lambda1:
            failed.append("-lambda3 > lambda1")
        if not -self.lambda2 > -self.lambda3:
            failed.append("-lambda2 > -lambda3")
        if self.lambda1 > 0 and not self.beta > self.ell + 3:
            failed.append("beta > ell + 3")
        if self.lambda1 > 0 and not self.rho * 0.5 ** self.ell < 1:
            failed.append("rho * (1/2)^ell < 1")
        if not self.rho > 0:
            failed.append("rho > 0")
        if not self.tau_c > 0:
            failed.append("tau_c > 0")
        return failed

    def validate(self):
        failed = self.violations()
        if failed:
            raise ParameterViolation(failed[0], "@FlowParams: violated [{}] for {}".format(
                ", ".join(failed), self))
        return self

    def to_dict(self):
        return asdict(self)

    @staticmethod
    def from_dict(d):
        unknown = set(d) - set(FlowParams.__dataclass_fields__)
        if unknown:
            raise ValueError("@FlowParams: unknown keys {}".format(sorted(unknown)))
        return FlowParams(**{k: float(v) for k, v in d.items()})

    @staticmethod
    def from_yaml(fp):
        """ Read flow parameters from a YAML file with the keys
        lambda1, lambda2, lambda3, rho, tau_c, cy_plus, cy_minus. """
        with open(fp) as f:
            d = yaml.safe_load(f)
        return FlowParams.from_dict(d)


class Branch:
    """ A monotone branch f_j on the interval (a, b).

    Parameters
    ----------
    a, b : float
        The branch interval.
    func, deriv : callable
        Vectorized x -> f_j(x) and x -> Df_j(x).
    inverse : callable, optional
        Vectorized y -> f_j^{-1}(y). Bisection is used if not given.
    """
    kind = "custom"
    # order of vanishing of Df at the branch ends, None if unknown
    order = None

    def __init__(self, a, b, func=None, deriv=None, inverse=None):
        assert a < b
        self.a = float(a)
        self.b = float(b)
        self._func = func
        self._deriv = deriv
        self._inverse = inverse

    @property
    def interval(self):
        return self.a, self.b

    @property
    def length(self):
        return self.b - self.a

    def eval(self, x):
        return self._func(np.asarray(x, dtype=float))

    def deriv(self, x):
        return self._deriv(np.asarray(x, dtype=float))

    @property
    def image(self):
        ya, yb = float(self.eval(self.a)), float(self.eval(self.b))
        return min(ya, yb), max(ya, yb)

    @property
    def increasing(self):
        return float(self.eval(self.b)) > float(self.eval(self.a))

    def inverse(self, y):
        """ f_j^{-1}(y), NaN where y is not in the closed image. """
        y = np.asarray(y, dtype=float)
        if self._inverse is not None:
            x = np.asarray(self._inverse(y), dtype=float)
        else:
            x = self._bisect_inverse(y)
        lo, hi = self.image
        return np.where((y >= lo) & (y <= hi), x, np.nan)

    def _bisect_inverse(self, y, n_iter=100):
        lo = np.full(y.shape, self.a)
        hi = np.full(y.shape, self.b)
        sign = 1. if self.increasing else -1.
        for _ in range(n_iter):
            mid = 0.5 * (lo + hi)
            above = sign * (self.eval(mid) - y) > 0
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        return 0.5 * (lo + hi)

    def __repr__(self):
        return "<{} {} on ({:.6g}, {:.6g})>".format(self.__class__.__name__, self.kind, self.a, self.b)


class AffineBranch(Branch):
    """ f(x) = slope * x + offset """
    kind = "piecewise-linear"
    order = 0.

    def __init__(self, a, b, slope, offset):
        super().__init__(a, b)
        self.slope = float(slope)
        self.offset = float(offset)

    def eval(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.offset

    def deriv(self, x):
        return np.full(np.shape(x), self.slope) if np.ndim(x) else np.float64(self.slope)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        lo, hi = self.image
        return np.where((y >= lo) & (y <= hi), (y - self.offset) / self.slope, np.nan)


class RovellaBranch(Branch):
    """ Rovella branch, increasing on its side of the cusp at 0.

    right: f(x) = rho * x^ell + D0, x in (0, 1/2)
    left:  f(x) = -rho * |x|^ell + D1, x in (-1/2, 0)
    """

    def __init__(self, side, rho, ell):
        assert side in ("left", "right")
        if side == "right":
            super().__init__(0., 0.5)
        else:
            super().__init__(-0.5, 0.)
        self.side = side
        self.rho = float(rho)
        self.ell = float(ell)
        self.kind = "rovella-" + side
        self.order = self.ell - 1

    def eval(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        if self.side == "right":
            return self.rho * ax ** self.ell + D0
        return -self.rho * ax ** self.ell + D1

    def deriv(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        return self.rho * self.ell * ax ** (self.ell - 1)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        lo, hi = self.image
        with np.errstate(invalid="ignore"):
            if self.side == "right":
                x = (np.clip(y - D0, 0, None) / self.rho) ** (1 / self.ell)
            else:
                x = -(np.clip(D1 - y, 0, None) / self.rho) ** (1 / self.ell)
        return np.where((y >= lo) & (y <= hi), x, np.nan)


class CuspMapSpec:
    """ A piecewise monotone map on an interval I.

    Parameters
    ----------
    branches : list of Branch
        Disjoint open branch intervals, sorted or not.
    crit : iterable, optional
        The set Crit of branch endpoints. Defaults to all endpoints.
    domain : tuple, optional
        The interval I. Defaults to the hull of the branches.
    cusps : iterable
        Interior points of Crit where the derivative vanishes. The Ulam grid
        is refined around them.
    name : str
        Identifier written into reports.

    Attributes
    ----------
    params : FlowParams or None
        The flow parameters for maps derived from a flow.
    """

    def __init__(self, branches, crit=None, domain=None, cusps=(), name="custom", params=None):
        self.branches = tuple(sorted(branches, key=lambda br: br.a))
        for br0, br1 in zip(self.branches[:-1], self.branches[1:]):
            if br1.a < br0.b:
                raise ValueError("@CuspMapSpec: branch intervals overlap [{}, {}]".format(br0, br1))
        if domain is None:
            domain = (self.branches[0].a, self.branches[-1].b)
        self.domain = (float(domain[0]), float(domain[1]))
        if crit is None:
            crit = [br.a for br in self.branches] + [br.b for br in self.branches]
        self.crit = tuple(sorted(set(float(c) for c in crit)))
        self.cusps = tuple(float(c) for c in cusps)
        self.name = name
        self.params = params
        self._lefts = np.array([br.a for br in self.branches])

    @property
    def k(self):
        return len(self.branches)

    @property
    def interior_crit(self):
        lo, hi = self.domain
        return tuple(c for c in self.crit if lo < c < hi)

    @property
    def is_rovella(self):
        return any(br.kind.startswith("rovella") for br in self.branches)

    def is_full_branch(self, tol=1e-9):
        lo, hi = self.domain
        for br in self.branches:
            ylo, yhi = br.image
            if abs(ylo - lo) > tol or abs(yhi - hi) > tol:
                return False
        return True

    def branches_at(self, x):
        """ Indices of the branches whose closure contains the scalar x. """
        return [i for i, br in enumerate(self.branches) if br.a <= x <= br.b]

    def locate(self, x):
        """ Vectorized branch index of x, -1 outside all branches.
        Shared endpoints go to the branch on their right. """
        x = np.asarray(x, dtype=float)
        ind = np.searchsorted(self._lefts, x, side="right") - 1
        ind_clip = np.clip(ind, 0, self.k - 1)
        rights = np.array([br.b for br in self.branches])
        return np.where((ind >= 0) & (x <= rights[ind_clip]), ind, -1)

    def _apply(self, method, x, branch=None):
        x = np.asarray(x, dtype=float)
        ind = self.locate(x) if branch is None else np.broadcast_to(np.asarray(branch), x.shape)
        if np.any(ind < 0):
            raise DomainError("@{}: points outside all branches [{}]".format(self.name, x[ind < 0]))
        out = np.empty(x.shape, dtype=float)
        for i, br in enumerate(self.branches):
            m = ind == i
            if np.any(m):
                out[m] = getattr(br, method)(x[m])
        return out

    def evaluate(self, x, branch=None):
        """ Vectorized f(x); branch selects the branch per point (default: locate). """
        return self._apply("eval", x, branch)

    def derivative(self, x, branch=None):
        """ Vectorized Df(x). """
        return self._apply("deriv", x, branch)

    def __call__(self, x, branch=None):
        return self.evaluate(x, branch)

    def preimages(self, y):
        """ f_j^{-1}(y) for every branch j, shape (k, len(y)), NaN where undefined. """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return np.array([br.inverse(y) for br in self.branches])

    def __repr__(self):
        return "<CuspMapSpec {} with {} branches on [{:.6g}, {:.6g}]>".format(
            self.name, self.k, *self.domain)


class PLFullBranchMap(CuspMapSpec):
    """ Piecewise linear full-branch map on [0, 1].

    Branch i maps its subinterval of length w_i affinely onto [0, 1] with
    slope 1/w_i, so the map is conjugate to the full k-shift.

    Parameters
    ----------
    weights : tuple
        Positive weights summing to 1.

    Example
    -------
    >>> m = PLFullBranchMap((0.4, 0.6))
    >>> m.evaluate(0.2)
    0.5
    """

    def __init__(self, weights, name=None):
        weights = tuple(float(w) for w in weights)
        if len(weights) < 2 or min(weights) <= 0:
            raise ValueError("@PLFullBranchMap: need >= 2 positive weights [{}]".format(weights))
        if abs(sum(weights) - 1) > 1e-12:
            raise ValueError("@PLFullBranchMap: weights must sum to 1 [{}]".format(weights))
        edges = np.hstack((0., np.cumsum(weights)))
        edges[-1] = 1.
        branches = [AffineBranch(edges[i], edges[i + 1], 1 / w, -edges[i] / w)
                    for i, w in enumerate(weights)]
        if name is None:
            name = "doubling" if weights == (0.5, 0.5) else "pl:" + ",".join("{:g}".format(w) for w in weights)
        super().__init__(branches, crit=edges, domain=(0., 1.), cusps=(), name=name)
        self.weights = weights


def rovella_map(rho, ell, params=None):
    """ Two-branch Rovella map on [-1/2, 1/2] for given rho and ell,
    without checking the flow inequalities. """
    branches = [RovellaBranch("left", rho, ell), RovellaBranch("right", rho, ell)]
    return CuspMapSpec(branches, crit=(-0.5, 0., 0.5), domain=(-0.5, 0.5), cusps=(0.,),
                       name="rovella", params=params)


def rovella_map_from_flow(params):
    """ The one-dimensional quotient of the return map of the flow.

    Parameters
    ----------
    params : FlowParams

    Returns
    -------
    CuspMapSpec
        f(x) = rho x^ell - 1/2 for x > 0, f(x) = -rho |x|^ell + 1/2 for x < 0.
    """
    params.validate()
    return rovella_map(params.rho, params.ell, params=params)


def _branch_index(cmap, x, branch):
    x = float(x)
    if branch is not None:
        br = cmap.branches[branch]
        if not br.a <= x <= br.b:
            raise DomainError("@{}: x = {} not in branch {} {}".format(cmap.name, x, branch, br.interval))
        return branch
    ind = cmap.branches_at(x)
    if len(ind) == 0:
        raise DomainError("@{}: x = {} outside all branches".format(cmap.name, x))
    if len(ind) > 1:
        raise DomainError("@{}: f is two-valued at x = {}, name the branch".format(cmap.name, x))
    return ind[0]


def eval_map(cmap, x, branch=None):
    """ f(x) for a scalar x. At branch endpoints the one-sided limit of the
    named branch is returned. """
    i = _branch_index(cmap, x, branch)
    return float(cmap.branches[i].eval(float(x)))


def eval_derivative(cmap, x, branch=None):
    """ Df(x) for a scalar x. """
    i = _branch_index(cmap, x, branch)
    return float(cmap.branches[i].deriv(float(x)))


def pl_pressure_closed_form(cmap, t):
    """ p(t) = log sum_i w_i^t """
    return float(logsumexp(t * np.log(np.asarray(cmap.weights))))


# ------------------------------------------------------------------
# axiom checks
# ------------------------------------------------------------------

AxiomResult = namedtuple(
    typename="AxiomResult",
    field_names=[
        "axiom",  # axiom label
        "status",  # pass | fail | not-checked
        "worst_violation",  # amount by which the worst sample exceeds the bound, 0 when passing
    ]
)

SchwarzianCheck = namedtuple(
    typename="SchwarzianCheck",
    field_names=[
        "passed",
        "worst",  # most negative second difference per branch (relative to max g)
    ]
)


class ValidationReport:
    """ Results of validate_cusp_map, one entry per axiom. """

    def __init__(self, map_id, entries):
        self.map_id = map_id
        self.entries = list(entries)

    @property
    def passed(self):
        return all(e.status != "fail" for e in self.entries)

    def __getitem__(self, axiom):
        for e in self.entries:
            if e.axiom == axiom:
                return e
        raise KeyError(axiom)

    def status(self, axiom):
        return self[axiom].status

    def to_dict(self):
        d = OrderedDict()
        d["map"] = self.map_id
        d["passed"] = self.passed
        d["axioms"] = [dict(axiom=e.axiom, status=e.status, worst_violation=float(e.worst_violation))
                       for e in self.entries]
        return d

    def __repr__(self):
        s = "<ValidationReport {}: {}>".format(self.map_id, "pass" if self.passed else "fail")
        for e in self.entries:
            s += "\n  {:6s} {:12s} {:.3e}".format(e.axiom, e.status, e.worst_violation)
        return s


def _open_grid(br, grid_size):
    return np.linspace(br.a, br.b, grid_size + 2)[1:-1]


def schwarzian_check(cmap, grid_size=200, tol=1e-9):
    """ Check that 1/sqrt|Df| is convex on each branch.

    Parameters
    ----------
    cmap : CuspMapSpec
    grid_size : int
        Number of interior grid points per branch, >= 3.
    tol : float
        Relative tolerance on negative second differences.

    Returns
    -------
    SchwarzianCheck
    """
    assert grid_size >= 3
    worst = []
    for br in cmap.branches:
        x = _open_grid(br, grid_size)
        df = np.abs(br.deriv(x))
        if np.any(df == 0):
            raise SingularDerivativeError(
                "@schwarzian_check: Df vanishes inside {} at x = {}".format(br, x[df == 0][0]))
        g = 1 / np.sqrt(df)
        d2 = g[2:] - 2 * g[1:-1] + g[:-2]
        worst.append(float(min(d2.min() / g.max(), 0.)))
    return SchwarzianCheck(passed=all(w >= -tol for w in worst), worst=tuple(worst))


def _holder_check(cmap, holder_C, holder_alpha, rng, n_pairs):
    worst = 0.
    for br in cmap.branches:
        xy = rng.uniform(br.a, br.b, size=(n_pairs, 2))
        dx = np.abs(xy[:, 0] - xy[:, 1])
        m = dx > 0
        ratio = np.abs(br.deriv(xy[m, 0]) - br.deriv(xy[m, 1])) / dx[m] ** holder_alpha
        worst = max(worst, float(ratio.max()) if ratio.size else 0.)
    return AxiomResult("(1)", "pass" if worst < holder_C else "fail", max(worst - holder_C, 0.))


def _measured_order(br, c, delta):
    """ log-log slope of |Df| towards the branch end c """
    side = 1. if np.isclose(c, br.a) else -1.
    delta2 = min(1e3 * delta, 0.25 * br.length)
    d1 = abs(float(br.deriv(c + side * delta)))
    d2 = abs(float(br.deriv(c + side * delta2)))
    if d1 == 0:
        return np.inf
    return np.log(d2 / d1) / np.log(delta2 / delta)


def _crit_check(cmap, delta, crit_tol):
    worst = 0.
    failed = False
    for c in cmap.interior_crit:
        for br in cmap.branches:
            if not (c == br.a or c == br.b):
                continue
            x = c + delta if c == br.a else c - delta
            df = abs(float(br.deriv(x)))
            if isinstance(br, RovellaBranch):
                bound = 10 * br.rho * br.ell * delta ** (br.ell - 1)
            else:
                bound = crit_tol
            if df > bound or not _measured_order(br, c, delta) > 1e-6:
                failed = True
            worst = max(worst, df - bound)
    return AxiomResult("(2)", "fail" if failed else "pass", max(worst, 0.))


def _f1_check(cmap, tol=1e-9):
    worst = 0.
    for br in cmap.branches:
        x0 = br.b if br.b == 0 else br.a
        worst = max(worst, abs(abs(float(br.eval(x0))) - 0.5))
    return AxiomResult("(f1)", "pass" if worst <= tol else "fail", worst)


def _f2_check(cmap, grid_size, delta):
    worst = 0.
    failed = False
    for br in cmap.branches:
        df = br.deriv(_open_grid(br, grid_size))
        worst = max(worst, float(-df.min()))
        if np.any(df <= 0):
            failed = True
        c = 0. if br.b == 0 else (0. if br.a == 0 else None)
        if c is not None:
            order = _measured_order(br, c, delta)
            if not order > 1e-6:
                failed = True
                worst = max(worst, abs(float(br.deriv(c + (delta if c == br.a else -delta)))))
    return AxiomResult("(f2)", "fail" if failed else "pass", max(worst, 0.))


def _f3_check(cmap, grid_size):
    worst = 0.
    for br in cmap.branches:
        outer = br.a if br.b == 0 else br.b
        x = np.linspace(br.a, br.b, grid_size + 1)
        x = x[x != 0]
        excess = float(np.abs(br.deriv(x)).max() - abs(float(br.deriv(outer))))
        worst = max(worst, excess)
    return AxiomResult("(f3)", "pass" if worst <= 1e-12 else "fail", max(worst, 0.))


def _f4_check(cmap, horizon, tol=1e-9, cusp_tol=1e-12):
    """ Track the orbits of the outer endpoints looking for a repelling cycle. """
    if horizon <= 0:
        return AxiomResult("(f4)", "not-checked", 0.)
    lo, hi = cmap.domain
    statuses = []
    for e in (lo, hi):
        i = cmap.branches_at(e)[0]
        orbit = [float(cmap.branches[i].eval(e))]
        status = "not-checked"
        for _ in range(horizon):
            x = orbit[-1]
            if any(abs(x - c) < cusp_tol for c in cmap.interior_crit):
                break
            ind = int(cmap.locate(x))
            if ind < 0:
                break
            x_next = float(cmap.branches[ind].eval(x))
            hit = [j for j, xj in enumerate(orbit) if abs(xj - x_next) < tol]
            if hit:
                cycle = np.array(orbit[hit[0]:])
                mult = np.prod(np.abs(cmap.derivative(cycle)))
                status = "pass" if mult > 1 else "fail"
                break
            orbit.append(x_next)
        statuses.append(status)
    if "fail" in statuses:
        status = "fail"
    elif all(s == "pass" for s in statuses):
        status = "pass"
    else:
        status = "not-checked"
    return AxiomResult("(f4)", status, 0.)


def _f5_check(cmap, grid_size):
    """ sup Sf < 0 with Sf = -2 g''/g, g = |Df|^(-1/2), on each branch grid. """
    sup = -np.inf
    for br in cmap.branches:
        x = _open_grid(br, grid_size)
        h = x[1] - x[0]
        df = np.abs(br.deriv(x))
        if np.any(df == 0):
            return AxiomResult("(f5)", "fail", np.inf)
        g = 1 / np.sqrt(df)
        sf = -2 * (g[2:] - 2 * g[1:-1] + g[:-2]) / (h ** 2 * g[1:-1])
        sup = max(sup, float(sf.max()))
    return AxiomResult("(f5)", "pass" if sup < 0 else "fail", max(sup, 0.))


def validate_cusp_map(cmap, holder_C=1000., holder_alpha=1.05, grid_size=200,
                      seed=0, n_pairs=10000, delta=1e-6, crit_tol=1e-3, f4_horizon=0):
    """ Check the cusp-map axioms.

    Parameters
    ----------
    cmap : CuspMapSpec
    holder_C, holder_alpha : float
        Constants of the Hoelder bound on Df, holder_alpha > 1.
    grid_size : int
        Grid size of the Schwarzian and rovella checks.
    seed : int
        Seed of the sampled Hoelder pairs.
    n_pairs : int
        Number of sampled pairs per branch.
    delta : float
        Offset from Crit at which the derivative limit is evaluated.
    crit_tol : float
        Derivative bound at Crit for branches without a known order.
    f4_horizon : int
        Orbit-tracking horizon of (f4), 0 for not checked.

    Returns
    -------
    ValidationReport
    """
    if not holder_alpha > 1:
        raise ValueError("@validate_cusp_map: holder_alpha must be > 1 [{}]".format(holder_alpha))
    rng = np.random.default_rng(seed)
    entries = [_holder_check(cmap, holder_C, holder_alpha, rng, n_pairs),
               _crit_check(cmap, delta, crit_tol)]
    try:
        sc = schwarzian_check(cmap, grid_size)
        entries.append(AxiomResult("(3)", "pass" if sc.passed else "fail", -min(sc.worst)))
    except SingularDerivativeError as e:
        logging.warning(str(e))
        sc = None
        entries.append(AxiomResult("(3)", "fail", np.inf))
    if cmap.is_rovella:
        entries.append(_f1_check(cmap))
        entries.append(_f2_check(cmap, grid_size, delta))
        entries.append(_f3_check(cmap, grid_size))
        entries.append(_f4_check(cmap, f4_horizon))
        entries.append(_f5_check(cmap, grid_size))
    report = ValidationReport(cmap.name, entries)
    logging.info("@validate_cusp_map: {} -> {}".format(cmap.name, "pass" if report.passed else "fail"))
    return report
