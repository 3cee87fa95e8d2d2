# -*- coding: utf-8 -*-
"""
Aims
----
- discrete approximations of invariant measures: atoms, or cell weights
  on an Ulam grid
- Lyapunov exponent of a measure with the clamp at the cusps
- equilibrium states of -t log|Df| from the left and right Ulam eigenvectors

"""

import logging
import warnings
from collections import namedtuple

import numpy as np

from ..errors import EigenGapWarning
from .ulam import UlamOperator, ulam_grid

__all__ = ["MeasureApprox", "equilibrium_measure", "lyapunov_of_measure", "free_energy"]

LyapunovEstimate = namedtuple(
    typename="LyapunovEstimate",
    field_names=[
        "value",  # sum of weights * log|Df| at the support
        "clamped",  # support points with |Df| below the floor
    ]
)


class MeasureApprox:
    """ Discrete approximation of an invariant probability measure on I.

    Parameters
    ----------
    support : array
        Atom positions (cell midpoints for grid densities).
    weights : array
        Probabilities, nonnegative, summing to 1.
    lo, hi : array, optional
        Cell ends when the measure is a grid density.
    branch : array, optional
        Branch index of each atom, needed for atoms on shared branch ends.
    t : float, optional
        The parameter it approximates an equilibrium state for.
    lyapunov, entropy, pressure : float, optional
    clamped : int
    warnings : tuple
        Caveats attached by the constructing routine.
    source : str
        Provenance label.
    """

    def __init__(self, support, weights, lo=None, hi=None, branch=None, t=None,
                 lyapunov=None, entropy=None, pressure=None, clamped=0, warnings=(), source=""):
        self.support = np.atleast_1d(np.asarray(support, dtype=float))
        self.weights = np.atleast_1d(np.asarray(weights, dtype=float))
        assert self.support.shape == self.weights.shape
        if np.any(self.weights < 0):
            raise ValueError("@MeasureApprox: negative weights")
        if self.size and abs(self.weights.sum() - 1) > 1e-12:
            raise ValueError("@MeasureApprox: weights sum to {!r}".format(self.weights.sum()))
        self.lo = None if lo is None else np.asarray(lo, dtype=float)
        self.hi = None if hi is None else np.asarray(hi, dtype=float)
        self.branch = None if branch is None else np.asarray(branch, dtype=int)
        self.t = t
        self.lyapunov = lyapunov
        self.entropy = entropy
        self.pressure = pressure
        self.clamped = clamped
        self.warnings = tuple(warnings)
        self.source = source

    @property
    def size(self):
        return len(self.support)

    @property
    def is_empty(self):
        return self.size == 0

    @property
    def has_cells(self):
        return self.lo is not None

    @property
    def width(self):
        return self.hi - self.lo

    def density(self):
        """ weights / cell width """
        assert self.has_cells
        return self.weights / self.width

    def with_lyapunov(self, cmap, floor=1e-10):
        """ A copy with the lyapunov field computed on cmap. """
        est = lyapunov_of_measure(cmap, self, floor=floor)
        return MeasureApprox(self.support, self.weights, lo=self.lo, hi=self.hi, branch=self.branch, t=self.t,
                             lyapunov=est.value, entropy=self.entropy, pressure=self.pressure,
                             clamped=est.clamped, warnings=self.warnings, source=self.source)

    @staticmethod
    def point_masses(points, weights=None, branch=None, entropy=None, source="point-masses"):
        points = np.atleast_1d(np.asarray(points, dtype=float))
        if weights is None:
            weights = np.ones(len(points)) / len(points)
        return MeasureApprox(points, weights, branch=branch, entropy=entropy, source=source)

    @staticmethod
    def lebesgue(cmap, N=1024):
        """ Normalized Lebesgue measure on the branches of cmap as a grid density. """
        lo, hi, branch = ulam_grid(cmap, N)
        w = (hi - lo) / (hi - lo).sum()
        return MeasureApprox(0.5 * (lo + hi), w / w.sum(), lo=lo, hi=hi, branch=branch, source="lebesgue")

    @staticmethod
    def empty():
        return MeasureApprox(np.zeros(0), np.zeros(0), source="empty")

    def __repr__(self):
        return "<MeasureApprox {} atoms{} t={} lyapunov={} entropy={}>".format(
            self.size, " (cells)" if self.has_cells else "", self.t, self.lyapunov, self.entropy)


def lyapunov_of_measure(cmap, mu, floor=1e-10):
    """ lambda(mu) = sum weights * log|Df| at the support, |Df| clamped at floor.

    Returns
    -------
    LyapunovEstimate
    """
    if mu.is_empty:
        return LyapunovEstimate(value=np.nan, clamped=0)
    df = np.abs(cmap.derivative(mu.support, mu.branch))
    mask = df < floor
    if np.any(mask):
        logging.warning("@lyapunov_of_measure: {} atoms clamped at |Df| = {:.1e}".format(mask.sum(), floor))
    value = float(np.sum(mu.weights * np.log(np.where(mask, floor, df))))
    return LyapunovEstimate(value=value, clamped=int(mask.sum()))


def equilibrium_measure(cmap, t, N=1024, floor=1e-10, eigengap_tol=1e-3, tol=1e-12, max_iters=100000):
    """ Equilibrium state of -t log|Df| from the Ulam operator.

    The measure is the normalized product of the right and left leading
    eigenvectors. The entropy is h = p(t) + t lambda(mu).

    Parameters
    ----------
    cmap : CuspMapSpec
    t : float
    N : int
        Grid size.
    floor : float
    eigengap_tol : float
        Warn (EigenGapWarning) when 1 - |lambda_2|/rho is below this.

    Returns
    -------
    MeasureApprox
    """
    op = UlamOperator(cmap, t, N, floor=floor)
    right = op.right_vector(tol=tol, max_iters=max_iters)
    left = op.left_vector(tol=tol, max_iters=max_iters)
    w = right.vector * left.vector
    w = w / w.sum()
    p = float(np.log(right.rho) + op.log_scale)
    caveats = []
    eigengap = 1 - max(right.ratio, left.ratio)
    if eigengap < eigengap_tol:
        msg = "@equilibrium_measure: eigen-gap {:.2e} below {:.1e}, leading eigenvector may not be unique".format(
            eigengap, eigengap_tol)
        warnings.warn(msg, EigenGapWarning)
        caveats.append(msg)
    mu = MeasureApprox(op.mid, w, lo=op.lo, hi=op.hi, branch=op.branch, t=t, pressure=p,
                       clamped=op.clamped, warnings=caveats, source="ulam:{}".format(N))
    lam = lyapunov_of_measure(cmap, mu, floor=floor)
    mu.lyapunov = lam.value
    mu.entropy = p + t * lam.value
    logging.info("@equilibrium_measure: {} t={} p={:.6g} lambda={:.6g} h={:.6g}".format(
        cmap.name, t, p, mu.lyapunov, mu.entropy))
    return mu


def free_energy(cmap, mu, t):
    """ h(mu) - t lambda(mu) """
    if mu.entropy is None or mu.lyapunov is None:
        raise ValueError("@free_energy: entropy and lyapunov must be populated")
    return mu.entropy - t * mu.lyapunov
