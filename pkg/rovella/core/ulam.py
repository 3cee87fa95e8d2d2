# -*- coding: utf-8 -*-
"""
Aims
----
- Ulam discretization of the transfer operator of a cusp map with the
  potential -t log|Df| (optionally plus an additive term)
- grid refinement near the cusps
- power iteration for the leading eigenvalue and eigenvectors

"""

import logging
from collections import namedtuple

import numpy as np
from scipy import sparse

from ..errors import ConvergenceError

__all__ = ["UlamOperator", "ulam_grid", "power_iteration", "potential_values"]

PowerIteration = namedtuple(
    typename="PowerIteration",
    field_names=[
        "rho",  # spectral radius estimate
        "vector",  # leading eigenvector, L1-normalized
        "n_iter",  # iterations used
        "gap",  # last relative change of the Rayleigh quotient
        "ratio",  # estimated |lambda_2| / rho from the decay of successive iterates
    ]
)


def ulam_grid(cmap, N, zone=0.02, ratio=0.5, n_geom=20):
    """ Partition the branches of cmap into N cells.

    Cells never straddle branch ends. On the zone*|I| nearest each cusp
    the cells shrink geometrically with the given ratio.

    Parameters
    ----------
    cmap : CuspMapSpec
    N : int
        Total number of cells.
    zone : float
        Fraction of |I| refined on each side of a cusp.
    ratio : float
        Ratio of successive cell sizes in the refined zone.
    n_geom : int
        Maximum number of geometric cells per refined zone.

    Returns
    -------
    tuple
        (lo, hi, branch) arrays of cell ends and branch index, sorted.
    """
    assert N >= 16
    lengths = np.array([br.length for br in cmap.branches])
    n_cells = np.floor(N * lengths / lengths.sum()).astype(int)
    n_cells[np.argmax(lengths)] += N - n_cells.sum()
    width_I = cmap.domain[1] - cmap.domain[0]
    lo, hi, branch = [], [], []
    for i, (br, nb) in enumerate(zip(cmap.branches, n_cells)):
        a, b = br.a, br.b
        cusp_a = any(np.isclose(br.a, c) for c in cmap.cusps)
        cusp_b = any(np.isclose(br.b, c) for c in cmap.cusps)
        n_ends = int(cusp_a) + int(cusp_b)
        m = min(n_geom, max(1, nb // 4)) if n_ends else 0
        n_uniform = nb - n_ends * (m + 1)
        assert n_uniform >= 1, "@ulam_grid: N too small for the cusp refinement"
        z = min(zone * width_I, 0.25 * br.length)
        geom = z * ratio ** np.arange(m + 1)  # z, z*r, ..., z*r^m
        edges = []
        if cusp_a:
            edges.append(a + np.hstack((0., geom[::-1])))
            a = a + z
        uniform = np.linspace(a, b - z if cusp_b else b, n_uniform + 1)
        edges.append(uniform)
        if cusp_b:
            edges.append(br.b - geom)
            edges.append([br.b])
        e = np.unique(np.hstack(edges))
        assert len(e) - 1 == nb
        lo.append(e[:-1])
        hi.append(e[1:])
        branch.append(np.full(nb, i))
    return np.hstack(lo), np.hstack(hi), np.hstack(branch)


def potential_values(cmap, x, branch, t, floor=1e-10, extra=None):
    """ psi(x) = -t log max(|Df(x)|, floor) + extra(x).

    Returns
    -------
    tuple
        (psi, clamped) with clamped the number of floor-clamped points.
    """
    df = np.abs(cmap.derivative(x, branch))
    mask = df < floor
    psi = -t * np.log(np.where(mask, floor, df))
    if extra is not None:
        psi = psi + extra(x)
    return psi, int(mask.sum())


def power_iteration(A, tol=1e-12, max_iters=100000, n_stable=3, shift=0., n_flips=25):
    """ Leading eigenvalue of a nonnegative matrix.

    Starts from the all-ones vector and stops once the relative change of the
    Rayleigh quotient is below tol for n_stable consecutive iterations.

    A cyclic block makes the plain iteration oscillate. Once the Rayleigh
    quotient has flipped direction n_flips times in a row without decaying,
    the iteration restarts on A + c I with c the current growth estimate.
    The leading eigenvalue rho + c of the shifted matrix dominates strictly,
    and rho and ratio are mapped back to A.

    Parameters
    ----------
    A : scipy.sparse matrix
    tol : float
    max_iters : int
    n_stable : int
    shift : float
        Start directly on A + shift I.
    n_flips : int

    Returns
    -------
    PowerIteration
    """
    n = A.shape[0]
    v = np.ones(n) / n
    rq_old = np.nan
    step_old = np.nan
    diff_old = np.nan
    ratio = 0.
    gap = np.inf
    n_ok = 0
    n_alt = 0
    for k in range(1, max_iters + 1):
        w = A @ v
        if shift:
            w = w + shift * v
        s = w.sum()
        if not s > 0:
            raise ConvergenceError("@power_iteration: iterate vanished at step {}".format(k), gap=gap, n_iter=k)
        rq = np.dot(v, w) / np.dot(v, v)
        w /= s
        diff = np.abs(w - v).sum()
        if diff_old > 0:
            ratio = diff / diff_old
        diff_old = diff
        gap = abs(rq - rq_old) / abs(rq) if np.isfinite(rq_old) else np.inf
        step = rq - rq_old
        n_alt = n_alt + 1 if step * step_old < 0 and abs(step) > 0.5 * abs(step_old) else 0
        rq_old, step_old = rq, step
        v = w
        n_ok = n_ok + 1 if gap <= tol else 0
        if n_ok >= n_stable:
            if not shift:
                return PowerIteration(rho=s, vector=v, n_iter=k, gap=gap, ratio=min(ratio, 1.))
            rho = s - shift
            # |lambda_2 + c| = ratio (rho + c) leaves lambda_2 up to sign, keep the larger modulus
            return PowerIteration(rho=rho, vector=v, n_iter=k, gap=gap,
                                  ratio=min((min(ratio, 1.) * s + shift) / rho, 1.))
        if not shift and n_alt >= n_flips:
            logging.info("@power_iteration: oscillation after {} steps, shifting by {:.3e}".format(k, s))
            res = power_iteration(A, tol=tol, max_iters=max_iters - k, n_stable=n_stable, shift=s)
            return res._replace(n_iter=res.n_iter + k)
    raise ConvergenceError("@power_iteration: no convergence in {} iterations, last gap {:.3e}".format(
        max_iters, gap), gap=gap, n_iter=max_iters)


class UlamOperator:
    """ Ulam matrix of the weighted transfer operator.

    A[i, j] = exp(psi(x_i)) * |f(cell_i) & cell_j| / |cell_i| with psi the
    potential -t log|Df| (+ extra) at the cell midpoint x_i. The matrix is
    stored scaled by exp(-log_scale).

    Parameters
    ----------
    cmap : CuspMapSpec
    t : float
    N : int
        Number of cells, >= 16.
    floor : float
        Lower clamp of |Df|.
    extra : callable, optional
        Additive potential term, vectorized in x.

    Attributes
    ----------
    lo, hi, mid, width, branch : np.ndarray
        Cell geometry.
    matrix : scipy.sparse.csr_matrix
    log_scale : float
    clamped : int
        Number of floor-clamped cells.
    """

    def __init__(self, cmap, t, N, floor=1e-10, extra=None):
        if not floor > 0:
            raise ValueError("@UlamOperator: floor must be > 0 [{}]".format(floor))
        self.cmap = cmap
        self.t = float(t)
        self.N = int(N)
        self.floor = floor
        self.lo, self.hi, self.branch = ulam_grid(cmap, N)
        self.mid = 0.5 * (self.lo + self.hi)
        self.width = self.hi - self.lo
        psi, self.clamped = potential_values(cmap, self.mid, self.branch, self.t, floor, extra)
        self.log_scale = float(psi.max())
        # keep every row positive, e^-700 is still a normal double
        self.matrix = self._assemble(np.exp(np.maximum(psi - self.log_scale, -700.)))
        if self.clamped:
            logging.info("@Ulam: {} cells clamped at |Df| = {:.1e}".format(self.clamped, floor))

    def _assemble(self, weights):
        cmap = self.cmap
        ya = cmap.evaluate(self.lo, self.branch)
        yb = cmap.evaluate(self.hi, self.branch)
        y_lo = np.clip(np.minimum(ya, yb), self.lo[0], self.hi[-1])
        y_hi = np.clip(np.maximum(ya, yb), self.lo[0], self.hi[-1])
        # columns j with hi_j > y_lo and lo_j < y_hi
        j0 = np.searchsorted(self.hi, y_lo, side="right")
        j1 = np.searchsorted(self.lo, y_hi, side="left")
        count = np.maximum(j1 - j0, 0)
        rows = np.repeat(np.arange(self.N), count)
        offsets = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
        cols = np.repeat(j0, count) + offsets
        overlap = np.minimum(self.hi[cols], y_hi[rows]) - np.maximum(self.lo[cols], y_lo[rows])
        keep = overlap > 0
        rows, cols, overlap = rows[keep], cols[keep], overlap[keep]
        data = weights[rows] * overlap / self.width[rows]
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.N, self.N))

    @property
    def nnz(self):
        return self.matrix.nnz

    def right_vector(self, tol=1e-12, max_iters=100000):
        return power_iteration(self.matrix, tol=tol, max_iters=max_iters)

    def left_vector(self, tol=1e-12, max_iters=100000):
        return power_iteration(self.matrix.T.tocsr(), tol=tol, max_iters=max_iters)

    def pressure(self, tol=1e-12, max_iters=100000):
        """ log of the spectral radius, scale restored. """
        pi = self.right_vector(tol=tol, max_iters=max_iters)
        return np.log(pi.rho) + self.log_scale, pi

    def __repr__(self):
        return "<UlamOperator {} t={} N={} nnz={} clamped={}>".format(
            self.cmap.name, self.t, self.N, self.nnz, self.clamped)
