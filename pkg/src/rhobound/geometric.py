"""Random walk on the strip Y = Z x T built from a type system.

From level ``n`` and type ``j`` the walk moves up to ``(n + 1, i)`` with
probability ``M_ij / |S|`` and down to ``(n - 1, i)`` with probability
``e^-v A_i M_ji / (A_j |S|)``. Its spectral radius is the minimum over ``c``
of ``phi(c) = rho(e^c P+ + e^-c P-)``, attained at ``c = -v/2``, where it
coincides with the estimator's bound. This module evaluates both sides as an
end-to-end check.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import NoConvergence, StochasticityViolation
from .estimator import EstimateReport, GrowthData
from .typesystem import TypeSystem

STOCHASTIC_TOL = 1e-12
PHI_TOL = 1e-13
PHI_MAX_ITER = 10**6


@dataclass(frozen=True, eq=False)
class QuasiTransitiveWalk:
    """Forward and backward transition weights on the triplet pattern of M.

    ``fwd[k]`` is ``P+[rows[k], cols[k]]``; ``bwd[k]`` is
    ``P-[cols[k], rows[k]]`` (the backward move goes against the edge).
    """

    rows: np.ndarray
    cols: np.ndarray
    fwd: np.ndarray
    bwd: np.ndarray
    degree: int
    growth: float
    type_count: int

    @property
    def p_plus(self) -> sp.coo_matrix:
        n = self.type_count
        return sp.coo_matrix((self.fwd, (self.rows, self.cols)), shape=(n, n))

    @property
    def p_minus(self) -> sp.coo_matrix:
        n = self.type_count
        return sp.coo_matrix((self.bwd, (self.cols, self.rows)), shape=(n, n))

    def column_sums(self) -> np.ndarray:
        n = self.type_count
        return (np.bincount(self.cols, weights=self.fwd, minlength=n)
                + np.bincount(self.rows, weights=self.bwd, minlength=n))


def build_y_walk(ts: TypeSystem, gd: GrowthData, tol: float = STOCHASTIC_TOL
                 ) -> QuasiTransitiveWalk:
    """Transition matrices of the Y walk; raises if a column of P+ + P-
    misses 1 by more than ``tol``."""
    a = gd.eigenvector
    m = ts.counts.astype(np.float64)
    d = float(ts.degree)
    fwd = m / d
    bwd = a[ts.cols] * m / (gd.growth * a[ts.rows] * d)
    walk = QuasiTransitiveWalk(ts.rows, ts.cols, fwd, bwd, ts.degree, gd.growth,
                               ts.type_count)
    deficit = walk.column_sums() - 1.0
    worst = int(np.argmax(np.abs(deficit)))
    if abs(deficit[worst]) > tol:
        raise StochasticityViolation(worst, float(deficit[worst]))
    return walk


def phi(walk: QuasiTransitiveWalk, c: float, tol: float = PHI_TOL,
        max_iter: int = PHI_MAX_ITER) -> float:
    """Perron value of ``e^c P+ + e^-c P-``.

    Power iteration with Collatz-Wielandt bounds: the smallest and largest
    ratios ``(Bx)_i / x_i`` bracket the Perron value, and the iteration stops
    once the bracket is narrower than ``tol`` relative.
    """
    fwd = math.exp(c) * walk.fwd
    bwd = math.exp(-c) * walk.bwd
    n = walk.type_count
    x = np.full(n, 1.0 / n)
    y = np.empty(n)
    for _ in range(max_iter):
        kernels.two_sided_matvec(walk.rows, walk.cols, fwd, bwd, x, y)
        ratio = y / x
        lo, hi = float(ratio.min()), float(ratio.max())
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi)
        x, y = y / y.sum(), x
    raise NoConvergence(max_iter, 0.5 * (lo + hi))


@dataclass(frozen=True)
class GeometricRecord:
    phi_at_minimum: float
    bound: float
    bound_defect: float
    symmetry_defect: float
    convexity_defect: float
    grid: tuple
    values: tuple
    bound_ok: bool
    symmetry_ok: bool
    convexity_ok: bool

    @property
    def passed(self):
        return self.bound_ok and self.symmetry_ok and self.convexity_ok

    def to_json(self):
        doc = asdict(self)
        doc["grid"] = list(self.grid)
        doc["values"] = list(self.values)
        doc["passed"] = self.passed
        return doc


def verify_geometric(ts: TypeSystem, gd: GrowthData, report: EstimateReport,
                     points: int = 7, spread: float = 1.0,
                     bound_tol: float = 1e-9, shape_tol: float = 1e-10
                     ) -> GeometricRecord:
    """Compare ``phi(-v/2)`` with the estimator's bound and test the shape of
    ``phi`` on an evenly spaced grid centred at ``-v/2``.

    The symmetry defect is the largest ``|phi(c) - phi(-c - v)|`` (mirror
    pairs of the grid); the convexity defect is the largest excess of a grid
    value over the mean of its two neighbours. Failures are recorded, not
    raised.
    """
    walk = build_y_walk(ts, gd)
    v = math.log(gd.growth)
    centre = -0.5 * v
    half = points // 2
    grid = tuple(centre + spread * k / max(half, 1) for k in range(-half, half + 1))
    values = tuple(phi(walk, c) for c in grid)
    at_min = values[half] if points % 2 else phi(walk, centre)
    sym = max((abs(values[k] - values[-1 - k]) for k in range(len(grid))), default=0.0)
    conv = max((values[k] - 0.5 * (values[k - 1] + values[k + 1])
                for k in range(1, len(grid) - 1)), default=0.0)
    conv = max(conv, 0.0)
    bound_defect = abs(at_min - report.bound)
    return GeometricRecord(
        phi_at_minimum=at_min, bound=report.bound, bound_defect=bound_defect,
        symmetry_defect=sym, convexity_defect=conv, grid=grid, values=values,
        bound_ok=bound_defect <= bound_tol, symmetry_ok=sym <= shape_tol,
        convexity_ok=conv <= shape_tol)


def return_probability(walk: QuasiTransitiveWalk, steps: int) -> float:
    """Probability that the Y walk started at ``(0, type 0)`` is back there
    after ``steps`` steps, by exact propagation over levels ``-steps..steps``."""
    if steps < 0 or steps % 2:
        raise ValueError("steps must be even and nonnegative")
    if steps == 0:
        return 1.0
    plus = walk.p_plus.tocsr()
    minus = walk.p_minus.tocsr()
    width = 2 * steps + 1
    x = np.zeros((walk.type_count, width))
    x[0, steps] = 1.0
    for _ in range(steps):
        y = np.zeros_like(x)
        y[:, 1:] += plus @ x[:, :-1]
        y[:, :-1] += minus @ x[:, 1:]
        x = y
    return float(x[0, steps])
