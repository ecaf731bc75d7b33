"""Lower bound on the spectral radius from a Perron-Frobenius type system.

Pipeline:

1. growth ``e^v`` and positive eigenvector ``A`` of the row-normalized
   matrix ``M~`` (power iteration, 1-norm normalization);
2. ``M'_ij = M_ij sqrt(A_j / A_i)`` and its maximal symmetric expansion
   ``lambda``, the top eigenvalue of ``(M' + M'^T) / 2``;
3. ``rho >= 2 lambda / (sqrt(e^v) |S|)``.

Step 2 uses power iteration from the uniform unit vector. The norms
``|H^n q| / |H^{n-1} q|`` of a nonnegative symmetric ``H`` never decrease,
so every intermediate value is already a valid lower bound for ``lambda``.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import kernels
from .errors import MonotonicityViolation, NoConvergence
from .typesystem import TypeSystem, tilde_matrix

DEFAULT_TOL = 1e-14
DEFAULT_MAX_ITER = 10**6
# allowed relative decrease of the symmetric power-iteration norm (rounding)
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class GrowthData:
    growth: float
    eigenvector: np.ndarray
    residual: float
    iterations: int

    @classmethod
    def from_vector(cls, ts, growth, vector, iterations=0):
        """Normalize ``vector`` to unit 1-norm and attach its eigen-residual."""
        a = np.asarray(vector, dtype=np.float64)
        a = a / a.sum()
        return cls(float(growth), a, eigen_residual(ts, growth, a), iterations)


@dataclass(frozen=True)
class EstimateReport:
    bound: float
    lambda_: float
    growth: float
    degree: int
    matrix_size: int
    power_iterations: int
    growth_iterations: int
    tolerance_used: float
    converged: bool
    elapsed: float

    def to_json(self):
        doc = asdict(self)
        doc["lambda"] = doc.pop("lambda_")
        return doc


class Expansion(NamedTuple):
    value: float
    iterations: int
    converged: bool


def eigen_residual(ts: TypeSystem, growth: float, vector: np.ndarray) -> float:
    """Sup-norm of ``M~ A - growth A``."""
    mt = tilde_matrix(ts)
    out = np.empty(ts.type_count)
    kernels.matvec(mt.row, mt.col, mt.data, vector, out)
    return float(np.max(np.abs(out - growth * vector)))


def growth_and_eigenvector(ts: TypeSystem, tol: float = DEFAULT_TOL,
                           max_iter: int = DEFAULT_MAX_ITER) -> GrowthData:
    """Dominant eigenpair of ``M~`` by power iteration.

    Starts from the uniform vector and renormalizes to unit 1-norm at every
    step. Stops once the growth estimate changes by at most ``tol`` (relative)
    and no entry of the iterate moves by more than ``tol`` relative to
    itself, or once the changes stop shrinking at the rounding floor.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    mt = tilde_matrix(ts)
    rows, cols, vals = mt.row, mt.col, mt.data
    n = ts.type_count
    x = np.full(n, 1.0 / n)
    y = np.empty(n)
    growth = 0.0
    floor = 64 * np.finfo(float).eps
    best = math.inf
    stalled = 0
    for it in range(1, max_iter + 1):
        kernels.matvec(rows, cols, vals, x, y)
        new_growth = float(y.sum())
        y /= new_growth
        dg = abs(new_growth - growth) / new_growth
        dx = float(np.max(np.abs(y - x) / y))
        growth = new_growth
        x, y = y, x
        if dg <= tol and dx <= tol:
            break
        # rounding floor: further iterations cannot reduce the change
        if dx <= floor:
            if dx >= best:
                stalled += 1
                if stalled >= 8:
                    break
            else:
                best, stalled = dx, 0
    else:
        raise NoConvergence(max_iter, growth)
    return GrowthData.from_vector(ts, growth, x, it)


def prime_values(ts: TypeSystem, eigenvector: np.ndarray) -> np.ndarray:
    """Entries ``M_ij sqrt(A_j / A_i)`` of ``M'`` in triplet order."""
    a = np.asarray(eigenvector, dtype=np.float64)
    return ts.counts * np.sqrt(a[ts.cols] / a[ts.rows])


def symmetrized_expansion(ts: TypeSystem, gd: GrowthData, tol: float = DEFAULT_TOL,
                          max_iter: int = DEFAULT_MAX_ITER,
                          trace: Optional[Callable[[int, float], None]] = None,
                          ) -> Expansion:
    """Maximal eigenvalue of ``(M' + M'^T) / 2`` by monotone power iteration.

    Returns the last norm reached. If the budget runs out the partial value
    is returned with ``converged=False``; it is still a lower bound.
    """
    vals = prime_values(ts, gd.eigenvector)
    rows, cols = ts.rows, ts.cols
    n = ts.type_count
    q = np.full(n, 1.0 / math.sqrt(n))
    v = np.empty(n)
    expansion = 0.0
    for it in range(1, max_iter + 1):
        kernels.sym_matvec(rows, cols, vals, q, v)
        norm = kernels.norm2(v)
        diff = norm - expansion
        if diff < -MONOTONE_SLACK * norm:
            raise MonotonicityViolation(it, expansion, norm)
        expansion = norm
        v /= norm
        q, v = v, q
        if trace is not None:
            trace(it, norm)
        if diff < tol:
            return Expansion(expansion, it, True)
    return Expansion(expansion, max_iter, False)


def bound_from(growth: float, lam: float, degree: int) -> float:
    return 2.0 * lam / (math.sqrt(growth) * degree)


def estimate(ts: TypeSystem, gd: Optional[GrowthData] = None, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER,
             trace: Optional[Callable[[int, float], None]] = None) -> EstimateReport:
    """Certified (up to binary64 rounding) lower bound on the spectral radius."""
    start = time.perf_counter()
    if gd is None:
        gd = growth_and_eigenvector(ts, tol, max_iter)
    exp = symmetrized_expansion(ts, gd, tol, max_iter, trace)
    return EstimateReport(
        bound=bound_from(gd.growth, exp.value, ts.degree),
        lambda_=exp.value,
        growth=gd.growth,
        degree=ts.degree,
        matrix_size=ts.type_count,
        power_iterations=exp.iterations,
        growth_iterations=gd.iterations,
        tolerance_used=tol,
        converged=exp.converged,
        elapsed=time.perf_counter() - start,
    )
