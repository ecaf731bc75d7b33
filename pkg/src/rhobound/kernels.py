"""Sequential sparse kernels over (row, col, value) triplets.

Summation order is fixed by the triplet order, so results are
bit-reproducible.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def matvec(rows, cols, vals, u, out):
    """out = M u."""
    out[:] = 0.0
    for k in range(rows.size):
        out[rows[k]] += vals[k] * u[cols[k]]


@numba.njit(cache=True)
def sym_matvec(rows, cols, vals, u, out):
    """out = (M + M^T) u / 2 in a single pass over the triplets."""
    out[:] = 0.0
    for k in range(rows.size):
        c = 0.5 * vals[k]
        out[rows[k]] += c * u[cols[k]]
        out[cols[k]] += c * u[rows[k]]


@numba.njit(cache=True)
def two_sided_matvec(rows, cols, fwd, bwd, u, out):
    """out = F u + B^T u where F and B share the triplet pattern.

    ``fwd[k]`` is the entry of F at (rows[k], cols[k]); ``bwd[k]`` is the
    entry of B at the same position, applied transposed.
    """
    out[:] = 0.0
    for k in range(rows.size):
        out[rows[k]] += fwd[k] * u[cols[k]]
        out[cols[k]] += bwd[k] * u[rows[k]]


def norm2(v):
    return float(np.sqrt(np.dot(v, v)))
