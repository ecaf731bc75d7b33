"""Type systems: successor-count matrices over a finite alphabet of types.

A type system is stored as sparse triplets ``(i, j, M_ij)`` where a point of
type ``j`` has exactly ``M_ij`` successors of type ``i``. Triplets are kept
sorted by ``(column, row)`` so that every builder yields bit-identical
matrices from run to run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from math import gcd
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import NonPositivePredecessor, NotAperiodic, NotIrreducible, ValidationError

MAX_DEGREE = 2**31


@dataclass(frozen=True, eq=False)
class TypeSystem:
    """Immutable successor-count matrix plus the regular degree |S|.

    Use :meth:`from_triplets` or :meth:`from_dense` rather than the raw
    constructor; they canonicalize the triplet order.
    """

    type_count: int
    degree: int
    rows: np.ndarray
    cols: np.ndarray
    counts: np.ndarray
    labels: Optional[tuple] = field(default=None)

    def __post_init__(self):
        for arr in (self.rows, self.cols, self.counts):
            arr.setflags(write=False)

    @classmethod
    def from_triplets(cls, type_count, degree, rows, cols, counts, labels=None):
        """Build from (row, column, count) triplets.

        Duplicate positions are summed and zero counts dropped, then the
        triplets are sorted by (column, row).
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        if not (rows.shape == cols.shape == counts.shape):
            raise ValueError("triplet arrays must have equal length")
        if rows.size and (rows.min() < 0 or cols.min() < 0
                          or rows.max() >= type_count or cols.max() >= type_count):
            raise ValidationError("triplet index out of range")
        if (counts < 0).any():
            raise ValidationError("negative successor count")
        keys = cols * type_count + rows
        order = np.argsort(keys, kind="stable")
        keys, counts = keys[order], counts[order]
        uniq, start = np.unique(keys, return_index=True)
        if uniq.size != keys.size:
            counts = np.add.reduceat(counts, start)
        keep = counts > 0
        uniq, counts = uniq[keep], counts[keep]
        index_type = np.int32 if type_count < 2**31 else np.int64
        return cls(
            type_count=int(type_count),
            degree=int(degree),
            rows=(uniq % type_count).astype(index_type),
            cols=(uniq // type_count).astype(index_type),
            counts=np.ascontiguousarray(counts, dtype=np.int64),
            labels=tuple(labels) if labels is not None else None,
        )

    @classmethod
    def from_dense(cls, matrix, degree, labels=None):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("successor matrix must be square")
        rows, cols = np.nonzero(matrix)
        return cls.from_triplets(matrix.shape[0], degree, rows, cols,
                                 matrix[rows, cols], labels)

    @property
    def nnz(self):
        return int(self.counts.size)

    def to_dense(self):
        out = np.zeros((self.type_count, self.type_count), dtype=np.int64)
        out[self.rows, self.cols] = self.counts
        return out

    def to_sparse(self):
        return sp.coo_matrix((self.counts, (self.rows, self.cols)),
                             shape=(self.type_count, self.type_count))

    def column_sums(self):
        return np.bincount(self.cols, weights=self.counts,
                           minlength=self.type_count).astype(np.int64)

    def to_json(self):
        return {
            "type_count": self.type_count,
            "degree": self.degree,
            "triplets": [[int(i), int(j), int(m)]
                         for i, j, m in zip(self.rows, self.cols, self.counts)],
            "labels": list(self.labels) if self.labels is not None else None,
        }

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        trip = np.asarray(doc["triplets"], dtype=np.int64).reshape(-1, 3)
        return cls.from_triplets(doc["type_count"], doc["degree"],
                                 trip[:, 0], trip[:, 1], trip[:, 2],
                                 doc.get("labels"))


def predecessors(ts: TypeSystem) -> np.ndarray:
    """Number of predecessors of each type: ``degree - column sum``."""
    return ts.degree - ts.column_sums()


def successor_graph_period(ts: TypeSystem) -> int:
    """Period of the (assumed strongly connected) successor graph.

    BFS levels from type 0; the period is the gcd of
    ``level[src] + 1 - level[dst]`` over all edges ``src -> dst``.
    """
    graph = _successor_graph(ts)
    level = csgraph.shortest_path(graph, unweighted=True, indices=0)
    level = level.astype(np.int64)
    diffs = np.abs(level[ts.cols] + 1 - level[ts.rows])
    diffs = np.unique(diffs[diffs > 0])
    return int(reduce(gcd, diffs.tolist(), 0))


def _successor_graph(ts):
    # edge j -> i whenever a type-j point has a type-i successor
    return sp.csr_matrix((np.ones(ts.nnz, dtype=np.int8), (ts.cols, ts.rows)),
                         shape=(ts.type_count, ts.type_count))


def validate(ts: TypeSystem) -> None:
    """Raise a :class:`ValidationError` subclass unless ``ts`` is a
    Perron-Frobenius type system."""
    if ts.type_count < 1:
        raise ValidationError("type system must have at least one type")
    if not 1 <= ts.degree < MAX_DEGREE:
        raise ValidationError(f"degree {ts.degree} out of range")
    if ts.nnz and (ts.counts < 1).any():
        raise ValidationError("stored successor counts must be >= 1")
    p = predecessors(ts)
    bad = np.flatnonzero(p < 1)
    if bad.size:
        raise NonPositivePredecessor(int(bad[0]), int(p[bad[0]]))
    ncomp, label = csgraph.connected_components(
        _successor_graph(ts), directed=True, connection="strong")
    if ncomp > 1:
        raise NotIrreducible(np.flatnonzero(label == label[0]).tolist())
    period = successor_graph_period(ts)
    if period != 1:
        raise NotAperiodic(period)


def tilde_matrix(ts: TypeSystem) -> sp.coo_matrix:
    """Row-normalized matrix ``M_ij / p_i`` with the sparsity pattern of M."""
    p = predecessors(ts).astype(np.float64)
    vals = ts.counts / p[ts.rows]
    return sp.coo_matrix((vals, (ts.rows, ts.cols)),
                         shape=(ts.type_count, ts.type_count))


def dump_matrix(ts: TypeSystem, fp) -> None:
    json.dump(ts.to_json(), fp)
    fp.write("\n")


def labelled(ts: TypeSystem, labels: Sequence[str]) -> TypeSystem:
    """Copy of ``ts`` carrying human-readable type names."""
    return TypeSystem(ts.type_count, ts.degree, ts.rows, ts.cols, ts.counts,
                      tuple(labels))
