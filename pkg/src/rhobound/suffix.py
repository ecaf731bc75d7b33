"""Suffix types: refinements of a base type system by unique-ancestor chains.

A word ``(w0, w1, ..., wk)`` lists the base type of a point followed by the
types of its successive unique ancestors. Words are stored as ``bytes``
(one base-type index per byte), which keeps multi-million-word alphabets
compact and hashable.

A word is *stopped* when its last letter has several predecessors, when its
cumulative weight exceeds the threshold, or when it reaches ``max_length``.
The stopped words form the alphabet of the refined type system.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MemoryBudgetExceeded, PoolOverflow, UnknownWord
from .estimator import GrowthData
from .typesystem import TypeSystem, predecessors

DEFAULT_POOL_LIMIT = 2**31
DEFAULT_MEMORY_BUDGET = 12 * 2**30
UNBOUNDED_LENGTH = 10_000

# rough per-item costs of the Python-side structures, in bytes
_WORD_BYTES = 190       # bytes object + dict slot + list slot
_TRIPLET_BYTES = 48     # build buffers, sorted copies, CSR/float arrays


@dataclass(frozen=True)
class TruncationRule:
    """Stop a word once its weight exceeds ``threshold`` or it has
    ``max_length`` letters."""

    weights: tuple
    threshold: float
    max_length: int = UNBOUNDED_LENGTH

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")

    @classmethod
    def by_length(cls, alphabet_size, max_length):
        return cls((0,) * alphabet_size, 1, max_length)

    @classmethod
    def by_weight(cls, weights, threshold):
        return cls(tuple(weights), threshold, UNBOUNDED_LENGTH)


def as_word(letters) -> bytes:
    return letters if isinstance(letters, bytes) else bytes(letters)


def word_label(word, labels):
    return ",".join(labels[c] for c in word)


class _Base:
    """Lookup tables derived from a base system, shared by the builders."""

    def __init__(self, base: TypeSystem):
        self.base = base
        self.n = base.type_count
        self.dense = base.to_dense()
        self.pred = predecessors(base).tolist()
        # ancestors[a]: letters i with M[a, i] > 0 (a point of type i has
        # a type-a successor), in increasing order
        self.ancestors = [np.flatnonzero(self.dense[a]).tolist() for a in range(self.n)]
        # successors[j]: (letter, count) with M[letter, j] > 0
        self.successors = [[(int(a), int(self.dense[a, j]))
                            for a in np.flatnonzero(self.dense[:, j])]
                           for j in range(self.n)]


def truncate_word(letters, rule: TruncationRule, base: TypeSystem) -> bytes:
    """Shortest stopped prefix of ``letters``."""
    return _truncate(as_word(letters), rule, predecessors(base).tolist())


def _truncate(t, rule, pred):
    weights, threshold = rule.weights, rule.threshold
    total = 0
    i = 0
    for i in range(min(len(t), rule.max_length)):
        c = t[i]
        if pred[c] > 1:
            break
        total += weights[c]
        if total > threshold:
            break
    return t[:i + 1]


def enumerate_types(base: TypeSystem, rule: TruncationRule,
                    limit: int = DEFAULT_POOL_LIMIT) -> list:
    """All stopped words, by generation then lexicographically."""
    tables = _Base(base)
    if len(rule.weights) != tables.n:
        raise ValueError(f"expected {tables.n} weights, got {len(rule.weights)}")
    w, threshold, pred = rule.weights, rule.threshold, tables.pred
    letters = [bytes([i]) for i in range(tables.n)]
    result = []
    pool = [(letters[i], w[i]) for i in range(tables.n)]
    length = 1
    while pool and length < rule.max_length:
        length += 1
        nxt = []
        for t, wt in pool:
            last = t[-1]
            if wt > threshold or pred[last] > 1:
                result.append(t)
            else:
                for i in tables.ancestors[last]:
                    nxt.append((t + letters[i], wt + w[i]))
        if len(result) + len(nxt) > limit:
            raise PoolOverflow(limit)
        pool = nxt
    result.extend(t for t, _ in pool)
    if len(result) > limit:
        raise PoolOverflow(limit)
    return result


def count_types(base: TypeSystem, rule: TruncationRule) -> np.ndarray:
    """Number of stopped words per first letter, without materializing them.

    Aggregates the enumeration over states ``(first, last, weight)``.
    """
    tables = _Base(base)
    w, threshold, pred = rule.weights, rule.threshold, tables.pred
    out = [0] * tables.n  # Python ints: counts may exceed int64
    states = {(i, i, w[i]): 1 for i in range(tables.n)}
    length = 1
    while states and length < rule.max_length:
        length += 1
        nxt = {}
        for (first, last, wt), k in states.items():
            if wt > threshold or pred[last] > 1:
                out[first] += k
                continue
            for i in tables.ancestors[last]:
                key = (first, i, wt + w[i])
                nxt[key] = nxt.get(key, 0) + k
        states = nxt
    for (first, _, _), k in states.items():
        out[first] += k
    return np.array(out, dtype=object if max(out) >= 2**63 else np.int64)


def predicted_footprint(word_counts, base: TypeSystem) -> int:
    """Estimated peak bytes to materialize words and triplets."""
    nnz_col = np.bincount(base.cols, minlength=base.type_count)
    words = int(np.sum(word_counts))
    triplets = int(np.dot(word_counts, nnz_col))
    return words * _WORD_BYTES + triplets * _TRIPLET_BYTES


def check_budget(predicted, budget):
    if budget is not None and predicted > budget:
        raise MemoryBudgetExceeded(predicted, budget)


def _assemble(size, degree, rows, cols, counts, labels=None):
    return TypeSystem.from_triplets(
        size, degree,
        np.frombuffer(rows, dtype=np.int64),
        np.frombuffer(cols, dtype=np.int64),
        np.frombuffer(counts, dtype=np.int64),
        labels,
    )


def transition_matrix(words: Sequence[bytes], base: TypeSystem,
                      rule: TruncationRule, labels=None) -> TypeSystem:
    """Successor-count matrix on the stopped words.

    The successor of ``orig`` under a base letter ``a`` admissible after
    ``orig[0]`` is the stopped prefix of ``a + orig``; it inherits the count
    ``M[a, orig[0]]``.
    """
    tables = _Base(base)
    pred = tables.pred
    index = {w: k for k, w in enumerate(words)}
    prefix = [bytes([a]) for a in range(tables.n)]
    rows, cols, counts = array("q"), array("q"), array("q")
    for j, orig in enumerate(words):
        for a, m in tables.successors[orig[0]]:
            s = _truncate(prefix[a] + orig, rule, pred)
            try:
                rows.append(index[s])
            except KeyError:
                raise UnknownWord(s) from None
            cols.append(j)
            counts.append(m)
    if labels is not None:
        labels = [word_label(w, labels) for w in words]
    return _assemble(len(words), base.degree, rows, cols, counts, labels)


def closed_form_A(words: Sequence[bytes], base: TypeSystem, base_gd: GrowthData,
                  extended: TypeSystem) -> GrowthData:
    """Eigenvector of the refined system from base data alone.

    ``A(i0..im) = A0[im] * growth**-m * M0[i0,i1] ... M0[i(m-1),im]``,
    1-normalized. The residual is measured on ``extended``, the system
    built from ``words``.
    """
    dense = base.to_dense()
    growth = base_gd.growth
    a0 = base_gd.eigenvector
    max_len = max(len(w) for w in words)
    inv_pow = growth ** -np.arange(max_len, dtype=np.float64)
    a = np.empty(len(words))
    for k, t in enumerate(words):
        m = 1
        for x, y in zip(t, t[1:]):
            m *= int(dense[x, y])
        a[k] = m * (a0[t[-1]] * inv_pow[len(t) - 1])
    return GrowthData.from_vector(extended, growth, a, base_gd.iterations)


def build(base: TypeSystem, rule: TruncationRule, limit: int = DEFAULT_POOL_LIMIT,
          memory_budget: int | None = DEFAULT_MEMORY_BUDGET, labels=None):
    """Enumerate, guard memory, and assemble. Returns ``(words, system)``."""
    check_budget(predicted_footprint(count_types(base, rule), base), memory_budget)
    words = enumerate_types(base, rule, limit)
    return words, transition_matrix(words, base, rule, labels)
