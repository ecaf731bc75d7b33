"""Truncated essential types for the genus-g surface group.

Words run over the modified Cannon alphabet plus the ambiguity marker
``*`` (see :mod:`rhobound.surface` for the index conventions). A ``*``
stands for a position where two geodesics to the point disagree. Every
type-2g letter is followed by a run of ``2g - 1`` markers (one half-turn
around a 4g-gon). A run keeps growing by further half-turns when the last
covered letter is again of type 2g, or is a 1' directly after a 2'.

Stopping uses weights only (no predecessor stop); the marker weight must be
maximal so that marking can only shorten the kept prefix.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, PoolOverflow, UnknownWord
from .estimator import DEFAULT_TOL, GrowthData, growth_and_eigenvector
from .suffix import (DEFAULT_MEMORY_BUDGET, DEFAULT_POOL_LIMIT, UNBOUNDED_LENGTH,
                     _TRIPLET_BYTES, _WORD_BYTES, _assemble, as_word, check_budget,
                     word_label)
from .surface import marker, modified_cannon_matrix, modified_dense, modified_labels, \
    one_prime, top_index, two_prime
from .typesystem import TypeSystem


@dataclass(frozen=True)
class EssentialRule:
    genus: int
    weights: tuple
    threshold: float
    max_length: int = UNBOUNDED_LENGTH

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.weights) != 2 * self.genus + 3:
            raise ConfigError(
                f"essential weights need {2 * self.genus + 3} entries "
                f"(types 1..2g, 1', 2', *), got {len(self.weights)}")
        if self.weights[-1] != max(self.weights):
            raise ConfigError("the weight of * must be maximal")
        if any(w < 0 for w in self.weights):
            raise ConfigError("weights must be nonnegative")
        if self.max_length < 1:
            raise ConfigError("max_length must be >= 1")

    @classmethod
    def by_length(cls, genus, max_length):
        return cls(genus, (0,) * (2 * genus + 3), 1, max_length)

    @classmethod
    def by_weight(cls, genus, weights, threshold):
        return cls(genus, tuple(weights), threshold, UNBOUNDED_LENGTH)


def mark_ambiguous(letters, g: int) -> bytes:
    """Replace the positions not shared by all geodesics with ``*``."""
    t = as_word(letters)
    top, star = top_index(g), marker(g)
    i = t.find(top)
    if i < 0:
        return t
    u = bytearray(t)
    n = len(t)
    half = 2 * g - 1
    while True:
        end = i + half
        if end >= n:
            u[i + 1:] = bytes([star]) * (n - i - 1)
            return bytes(u)
        u[i + 1:end + 1] = bytes([star]) * half
        i = end
        chained = t[i] == top or (t[i] == one_prime(g) and t[i - 1] == two_prime(g))
        if not chained:
            i = t.find(top, i)
            if i < 0:
                return bytes(u)


def _truncate(t, rule):
    weights, threshold = rule.weights, rule.threshold
    total = 0
    i = 0
    for i in range(min(len(t), rule.max_length)):
        total += weights[t[i]]
        if total > threshold:
            break
    return t[:i + 1]


def truncate_essential(letters, rule: EssentialRule) -> bytes:
    return _truncate(mark_ambiguous(letters, rule.genus), rule)


class _Tables:
    def __init__(self, g):
        self.g = g
        self.dense = modified_dense(g)
        self.n = 2 * g + 2
        self.ancestors = [np.flatnonzero(self.dense[a]).tolist() for a in range(self.n)]
        self.successors = [[(int(a), int(self.dense[a, j]))
                            for a in np.flatnonzero(self.dense[:, j])]
                           for j in range(self.n)]


def enumerate_essential(g: int, rule: EssentialRule,
                        limit: int = DEFAULT_POOL_LIMIT) -> list:
    """All stopped essential words, by generation then letter order.

    Pool entries carry ``(word, weight, undet)`` where ``undet`` counts the
    trailing markers modulo the half-turn length; a definite letter may
    follow a run only at a half-turn boundary.
    """
    if rule.genus != g:
        raise ConfigError("rule genus does not match")
    tables = _Tables(g)
    w, threshold = rule.weights, rule.threshold
    top, star = top_index(g), marker(g)
    letters = [bytes([i]) for i in range(2 * g + 3)]
    result = []
    pool = [(letters[i], w[i], 0) for i in range(tables.n)]
    length = 1
    while pool and length < rule.max_length:
        length += 1
        nxt = []
        for t, wt, undet in pool:
            last = t[-1]
            if wt > threshold:
                result.append(t)
            elif last == top:
                nxt.append((t + letters[star], wt + w[star], 1))
            elif last != star:
                for i in tables.ancestors[last]:
                    nxt.append((t + letters[i], wt + w[i], 0))
            else:
                undet += 1
                if undet == 2 * g:
                    # half-turn finished: any definite letter may follow
                    for i in range(tables.n):
                        nxt.append((t + letters[i], wt + w[i], 0))
                    undet = 1
                nxt.append((t + letters[star], wt + w[star], undet))
        if len(result) + len(nxt) > limit:
            raise PoolOverflow(limit)
        pool = nxt
    result.extend(t for t, _, _ in pool)
    if len(result) > limit:
        raise PoolOverflow(limit)
    return result


def count_essential(g: int, rule: EssentialRule) -> np.ndarray:
    """Stopped-word counts per first letter, aggregated over pool states."""
    tables = _Tables(g)
    out = [0] * tables.n
    w, threshold = rule.weights, rule.threshold
    top, star = top_index(g), marker(g)
    states = {(i, i, w[i], 0): 1 for i in range(tables.n)}
    length = 1

    def add(d, key, k):
        d[key] = d.get(key, 0) + k

    while states and length < rule.max_length:
        length += 1
        nxt = {}
        for (first, last, wt, undet), k in states.items():
            if wt > threshold:
                out[first] += k
            elif last == top:
                add(nxt, (first, star, wt + w[star], 1), k)
            elif last != star:
                for i in tables.ancestors[last]:
                    add(nxt, (first, i, wt + w[i], 0), k)
            else:
                undet += 1
                if undet == 2 * g:
                    for i in range(tables.n):
                        add(nxt, (first, i, wt + w[i], 0), k)
                    undet = 1
                add(nxt, (first, star, wt + w[star], undet), k)
        states = nxt
    for (first, *_), k in states.items():
        out[first] += k
    return np.array(out, dtype=object if max(out) >= 2**63 else np.int64)


def essential_transition_matrix(words: Sequence[bytes], g: int, rule: EssentialRule,
                                labels=None) -> TypeSystem:
    """Successor counts: ``orig`` goes to ``truncate(mark(a + orig))`` with
    multiplicity ``M'[a, orig[0]]`` from the modified Cannon matrix."""
    tables = _Tables(g)
    index = {w: k for k, w in enumerate(words)}
    prefix = [bytes([a]) for a in range(tables.n)]
    rows, cols, counts = array("q"), array("q"), array("q")
    for j, orig in enumerate(words):
        for a, m in tables.successors[orig[0]]:
            s = _truncate(mark_ambiguous(prefix[a] + orig, g), rule)
            try:
                rows.append(index[s])
            except KeyError:
                raise UnknownWord(s) from None
            cols.append(j)
            counts.append(m)
    if labels is not None:
        labels = [word_label(w, labels) for w in words]
    return _assemble(len(words), 4 * g, rows, cols, counts, labels)


def essential_A(words: Sequence[bytes], g: int, base_gd: GrowthData,
                extended: TypeSystem) -> GrowthData:
    """Closed-form eigenvector of the essential system.

    Definite transitions contribute ``M'[i, j]``. An internal run of
    ``(2g-1)m`` markers followed by type ``j`` contributes ``a_j 2^(m-1)``
    with ``a_j = 4g-3`` for ``j`` in {2g-1, 2g} and ``4g-2`` otherwise. A
    trailing run contributes ``2^r`` with the anchor moved ``r`` half-turns
    deeper, ``r = floor((trailing - 1) / (2g-1))``.
    """
    dense = modified_dense(g)
    star, half = marker(g), 2 * g - 1
    special = (2 * g - 2, 2 * g - 1)
    growth = base_gd.growth
    a0 = base_gd.eigenvector
    max_len = max(len(w) for w in words)
    inv_pow = growth ** -np.arange(max_len, dtype=np.float64)
    a = np.empty(len(words))
    for k, t in enumerate(words):
        last = len(t) - 1
        while t[last] == star:
            last -= 1
        m = 1
        ambiguous = 0
        for x, y in zip(t[:last], t[1:last + 1]):
            if y == star:
                ambiguous += 1
            elif x != star:
                m *= int(dense[x, y])
            else:
                m *= 4 * g - 3 if y in special else 4 * g - 2
                ambiguous -= half
        m <<= ambiguous // half
        anchor = t[last]
        remainder = (len(t) - last - 2) // half
        if remainder > 0:
            last += remainder * half
            m <<= remainder
        a[k] = m * (a0[anchor] * inv_pow[last])
    return GrowthData.from_vector(extended, growth, a, base_gd.iterations)


def essential_growth(g, tol=DEFAULT_TOL):
    """Growth data of the modified Cannon system (the anchor for ``essential_A``)."""
    return growth_and_eigenvector(modified_cannon_matrix(g), tol)


def predicted_footprint(word_counts, g) -> int:
    base = modified_cannon_matrix(g)
    nnz_col = np.bincount(base.cols, minlength=base.type_count)
    return (int(np.sum(word_counts)) * _WORD_BYTES
            + int(np.dot(word_counts, nnz_col)) * _TRIPLET_BYTES)


def build(g: int, rule: EssentialRule, limit: int = DEFAULT_POOL_LIMIT,
          memory_budget: int | None = DEFAULT_MEMORY_BUDGET, with_labels=False):
    """Enumerate, guard memory, and assemble. Returns ``(words, system)``."""
    check_budget(predicted_footprint(count_essential(g, rule), g), memory_budget)
    words = enumerate_essential(g, rule, limit)
    labels = modified_labels(g, with_marker=True) if with_labels else None
    return words, essential_transition_matrix(words, g, rule, labels)
