"""Cannon types for the genus-g surface group (degree 4g).

Index conventions. Canonical alphabet: index ``i - 1`` is type ``i`` for
``i = 1..2g``. Modified alphabet: the same, plus index ``2g`` for type 1',
index ``2g + 1`` for type 2', and the ambiguity marker ``*`` at index
``2g + 2``. The marker never labels a column of the modified matrix; it only
appears inside essential words.
"""

import numpy as np

from .errors import InvalidGenus
from .typesystem import TypeSystem


def _check_genus(g):
    if isinstance(g, bool) or not isinstance(g, (int, np.integer)) or g < 2:
        raise InvalidGenus(g)
    return int(g)


def canonical_labels(g):
    return [str(i) for i in range(1, 2 * g + 1)]


def modified_labels(g, with_marker=False):
    labels = canonical_labels(g) + ["1'", "2'"]
    if with_marker:
        labels.append("*")
    return labels


def top_index(g):
    """Index of type 2g, the only type with two predecessors."""
    return 2 * g - 1


def one_prime(g):
    return 2 * g


def two_prime(g):
    return 2 * g + 1


def marker(g):
    return 2 * g + 2


def cannon_dense(g):
    g = _check_genus(g)
    n = 2 * g
    m = np.zeros((n, n), dtype=np.int64)
    for j in range(n - 1):
        m[0, j] = 4 * g - 3
        m[1, j] += 1
        m[j + 1, j] += 1
    m[0, n - 1] = 4 * g - 4
    m[1, n - 1] = 2
    return m


def cannon_matrix(g) -> TypeSystem:
    """Canonical Cannon type system: 2g types, degree 4g."""
    return TypeSystem.from_dense(cannon_dense(g), 4 * g, canonical_labels(g))


def modified_dense(g):
    g = _check_genus(g)
    n = 2 * g + 2
    m = np.zeros((n, n), dtype=np.int64)
    for j in range(2 * g - 2):
        m[0, j] = 4 * g - 3
        m[1, j] = 1
        m[j + 1, j] += 1
    # type 2g-1: successors 1', 2g, 2 and 4g-4 of type 1
    j = 2 * g - 2
    m[0, j] = 4 * g - 4
    m[one_prime(g), j] = 1
    m[1, j] = 1
    m[top_index(g), j] = 1
    # type 2g
    m[0, top_index(g)] = 4 * g - 4
    m[1, top_index(g)] = 2
    # type 1': successors 2, 2' and 4g-3 of type 1
    m[0, one_prime(g)] = 4 * g - 3
    m[1, one_prime(g)] = 1
    m[two_prime(g), one_prime(g)] = 1
    # type 2': successors 2, 3 and 4g-3 of type 1
    m[0, two_prime(g)] = 4 * g - 3
    m[1, two_prime(g)] = 1
    m[2, two_prime(g)] = 1
    return m


def modified_cannon_matrix(g) -> TypeSystem:
    """Modified Cannon type system: 2g+2 types (adds 1' and 2'), degree 4g."""
    return TypeSystem.from_dense(modified_dense(g), 4 * g, modified_labels(g))
