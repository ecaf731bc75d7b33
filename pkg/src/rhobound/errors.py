"""Exception hierarchy.

Each error class carries a distinct ``exit_code`` used by the command line
front end.
"""


class RhoBoundError(Exception):
    exit_code = 1


class ValidationError(RhoBoundError):
    exit_code = 3


class NonPositivePredecessor(ValidationError):
    def __init__(self, column, count):
        self.column = column
        self.count = count
        super().__init__(
            f"type {column} has {count} predecessors (column sum too large)")


class NotIrreducible(ValidationError):
    def __init__(self, component):
        self.component = tuple(component)
        head = ", ".join(map(str, self.component[:10]))
        more = ", ..." if len(self.component) > 10 else ""
        super().__init__(
            f"successor graph is not strongly connected; "
            f"component [{head}{more}] is not the whole alphabet")


class NotAperiodic(ValidationError):
    def __init__(self, period):
        self.period = period
        super().__init__(f"successor graph has period {period}")


class InvalidGenus(RhoBoundError):
    exit_code = 2

    def __init__(self, genus):
        self.genus = genus
        super().__init__(f"genus must be an integer >= 2, got {genus!r}")


class ConfigError(RhoBoundError):
    exit_code = 2


class NoConvergence(RhoBoundError):
    exit_code = 5

    def __init__(self, max_iter, value=None):
        self.max_iter = max_iter
        self.value = value
        super().__init__(f"no convergence after {max_iter} iterations")


class MonotonicityViolation(RhoBoundError):
    """The symmetric power-iteration norm decreased beyond rounding slack."""
    exit_code = 6

    def __init__(self, iteration, previous, current):
        self.iteration = iteration
        super().__init__(
            f"norm decreased at iteration {iteration}: {previous!r} -> {current!r}")


class PoolOverflow(RhoBoundError):
    exit_code = 4

    def __init__(self, limit):
        self.limit = limit
        super().__init__(f"type enumeration exceeded {limit} words")


def _gib(n):
    # counts from runaway enumerations can exceed float range
    return f"{n / 2**30:.2f} GiB" if n < 2**1000 else f"~2^{n.bit_length()} bytes"


class MemoryBudgetExceeded(RhoBoundError):
    exit_code = 4

    def __init__(self, predicted, budget):
        self.predicted = predicted
        self.budget = budget
        super().__init__(
            f"predicted footprint {_gib(predicted)} exceeds budget {_gib(budget)}")


class UnknownWord(RhoBoundError):
    exit_code = 7

    def __init__(self, word):
        self.word = tuple(word)
        super().__init__(f"successor word {self.word} is not an enumerated type")


class StochasticityViolation(RhoBoundError):
    exit_code = 8

    def __init__(self, column, deficit):
        self.column = column
        self.deficit = deficit
        super().__init__(f"column {column} of P+ + P- sums to 1 {deficit:+.3e}")


class RootNotBracketed(RhoBoundError):
    exit_code = 9


class NoPositiveRoot(RhoBoundError):
    exit_code = 9
