"""Exception types shared across the package."""


class NumericalFailure(RuntimeError):
    """A numerical routine produced an unusable result.

    Raised when a factorization breaks down, an objective value turns
    non-finite, or an input violates a positivity contract in a way that
    only shows up at run time.
    """


class RankDeficientError(NumericalFailure):
    """A basis lost (numerical) full column rank.

    Parameters
    ----------
    message : str
        Human-readable description.
    deficient : int
        Number of symplectic directions found to be numerically
        rank-deficient.
    """

    def __init__(self, message, deficient=0):
        super().__init__(message)
        self.deficient = deficient
