"""Exception hierarchy. Every error raised by the library derives from NoetherError."""


class NoetherError(ValueError):
    pass


class DimensionMismatch(NoetherError):
    pass


class NotHermitian(NoetherError):
    pass


class NegativeTime(NoetherError):
    pass


class NegativeOffDiagonal(NoetherError):
    """A classical generator has a negative rate M[x, y] with x != y."""

    def __init__(self, x, y, value):
        self.x, self.y, self.value = x, y, value
        # 1-based indices in the message, matching state labels 1..d
        super().__init__(f"negative off-diagonal rate M[{x + 1},{y + 1}] = {value:.3g}")


class ColumnSumNonzero(NoetherError):
    def __init__(self, y, value):
        self.y, self.value = y, value
        super().__init__(f"column {y + 1} of the generator sums to {value:.3g}, expected 0")


class NotCompletelyPositive(NoetherError):
    pass


class NotTracePreserving(NoetherError):
    pass


class NonSemisimpleZeroEigenvalue(NoetherError):
    pass


class PostulateFailed(NoetherError):
    """No strictly positive stationary density matrix exists."""


class NotFaithful(NoetherError):
    pass


class InvalidBlocks(NoetherError):
    pass
