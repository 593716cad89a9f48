"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap.

    The last iterate is kept on ``last_iterate`` so callers can inspect or
    reuse it.
    """

    def __init__(self, message, last_iterate=None, estimate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.estimate = estimate


class OverSelectionError(RuntimeError):
    """Thresholding kept more indices than there are measurements."""

    def __init__(self, message, selected=None):
        super().__init__(message)
        self.selected = selected
