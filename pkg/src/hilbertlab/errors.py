class ConvergenceError(RuntimeError):
    """An iterative method failed to reach its tolerance; carries the best
    estimate so far in .estimate when available."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
