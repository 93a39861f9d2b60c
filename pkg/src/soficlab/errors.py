class ResourceLimitError(RuntimeError):
    """A configured size cap was exceeded."""

    def __init__(self, message: str, cap: int | None = None):
        super().__init__(message)
        self.cap = cap


class ConvergenceError(RuntimeError):
    """Iterative eigensolver stopped at its iteration cap.

    ``bound`` is the best Rayleigh-quotient estimate seen, an upper bound for
    the eigenvalue that was sought.
    """

    def __init__(self, message: str, bound: float | None = None):
        super().__init__(message)
        self.bound = bound
