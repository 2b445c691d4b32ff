"""Exception hierarchy shared across the package."""


class CascadecError(Exception):
    """Base class for all library errors."""


class DegenerateChainError(CascadecError):
    """A chain with zero edges was passed to a kernel that needs at least one."""


class EmptyMaxMarginalError(CascadecError):
    """Some edge has no feasible transition, so its max-marginal set is empty."""


class InfeasibleChainError(CascadecError):
    """No feasible path exists through the chain."""


class LatticeDisconnectedError(CascadecError):
    """Pruned span sets at adjacent positions share no compatible transition."""


class UnterminatedHypothesisError(CascadecError):
    """A decoded path contains no end-of-sentence token."""


class PotentialFileError(CascadecError):
    """Malformed potential file.  Carries the 1-based offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ProtocolError(CascadecError):
    """The remote scorer violated the stream protocol."""
