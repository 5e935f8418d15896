"""Exception types shared across the package."""


class NumericError(RuntimeError):
    """A numerical routine failed (bracket failure, divergence, ...)."""


class SamplerStallError(NumericError):
    """Rejection loop exceeded its iteration cap; carries the loop stats."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class InvalidPosteriorError(ValueError):
    """Posterior hyperparameters outside the normalizable region."""
