"""Exception hierarchy shared by every stage of the pipeline.

Contract and configuration problems derive from :class:`ValueError`; problems
locating files derive from :class:`OSError` so callers (and the CLI) can map
them to distinct exit codes.
"""


class ContractError(ValueError):
    """An argument violates an operation's precondition."""


class ConfigurationError(ContractError):
    """Inconsistent run configuration, e.g. overlapping sample index sets."""


class PgmFormatError(ValueError):
    """Malformed PGM magic number or header."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class TruncationError(PgmFormatError):
    """PGM pixel payload shorter than the header promises."""

    def __init__(self, expected, actual, offset):
        ValueError.__init__(
            self, f"truncated pixel payload: expected {expected} samples, got {actual}"
        )
        self.offset = offset
        self.expected = expected
        self.actual = actual


class ListingError(FileNotFoundError):
    """A directory or image required by the dataset layout is missing."""

    def __init__(self, path):
        super().__init__(f"missing dataset entry: {path}")
        self.path = path


class DimensionMismatchError(ContractError):
    """Images in one dataset do not share the same width and height."""


class ReducedRankError(ContractError):
    """More eigenfaces requested than the training data can support."""

    def __init__(self, requested, rank):
        super().__init__(
            f"requested {requested} eigenfaces but the training data has usable rank {rank}"
        )
        self.requested = requested
        self.rank = rank


class DivergenceError(ArithmeticError):
    """Training produced a non-finite objective."""

    def __init__(self, epoch):
        super().__init__(f"training diverged: non-finite objective at epoch {epoch}")
        self.epoch = epoch
