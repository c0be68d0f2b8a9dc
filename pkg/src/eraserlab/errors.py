"""Exception types shared across the package."""


class EraserLabError(Exception):
    """Base class for all eraserlab errors."""


class IllegalBasisError(EraserLabError):
    """A basis was requested on a side where it is not physical."""


class NoConsistentHistoryError(EraserLabError):
    """The consistency filter eliminated every candidate history."""


class DegenerateWindowError(EraserLabError):
    """Visibility window too small to bracket fringe extrema."""


class DegenerateMarginalError(EraserLabError):
    """Correlation undefined: one side of the table is constant."""


class InsufficientDataError(EraserLabError):
    """Goodness-of-fit impossible: pooling left fewer than two cells."""


class UnsupportedModelError(EraserLabError):
    """The requested model does not support this experiment mode."""


class ConfigError(EraserLabError):
    """Run configuration file is malformed or inconsistent."""
