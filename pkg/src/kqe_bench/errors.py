class KqeError(Exception):
    """Base class for every error raised by kqe_bench."""


class ArgumentError(KqeError, ValueError):
    """An argument is outside the domain of the operation."""


class DimensionMismatchError(ArgumentError):
    """Two inputs disagree on sample count or column dimension."""


class DegenerateDataError(KqeError, ValueError):
    """The data cannot support the requested quantity (e.g. all points identical)."""


class UnsupportedConfigurationError(KqeError, ValueError):
    """The configuration is valid on its own but not for this statistic."""


class DatasetError(KqeError, ValueError):
    """A dataset file could not be parsed."""


class TrialError(KqeError):
    """A trial of a rejection-rate experiment failed."""

    def __init__(self, trial: int, cause: Exception):
        super().__init__(f"trial {trial} failed: {cause}")
        self.trial = trial
        self.cause = cause


class UnreliableThresholdWarning(UserWarning):
    """Too few permutations for a stable rejection threshold."""
