"""Exception types raised across the toolkit."""


class LachesisError(Exception):
    """Base class for all toolkit errors."""


class EmptyInput(LachesisError):
    """An operation received an empty series, group, or value set."""


class InvalidParams(LachesisError):
    """A parameter is outside its documented domain."""


class InvalidRange(LachesisError):
    """A numeric range has lo > hi."""


class InsufficientHistory(LachesisError):
    """Not enough trailing history to run a forecaster.

    Carries the required and available day counts so callers can report
    exactly how short the window is.
    """

    def __init__(self, required_days: int, available_days: int):
        self.required_days = required_days
        self.available_days = available_days
        super().__init__(
            f"need {required_days} days of history, have {available_days}"
        )


class InsufficientData(LachesisError):
    """Too few observations for a statistical characterization."""


class EmptyGroup(LachesisError):
    """A weekday/slot spectrum group has no members."""


class DegenerateInput(LachesisError):
    """Input collapses the computation (e.g. fewer than 2 frequency points)."""


class NoCluster(LachesisError):
    """Density clustering labelled every point as noise."""


class ValidationFailure(LachesisError):
    """Ingestion rejected more rows than the tolerated fraction."""


class NotFound(LachesisError):
    """A referenced artifact (run, node, alert) does not exist."""
