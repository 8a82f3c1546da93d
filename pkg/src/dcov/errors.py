"""Semantic exception hierarchy shared across the package."""


class DcovError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DcovError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SampleSizeError(DomainError):
    """The sample is too small for the requested estimator or test."""


class DataError(DcovError, ValueError):
    """Input data is malformed (non-finite values, bad CSV cells, ...)."""
