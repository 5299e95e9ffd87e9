"""Exception and warning types raised across the package."""

from __future__ import annotations


class OneBitError(Exception):
    """Base class for all package errors."""


class DomainError(OneBitError, ValueError):
    """An argument lies outside the domain of a function."""


class ConfigError(OneBitError, ValueError):
    """A protocol or experiment configuration is invalid."""


class BracketError(OneBitError, RuntimeError):
    """A search bracket could not be established."""


class ConvergenceError(OneBitError, RuntimeError):
    """A numerical routine did not converge, or two routes disagree."""


class BoundViolation(OneBitError, AssertionError):
    """A numerically checked inequality does not hold.

    Attributes
    ----------
    theta, epsilon, ratio : float
        Offending threshold, perturbation size and observed ratio.
    """

    def __init__(self, message: str, *, theta: float, epsilon: float, ratio: float):
        super().__init__(message)
        self.theta = theta
        self.epsilon = epsilon
        self.ratio = ratio


class DegenerateQuantiles(OneBitError, ArithmeticError):
    """The two empirical quantiles coincide or give a non-positive scale."""


class SimulationError(OneBitError, RuntimeError):
    """A Monte Carlo experiment exceeded its failure budget."""


class IoError(OneBitError, OSError):
    """Reading or writing a report file failed."""


class SchemaError(OneBitError, ValueError):
    """A serialized report has an unexpected schema version or layout."""


class DivergenceWarning(RuntimeWarning):
    """An asymptotic formula is evaluated where the density is ~0."""
