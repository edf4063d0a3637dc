"""Exceptions raised by LocalMix."""
from __future__ import annotations


class LocalMixError(Exception):
    """Base exception for LocalMix errors."""

    exit_code = 5


class ConfigError(LocalMixError, ValueError):
    """A configuration or input document failed validation."""

    exit_code = 2


class InvalidPoint(ConfigError):
    """A point is not in the upper half-plane."""


class InvalidPresentation(ConfigError):
    """A group presentation failed its load-time checks."""


class NotSurjective(ConfigError):
    """The cover homomorphism does not map onto Z^d."""


class InvalidGram(ConfigError):
    """The h-norm Gram matrix is not symmetric positive-definite."""


class InvalidShift(ConfigError):
    """A Markov shift specification is malformed."""


class UnboundedWindow(ConfigError):
    """A window function lacks compact support."""


class ZeroMass(ConfigError):
    """A flow box has no Haar mass."""


class BoxOutsideDomain(ConfigError):
    """A flow box leaves the fundamental polygon."""


class InsufficientData(ConfigError):
    """Too few usable points for a fit."""


class GramMissing(LocalMixError):
    """An exact constant was requested but h > 0 and no Gram matrix is given."""

    exit_code = 3


class BudgetExceeded(LocalMixError):
    """An enumeration passed its configured node cap."""

    exit_code = 4


class NotHyperbolic(LocalMixError, ValueError):
    """The element has |trace| <= 2."""


class CuspEscape(LocalMixError):
    """A point went numerically into a cusp during reduction."""


class NotMixing(LocalMixError):
    """The transition matrix is not primitive."""


class NonPositiveRoof(LocalMixError):
    """No block length K gives a positive lower bound for r_K."""


class PeriodicCocycle(LocalMixError):
    """The displacement cocycle is periodic, so no local limit exists."""
