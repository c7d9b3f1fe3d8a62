"""Exception hierarchy.

Every error raised by the library derives from :class:`FboscError`.  The
class names double as stable error codes (the CLI prints them verbatim).
"""

from __future__ import annotations


class FboscError(Exception):
    """Base class for all library errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# -- configuration -----------------------------------------------------------

class ConfigIssue(FboscError, ValueError):
    """A single violated configuration invariant."""


class EtaOutOfRange(ConfigIssue):
    pass


class NonPositiveTau(ConfigIssue):
    pass


class NegativeFlux(ConfigIssue):
    pass


class NonPositiveParameter(ConfigIssue):
    pass


class GainBelowLoss(ConfigIssue):
    pass


class GainBelowUnity(ConfigIssue):
    pass


class SqueezeExceedsRmax(ConfigIssue):
    pass


class NegativeSqueeze(ConfigIssue):
    pass


class NonzeroSqueezeAngle(ConfigIssue):
    pass


class NonFiniteParameter(ConfigIssue):
    pass


class UnknownKey(ConfigIssue):
    pass


class InvalidConfig(FboscError, ValueError):
    """Raised by ``validate_config``; ``errors`` lists every violated invariant."""

    def __init__(self, errors):
        self.errors = list(errors)
        msg = "; ".join(f"{e.code}: {e}" for e in self.errors)
        super().__init__(msg or "invalid configuration")


# -- numerics ----------------------------------------------------------------

class WrongVariant(FboscError, TypeError):
    pass


class NoPositiveRoot(FboscError, ValueError):
    pass


class ToleranceNotMet(FboscError, RuntimeError):
    pass


class PoleFrequency(FboscError, ValueError):
    pass


class NonAmplifier(FboscError, ValueError):
    pass


class NotSymmetric(FboscError, ValueError):
    pass


class ZeroCarrier(FboscError, ValueError):
    pass


# -- simulation / estimation -------------------------------------------------

class NotConverged(FboscError, RuntimeError):
    pass


class UnstableLoop(FboscError, RuntimeError):
    pass


class TooShort(FboscError, ValueError):
    pass


class FitDiverged(FboscError, RuntimeError):
    pass


class FlatSpectrum(FboscError, ValueError):
    pass
