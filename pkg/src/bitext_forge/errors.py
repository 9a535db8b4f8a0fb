"""Exception hierarchy shared by every module of the toolkit."""

from __future__ import annotations


class BitextForgeError(Exception):
    """Base class for all toolkit errors."""


class UnknownLanguage(BitextForgeError, ValueError):
    pass


class SameLanguage(BitextForgeError, ValueError):
    pass


class EmptyText(BitextForgeError, ValueError):
    pass


class DegenerateLength(BitextForgeError, ValueError):
    pass


class ConfigError(BitextForgeError, ValueError):
    pass


class EmptyCorpus(BitextForgeError, ValueError):
    pass


class InvalidSmoothing(BitextForgeError, ValueError):
    pass


class FormatError(BitextForgeError, ValueError):
    pass


class TargetTooSmall(BitextForgeError, ValueError):
    pass


class EmptyEvalSet(BitextForgeError, ValueError):
    pass


class BackendUnavailable(BitextForgeError, RuntimeError):
    pass


class UnsupportedTarget(BitextForgeError, ValueError):
    pass


class LengthMismatch(BitextForgeError, RuntimeError):
    """A translation backend returned a different number of outputs than inputs."""


class EmptyReference(BitextForgeError, ValueError):
    pass


class EmptyReferenceSet(BitextForgeError, ValueError):
    pass


class LineCountMismatch(BitextForgeError, ValueError):
    pass


class EmptyInput(BitextForgeError, ValueError):
    pass
