"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class LieParamError(Exception):
    """Base class for all package errors."""


class InputError(LieParamError):
    """Malformed or inconsistent user input (maps to CLI exit code 1)."""


class ParseError(InputError):
    pass


class AlphabetMismatch(InputError):
    pass


class DegreeError(InputError):
    pass


class ConstantTermError(InputError):
    pass


class NotMaurerCartan(InputError):
    pass


class DimensionUnsupported(InputError):
    pass


class PresentationError(InputError):
    pass


class BaseMismatch(InputError):
    pass


class NotConnected(InputError):
    pass


class NotFree(InputError):
    pass


class CertificateFailure(LieParamError):
    """An identity that must hold exactly at the cap did not (CLI exit code 2)."""


class SolveFailure(CertificateFailure):
    pass
