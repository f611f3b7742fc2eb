"""
Exception hierarchy shared by the library, the sweep harness and the CLI.

The CLI maps ChannelDomainError / StructuralError raised from user input to exit
code 2 and CertificateFailure to exit code 1.
"""


class DiamondError(Exception):
    """Base class for every error raised by the package."""


class ChannelDomainError(DiamondError, ValueError):
    "Raised for negative or non-finite gains, exponents, or overflow-range SNR values."


class PreconditionError(DiamondError):
    "Raised when a scheme or bound is evaluated outside the region it is defined on."


class StructuralError(DiamondError, ValueError):
    "Raised for malformed programs, exceeded size caps, or a region that does not match its channel."


class SolverFailure(DiamondError, RuntimeError):
    "Raised when the simplex hits its iteration cap or returns a point that fails the feasibility re-check."


class CertificateFailure(DiamondError):
    "Raised when a dual certificate is rejected and the caller requires a valid one."

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)
