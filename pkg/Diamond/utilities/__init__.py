"""
Utilities Package for the diamond relay toolkit

Cross-cutting helpers: logging configuration and the exception hierarchy.
"""

from .errors import (
    CertificateFailure, ChannelDomainError, DiamondError, PreconditionError,
    SolverFailure, StructuralError
)
from .logging_config import (
    get_logger, log_certificate_issue, log_debug, log_rate, log_stage_complete,
    log_stage_start, setup_logging
)


__all__ = [
    # Errors
    "DiamondError",
    "ChannelDomainError",
    "PreconditionError",
    "StructuralError",
    "SolverFailure",
    "CertificateFailure",

    # Logging
    "setup_logging",
    "get_logger",
    "log_stage_start",
    "log_stage_complete",
    "log_rate",
    "log_certificate_issue",
    "log_debug",
]
