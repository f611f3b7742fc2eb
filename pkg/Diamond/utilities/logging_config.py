"""
Logging Configuration Module

Result-focused logging for channel analysis runs:
- INFO level: per-command summaries (regions, gaps, sweep totals, certificate verdicts)
- DEBUG level: concise solver and sampling operations
- A separate summary file keeps only the analysis results for export
"""

import logging
import logging.handlers
import os
import sys
from typing import Any, Optional, Sequence

from ..settings import LOG_FILE, LOG_LEVEL, LOG_TO_CONSOLE

SUMMARY_KEYWORDS = ("region", "gap", "certificate", "sweep", "violation", "complete")


class ChannelContextFilter(logging.Filter):
    """Filter to add channel and stage context to log records"""

    STAGES = (
        ("avgpower", "AVGPOWER"),
        ("channel", "CHANNEL"),
        ("schemes", "SCHEMES"),
        ("bounds", "BOUNDS"),
        ("analysis", "ANALYSIS"),
        ("gdof", "GDOF"),
        ("main", "CLI"),
        (".lp", "LP"),
    )

    def filter(self, record):
        if not hasattr(record, "channel"):
            record.channel = "-"
        if not hasattr(record, "stage"):
            record.stage = self._determine_stage(record.name)
        return True

    def _determine_stage(self, logger_name: str) -> str:
        name = logger_name.lower()
        for needle, stage in self.STAGES:
            if needle in name:
                return stage
        return "SYSTEM"


class SummaryOnlyFilter(logging.Filter):
    """Only INFO+ records that report an analysis result"""

    def filter(self, record):
        if record.levelno < logging.INFO:
            return False
        message = record.getMessage().lower()
        return any(keyword in message for keyword in SUMMARY_KEYWORDS)


def format_channel(gains: Optional[Sequence[float]]) -> str:
    """Compact tag for a gain tuple, used as the record's channel field."""
    if gains is None:
        return "-"
    return "(" + ",".join(f"{g:.6g}" for g in gains) + ")"


class DiamondLoggerAdapter(logging.LoggerAdapter):
    """
    Logger adapter with verbs for analysis stages
    """

    def __init__(self, logger, extra=None):
        super().__init__(logger, extra or {})

    def process(self, msg, kwargs):
        extra = kwargs.get("extra", {})
        if self.extra:
            extra.update(self.extra)
        kwargs["extra"] = extra
        return msg, kwargs

    def stage_start(self, label: str, stage: str):
        self.info(f"[{label}] Starting {stage}")

    def stage_complete(self, label: str, stage: str, violations: int, evaluated: int):
        share = (violations / evaluated * 100) if evaluated > 0 else 0
        self.info(f"[{label}] {stage} complete: {evaluated} evaluated, "
                  f"{violations} violation(s) ({share:.2f}%)")

    def rate_result(self, label: str, quantity: str, value: float, reference: Optional[float] = None,
                    detail: str = ""):
        msg = f"[{label}] {quantity}: {value:.6f}"
        if reference is not None:
            msg += f" (reference {reference:.6f})"
        if detail:
            msg += f" - {detail}"
        self.info(msg)

    def certificate_issue(self, label: str, issue: str, impact: str = ""):
        msg = f"[{label}] Certificate issue: {issue}"
        if impact:
            msg += f" - {impact}"
        self.warning(msg)

    def debug_system(self, message: str):
        self.debug(message)


def setup_logging(level: str = None, log_file: str = None, console_output: bool = None) -> None:
    """
    Configure the root logger once per process.

    log_file=None falls back to settings.LOG_FILE; an empty string disables file logging.
    """
    level = level or LOG_LEVEL
    log_file = LOG_FILE if log_file is None else log_file
    console_output = console_output if console_output is not None else LOG_TO_CONSOLE

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.setLevel(getattr(logging, level.upper()))

    context_filter = ChannelContextFilter()

    # stderr keeps stdout free for --json and CSV output
    if console_output:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, level.upper()))
        console_handler.setFormatter(logging.Formatter("%(asctime)s - %(message)s", datefmt="%H:%M:%S"))
        console_handler.addFilter(context_filter)
        root_logger.addHandler(console_handler)

    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)

        file_handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
        )
        file_handler.setLevel(getattr(logging, level.upper()))
        file_handler.setFormatter(logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(stage)s - %(channel)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        ))
        file_handler.addFilter(context_filter)
        root_logger.addHandler(file_handler)

        summary_file = log_file[:-4] + "_summary.log" if log_file.endswith(".log") else log_file + ".summary"
        summary_handler = logging.handlers.RotatingFileHandler(
            summary_file,
            maxBytes=5 * 1024 * 1024,  # 5MB
            backupCount=3,
        )
        summary_handler.setLevel(logging.INFO)
        summary_handler.setFormatter(logging.Formatter("%(asctime)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S"))
        summary_handler.addFilter(SummaryOnlyFilter())
        root_logger.addHandler(summary_handler)



def get_logger(name: str, channel: Optional[Sequence[float]] = None) -> DiamondLoggerAdapter:
    """
    Get a configured logger

    Args:
        name: Logger name (usually module name)
        channel: Optional gain tuple stamped on every record

    Returns:
        DiamondLoggerAdapter
    """
    extra = {}
    if channel is not None:
        extra["channel"] = format_channel(channel)
    return DiamondLoggerAdapter(logging.getLogger(name), extra)


def get_analysis_logger() -> DiamondLoggerAdapter:
    return get_logger("diamond_analysis")


def log_stage_start(label: str, stage: str):
    get_analysis_logger().stage_start(label, stage)


def log_stage_complete(label: str, stage: str, violations: int, evaluated: int):
    get_analysis_logger().stage_complete(label, stage, violations, evaluated)


def log_rate(label: str, quantity: str, value: float, reference: Optional[float] = None, detail: str = ""):
    get_analysis_logger().rate_result(label, quantity, value, reference, detail)


def log_certificate_issue(label: str, issue: str, impact: str = ""):
    get_analysis_logger().certificate_issue(label, issue, impact)


def log_debug(message: str, **context: Any):
    logger = get_logger(__name__)
    if context:
        message = message + " " + " ".join(f"{k}={v}" for k, v in context.items())
    logger.debug_system(message)
