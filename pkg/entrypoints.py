from typing import Iterable, List, Sequence

import pandas as pd

from Diamond.analysis import analyze, report_row, sweep
from Diamond.channel import ChannelGains
from Diamond.gdof import GdofExponents, gdof_closed_forms, gdof_numeric
from Diamond.settings import (
    CSV_COLUMNS,
    GDOF_P_GRID,
    SWEEP_DEFAULT_WORKERS,
    SWEEP_GAIN_MAX,
    SWEEP_GAIN_MIN,
)
from Diamond.utilities.errors import DiamondError
from Diamond.utilities.logging_config import get_logger

logger = get_logger(__name__)


def analyze_channels(gains_list: Iterable[Sequence[float]]) -> pd.DataFrame:
    """
    Engine entrypoint for notebooks and other callers:
      - No file I/O
      - No printing, just compute and return a DataFrame
    Columns: the sweep CSV schema. Channels that fail to analyze are logged and skipped.
    """
    rows: List[dict] = []
    for gains in gains_list:
        try:
            if not isinstance(gains, ChannelGains):
                gains = ChannelGains(*gains)
            report = analyze(gains)
        except DiamondError as e:
            logger.error(f"Skipping channel {gains}: {e}")
            continue
        rows.append(report_row(report))
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def sweep_frame(count: int, seed: int, gain_min: float = SWEEP_GAIN_MIN, gain_max: float = SWEEP_GAIN_MAX,
                workers: int = SWEEP_DEFAULT_WORKERS) -> pd.DataFrame:
    return sweep(count, seed, gain_min, gain_max, workers).frame


def gdof_frame(alphas: Sequence[float], p_grid: Iterable[float] = GDOF_P_GRID) -> pd.DataFrame:
    """
    Numeric convergence table with the closed-form upper and achievable GDOF attached
    as constant columns.
    """
    exponents = GdofExponents(*alphas)
    closed = gdof_closed_forms(exponents)
    df = gdof_numeric(exponents, p_grid)
    df["gdof_upper"] = closed.upper
    df["gdof_achievable"] = closed.achievable
    return df
