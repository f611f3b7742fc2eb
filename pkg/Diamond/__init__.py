"""Half-duplex Gaussian diamond relay channel: rates, bounds and gap guarantees."""

from .analysis import RateReport, analyze, classify_region, run_verification, sweep
from .channel import ChannelGains, LinkCapacities, capacity_of, derive

__all__ = [
    "ChannelGains",
    "LinkCapacities",
    "capacity_of",
    "derive",
    "classify_region",
    "analyze",
    "RateReport",
    "sweep",
    "run_verification",
]
