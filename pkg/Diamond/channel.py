"""
Channel Module

Turns the four link gains of a half-duplex diamond channel into every capacity and
sign parameter the schemes, bounds and region classifier read.

All capacities are in bits per channel use: C(P) = 1/2 log2(1 + P), unit transmit
powers and unit noise variance (non-unit constant powers are folded into the gains).
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from Diamond.settings import GUARD_DENOMINATOR, SIGN_TOL
from Diamond.utilities.errors import ChannelDomainError
from Diamond.utilities.logging_config import get_logger

logger = get_logger(__name__)

_LN2 = math.log(2.0)


class Sign(str, Enum):
    NEG = "NEG"
    ZERO = "ZERO"
    POS = "POS"

    @property
    def nonpositive(self) -> bool:
        return self is not Sign.POS

    @property
    def nonnegative(self) -> bool:
        return self is not Sign.NEG


def _check_gain(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ChannelDomainError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise ChannelDomainError(f"{name} must be finite, got {value}")
    if value < 0:
        raise ChannelDomainError(f"{name} must be >= 0, got {value}")
    return value


def capacity_of(gain: float) -> float:
    """
    Gaussian point-to-point capacity **C(P) = 1/2 log2(1 + P)** in bits.

    Raises ChannelDomainError for negative or non-finite gains.
    """
    gain = _check_gain("gain", gain)
    return 0.5 * math.log1p(gain) / _LN2


def capacity_array(gains) -> np.ndarray:
    """Vectorized C(P) for grids; callers guarantee nonnegative input."""
    return 0.5 * np.log1p(np.asarray(gains, dtype=float)) / _LN2


def gain_for_capacity(capacity: float) -> float:
    """Inverse of capacity_of: the gain whose capacity is `capacity` bits."""
    capacity = float(capacity)
    if not math.isfinite(capacity) or capacity < 0:
        raise ChannelDomainError(f"capacity must be finite and >= 0, got {capacity}")
    try:
        return math.expm1(2.0 * capacity * _LN2)
    except OverflowError:
        raise ChannelDomainError(f"capacity {capacity} bits overflows the gain range")


def guarded_ratio(numerator: float, denominator: float) -> float:
    """numerator / denominator, or 0 when the denominator belongs to a dead branch."""
    if abs(denominator) < GUARD_DENOMINATOR:
        return 0.0
    return numerator / denominator


@dataclass(frozen=True)
class ChannelGains:
    """Linear power gains of the source-relay and relay-destination links."""

    g01: float
    g02: float
    g13: float
    g23: float

    def __post_init__(self):
        for name in ("g01", "g02", "g13", "g23"):
            object.__setattr__(self, name, _check_gain(name, getattr(self, name)))

    @classmethod
    def from_db(cls, g01_db: float, g02_db: float, g13_db: float, g23_db: float) -> "ChannelGains":
        """Power gains given in dB: g = 10^(dB/10)."""
        values = []
        for name, db in (("g01", g01_db), ("g02", g02_db), ("g13", g13_db), ("g23", g23_db)):
            db = float(db)
            if not math.isfinite(db):
                raise ChannelDomainError(f"{name} in dB must be finite, got {db}")
            try:
                values.append(10.0 ** (db / 10.0))
            except OverflowError:
                raise ChannelDomainError(f"{name} = {db} dB overflows a double")
        return cls(*values)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.g01, self.g02, self.g13, self.g23)

    def swapped(self) -> "ChannelGains":
        """Exchange the roles of relay 1 and relay 2."""
        return ChannelGains(self.g02, self.g01, self.g23, self.g13)


@dataclass(frozen=True)
class LinkCapacities:
    C01: float
    C02: float
    C13: float
    C23: float
    C012: float
    C123: float
    CMAC: float
    Delta: float
    Gamma: float
    GammaPrime: float
    delta: float
    zeta1: float
    zeta2: float

    def swapped(self) -> "LinkCapacities":
        """
        Relay-swapped view. Delta, C012, C123, CMAC and delta are unchanged,
        Gamma and Gamma' flip sign, zeta1 and zeta2 trade places.
        """
        return LinkCapacities(
            C01=self.C02, C02=self.C01, C13=self.C23, C23=self.C13,
            C012=self.C012, C123=self.C123, CMAC=self.CMAC,
            Delta=self.Delta, Gamma=-self.Gamma, GammaPrime=-self.GammaPrime,
            delta=self.delta, zeta1=self.zeta2, zeta2=self.zeta1,
        )

    def as_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def derive(gains: ChannelGains) -> LinkCapacities:
    """Every derived capacity and channel parameter for one gain tuple."""
    g01, g02, g13, g23 = gains.as_tuple()

    C01, C02 = capacity_of(g01), capacity_of(g02)
    C13, C23 = capacity_of(g13), capacity_of(g23)

    coherent = (math.sqrt(g13) + math.sqrt(g23)) ** 2
    if not math.isfinite(coherent) or not math.isfinite(g01 + g02):
        raise ChannelDomainError(f"gains {gains.as_tuple()} overflow the capacity range")

    C012 = capacity_of(g01 + g02)
    C123 = capacity_of(coherent)
    CMAC = capacity_of(g13 + g23)

    caps = LinkCapacities(
        C01=C01, C02=C02, C13=C13, C23=C23,
        C012=C012, C123=C123, CMAC=CMAC,
        Delta=C01 * C02 - C13 * C23,
        Gamma=C23 * (C012 - C02) - C13 * (C012 - C01),
        GammaPrime=C02 * (C123 - C23) - C01 * (C123 - C13),
        delta=max(C123 - C13 - C23, 0.0),
        zeta1=capacity_of(g01 / (g01 + 1.0)),
        zeta2=capacity_of(g02 / (g02 + 1.0)),
    )
    logger.debug(f"Derived capacities for {gains.as_tuple()}: Delta={caps.Delta:.6g} delta={caps.delta:.6g}")
    return caps


def classify_sign(value: float, scale: float, tol: float) -> Sign:
    """ZERO inside the band |value| <= tol * scale."""
    if abs(value) <= tol * scale:
        return Sign.ZERO
    return Sign.POS if value > 0 else Sign.NEG


def classify_delta(caps: LinkCapacities, tol: float = SIGN_TOL) -> Sign:
    if tol <= 0:
        raise ChannelDomainError(f"tolerance must be positive, got {tol}")
    scale = max(1.0, caps.C01 * caps.C02, caps.C13 * caps.C23)
    return classify_sign(caps.Delta, scale, tol)


def classify_gamma(caps: LinkCapacities, tol: float = SIGN_TOL) -> Sign:
    if tol <= 0:
        raise ChannelDomainError(f"tolerance must be positive, got {tol}")
    scale = max(1.0, abs(caps.C23 * (caps.C012 - caps.C02)), abs(caps.C13 * (caps.C012 - caps.C01)))
    return classify_sign(caps.Gamma, scale, tol)


def classify_gamma_prime(caps: LinkCapacities, tol: float = SIGN_TOL) -> Sign:
    if tol <= 0:
        raise ChannelDomainError(f"tolerance must be positive, got {tol}")
    scale = max(1.0, abs(caps.C02 * (caps.C123 - caps.C23)), abs(caps.C01 * (caps.C123 - caps.C13)))
    return classify_sign(caps.GammaPrime, scale, tol)


def cut_matrix(caps: LinkCapacities) -> np.ndarray:
    """
    Capacity of cut j (columns) in mode i (rows).

    Modes: broadcast, forward I (relay 1 listens, relay 2 talks), forward II, multiple access.
    Cuts: {S}, {S, R2}, {S, R1}, {S, R1, R2}. The matrix is symmetric.
    """
    C01, C02, C13, C23 = caps.C01, caps.C02, caps.C13, caps.C23
    return np.array([
        [caps.C012, C01, C02, 0.0],
        [C01, C01 + C23, 0.0, C23],
        [C02, 0.0, C02 + C13, C13],
        [0.0, C23, C13, caps.C123],
    ])


def capacity_margins(caps: LinkCapacities) -> Dict[str, float]:
    """
    Margins (>= 0 passes) of the orderings every LinkCapacities must satisfy.
    """
    return {
        "C012 >= C01": caps.C012 - caps.C01,
        "C012 >= C02": caps.C012 - caps.C02,
        "C123 >= C13": caps.C123 - caps.C13,
        "C123 >= C23": caps.C123 - caps.C23,
        "C123 >= CMAC": caps.C123 - caps.CMAC,
        "CMAC >= max(C13, C23)": caps.CMAC - max(caps.C13, caps.C23),
        "delta >= 0": caps.delta,
        "zeta1 >= 0": caps.zeta1,
        "zeta2 >= 0": caps.zeta2,
    }
