"""
GDOF Module

High-SNR behaviour of the diamond channel. With g_ij growing like P^a_ij every capacity is
linear in log P, so each rate and bound has a generalized degrees of freedom (GDOF) value.

- gdof_closed_forms(): the exact GDOF expressions of every bound and scheme
- gdof_numeric(): R / (1/2 log2 P) along a P grid, for checking convergence
- multiplexing_gain(): the same ratio for MDF when gains follow a single SNR
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Sequence

import numpy as np
import pandas as pd

from Diamond.analysis import analyze
from Diamond.channel import ChannelGains, LinkCapacities, Sign, classify_sign, derive, guarded_ratio
from Diamond.schemes import mdf
from Diamond.settings import GDOF_MIN_P, GDOF_P_GRID, SIGN_TOL
from Diamond.utilities.errors import ChannelDomainError, StructuralError
from Diamond.utilities.logging_config import get_logger, log_rate, log_stage_complete, log_stage_start

logger = get_logger(__name__)


@dataclass(frozen=True)
class GdofExponents:
    a01: float
    a02: float
    a13: float
    a23: float

    def __post_init__(self):
        for name in ("a01", "a02", "a13", "a23"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ChannelDomainError(f"exponent {name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, value)

    def as_tuple(self):
        return (self.a01, self.a02, self.a13, self.a23)

    @property
    def delta_coefficient(self) -> float:
        return self.a01 * self.a02 - self.a13 * self.a23

    @property
    def gamma_coefficient(self) -> float:
        top = max(self.a01, self.a02)
        return self.a23 * (top - self.a02) - self.a13 * (top - self.a01)

    @property
    def gamma_prime_coefficient(self) -> float:
        top = max(self.a13, self.a23)
        return self.a02 * (top - self.a23) - self.a01 * (top - self.a13)

    @property
    def sigma_degenerate(self) -> bool:
        """True when the (log P)^2 coefficient deciding the bound vanishes."""
        scale = max(1.0, max(self.as_tuple()) ** 2)
        if self.delta_coefficient <= SIGN_TOL * scale:
            return classify_sign(self.gamma_coefficient, scale, SIGN_TOL) is Sign.ZERO
        return classify_sign(self.gamma_prime_coefficient, scale, SIGN_TOL) is Sign.ZERO


def asymptotic_capacities(alphas: GdofExponents) -> LinkCapacities:
    """Capacities divided by 1/2 log P in the limit; delta and zeta vanish."""
    a01, a02, a13, a23 = alphas.as_tuple()
    first, second = max(a01, a02), max(a13, a23)
    return LinkCapacities(
        C01=a01, C02=a02, C13=a13, C23=a23,
        C012=first, C123=second, CMAC=second,
        Delta=alphas.delta_coefficient,
        Gamma=alphas.gamma_coefficient,
        GammaPrime=alphas.gamma_prime_coefficient,
        delta=0.0, zeta1=0.0, zeta2=0.0,
    )


@dataclass(frozen=True)
class GdofReport:
    alphas: GdofExponents
    values: Dict[str, float]
    upper_key: str
    achievable_key: str
    mdf: float
    mdf_optimal: bool

    @property
    def upper(self) -> float:
        return self.values[self.upper_key]

    @property
    def achievable(self) -> float:
        return self.mdf if self.mdf_optimal else self.values[self.achievable_key]

    def as_dict(self) -> Dict[str, object]:
        return {
            "alphas": dict(zip(("a01", "a02", "a13", "a23"), self.alphas.as_tuple())),
            "values": dict(self.values),
            "upper_key": self.upper_key,
            "achievable_key": self.achievable_key,
            "upper": self.upper,
            "achievable": self.achievable,
            "mdf": self.mdf,
            "mdf_optimal": self.mdf_optimal,
        }


def gdof_closed_forms(alphas: GdofExponents) -> GdofReport:
    """
    Every bound and scheme GDOF, plus the applicable (bound, enhanced scheme) pair.

    The pair follows the exponent orderings: with a01 a02 <= a13 a23 the bound is up1 when
    a01 <= a02 and up2 otherwise; with a01 a02 > a13 a23 it is up3 when a13 <= a23 and up4
    otherwise. When the deciding coefficient vanishes MDF is already GDOF-optimal and the
    report says so.
    """
    a01, a02, a13, a23 = alphas.as_tuple()
    D = alphas.delta_coefficient
    r = guarded_ratio

    values = {
        "up1": r(a13 * (a01 + a23), a01 + a13) + r(a23 * D, (a01 + a13) * (a02 - a01 + a23)),
        "up2": r(a23 * (a02 + a13), a02 + a23) + r(a13 * D, (a02 + a23) * (a01 - a02 + a13)),
        "up3": r(a01 * (a02 + a13), a01 + a13) - r(a02 * D, (a01 + a13) * (a23 - a13 + a02)),
        "up4": r(a02 * (a01 + a23), a02 + a23) - r(a01 * D, (a02 + a23) * (a13 - a23 + a01)),
        "mdf1": r(a01 * (a02 + a13), a01 + a13),
        "mdf2": r(a02 * (a01 + a23), a02 + a23),
        "mdf3": r(a13 * (a01 + a23), a01 + a13),
        "mdf4": r(a23 * (a02 + a13), a02 + a23),
        "mdf_bc1": r(a02 * a13 * (a01 + a23) - a01 ** 2 * a13 + a01 * a02 * a23,
                     (a01 + a13) * (a02 - a01 + a23)),
        "mdf_bc2": r(a01 * a23 * (a02 + a13) - a02 ** 2 * a23 + a01 * a02 * a13,
                     (a02 + a23) * (a01 - a02 + a13)),
        "mdf_mac1": r(a01 * (a02 + a13), a01 + a13) - r(a02 * D, (a01 + a13) * (a23 - a13 + a02)),
        "mdf_mac2": r(a02 * (a01 + a23), a02 + a23) - r(a01 * D, (a02 + a23) * (a13 - a23 + a01)),
    }

    scale = max(1.0, max(alphas.as_tuple()) ** 2)
    if D <= SIGN_TOL * scale:
        upper_key, achievable_key = ("up1", "mdf_bc1") if a01 <= a02 else ("up2", "mdf_bc2")
    else:
        upper_key, achievable_key = ("up3", "mdf_mac1") if a13 <= a23 else ("up4", "mdf_mac2")

    report = GdofReport(
        alphas=alphas,
        values=values,
        upper_key=upper_key,
        achievable_key=achievable_key,
        mdf=mdf(asymptotic_capacities(alphas)).rate,
        mdf_optimal=alphas.sigma_degenerate,
    )
    logger.debug(f"GDOF {alphas.as_tuple()}: {upper_key}={report.upper:.6g}, "
                 f"achievable={report.achievable:.6g}, MDF={report.mdf:.6g}")
    return report


def gains_at_power(alphas: GdofExponents, power: float) -> ChannelGains:
    """g_ij = P^a_ij - 1, so that C_ij = 1/2 a_ij log2 P exactly."""
    try:
        return ChannelGains(*(math.expm1(a * math.log(power)) for a in alphas.as_tuple()))
    except OverflowError:
        raise ChannelDomainError(f"P = {power:g} with exponents {alphas.as_tuple()} overflows the gain range")


def _check_grid(grid: Sequence[float], minimum: float, label: str) -> np.ndarray:
    values = np.asarray(list(grid), dtype=float)
    if values.size == 0:
        raise StructuralError(f"{label} grid is empty")
    if not np.all(np.isfinite(values)) or values.min() < minimum:
        raise ChannelDomainError(f"{label} grid values must be finite and >= {minimum:g}")
    if np.any(np.diff(values) <= 0):
        raise StructuralError(f"{label} grid must be strictly increasing")
    return values


def gdof_numeric(alphas: GdofExponents, p_grid: Iterable[float] = GDOF_P_GRID) -> pd.DataFrame:
    """
    Convergence table of R / (1/2 log2 P) for the recommended scheme, MDF, the cut-set
    optimum and the region bound at each P.
    """
    grid = _check_grid(p_grid, GDOF_MIN_P, "P")
    log_stage_start("gdof", f"exponents {alphas.as_tuple()}, {grid.size} grid points")

    rows = []
    for power in grid:
        report = analyze(gains_at_power(alphas, power))
        scale = 0.5 * math.log2(power)
        rows.append({
            "P": power,
            "region": report.region.label,
            "achievable_ratio": report.achievable.rate / scale,
            "mdf_ratio": report.mdf.rate / scale,
            "lp_ratio": report.lp_optimum / scale,
            "upper_ratio": report.upper.value / scale,
        })

    table = pd.DataFrame(rows)
    final = table.iloc[-1]
    log_rate("gdof", "achievable ratio", float(final["achievable_ratio"]), float(final["upper_ratio"]),
             f"at P = {final['P']:.3g}")
    log_stage_complete("gdof", "GDOF convergence", 0, len(rows))
    return table


def multiplexing_gain(gains_at_snr: Callable[[float], ChannelGains], snr_grid: Iterable[float]) -> float:
    """MDF rate over 1/2 log2 SNR at the largest grid point."""

    grid = _check_grid(snr_grid, np.nextafter(1.0, 2.0), "SNR")
    snr = float(grid[-1])
    rate = mdf(derive(gains_at_snr(snr))).rate
    return rate / (0.5 * math.log2(snr))
