"""
Schemes Module

Closed-form rates and schedules of the three decode-and-forward protocols:
- MDF: the two relays alternate between listening and forwarding (modes 2 and 3)
- MDF-BC: MDF plus a broadcast mode where the source superposes both relay messages
- MDF-MAC: MDF plus a multiple-access mode where both relays talk to the destination

Each scheme also has a small LP of its own (built here, solved by `lp`) and a brute-force
oracle over the general achievable-rate expression that tests compare against.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple, Union

import numpy as np

from Diamond.channel import (
    ChannelGains,
    LinkCapacities,
    Sign,
    capacity_array,
    classify_delta,
    classify_gamma_prime,
    guarded_ratio,
)
from Diamond.lp import LinearProgram, Relation, Schedule, Sense, iter_simplex_grid
from Diamond.settings import GUARD_DENOMINATOR, MIN_ORACLE_RESOLUTION, ORACLE_ETA_POINTS
from Diamond.utilities.errors import PreconditionError, StructuralError
from Diamond.utilities.logging_config import get_logger

logger = get_logger(__name__)


class SchemeId(str, Enum):
    MDF = "MDF"
    MDF_BC = "MDF_BC"
    MDF_MAC = "MDF_MAC"


@dataclass(frozen=True)
class BroadcastSplit:
    """Superposition power split eta and the rates u (to relay 1) and v (to relay 2)."""

    eta: float
    u: float
    v: float


@dataclass(frozen=True)
class MacSplit:
    """Relay-to-destination rates delivered during the multiple-access mode."""

    R1: float
    R2: float


@dataclass(frozen=True)
class SchemeResult:
    scheme: SchemeId
    rate: float
    schedule: Schedule
    split: Optional[Union[BroadcastSplit, MacSplit]] = None
    case: str = ""


# ---------------------------------------------------------------------------
# MDF
# ---------------------------------------------------------------------------

def mdf_branch_rate(caps: LinkCapacities, lam: float) -> float:
    """
    MDF rate with t2 = lam, t3 = 1 - lam.

    Relay 1 listens in mode 2 and forwards in mode 3; relay 2 does the opposite.
    """
    relay1 = min(lam * caps.C01, (1.0 - lam) * caps.C13)
    relay2 = min((1.0 - lam) * caps.C02, lam * caps.C23)
    return relay1 + relay2


def mdf_lambdas(caps: LinkCapacities) -> Tuple[Optional[float], Optional[float]]:
    """
    Time splits that fully utilize relay 1 (lambda1) and relay 2 (lambda2).

    None marks a dead branch (zero denominator).
    """
    lam1 = None if caps.C01 + caps.C13 < GUARD_DENOMINATOR else caps.C13 / (caps.C01 + caps.C13)
    lam2 = None if caps.C02 + caps.C23 < GUARD_DENOMINATOR else caps.C02 / (caps.C02 + caps.C23)
    return lam1, lam2


def mdf_closed_forms(caps: LinkCapacities) -> Dict[str, float]:
    C01, C02, C13, C23 = caps.C01, caps.C02, caps.C13, caps.C23
    return {
        "MDF1": guarded_ratio(C01 * (C02 + C13), C01 + C13),
        "MDF2": guarded_ratio(C02 * (C01 + C23), C02 + C23),
        "MDF3": guarded_ratio(C13 * (C01 + C23), C01 + C13),
        "MDF4": guarded_ratio(C23 * (C02 + C13), C02 + C23),
    }


def mdf_branch(caps: LinkCapacities) -> str:
    if classify_delta(caps).nonpositive:
        return "MDF1" if caps.C02 <= caps.C01 else "MDF2"
    return "MDF3" if caps.C23 <= caps.C13 else "MDF4"


def mdf(caps: LinkCapacities) -> SchemeResult:
    """
    Multi-hopping decode-and-forward.

    The branch is chosen by the sign of Delta and the weaker relay link; the schedule is the
    fully-utilizing split of relay 1 (MDF1, MDF3) or relay 2 (MDF2, MDF4).
    """
    branch = mdf_branch(caps)
    lam1, lam2 = mdf_lambdas(caps)
    preferred, other = (lam1, lam2) if branch in ("MDF1", "MDF3") else (lam2, lam1)
    if preferred is not None:
        lam = preferred
    elif other is not None:
        lam = other
    else:
        lam = 0.5

    rate = mdf_branch_rate(caps, lam)
    logger.debug(f"MDF branch {branch}: lambda={lam:.6g} rate={rate:.6g}")
    return SchemeResult(
        scheme=SchemeId.MDF,
        rate=rate,
        schedule=Schedule(0.0, lam, 1.0 - lam, 0.0),
        case=branch,
    )


# ---------------------------------------------------------------------------
# Broadcast mode
# ---------------------------------------------------------------------------

def superposition_rates(gains: ChannelGains, eta):
    """
    (u, v) of the degraded broadcast split.

    The stronger relay gets the inner layer with power share eta and decodes it after
    cancelling the outer layer; eta may be a scalar or an array.
    """
    eta = np.asarray(eta, dtype=float)
    if np.any((eta < 0.0) | (eta > 1.0)):
        raise StructuralError("power split eta must lie in [0, 1]")

    C01 = capacity_array(gains.g01)
    C02 = capacity_array(gains.g02)
    if gains.g02 >= gains.g01:
        u = C01 - capacity_array(eta * gains.g01)
        v = capacity_array(eta * gains.g02)
    else:
        u = capacity_array(eta * gains.g01)
        v = C02 - capacity_array(eta * gains.g02)
    if eta.ndim == 0:
        return float(u), float(v)
    return u, v


def broadcast_split(caps: LinkCapacities, gains: ChannelGains) -> BroadcastSplit:
    """
    eta1 = 1/(g01+1) when C02 >= C01, giving (u, v) = (C01 - zeta1, C012 - C01);
    eta2 = 1/(g02+1) otherwise, giving (u, v) = (C012 - C02, C02 - zeta2).
    """
    if caps.C02 >= caps.C01:
        eta = 1.0 / (gains.g01 + 1.0)
        u, v = caps.C01 - caps.zeta1, caps.C012 - caps.C01
    else:
        eta = 1.0 / (gains.g02 + 1.0)
        u, v = caps.C012 - caps.C02, caps.C02 - caps.zeta2
    return BroadcastSplit(eta=eta, u=max(u, 0.0), v=max(v, 0.0))


def mdf_bc(caps: LinkCapacities, gains: ChannelGains) -> SchemeResult:
    """
    MDF with a broadcast mode, defined for Delta <= 0.

    The schedule makes all four constraints of the broadcast LP tight.
    """
    sign = classify_delta(caps)
    if sign is Sign.POS:
        raise PreconditionError(f"MDF-BC needs Delta <= 0, got Delta={caps.Delta:.6g}")

    split = broadcast_split(caps, gains)
    if sign is Sign.ZERO:
        base = mdf(caps)
        return SchemeResult(SchemeId.MDF_BC, base.rate, base.schedule, split, "DELTA_ZERO")

    C01, C02, C13, C23, Delta = caps.C01, caps.C02, caps.C13, caps.C23, caps.Delta
    u, v = split.u, split.v
    D = (C01 + C13) * v + (C02 + C23) * u - Delta
    t1 = -Delta / D
    t2 = (C13 * v + C02 * u) / D
    t3 = (C01 * v + C23 * u) / D
    rate = (C13 * (C01 + C23) * v + C23 * (C02 + C13) * u) / D

    case = "BC1" if caps.C02 >= caps.C01 else "BC2"
    logger.debug(f"MDF-BC {case}: t=({t1:.6g}, {t2:.6g}, {t3:.6g}) rate={rate:.6g}")
    return SchemeResult(SchemeId.MDF_BC, rate, Schedule(t1, t2, t3, 0.0), split, case)


# ---------------------------------------------------------------------------
# Multiple-access mode
# ---------------------------------------------------------------------------

def _mac_first_branch(caps: LinkCapacities) -> Tuple[float, float, float, float, float, float]:
    C01, C02, C13, C23, CMAC, Delta = caps.C01, caps.C02, caps.C13, caps.C23, caps.CMAC, caps.Delta
    den = (C01 + C13) * (CMAC - C13 + C02)
    t2 = C13 / (C01 + C13)
    t3 = (C01 * (CMAC - C13) + C13 * C23) / den
    t4 = Delta / den
    rate = C01 * (C02 + C13) / (C01 + C13) - C02 * Delta / den
    return t2, t3, t4, rate, t4 * C13, t4 * (CMAC - C13)


def mdf_mac(caps: LinkCapacities) -> SchemeResult:
    """
    MDF with a multiple-access mode, defined for Delta >= 0.

    Gamma' <= 0 uses the first closed form directly; Gamma' > 0 evaluates it on the
    relay-swapped channel and maps the schedule and split back.
    """
    sign = classify_delta(caps)
    if sign is Sign.NEG:
        raise PreconditionError(f"MDF-MAC needs Delta >= 0, got Delta={caps.Delta:.6g}")

    if sign is Sign.ZERO:
        base = mdf(caps)
        return SchemeResult(SchemeId.MDF_MAC, base.rate, base.schedule, MacSplit(0.0, 0.0), "DELTA_ZERO")

    if classify_gamma_prime(caps).nonpositive:
        t2, t3, t4, rate, R1, R2 = _mac_first_branch(caps)
        case = "MAC1"
    else:
        t3, t2, t4, rate, R2, R1 = _mac_first_branch(caps.swapped())
        case = "MAC2"

    logger.debug(f"MDF-MAC {case}: t=({t2:.6g}, {t3:.6g}, {t4:.6g}) R=({R1:.6g}, {R2:.6g}) rate={rate:.6g}")
    return SchemeResult(SchemeId.MDF_MAC, rate, Schedule(0.0, t2, t3, t4), MacSplit(R1, R2), case)


# ---------------------------------------------------------------------------
# General achievable rate and scheme programs
# ---------------------------------------------------------------------------

def achieved_rate(caps: LinkCapacities, schedule: Schedule,
                  broadcast: Optional[BroadcastSplit] = None, mac: Optional[MacSplit] = None) -> float:
    """
    Sum over the relays of min(data received, data forwarded) at a concrete operating point.
    """
    t1, t2, t3, t4 = schedule.as_array()
    u, v = (broadcast.u, broadcast.v) if broadcast is not None else (0.0, 0.0)
    R1, R2 = (mac.R1, mac.R2) if mac is not None else (0.0, 0.0)
    relay1 = min(t1 * u + t2 * caps.C01, t3 * caps.C13 + R1)
    relay2 = min(t1 * v + t3 * caps.C02, t2 * caps.C23 + R2)
    return relay1 + relay2


def mac_split_margins(caps: LinkCapacities, schedule: Schedule, split: MacSplit) -> Dict[str, float]:
    """Margins (>= 0 passes) of the multiple-access region for the time t4."""
    t4 = schedule.t4
    return {
        "R1 <= t4 C13": t4 * caps.C13 - split.R1,
        "R2 <= t4 C23": t4 * caps.C23 - split.R2,
        "R1 + R2 <= t4 CMAC": t4 * caps.CMAC - split.R1 - split.R2,
    }


def build_bc_program(caps: LinkCapacities, split: BroadcastSplit) -> LinearProgram:
    """Variables (t1, t2, t3, R); the broadcast-mode LP with t4 = 0."""
    C01, C02, C13, C23 = caps.C01, caps.C02, caps.C13, caps.C23
    u, v = split.u, split.v
    rows = [
        [-(u + v), -C01, -C02, 1.0],
        [-u, -(C01 + C23), 0.0, 1.0],
        [-v, 0.0, -(C02 + C13), 1.0],
        [0.0, -C23, -C13, 1.0],
        [1.0, 1.0, 1.0, 0.0],
    ]
    return LinearProgram(
        sense=Sense.MAX,
        objective=[0.0, 0.0, 0.0, 1.0],
        constraint_matrix=rows,
        rhs=[0.0, 0.0, 0.0, 0.0, 1.0],
        relations=(Relation.LE,) * 4 + (Relation.EQ,),
        variable_names=("t1", "t2", "t3", "R"),
    )


def build_mac_program(caps: LinkCapacities) -> LinearProgram:
    """Variables (t2, t3, t4, R, R1, R2); the multiple-access LP with t1 = 0."""
    C01, C02, C13, C23, CMAC = caps.C01, caps.C02, caps.C13, caps.C23, caps.CMAC
    rows = [
        [-C01, -C02, 0.0, 1.0, 0.0, 0.0],
        [0.0, -(C02 + C13), 0.0, 1.0, -1.0, 0.0],
        [-(C01 + C23), 0.0, 0.0, 1.0, 0.0, -1.0],
        [-C23, -C13, 0.0, 1.0, -1.0, -1.0],
        [0.0, 0.0, -C13, 0.0, 1.0, 0.0],
        [0.0, 0.0, -C23, 0.0, 0.0, 1.0],
        [0.0, 0.0, -CMAC, 0.0, 1.0, 1.0],
        [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
    ]
    return LinearProgram(
        sense=Sense.MAX,
        objective=[0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        constraint_matrix=rows,
        rhs=[0.0] * 7 + [1.0],
        relations=(Relation.LE,) * 7 + (Relation.EQ,),
        variable_names=("t2", "t3", "t4", "R", "R1", "R2"),
    )


def general_achievable_oracle(caps: LinkCapacities, gains: ChannelGains, resolution: int) -> float:
    """
    Brute-force maximum of the general achievable rate over a schedule lattice and an
    eta grid. The multiple-access rates are maximized exactly for each grid point.
    """
    if resolution < MIN_ORACLE_RESOLUTION:
        raise StructuralError(f"oracle resolution must be >= {MIN_ORACLE_RESOLUTION}, got {resolution}")

    etas = np.unique(np.concatenate([
        np.linspace(0.0, 1.0, ORACLE_ETA_POINTS + 1),
        [1.0 / (gains.g01 + 1.0), 1.0 / (gains.g02 + 1.0)],
    ]))
    us, vs = superposition_rates(gains, etas)
    C01, C02, C13, C23, CMAC = caps.C01, caps.C02, caps.C13, caps.C23, caps.CMAC

    best = -math.inf
    for points in iter_simplex_grid(resolution):
        t1, t2, t3, t4 = points.T
        b1, b2 = t3 * C13, t2 * C23
        cap1, cap2, cap_sum = t4 * C13, t4 * C23, t4 * CMAC
        for u, v in zip(us, vs):
            a1 = t1 * u + t2 * C01
            a2 = t1 * v + t3 * C02
            need1 = np.minimum(np.maximum(a1 - b1, 0.0), cap1)
            need2 = np.minimum(np.maximum(a2 - b2, 0.0), cap2)
            rate = np.minimum(a1, b1) + np.minimum(a2, b2) + np.minimum(need1 + need2, cap_sum)
            best = max(best, float(rate.max()))
    logger.debug(f"Achievable-rate oracle at resolution {resolution}: {best:.6g}")
    return best

