"""
Average Power Module

Cut-set bound when each transmitter only has to meet its power budget on average over the
four modes, instead of in every mode.

The bound is maximized over a lattice of schedules and a lattice of budget splits, so the value
returned is always achieved by a feasible profile (a lower estimate of the relaxed bound).
Budget splits step linearly in 1/power_resolution; the per-mode power is share / t, so short
modes already reach large powers without a log-spaced power axis.
It is compared against the constant-power cut-set optimum, which it may exceed by at most
2/ln 2 bits.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from Diamond.channel import ChannelGains, capacity_array, classify_delta, derive
from Diamond.lp import Schedule, cutset_optimum, iter_simplex_grid
from Diamond.schemes import mdf, mdf_bc, mdf_mac
from Diamond.settings import (
    AVG_POWER_GAP,
    AVG_POWER_RESOLUTION,
    AVG_POWER_SLACK,
    AVG_SCHEDULE_RESOLUTION,
    MIN_AVG_RESOLUTION,
    PER_TERM_SLACK,
)
from Diamond.utilities.errors import StructuralError
from Diamond.utilities.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class PowerProfile:
    """
    Schedule plus budget split: the source divides its unit energy over modes 1-3
    (source_split), relay 1 puts relay1_share in mode 3 and the rest in mode 4,
    relay 2 puts relay2_share in mode 2 and the rest in mode 4.
    """

    schedule: Schedule
    source_split: Tuple[float, float, float]
    relay1_share: float
    relay2_share: float

    def powers(self) -> Dict[str, np.ndarray]:
        """Per-mode transmit powers; a mode with zero time gets zero power."""
        t = self.schedule.as_array()
        e1, e2, e3 = self.source_split
        energy = {
            "source": np.array([e1, e2, e3, 0.0]),
            "relay1": np.array([0.0, 0.0, self.relay1_share, 1.0 - self.relay1_share]),
            "relay2": np.array([0.0, self.relay2_share, 0.0, 1.0 - self.relay2_share]),
        }
        safe = np.where(t > 0, t, 1.0)
        return {name: np.where(t > 0, e / safe, 0.0) for name, e in energy.items()}

    def average_usage(self) -> Dict[str, float]:
        t = self.schedule.as_array()
        return {name: float(t @ p) for name, p in self.powers().items()}


@dataclass(frozen=True)
class SlackReport:
    gains: ChannelGains
    avg_power_bound: float
    constant_optimum: float
    slack: float
    achievable: float
    gap_to_achievable: float
    per_term_max: float
    profile: PowerProfile
    passed: bool


def _mode_rate(t: float, energy) -> np.ndarray:
    """t C(energy / t), zero for an unused mode."""
    energy = np.asarray(energy, dtype=float)
    if t <= 0.0:
        return np.zeros_like(energy)
    return t * capacity_array(energy / t)


def _source_lattice(n: int) -> np.ndarray:
    total, j = np.tril_indices(n + 1)
    return np.column_stack([n - total, j, total - j]) / n


def _check_resolution(name: str, value: int) -> int:
    value = int(value)
    if value < MIN_AVG_RESOLUTION:
        raise StructuralError(f"{name} must be >= {MIN_AVG_RESOLUTION}, got {value}")
    return value


def search_avg_power(gains: ChannelGains, schedule_resolution: int = AVG_SCHEDULE_RESOLUTION,
                     power_resolution: int = AVG_POWER_RESOLUTION) -> Tuple[float, PowerProfile]:
    """
    Best min-cut value over the schedule and budget-split lattices, with the profile reaching it.

    The constant-power profile at the cut-set-optimal schedule seeds the search, so the result
    never falls below the constant-power optimum.
    """
    schedule_resolution = _check_resolution("schedule_resolution", schedule_resolution)
    power_resolution = _check_resolution("power_resolution", power_resolution)
    g01, g02, g13, g23 = gains.as_tuple()

    solution = cutset_optimum(derive(gains))
    t_star = np.clip(solution.variables[:4], 0.0, None)
    t_star = Schedule.from_array(t_star / t_star.sum())
    r1_energy = t_star.t3 + t_star.t4
    r2_energy = t_star.t2 + t_star.t4
    best_value = solution.objective_value
    best_profile = PowerProfile(
        schedule=t_star,
        source_split=(t_star.t1, t_star.t2, t_star.t3),
        relay1_share=t_star.t3 / r1_energy if r1_energy > 0 else 0.5,
        relay2_share=t_star.t2 / r2_energy if r2_energy > 0 else 0.5,
    )

    source = _source_lattice(power_resolution)
    e1, e2, e3 = source[:, 0], source[:, 1], source[:, 2]
    share = np.linspace(0.0, 1.0, power_resolution + 1)
    rest = 1.0 - share
    coherent = (np.sqrt(g13 * rest)[:, None] + np.sqrt(g23 * rest)[None, :]) ** 2

    for points in iter_simplex_grid(schedule_resolution):
        for t1, t2, t3, t4 in points:
            cut_source = _mode_rate(t1, (g01 + g02) * e1) + _mode_rate(t2, g01 * e2) + _mode_rate(t3, g02 * e3)
            source_r1 = _mode_rate(t1, g01 * e1) + _mode_rate(t2, g01 * e2)
            source_r2 = _mode_rate(t1, g02 * e1) + _mode_rate(t3, g02 * e3)
            relay2_alone = _mode_rate(t2, g23 * share)
            relay1_alone = _mode_rate(t3, g13 * share)
            relay2_total = relay2_alone + _mode_rate(t4, g23 * rest)
            relay1_total = relay1_alone + _mode_rate(t4, g13 * rest)
            cut_relays = relay1_alone[:, None] + relay2_alone[None, :] + _mode_rate(t4, coherent)

            # axes: source split, relay-1 share, relay-2 share
            value = np.minimum(
                np.minimum(cut_source[:, None, None], cut_relays[None, :, :]),
                np.minimum(source_r1[:, None, None] + relay2_total[None, None, :],
                           source_r2[:, None, None] + relay1_total[None, :, None]),
            )
            k = int(np.argmax(value))
            if value.flat[k] > best_value:
                i, a, b = np.unravel_index(k, value.shape)
                best_value = float(value.flat[k])
                best_profile = PowerProfile(
                    schedule=Schedule(t1, t2, t3, t4),
                    source_split=(float(e1[i]), float(e2[i]), float(e3[i])),
                    relay1_share=float(share[a]),
                    relay2_share=float(share[b]),
                )
    return best_value, best_profile


def avg_power_cutset(gains: ChannelGains, schedule_resolution: int = AVG_SCHEDULE_RESOLUTION,
                     power_resolution: int = AVG_POWER_RESOLUTION) -> float:
    return search_avg_power(gains, schedule_resolution, power_resolution)[0]


def per_term_gain(t, g):
    """t C(g (1 - t) / ((1 + g) t)), the most one mode gains by pooling the whole budget into it."""
    t = np.asarray(t, dtype=float)
    g = np.asarray(g, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, safe * capacity_array(g * (1.0 - safe) / ((1.0 + g) * safe)), 0.0)


@lru_cache(maxsize=None)
def per_term_grid_max(t_points: int = 400, g_points: int = 400) -> float:
    t = np.geomspace(1e-8, 1.0, t_points)
    g = np.concatenate([[0.0], np.geomspace(1e-3, 1e9, g_points)])
    return float(per_term_gain(t[:, None], g[None, :]).max())


def verify_slack(gains: ChannelGains, schedule_resolution: int = AVG_SCHEDULE_RESOLUTION,
                 power_resolution: int = AVG_POWER_RESOLUTION) -> SlackReport:
    caps = derive(gains)
    bound, profile = search_avg_power(gains, schedule_resolution, power_resolution)
    constant = cutset_optimum(caps).objective_value

    sign = classify_delta(caps)
    rates = [mdf(caps).rate]
    if sign.nonpositive:
        rates.append(mdf_bc(caps, gains).rate)
    if sign.nonnegative:
        rates.append(mdf_mac(caps).rate)
    achievable = max(rates)

    slack = bound - constant
    per_term = per_term_grid_max()
    passed = (slack <= AVG_POWER_SLACK + 1e-6 and slack >= -1e-9
              and bound - achievable <= AVG_POWER_GAP + 1e-6 and per_term <= PER_TERM_SLACK + 1e-12)
    if not passed:
        logger.warning(f"Average-power slack violation for {gains.as_tuple()}: slack {slack:.6g}, "
                       f"gap {bound - achievable:.6g}, per-term {per_term:.6g}")
    else:
        logger.debug(f"Average-power slack {slack:.6g} for {gains.as_tuple()}")
    return SlackReport(
        gains=gains,
        avg_power_bound=bound,
        constant_optimum=constant,
        slack=slack,
        achievable=achievable,
        gap_to_achievable=bound - achievable,
        per_term_max=per_term,
        profile=profile,
        passed=passed,
    )
