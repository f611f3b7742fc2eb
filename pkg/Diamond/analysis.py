"""
Analysis Module

Region classification of the gap table, the closed-form gap (kappa) expressions, and the
harnesses that check every guarantee over many channels:
- analyze(): recommended scheme, region bound, cut-set optimum and gap for one channel
- sweep(): reproducible Monte-Carlo runs, optionally fanned out over worker processes
- run_verification(): the lemma / duality / guarantee suite behind `verify`
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from Diamond.avgpower import per_term_grid_max, verify_slack
from Diamond.bounds import (
    BoundId,
    CertificateReport,
    UpperBound,
    capacity_delta0,
    enlargement_cost,
    upper_bound,
    verify_dual_feasibility,
)
from Diamond.channel import (
    ChannelGains,
    LinkCapacities,
    capacity_margins,
    classify_delta,
    classify_gamma,
    classify_gamma_prime,
    derive,
    gain_for_capacity,
    guarded_ratio,
)
from Diamond.lp import (
    build_cutset_dual,
    build_cutset_primal,
    complementary_slackness_residual,
    enumerate_vertices,
    solve_simplex,
)
from Diamond.schemes import (
    SchemeId,
    SchemeResult,
    build_bc_program,
    build_mac_program,
    mac_split_margins,
    mdf,
    mdf_bc,
    mdf_mac,
)
from Diamond.settings import (
    AGREEMENT_TOL,
    AVG_POWER_GAP,
    AVG_POWER_RESOLUTION,
    AVG_POWER_SLACK,
    AVG_SCHEDULE_RESOLUTION,
    CSV_COLUMNS,
    DELTA0_CAPACITY_RANGE,
    DELTA_CEILING,
    DELTA_WITNESS_FLOOR,
    DELTA_WITNESS_GAINS,
    FIRST_HOP_EXCESS_CEILING,
    HALF_BIT,
    LARGE_GAP_FAMILY,
    MAC_EXCESS_CEILING,
    PER_TERM_SLACK,
    SECOND_HOP_EXCESS_CEILING,
    SIGNIFICANT_DIGITS,
    SWEEP_DEFAULT_WORKERS,
    SWEEP_GAIN_MAX,
    SWEEP_GAIN_MIN,
    THEOREM_GAP,
    VERIFY_DELTA0_COUNT,
    VERIFY_LP_CROSSCHECK_EVERY,
    ZETA_CEILING,
)
from Diamond.utilities.errors import DiamondError, StructuralError
from Diamond.utilities.logging_config import get_logger, log_rate, log_stage_complete, log_stage_start

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

class Guarantee(str, Enum):
    HALF_PLUS_DELTA = "1/2+delta"
    ONE_PLUS_DELTA = "1+delta"
    ONE = "1"
    HALF = "1/2"

    def value(self, delta: float) -> float:
        return {
            Guarantee.HALF_PLUS_DELTA: HALF_BIT + delta,
            Guarantee.ONE_PLUS_DELTA: 1.0 + delta,
            Guarantee.ONE: 1.0,
            Guarantee.HALF: HALF_BIT,
        }[self]


class RegionSpec(NamedTuple):
    upper: BoundId
    scheme: SchemeId
    gap: str
    guarantee: Guarantee
    mdf_gap: str
    mdf_guarantee: Optional[Guarantee]
    condition: str


_HPD, _OPD = Guarantee.HALF_PLUS_DELTA, Guarantee.ONE_PLUS_DELTA

GAP_TABLE: Dict[str, RegionSpec] = {
    "A1": RegionSpec(BoundId.UP1, SchemeId.MDF, "kappa1", _HPD, "kappa1", _HPD, "C02 <= C01"),
    "A2": RegionSpec(BoundId.UP1, SchemeId.MDF, "kappa5", _HPD, "kappa5", _HPD, "C02 > C01, C01 <= 1"),
    "A3": RegionSpec(BoundId.UP1, SchemeId.MDF_BC, "kappa_bc1", _HPD, "kappa5", None, "C02 > C01, C01 > 1"),
    "B1": RegionSpec(BoundId.UP2, SchemeId.MDF, "kappa2", _HPD, "kappa2", _HPD, "C01 <= C02"),
    "B2": RegionSpec(BoundId.UP2, SchemeId.MDF, "kappa6", _HPD, "kappa6", _HPD, "C01 > C02, C02 <= 1"),
    "B3": RegionSpec(BoundId.UP2, SchemeId.MDF_BC, "kappa_bc2", _HPD, "kappa6", None, "C01 > C02, C02 > 1"),
    "C1": RegionSpec(BoundId.UP3, SchemeId.MDF_MAC, "kappa_mac1", _HPD, "kappa3", _OPD, "C23 <= C13"),
    "C2": RegionSpec(BoundId.UP3, SchemeId.MDF_MAC, "kappa_mac1", Guarantee.HALF, "kappa7", Guarantee.ONE,
                     "C23 > C13, C13 <= 1, C123 <= C13 + C23"),
    "C3": RegionSpec(BoundId.UP3, SchemeId.MDF_MAC, "kappa_mac1", _HPD, "kappa7", None,
                     "C23 > C13, C13 <= 1, C123 > C13 + C23"),
    "C4": RegionSpec(BoundId.UP3, SchemeId.MDF_MAC, "kappa_mac1", _HPD, "kappa7", None, "C23 > C13, C13 > 1"),
    "D1": RegionSpec(BoundId.UP4, SchemeId.MDF_MAC, "kappa_mac2", _HPD, "kappa4", _OPD, "C13 <= C23"),
    "D2": RegionSpec(BoundId.UP4, SchemeId.MDF_MAC, "kappa_mac2", Guarantee.HALF, "kappa8", Guarantee.ONE,
                     "C13 > C23, C23 <= 1, C123 <= C13 + C23"),
    "D3": RegionSpec(BoundId.UP4, SchemeId.MDF_MAC, "kappa_mac2", _HPD, "kappa8", None,
                     "C13 > C23, C23 <= 1, C123 > C13 + C23"),
    "D4": RegionSpec(BoundId.UP4, SchemeId.MDF_MAC, "kappa_mac2", _HPD, "kappa8", None, "C13 > C23, C23 > 1"),
}


@dataclass(frozen=True)
class RegionId:
    label: str
    delta_sign: str
    gamma_name: str
    gamma_sign: str
    condition: str

    @property
    def spec(self) -> RegionSpec:
        return GAP_TABLE[self.label]

    def __str__(self) -> str:
        return self.label


def classify_region(caps: LinkCapacities) -> RegionId:
    """
    The unique row of the gap table for this channel.

    Zero-band values of Delta, Gamma and Gamma' join the '<= 0' rows; capacity comparisons
    at equality join the '<=' rows.
    """
    delta_sign = classify_delta(caps)
    if delta_sign.nonpositive:
        gamma_name, gamma_sign = "Gamma", classify_gamma(caps)
        if gamma_sign.nonpositive:
            if caps.C02 <= caps.C01:
                label = "A1"
            else:
                label = "A2" if caps.C01 <= 1.0 else "A3"
        elif caps.C01 <= caps.C02:
            label = "B1"
        else:
            label = "B2" if caps.C02 <= 1.0 else "B3"
    else:
        gamma_name, gamma_sign = "GammaPrime", classify_gamma_prime(caps)
        if gamma_sign.nonpositive:
            if caps.C23 <= caps.C13:
                label = "C1"
            elif caps.C13 <= 1.0:
                label = "C2" if caps.delta == 0.0 else "C3"
            else:
                label = "C4"
        elif caps.C13 <= caps.C23:
            label = "D1"
        elif caps.C23 <= 1.0:
            label = "D2" if caps.delta == 0.0 else "D3"
        else:
            label = "D4"

    return RegionId(
        label=label,
        delta_sign=delta_sign.value,
        gamma_name=gamma_name,
        gamma_sign=gamma_sign.value,
        condition=GAP_TABLE[label].condition,
    )


# ---------------------------------------------------------------------------
# Gap expressions
# ---------------------------------------------------------------------------

def _kappa1(c: LinkCapacities) -> float:
    return -guarded_ratio((c.C012 - c.C01) * c.Delta, (c.C01 + c.C13) * (c.C012 - c.C01 + c.C23)) + c.delta


def _kappa3(c: LinkCapacities) -> float:
    return guarded_ratio((c.C123 - c.C13) * c.Delta, (c.C01 + c.C13) * (c.C123 - c.C13 + c.C02)) + c.delta


def _kappa5(c: LinkCapacities) -> float:
    bracket = guarded_ratio(c.C01 + c.C23, c.C02 + c.C23) - guarded_ratio(c.C23, c.C012 - c.C01 + c.C23)
    return -guarded_ratio(c.Delta, c.C01 + c.C13) * bracket + c.delta


def _kappa7(c: LinkCapacities) -> float:
    bracket = guarded_ratio(c.C02 + c.C13, c.C02 + c.C23) - guarded_ratio(c.C02, c.C123 - c.C13 + c.C02)
    return guarded_ratio(c.Delta, c.C01 + c.C13) * bracket + c.delta


def _kappa_bc1(c: LinkCapacities) -> float:
    outer = c.C012 - c.C01 + c.C23
    numerator = -c.zeta1 * (outer * (c.C13 - c.C23) + c.C23 * (c.C02 + c.C23)) * c.Delta
    denominator = (c.C01 + c.C13) * outer * ((c.C01 + c.C13) * outer - c.zeta1 * (c.C02 + c.C23))
    return guarded_ratio(numerator, denominator) + c.delta


def _kappa_mac1(c: LinkCapacities) -> float:
    numerator = c.C02 * (c.C123 - c.CMAC) * c.Delta
    denominator = (c.C01 + c.C13) * (c.CMAC - c.C13 + c.C02) * (c.C123 - c.C13 + c.C02)
    return guarded_ratio(numerator, denominator) + c.delta


KAPPAS: Dict[str, Callable[[LinkCapacities], float]] = {
    "kappa1": _kappa1,
    "kappa2": lambda c: _kappa1(c.swapped()),
    "kappa3": _kappa3,
    "kappa4": lambda c: _kappa3(c.swapped()),
    "kappa5": _kappa5,
    "kappa6": lambda c: _kappa5(c.swapped()),
    "kappa7": _kappa7,
    "kappa8": lambda c: _kappa7(c.swapped()),
    "kappa_bc1": _kappa_bc1,
    "kappa_bc2": lambda c: _kappa_bc1(c.swapped()),
    "kappa_mac1": _kappa_mac1,
    "kappa_mac2": lambda c: _kappa_mac1(c.swapped()),
}


def gap_formula(caps: LinkCapacities, region: RegionId) -> float:
    """The closed-form gap the table assigns to the region's recommended scheme."""
    actual = classify_region(caps)
    if actual.label != region.label:
        raise StructuralError(f"region {region.label} does not match the channel (classified as {actual.label})")
    return KAPPAS[region.spec.gap](caps)


# ---------------------------------------------------------------------------
# Single-channel report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateReport:
    gains: ChannelGains
    caps: LinkCapacities
    region: RegionId
    achievable: SchemeResult
    upper: UpperBound
    lp_optimum: float
    gap_formula_value: float
    gap_guarantee: float
    measured_gap: float
    mdf: SchemeResult
    mdf_bc: Optional[SchemeResult]
    mdf_mac: Optional[SchemeResult]
    certificate: CertificateReport


def analyze(gains: ChannelGains) -> RateReport:
    """Recommended scheme, region bound, cut-set optimum and gap for one channel."""
    caps = derive(gains)
    region = classify_region(caps)
    spec = region.spec

    sign = classify_delta(caps)
    schemes = {
        SchemeId.MDF: mdf(caps),
        SchemeId.MDF_BC: mdf_bc(caps, gains) if sign.nonpositive else None,
        SchemeId.MDF_MAC: mdf_mac(caps) if sign.nonnegative else None,
    }
    achievable = schemes[spec.scheme]

    upper = upper_bound(caps)
    if upper.bound is not spec.upper:
        raise StructuralError(f"region {region.label} expects {spec.upper.value}, bound selected {upper.bound.value}")

    lp_solution = solve_simplex(build_cutset_primal(caps))
    certificate = verify_dual_feasibility(caps, upper)

    report = RateReport(
        gains=gains,
        caps=caps,
        region=region,
        achievable=achievable,
        upper=upper,
        lp_optimum=lp_solution.objective_value,
        gap_formula_value=KAPPAS[spec.gap](caps),
        gap_guarantee=spec.guarantee.value(caps.delta),
        measured_gap=upper.value - achievable.rate,
        mdf=schemes[SchemeId.MDF],
        mdf_bc=schemes[SchemeId.MDF_BC],
        mdf_mac=schemes[SchemeId.MDF_MAC],
        certificate=certificate,
    )
    logger.debug(f"Region {region.label}: {achievable.scheme.value} rate {achievable.rate:.6g}, "
                 f"upper {upper.value:.6g}, gap {report.measured_gap:.6g}")
    return report


def lemma_margins(caps: LinkCapacities, bound: Optional[UpperBound] = None,
                  certificate: Optional[CertificateReport] = None) -> Dict[str, float]:
    """
    Check name -> margin; a margin >= 0 means the inequality holds.

    Region-specific ceilings are only reported for the regions they apply to.
    """
    bound = bound or upper_bound(caps)
    certificate = certificate or verify_dual_feasibility(caps, bound)

    margins = {
        "enlargement cost": caps.delta - enlargement_cost(caps, bound),
        "delta ceiling": DELTA_CEILING - caps.delta,
        "mac excess": MAC_EXCESS_CEILING - (caps.C123 - caps.CMAC),
        "first hop excess": FIRST_HOP_EXCESS_CEILING - (caps.C012 - max(caps.C01, caps.C02)),
        "second hop excess": SECOND_HOP_EXCESS_CEILING - (caps.C123 - max(caps.C13, caps.C23)),
        "zeta ceiling": ZETA_CEILING - max(caps.zeta1, caps.zeta2),
        "capacity ordering": min(capacity_margins(caps).values()),
    }
    if certificate.dual_cap_margin is not None:
        margins["dual weight ceiling"] = certificate.dual_cap_margin

    region = classify_region(caps)
    spec = region.spec
    if region.label in ("A3", "B3"):
        margins["broadcast gap ceiling"] = HALF_BIT + caps.delta - KAPPAS[spec.gap](caps)
    if region.label in ("A2", "B2"):
        margins["mdf half-bit ceiling"] = HALF_BIT + caps.delta - KAPPAS[spec.mdf_gap](caps)
    if region.label in ("C2", "D2"):
        margins["mdf one-bit ceiling"] = 1.0 - KAPPAS[spec.mdf_gap](caps)
    return margins


def report_violations(report: RateReport) -> List[str]:
    """Every invariant a report must satisfy; an empty list means the channel passes."""
    tol = AGREEMENT_TOL
    issues = []
    if report.measured_gap > report.gap_guarantee + tol:
        issues.append(f"gap {report.measured_gap:.9g} exceeds the {report.region.label} guarantee "
                      f"{report.gap_guarantee:.9g}")
    if report.measured_gap > THEOREM_GAP + tol:
        issues.append(f"gap {report.measured_gap:.9g} exceeds {THEOREM_GAP:.9g}")
    if report.achievable.rate > report.lp_optimum + tol:
        issues.append(f"achievable {report.achievable.rate:.12g} exceeds the cut-set optimum {report.lp_optimum:.12g}")
    if report.lp_optimum > report.upper.value + tol:
        issues.append(f"cut-set optimum {report.lp_optimum:.12g} exceeds the bound {report.upper.value:.12g}")
    if not report.certificate.passed:
        issues.extend(report.certificate.violations)
    if abs(report.measured_gap - report.gap_formula_value) > tol:
        issues.append(f"gap {report.measured_gap:.12g} disagrees with {report.region.spec.gap} "
                      f"= {report.gap_formula_value:.12g}")
    for name, margin in lemma_margins(report.caps, report.upper, report.certificate).items():
        if margin < -tol:
            issues.append(f"{name} violated by {-margin:.3g}")
    return issues


def report_row(report: RateReport) -> Dict[str, object]:
    """One CSV row keyed by CSV_COLUMNS."""
    caps = report.caps
    row = dict(zip(("g01", "g02", "g13", "g23"), report.gains.as_tuple()))
    row.update({
        "C01": caps.C01, "C02": caps.C02, "C13": caps.C13, "C23": caps.C23,
        "Delta": caps.Delta, "Gamma": caps.Gamma, "GammaPrime": caps.GammaPrime, "delta": caps.delta,
        "region": report.region.label,
        "scheme": report.achievable.scheme.value,
        "achievable": report.achievable.rate,
        "lp_opt": report.lp_optimum,
        "upper": report.upper.value,
        "gap": report.measured_gap,
        "gap_guarantee": report.gap_guarantee,
    })
    return {column: row[column] for column in CSV_COLUMNS}


def reports_to_frame(reports: Iterable[RateReport]) -> pd.DataFrame:
    return pd.DataFrame([report_row(r) for r in reports], columns=CSV_COLUMNS)


def write_csv(frame: pd.DataFrame, path: str) -> None:
    frame.to_csv(path, index=False, float_format=f"%.{SIGNIFICANT_DIGITS}g")


# ---------------------------------------------------------------------------
# MDF gap study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MdfGapStudy:
    region: RegionId
    symmetry: str
    upper: float
    mdf_rate: float
    mdf_gap: float
    mdf_gap_formula: float
    mdf_guarantee: Optional[float]
    enhanced_scheme: SchemeId
    enhanced_rate: float
    enhanced_gap: float
    enhanced_guarantee: Optional[float]

    def table(self) -> pd.DataFrame:
        return pd.DataFrame([
            {"scheme": SchemeId.MDF.value, "rate": self.mdf_rate, "gap": self.mdf_gap,
             "guarantee": self.mdf_guarantee},
            {"scheme": self.enhanced_scheme.value, "rate": self.enhanced_rate, "gap": self.enhanced_gap,
             "guarantee": self.enhanced_guarantee},
        ])


def gains_from_capacities(C01: float, C02: float, C13: float, C23: float) -> ChannelGains:
    return ChannelGains(*(gain_for_capacity(c) for c in (C01, C02, C13, C23)))


def symmetry_label(caps: LinkCapacities) -> str:
    first = math.isclose(caps.C01, caps.C02, rel_tol=1e-12, abs_tol=1e-15)
    second = math.isclose(caps.C13, caps.C23, rel_tol=1e-12, abs_tol=1e-15)
    if first and second:
        return "symmetric"
    sign = classify_delta(caps)
    if (first and sign.value == "NEG") or (second and sign.value == "POS"):
        return "partially symmetric"
    return "general"


def mdf_gap_study(caps: LinkCapacities, gains: Optional[ChannelGains] = None) -> MdfGapStudy:
    """
    How far plain MDF sits from the region bound next to the scheme enhanced with a
    broadcast (Delta <= 0) or multiple-access (Delta > 0) mode.
    """
    gains = gains or gains_from_capacities(caps.C01, caps.C02, caps.C13, caps.C23)
    region = classify_region(caps)
    spec = region.spec
    upper = upper_bound(caps).value

    plain = mdf(caps)
    if classify_delta(caps).nonpositive:
        enhanced = mdf_bc(caps, gains)
    else:
        enhanced = mdf_mac(caps)

    return MdfGapStudy(
        region=region,
        symmetry=symmetry_label(caps),
        upper=upper,
        mdf_rate=plain.rate,
        mdf_gap=upper - plain.rate,
        mdf_gap_formula=KAPPAS[spec.mdf_gap](caps),
        mdf_guarantee=spec.mdf_guarantee.value(caps.delta) if spec.mdf_guarantee else None,
        enhanced_scheme=enhanced.scheme,
        enhanced_rate=enhanced.rate,
        enhanced_gap=upper - enhanced.rate,
        enhanced_guarantee=spec.guarantee.value(caps.delta) if spec.scheme is not SchemeId.MDF else None,
    )


def linear_gap_family(x: float, alpha: float, beta: float) -> ChannelGains:
    """C02 = x, C13 = C23 = alpha x, C01 = beta x; MDF's gap grows linearly in x when alpha > beta > 1."""
    return gains_from_capacities(beta * x, x, alpha * x, alpha * x)


def mdf_gap_lower_bound(x: float, alpha: float, beta: float) -> float:
    return (alpha ** 2 - beta) * (beta - 1.0) / ((alpha + beta) ** 2 * (alpha + 1.0)) * x


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def sample_gains(seed: int, index: int, gain_min: float = SWEEP_GAIN_MIN,
                 gain_max: float = SWEEP_GAIN_MAX) -> ChannelGains:
    """Log-uniform gains from the substream (seed, index); independent of worker layout."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    logs = rng.uniform(math.log(gain_min), math.log(gain_max), size=4)
    return ChannelGains(*np.exp(logs))


@dataclass
class SweepSummary:
    count: int
    evaluated: int = 0
    max_gap: float = 0.0
    max_gap_by_region: Dict[str, float] = field(default_factory=dict)
    region_counts: Dict[str, int] = field(default_factory=dict)
    violations: int = 0
    violation_details: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, object]:
        return {
            "count": self.count,
            "evaluated": self.evaluated,
            "max_gap": self.max_gap,
            "max_gap_by_region": dict(sorted(self.max_gap_by_region.items())),
            "region_counts": dict(sorted(self.region_counts.items())),
            "violations": self.violations,
        }


@dataclass
class SweepResult:
    frame: pd.DataFrame
    summary: SweepSummary


def _sweep_chunk(task: Tuple[int, int, int, float, float]) -> List[Tuple[int, Optional[dict], List[str]]]:
    seed, start, stop, gain_min, gain_max = task
    out = []
    for index in range(start, stop):
        gains = sample_gains(seed, index, gain_min, gain_max)
        try:
            report = analyze(gains)
            out.append((index, report_row(report), report_violations(report)))
        except DiamondError as e:
            logger.error(f"Analysis failed for channel {index} {gains.as_tuple()}: {e}")
            out.append((index, None, [f"analysis failed: {e}"]))
    return out


def _validate_range(count: int, gain_min: float, gain_max: float):
    if count < 1:
        raise StructuralError(f"count must be >= 1, got {count}")
    if not (0.0 < gain_min <= gain_max) or not math.isfinite(gain_max):
        raise StructuralError(f"gain range must satisfy 0 < min <= max, got [{gain_min}, {gain_max}]")


def sweep(count: int, seed: int, gain_min: float = SWEEP_GAIN_MIN, gain_max: float = SWEEP_GAIN_MAX,
          workers: int = SWEEP_DEFAULT_WORKERS) -> SweepResult:
    """
    Analyze `count` log-uniform random channels.

    Rows come back in sample order whatever the worker count, so equal seeds give equal frames.
    """
    _validate_range(count, gain_min, gain_max)
    workers = max(1, int(workers))
    log_stage_start("sweep", f"{count} channels, seed {seed}, gains [{gain_min:g}, {gain_max:g}], {workers} worker(s)")

    size = max(1, math.ceil(count / (workers * 4)))
    tasks = [(seed, start, min(start + size, count), gain_min, gain_max) for start in range(0, count, size)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_chunk, tasks))
    else:
        chunks = [_sweep_chunk(task) for task in tasks]

    summary = SweepSummary(count=count)
    rows = []
    for index, row, issues in (item for chunk in chunks for item in chunk):
        if issues:
            summary.violations += 1
            if len(summary.violation_details) < 20:
                summary.violation_details.append(f"channel {index}: {'; '.join(issues)}")
        if row is None:
            continue
        rows.append(row)
        summary.evaluated += 1
        label, gap = row["region"], row["gap"]
        summary.max_gap = max(summary.max_gap, gap)
        summary.max_gap_by_region[label] = max(summary.max_gap_by_region.get(label, -math.inf), gap)
        summary.region_counts[label] = summary.region_counts.get(label, 0) + 1

    for detail in summary.violation_details:
        logger.warning(f"Sweep violation - {detail}")
    log_rate("sweep", "max gap", summary.max_gap, THEOREM_GAP, f"{len(summary.region_counts)} regions visited")
    log_stage_complete("sweep", "Sweep", summary.violations, count)
    return SweepResult(frame=pd.DataFrame(rows, columns=CSV_COLUMNS), summary=summary)


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------

class _CheckTable:
    """Per-check counters: evaluations, violations and the worst margin seen."""

    def __init__(self):
        self.rows: Dict[str, Dict[str, float]] = {}

    def record(self, name: str, margin: float, tol: float = AGREEMENT_TOL):
        row = self.rows.setdefault(name, {"evaluated": 0, "violations": 0, "worst_margin": math.inf})
        row["evaluated"] += 1
        if not margin >= -tol:
            row["violations"] += 1
        row["worst_margin"] = min(row["worst_margin"], margin) if not math.isnan(margin) else -math.inf

    def fail(self, name: str):
        self.record(name, -math.inf)

    def frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            [{"check": name, **values} for name, values in self.rows.items()],
            columns=["check", "evaluated", "violations", "worst_margin"],
        )
        return frame.astype({"evaluated": int, "violations": int})


def _check_channel(checks: _CheckTable, index: int, report: RateReport, lp_every: int):
    caps = report.caps
    label = report.region.label
    checks.record("theorem gap", THEOREM_GAP - report.measured_gap)
    checks.record(f"guarantee {label}", report.gap_guarantee - report.measured_gap)
    checks.record("achievable <= cut-set", report.lp_optimum - report.achievable.rate)
    checks.record("cut-set <= bound", report.upper.value - report.lp_optimum)
    checks.record("dual certificate", 0.0 if report.certificate.passed else -1.0)
    checks.record("gap formula", AGREEMENT_TOL - abs(report.measured_gap - report.gap_formula_value), tol=0.0)
    for name, margin in lemma_margins(caps, report.upper, report.certificate).items():
        checks.record(name, margin)

    for scheme in (report.mdf, report.mdf_bc, report.mdf_mac):
        if scheme is not None:
            checks.record("scheme rate <= cut-set", report.lp_optimum - scheme.rate)
    if report.mdf_mac is not None and report.mdf_mac.split is not None:
        margins = mac_split_margins(caps, report.mdf_mac.schedule, report.mdf_mac.split)
        checks.record("mac split region", min(margins.values()), tol=1e-12)

    if lp_every and index % lp_every == 0:
        primal = build_cutset_primal(caps)
        simplex = solve_simplex(primal)
        vertices = enumerate_vertices(primal)
        dual = solve_simplex(build_cutset_dual(caps))
        checks.record("simplex = vertex enumeration",
                      AGREEMENT_TOL - abs(simplex.objective_value - vertices.objective_value), tol=0.0)
        checks.record("strong duality", AGREEMENT_TOL - abs(simplex.objective_value - dual.objective_value), tol=0.0)
        checks.record("complementary slackness", AGREEMENT_TOL - complementary_slackness_residual(primal, simplex),
                      tol=0.0)
        if report.mdf_bc is not None and report.mdf_bc.case != "DELTA_ZERO":
            program = solve_simplex(build_bc_program(caps, report.mdf_bc.split))
            checks.record("broadcast program >= closed form", program.objective_value - report.mdf_bc.rate)
        if report.mdf_mac is not None and report.mdf_mac.case != "DELTA_ZERO":
            program = solve_simplex(build_mac_program(caps))
            checks.record("multiple-access program >= closed form", program.objective_value - report.mdf_mac.rate)


def _check_delta_zero(checks: _CheckTable, seed: int, count: int):
    low, high = DELTA0_CAPACITY_RANGE
    for k in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, k)))
        C01, C02, C13 = rng.uniform(low, high, size=3)
        caps = derive(gains_from_capacities(C01, C02, C13, C01 * C02 / C13))
        try:
            optimum = solve_simplex(build_cutset_primal(caps)).objective_value
            checks.record("delta0 mdf = cut-set", AGREEMENT_TOL - abs(mdf(caps).rate - optimum), tol=0.0)
            checks.record("delta0 capacity = cut-set", AGREEMENT_TOL - abs(capacity_delta0(caps).value - optimum),
                          tol=0.0)
        except DiamondError as e:
            logger.error(f"Delta = 0 channel {k} failed: {e}")
            checks.fail("delta0 mdf = cut-set")


def _check_witnesses(checks: _CheckTable):
    caps = derive(ChannelGains(*DELTA_WITNESS_GAINS))
    checks.record("delta tightness witness", caps.delta - DELTA_WITNESS_FLOOR, tol=0.0)

    x, alpha, beta = LARGE_GAP_FAMILY
    gains = linear_gap_family(x, alpha, beta)
    study = mdf_gap_study(derive(gains), gains)
    checks.record("large mdf gap witness", study.mdf_gap - 1.0, tol=0.0)
    checks.record("large mdf gap lower bound",
                  study.mdf_gap - mdf_gap_lower_bound(x, alpha, beta) - derive(gains).delta)
    checks.record("large gap enhanced scheme", THEOREM_GAP - study.enhanced_gap)


def _check_average_power(checks: _CheckTable, seed: int, count: int, gain_min: float, gain_max: float,
                         schedule_resolution: int, power_resolution: int):
    checks.record("per-term gain ceiling", PER_TERM_SLACK - per_term_grid_max(), tol=1e-12)
    for index in range(count):
        gains = sample_gains(seed, index, gain_min, gain_max)
        try:
            report = verify_slack(gains, schedule_resolution, power_resolution)
        except DiamondError as e:
            logger.error(f"Average-power check failed for channel {index}: {e}")
            checks.fail("average power slack")
            continue
        checks.record("average power slack", AVG_POWER_SLACK - report.slack, tol=1e-6)
        checks.record("average power monotone", report.slack, tol=1e-9)
        checks.record("average power gap", AVG_POWER_GAP - report.gap_to_achievable, tol=1e-6)


def run_verification(count: int, seed: int, gain_min: float = SWEEP_GAIN_MIN, gain_max: float = SWEEP_GAIN_MAX,
                     avg_power: bool = False, avg_count: Optional[int] = None,
                     schedule_resolution: int = AVG_SCHEDULE_RESOLUTION,
                     power_resolution: int = AVG_POWER_RESOLUTION,
                     lp_every: int = VERIFY_LP_CROSSCHECK_EVERY,
                     delta0_count: int = VERIFY_DELTA0_COUNT) -> pd.DataFrame:
    """
    Run the property suite and return one row per check:
    check, evaluated, violations, worst_margin (>= 0 means the inequality holds everywhere).
    """
    _validate_range(count, gain_min, gain_max)
    log_stage_start("verify", f"{count} channels, seed {seed}")
    checks = _CheckTable()

    for index in range(count):
        gains = sample_gains(seed, index, gain_min, gain_max)
        try:
            report = analyze(gains)
        except DiamondError as e:
            logger.error(f"Analysis failed for channel {index} {gains.as_tuple()}: {e}")
            checks.fail("analysis")
            continue
        _check_channel(checks, index, report, lp_every)

    _check_delta_zero(checks, seed, delta0_count)
    _check_witnesses(checks)
    if avg_power:
        _check_average_power(checks, seed, avg_count or count, gain_min, gain_max,
                             schedule_resolution, power_resolution)

    table = checks.frame()
    violations = int(table["violations"].sum())
    for row in table.itertuples():
        if row.violations:
            logger.warning(f"Check '{row.check}' violation count {row.violations} (worst margin {row.worst_margin:.3g})")
    log_stage_complete("verify", "Verification", violations, int(table["evaluated"].sum()))
    return table
