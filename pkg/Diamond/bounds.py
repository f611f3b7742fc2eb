"""
Bounds Module

Single-expression upper bounds on the cut-set program, each backed by an explicit dual
vector so the bound can be certified by weak duality:
- UP1 / UP2 for Delta <= 0 (split by the sign of Gamma)
- UP3 / UP4 for Delta > 0 (split by the sign of Gamma')
- the exact cut-set value when Delta = 0

When coherent combining makes C123 exceed C13 + C23 by delta, one relay link is enlarged
by delta before the dual vector is built; the bound carries a matching +delta term.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from Diamond.channel import (
    LinkCapacities,
    Sign,
    classify_delta,
    classify_gamma,
    classify_gamma_prime,
    guarded_ratio,
)
from Diamond.lp import dual_rows
from Diamond.settings import AGREEMENT_TOL, FEASIBILITY_TOL, GUARD_DENOMINATOR, SCHEDULE_SLACK
from Diamond.utilities.errors import CertificateFailure, PreconditionError
from Diamond.utilities.logging_config import get_logger, log_certificate_issue

logger = get_logger(__name__)


class BoundId(str, Enum):
    UP1 = "UP1"
    UP2 = "UP2"
    UP3 = "UP3"
    UP4 = "UP4"
    CAPACITY_DELTA0 = "CAPACITY_DELTA0"


# link enlarged by delta for each bound, in the caller's coordinates
ENLARGED_LINK = {
    BoundId.UP1: "C13",
    BoundId.UP2: "C23",
    BoundId.UP3: "C23",
    BoundId.UP4: "C13",
}


@dataclass(frozen=True)
class UpperBound:
    bound: BoundId
    value: float
    dual_vector: Tuple[float, float, float, float]
    delta_added: float = 0.0
    enlarged_link: Optional[str] = None


@dataclass(frozen=True)
class CertificateReport:
    bound: BoundId
    passed: bool
    dual_rows: Tuple[float, float, float, float]
    max_row: float
    tau_sum: float
    tau_min: float
    dual_cap_margin: Optional[float] = None
    violations: Tuple[str, ...] = field(default_factory=tuple)

    def require(self) -> "CertificateReport":
        if not self.passed:
            raise CertificateFailure(f"{self.bound.value} certificate rejected: {'; '.join(self.violations)}",
                                     self.violations)
        return self


class _Frame(NamedTuple):
    """Capacities seen by the generic tight dual vector."""

    C01: float
    C02: float
    C13: float
    C23: float
    C012: float
    C123: float


# position k of the caller's tau is taken from frame component order[k]
_TAU_ORDER = {
    BoundId.UP1: (0, 2, 1, 3),
    BoundId.UP2: (0, 1, 2, 3),
    BoundId.UP3: (3, 1, 2, 0),
    BoundId.UP4: (3, 2, 1, 0),
}


def _frame(caps: LinkCapacities, bound: BoundId) -> _Frame:
    d = caps.delta
    if bound is BoundId.UP2:
        return _Frame(caps.C01, caps.C02, caps.C13, caps.C23 + d, caps.C012, caps.C123)
    if bound is BoundId.UP1:
        return _Frame(caps.C02, caps.C01, caps.C23, caps.C13 + d, caps.C012, caps.C123)
    if bound is BoundId.UP3:
        return _Frame(caps.C23 + d, caps.C13, caps.C02, caps.C01, caps.C123, caps.C012)
    return _Frame(caps.C13 + d, caps.C23, caps.C01, caps.C02, caps.C123, caps.C012)


def _frame_dual(f: _Frame) -> Optional[np.ndarray]:
    """Dual vector with tau2 = 0 that equalizes the binding rows, or None on a dead branch."""
    outer = f.C012 - f.C02 + f.C13
    den = (f.C02 + f.C23) * outer
    if outer < GUARD_DENOMINATOR or den < GUARD_DENOMINATOR:
        return None
    tau1 = f.C13 / outer
    tau3 = (f.C23 * (f.C012 - f.C02) - f.C13 * (f.C012 - f.C01)) / den
    tau4 = (f.C13 * (f.C012 - f.C01) + f.C02 * (f.C012 - f.C02)) / den
    return np.array([tau1, 0.0, tau3, tau4])


def _clean(tau: np.ndarray) -> np.ndarray:
    # zero-band sign classification leaves round-off negatives of order 1e-12
    tau = np.where((tau < 0.0) & (tau > -FEASIBILITY_TOL), 0.0, tau)
    return tau / tau.sum()


def _delta0_parts(caps: LinkCapacities) -> Tuple[float, np.ndarray]:
    branch1 = caps.C01 + caps.C13
    branch2 = caps.C02 + caps.C23
    value = guarded_ratio(caps.C01 * caps.C13, branch1) + guarded_ratio(caps.C02 * caps.C23, branch2)
    if branch1 < GUARD_DENOMINATOR and branch2 < GUARD_DENOMINATOR:
        return 0.0, np.array([0.0, 0.5, 0.5, 0.0])
    if branch1 < GUARD_DENOMINATOR:
        tau3 = caps.C23 / branch2
        return value, np.array([0.0, 1.0 - tau3, tau3, 0.0])
    tau2 = caps.C13 / branch1
    if branch2 < GUARD_DENOMINATOR:
        return value, np.array([0.0, tau2, 1.0 - tau2, 0.0])
    tau = np.array([0.0, tau2, caps.C23 / branch2, 0.0])
    return value, _clean(tau)


def capacity_delta0(caps: LinkCapacities) -> UpperBound:
    """
    Cut-set value when Delta = 0, C01 C13/(C01+C13) + C02 C23/(C02+C23).

    Its dual vector makes all four dual rows equal, so this is the capacity.
    """
    if classify_delta(caps) is not Sign.ZERO:
        raise PreconditionError(f"capacity_delta0 needs Delta = 0, got Delta={caps.Delta:.6g}")
    value, tau = _delta0_parts(caps)
    return UpperBound(BoundId.CAPACITY_DELTA0, value, tuple(float(t) for t in tau))


def bound_values(caps: LinkCapacities) -> Dict[BoundId, float]:
    """The four bound expressions, each including +delta. A dead denominator zeroes its term."""
    C01, C02, C13, C23 = caps.C01, caps.C02, caps.C13, caps.C23
    C012, C123, Delta, d = caps.C012, caps.C123, caps.Delta, caps.delta
    return {
        BoundId.UP1: guarded_ratio(C13 * (C01 + C23), C01 + C13)
        + guarded_ratio(C23 * Delta, (C012 - C01 + C23) * (C01 + C13)) + d,
        BoundId.UP2: guarded_ratio(C23 * (C02 + C13), C02 + C23)
        + guarded_ratio(C13 * Delta, (C012 - C02 + C13) * (C02 + C23)) + d,
        BoundId.UP3: guarded_ratio(C01 * (C02 + C13), C01 + C13)
        - guarded_ratio(C02 * Delta, (C123 - C13 + C02) * (C01 + C13)) + d,
        BoundId.UP4: guarded_ratio(C02 * (C01 + C23), C02 + C23)
        - guarded_ratio(C01 * Delta, (C123 - C23 + C01) * (C02 + C23)) + d,
    }


def select_bound(caps: LinkCapacities) -> BoundId:
    if classify_delta(caps).nonpositive:
        return BoundId.UP1 if classify_gamma(caps).nonpositive else BoundId.UP2
    return BoundId.UP3 if classify_gamma_prime(caps).nonpositive else BoundId.UP4


def bound_for(caps: LinkCapacities, bound: BoundId) -> UpperBound:
    """
    Evaluate one of UP1..UP4 with its dual vector, whatever region the channel is in.

    Outside its own region the dual vector may leave the simplex; `verify_dual_feasibility`
    then rejects it.
    """
    if bound is BoundId.CAPACITY_DELTA0:
        return capacity_delta0(caps)

    tau_frame = _frame_dual(_frame(caps, bound))
    if tau_frame is None:
        value, tau = _delta0_parts(caps)
        logger.debug(f"{bound.value} has a dead branch; using the Delta = 0 dual vector")
        return UpperBound(bound, value, tuple(float(t) for t in tau), caps.delta, ENLARGED_LINK[bound])

    tau = tau_frame[list(_TAU_ORDER[bound])]
    if tau.min() > -FEASIBILITY_TOL:
        tau = _clean(tau)
    return UpperBound(
        bound=bound,
        value=bound_values(caps)[bound],
        dual_vector=tuple(float(t) for t in tau),
        delta_added=caps.delta,
        enlarged_link=ENLARGED_LINK[bound],
    )


def upper_bound(caps: LinkCapacities) -> UpperBound:
    """The region's bound: UP1/UP2 by Gamma when Delta <= 0, UP3/UP4 by Gamma' otherwise."""
    bound = bound_for(caps, select_bound(caps))
    logger.debug(f"Upper bound {bound.bound.value}: {bound.value:.6g} (delta added {bound.delta_added:.3g})")
    return bound


def enlarged_capacities(caps: LinkCapacities, bound: UpperBound) -> LinkCapacities:
    if bound.enlarged_link is None or bound.delta_added == 0.0:
        return caps
    link = bound.enlarged_link
    return replace(caps, **{link: getattr(caps, link) + bound.delta_added})


def enlarged_value(caps: LinkCapacities, bound_id: BoundId) -> float:
    """Dual objective of the bound's vector on the delta-enlarged channel."""
    bound = bound_for(caps, bound_id)
    return float(np.max(dual_rows(enlarged_capacities(caps, bound), bound.dual_vector)))


def verify_dual_feasibility(caps: LinkCapacities, bound: UpperBound) -> CertificateReport:
    """
    Weak-duality certificate for an emitted bound.

    Checks that tau lies on the simplex, that no dual row of the (enlarged) channel exceeds
    the bound value, and for UP1..UP4 the ceiling on the multiple-access weight of the
    frame dual vector.
    """
    tau = np.asarray(bound.dual_vector, dtype=float)
    rows = dual_rows(enlarged_capacities(caps, bound), tau)
    max_row = float(rows.max())
    violations = []

    if tau.min() < -SCHEDULE_SLACK:
        k = int(tau.argmin())
        violations.append(f"tau{k + 1} = {tau[k]:.3g} is negative")
    if abs(tau.sum() - 1.0) > FEASIBILITY_TOL:
        violations.append(f"tau sums to {tau.sum():.12g}")
    for k, row in enumerate(rows):
        if row > bound.value + AGREEMENT_TOL:
            violations.append(f"dual row {k + 1} = {row:.12g} exceeds bound {bound.value:.12g}")

    cap_margin = None
    f = _frame(caps, bound.bound) if bound.bound in _TAU_ORDER else None
    if f is not None and _frame_dual(f) is not None:
        ceiling = guarded_ratio(f.C02, f.C123 - f.C13 + f.C02)
        frame_tau4 = tau[_TAU_ORDER[bound.bound].index(3)]
        if f.C123 - f.C13 + f.C02 >= GUARD_DENOMINATOR:
            cap_margin = ceiling - frame_tau4
            if cap_margin < -AGREEMENT_TOL:
                violations.append(f"multiple-access weight {frame_tau4:.12g} exceeds its ceiling {ceiling:.12g}")

    report = CertificateReport(
        bound=bound.bound,
        passed=not violations,
        dual_rows=tuple(float(r) for r in rows),
        max_row=max_row,
        tau_sum=float(tau.sum()),
        tau_min=float(tau.min()),
        dual_cap_margin=cap_margin,
        violations=tuple(violations),
    )
    if violations:
        log_certificate_issue(bound.bound.value, "; ".join(violations), "bound not certified")
    return report


def enlargement_cost(caps: LinkCapacities, bound: UpperBound) -> float:
    """R_hat - (value - delta): what the enlargement cost on top of the unenlarged expression."""
    rows = dual_rows(enlarged_capacities(caps, bound), bound.dual_vector)
    return float(rows.max()) - (bound.value - bound.delta_added)

