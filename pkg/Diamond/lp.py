"""
Linear Programming Module

Small dense LPs used as the ground-truth oracle for the closed-form rates and bounds:
- a two-phase tableau simplex with Bland's rule and an iteration cap
- an exhaustive basis enumerator used as an independent cross-check
- builders for the cut-set primal and dual programs
- lattice scans of the schedule simplex for non-linear rate expressions
"""

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from Diamond.channel import LinkCapacities, cut_matrix
from Diamond.settings import (
    FEASIBILITY_TOL,
    GRID_CHUNK,
    MIN_GRID_RESOLUTION,
    PIVOT_TOL,
    REDUCED_COST_TOL,
    SCHEDULE_SLACK,
    SIMPLEX_ITERATION_FACTOR,
    SIMPLEX_MAX_ROWS,
    SIMPLEX_MAX_VARIABLES,
    VERTEX_MAX_BASES,
    VERTEX_MAX_ROWS,
    VERTEX_MAX_VARIABLES,
)
from Diamond.utilities.errors import SolverFailure, StructuralError
from Diamond.utilities.logging_config import get_logger, log_debug

logger = get_logger(__name__)

MODE_LABELS = ("broadcast", "forward_1", "forward_2", "multiple_access")


class Sense(str, Enum):
    MAX = "MAX"
    MIN = "MIN"


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Status(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass(frozen=True)
class Schedule:
    """Time fractions of the four transmission modes."""

    t1: float
    t2: float
    t3: float
    t4: float

    def __post_init__(self):
        values = [float(getattr(self, name)) for name in ("t1", "t2", "t3", "t4")]
        for name, value in zip(("t1", "t2", "t3", "t4"), values):
            if not math.isfinite(value) or value < -SCHEDULE_SLACK or value > 1.0 + SCHEDULE_SLACK:
                raise StructuralError(f"time fraction {name}={value} outside [0, 1]")
            object.__setattr__(self, name, value)
        if abs(sum(values) - 1.0) > FEASIBILITY_TOL:
            raise StructuralError(f"time fractions sum to {sum(values)}, expected 1")

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Schedule":
        t1, t2, t3, t4 = (float(v) for v in values)
        return cls(t1, t2, t3, t4)

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3, self.t4])

    def as_dict(self) -> dict:
        return {label: value for label, value in zip(MODE_LABELS, self.as_array())}


@dataclass(frozen=True)
class LinearProgram:
    """
    Dense LP: optimize objective @ x subject to constraint_matrix @ x (relation) rhs,
    with each variable bounded below by 0 or unbounded (-inf).
    """

    sense: Sense
    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    relations: Tuple[Relation, ...]
    variable_lower_bounds: Optional[np.ndarray] = None
    variable_names: Tuple[str, ...] = ()

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        A = np.asarray(self.constraint_matrix, dtype=float)
        if A.size == 0:
            A = A.reshape(0, c.size)
        b = np.asarray(self.rhs, dtype=float).ravel()

        if A.ndim != 2:
            raise StructuralError(f"constraint matrix must be 2-D, got shape {A.shape}")
        if A.shape != (b.size, c.size):
            raise StructuralError(
                f"constraint matrix shape {A.shape} does not match {b.size} rows x {c.size} variables")
        try:
            relations = tuple(Relation(r) for r in self.relations)
        except ValueError as e:
            raise StructuralError(f"unknown relation: {e}")
        if len(relations) != b.size:
            raise StructuralError(f"{len(relations)} relations given for {b.size} rows")

        if self.variable_lower_bounds is None:
            lower = np.zeros(c.size)
        else:
            lower = np.asarray(self.variable_lower_bounds, dtype=float).ravel()
        if lower.size != c.size:
            raise StructuralError(f"{lower.size} lower bounds given for {c.size} variables")
        if not np.all((lower == 0.0) | np.isneginf(lower)):
            raise StructuralError("variable lower bounds must be 0 or -inf")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise StructuralError("LP data must be finite")

        object.__setattr__(self, "sense", Sense(self.sense))
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraint_matrix", A)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "relations", relations)
        object.__setattr__(self, "variable_lower_bounds", lower)
        object.__setattr__(self, "variable_names", tuple(self.variable_names))

    @property
    def n_variables(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.rhs.size

    def row_scales(self) -> np.ndarray:
        scales = np.max(np.abs(self.constraint_matrix), axis=1, initial=0.0)
        return np.where(scales > 0.0, scales, 1.0)

    def row_residuals(self, x: np.ndarray) -> np.ndarray:
        """(A x - b) per row on rows normalized by their largest coefficient."""
        return (self.constraint_matrix @ x - self.rhs) / self.row_scales()

    def max_violation(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        residual = self.row_residuals(x)
        worst = 0.0
        for r, relation in zip(residual, self.relations):
            if relation is Relation.LE:
                worst = max(worst, r)
            elif relation is Relation.GE:
                worst = max(worst, -r)
            else:
                worst = max(worst, abs(r))
        bounded = self.variable_lower_bounds == 0.0
        if np.any(bounded):
            worst = max(worst, float(np.max(-x[bounded], initial=0.0)))
        return float(worst)

    def objective_at(self, x: Sequence[float]) -> float:
        return float(self.objective @ np.asarray(x, dtype=float))


@dataclass(frozen=True)
class LpSolution:
    status: Status
    objective_value: float = math.nan
    variables: np.ndarray = field(default_factory=lambda: np.empty(0))
    active_constraints: FrozenSet[int] = frozenset()
    duals: Optional[np.ndarray] = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class _StandardForm:
    """min cost @ z, matrix @ z = rhs, z >= 0, rhs >= 0, rows normalized."""

    matrix: np.ndarray
    rhs: np.ndarray
    cost: np.ndarray
    columns: List[Tuple[int, float]]    # (original variable, +1/-1) per structural column
    row_factor: np.ndarray              # standard row i = original row i * row_factor[i]


def _standard_form(lp: LinearProgram) -> _StandardForm:
    columns = []
    for j in range(lp.n_variables):
        columns.append((j, 1.0))
        if np.isneginf(lp.variable_lower_bounds[j]):
            columns.append((j, -1.0))

    m = lp.n_rows
    n_struct = len(columns)
    n_slack = sum(1 for r in lp.relations if r is not Relation.EQ)
    matrix = np.zeros((m, n_struct + n_slack))
    cost = np.zeros(n_struct + n_slack)
    sense_sign = -1.0 if lp.sense is Sense.MAX else 1.0

    for k, (j, sign) in enumerate(columns):
        matrix[:, k] = sign * lp.constraint_matrix[:, j]
        cost[k] = sense_sign * sign * lp.objective[j]

    scales = lp.row_scales()
    slack = n_struct
    for i, relation in enumerate(lp.relations):
        if relation is Relation.LE:
            matrix[i, slack] = scales[i]
            slack += 1
        elif relation is Relation.GE:
            matrix[i, slack] = -scales[i]
            slack += 1

    # slacks carry the row scale so every normalized row keeps unit slack coefficients
    factor = np.where(lp.rhs < 0.0, -1.0, 1.0) / scales
    matrix = matrix * factor[:, None]
    rhs = lp.rhs * factor
    return _StandardForm(matrix=matrix, rhs=rhs, cost=cost, columns=columns, row_factor=factor)


def _recover(lp: LinearProgram, form: _StandardForm, z: np.ndarray) -> np.ndarray:
    x = np.zeros(lp.n_variables)
    for k, (j, sign) in enumerate(form.columns):
        x[j] += sign * z[k]
    return x


def feasibility_tolerance(lp: LinearProgram) -> float:
    """FEASIBILITY_TOL scaled by the largest LP coefficient, so rounding at high SNR is not a failure."""
    largest = max(1.0,
                  float(np.max(np.abs(lp.rhs), initial=0.0)),
                  float(np.max(np.abs(lp.constraint_matrix), initial=0.0)))
    return FEASIBILITY_TOL * largest


def _active_rows(lp: LinearProgram, x: np.ndarray) -> FrozenSet[int]:
    residual = lp.row_residuals(x)
    return frozenset(int(i) for i in np.flatnonzero(np.abs(residual) <= FEASIBILITY_TOL))


class _Tableau:
    """
    Dense tableau [A | I | b] with one artificial column per row.

    The artificial block always holds B^-1, which gives the row multipliers at the end.
    """

    def __init__(self, form: _StandardForm):
        m, n = form.matrix.shape
        self.m, self.n = m, n
        self.table = np.hstack([form.matrix, np.eye(m), form.rhs[:, None]])
        self.basis = list(range(n, n + m))
        self.iteration_cap = SIMPLEX_ITERATION_FACTOR * (m + n + m)
        self.pivots = 0

    def pivot(self, row: int, col: int):
        self.table[row] /= self.table[row, col]
        for i in range(self.m):
            if i != row and self.table[i, col] != 0.0:
                self.table[i] -= self.table[i, col] * self.table[row]
        self.basis[row] = col
        self.pivots += 1

    def values(self) -> np.ndarray:
        z = np.zeros(self.n + self.m)
        z[self.basis] = self.table[:, -1]
        return z

    def refined_values(self, form: _StandardForm) -> np.ndarray:
        """Basic solution recomputed from B z_B = b, dropping the rounding the pivots accumulated."""
        full = np.hstack([form.matrix, np.eye(self.m)])
        try:
            basic = np.linalg.solve(full[:, self.basis], form.rhs)
        except np.linalg.LinAlgError:
            return self.values()
        z = np.zeros(self.n + self.m)
        z[self.basis] = basic
        return z

    def run(self, cost: np.ndarray, allowed: int) -> Status:
        """Bland's rule on columns [0, allowed). Returns OPTIMAL or UNBOUNDED."""
        for _ in range(self.iteration_cap):
            body = self.table[:, :allowed]
            reduced = cost[:allowed] - cost[self.basis] @ body
            entering = np.flatnonzero(reduced < -REDUCED_COST_TOL)
            if entering.size == 0:
                return Status.OPTIMAL
            col = int(entering[0])

            column = self.table[:, col]
            candidates = np.flatnonzero(column > PIVOT_TOL)
            if candidates.size == 0:
                return Status.UNBOUNDED
            ratios = self.table[candidates, -1] / column[candidates]
            best = ratios.min()
            ties = candidates[ratios <= best + PIVOT_TOL]
            row = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(row, col)

        raise SolverFailure(f"simplex exceeded {self.iteration_cap} iterations")

    def drive_out_artificials(self):
        for row, var in enumerate(self.basis):
            if var < self.n:
                continue
            usable = np.flatnonzero(np.abs(self.table[row, :self.n]) > PIVOT_TOL)
            if usable.size:
                self.pivot(row, int(usable[0]))
            # otherwise the row is redundant and its artificial stays basic at zero


def solve_simplex(lp: LinearProgram) -> LpSolution:
    """
    Two-phase tableau simplex with Bland's anti-cycling rule.

    **Returns:** OPTIMAL solutions carry the row multipliers in `duals` (dual sign
    convention of the original sense) and the set of rows holding with equality.

    **Raises:** StructuralError above the size caps, SolverFailure when a phase exceeds
    its iteration cap or the final point fails the feasibility re-check.
    """
    if lp.n_variables > SIMPLEX_MAX_VARIABLES or lp.n_rows > SIMPLEX_MAX_ROWS:
        raise StructuralError(
            f"LP of {lp.n_variables} variables x {lp.n_rows} rows exceeds the simplex cap "
            f"({SIMPLEX_MAX_VARIABLES} x {SIMPLEX_MAX_ROWS})")

    form = _standard_form(lp)
    tableau = _Tableau(form)
    m, n = tableau.m, tableau.n

    phase_one = np.concatenate([np.zeros(n), np.ones(m)])
    tableau.run(phase_one, n + m)
    infeasibility = float(phase_one @ tableau.values())
    if infeasibility > FEASIBILITY_TOL:
        log_debug("Simplex phase I found no feasible point", infeasibility=f"{infeasibility:.3g}")
        return LpSolution(status=Status.INFEASIBLE)
    tableau.drive_out_artificials()

    phase_two = np.concatenate([form.cost, np.zeros(m)])
    if tableau.run(phase_two, n) is Status.UNBOUNDED:
        log_debug("Simplex phase II detected an unbounded ray")
        return LpSolution(status=Status.UNBOUNDED)

    tol = feasibility_tolerance(lp)
    z = tableau.refined_values(form)
    if np.min(z, initial=0.0) < -tol:
        raise SolverFailure(f"simplex returned a negative basic value {np.min(z):.3g}")
    x = _recover(lp, form, np.clip(z, 0.0, None))
    violation = lp.max_violation(x)
    if violation > tol:
        raise SolverFailure(f"simplex returned a point violating the constraints by {violation:.3g}")

    multipliers = phase_two[tableau.basis] @ tableau.table[:, n:n + m]
    duals = multipliers * form.row_factor
    if lp.sense is Sense.MAX:
        duals = -duals

    log_debug("Simplex solved", rows=m, columns=n, pivots=tableau.pivots)
    return LpSolution(
        status=Status.OPTIMAL,
        objective_value=lp.objective_at(x),
        variables=x,
        active_constraints=_active_rows(lp, x),
        duals=duals,
    )


def enumerate_vertices(lp: LinearProgram) -> LpSolution:
    """
    Exhaustive search over basic solutions of the standard form.

    Only meaningful for programs with a bounded optimum; an unbounded objective is not
    detected, the best vertex is returned instead.
    """
    if lp.n_variables > VERTEX_MAX_VARIABLES or lp.n_rows > VERTEX_MAX_ROWS:
        raise StructuralError(
            f"LP of {lp.n_variables} variables x {lp.n_rows} rows exceeds the enumeration cap "
            f"({VERTEX_MAX_VARIABLES} x {VERTEX_MAX_ROWS})")

    form = _standard_form(lp)
    A, b = form.matrix, form.rhs
    n = A.shape[1]

    rank = np.linalg.matrix_rank(A) if A.size else 0
    if A.size and np.linalg.matrix_rank(np.column_stack([A, b])) > rank:
        return LpSolution(status=Status.INFEASIBLE)

    kept: List[int] = []
    for i in range(A.shape[0]):
        if np.linalg.matrix_rank(A[kept + [i]]) > len(kept):
            kept.append(i)
    A, b = A[kept], b[kept]
    r = len(kept)

    n_bases = math.comb(n, r)
    if n_bases > VERTEX_MAX_BASES:
        raise StructuralError(f"{n_bases} candidate bases exceed the enumeration cap {VERTEX_MAX_BASES}")

    best_value, best_z = math.inf, None
    for basis in itertools.combinations(range(n), r):
        z = np.zeros(n)
        if r:
            B = A[:, basis]
            if np.linalg.matrix_rank(B) < r:
                continue
            z[list(basis)] = np.linalg.solve(B, b)
        if np.any(z < -FEASIBILITY_TOL):
            continue
        value = float(form.cost @ z)
        if value < best_value - FEASIBILITY_TOL:
            best_value, best_z = value, z

    if best_z is None:
        return LpSolution(status=Status.INFEASIBLE)

    x = _recover(lp, form, np.clip(best_z, 0.0, None))
    log_debug("Vertex enumeration finished", bases=n_bases, rank=r)
    return LpSolution(
        status=Status.OPTIMAL,
        objective_value=lp.objective_at(x),
        variables=x,
        active_constraints=_active_rows(lp, x),
    )


def complementary_slackness_residual(lp: LinearProgram, solution: LpSolution) -> float:
    """Largest |y_i * slack_i| or |x_j * reduced_cost_j| at an optimal simplex solution."""
    if solution.duals is None or not solution.optimal:
        raise StructuralError("complementary slackness needs an optimal solution with duals")
    x, y = solution.variables, solution.duals
    row_slack = lp.rhs - lp.constraint_matrix @ x
    reduced = lp.objective - lp.constraint_matrix.T @ y
    return float(max(np.max(np.abs(y * row_slack), initial=0.0),
                     np.max(np.abs(x * reduced), initial=0.0)))


CUTSET_VARIABLES = ("t1", "t2", "t3", "t4", "R")
DUAL_VARIABLES = ("tau1", "tau2", "tau3", "tau4", "R")


def build_cutset_primal(caps: LinkCapacities) -> LinearProgram:
    """
    max R  s.t.  R <= sum_i t_i K[i, j] for every cut j,  sum t = 1,  t >= 0.
    """
    K = cut_matrix(caps)
    rows = [np.concatenate([-K[:, j], [1.0]]) for j in range(4)]
    rows.append(np.array([1.0, 1.0, 1.0, 1.0, 0.0]))
    return LinearProgram(
        sense=Sense.MAX,
        objective=np.array([0.0, 0.0, 0.0, 0.0, 1.0]),
        constraint_matrix=np.array(rows),
        rhs=np.array([0.0, 0.0, 0.0, 0.0, 1.0]),
        relations=(Relation.LE,) * 4 + (Relation.EQ,),
        variable_names=CUTSET_VARIABLES,
    )


def build_cutset_dual(caps: LinkCapacities) -> LinearProgram:
    """
    min R  s.t.  R >= sum_j tau_j K[i, j] for every mode i,  sum tau = 1,  tau >= 0.
    """
    K = cut_matrix(caps)
    rows = [np.concatenate([-K[i, :], [1.0]]) for i in range(4)]
    rows.append(np.array([1.0, 1.0, 1.0, 1.0, 0.0]))
    return LinearProgram(
        sense=Sense.MIN,
        objective=np.array([0.0, 0.0, 0.0, 0.0, 1.0]),
        constraint_matrix=np.array(rows),
        rhs=np.array([0.0, 0.0, 0.0, 0.0, 1.0]),
        relations=(Relation.GE,) * 4 + (Relation.EQ,),
        variable_names=DUAL_VARIABLES,
    )


def dual_rows(caps: LinkCapacities, tau: Sequence[float]) -> np.ndarray:
    """The four mode rows of the dual program evaluated at tau."""
    return cut_matrix(caps) @ np.asarray(tau, dtype=float)


def cutset_optimum(caps: LinkCapacities) -> LpSolution:
    solution = solve_simplex(build_cutset_primal(caps))
    if not solution.optimal:
        raise SolverFailure(f"cut-set program reported {solution.status.value}")
    return solution


def iter_simplex_grid(resolution: int, chunk: int = GRID_CHUNK) -> Iterator[np.ndarray]:
    """
    Yield (k, 4) arrays of schedules whose entries are multiples of 1/resolution,
    covering the whole lattice on the probability simplex exactly once.
    """
    n = int(resolution)
    if n < 1:
        raise StructuralError(f"grid resolution must be >= 1, got {resolution}")
    for i in range(n + 1):
        rest = n - i
        total, j = np.tril_indices(rest + 1)
        points = np.column_stack([
            np.full(total.size, i),
            j,
            total - j,
            rest - total,
        ]) / n
        for start in range(0, points.shape[0], chunk):
            yield points[start:start + chunk]


def grid_search_schedule(rate_fn: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray],
                         resolution: int, chunk: int = GRID_CHUNK) -> Tuple[Schedule, float]:
    """
    Exhaustive lattice scan of the schedule simplex.

    rate_fn receives four equal-length arrays (t1, t2, t3, t4) and returns the rate at each point.
    """
    if resolution < MIN_GRID_RESOLUTION:
        raise StructuralError(f"grid resolution must be >= {MIN_GRID_RESOLUTION}, got {resolution}")

    best_rate, best_point = -math.inf, None
    for points in iter_simplex_grid(resolution, chunk):
        rates = np.broadcast_to(np.asarray(rate_fn(points[:, 0], points[:, 1], points[:, 2], points[:, 3]),
                                           dtype=float), (points.shape[0],))
        k = int(np.argmax(rates))
        if rates[k] > best_rate:
            best_rate, best_point = float(rates[k]), points[k]

    log_debug("Schedule grid search finished", resolution=resolution, rate=f"{best_rate:.6g}")
    return Schedule.from_array(best_point), best_rate
