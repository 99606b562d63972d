"""
The dyadic UHF tower M_2 -> M_4 -> ... with K0 = Z[1/2], and realization of
decreasing right-continuous targets as singular value functions there.

A stage-e element is kept as (value, trace mass) pairs: a diagonal positive
matrix in M_{2^e} whose k-th value fills the next mass * 2^e diagonal slots.
Stages are only materialized as dense matrices for cross-checks (e <= 8).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .algebra import AlgebraElement, MultiMatrixAlgebra
from .errors import (
    BadIntervalError,
    BadNormalizationError,
    DomainMismatchError,
    NegativeClassError,
    NotInDomainError,
    NotNestedError,
    RankOverflowError,
    VariantMismatchError,
)
from .k0_order import (
    LEX_PAIR_SPEC,
    DyadicClass,
    K0Class,
    LexClass,
    SimplicialClass,
    format_class,
    is_dyadic,
    is_infinitesimal,
    is_infinitesimal_bounded,
    lex_state,
)
from .stepfn import (
    DYADICS,
    StepFunction,
    TargetFunction,
    approx_sequence,
    step_from_partition,
    sup_distance,
)
from .svf_engine import svf, svf_projection_indicator

logger = logging.getLogger(__name__)

MAX_DENSE_STAGE = 8
CROSS_CHECK_TOL = 1e-10


def _exponent(x: Fraction) -> int:
    return x.denominator.bit_length() - 1


@dataclass(frozen=True)
class TowerElement:
    """sum_k values[k] p_k with tr(p_k) = masses[k], living in M_{2^stage}."""

    stage: int
    values: Tuple[float, ...] = ()
    masses: Tuple[Fraction, ...] = ()
    # The partition the element was built over, if any
    partition: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        masses = tuple(Fraction(m) for m in self.masses)
        if self.stage < 0:
            raise BadIntervalError(f"stage must be nonnegative, got {self.stage}")
        if len(values) != len(masses):
            raise VariantMismatchError("one trace mass per value is required")
        if any(v <= 0 for v in values) or any(v <= w for v, w in zip(values, values[1:])):
            raise NotInDomainError("values must be positive and strictly descending")
        for m in masses:
            if not (0 < m <= 1) or not is_dyadic(m) or _exponent(m) > self.stage:
                raise NotInDomainError(f"trace mass {m} is not a point of 2^-{self.stage} Z in (0, 1]")
        if sum(masses) > 1:
            raise NotInDomainError(f"trace masses add up to {sum(masses)} > 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "masses", masses)
        if self.partition is not None:
            object.__setattr__(self, "partition", tuple(sorted(Fraction(x) for x in self.partition)))

    @classmethod
    def zero(cls) -> "TowerElement":
        return cls(0, (), (), (Fraction(0),))

    @classmethod
    def from_partition(cls, f: TargetFunction, partition: Sequence[Fraction]) -> "TowerElement":
        """f(x_i) on each cell [x_i, x_{i+1}) of a partition of [0, 1]."""
        points = sorted(Fraction(x) for x in partition)
        if points[0] != 0 or points[-1] > 1:
            raise NotInDomainError("partition must start at 0 and stay inside [0, 1]")
        stage = max(_exponent(x) for x in points)
        values: List[float] = []
        masses: List[Fraction] = []
        for x, y in zip(points, points[1:]):
            v = f(x)
            if v <= 0:
                break
            if values and values[-1] == v:
                masses[-1] += y - x
            else:
                values.append(v)
                masses.append(y - x)
        return cls(stage, tuple(values), tuple(masses), tuple(points))

    @property
    def cumulative_masses(self) -> Tuple[Fraction, ...]:
        out, total = [], Fraction(0)
        for m in self.masses:
            total += m
            out.append(total)
        return tuple(out)

    @property
    def norm(self) -> float:
        return self.values[0] if self.values else 0.0


def _require_dyadic(g: K0Class) -> Fraction:
    if not isinstance(g, DyadicClass):
        raise VariantMismatchError(f"tower classes are dyadic, got {g}")
    if g.value < 0:
        raise NegativeClassError(f"{g} is negative")
    return g.value


def tower_svf(a: TowerElement, g: K0Class) -> float:
    """min{alpha_k : cumulative mass of the first k steps <= g}."""
    x = _require_dyadic(g)
    value = a.values[0] if a.values else 0.0
    for k, c in enumerate(a.cumulative_masses, start=1):
        if c > x:
            break
        value = a.values[k] if k < len(a.values) else 0.0
    return value


def tower_step_function(a: TowerElement) -> StepFunction:
    """s(a) as a step function on the dyadics."""
    if not a.values:
        return StepFunction((Fraction(0),), (0.0,), DYADICS)
    return StepFunction((Fraction(0),) + a.cumulative_masses, a.values + (0.0,), DYADICS)


def tower_matrix(a: TowerElement) -> AlgebraElement:
    """Dense diagonal matrix of a in M_{2^stage}."""
    if a.stage > MAX_DENSE_STAGE:
        raise RankOverflowError(f"stage {a.stage} is too large to materialize (max {MAX_DENSE_STAGE})")
    size = 2 ** a.stage
    diagonal = np.zeros(size)
    start = 0
    for v, m in zip(a.values, a.masses):
        count = int(m * size)
        diagonal[start:start + count] = v
        start += count
    return MultiMatrixAlgebra((size,)).diagonal([diagonal])


def matrix_cross_check(a: TowerElement) -> float:
    """Largest |tower_svf - svf| over all classes k / 2^stage, using the dense matrix."""
    matrix = tower_matrix(a)
    size = 2 ** a.stage
    worst = 0.0
    for k in range(size + 1):
        dense = svf(matrix.algebra, matrix, SimplicialClass((k,)))
        worst = max(worst, abs(dense - tower_svf(a, DyadicClass(Fraction(k, size)))))
    return worst


def _breakpoints(a: TowerElement) -> Tuple[Fraction, ...]:
    if a.partition is not None:
        return a.partition
    return tower_step_function(a).breakpoints


def tower_norm_diff(a: TowerElement, b: TowerElement) -> float:
    """||a - b|| for elements built on nested partitions, as the cellwise sup."""
    pa, pb = set(_breakpoints(a)), set(_breakpoints(b))
    if not (pa <= pb or pb <= pa):
        raise NotNestedError("tower elements are not built over nested partitions")
    sa, sb = tower_step_function(a), tower_step_function(b)
    # Both step functions start at 0, so the generator is never empty
    points = pa | pb | set(sa.breakpoints) | set(sb.breakpoints)
    return max(abs(sa(x) - sb(x)) for x in points if x < 1)


class TraceRow(NamedTuple):
    n: int
    increment: float
    distance: float


@dataclass(frozen=True, eq=False)
class RealizationTrace:
    target: TargetFunction
    partitions: Tuple[Tuple[Fraction, ...], ...]
    elements: Tuple[TowerElement, ...]
    distances: Tuple[float, ...]
    increments: Tuple[float, ...]
    f0: float = 0.0

    def rows(self) -> List[TraceRow]:
        return [TraceRow(n, i, d) for n, (i, d) in enumerate(zip(self.increments, self.distances))]

    def envelope_violations(self) -> List[int]:
        """Rounds n breaking ||s(a_n) - f|| < f(0)/2^n or ||a_n - a_{n-1}|| < f(0)/2^(n-1)."""
        if self.f0 == 0:
            return [n for n, row in enumerate(self.rows()) if row.distance or row.increment]
        return [
            n
            for n, row in enumerate(self.rows())
            if row.distance >= self.f0 / 2 ** n or row.increment >= self.f0 / 2 ** (n - 1)
        ]

    def consistency_violations(self) -> List[Tuple[int, Fraction]]:
        """Points of F_N and its midpoints where s(a_n) differs from g_{F_n}^f."""
        last = self.partitions[-1]
        probes = set(last) | {(x + y) / 2 for x, y in zip(last, last[1:])}
        out = []
        for n, (partition, a) in enumerate(zip(self.partitions, self.elements)):
            expected = step_from_partition(self.target, partition)
            for x in sorted(probes):
                if tower_svf(a, DyadicClass(x)) != expected(x):
                    out.append((n, x))
        return out


def realize(f: TargetFunction, N: int) -> RealizationTrace:
    """Tower elements a_0, ..., a_N with s(a_n) -> f geometrically."""
    if f.domain != DYADICS:
        raise DomainMismatchError(f"realization needs a dyadic target, got {f.domain.kind.value}")
    if N < 0:
        raise BadIntervalError(f"N must be nonnegative, got {N}")
    if f(1) != 0:
        raise BadNormalizationError(f"f(1) must be 0 in the unital tower, got {f(1)}")

    f0 = f(0)
    if f0 == 0:
        zero = TowerElement.zero()
        return RealizationTrace(f, ((Fraction(0),),), (zero,), (0.0,), (0.0,), 0.0)

    # f(1) = 0 keeps every partition inside [0, 1]
    partitions = approx_sequence(f, f0, N, search_bound=1)
    elements, distances, increments = [], [], []
    for n, partition in enumerate(partitions):
        a = TowerElement.from_partition(f, partition)
        distances.append(sup_distance(tower_step_function(a), f))
        increments.append(tower_norm_diff(a, elements[-1]) if elements else a.norm)
        elements.append(a)
        logger.info("Round %s: stage %s, %s steps, distance %s", n, a.stage, len(a.values), distances[-1])
    return RealizationTrace(f, tuple(partitions), tuple(elements), tuple(distances), tuple(increments), f0)


def _next_breakpoint_gap(a: TowerElement, x: Fraction) -> Optional[Fraction]:
    ahead = [c - x for c in a.cumulative_masses + (Fraction(1),) if c > x]
    return min(ahead) if ahead else None


def _check_deltas(deltas: Sequence) -> List[Fraction]:
    out = [Fraction(d) for d in deltas]
    for d in out:
        if d <= 0 or not is_dyadic(d):
            raise BadIntervalError(f"probe steps must be positive dyadics, got {d}")
    return out


def probe_drops(a: TowerElement, g: K0Class, deltas: Sequence) -> List[Tuple[Fraction, float]]:
    """s_g(a) - s_{g+delta}(a) for every delta."""
    x = _require_dyadic(g)
    base = tower_svf(a, g)
    return [(d, base - tower_svf(a, DyadicClass(x + d))) for d in _check_deltas(deltas)]


def right_continuity_probe(a: TowerElement, g: K0Class, deltas: Sequence) -> float:
    """Largest drop s_g(a) - s_{g+delta}(a) over the deltas below the gap to the next breakpoint."""
    x = _require_dyadic(g)
    gap = _next_breakpoint_gap(a, x)
    drops = [drop for d, drop in probe_drops(a, g, deltas) if gap is None or d < gap]
    return max(drops, default=0.0)


class CounterexampleRow(NamedTuple):
    label: str
    k0_class: str
    value: int
    expected: int


@dataclass(frozen=True)
class CounterexampleReport:
    rows: Tuple[CounterexampleRow, ...]
    converges: bool
    infinitesimal_is_state_kernel: bool

    @property
    def passed(self) -> bool:
        return (
            all(r.value == r.expected for r in self.rows)
            and self.converges
            and self.infinitesimal_is_state_kernel
        )


def counterexample_lex(terms: int = 100) -> CounterexampleReport:
    """s(p) on Q (+) Z lex is not lower semicontinuous.

    [p]_0 = (1, 0). The classes (1 + 1/n, 1) converge to (1, 1) in the product
    topology, s vanishes along the sequence and equals 1 at the limit.
    """
    p = LexClass(Fraction(1), 0)
    limit = LexClass(Fraction(1), 1)
    sequence = [LexClass(1 + Fraction(1, n), 1) for n in range(1, terms + 1)]

    rows = [
        CounterexampleRow(str(n), format_class(g), svf_projection_indicator(p, g), 0)
        for n, g in enumerate(sequence, start=1)
    ]
    rows.append(CounterexampleRow("limit", format_class(limit), svf_projection_indicator(p, limit), 1))
    rows.append(CounterexampleRow("control", format_class(p), svf_projection_indicator(p, p), 0))

    # Second coordinate constant and equal to the limit's, first converging
    converges = all(g.v == limit.v and g.u - limit.u == Fraction(1, n) for n, g in enumerate(sequence, start=1))
    difference = limit - p
    infinitesimal_is_state_kernel = (
        is_infinitesimal(LEX_PAIR_SPEC, difference)
        and is_infinitesimal_bounded(LEX_PAIR_SPEC, difference)
        and lex_state(difference) == 0
        and all(not is_infinitesimal(LEX_PAIR_SPEC, g - p) and lex_state(g - p) > 0 for g in sequence)
    )
    report = CounterexampleReport(tuple(rows), converges, infinitesimal_is_state_kernel)
    logger.info("Lex counterexample: %s rows, passed=%s", len(rows), report.passed)
    return report
