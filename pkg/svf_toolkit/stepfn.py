"""
Right-continuous decreasing step functions on a scalar domain S in R+ (0 in S).

Domain points are exact fractions; function values are floats. A target
function declares its left-jump points so that the refinement procedure can
snap cut points onto them instead of bisecting forever next to a jump.
"""

import logging
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .errors import (
    BadIntervalError,
    DoesNotVanishError,
    DomainMismatchError,
    EmptyPartitionError,
    JumpNotInDomainError,
    NonTerminationError,
    NotInDomainError,
    TargetContractError,
)
from .k0_order import format_dyadic, format_fraction, is_dyadic

logger = logging.getLogger(__name__)

# Points tried when approaching a point from the left or bisecting
MAX_BISECTIONS = 200


class DomainKind(str, Enum):
    DYADIC = "dyadic"
    RATIONAL = "rational"
    FINITE_GRID = "finite_grid"


@dataclass(frozen=True)
class ScalarDomain:
    """A totally ordered set S of exact nonnegative numbers containing 0."""

    kind: DomainKind
    grid: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.kind is DomainKind.FINITE_GRID:
            grid = tuple(sorted({Fraction(x) for x in self.grid}))
            if not grid or grid[0] != 0:
                raise NotInDomainError("a finite grid must contain 0 and no negative points")
            object.__setattr__(self, "grid", grid)

    def contains(self, x) -> bool:
        x = Fraction(x)
        if x < 0:
            return False
        if self.kind is DomainKind.DYADIC:
            return is_dyadic(x)
        if self.kind is DomainKind.RATIONAL:
            return True
        return x in self.grid

    def require(self, x) -> Fraction:
        x = Fraction(x)
        if not self.contains(x):
            raise NotInDomainError(f"{x} is not a point of the {self.kind.value} domain")
        return x

    def format(self, x: Fraction) -> str:
        if self.kind is DomainKind.DYADIC:
            return format_dyadic(Fraction(x))
        return format_fraction(Fraction(x))

    def previous(self, x: Fraction) -> Optional[Fraction]:
        """Largest grid point strictly below x (finite grids only)."""
        i = bisect_left(self.grid, x)
        return self.grid[i - 1] if i > 0 else None

    def midpoint(self, lo: Fraction, hi: Fraction) -> Optional[Fraction]:
        """A domain point strictly between lo and hi, or None if there is none."""
        if self.kind is not DomainKind.FINITE_GRID:
            return (lo + hi) / 2
        inside = self.grid[bisect_right(self.grid, lo):bisect_left(self.grid, hi)]
        return inside[len(inside) // 2] if inside else None

    def points_left_of(self, lo: Fraction, x: Fraction) -> Iterator[Fraction]:
        """Increasing domain points of [lo, x) approaching x."""
        if self.kind is DomainKind.FINITE_GRID:
            prev = self.previous(x)
            if prev is not None and prev >= lo:
                yield prev
            return
        for k in range(1, MAX_BISECTIONS + 1):
            yield x - (x - lo) / 2 ** k

    def search_points(self, start: Fraction, bound) -> Iterator[Fraction]:
        """Increasing domain points from start up to bound, growing geometrically."""
        bound = Fraction(bound)
        if self.kind is DomainKind.FINITE_GRID:
            for x in self.grid:
                if start <= x <= bound:
                    yield x
            return
        yield start
        x = Fraction(1)
        while x <= bound:
            if x > start:
                yield x
            x *= 2


DYADICS = ScalarDomain(DomainKind.DYADIC)
RATIONALS = ScalarDomain(DomainKind.RATIONAL)


def finite_grid(points: Sequence) -> ScalarDomain:
    return ScalarDomain(DomainKind.FINITE_GRID, tuple(Fraction(x) for x in points))


@dataclass(frozen=True, eq=False)
class TargetFunction:
    """A decreasing right-continuous f: S -> R+ with its declared left jumps."""

    evaluator: Callable[[Fraction], float]
    domain: ScalarDomain = DYADICS
    jumps: Tuple[Tuple[Fraction, float], ...] = ()
    left_limit_evaluator: Optional[Callable[[Fraction], float]] = None
    limit_at_infinity: float = 0.0
    # How the function was described, kept for serialization
    source: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        jumps = tuple(sorted((Fraction(x), float(size)) for x, size in self.jumps))
        object.__setattr__(self, "jumps", jumps)

    def __call__(self, x) -> float:
        return float(self.evaluator(Fraction(x)))

    def jump_at(self, x: Fraction) -> float:
        for point, size in self.jumps:
            if point == x:
                return size
        return 0.0

    def left_limit(self, x) -> float:
        """f(x-): inf of f over [0, x), and f(0) at 0."""
        x = Fraction(x)
        if x == 0:
            return self(0)
        if self.domain.kind is DomainKind.FINITE_GRID:
            return self(self.domain.previous(x))
        if self.left_limit_evaluator is not None:
            return float(self.left_limit_evaluator(x))
        return self(x) + self.jump_at(x)

    def validate(self, samples: Sequence = ()) -> None:
        """Check declared jumps and monotonicity on the given sample points."""
        for x, size in self.jumps:
            if not self.domain.contains(x):
                raise JumpNotInDomainError(f"declared jump {x} is not in the domain")
            if size <= 0:
                raise TargetContractError(f"declared jump at {x} has non-positive size {size}")
        points = sorted(Fraction(x) for x in samples)
        values = [self(x) for x in points]
        for (x, fx), (y, fy) in zip(zip(points, values), zip(points[1:], values[1:])):
            if fy > fx:
                raise TargetContractError(f"target increases between {x} and {y}")


@dataclass(frozen=True)
class StepFunction:
    """values[i] on [x_i, x_{i+1}) and values[-1] on [x_{m-1}, infinity)."""

    breakpoints: Tuple[Fraction, ...]
    values: Tuple[float, ...]
    domain: ScalarDomain = DYADICS

    def __post_init__(self):
        bps = tuple(Fraction(x) for x in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if not bps or bps[0] != 0:
            raise EmptyPartitionError("a step function starts at 0")
        if len(bps) != len(vals):
            raise TargetContractError("one value per breakpoint is required")
        if any(x >= y for x, y in zip(bps, bps[1:])):
            raise TargetContractError("breakpoints must be strictly increasing")
        if any(v < w for v, w in zip(vals, vals[1:])) or vals[-1] < 0:
            raise TargetContractError("step values must be decreasing and nonnegative")
        for x in bps:
            self.domain.require(x)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @property
    def tail(self) -> float:
        return self.values[-1]

    @property
    def compact_support(self) -> bool:
        return self.tail == 0

    def __call__(self, x) -> float:
        return self.values[bisect_right(self.breakpoints, Fraction(x)) - 1]

    evaluate = __call__

    def left_limit(self, x) -> float:
        x = Fraction(x)
        if x == 0:
            return self.values[0]
        return self.values[bisect_left(self.breakpoints, x) - 1]

    def jumps(self) -> List[Tuple[Fraction, float]]:
        """Left-jump points with their sizes."""
        return [
            (x, prev - cur)
            for x, prev, cur in zip(self.breakpoints[1:], self.values, self.values[1:])
            if prev > cur
        ]

    def as_target(self) -> TargetFunction:
        return TargetFunction(
            evaluator=self,
            domain=self.domain,
            jumps=tuple(self.jumps()),
            left_limit_evaluator=self.left_limit,
            limit_at_infinity=self.tail,
            source={
                "breakpoints": [self.domain.format(x) for x in self.breakpoints],
                "values": list(self.values),
            },
        )

    def csv_rows(self) -> List[Tuple[str, float]]:
        return [(self.domain.format(x), v) for x, v in zip(self.breakpoints, self.values)]


def constant_target(c: float, domain: ScalarDomain = DYADICS) -> TargetFunction:
    return TargetFunction(lambda x: c, domain, limit_at_infinity=c, source={"name": "constant", "value": c})


def linear_target(domain: ScalarDomain = DYADICS) -> TargetFunction:
    """t -> max(0, 1 - t)."""
    return TargetFunction(lambda x: float(max(Fraction(0), 1 - x)), domain, source={"name": "one_minus_t"})


def reciprocal_target(domain: ScalarDomain = DYADICS) -> TargetFunction:
    """t -> 1 / (1 + t); vanishes at infinity without compact support."""
    return TargetFunction(lambda x: float(1 / (1 + x)), domain, source={"name": "reciprocal"})


def indicator_target(cut, height: float = 1.0, domain: ScalarDomain = DYADICS) -> TargetFunction:
    """height on [0, cut), 0 afterwards."""
    cut = Fraction(cut)
    return TargetFunction(
        lambda x: height if x < cut else 0.0,
        domain,
        jumps=((cut, height),),
        source={"name": "indicator", "cut": domain.format(cut), "height": height},
    )


def step_target(breakpoints: Sequence, values: Sequence[float], domain: ScalarDomain = DYADICS) -> TargetFunction:
    return StepFunction(tuple(breakpoints), tuple(values), domain).as_target()


def step_from_partition(f: TargetFunction, partition: Sequence) -> StepFunction:
    """g_F^f: f at the left endpoint of each cell of F, 0 from max F on."""
    if not partition:
        raise EmptyPartitionError("partition is empty")
    points = sorted({f.domain.require(x) for x in partition})
    if points[0] != 0:
        raise NotInDomainError("partition must contain 0")
    values = [f(x) for x in points[:-1]] + [0.0]
    return StepFunction(tuple(points), tuple(values), f.domain)


def sup_distance(g: StepFunction, f: TargetFunction) -> float:
    """sup over S of |g - f|, exact through left limits of f at the breakpoints."""
    if g.domain != f.domain:
        raise DomainMismatchError(f"{g.domain.kind.value} step function vs {f.domain.kind.value} target")
    worst = 0.0
    bps = g.breakpoints
    for x, y, v in zip(bps, bps[1:], g.values):
        # f is monotone on [x, y), so the extremes are f(x) and f(y-)
        worst = max(worst, abs(v - f(x)), abs(v - f.left_limit(y)))
    worst = max(worst, abs(g.tail - f(bps[-1])), abs(g.tail - f.limit_at_infinity))
    return worst


def left_jump_set(f: TargetFunction, b) -> List[Tuple[Fraction, float]]:
    """Declared left-jump points in (0, b] with their validated sizes."""
    b = f.domain.require(b)
    out = []
    for x, _ in f.jumps:
        if not f.domain.contains(x):
            raise JumpNotInDomainError(f"declared jump {x} is not in the domain")
        if 0 < x <= b:
            drop = f.left_limit(x) - f(x)
            if drop <= 0:
                raise TargetContractError(f"declared jump at {x} does not drop")
            out.append((x, drop))
    return out


def _find_cut(f: TargetFunction, a: Fraction, b: Fraction, lam: float, mu: float) -> Fraction:
    """A point c in (a, b) with f(a) - f(c) > lam and f(a) - f(c-) < lam + mu."""
    fa = f(a)

    def h(x):
        return fa - f(x)

    def h_left(x):
        return fa - f.left_limit(x)

    # If {h > lam} starts at a jump, that jump is the cut
    upper = b
    for x, _ in f.jumps:
        if a < x < b and h(x) > lam:
            if h_left(x) <= lam:
                return x
            upper = x
            break

    # Otherwise h crosses lam continuously somewhere in (a, upper)
    hi = next((x for x in f.domain.points_left_of(a, upper) if h(x) > lam), None)
    if hi is None:
        raise NonTerminationError(f"no point of [{a}, {upper}) exceeds the level {lam}")
    lo = a
    for _ in range(MAX_BISECTIONS):
        if h_left(hi) < lam + mu:
            return hi
        mid = f.domain.midpoint(lo, hi)
        if mid is None:
            break
        if h(mid) > lam:
            hi = mid
        else:
            lo = mid
    raise NonTerminationError(f"bisection near {hi} did not settle; is a jump undeclared?")


def refine_partition(f: TargetFunction, a, b, eps: float) -> List[Fraction]:
    """a = x_0 < ... < x_m = b in S with every drop f(x_{i-1}) - f(x_i-) < eps."""
    a, b = f.domain.require(a), f.domain.require(b)
    if not a < b:
        raise BadIntervalError(f"need a < b, got [{a}, {b}]")
    if not eps > 0:
        raise BadIntervalError(f"eps must be positive, got {eps}")

    f_b_left = f.left_limit(b)
    limit = math.ceil(2 * (f(a) - f_b_left) / eps) + 1
    points = [a]
    while f(points[-1]) - f_b_left >= eps:
        if len(points) > limit:
            raise NonTerminationError(f"more than {limit} cuts on [{a}, {b}]; f breaks its contract")
        points.append(_find_cut(f, points[-1], b, eps / 2, eps / 2))
    points.append(b)
    logger.debug("Refined [%s, %s] into %s cells at eps=%s", a, b, len(points) - 1, eps)
    return points


def is_vanishing_at_infinity(f: TargetFunction, eps: float, search_bound=1024) -> bool:
    """True iff some x up to the bound has f(x) < eps (one witness suffices for decreasing f)."""
    if not eps > 0:
        raise BadIntervalError(f"eps must be positive, got {eps}")
    return any(f(x) < eps for x in f.domain.search_points(Fraction(0), search_bound))


def _vanishing_point(f: TargetFunction, start: Fraction, eps: float, search_bound) -> Fraction:
    for x in f.domain.search_points(start, search_bound):
        if f(x) < eps:
            return x
    raise DoesNotVanishError(f"no point in [{start}, {search_bound}] with f < {eps}")


def approx_sequence(f: TargetFunction, C: float, N: int, search_bound=1024) -> List[Tuple[Fraction, ...]]:
    """Nested partitions F_0 <= ... <= F_N with ||g_{F_n}^f - f|| < C / 2^n."""
    if not C > 0:
        raise BadIntervalError(f"C must be positive, got {C}")
    if f(0) == 0:
        return [(Fraction(0),)] * (N + 1)

    partitions = []
    current = {Fraction(0)}
    for n in range(N + 1):
        eps = C / 2 ** n
        b = _vanishing_point(f, max(current), eps, search_bound)
        coarse = sorted(current | {b})
        refined = set(coarse)
        for lo, hi in zip(coarse, coarse[1:]):
            refined.update(refine_partition(f, lo, hi, eps))
        current = refined
        partitions.append(tuple(sorted(current)))
        logger.debug("F_%s has %s points", n, len(current))
    return partitions


def jump_witnesses(limit: TargetFunction, approximant: StepFunction, eps: float) -> List[Tuple[Fraction, float, float]]:
    """For an eps/2-close step approximant, each jump > 2 eps of the limit with the approximant's jump there."""
    if sup_distance(approximant, limit) >= eps / 2:
        raise TargetContractError("approximant is not eps/2-close to the limit")
    out = []
    for x, _ in limit.jumps:
        jump = limit.left_limit(x) - limit(x)
        if jump > 2 * eps:
            out.append((x, jump, approximant.left_limit(x) - approximant(x)))
    return out
