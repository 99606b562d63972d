"""
Singular value functions on multi-matrix algebras.

s_g(a) = inf{ ||a - ap|| : p projection, [p]_0 <= g }.

In A = M_{n_1} (+) ... (+) M_{n_k} the infimum is max_i sigma_{g_i}(a_i),
which is the engine. The finite-spectrum formula on |a| is the oracle it is
checked against, and random projections give an empirical upper bound.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import linalg_core as la
from .algebra import (
    AlgebraElement,
    MultiMatrixAlgebra,
    Seed,
    SpectralSteps,
    absolute_value,
    apply_scalar_function,
    element_norm,
    make_rng,
    projection_from_basis,
    projection_leq,
    random_algebra,
    random_class,
    random_element,
    random_ordered_pair,
    random_positive,
    random_projection,
    random_unitary,
    range_basis,
    rank_vector,
    spectral_steps,
)
from .errors import (
    BadIntervalError,
    BlockShapeError,
    ChainNotIncreasingError,
    NegativeClassError,
    NotNestedError,
    OracleDisagreementError,
    RankGapViolatedError,
    RankOutOfRangeError,
    RankOverflowError,
    SubordinationViolationError,
    ToleranceNotMetError,
    TopMismatchError,
    VariantMismatchError,
)
from .k0_order import K0Class, SimplicialClass, in_dimension_range, is_positive, leq

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-8
BATTERY_TOL = 1e-8
# ||p - pq|| must clear 1 by this much before domination is claimed
SUBORDINATION_MARGIN = 1e-9


def _check_class(algebra: MultiMatrixAlgebra, g: K0Class) -> SimplicialClass:
    if not isinstance(g, SimplicialClass) or g.rank != algebra.k:
        raise VariantMismatchError(f"expected a simplicial class of rank {algebra.k}, got {g}")
    if not is_positive(g):
        raise NegativeClassError(f"{g} is not in the positive cone")
    return algebra.clamp(g)


def _check_element(algebra: MultiMatrixAlgebra, a: AlgebraElement) -> None:
    if a.algebra.block_sizes != algebra.block_sizes:
        raise BlockShapeError(f"element of {a.algebra.block_sizes} used in {algebra.block_sizes}")


def _block_singular_values(a: AlgebraElement) -> List[np.ndarray]:
    return [la.singular_values(b) for b in a.blocks]


def _closed_form(sigmas: Sequence[np.ndarray], g: SimplicialClass) -> float:
    # sigma_{n_i} = 0 past the last singular value
    return max(float(s[x]) if x < len(s) else 0.0 for s, x in zip(sigmas, g.coords))


def svf(algebra: MultiMatrixAlgebra, a: AlgebraElement, g: K0Class, verify: bool = False) -> float:
    """s_g(a) = max_i sigma_{g_i}(a_i), with g clamped into the box."""
    _check_element(algebra, a)
    g = _check_class(algebra, g)
    value = _closed_form(_block_singular_values(a), g)
    if verify:
        oracle = svf_finite_spectrum(spectral_steps(absolute_value(a)), g)
        if abs(value - oracle) > ORACLE_TOL:
            raise OracleDisagreementError(f"closed form {value} vs finite-spectrum {oracle} at {g}")
    return value


def svf_finite_spectrum(steps: SpectralSteps, g: K0Class) -> float:
    """min{ alpha_k : [p^_k]_0 <= g } with alpha_n = 0 and p^_0 = 0."""
    if not isinstance(g, SimplicialClass) or g.rank != steps.algebra.k:
        raise VariantMismatchError(f"expected a simplicial class of rank {steps.algebra.k}, got {g}")
    n = len(steps)
    # Classes increase with k, so the largest qualifying k gives the minimum
    for k in range(n, 0, -1):
        if leq(steps.cumulative_classes[k - 1], g):
            return steps.values[k] if k < n else 0.0
    return steps.values[0] if n else 0.0


def svf_projection_indicator(pclass: K0Class, g: K0Class) -> int:
    """s_g(p) for a projection p: 0 if [p]_0 <= g, else 1."""
    return 0 if leq(pclass, g) else 1


def _structured_candidates(a: AlgebraElement, g: SimplicialClass) -> Iterable[AlgebraElement]:
    algebra = a.algebra
    yield algebra.zero()
    abs_a = absolute_value(a)
    steps = spectral_steps(abs_a)
    for k, cls in enumerate(steps.cumulative_classes, start=1):
        if leq(cls, g):
            yield steps.cumulative_projection(k)
    # Blockwise: top-g_i eigenvectors of |a_i|
    bases = []
    for b, x in zip(abs_a.blocks, g.coords):
        _, v = la.hermitian_eigen(b)
        bases.append(v[:, :x])
    yield projection_from_basis(algebra, bases)


def svf_sampling_bound(algebra: MultiMatrixAlgebra, a: AlgebraElement, g: K0Class, trials: int, seed: Seed = None) -> float:
    """min ||a - ap|| over random projections below g plus the spectral candidates."""
    if trials < 1:
        raise BadIntervalError(f"trials must be at least 1, got {trials}")
    _check_element(algebra, a)
    g = _check_class(algebra, g)
    rng = make_rng(seed)

    best = min(element_norm(a - a @ p) for p in _structured_candidates(a, g))
    for _ in range(trials):
        r = SimplicialClass(tuple(int(rng.integers(0, x + 1)) for x in g.coords))
        p = random_projection(algebra, r, rng)
        best = min(best, element_norm(a - a @ p))

    closed = _closed_form(_block_singular_values(a), g)
    # No projection below g can beat the infimum
    if best < closed - ORACLE_TOL:
        raise OracleDisagreementError(f"sampled projection gives {best}, below the closed form {closed} at {g}")
    return best


@dataclass(frozen=True, eq=False)
class SVFTable:
    """s(a) tabulated on the box prod [0, n_i]."""

    algebra: MultiMatrixAlgebra
    values: Dict[Tuple[int, ...], float]

    def value(self, g: K0Class) -> float:
        return self.values[_check_class(self.algebra, g).coords]

    def rows(self) -> List[Tuple[SimplicialClass, float]]:
        return [(g, self.values[g.coords]) for g in self.algebra.box()]

    def is_antitone(self) -> bool:
        # Checking unit steps up the box is enough
        for coords, v in self.values.items():
            for i, n in enumerate(self.algebra.block_sizes):
                if coords[i] < n:
                    up = coords[:i] + (coords[i] + 1,) + coords[i + 1:]
                    if self.values[up] > v:
                        return False
        return True

    def vanishes_at_top(self) -> bool:
        return self.values[self.algebra.block_sizes] == 0


def svf_table(algebra: MultiMatrixAlgebra, a: AlgebraElement) -> SVFTable:
    _check_element(algebra, a)
    sigmas = _block_singular_values(a)
    return SVFTable(algebra, {g.coords: _closed_form(sigmas, g) for g in algebra.box()})


def vanishing_witness(algebra: MultiMatrixAlgebra, a: AlgebraElement, eps: float) -> SimplicialClass:
    """A class g with s_h(a) < eps for every h >= g."""
    if not eps > 0:
        raise BadIntervalError(f"eps must be positive, got {eps}")
    _check_element(algebra, a)
    steps = spectral_steps(absolute_value(a))
    classes = (algebra.zero_class(),) + steps.cumulative_classes
    values = steps.values + (0.0,)
    for cls, alpha in zip(classes, values):
        if alpha < eps:
            return cls
    return algebra.top_class()


class SubordinationResult(NamedTuple):
    norm: float
    implied: bool


def _same_algebra(*elements: AlgebraElement) -> MultiMatrixAlgebra:
    algebra = elements[0].algebra
    for e in elements[1:]:
        _check_element(algebra, e)
    return algebra


def norm_subordination(p: AlgebraElement, q: AlgebraElement) -> SubordinationResult:
    """||p - pq||, and whether it is small enough (< 1) to force [p]_0 <= [q]_0."""
    _same_algebra(p, q)
    rp, rq = rank_vector(p), rank_vector(q)
    norm = element_norm(p - p @ q)
    implied = norm < 1 - SUBORDINATION_MARGIN
    if implied and not leq(rp, rq):
        raise SubordinationViolationError(f"||p - pq|| = {norm} < 1 but {rp} is not below {rq}")
    return SubordinationResult(norm, implied)


def nest_projection(p1: AlgebraElement, q: AlgebraElement, p2: AlgebraElement) -> AlgebraElement:
    """q' ~ q with p1 <= q' <= p2: extend ran(p1) inside ran(p2)."""
    algebra = _same_algebra(p1, q, p2)
    r1, rq, r2 = rank_vector(p1), rank_vector(q), rank_vector(p2)
    if not projection_leq(p1, p2):
        raise NotNestedError("p1 is not below p2")
    if not (leq(r1, rq) and leq(rq, r2)):
        raise RankGapViolatedError(f"need {r1} <= {rq} <= {r2}")
    if projection_leq(p1, q) and projection_leq(q, p2):
        return q

    bases = []
    for b1, b2, x1, x in zip(range_basis(p1), range_basis(p2), r1.coords, rq.coords):
        extra = x - x1
        if extra == 0:
            bases.append(b1)
            continue
        # Part of ran(p2) orthogonal to ran(p1)
        complement = b2 - b1 @ (la.adjoint(b1) @ b2)
        u, _, _ = np.linalg.svd(complement, full_matrices=False)
        bases.append(np.hstack([b1, u[:, :extra]]))
    q_prime = projection_from_basis(algebra, bases)

    if rank_vector(q_prime) != rq or not (projection_leq(p1, q_prime) and projection_leq(q_prime, p2)):
        raise ToleranceNotMetError("nested projection lost accuracy")
    return q_prime


def lift_class_chain(algebra: MultiMatrixAlgebra, chain: Sequence[SimplicialClass], p: AlgebraElement) -> List[AlgebraElement]:
    """Increasing projections p_1 <= ... <= p_N = p with [p_n]_0 = g_n.

    Each stage is nest_projection(0, coordinate projection of class g_n, p_{n+1}),
    working down from the top, so interleaving a second chain is not needed.
    """
    _check_element(algebra, p)
    if not chain:
        raise ChainNotIncreasingError("empty chain")
    for g in chain:
        if not in_dimension_range(algebra, g):
            raise RankOutOfRangeError(f"{g} is outside the dimension range")
    for g, h in zip(chain, chain[1:]):
        if not leq(g, h):
            raise ChainNotIncreasingError(f"{g} is not below {h}")
    if chain[-1] != rank_vector(p):
        raise TopMismatchError(f"chain ends at {chain[-1]} but [p]_0 = {rank_vector(p)}")

    zero = algebra.zero()
    lifted = [p]
    for g in reversed(chain[:-1]):
        lifted.append(nest_projection(zero, algebra.coordinate_projection(g), lifted[-1]))
    return lifted[::-1]


def approx_sum_projection(p: AlgebraElement, q: AlgebraElement, eps: float) -> AlgebraElement:
    """r with [r]_0 = [p]_0 + [q]_0, ||p - pr|| < eps and ||q - qr|| < eps."""
    algebra = _same_algebra(p, q)
    r_class = rank_vector(p) + rank_vector(q)
    if not in_dimension_range(algebra, r_class):
        raise RankOverflowError(f"{r_class} exceeds the block sizes {algebra.block_sizes}")

    bases = []
    for bp, bq, x in zip(range_basis(p), range_basis(q), r_class.coords):
        stacked = np.hstack([bp, bq])
        if stacked.shape[1] == 0:
            bases.append(stacked)
            continue
        # Leading left singular vectors span ran(p) + ran(q); the rest pad it up to rank x
        u, _, _ = np.linalg.svd(stacked, full_matrices=True)
        bases.append(u[:, :x])
    r = projection_from_basis(algebra, bases)

    if element_norm(p - p @ r) >= eps or element_norm(q - q @ r) >= eps:
        raise ToleranceNotMetError(f"could not absorb p and q within {eps}")
    return r


# Property battery

PROPERTIES: Dict[str, str] = {
    "zero_class_norm": "s_0(a) = ||a||",
    "homogeneity": "s(alpha a) = |alpha| s(a)",
    "contraction": "s(ba), s(ab) <= ||b|| s(a)",
    "lipschitz": "|s_g(a) - s_g(b)| <= ||a - b||",
    "absolute_value": "s(a) = s(|a|)",
    "unitary_adjoint_invariance": "s(a*) = s(ua) = s(au) = s(a)",
    "ky_fan_sum": "s_{g+h}(a + b) <= s_g(a) + s_h(b)",
    "ky_fan_product": "s_{g+h}(ab) <= s_g(a) s_h(b)",
    "functional_calculus": "s(f(a)) = f(s(a))",
    "monotone_positive": "0 <= a <= b implies s(a) <= s(b)",
    "unit_vanishing": "s_[1](a) = 0",
    "oracle_agreement": "closed form = finite spectrum = sampling bound",
    "square_domination": "a*a <= b*b implies s(a) <= s(b)",
    "star_square": "s(a*a) = s(aa*)",
    "sandwich_symmetry": "s(a^(1/2) b a^(1/2)) = s(b^(1/2) a b^(1/2)) for a, b >= 0",
}


@dataclass(frozen=True)
class PropertyOutcome:
    property_id: str
    trials: int = 0
    failures: int = 0
    # Largest violation seen: lhs - rhs for inequalities, |lhs - rhs| for equalities
    worst_slack: float = float("-inf")

    def merge(self, other: "PropertyOutcome") -> "PropertyOutcome":
        return replace(
            self,
            trials=self.trials + other.trials,
            failures=self.failures + other.failures,
            worst_slack=max(self.worst_slack, other.worst_slack),
        )


@dataclass(frozen=True)
class BatteryReport:
    outcomes: Dict[str, PropertyOutcome] = field(default_factory=dict)
    tolerance: float = BATTERY_TOL

    @property
    def passed(self) -> bool:
        return all(o.failures == 0 for o in self.outcomes.values())

    def merge(self, other: "BatteryReport") -> "BatteryReport":
        merged = dict(self.outcomes)
        for key, outcome in other.outcomes.items():
            merged[key] = merged[key].merge(outcome) if key in merged else outcome
        return BatteryReport(merged, self.tolerance)

    def rows(self) -> List[Tuple[str, int, int, float]]:
        return [
            (key, o.trials, o.failures, o.worst_slack)
            for key in PROPERTIES
            for o in [self.outcomes.get(key)]
            if o is not None
        ]


def _trial_slacks(algebra: Optional[MultiMatrixAlgebra], seed: int, index: int) -> Dict[str, float]:
    """Run every property once on random data derived from (seed, index)."""
    rng = np.random.default_rng([seed, index])
    A = algebra if algebra is not None else random_algebra(rng)

    def s(x: AlgebraElement, g: SimplicialClass) -> float:
        return svf(A, x, g)

    a = random_element(A, rng)
    b = random_element(A, rng)
    u = random_unitary(A, rng)
    alpha = complex(rng.standard_normal(), rng.standard_normal())
    g, h = random_class(A, rng), random_class(A, rng)
    gh = A.clamp(g + h)
    sa, sb = s(a, g), s(b, h)
    norm_b = element_norm(b)

    slacks = {}
    slacks["zero_class_norm"] = abs(s(a, A.zero_class()) - element_norm(a))
    slacks["homogeneity"] = abs(s(alpha * a, g) - abs(alpha) * sa)
    slacks["contraction"] = max(s(b @ a, g), s(a @ b, g)) - norm_b * sa
    slacks["lipschitz"] = abs(sa - s(b, g)) - element_norm(a - b)
    slacks["absolute_value"] = abs(s(absolute_value(a), g) - sa)
    slacks["unitary_adjoint_invariance"] = max(
        abs(s(a.adjoint(), g) - sa), abs(s(u @ a, g) - sa), abs(s(a @ u, g) - sa)
    )
    slacks["ky_fan_sum"] = s(a + b, gh) - (sa + sb)
    slacks["ky_fan_product"] = s(a @ b, gh) - sa * sb

    # Full-rank positive element so sqrt is not evaluated on rounding noise
    c = random_element(A, rng, rank_deficient_prob=0.0)
    x = c.adjoint() @ c
    f_name = sorted(la.SCALAR_FUNCTIONS)[index % len(la.SCALAR_FUNCTIONS)]
    f = la.SCALAR_FUNCTIONS[f_name]
    slacks["functional_calculus"] = abs(s(apply_scalar_function(x, f), g) - f(s(x, g)))

    lower, upper = random_ordered_pair(A, rng)
    slacks["monotone_positive"] = s(lower, g) - s(upper, g)
    slacks["unit_vanishing"] = s(a, A.top_class())

    closed = sa
    oracle = svf_finite_spectrum(spectral_steps(absolute_value(a)), g)
    sampled = svf_sampling_bound(A, a, g, trials=4, seed=rng)
    slacks["oracle_agreement"] = max(abs(closed - oracle), abs(closed - sampled), abs(oracle - sampled))

    # b2 = (a*a + d*d)^(1/2) so that a*a <= b2*b2
    d = random_element(A, rng)
    b2 = apply_scalar_function(a.adjoint() @ a + d.adjoint() @ d, la.SCALAR_FUNCTIONS["sqrt"])
    slacks["square_domination"] = sa - s(b2, g)
    slacks["star_square"] = abs(s(a.adjoint() @ a, g) - s(a @ a.adjoint(), g))

    # Full-rank positives again, both square roots are taken
    sqrt = la.SCALAR_FUNCTIONS["sqrt"]
    x = random_positive(A, rng, rank_deficient_prob=0.0)
    y = random_positive(A, rng, rank_deficient_prob=0.0)
    root_x, root_y = apply_scalar_function(x, sqrt), apply_scalar_function(y, sqrt)
    slacks["sandwich_symmetry"] = abs(s(root_x @ y @ root_x, g) - s(root_y @ x @ root_y, g))
    return slacks


def _report_from_slacks(slacks: Dict[str, float], tolerance: float) -> BatteryReport:
    return BatteryReport(
        {
            key: PropertyOutcome(key, 1, int(value > tolerance), value)
            for key, value in slacks.items()
        },
        tolerance,
    )


def property_battery(
    algebra: Optional[MultiMatrixAlgebra],
    trials: int,
    seed: int = 0,
    workers: int = 1,
    tolerance: float = BATTERY_TOL,
) -> BatteryReport:
    """Check every property on `trials` random draws; a None algebra draws one per trial."""
    if trials < 1:
        raise BadIntervalError(f"trials must be at least 1, got {trials}")

    def run(index: int) -> BatteryReport:
        return _report_from_slacks(_trial_slacks(algebra, seed, index), tolerance)

    report = BatteryReport(tolerance=tolerance)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for partial in pool.map(run, range(trials)):
                report = report.merge(partial)
    else:
        for index in range(trials):
            report = report.merge(run(index))

    failed = [key for key, o in report.outcomes.items() if o.failures]
    logger.info("Battery: %s trials, %s failing properties", trials, len(failed))
    return report
