from fractions import Fraction

import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from svf_toolkit.errors import (
    BadIntervalError,
    DoesNotVanishError,
    DomainMismatchError,
    EmptyPartitionError,
    JumpNotInDomainError,
    NotInDomainError,
    TargetContractError,
)
from svf_toolkit.stepfn import (
    DYADICS,
    RATIONALS,
    StepFunction,
    approx_sequence,
    constant_target,
    finite_grid,
    indicator_target,
    is_vanishing_at_infinity,
    jump_witnesses,
    left_jump_set,
    linear_target,
    reciprocal_target,
    refine_partition,
    step_from_partition,
    step_target,
    sup_distance,
)

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


def two_jump_target():
    """1 on [0, 1/4), 0.7 on [1/4, 3/4), 0.5 on [3/4, 1), then 0."""
    return step_target([0, QUARTER, Fraction(3, 4), 1], [1.0, 0.7, 0.5, 0.0])


def max_drop(f, partition):
    return max(f(x) - f.left_limit(y) for x, y in zip(partition, partition[1:]))


def test_step_function_is_right_continuous():
    g = StepFunction((0, HALF), (1.0, 0.0))
    assert g(0) == 1.0
    assert g(Fraction(1, 3)) == 1.0
    assert g(HALF) == 0.0
    assert g.evaluate(HALF) == 0.0
    assert g.left_limit(HALF) == 1.0
    assert g.jumps() == [(HALF, 1.0)]
    assert g.compact_support


def test_step_function_contract():
    with pytest.raises(EmptyPartitionError):
        StepFunction((), ())
    with pytest.raises(TargetContractError):
        StepFunction((0, HALF), (0.0, 1.0))
    with pytest.raises(NotInDomainError):
        StepFunction((0, Fraction(1, 3)), (1.0, 0.0), DYADICS)


def test_step_from_partition_examples():
    f = linear_target()
    assert step_from_partition(f, [0]).values == (0.0,)
    g = step_from_partition(f, [0, HALF, 1])
    assert g.breakpoints == (0, HALF, 1)
    assert g.values == (1.0, 0.5, 0.0)
    c = step_from_partition(constant_target(3.0), [0, 1])
    assert c(0) == 3.0 and c(1) == 0.0


def test_step_from_partition_needs_zero():
    with pytest.raises(EmptyPartitionError):
        step_from_partition(linear_target(), [])
    with pytest.raises(NotInDomainError):
        step_from_partition(linear_target(), [HALF, 1])


@pytest.mark.parametrize("partition, expected", [([0, 1], 1.0), ([0, HALF, 1], 0.5)])
def test_sup_distance_for_the_linear_target(partition, expected):
    f = linear_target()
    assert sup_distance(step_from_partition(f, partition), f) == expected


def test_sup_distance_of_a_step_to_itself():
    f = two_jump_target()
    g = StepFunction((0, QUARTER, Fraction(3, 4), 1), (1.0, 0.7, 0.5, 0.0))
    assert sup_distance(g, f) == 0


def test_sup_distance_needs_matching_domains():
    with pytest.raises(DomainMismatchError):
        sup_distance(StepFunction((0,), (0.0,), RATIONALS), linear_target())


def test_step_from_partition_dominates_target():
    f = linear_target()
    partition = [0, QUARTER, HALF, 1]
    g = step_from_partition(f, partition)
    for k in range(0, 17):
        x = Fraction(k, 8)
        if x < 1:
            assert g(x) >= f(x)
        else:
            assert g(x) == 0 <= f(x)


def test_left_jump_set():
    assert left_jump_set(linear_target(), 1) == []
    assert left_jump_set(indicator_target(HALF), 1) == [(HALF, 1.0)]
    jumps = left_jump_set(two_jump_target(), 1)
    assert [x for x, _ in jumps] == [QUARTER, Fraction(3, 4), 1]
    assert [size for _, size in jumps] == pytest.approx([0.3, 0.2, 0.5])


def test_left_jump_set_rejects_jumps_outside_domain():
    f = indicator_target(HALF)
    broken = type(f)(f.evaluator, DYADICS, jumps=((Fraction(1, 3), 1.0),))
    with pytest.raises(JumpNotInDomainError):
        left_jump_set(broken, 1)


def test_refine_partition_examples():
    assert refine_partition(constant_target(2.0), 0, 1, 0.1) == [0, 1]
    assert refine_partition(indicator_target(HALF), 0, 1, 2) == [0, 1]
    f = linear_target()
    partition = refine_partition(f, 0, 1, 0.3)
    assert partition[0] == 0 and partition[-1] == 1
    assert max_drop(f, partition) < 0.3


def test_refine_partition_snaps_to_jumps():
    f = indicator_target(HALF)
    assert refine_partition(f, 0, 1, 0.5) == [0, HALF, 1]


def test_refine_partition_bad_interval():
    with pytest.raises(BadIntervalError):
        refine_partition(linear_target(), 1, 0, 0.1)
    with pytest.raises(BadIntervalError):
        refine_partition(linear_target(), 0, 1, 0)


@seed(7)
@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.01, max_value=1.5))
def test_refine_partition_bounds_every_drop(eps):
    for f in (linear_target(), two_jump_target(), reciprocal_target()):
        partition = refine_partition(f, 0, 2, eps)
        assert all(x < y for x, y in zip(partition, partition[1:]))
        assert max_drop(f, partition) < eps


def test_refine_partition_on_a_finite_grid():
    grid = finite_grid([0, Fraction(1, 3), Fraction(2, 3), 1])
    f = step_target([0, Fraction(1, 3), 1], [2.0, 1.0, 0.0], grid)
    partition = refine_partition(f, 0, 1, 0.5)
    assert partition == [0, Fraction(1, 3), 1]


def test_approx_sequence_of_zero():
    assert approx_sequence(constant_target(0.0), 1.0, 3) == [(0,)] * 4


def test_approx_sequence_on_indicator():
    f = indicator_target(HALF)
    partitions = approx_sequence(f, 1.0, 2)
    for partition in partitions:
        assert HALF in partition
        assert sup_distance(step_from_partition(f, partition), f) == 0


@pytest.mark.parametrize("make_target", [linear_target, two_jump_target])
def test_approx_sequence_geometric_envelope(make_target):
    f = make_target()
    C = 1.0
    partitions = approx_sequence(f, C, 8)
    assert len(partitions) == 9
    for n, partition in enumerate(partitions):
        assert all(x.denominator & (x.denominator - 1) == 0 for x in partition)
        assert sup_distance(step_from_partition(f, partition), f) < C / 2 ** n
        if n:
            assert set(partitions[n - 1]) <= set(partition)


def test_refinement_never_increases_distance():
    f = linear_target()
    partitions = approx_sequence(f, 1.0, 5)
    distances = [sup_distance(step_from_partition(f, p), f) for p in partitions]
    assert all(d2 <= d1 for d1, d2 in zip(distances, distances[1:]))


def test_approx_sequence_needs_vanishing_target():
    with pytest.raises(DoesNotVanishError):
        approx_sequence(constant_target(1.0), 1.0, 2, search_bound=64)
    with pytest.raises(BadIntervalError):
        approx_sequence(linear_target(), 0, 2)


def test_vanishing_at_infinity():
    assert is_vanishing_at_infinity(two_jump_target(), 1e-6)
    assert not is_vanishing_at_infinity(constant_target(1.0), 0.5)
    assert is_vanishing_at_infinity(reciprocal_target(), 0.1, search_bound=100)
    assert not is_vanishing_at_infinity(reciprocal_target(), 0.1, search_bound=8)


def test_jump_witnesses_on_close_approximant():
    limit = indicator_target(HALF, height=1.0)
    approximant = StepFunction((0, HALF), (1.02, 0.01))
    witnesses = jump_witnesses(limit, approximant, 0.1)
    assert len(witnesses) == 1
    x, limit_jump, approximant_jump = witnesses[0]
    assert x == HALF and limit_jump == 1.0
    assert approximant_jump > 0.1


def test_jump_witnesses_need_close_approximant():
    with pytest.raises(TargetContractError):
        jump_witnesses(indicator_target(HALF), StepFunction((0,), (0.0,)), 0.1)


@pytest.mark.parametrize(
    "make_target", [two_jump_target, lambda: indicator_target(HALF, height=1.0)], ids=["two_jump", "indicator"]
)
def test_jump_witnesses_along_approx_sequence(make_target):
    f = make_target()
    C = 1.0
    partitions = approx_sequence(f, C, 8)
    for n, partition in enumerate(partitions):
        g = step_from_partition(f, partition)
        distance = sup_distance(g, f)
        # the envelope bound and the actual distance both make g eps/2-close
        for eps in (2 * C / 2 ** n, 2 * distance + 1e-9):
            witnesses = jump_witnesses(f, g, eps)
            expected = [x for x, _ in f.jumps if f.left_limit(x) - f(x) > 2 * eps]
            assert [x for x, _, _ in witnesses] == expected
            for _, limit_jump, approximant_jump in witnesses:
                assert limit_jump > 2 * eps
                assert approximant_jump > eps
    # fine enough to see every jump
    last = step_from_partition(f, partitions[-1])
    assert len(jump_witnesses(f, last, 2 * C / 2 ** 8)) == len(f.jumps)
