from fractions import Fraction as F
from itertools import islice

import pytest
from hypothesis import given, settings, strategies as st

from urysohn_forge.errors import InfeasibleError, PreconditionError
from urysohn_forge.isometry import PartialIsometry
from urysohn_forge.metric import GrowingSpace, validate_metric
from urysohn_forge.oracle import admissible_brute, toeplitz_brute
from urysohn_forge.toeplitz import (
    Violation,
    amalgamation_bounds,
    compare_invariants,
    cyclic_metric,
    enumerate_vectors,
    extend_one,
    is_admissible,
    is_toeplitz,
    prolong,
    prolong_detailed,
    scale_to_integer,
    shift_pairs,
    universal_prefix,
    verify_window_realization,
)


def test_is_toeplitz_examples():
    assert is_toeplitz([2, 2, 2, 2]).ok
    assert is_toeplitz([3, 5]).ok
    assert is_toeplitz([1, 3]).violations == [Violation(1, 1, "upper")]
    assert not is_toeplitz([1, 0])
    assert is_toeplitz(["1/2", 1]).ok


def test_is_admissible_examples():
    assert is_admissible([3, 5], [3, 3]).ok
    assert is_admissible([3, 5], [1, 5]).violations == [Violation(1, 1, "lower")]
    # a single coordinate only has to be positive
    assert is_admissible([3, 5], [7]).ok
    assert not is_admissible([3, 5], [0])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=6), st.lists(st.integers(1, 5), min_size=1, max_size=6))
def test_validators_match_brute_force(f, h):
    assert is_toeplitz(f).ok == toeplitz_brute(f)
    # the brute force also checks the line itself, so compare on valid prefixes
    if is_toeplitz(f):
        assert is_admissible(f, h).ok == admissible_brute(f, h)


def test_amalgamation_bounds():
    assert amalgamation_bounds([3, 5]) == (2, 8)
    assert amalgamation_bounds([4]) == (0, 8)
    with pytest.raises(PreconditionError):
        amalgamation_bounds([])


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=6))
def test_bounds_bracket_every_valid_append(f):
    if not is_toeplitz(f):
        return
    M, m = amalgamation_bounds(f)
    assert M <= m
    ok = [x for x in range(1, 14) if is_toeplitz(f + [x])]
    assert ok == [x for x in range(1, 14) if M <= x <= m]


def test_extend_one_examples():
    step = extend_one([3, 5], [3, 3])
    assert (step.g1, step.gN, step.d) == (3, 3, 5)
    assert (extend_one([3, 5], [3, 3], (2, 4)).g1, extend_one([3, 5], [3, 3], (2, 4)).gN) == (3, 3)
    # an explicit clamp replaces the default [2, d-1]
    wide = extend_one([3, 5], [3, 3], (5, 5))
    assert (wide.g1, wide.gN) == (5, 5)
    with pytest.raises(InfeasibleError) as info:
        extend_one([3, 5], [3, 3], (9, 9))
    assert info.value.context["clamp"] == [9, 9]


def test_extend_one_preconditions():
    with pytest.raises(PreconditionError):
        extend_one([3, 5], [3])
    with pytest.raises(PreconditionError):
        extend_one(["1/2"], [1])


def test_extend_one_keeps_both_sides_valid():
    f, h = [3, 5], [3, 3]
    step = extend_one(f, h)
    assert is_toeplitz(f + [step.g1])
    assert is_admissible(f, [step.gN] + h)


def test_prolong_examples():
    assert prolong([1], [1]) == (1, 1, 1)
    p = prolong_detailed([3, 5], [3, 3])
    assert p.method == "blocks" and p.factor == 1
    assert len(p.values) == 14
    assert p.values[:2] == (3, 5) and p.values[-2:] == (3, 3)
    assert is_toeplitz(p.values)


def test_prolong_rational_input():
    out = prolong(["1/2"], ["1/2"])
    assert out[0] == F(1, 2) and out[-1] == F(1, 2)
    assert is_toeplitz(out)


def test_prolong_rejects_bad_input():
    with pytest.raises(PreconditionError):
        prolong([1, 3], [1, 1])
    with pytest.raises(PreconditionError):
        prolong([3, 5], [1, 5])
    with pytest.raises(PreconditionError):
        prolong([3, 5], [3])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=3), st.lists(st.integers(1, 4), min_size=3, max_size=3))
def test_prolong_property(f, h):
    h = h[: len(f)]
    if not is_toeplitz(f) or not is_admissible(f, h):
        return
    out = [int(x) for x in prolong(f, h)]
    assert toeplitz_brute(out)
    assert out[: len(f)] == f and out[-len(h):] == h


def test_scale_to_integer():
    assert scale_to_integer(["1/2"], ["1/2"]) == ([3], [3], 6)
    assert scale_to_integer([1], [1]) == ([3], [3], 3)
    assert scale_to_integer([3, 5], [3, 3]) == ([3, 5], [3, 3], 1)


def test_verify_window_realization():
    m = verify_window_realization([1, 1, 1], [1, 1])
    assert (m.offset, m.orientation) == (0, "forward")
    p = prolong([3, 5], [3, 3])
    m = verify_window_realization(p, [3, 3])
    assert (m.offset, m.orientation) == (2, "forward")
    # the copy at the very end is there too
    assert list(p[12:14]) == [3, 3]
    assert verify_window_realization([1], [1, 1]) is None
    m = verify_window_realization([1, 2, 3], [2, 1])
    assert (m.offset, m.orientation) == (3, "reverse")


def test_enumerate_vectors_is_injective_and_staged():
    first = list(islice(enumerate_vectors(), 200))
    assert len(set(first)) == 200
    assert first[:6] == [(1,), (1, 1), (2,), (1, 2), (2, 1), (2, 2)]


def test_universal_prefix_zero_steps():
    r = universal_prefix(0)
    assert r.values == (1,) and r.table == []


def test_universal_prefix_table_is_correct():
    r = universal_prefix(12)
    f = [int(x) for x in r.values]
    assert is_toeplitz(f)
    assert len(r.table) == 12
    for vec, N in r.table:
        assert tuple(f[N : N + len(vec)]) == vec
    for vec, why in r.skipped:
        assert why in ("longer than prefix", "not admissible")


def test_universal_prefix_custom_seed():
    with pytest.raises(PreconditionError):
        universal_prefix(1, F0=[1, 3])
    r = universal_prefix(3, F0=[2, 2])
    assert r.values[:2] == (2, 2)


def test_cyclic_metric_and_shift():
    f = [int(x) for x in prolong([3, 5], [3, 3])]
    m = cyclic_metric(f)
    assert len(m) == 15 and validate_metric(m).ok
    gs = GrowingSpace.from_space(m)
    shift = PartialIsometry(shift_pairs(14))
    assert shift.problems(gs) == []
    assert shift.max_displacement(gs) == f[0]
    with pytest.raises(PreconditionError):
        cyclic_metric([1, 2], 3)


def test_cyclic_metric_rejects_invalid_prefix():
    assert not validate_metric(cyclic_metric([1, 3])).ok


def test_compare_invariants():
    v = compare_invariants([1, 1], [1, 2])
    assert v.distinguished and v.index == 2
    v = compare_invariants([1, 2], [1, 2, 3])
    assert not v.distinguished and v.compared == 2


def test_corrupted_prefix_equivalence():
    f = [int(x) for x in prolong([3, 5], [3, 3])]
    bad = list(f)
    bad[5] = 1
    assert validate_metric(cyclic_metric(bad)).ok == is_toeplitz(bad).ok == False  # noqa: E712
