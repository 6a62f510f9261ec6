from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from urysohn_forge.errors import ExtensionError, MetricStructureError, PreconditionError
from urysohn_forge.metric import (
    DistanceSpec,
    Domain,
    FiniteMetricSpace,
    GrowingSpace,
    check_extension_spec,
    extend_point,
    feasible_interval,
    generic_space,
    realize_sphere_pair,
    sphere_diameter_bound,
    tuples_isometric,
    validate_metric,
)
from urysohn_forge.metric import _triangles_exact, _triangles_vectorised
from urysohn_forge.rational import fmt, parse_list, to_rational
from urysohn_forge.rng import SplitMix64


def space(rows):
    return FiniteMetricSpace.from_matrix(rows)


def two_points(d):
    return GrowingSpace.from_space(space([[0, d], [d, 0]]))


# --- rationals and rng ---


def test_rationals_are_canonical_and_exact():
    assert to_rational("6/4") == F(3, 2)
    assert fmt(F(3, 2)) == "3/2" and fmt(F(4, 2)) == "2"
    assert parse_list("1/2, 3") == [F(1, 2), F(3)]
    for bad in (1.5, True, "0.5", "1e3"):
        with pytest.raises((TypeError, ValueError)):
            to_rational(bad)


def test_splitmix_is_reproducible():
    a, b = SplitMix64(42), SplitMix64(42)
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]
    # reference value of the standard SplitMix64 stream for seed 0
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF
    r = SplitMix64(1)
    assert all(0 <= r.below(7) < 7 for _ in range(200))


# --- validate_metric ---


def test_validate_examples():
    assert validate_metric(space([[0]])).ok
    assert validate_metric(space([[0, 1, 1], [1, 0, 1], [1, 1, 0]])).ok
    rep = validate_metric(space([[0, 1, 3], [1, 0, 1], [3, 1, 0]]))
    assert not rep.ok
    assert [(t.i, t.j, t.k, t.lhs, t.rhs) for t in rep.triangles] == [(0, 1, 2, 3, 2)]


def test_validate_structure_errors():
    with pytest.raises(MetricStructureError):
        validate_metric(space([[0, 1], [1, 0, 2]]))
    with pytest.raises(MetricStructureError):
        validate_metric(space([[0, 1], [2, 0]]))


def test_validate_flags_zero_and_diagonal():
    rep = validate_metric(space([[0, 0], [0, 0]]))
    assert not rep.ok and rep.entries
    rep = validate_metric(space([[1, 1], [1, 0]]))
    assert not rep.ok


def test_vectorised_path_agrees_with_exact():
    gs = generic_space(45, Domain.rational(4, 3), seed=9)
    assert validate_metric(gs.space).ok
    rows = [list(r) for r in gs.space.dist]
    rows[3][7] = rows[7][3] = rows[3][7] * 5
    bad = validate_metric(space(rows))
    assert not bad.ok
    fast = _triangles_vectorised(tuple(map(tuple, rows)), None)
    slow = _triangles_exact(tuple(map(tuple, rows)), None)
    assert fast is not None
    assert sorted((t.i, t.j, t.k, t.lhs, t.rhs) for t in fast) == sorted((t.i, t.j, t.k, t.lhs, t.rhs) for t in slow)


# --- check_extension_spec / extend_point ---


def test_spec_examples():
    m = space([[0, 2], [2, 0]])
    assert check_extension_spec(m, DistanceSpec.of({0: 1, 1: 1})) == []
    bad = check_extension_spec(m, DistanceSpec.of({0: 1, 1: 4}))
    assert [(v.a, v.b, v.reason) for v in bad] == [(0, 1, "lower")]
    assert check_extension_spec(m, DistanceSpec.of({})) == []


def test_zero_and_negative_rejected():
    m = space([[0, 2], [2, 0]])
    assert check_extension_spec(m, DistanceSpec.of({0: 0}))
    assert check_extension_spec(m, DistanceSpec.of({0: -1}))


def test_unknown_target():
    with pytest.raises(PreconditionError):
        check_extension_spec(space([[0]]), DistanceSpec.of({3: 1}))


def test_extend_examples():
    gs = GrowingSpace.from_space(space([[0, 1, 1], [1, 0, 1], [1, 1, 0]]))
    z = extend_point(gs, DistanceSpec.of({0: 1, 1: 1, 2: 1}))
    assert all(gs.d(z, p) == 1 for p in range(3))

    gs = GrowingSpace.from_space(space([[0]]))
    z = extend_point(gs, DistanceSpec.of({0: "5/2"}))
    assert gs.d(0, z) == F(5, 2)

    gs = two_points(2)
    z = extend_point(gs, DistanceSpec.of({0: 1, 1: 3}))
    assert validate_metric(gs.space).ok and (gs.d(z, 0), gs.d(z, 1)) == (1, 3)


def test_extend_rejects_with_pair():
    gs = two_points(2)
    with pytest.raises(ExtensionError) as info:
        extend_point(gs, DistanceSpec.of({0: 1, 1: 4}))
    assert info.value.context["violations"][0]["a"] == 0
    assert len(gs) == 2  # nothing appended


def test_unlisted_distances_use_midpoint():
    gs = two_points(2)
    z = extend_point(gs, DistanceSpec.of({0: 1}))
    # interval for point 1 is [|1-2|, 1+2] = [1, 3]
    assert gs.d(z, 1) == 2
    gs = GrowingSpace()
    extend_point(gs, DistanceSpec.of({}))
    z = extend_point(gs, DistanceSpec.of({}))
    assert gs.d(0, z) == 1


def test_feasible_interval():
    rows = [[F(0), F(2)], [F(2), F(0)]]
    assert feasible_interval(rows, 1, {0: F(1)}) == (F(1), F(3))
    assert feasible_interval(rows, 1, {}) == (F(0), None)


def test_replay_reproduces_space():
    gs = generic_space(10, Domain.rational(3, 4), seed=5)
    extend_point(gs, DistanceSpec.of({0: 2, 3: 2}))
    again = GrowingSpace.replay(gs.log)
    assert again.rows == gs.rows
    assert [e.to_json() for e in again.log] == [e.to_json() for e in gs.log]


def test_copy_is_independent():
    gs = generic_space(4, Domain.integers(3), seed=1)
    cp = gs.copy()
    extend_point(cp, DistanceSpec.of({0: 1}))
    assert len(gs) == 4 and len(cp) == 5


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32), st.lists(st.integers(1, 6), min_size=1, max_size=4))
def test_accepted_specs_extend_validly(n, seed, gvals):
    gs = generic_space(n, Domain.integers(4), seed)
    spec = DistanceSpec.of({i % n: g for i, g in enumerate(gvals)})
    if check_extension_spec(gs, spec):
        with pytest.raises(ExtensionError):
            extend_point(gs, spec)
        return
    z = extend_point(gs, spec)
    assert validate_metric(gs.space).ok
    assert all(gs.d(z, a) == g for a, g in spec.targets.items())


# --- tuples / sphere ---


def test_tuples_isometric():
    m = space([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert tuples_isometric(m, (0, 1), (0, 1))
    assert tuples_isometric(space([[0, 1], [1, 0]]), (0, 1), (1, 0))
    assert not tuples_isometric(m, (0, 1), (0, 2))
    with pytest.raises(PreconditionError):
        tuples_isometric(m, (0,), (0, 1))


def test_sphere_bound_examples():
    assert sphere_diameter_bound(DistanceSpec.of({0: 2})) == 4
    assert sphere_diameter_bound(DistanceSpec.of({0: 1, 1: 1})) == 2
    with pytest.raises(PreconditionError):
        sphere_diameter_bound(DistanceSpec.of({}))


@pytest.mark.parametrize(
    "rows, spec, expected",
    [
        ([[0]], {0: 2}, 4),
        ([[0, 2], [2, 0]], {0: 1, 1: 3}, 2),
        ([[0]], {0: "1/2"}, 1),
    ],
)
def test_realize_sphere_pair(rows, spec, expected):
    gs = GrowingSpace.from_space(space(rows))
    s = DistanceSpec.of(spec)
    z1, z2 = realize_sphere_pair(gs, s)
    assert gs.d(z1, z2) == expected
    assert all(gs.d(z, a) == g for z in (z1, z2) for a, g in s.targets.items())
    assert validate_metric(gs.space).ok


# --- domains / generic spaces ---


def test_domain_parse_and_values():
    assert Domain.parse("int:3").values() == [1, 2, 3]
    assert Domain.parse("rat:2:1").values() == [F(1, 2), F(1)]
    assert Domain.parse("graph").values() == [1, 2]
    with pytest.raises(ValueError):
        Domain.parse("real")


def test_generic_space_basics():
    assert len(generic_space(1, Domain.integers(5), 3)) == 1
    seen = {generic_space(2, Domain.integers(5), s).d(0, 1) for s in range(60)}
    assert seen == {1, 2, 3, 4, 5}
    a, b = generic_space(12, Domain.graph(), 4), generic_space(12, Domain.graph(), 4)
    assert a.rows == b.rows
    assert validate_metric(a.space).ok
    assert {x for row in a.rows for x in row} <= {0, 1, 2}
    with pytest.raises(PreconditionError):
        generic_space(0, Domain.integers(2))
