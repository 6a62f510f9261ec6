from fractions import Fraction as F

import pytest

from urysohn_forge.toeplitz import amalgamation_bounds
from urysohn_forge.oracle import (
    SUITES,
    Check,
    admissible_brute,
    integer_spaces,
    partial_matrix_ok,
    toeplitz_brute,
)


def test_partial_matrix_ok():
    assert partial_matrix_ok([[0, 1, None], [1, 0, 1], [None, 1, 0]])
    assert not partial_matrix_ok([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert not partial_matrix_ok([[0, 0], [0, 0]])
    assert partial_matrix_ok([[0, F(1, 2)], [F(1, 2), 0]])


def test_brute_force_examples():
    assert toeplitz_brute([3, 5]) and not toeplitz_brute([1, 3])
    assert admissible_brute([3, 5], [3, 3]) and not admissible_brute([3, 5], [1, 5])


def test_integer_spaces_counts():
    # isometry classes of integer metrics with distances in 1..2:
    # 1 point, 2 two-point spaces, and 4 triangles (all triples of 1s and 2s are valid)
    assert sum(1 for _ in integer_spaces(3, 2)) == 1 + 2 + 4
    # with values 1..3 only the multiset (1, 1, 3) of the 10 is not a triangle
    assert sum(1 for m in integer_spaces(3, 3) if len(m) == 3) == 10 - 1


def test_check_caps_counterexamples():
    c = Check("x")
    for i in range(30):
        c.record(False, lambda i=i: {"i": i})
    assert c.failures == 30 and len(c.counterexamples) == 20 and not c.ok
    assert c.to_json()["cases"] == 30


@pytest.mark.parametrize(
    "suite, kwargs",
    [
        ("metric", {"points": 3, "maximum": 3}),
        ("toeplitz", {"n": 4, "maximum": 3, "prolong_n": 2, "prolong_max": 3}),
        ("isometry", {"points": 3, "maximum": 3, "steps": 2, "stages": 10}),
        ("group2", {"levels": 1, "maximum": 3, "invariance_levels": 2, "seeds": 2}),
        ("orbit", {"spaces": 3, "points": 5, "uv_bound": 2}),
    ],
)
def test_small_suites_pass(suite, kwargs):
    report = SUITES[suite](**kwargs)
    assert report.ok, report.to_json()
    assert all(c.cases > 0 for c in report.checks)
    assert report.to_json()["suite"] == suite


def test_suites_catch_broken_code(monkeypatch):
    import urysohn_forge.oracle as oracle

    def loose_bounds(f):
        M, m = amalgamation_bounds(f)
        return M, m + 1

    monkeypatch.setattr(oracle, "amalgamation_bounds", loose_bounds)
    report = SUITES["toeplitz"](n=3, maximum=3, prolong_n=1, prolong_max=2)
    assert not report.check("amalgamation-bounds").ok
    assert report.check("amalgamation-bounds").counterexamples

    monkeypatch.setattr(oracle, "check_extension_spec", lambda m, spec: [])
    report = SUITES["metric"](points=2, maximum=3)
    assert not report.ok
