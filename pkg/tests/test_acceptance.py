"""Acceptance criteria, one test each.

Every test reports a PASS/FAIL line (collected in the "acceptance criteria"
section of the pytest summary) before asserting.
"""

import time
from fractions import Fraction as F

from urysohn_forge.group2 import exponent3_witness
from urysohn_forge.isometry import build_free_pair, compose_dense_free, evaluate_word, random_isometric_pair
from urysohn_forge.metric import Domain, GrowingSpace, generic_space, tuples_isometric, validate_metric
from urysohn_forge.oracle import group2_suite, isometry_suite, metric_suite, orbit_suite, toeplitz_suite
from urysohn_forge.rng import SplitMix64
from urysohn_forge.toeplitz import cyclic_metric, is_toeplitz, universal_prefix, verify_window_realization
from urysohn_forge.words import FreeWord

_metric_cache = {}


def _metric_report():
    # criteria 2 and 3 share one exhaustive pass
    if "report" not in _metric_cache:
        t0 = time.perf_counter()
        _metric_cache["report"] = metric_suite(points=4, maximum=4)
        _metric_cache["seconds"] = time.perf_counter() - t0
    return _metric_cache["report"], _metric_cache["seconds"]


def _counts(check):
    return f"{check.cases} cases, {check.failures} failures"


def test_01_amalgamation_bounds(acceptance):
    t0 = time.perf_counter()
    rep = toeplitz_suite(n=6, maximum=5, prolong_n=0)
    secs = time.perf_counter() - t0
    c = rep.check("amalgamation-bounds")
    ok = c.ok and c.cases > 0 and secs < 60
    acceptance(1, ok, f"M <= m on all prefixes n <= 6, values <= 5 ({_counts(c)}, {secs:.1f}s < 60s)")
    assert ok, c.counterexamples


def test_02_extension_soundness(acceptance):
    rep, secs = _metric_report()
    c = rep.check("extension-soundness")
    ok = c.ok and c.cases > 0 and secs < 120
    acceptance(2, ok, f"accepted specs extend, rejected specs brute-force-fail ({_counts(c)}, {secs:.1f}s < 120s)")
    assert ok, c.counterexamples


def test_03_sphere_diameter(acceptance):
    rep, _ = _metric_report()
    c = rep.check("sphere-diameter")
    ok = c.ok and c.cases > 0
    acceptance(3, ok, f"max d(z1, z2) = 2 min g, attained ({_counts(c)})")
    assert ok, c.counterexamples


def test_04_prolongation(acceptance):
    t0 = time.perf_counter()
    rep = toeplitz_suite(n=0, maximum=5, prolong_n=3, prolong_max=5)
    secs = time.perf_counter() - t0
    c = rep.check("prolongation")
    ok = c.ok and c.cases > 0 and secs < 600
    acceptance(4, ok, f"prolong on every admissible (F, H), n <= 3, values <= 5 ({_counts(c)}, {secs:.1f}s < 600s)")
    assert ok, c.counterexamples


def test_05_universal_prefix(acceptance):
    res = universal_prefix(25)
    f = res.values
    confirmed = 0
    for vec, N in res.table:
        window = verify_window_realization(f, vec)
        if window is not None and tuple(f[N : N + len(vec)]) == vec:
            confirmed += 1
    metric_ok = is_toeplitz(f).ok and validate_metric(cyclic_metric(f)).ok
    ok = len(res.table) == 25 and confirmed == 25 and metric_ok
    acceptance(5, ok, f"{confirmed}/25 table entries realised, prefix length {len(f)}, cyclic metric valid: {metric_ok}")
    assert ok


def test_06_bounded_and_unbounded(acceptance):
    rep = isometry_suite(points=4, maximum=4, steps=4, stages=42)
    b, u = rep.check("bounded-back-and-forth"), rep.check("unbounded-certificates")
    ok = rep.ok and b.cases > 0 and u.cases == 11
    acceptance(6, ok, f"bound k kept ({_counts(b)}); certificates for n = 1..10 ({_counts(u)})")
    assert ok, (b.counterexamples, u.counterexamples)


def test_07_free_and_dense_free(acceptance):
    words = [FreeWord.parse(w) for w in ("a", "b", "ab", "abAB")]
    gs = GrowingSpace()
    a, b, certs = build_free_pair(gs, words, 5)
    maps = {"a": a, "b": b}
    got = {(c.word, c.revisit) for c in certs}
    need = {(str(w), r) for w in words for r in range(1, 6)}
    free_ok = (
        got == need
        and all(c.displacement >= c.revisit for c in certs)
        and all(c.trace[-1] > c.trace[0] for c in certs)
        and all(evaluate_word(maps, FreeWord.parse(c.word), c.point) == list(c.trace) for c in certs)
        and not a.problems(gs)
        and not b.problems(gs)
    )

    gs = generic_space(8, Domain.integers(4), 0)
    rng = SplitMix64(0).fork()
    pairs = [random_isometric_pair(gs, 2, rng) for _ in range(5)]
    res = compose_dense_free(gs, pairs, 30)
    exact = all(
        tuples_isometric(gs, al, be) and [res.composite(f"h{i + 1}", x) for x in al] == list(be)
        for i, (al, be) in enumerate(pairs)
    )
    sums_ok = len(res.freeness) == 30 and all(c.displacement > c.threshold for c in res.freeness)
    maps_ok = all(not h.problems(gs) for h in [*res.generators.values(), *res.correctors.values()])
    ok = free_ok and exact and sums_ok and maps_ok and validate_metric(gs.space).ok
    acceptance(
        7,
        ok,
        f"free pair: {len(certs)}/20 certificates ok: {free_ok}; dense-free: 5 pairs exact: {exact}, "
        f"30 freeness certificates beat corrector sums: {sums_ok}",
    )
    assert ok


def test_08_invariant_metrics(acceptance):
    rep = group2_suite(levels=2, maximum=4, invariance_levels=4, seeds=5)
    e, i = rep.check("extension-iff-valid"), rep.check("translation-invariance")
    ok = rep.ok and e.cases > 0 and i.cases > 0
    acceptance(8, ok, f"accept iff valid ({_counts(e)}); invariance ({_counts(i)})")
    assert ok, (e.counterexamples, i.counterexamples)


def test_09_exponent3(acceptance):
    alphas = [F(1), F(2), F(6), F(7, 3), F(10)]
    bad = []
    cases = 0
    for alpha in alphas:
        for k in range(0, 25):
            eps = alpha * k / 96  # k = 16 is eps = alpha/6 exactly
            cases += 1
            rep = exponent3_witness(alpha, eps)
            if eps < alpha / 6:
                if not (rep.forced and rep.violation == alpha / 2 - 3 * eps):
                    bad.append((alpha, eps))
            elif rep.forced or rep.message != "no contradiction forced":
                bad.append((alpha, eps))
    ok = not bad
    acceptance(9, ok, f"violation = alpha/2 - 3 eps exactly below alpha/6, none from alpha/6 on ({cases} pairs, {len(bad)} wrong)")
    assert ok, bad


def test_10_targeted_witness(acceptance):
    t0 = time.perf_counter()
    rep = orbit_suite(spaces=50, points=12, uv_bound=3)
    secs = time.perf_counter() - t0
    c = rep.check("targeted-witness")
    ok = c.ok and c.cases > 0 and secs < 60
    acceptance(10, ok, f"witness for every (U, V), |U|+|V| <= 3, 50 spaces of 12 points ({_counts(c)}, {secs:.1f}s < 60s)")
    assert ok, c.counterexamples
