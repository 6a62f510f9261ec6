"""Exhaustive and brute-force cross-checks of the constructions.

Each suite enumerates a small family, runs the library code on every member
and checks the outcome with an independent direct computation, usually a
plain triangle scan over a (possibly partial) distance matrix.  A suite
never stops at the first failure; counterexamples are collected (up to a
cap) so they can be serialised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Callable, Iterator, Sequence

from .errors import ForgeError, PreconditionError
from .group2 import InvariantMetric, consistency_violations, extend_invariant_metric, generic_invariant_metric, translation_invariant
from .isometry import PartialIsometry, back_and_forth_bounded, build_unbounded, extend_bounded, first_missing
from .jsonio import space_to_json
from .metric import (
    DistanceSpec,
    Domain,
    FiniteMetricSpace,
    GrowingSpace,
    check_extension_spec,
    extend_point,
    generic_space,
    realize_sphere_pair,
    sphere_diameter_bound,
    validate_metric,
)
from .orbit import build_partition, metric_to_graph, required_cover, targeted_extension, uv_pairs
from .rational import fmt, fmt_list
from .toeplitz import amalgamation_bounds, is_admissible, is_toeplitz, prolong

MAX_COUNTEREXAMPLES = 20


@dataclass
class Check:
    name: str
    cases: int = 0
    failures: int = 0
    counterexamples: list[dict] = field(default_factory=list)

    def record(self, ok: bool, example: Callable[[], dict]) -> None:
        self.cases += 1
        if not ok:
            self.failures += 1
            if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
                self.counterexamples.append(example())

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {"name": self.name, "cases": self.cases, "failures": self.failures, "counterexamples": self.counterexamples}


@dataclass
class OracleReport:
    suite: str
    params: dict
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"suite": self.suite, "ok": self.ok, "params": self.params, "checks": [c.to_json() for c in self.checks]}


# --- brute-force primitives ------------------------------------------------------


def partial_matrix_ok(mat: Sequence[Sequence[Fraction | None]]) -> bool:
    """Every off-diagonal known entry is positive and every triangle with
    all three sides known satisfies the triangle inequality."""
    n = len(mat)
    for i in range(n):
        for j in range(i + 1, n):
            if mat[i][j] is not None and mat[i][j] <= 0:
                return False
    for i, j, k in combinations(range(n), 3):
        a, b, c = mat[i][j], mat[j][k], mat[i][k]
        if a is None or b is None or c is None:
            continue
        if a > b + c or b > a + c or c > a + b:
            return False
    return True


def toeplitz_brute(f: Sequence[Fraction | int]) -> bool:
    """All triangles ``0, i, i+j`` of the shift-invariant metric (which by
    shift invariance are all triangles on ``0..n``)."""
    v = (0,) + tuple(f)
    n = len(f)
    if any(x <= 0 for x in f):
        return False
    for i in range(1, n + 1):
        for j in range(1, n + 1 - i):
            a, b, c = v[i], v[j], v[i + j]
            if a > b + c or b > a + c or c > a + b:
                return False
    return True


def admissible_brute(f: Sequence[int], h: Sequence[int]) -> bool:
    """A new point at distances ``h`` from ``1..m`` on the line where only
    gaps up to ``len(f)`` carry a known distance."""
    n, m = len(f), len(h)
    mat: list[list[Fraction | None]] = [[None] * (m + 1) for _ in range(m + 1)]
    for i in range(m):
        mat[i][i] = 0
        for j in range(m):
            if 0 < abs(i - j) <= n:
                mat[i][j] = f[abs(i - j) - 1]
        mat[i][m] = mat[m][i] = h[i]
    mat[m][m] = 0
    return partial_matrix_ok(mat)


def integer_spaces(points: int, maximum: int) -> Iterator[FiniteMetricSpace]:
    """Integer metric spaces with ``1..points`` points and distances in
    ``1..maximum``, one per isometry class (the lexicographically least
    upper triangle under relabelling)."""
    for n in range(1, points + 1):
        pairs = list(combinations(range(n), 2))
        perms = list(permutations(range(n)))
        for vals in product(range(1, maximum + 1), repeat=len(pairs)):
            d = dict(zip(pairs, vals))
            mat = [[0 if i == j else d[min(i, j), max(i, j)] for j in range(n)] for i in range(n)]
            if not partial_matrix_ok(mat):
                continue
            if any(tuple(mat[p[i]][p[j]] for i, j in pairs) < vals for p in perms):
                continue
            yield FiniteMetricSpace.from_matrix(mat)


def _spec_matrix(m: FiniteMetricSpace, support: Sequence[int], g: Sequence[int], extra: int = 1, scale: int = 1):
    """Matrix on ``support`` plus ``extra`` new points, all at distances ``g``
    from the support; distances among the new points are left unknown.

    Entries are multiplied by ``scale`` and kept as ints (all inputs here
    are integers), which keeps the brute-force scans cheap.
    """
    k = len(support)
    size = k + extra
    mat: list[list[int | None]] = [[None] * size for _ in range(size)]
    for i in range(size):
        mat[i][i] = 0
    for i, a in enumerate(support):
        for j, b in enumerate(support):
            x = m.dist[a][b] * scale
            if x.denominator != 1:
                raise ValueError("oracle spaces must be integral")
            mat[i][j] = int(x)
        for z in range(k, size):
            mat[i][z] = mat[z][i] = g[i] * scale
    return mat


# --- suites ---------------------------------------------------------------------------


def metric_suite(points: int = 4, maximum: int = 4) -> OracleReport:
    """Extension soundness and the sphere diameter, over every integer spec
    (values ``0..maximum``, any support) on every small integer space."""
    soundness = Check("extension-soundness")
    sphere = Check("sphere-diameter")
    for m in integer_spaces(points, maximum):
        base = GrowingSpace.from_space(m)
        pts = list(m.points)
        for k in range(len(pts) + 1):
            for support in combinations(pts, k):
                for g in product(range(maximum + 1), repeat=k):
                    spec = DistanceSpec(dict(zip(support, g)))
                    accepted = not check_extension_spec(m, spec)
                    example = lambda: {"space": _space_json(m), "spec": {str(a): fmt(v) for a, v in spec.targets.items()}}
                    if accepted:
                        gs = base.copy()
                        try:
                            z = extend_point(gs, spec)
                        except ForgeError as exc:
                            soundness.record(False, lambda: {**example(), "error": exc.to_json()})
                            continue
                        ok = validate_metric(gs.space).ok and all(gs.d(z, a) == v for a, v in spec.targets.items())
                    else:
                        ok = not partial_matrix_ok(_spec_matrix(m, support, g))
                    soundness.record(ok, example)
                    if accepted and k:
                        sphere.record(_sphere_ok(m, base, spec, support, g), example)
    return OracleReport("metric", {"points": points, "max": maximum}, [soundness, sphere])


def _sphere_ok(m, base, spec, support, g) -> bool:
    # d(z1, z2) ranges over the half-integers up to 2 max g + 1
    mat = _spec_matrix(m, support, g, extra=2, scale=2)
    i, j = len(support), len(support) + 1
    best = None
    for num in range(1, 4 * max(g) + 3):
        mat[i][j] = mat[j][i] = num
        if partial_matrix_ok(mat):
            best = Fraction(num, 2)
    bound = sphere_diameter_bound(spec)
    if best != 2 * min(g) or bound != best:
        return False
    gs = base.copy()
    try:
        z1, z2 = realize_sphere_pair(gs, spec)
    except ForgeError:
        return False
    return (
        gs.d(z1, z2) == bound
        and validate_metric(gs.space).ok
        and all(gs.d(z1, a) == v and gs.d(z2, a) == v for a, v in spec.targets.items())
    )


def _space_json(m: FiniteMetricSpace) -> dict:
    return space_to_json(m)


def toeplitz_suite(n: int = 6, maximum: int = 5, prolong_n: int = 3, prolong_max: int = 5) -> OracleReport:
    """Amalgamation bounds on every integer prefix up to length ``n``, and
    prolongation of every admissible pair of length up to ``prolong_n``."""
    agree = Check("toeplitz-validator-agrees")
    bounds = Check("amalgamation-bounds")
    valid_by_len: dict[int, list[tuple[int, ...]]] = {0: [()]}
    for length in range(1, max(n, prolong_n) + 1):
        valid_by_len[length] = []
        for prev in valid_by_len[length - 1]:
            for x in range(1, max(maximum, prolong_max) + 1):
                f = prev + (x,)
                ok = toeplitz_brute(f)
                if max(f) <= maximum and length <= n:
                    agree.record(ok == is_toeplitz(f).ok, lambda: {"prefix": fmt_list(f)})
                if ok:
                    valid_by_len[length].append(f)
    for length in range(1, n + 1):
        for f in valid_by_len[length]:
            if max(f) > maximum:
                continue
            M, mm = amalgamation_bounds(f)
            direct_M = max(abs(f[k] - f[length - 1 - k]) for k in range(length))
            direct_m = min(f[k] + f[length - 1 - k] for k in range(length))
            # some integer in [M, m] really extends the prefix
            extends = any(toeplitz_brute(f + (x,)) for x in range(direct_M, direct_m + 1))
            ok = M == direct_M and mm == direct_m and direct_M <= direct_m and extends
            bounds.record(ok, lambda: {"prefix": fmt_list(f), "M": fmt(M), "m": fmt(mm)})
    checks = [agree, bounds]
    if prolong_n > 0:
        checks.append(_prolong_check(valid_by_len, prolong_n, prolong_max))
    params = {"n": n, "max": maximum, "prolong_n": prolong_n, "prolong_max": prolong_max}
    return OracleReport("toeplitz", params, checks)


def _prolong_check(valid_by_len, prolong_n: int, prolong_max: int) -> Check:
    check = Check("prolongation")
    for length in range(1, prolong_n + 1):
        for f in valid_by_len[length]:
            if max(f) > prolong_max:
                continue
            for h in product(range(1, prolong_max + 1), repeat=length):
                if not admissible_brute(f, h):
                    continue
                example = lambda: {"F": fmt_list(f), "H": fmt_list(h)}
                try:
                    out = prolong(f, h)
                except ForgeError as exc:
                    check.record(False, lambda: {**example(), "error": exc.to_json()})
                    continue
                ok = (
                    is_admissible(f, h).ok
                    and toeplitz_brute(out)
                    and tuple(out[:length]) == f
                    and tuple(out[-length:]) == h
                )
                check.record(ok, example)
    return check


def isometry_suite(points: int = 4, maximum: int = 4, steps: int = 4, stages: int = 42) -> OracleReport:
    """Bounded back-and-forth from every partial isometry of at most two
    pairs on every small space, and the unbounded construction."""
    bounded = Check("bounded-back-and-forth")
    for m in integer_spaces(points, maximum):
        base = GrowingSpace.from_space(m)
        pts = list(m.points)
        tuples = [t for r in (1, 2) for t in permutations(pts, r)]
        for t1 in tuples:
            for t2 in tuples:
                if len(t1) != len(t2) or any(m.dist[a][b] != m.dist[c][d] for (a, c), (b, d) in combinations(zip(t1, t2), 2)):
                    continue
                disp = max(m.dist[a][b] for a, b in zip(t1, t2))
                pairs_json = [list(p) for p in zip(t1, t2)]
                for k in range(maximum + 1):
                    example = lambda: {"space": _space_json(m), "pairs": pairs_json, "k": k}
                    gs = base.copy()
                    f = PartialIsometry(zip(t1, t2), bound=k)
                    if k < disp:
                        # the hypothesis d(a_i, b_i) <= k fails: refusal expected
                        try:
                            extend_bounded(gs, f, first_missing(gs, f.forward))
                            refused = False
                        except PreconditionError:
                            refused = True
                        bounded.record(refused, example)
                        continue
                    try:
                        problems = back_and_forth_bounded(gs, f, steps)
                    except ForgeError as exc:
                        bounded.record(False, lambda: {**example(), "error": exc.to_json()})
                        continue
                    pairs = f.pairs
                    ok = (
                        not problems
                        and all(gs.d(a, b) <= k for a, b in pairs)
                        and all(gs.d(a, c) == gs.d(b, d) for (a, b), (c, d) in combinations(pairs, 2))
                        and validate_metric(gs.space).ok
                    )
                    bounded.record(ok, example)
    unbounded = Check("unbounded-certificates")
    gs = GrowingSpace()
    f, certs = build_unbounded(gs, stages)
    by_n = {int(c.threshold): c for c in certs if c.threshold is not None}
    for n in range(1, (stages - 2) // 4 + 1):
        c = by_n.get(n)
        ok = c is not None and gs.d(c.point, c.image) == c.displacement >= n and f.forward.get(c.point) == c.image
        unbounded.record(ok, lambda: {"n": n, "certificate": None if c is None else c.to_json()})
    unbounded.record(not f.problems(gs) and validate_metric(gs.space).ok, lambda: {"problems": f.problems(gs)})
    return OracleReport("isometry", {"points": points, "max": maximum, "steps": steps, "stages": stages}, [bounded, unbounded])


def _invariant_matrix(delta: dict[int, Fraction], size: int) -> list[list[Fraction]]:
    return [[Fraction(0) if x == y else delta[x ^ y] for y in range(size)] for x in range(size)]


def group2_suite(levels: int = 2, maximum: int = 4, invariance_levels: int = 4, seeds: int = 5) -> OracleReport:
    """Accept-iff-valid for every integer prescription on every integer
    invariant metric up to ``levels``, and translation invariance."""
    equivalence = Check("extension-iff-valid")
    invariance = Check("translation-invariance")
    metrics = [InvariantMetric(0, {})]
    for level in range(levels + 1):
        size = 1 << level
        grown = []
        for m in metrics:
            for vals in product(range(1, maximum + 1), repeat=size):
                new = dict(enumerate(Fraction(v) for v in vals))
                delta = dict(m.delta)
                delta.update({size ^ x: v for x, v in new.items()})
                valid = partial_matrix_ok(_invariant_matrix(delta, 2 * size))
                full = validate_metric(FiniteMetricSpace.from_matrix(_invariant_matrix(delta, 2 * size))).ok
                try:
                    out = extend_invariant_metric(m, new)
                    accepted = True
                except ForgeError:
                    accepted = False
                consistent = not consistency_violations(m, new)
                equivalence.record(
                    accepted == valid == full == consistent,
                    lambda: {"metric": m.to_json(), "new": [fmt(v) for v in vals]},
                )
                if accepted:
                    grown.append(out)
                    if out.level <= invariance_levels:
                        invariance.record(translation_invariant(out.to_space()), lambda: {"metric": out.to_json()})
        metrics = grown
    for level in range(1, invariance_levels + 1):
        for seed in range(seeds):
            g = generic_invariant_metric(level, Domain.integers(maximum + 1), seed)
            invariance.record(translation_invariant(g.to_space()) and validate_metric(g.to_space()).ok, lambda: {"metric": g.to_json()})
    params = {"levels": levels, "max": maximum, "invariance_levels": invariance_levels, "seeds": seeds}
    return OracleReport("group2", params, [equivalence, invariance])


def orbit_suite(spaces: int = 50, points: int = 12, uv_bound: int = 3, domain: str = "int:4", series: str = "harmonic") -> OracleReport:
    """Targeted extension produces a witness for every small ``(U, V)``."""
    check = Check("targeted-witness")
    dom = Domain.parse(domain)
    for seed in range(spaces):
        gs = generic_space(points, dom, seed)
        part = build_partition(series, required_cover(gs))
        base = metric_to_graph(gs, part)
        for U, V in uv_pairs(range(points), uv_bound):
            try:
                res = targeted_extension(gs.copy(), part, U, V, base)
            except ForgeError as exc:
                check.record(False, lambda: {"seed": seed, "U": list(U), "V": list(V), "error": exc.to_json()})
                continue
            check.record(res.witness is not None, lambda: {"seed": seed, **res.to_json()})
    params = {"spaces": spaces, "points": points, "uv_bound": uv_bound, "domain": domain, "series": series}
    return OracleReport("orbit", params, [check])


SUITES: dict[str, Callable[..., OracleReport]] = {
    "metric": metric_suite,
    "toeplitz": toeplitz_suite,
    "isometry": isometry_suite,
    "group2": group2_suite,
    "orbit": orbit_suite,
}
