"""Shift-invariant (Toeplitz) distance functions on the integers.

A prefix ``(f(1), ..., f(n))`` with ``f(0) = 0`` defines the metric
``d(i, j) = f(|i - j|)`` on ``{0, ..., n}``.  This module checks such prefixes,
extends them while keeping a prescribed window reachable, and grows a prefix
that realises every admissible integer vector it has processed.  The shift
``i -> i + 1`` is then an isometry moving every point by ``f(1)``.

Positions are 1-based in all reports, matching ``f(1), f(2), ...``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Iterator, Sequence

from .errors import InfeasibleError, PreconditionError, SearchBudgetExceeded
from .metric import FiniteMetricSpace
from .rational import RationalLike, fmt, fmt_list, is_integral, to_rational

SEARCH_BUDGET = 10**6


def _vals(values: Sequence[RationalLike]) -> tuple[Fraction, ...]:
    return tuple(to_rational(v) for v in values)


def _ints(values: Sequence[RationalLike], what: str) -> list[int]:
    vals = _vals(values)
    if not is_integral(vals):
        raise PreconditionError(f"{what} must be integer valued here", {what: fmt_list(vals)})
    return [int(v) for v in vals]


@dataclass(frozen=True)
class Violation:
    """A failed double inequality ``|x - y| <= z <= x + y``.

    For prefixes ``(i, j)`` means ``x=f(i), y=f(j), z=f(i+j)``; for admissible
    vectors ``(i, k)`` means ``x=h(i), y=h(i+k), z=f(k)``.
    """

    i: int
    j: int
    side: str  # "lower", "upper" or "positive"

    def to_json(self) -> dict:
        return {"i": self.i, "j": self.j, "side": self.side}


@dataclass
class Report:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def is_toeplitz(values: Sequence[RationalLike]) -> Report:
    f = (Fraction(0),) + _vals(values)
    n = len(f) - 1
    rep = Report()
    for i in range(1, n + 1):
        if f[i] <= 0:
            rep.violations.append(Violation(i, 0, "positive"))
    for s in range(2, n + 1):
        fs = f[s]
        for i in range(1, s // 2 + 1):
            a, b = f[i], f[s - i]
            if abs(a - b) > fs:
                rep.violations.append(Violation(i, s - i, "lower"))
            if fs > a + b:
                rep.violations.append(Violation(i, s - i, "upper"))
    return rep


def _toeplitz_ok(f: Sequence[int]) -> bool:
    """Fast boolean check; ``f`` is 1-based with ``f[0] == 0``."""
    n = len(f) - 1
    for s in range(1, n + 1):
        fs = f[s]
        if fs <= 0:
            return False
        for i in range(1, s // 2 + 1):
            a, b = f[i], f[s - i]
            if fs > a + b or a - b > fs or b - a > fs:
                return False
    return True


def is_admissible(F: Sequence[RationalLike], h: Sequence[RationalLike]) -> Report:
    """``|h(i) - h(i+k)| <= f(k) <= h(i) + h(i+k)`` for ``1 <= i < i+k <= m``, ``k <= n``."""
    f = (Fraction(0),) + _vals(F)
    hv = (Fraction(0),) + _vals(h)
    n, m = len(f) - 1, len(hv) - 1
    rep = Report()
    for i in range(1, m + 1):
        if hv[i] <= 0:
            rep.violations.append(Violation(i, 0, "positive"))
    for k in range(1, min(n, m - 1) + 1):
        fk = f[k]
        for i in range(1, m - k + 1):
            a, b = hv[i], hv[i + k]
            if abs(a - b) > fk:
                rep.violations.append(Violation(i, k, "lower"))
            if fk > a + b:
                rep.violations.append(Violation(i, k, "upper"))
    return rep


def amalgamation_bounds(F: Sequence[RationalLike]) -> tuple[Fraction, Fraction]:
    """``(M, m)``: the range a value appended at index ``n+1`` must lie in.

    ``M = max_k |f(k) - f(n-k+1)|`` and ``m = min_k f(k) + f(n-k+1)``.  For a
    valid prefix ``M <= m``.
    """
    f = _vals(F)
    n = len(f)
    if n == 0:
        raise PreconditionError("empty prefix has no amalgamation bounds", {})
    pairs = [(f[k - 1], f[n - k]) for k in range(1, n + 1)]
    return max(abs(a - b) for a, b in pairs), min(a + b for a, b in pairs)


@dataclass(frozen=True)
class ExtensionStep:
    g1: int  # appended to the prefix
    gN: int  # prepended to the window vector
    d: int


def _link_range(lo1, hi1, lo2, hi2, hn):
    """Range of g1 for which some gN in [lo2, hi2] has |g1-gN| <= hn <= g1+gN."""
    return max(lo1, lo2 - hn, hn - hi2), min(hi1, hi2 + hn)


def _extend_one(f: Sequence[int], h: Sequence[int], clamp: tuple[int, int]) -> tuple[int, int]:
    n = len(f)
    a_lo = a_hi = None
    for k in range(n):
        x, y = f[k], f[n - 1 - k]
        lo, hi = abs(x - y), x + y
        a_lo = lo if a_lo is None or lo > a_lo else a_lo
        a_hi = hi if a_hi is None or hi < a_hi else a_hi
    b_lo = max(abs(x - y) for x, y in zip(f, h))
    b_hi = min(x + y for x, y in zip(f, h))
    c0, c1 = clamp
    lo1, hi1 = max(a_lo, c0), min(a_hi, c1)
    lo2, hi2 = max(b_lo, c0), min(b_hi, c1)
    hn = h[-1]
    g_lo, g_hi = _link_range(lo1, hi1, lo2, hi2, hn)
    if lo1 > hi1 or lo2 > hi2 or g_lo > g_hi:
        raise InfeasibleError(
            "no (g1, gN) satisfies the extension system within the clamp",
            {
                "g1_interval": [a_lo, a_hi],
                "gN_interval": [b_lo, b_hi],
                "link": {"h_last": hn, "g1_range": [g_lo, g_hi]},
                "clamp": [c0, c1],
            },
        )
    g1 = (g_lo + g_hi) // 2
    n_lo, n_hi = max(lo2, g1 - hn, hn - g1), min(hi2, g1 + hn)
    return g1, (n_lo + n_hi) // 2


def extend_one(
    F: Sequence[RationalLike], H: Sequence[RationalLike], clamp: tuple[int, int] | None = None
) -> ExtensionStep:
    """One coordinate appended to ``F`` (``g1``) and one prepended to ``H`` (``gN``).

    The default clamp is ``[2, d-1]`` with ``d`` the largest entry of ``F`` and
    ``H``; an explicit clamp replaces it.  Ties are broken by the rounded-down
    midpoint, first of the feasible range of ``g1``, then of ``gN`` given ``g1``.
    """
    f, h = _ints(F, "F"), _ints(H, "H")
    if not f or len(f) != len(h):
        raise PreconditionError("F and H must be non-empty and of equal length", {"n_F": len(f), "n_H": len(h)})
    d = max(f + h)
    if clamp is None:
        clamp = (2, d - 1)
    g1, gN = _extend_one(f, h, clamp)
    return ExtensionStep(g1, gN, d)


# --- prolongation -------------------------------------------------------------


@dataclass(frozen=True)
class Prolongation:
    values: tuple[Fraction, ...]
    method: str  # "blocks" or "search"
    factor: int
    n: int

    @property
    def gap(self) -> int:
        return len(self.values) - 2 * self.n


def _block_scheme(f: list[int], h: list[int]) -> list[int] | None:
    n = len(f)
    d = max(f + h)
    if d < 3:
        return None
    left, right = list(f), list(h)
    # Two-sided sweep, one pair of blocks per depth, the clamp shrinking by one on each side.
    depth = 1
    while d - 2 * depth >= (1 if d % 2 else 2):
        clamp = (depth + 1, d - depth)
        for _ in range(n):
            try:
                g1, gN = _extend_one(left, right, clamp)
            except InfeasibleError:
                return None
            left.append(g1)
            right.insert(0, gN)
        depth += 1
    middle_blocks = 1 if d % 2 else 2
    # The last odd-d clamp [k+1, d-k] collapses to (d+1)/2; even d keeps the lower end d/2.
    middle_value = (d + 1) // 2 if d % 2 else d // 2
    out = left + [middle_value] * (n * middle_blocks) + right
    return out


def _static_ok(v: list[int], fixed_lo: int, fixed_hi: int) -> bool:
    """Check all triples whose three positions avoid the open gap (fixed_lo, fixed_hi)."""
    L = len(v) - 1
    for s in range(2, L + 1):
        if fixed_lo < s < fixed_hi:
            continue
        for i in range(1, s // 2 + 1):
            j = s - i
            if fixed_lo < i < fixed_hi or fixed_lo < j < fixed_hi:
                continue
            a, b, c = v[i], v[j], v[s]
            if c > a + b or a - b > c or b - a > c:
                return False
    return True


class _GapSearch:
    """Depth-first fill of the gap between a fixed prefix and a fixed tail."""

    def __init__(self, f: list[int], h: list[int], top: int, budget: int):
        self.f, self.h, self.top = f, h, top
        self.budget = budget
        self.nodes = 0

    def run(self, m: int) -> list[int] | None:
        n, k = len(self.f), len(self.h)
        L = n + m + k
        v = [0] + self.f + [0] * m + self.h
        if not _static_ok(v, n, n + m + 1):
            return None
        if self._fill(v, n + 1, n + m, L):
            return v[1:]
        return None

    def _fill(self, v: list[int], p: int, last: int, L: int) -> bool:
        if p > last:
            return True
        lo, hi = 1, self.top
        for i in range(1, p // 2 + 1):
            a, b = v[i], v[p - i]
            if a + b < hi:
                hi = a + b
            diff = a - b if a >= b else b - a
            if diff > lo:
                lo = diff
        if lo > hi:
            return False
        tail_start = last + 1
        j_lo = max(1, tail_start - p)
        j_hi = min(p, L - p)
        for val in range(lo, hi + 1):
            self.nodes += 1
            if self.nodes > self.budget:
                raise SearchBudgetExceeded("gap search exhausted its budget", {"budget": self.budget})
            v[p] = val
            ok = True
            for j in range(j_lo, j_hi + 1):
                a, c = v[j], v[p + j]
                if c > val + a or val - a > c or a - val > c:
                    ok = False
                    break
            if ok and self._fill(v, p + 1, last, L):
                return True
        v[p] = 0
        return False


def search_prolongation(
    F: Sequence[int],
    H: Sequence[int],
    top: int | None = None,
    min_gap: int = 1,
    max_gap: int | None = None,
    budget: int = SEARCH_BUDGET,
) -> list[int]:
    """Shortest integer gap ``G`` (values in ``[1, top]``) with ``F + G + H`` Toeplitz.

    Gap lengths are tried in increasing order, values smallest first.  The
    node budget is shared across all lengths.
    """
    f, h = list(F), list(H)
    if top is None:
        top = max(f + h)
    if max_gap is None:
        max_gap = max(min_gap, len(f) * top)
    search = _GapSearch(f, h, top, budget)
    for m in range(min_gap, max_gap + 1):
        found = search.run(m)
        if found is not None:
            return found
    raise InfeasibleError("no gap of the searched lengths works", {"min_gap": min_gap, "max_gap": max_gap, "top": top})


def scale_to_integer(
    F: Sequence[RationalLike], H: Sequence[RationalLike]
) -> tuple[list[int], list[int], int]:
    """Scale ``F`` and ``H`` to integers by the lcm of their denominators,
    times 3 when the largest scaled entry is still below 3."""
    vals = _vals(F) + _vals(H)
    factor = reduce(math.lcm, (v.denominator for v in vals), 1)
    if vals and max(vals) * factor < 3:
        factor *= 3
    return [int(v * factor) for v in _vals(F)], [int(v * factor) for v in _vals(H)], factor


def prolong_detailed(F: Sequence[RationalLike], H: Sequence[RationalLike], budget: int = SEARCH_BUDGET) -> Prolongation:
    fv, hv = _vals(F), _vals(H)
    if not fv or len(fv) != len(hv):
        raise PreconditionError("F and H must be non-empty and of equal length", {"n_F": len(fv), "n_H": len(hv)})
    if not is_toeplitz(fv):
        raise PreconditionError("F is not a Toeplitz prefix", {"F": fmt_list(fv)})
    adm = is_admissible(fv, hv)
    if not adm:
        raise PreconditionError("H is not F-admissible", {"violations": [v.to_json() for v in adm.violations]})
    if is_integral(fv + hv):
        f, h, factor = [int(x) for x in fv], [int(x) for x in hv], 1
    else:
        f, h, factor = scale_to_integer(fv, hv)

    out = _block_scheme(f, h)
    method = "blocks"
    if out is None or not _toeplitz_ok([0] + out):
        out = search_prolongation(f, h, budget=budget)
        method = "search"
    values = tuple(Fraction(x, factor) for x in out)
    return Prolongation(values, method, factor, len(f))


def prolong(F: Sequence[RationalLike], H: Sequence[RationalLike]) -> tuple[Fraction, ...]:
    """A Toeplitz prefix that starts with ``F`` and ends with ``H``.

    The explicit two-sided block construction is tried first; if any of its
    steps is infeasible or its output fails validation, a depth-first search
    over the gap takes over.
    """
    return prolong_detailed(F, H).values


# --- windows, universality ---------------------------------------------------


@dataclass(frozen=True)
class WindowMatch:
    offset: int
    orientation: str  # "forward": f(N+i) = h(i); "reverse": f(N-i) = h(i)


def verify_window_realization(F: Sequence[RationalLike], h: Sequence[RationalLike]) -> WindowMatch | None:
    """Smallest offset at which ``h`` sits in ``F``, forward or reversed
    (forward wins ties)."""
    f = (Fraction(0),) + _vals(F)
    hv = _vals(h)
    n, k = len(f) - 1, len(hv)
    if k == 0 or k > n:
        return None
    best = None
    for N in range(0, n - k + 1):
        if all(f[N + i] == hv[i - 1] for i in range(1, k + 1)):
            best = WindowMatch(N, "forward")
            break
    for N in range(k + 1, n + 1):
        if best is not None and N >= best.offset:
            break
        if all(f[N - i] == hv[i - 1] for i in range(1, k + 1)):
            best = WindowMatch(N, "reverse")
            break
    return best


def enumerate_vectors() -> Iterator[tuple[int, ...]]:
    """Every positive integer vector exactly once.

    Stage ``s`` lists the vectors with entries and length at most ``s`` not
    seen in earlier stages, ordered by (max entry, length, lexicographic).
    """
    s = 1
    while True:
        stage = []
        for length in range(1, s + 1):
            for vec in product(range(1, s + 1), repeat=length):
                if length == s or max(vec) == s:
                    stage.append(vec)
        stage.sort(key=lambda v: (max(v), len(v), v))
        yield from stage
        s += 1


@dataclass
class UniversalResult:
    values: tuple[Fraction, ...]
    table: list[tuple[tuple[int, ...], int]]  # (vector, forward offset N)
    skipped: list[tuple[tuple[int, ...], str]]
    prolongations: int = 0


def _pad_front(f: list[int], h: list[int]) -> list[int]:
    """Extend ``h`` to the length of ``f`` by prepending midpoint values,
    keeping it ``f``-admissible."""
    h = list(h)
    while len(h) < len(f):
        lo = max(abs(f[i] - h[i]) for i in range(len(h)))
        hi = min(f[i] + h[i] for i in range(len(h)))
        h.insert(0, (lo + hi) // 2 if (lo + hi) // 2 >= 1 else hi)
    return h


def universal_prefix(
    steps: int,
    F0: Sequence[int] = (1,),
    vectors: Iterator[tuple[int, ...]] | None = None,
    budget: int = SEARCH_BUDGET,
) -> UniversalResult:
    """Grow ``F0`` until ``steps`` admissible vectors are realised as windows.

    Each vector from the enumeration is checked for admissibility against the
    current prefix.  Inadmissible vectors, and vectors longer than the prefix,
    are recorded as skipped.  An admissible vector already present as a
    forward window costs nothing; otherwise the prefix is prolonged to end
    with it, using the shortest gap found by search and the full-length
    prolongation as a fallback.
    """
    f = _ints(F0, "F0")
    if not _toeplitz_ok([0] + f):
        raise PreconditionError("seed prefix is not Toeplitz", {"F0": fmt_list(f)})
    vectors = vectors if vectors is not None else enumerate_vectors()
    table: list[tuple[tuple[int, ...], int]] = []
    skipped: list[tuple[tuple[int, ...], str]] = []
    prolongations = 0
    while len(table) < steps:
        vec = tuple(next(vectors))
        if len(vec) > len(f):
            skipped.append((vec, "longer than prefix"))
            continue
        if not is_admissible(f, vec):
            skipped.append((vec, "not admissible"))
            continue
        where = _forward_offset(f, vec)
        if where is None:
            try:
                f = f + search_prolongation(f, list(vec), budget=budget)[len(f):]
            except (InfeasibleError, SearchBudgetExceeded):
                padded = _pad_front(f, list(vec))
                f = [int(x) for x in prolong_detailed(f, padded, budget=budget).values]
            prolongations += 1
            where = len(f) - len(vec)
        table.append((vec, where))
    return UniversalResult(tuple(Fraction(x) for x in f), table, skipped, prolongations)


def _forward_offset(f: Sequence[int], vec: Sequence[int]) -> int | None:
    k = len(vec)
    first = vec[0]
    for N in range(0, len(f) - k + 1):
        if f[N] == first and list(f[N : N + k]) == list(vec):
            return N
    return None


# --- the induced metric ------------------------------------------------------


def cyclic_metric(F: Sequence[RationalLike], size: int | None = None) -> FiniteMetricSpace:
    """Points ``0..size`` with ``d(i, j) = f(|i - j|)``."""
    f = (Fraction(0),) + _vals(F)
    if size is None:
        size = len(f) - 1
    if size > len(f) - 1 or size < 0:
        raise PreconditionError("size exceeds prefix length", {"size": size, "length": len(f) - 1})
    return FiniteMetricSpace(tuple(tuple(f[abs(i - j)] for j in range(size + 1)) for i in range(size + 1)))


def shift_pairs(size: int) -> list[tuple[int, int]]:
    """The shift ``i -> i+1`` on ``{0, ..., size-1}``."""
    return [(i, i + 1) for i in range(size)]


def conjugacy_invariant(F: Sequence[RationalLike]) -> tuple[Fraction, ...]:
    """``n -> d(x, g^n x)``; conjugate cyclic isometries share it."""
    return _vals(F)


@dataclass(frozen=True)
class ConjugacyVerdict:
    distinguished: bool
    index: int | None  # first 1-based index where the invariants differ
    compared: int


def compare_invariants(F1: Sequence[RationalLike], F2: Sequence[RationalLike]) -> ConjugacyVerdict:
    a, b = conjugacy_invariant(F1), conjugacy_invariant(F2)
    n = min(len(a), len(b))
    for i in range(n):
        if a[i] != b[i]:
            return ConjugacyVerdict(True, i + 1, n)
    return ConjugacyVerdict(False, None, n)
