"""Finite rational metric spaces and the one-point extension property.

A :class:`GrowingSpace` is the finite stand-in for the rational Urysohn
space: it only ever grows by adding a point whose distances to some subset
of the existing points are prescribed and consistent.  Every other module
builds on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
from gmpy2 import mpq

from .errors import ExtensionError, MetricStructureError, PreconditionError
from .rational import RationalLike, fmt, to_rational
from .rng import SplitMix64

ZERO = Fraction(0)
ONE = Fraction(1)

# Above this many points the triangle scan is vectorised over integers.
_FAST_PATH_POINTS = 40


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Immutable snapshot: point ``i`` is row ``i`` of ``dist``."""

    dist: tuple[tuple[Fraction, ...], ...]
    names: tuple[str, ...] | None = None

    @classmethod
    def from_matrix(
        cls, rows: Sequence[Sequence[RationalLike]], names: Sequence[str] | None = None
    ) -> "FiniteMetricSpace":
        dist = tuple(tuple(to_rational(x) for x in row) for row in rows)
        return cls(dist, tuple(names) if names is not None else None)

    @property
    def points(self) -> range:
        return range(len(self.dist))

    def __len__(self) -> int:
        return len(self.dist)

    def d(self, i: int, j: int) -> Fraction:
        return self.dist[i][j]

    def name(self, i: int) -> str:
        return self.names[i] if self.names else str(i)

    def diameter(self) -> Fraction:
        return max((self.dist[i][j] for i, j in combinations(self.points, 2)), default=ZERO)

    def min_distance(self, pts: Iterable[int] | None = None) -> Fraction | None:
        pts = list(self.points if pts is None else pts)
        return min((self.dist[i][j] for i, j in combinations(pts, 2)), default=None)

    def subspace(self, pts: Sequence[int]) -> "FiniteMetricSpace":
        names = tuple(self.name(p) for p in pts) if self.names else None
        return FiniteMetricSpace(tuple(tuple(self.dist[i][j] for j in pts) for i in pts), names)


@dataclass(frozen=True)
class TriangleViolation:
    """``d(i,k) > d(i,j) + d(j,k)``."""

    i: int
    j: int
    k: int
    lhs: Fraction
    rhs: Fraction

    def __str__(self) -> str:
        return f"d({self.i},{self.k})={fmt(self.lhs)} > d({self.i},{self.j})+d({self.j},{self.k})={fmt(self.rhs)}"


@dataclass(frozen=True)
class EntryViolation:
    i: int
    j: int
    value: Fraction
    reason: str  # "diagonal" or "nonpositive"


@dataclass
class MetricReport:
    entries: list[EntryViolation] = field(default_factory=list)
    triangles: list[TriangleViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.entries and not self.triangles

    def __bool__(self) -> bool:
        return self.ok


def _check_structure(dist: Sequence[Sequence[Fraction]]) -> None:
    n = len(dist)
    for i, row in enumerate(dist):
        if len(row) != n:
            raise MetricStructureError(
                f"row {i} has {len(row)} entries, expected {n}", {"row": i, "length": len(row), "size": n}
            )
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i][j] != dist[j][i]:
                raise MetricStructureError(
                    f"matrix not symmetric at ({i},{j})",
                    {"i": i, "j": j, "dij": fmt(dist[i][j]), "dji": fmt(dist[j][i])},
                )


def _triangles_exact(dist, limit) -> list[TriangleViolation]:
    n = len(dist)
    out = []
    for i in range(n):
        row_i = dist[i]
        for k in range(i + 1, n):
            dik = row_i[k]
            for j in range(n):
                if j == i or j == k:
                    continue
                rhs = row_i[j] + dist[j][k]
                if dik > rhs:
                    out.append(TriangleViolation(i, j, k, dik, rhs))
                    if limit is not None and len(out) >= limit:
                        return out
    return out


def _triangles_vectorised(dist, limit) -> list[TriangleViolation] | None:
    # Scale to a common denominator; fall back to the exact loop on overflow risk.
    den = 1
    for row in dist:
        for x in row:
            den = math.lcm(den, x.denominator)
    top = max((abs(x) for row in dist for x in row), default=ZERO) * den
    if top * 2 >= 2**62:
        return None
    a = np.array([[int(x * den) for x in row] for row in dist], dtype=np.int64)
    n = len(dist)
    bad = np.zeros((n, n), dtype=bool)
    for j in range(n):
        bad |= a > (a[:, j : j + 1] + a[j : j + 1, :])
    if not bad.any():
        return []
    # Rare path: recover the exact witnesses for the offending pairs only.
    out = []
    for i, k in zip(*np.nonzero(np.triu(bad, 1))):
        i, k = int(i), int(k)
        for j in range(n):
            if j not in (i, k) and dist[i][k] > dist[i][j] + dist[j][k]:
                out.append(TriangleViolation(i, j, k, dist[i][k], dist[i][j] + dist[j][k]))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def validate_metric(m: FiniteMetricSpace | Sequence[Sequence[Fraction]], limit: int | None = None) -> MetricReport:
    """Check the metric axioms exactly.

    Raises :class:`MetricStructureError` for a non-square or non-symmetric
    matrix; every other failure is listed in the returned report.  ``limit``
    caps the number of triangle violations collected.
    """
    dist = m.dist if isinstance(m, FiniteMetricSpace) else m
    _check_structure(dist)
    report = MetricReport()
    n = len(dist)
    for i in range(n):
        if dist[i][i] != 0:
            report.entries.append(EntryViolation(i, i, dist[i][i], "diagonal"))
        for j in range(i + 1, n):
            if dist[i][j] <= 0:
                report.entries.append(EntryViolation(i, j, dist[i][j], "nonpositive"))
    tri = None
    if n >= _FAST_PATH_POINTS:
        tri = _triangles_vectorised(dist, limit)
    if tri is None:
        tri = _triangles_exact(dist, limit)
    report.triangles = tri
    return report


@dataclass(frozen=True)
class DistanceSpec:
    """Prescribed distances ``g`` from a new point to the targets."""

    targets: Mapping[int, Fraction]

    @classmethod
    def of(cls, targets: Mapping[int, RationalLike]) -> "DistanceSpec":
        return cls({int(a): to_rational(v) for a, v in targets.items()})

    def __len__(self) -> int:
        return len(self.targets)

    def min_value(self) -> Fraction:
        return min(self.targets.values())


@dataclass(frozen=True)
class SpecViolation:
    a: int
    b: int | None
    reason: str  # "nonpositive" | "lower" | "upper"
    detail: str

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "reason": self.reason, "detail": self.detail}


def check_extension_spec(m: FiniteMetricSpace | "GrowingSpace", s: DistanceSpec) -> list[SpecViolation]:
    """Violations of the one-point extension condition; empty means accepted.

    A prescribed distance of zero is rejected: it would make the new point a
    duplicate of an existing one.
    """
    dist = m.dist if isinstance(m, FiniteMetricSpace) else m.rows
    n = len(dist)
    for a in s.targets:
        if not 0 <= a < n:
            raise PreconditionError(f"target {a} is not a point of the space", {"target": a, "size": n})
    out = []
    for a, g in s.targets.items():
        if g <= 0:
            out.append(SpecViolation(a, None, "nonpositive", f"g({a})={fmt(g)}"))
    keys = sorted(s.targets)
    for a, b in combinations(keys, 2):
        ga, gb, dab = s.targets[a], s.targets[b], dist[a][b]
        if abs(ga - gb) > dab:
            out.append(SpecViolation(a, b, "lower", f"|g({a})-g({b})|={fmt(abs(ga - gb))} > d={fmt(dab)}"))
        if dab > ga + gb:
            out.append(SpecViolation(a, b, "upper", f"d={fmt(dab)} > g({a})+g({b})={fmt(ga + gb)}"))
    return out


def feasible_interval(
    rows: Sequence[Sequence[Fraction]], p: int, assigned: Mapping[int, Fraction]
) -> tuple[Fraction, Fraction | None]:
    """Values ``t`` for the distance from a new point to ``p`` that keep the
    already assigned distances consistent: ``[max |g(b)-d(p,b)|, min g(b)+d(p,b)]``.

    The upper end is ``None`` when nothing is assigned yet.
    """
    lo = ZERO
    hi = None
    row = rows[p]
    for b, gb in assigned.items():
        dpb = row[b]
        low = gb - dpb if gb >= dpb else dpb - gb
        if low > lo:
            lo = low
        up = gb + dpb
        if hi is None or up < hi:
            hi = up
    return lo, hi


@dataclass(frozen=True)
class LogEntry:
    targets: dict[int, Fraction]
    new: int

    def to_json(self) -> dict:
        return {"targets": {str(a): fmt(g) for a, g in sorted(self.targets.items())}, "new": self.new}


class GrowingSpace:
    """Single-writer, append-only finite metric space.

    ``rows`` is the live distance matrix; :attr:`space` returns an immutable
    snapshot.  Every point ever added is recorded in :attr:`log`, and
    :meth:`replay` rebuilds an identical space from it.
    """

    def __init__(self) -> None:
        self.rows: list[list[Fraction]] = []
        self.log: list[LogEntry] = []
        self.names: list[str] = []
        self._snapshot: FiniteMetricSpace | None = None
        # Same matrix as gmpy2 rationals; the extension loop runs on these.
        self._q: list[list[mpq]] = []
        self._diameter = ZERO

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def points(self) -> range:
        return range(len(self.rows))

    def d(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    def diameter(self) -> Fraction:
        return self._diameter

    @property
    def space(self) -> FiniteMetricSpace:
        if self._snapshot is None:
            self._snapshot = FiniteMetricSpace(tuple(tuple(r) for r in self.rows), tuple(self.names))
        return self._snapshot

    def copy(self) -> "GrowingSpace":
        gs = GrowingSpace()
        gs.rows = [list(r) for r in self.rows]
        gs.log = list(self.log)
        gs.names = list(self.names)
        gs._q = [list(r) for r in self._q]
        gs._diameter = self._diameter
        return gs

    def _append(self, distances: Sequence[mpq], spec: Mapping[int, Fraction], name: str | None) -> int:
        new = len(self.rows)
        exact = [Fraction(int(x.numerator), int(x.denominator)) for x in distances]
        for row, x in zip(self.rows, exact):
            row.append(x)
        self.rows.append(exact + [ZERO])
        top = max(distances, default=None)
        if top is not None and top > self._diameter:
            self._diameter = Fraction(int(top.numerator), int(top.denominator))
        for row, x in zip(self._q, distances):
            row.append(x)
        self._q.append(list(distances) + [mpq(0)])
        self.log.append(LogEntry(dict(spec), new))
        self.names.append(name if name is not None else str(new))
        self._snapshot = None
        return new

    @classmethod
    def replay(cls, log: Iterable[LogEntry]) -> "GrowingSpace":
        gs = cls()
        for entry in log:
            new = extend_point(gs, DistanceSpec(entry.targets))
            if new != entry.new:
                raise PreconditionError("log entry ids are not dense", {"expected": new, "found": entry.new})
        return gs

    @classmethod
    def from_space(cls, m: FiniteMetricSpace) -> "GrowingSpace":
        """Seed from an existing valid space: point ``i`` is added with its
        full distance vector to points ``0..i-1``."""
        report = validate_metric(m)
        if not report.ok:
            raise ExtensionError("input is not a metric space", {"violations": [str(v) for v in report.triangles[:5]]})
        gs = cls()
        for i in m.points:
            extend_point(gs, DistanceSpec({j: m.dist[i][j] for j in range(i)}), name=m.name(i))
        return gs


def _spec_accepted(q: list[list[mpq]], targets: dict[int, mpq]) -> bool:
    n = len(q)
    items = list(targets.items())
    for i, (a, ga) in enumerate(items):
        if not 0 <= a < n:
            raise PreconditionError(f"target {a} is not a point of the space", {"target": a, "size": n})
        if ga <= 0:
            return False
        row = q[a]
        for b, gb in items[:i]:
            dab = row[b]
            if dab > ga + gb or (ga - gb if ga >= gb else gb - ga) > dab:
                return False
    return True


def extend_point(gs: GrowingSpace, s: DistanceSpec, name: str | None = None) -> int:
    """Add a point realising ``s`` and return its id.

    Distances to points outside ``s.targets`` are fixed one at a time, in
    point order, at the midpoint of the interval left open by everything
    assigned so far.  With nothing assigned at all (an empty spec) the first
    free distance is 1.
    """
    q = gs._q
    targets = {a: mpq(g.numerator, g.denominator) for a, g in s.targets.items()}
    if not _spec_accepted(q, targets):
        violations = check_extension_spec(gs, s)
        raise ExtensionError(
            f"distance spec violates the extension condition ({len(violations)} pair(s))",
            {"violations": [v.to_json() for v in violations]},
        )
    assigned = dict(targets)
    half = mpq(1, 2)
    for p in gs.points:
        if p in assigned:
            continue
        row = q[p]
        lo = hi = None
        for b, gb in assigned.items():
            dpb = row[b]
            low = gb - dpb if gb >= dpb else dpb - gb
            if lo is None or low > lo:
                lo = low
            up = gb + dpb
            if hi is None or up < hi:
                hi = up
        assigned[p] = mpq(1) if hi is None else (lo + hi) * half
    return gs._append([assigned[p] for p in gs.points], s.targets, name)


def tuples_isometric(m: FiniteMetricSpace | GrowingSpace, t1: Sequence[int], t2: Sequence[int]) -> bool:
    if len(t1) != len(t2):
        raise PreconditionError("tuples differ in length", {"len1": len(t1), "len2": len(t2)})
    dist = m.dist if isinstance(m, FiniteMetricSpace) else m.rows
    return all(dist[t1[i]][t1[j]] == dist[t2[i]][t2[j]] for i, j in combinations(range(len(t1)), 2))


def sphere_diameter_bound(s: DistanceSpec) -> Fraction:
    """Diameter of the set of points realising ``s``: twice the least prescribed distance."""
    if not s.targets:
        raise PreconditionError("empty spec: the realising set is unbounded", {})
    return 2 * s.min_value()


def realize_sphere_pair(gs: GrowingSpace, s: DistanceSpec) -> tuple[int, int]:
    """Two points both realising ``s`` at the maximal possible mutual distance."""
    bound = sphere_diameter_bound(s)
    z1 = extend_point(gs, s)
    z2 = extend_point(gs, DistanceSpec({**s.targets, z1: bound}))
    return z1, z2


@dataclass(frozen=True)
class Domain:
    """Admissible distance values: the multiples of ``step`` in ``(0, maximum]``.

    Only three shapes are used: rationals with denominator dividing ``q``, the
    integers ``1..D``, and ``{1, 2}`` (graph metrics).
    """

    kind: str
    step: Fraction
    maximum: Fraction

    @classmethod
    def rational(cls, denominator: int, maximum: RationalLike) -> "Domain":
        return cls("rational", Fraction(1, denominator), to_rational(maximum))

    @classmethod
    def integers(cls, maximum: int) -> "Domain":
        return cls("int", ONE, Fraction(maximum))

    @classmethod
    def graph(cls) -> "Domain":
        return cls("graph", ONE, Fraction(2))

    @classmethod
    def parse(cls, text: str) -> "Domain":
        """``int:D``, ``rat:Q:D`` or ``graph``."""
        parts = text.split(":")
        if parts[0] == "graph" and len(parts) == 1:
            return cls.graph()
        if parts[0] == "int" and len(parts) == 2:
            return cls.integers(int(parts[1]))
        if parts[0] in ("rat", "rational") and len(parts) == 3:
            return cls.rational(int(parts[1]), parts[2])
        raise ValueError(f"unknown value domain {text!r} (use int:D, rat:Q:D or graph)")

    def __str__(self) -> str:
        if self.kind == "graph":
            return "graph"
        if self.kind == "int":
            return f"int:{self.maximum}"
        return f"rat:{self.step.denominator}:{fmt(self.maximum)}"

    def values_in(self, lo: Fraction, hi: Fraction | None) -> list[Fraction]:
        """Grid values ``v`` with ``lo <= v <= hi`` (``hi=None``: no upper limit)."""
        top = self.maximum if hi is None else min(hi, self.maximum)
        first = max(1, math.ceil(lo / self.step))
        last = math.floor(top / self.step)
        return [k * self.step for k in range(first, last + 1)]

    def values(self) -> list[Fraction]:
        return self.values_in(ZERO, None)


def sample_spec(rows: Sequence[Sequence[Fraction]], domain: Domain, rng: SplitMix64) -> dict[int, Fraction]:
    """A uniformly chosen consistent full spec, assigned point by point."""
    assigned: dict[int, Fraction] = {}
    for p in range(len(rows)):
        lo, hi = feasible_interval(rows, p, assigned)
        options = domain.values_in(lo, hi)
        if not options:  # cannot happen for grid-closed domains
            raise ExtensionError("empty feasible interval while sampling", {"point": p})
        assigned[p] = rng.choice(options)
    return assigned


def generic_space(n: int, domain: Domain, seed: int = 0) -> GrowingSpace:
    """``n`` points, each added with a random admissible full distance vector."""
    if n < 1:
        raise PreconditionError("n must be at least 1", {"n": n})
    rng = SplitMix64(seed)
    gs = GrowingSpace()
    for _ in range(n):
        extend_point(gs, DistanceSpec(sample_spec(gs.rows, domain, rng)))
    return gs
