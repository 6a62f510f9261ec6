"""From a metric space to a graph: distances in ``E`` become edges.

The positive rationals are cut into half-open intervals ``[s_{n-1}, s_n)``
whose lengths ``a_n`` form a divergent series tending to zero; interval ``n``
belongs to ``E`` when ``n`` is odd and to ``N`` when it is even.  Points
added with distances in the interiors of a consecutive ``E``/``N`` pair of
short, far-out intervals witness the random-graph extension property.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import PreconditionError
from .metric import DistanceSpec, Domain, FiniteMetricSpace, GrowingSpace, extend_point, generic_space
from .rational import RationalLike, fmt, to_rational


@dataclass(frozen=True)
class SeriesSpec:
    """``harmonic`` (1/n), ``harmonic-from:R`` (1/(n+R-1)) or
    ``constant-then-harmonic:C:K`` (C for the first K terms, then 1/(n-K))."""

    kind: str
    start: int = 1
    constant: Fraction = Fraction(1)
    prefix: int = 0

    @classmethod
    def parse(cls, text: str) -> "SeriesSpec":
        parts = text.split(":")
        if parts == ["harmonic"]:
            return cls("harmonic")
        if parts[0] == "harmonic-from" and len(parts) == 2:
            r = int(parts[1])
            if r < 1:
                raise ValueError("harmonic-from needs R >= 1")
            return cls("harmonic-from", start=r)
        if parts[0] == "constant-then-harmonic" and len(parts) == 3:
            c, k = to_rational(parts[1]), int(parts[2])
            if c <= 0 or k < 0:
                raise ValueError("constant-then-harmonic needs C > 0 and K >= 0")
            return cls("constant-then-harmonic", constant=c, prefix=k)
        raise ValueError(f"unknown series {text!r}")

    def __str__(self) -> str:
        if self.kind == "harmonic-from":
            return f"harmonic-from:{self.start}"
        if self.kind == "constant-then-harmonic":
            return f"constant-then-harmonic:{fmt(self.constant)}:{self.prefix}"
        return "harmonic"

    def term(self, n: int) -> Fraction:
        if self.kind == "harmonic-from":
            return Fraction(1, n + self.start - 1)
        if self.kind == "constant-then-harmonic":
            return self.constant if n <= self.prefix else Fraction(1, n - self.prefix)
        return Fraction(1, n)

    @property
    def monotone_from(self) -> int:
        """Index from which the terms never increase."""
        if self.kind == "constant-then-harmonic" and self.constant < 1:
            return self.prefix + 1
        return 1


@dataclass(frozen=True)
class IntervalPartition:
    series: SeriesSpec
    breakpoints: tuple[Fraction, ...]  # s_0 = 0 < s_1 < ...

    def __post_init__(self) -> None:
        # bisect runs on gmpy2 copies; Fraction comparisons dominate otherwise
        object.__setattr__(self, "_fast", tuple(mpq(b.numerator, b.denominator) for b in self.breakpoints))
        object.__setattr__(self, "_pairs", {})

    @property
    def cover(self) -> Fraction:
        """Every ``d`` in ``(0, cover)`` is classified."""
        return self.breakpoints[-1]

    def index(self, d: RationalLike) -> int:
        """``n`` with ``d`` in ``[s_{n-1}, s_n)``."""
        d = to_rational(d)
        if d <= 0:
            raise PreconditionError("only positive distances are classified", {"d": fmt(d)})
        n = bisect_right(self._fast, mpq(d.numerator, d.denominator))
        if n >= len(self.breakpoints):
            raise PreconditionError(
                "distance beyond the partition", {"d": fmt(d), "cover": fmt(self.cover)}
            )
        return n

    def classify(self, d: RationalLike) -> str:
        return "E" if self.index(d) % 2 else "N"

    def interval(self, n: int) -> tuple[Fraction, Fraction]:
        return self.breakpoints[n - 1], self.breakpoints[n]

    def short_pair_after(self, r: RationalLike, eps: RationalLike) -> int:
        """Least ``n >= monotone_from`` with ``s_{n-1} > r`` and ``a_n, a_{n+1} < eps``.

        Intervals ``n`` and ``n+1`` are then consecutive, of opposite classes,
        short, and lie beyond ``r``.
        """
        r, eps = to_rational(r), to_rational(eps)
        if (r, eps) in self._pairs:
            return self._pairs[r, eps]
        bp = self.breakpoints
        for n in range(max(1, self.series.monotone_from), len(bp) - 1):
            if bp[n - 1] > r and bp[n] - bp[n - 1] < eps and bp[n + 1] - bp[n] < eps:
                self._pairs[r, eps] = n
                return n
        raise PreconditionError(
            "partition too short for the requested radius", {"r": fmt(r), "eps": fmt(eps), "cover": fmt(self.cover)}
        )

    def to_json(self) -> dict:
        return {"series": str(self.series), "breakpoints": [fmt(b) for b in self.breakpoints]}


def build_partition(series: SeriesSpec | str, cover_up_to: RationalLike) -> IntervalPartition:
    """Partial sums until they pass ``cover_up_to``."""
    spec = SeriesSpec.parse(series) if isinstance(series, str) else series
    cover = to_rational(cover_up_to)
    if cover <= 0:
        raise PreconditionError("cover_up_to must be positive", {"cover_up_to": fmt(cover)})
    bp = [Fraction(0)]
    n = 1
    while bp[-1] <= cover:
        bp.append(bp[-1] + spec.term(n))
        n += 1
    return IntervalPartition(spec, tuple(bp))


class Graph:
    """Simple undirected graph on integer vertices."""

    def __init__(self, vertices: Iterable[int], edges: Iterable[tuple[int, int]] = (), names: Sequence[str] | None = None):
        self.vertices = tuple(vertices)
        self.adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        self.names = tuple(names) if names is not None else tuple(str(v) for v in self.vertices)
        for u, v in edges:
            self.add_edge(u, v)

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise PreconditionError("loops are not allowed", {"vertex": u})
        self.adj[u].add(v)
        self.adj[v].add(u)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u in self.vertices for v in self.adj[u] if u < v)

    def with_vertex(self, v: int, neighbours: Iterable[int], name: str | None = None) -> "Graph":
        g = Graph(self.vertices + (v,), self.edges, self.names + (name or str(v),))
        for u in neighbours:
            g.add_edge(v, u)
        return g

    def to_dot(self) -> str:
        label = dict(zip(self.vertices, self.names))
        lines = ["graph G {"]
        lines += [f'  {v} [label="{label[v]}"];' for v in self.vertices]
        lines += [f"  {u} -- {v};" for u, v in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "v"])
        w.writerows(self.edges)
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "names": list(self.names), "edges": [list(e) for e in self.edges]}


def _coverage(p: IntervalPartition, diameter: Fraction) -> None:
    if diameter >= p.cover:
        raise PreconditionError(
            "partition does not cover the diameter", {"required_cover_up_to": fmt(diameter), "cover": fmt(p.cover)}
        )


def metric_to_graph(m: FiniteMetricSpace | GrowingSpace, p: IntervalPartition) -> Graph:
    """Edge ``{x, y}`` exactly when ``d(x, y)`` lies in ``E``."""
    space = m.space if isinstance(m, GrowingSpace) else m
    _coverage(p, space.diameter())
    edges = [(x, y) for x, y in combinations(space.points, 2) if p.classify(space.dist[x][y]) == "E"]
    return Graph(space.points, edges, space.names)


def check_graph_extension(g: Graph, U: Iterable[int], V: Iterable[int]) -> int | None:
    """Smallest vertex outside ``U | V`` joined to all of ``U`` and none of ``V``."""
    U, V = set(U), set(V)
    if U & V:
        raise PreconditionError("U and V must be disjoint", {"common": sorted(U & V)})
    for x in g.vertices:
        if x in U or x in V:
            continue
        nb = g.adj[x]
        if U <= nb and not (V & nb):
            return x
    return None


def targeted_spec(gs: GrowingSpace, p: IntervalPartition, U: Iterable[int], V: Iterable[int]) -> dict[int, Fraction]:
    """Distances for a new point joined to ``U`` and not to ``V``.

    With ``R = diam/2`` and ``m`` the least distance in ``U | V``, the first
    consecutive pair of intervals beyond ``R`` with both lengths below
    ``m/2`` is used; ``U`` gets the midpoint of the ``E`` one and ``V`` the
    midpoint of the ``N`` one.  Any two prescribed values then differ by less
    than ``m`` and sum to more than the diameter, so the distances are consistent.
    """
    U, V = sorted(set(U)), sorted(set(V))
    if set(U) & set(V):
        raise PreconditionError("U and V must be disjoint", {"common": sorted(set(U) & set(V))})
    if not U and not V:
        return {}
    r = gs.diameter() / 2
    pts = U + V
    m = min((gs.d(a, b) for a, b in combinations(pts, 2)), default=None)
    eps = m / 2 if m is not None else Fraction(1)
    n = p.short_pair_after(r, eps)
    mids = {}
    for k in (n, n + 1):
        lo, hi = p.interval(k)
        mids["E" if k % 2 else "N"] = (lo + hi) / 2
    return {**{u: mids["E"] for u in U}, **{v: mids["N"] for v in V}}


def required_cover(gs: GrowingSpace) -> Fraction:
    """Cover used for targeted extensions of ``gs``.  Prescribed values sit
    just beyond ``diam/2`` and the others exceed them by at most ``diam``;
    the extra 2 leaves room to find short intervals past ``diam/2``."""
    return gs.diameter() * 3 / 2 + 2


@dataclass(frozen=True)
class TargetedResult:
    U: tuple[int, ...]
    V: tuple[int, ...]
    point: int
    witness: int | None

    def to_json(self) -> dict:
        return {"U": list(self.U), "V": list(self.V), "point": self.point, "witness": self.witness}


def targeted_extension(
    gs: GrowingSpace, p: IntervalPartition, U: Sequence[int], V: Sequence[int], base: Graph | None = None
) -> TargetedResult:
    """Add a point by :func:`targeted_spec` (to ``gs`` itself) and look for a witness.

    ``base`` may be the graph of ``gs`` before the extension, to avoid
    reclassifying old distances.
    """
    if base is None:
        base = metric_to_graph(gs, p)
    z = extend_point(gs, DistanceSpec(targeted_spec(gs, p, U, V)))
    _coverage(p, max(gs.d(z, q) for q in range(z)) if z else Fraction(0))
    nb = [q for q in range(z) if p.classify(gs.d(z, q)) == "E"]
    g = base.with_vertex(z, nb, gs.names[z])
    return TargetedResult(tuple(U), tuple(V), z, check_graph_extension(g, U, V))


def uv_pairs(points: Sequence[int], bound: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All disjoint ``(U, V)`` with ``|U| + |V| <= bound``, in a fixed order."""
    out = []
    for k in range(bound + 1):
        for chosen in combinations(points, k):
            for mask in range(1 << k):
                U = tuple(x for i, x in enumerate(chosen) if mask >> i & 1)
                V = tuple(x for i, x in enumerate(chosen) if not mask >> i & 1)
                out.append((U, V))
    return out


@dataclass(frozen=True)
class ExperimentRow:
    size: int
    pairs: int
    witnessed: int
    edges: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.witnessed, self.pairs) if self.pairs else Fraction(1)

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "pairs": self.pairs,
            "witnessed": self.witnessed,
            "fraction": fmt(self.fraction),
            "edges": self.edges,
        }


def orbit_graph_experiment(
    sizes: Sequence[int], uv_bound: int, domain: Domain, seed: int = 0, series: SeriesSpec | str = "harmonic"
) -> list[ExperimentRow]:
    """Witness rates of the graph of a growing generic space, one row per size.

    All sizes are prefixes of one space grown with ``seed``.
    """
    if not sizes:
        return []
    gs = generic_space(max(sizes), domain, seed)
    part = build_partition(series, gs.diameter() + 1)
    rows = []
    for n in sorted(set(sizes)):
        g = metric_to_graph(gs.space.subspace(range(n)), part)
        pairs = uv_pairs(range(n), uv_bound)
        hits = sum(check_graph_extension(g, U, V) is not None for U, V in pairs)
        rows.append(ExperimentRow(n, len(pairs), hits, len(g.edges)))
    return rows
