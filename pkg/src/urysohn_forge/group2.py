"""Translation-invariant metrics on the elementary abelian 2-group.

The group ``G`` is the union of ``H_0 <= H_1 <= ...`` with ``H_i = (Z/2)^i``.
An element of ``H_i`` is an ``int`` below ``2**i`` (bit ``j`` is the ``j``-th
generator) and the group operation is XOR.  A metric is invariant under the
regular action exactly when ``d(x, y) = delta(x ^ y)``, so it is stored as the
function ``delta`` on the non-zero elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Mapping

from .errors import ExtensionError, PreconditionError
from .metric import FiniteMetricSpace, Domain, DistanceSpec, check_extension_spec, validate_metric
from .rational import RationalLike, fmt, to_rational
from .rng import SplitMix64


def bit_name(x: int, level: int) -> str:
    """``x`` as ``level`` binary digits, newest generator first; ``"e"`` at level 0."""
    return format(x, f"0{level}b") if level else "e"


@dataclass(frozen=True)
class InvariantMetric:
    level: int
    delta: Mapping[int, Fraction] = field(default_factory=dict)

    @classmethod
    def of(cls, level: int, delta: Mapping[int, RationalLike]) -> "InvariantMetric":
        return cls(level, {x: to_rational(v) for x, v in delta.items()})

    @property
    def size(self) -> int:
        return 1 << self.level

    def d(self, x: int, y: int) -> Fraction:
        return Fraction(0) if x == y else self.delta[x ^ y]

    def to_space(self) -> FiniteMetricSpace:
        n = self.size
        return FiniteMetricSpace(
            tuple(tuple(self.d(x, y) for y in range(n)) for x in range(n)),
            tuple(bit_name(x, self.level) for x in range(n)),
        )

    def to_json(self) -> dict:
        return {"level": self.level, "delta": {bit_name(x, self.level): fmt(v) for x, v in sorted(self.delta.items())}}


@dataclass(frozen=True)
class InvariantReport:
    missing: tuple[int, ...]
    nonpositive: tuple[int, ...]
    triangles: tuple[tuple[int, int], ...]  # (x, y) with delta(x^y) > delta(x) + delta(y)
    matrix_ok: bool
    invariant: bool

    @property
    def ok(self) -> bool:
        return not (self.missing or self.nonpositive or self.triangles) and self.matrix_ok and self.invariant

    def __bool__(self) -> bool:
        return self.ok


def translation_invariant(m: FiniteMetricSpace) -> bool:
    """``d(g^x, g^y) == d(x, y)`` for every ``g, x, y`` (points indexed as group elements)."""
    n = len(m)
    return all(m.dist[g ^ x][g ^ y] == m.dist[x][y] for g in range(n) for x in range(n) for y in range(n))


def squares_trivially(level: int) -> bool:
    """Every translation is an involution: ``g^(g^x) == x`` on all of ``H_level``."""
    n = 1 << level
    return all(g ^ (g ^ x) == x for g in range(n) for x in range(n))


def validate_invariant(m: InvariantMetric) -> InvariantReport:
    """Check ``delta`` directly and also the induced full matrix."""
    elems = range(1, m.size)
    missing = tuple(x for x in elems if x not in m.delta)
    if missing or any(x <= 0 or x >= m.size for x in m.delta):
        extra = tuple(x for x in m.delta if x <= 0 or x >= m.size)
        return InvariantReport(missing + extra, (), (), False, False)
    nonpositive = tuple(x for x in elems if m.delta[x] <= 0)
    tri = tuple(
        (x, y)
        for x in elems
        for y in elems
        if x < y and m.delta[x ^ y] > m.delta[x] + m.delta[y]
    )
    space = m.to_space()
    return InvariantReport((), nonpositive, tri, validate_metric(space).ok, translation_invariant(space))


def consistency_violations(m: InvariantMetric, new: Mapping[int, Fraction]) -> list[tuple[int, int]]:
    """Pairs ``(x, y)`` of ``H_i`` breaking ``|g(x)-g(y)| <= d(x,y) <= g(x)+g(y)``."""
    out = []
    for x in range(m.size):
        for y in range(x + 1, m.size):
            gx, gy, dxy = new[x], new[y], m.d(x, y)
            if abs(gx - gy) > dxy or dxy > gx + gy:
                out.append((x, y))
    return out


def extend_invariant_metric(m: InvariantMetric, new: Mapping[int, RationalLike]) -> InvariantMetric:
    """Add the generator ``h = 2**level`` with ``d(h, x) = new[x]`` and
    extend by translation: ``delta(h ^ x) = new[x]``."""
    if set(new) != set(range(m.size)):
        raise PreconditionError(
            "new distances must be given for every element of the current level",
            {"level": m.level, "expected": m.size, "given": sorted(new)},
        )
    g = {x: to_rational(v) for x, v in new.items()}
    bad = [x for x, v in g.items() if v <= 0]
    if bad:
        raise ExtensionError("new distances must be positive", {"elements": [bit_name(x, m.level) for x in bad]})
    pairs = consistency_violations(m, g)
    if pairs:
        x, y = pairs[0]
        raise ExtensionError(
            f"inconsistent distances at ({bit_name(x, m.level)}, {bit_name(y, m.level)})",
            {"pairs": [[bit_name(a, m.level), bit_name(b, m.level)] for a, b in pairs]},
        )
    h = m.size
    delta = dict(m.delta)
    for x, v in g.items():
        delta[h ^ x] = v
    out = InvariantMetric(m.level + 1, delta)
    report = validate_invariant(out)
    if not report.ok:  # the consistency condition should make this unreachable
        raise ExtensionError("extension failed the full check", {"triangles": [list(t) for t in report.triangles]})
    return out


@dataclass(frozen=True)
class ExtensionStats:
    """How many consistent small distance specs already have a realising point."""

    spec_size: int
    consistent: int
    realized: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.realized, self.consistent) if self.consistent else Fraction(1)

    def to_json(self) -> dict:
        return {
            "spec_size": self.spec_size,
            "consistent": self.consistent,
            "realized": self.realized,
            "fraction": fmt(self.fraction),
        }


def extension_stats(space: FiniteMetricSpace, domain: Domain, spec_size: int = 2) -> ExtensionStats:
    values = domain.values()
    n = len(space)
    consistent = realized = 0
    supports = (c for k in range(1, spec_size + 1) for c in combinations(range(n), k))
    for support in supports:
        for vals in product(values, repeat=len(support)):
            spec = DistanceSpec(dict(zip(support, vals)))
            if check_extension_spec(space, spec):
                continue
            consistent += 1
            if any(
                z not in spec.targets and all(space.dist[z][a] == g for a, g in spec.targets.items())
                for z in range(n)
            ):
                realized += 1
    return ExtensionStats(spec_size, consistent, realized)


def generic_invariant_metric(levels: int, domain: Domain, seed: int = 0) -> InvariantMetric:
    """``levels`` random consistent extensions, each new distance drawn
    uniformly from the grid values in its exact feasible interval."""
    if levels < 1:
        raise PreconditionError("levels must be at least 1", {"levels": levels})
    rng = SplitMix64(seed)
    m = InvariantMetric(0, {})
    for _ in range(levels):
        new: dict[int, Fraction] = {}
        for x in range(m.size):
            lo, hi = Fraction(0), None
            for y, gy in new.items():
                dxy = m.d(x, y)
                lo = max(lo, abs(gy - dxy))
                hi = gy + dxy if hi is None else min(hi, gy + dxy)
            options = domain.values_in(lo, hi)
            if not options:
                raise ExtensionError("empty feasible interval while sampling", {"element": x})
            new[x] = rng.choice(options)
        m = extend_invariant_metric(m, new)
    return m


# --- exponent 3 -----------------------------------------------------------------

_Z3 = tuple[int, int]


def _sub(u: _Z3, v: _Z3) -> _Z3:
    return ((u[0] - v[0]) % 3, (u[1] - v[1]) % 3)


def _neg(u: _Z3) -> _Z3:
    return ((-u[0]) % 3, (-u[1]) % 3)


@dataclass(frozen=True)
class Exponent3Report:
    alpha: Fraction
    eps: Fraction
    forced: bool
    # bounds: d(0,y) >= long_side, d(0,x-y) <= short_side, d(y,x-y) <= short_side
    long_side: Fraction
    short_side: Fraction
    violation: Fraction | None
    identities: tuple[str, ...]
    message: str

    def to_json(self) -> dict:
        return {
            "alpha": fmt(self.alpha),
            "eps": fmt(self.eps),
            "forced": self.forced,
            "long_side_at_least": fmt(self.long_side),
            "short_sides_at_most": fmt(self.short_side),
            "violation_at_least": None if self.violation is None else fmt(self.violation),
            "identities": list(self.identities),
            "message": self.message,
        }


def exponent3_witness(alpha: RationalLike, eps: RationalLike) -> Exponent3Report:
    """Why no invariant metric on ``<x, y> = (Z/3)^2`` can have
    ``d(0,x) = alpha``, ``d(x,y)`` and ``d(-x,y)`` near ``alpha/2`` and
    ``d(0,y)`` near ``3 alpha/2``.

    The identities ``d(0,x-y) = d(y,x)`` and ``d(y,x-y) = d(-x,y)`` are checked
    on the group itself (an invariant metric depends only on the difference of
    its arguments); then the triangle ``0, y, x-y`` is too long by at least
    ``alpha/2 - 3 eps``.  ``eps = 0`` is the exact case.
    """
    a, e = to_rational(alpha), to_rational(eps)
    if a <= 0:
        raise PreconditionError("alpha must be positive", {"alpha": fmt(a)})
    if e < 0:
        raise PreconditionError("eps must not be negative", {"eps": fmt(e)})
    zero, x, y = (0, 0), (1, 0), (0, 1)
    x_y = _sub(x, y)
    # An invariant d(u, v) depends only on v - u.
    checks = [
        ("d(0,x-y) = d(y,x)", _sub(x_y, zero) == _sub(x, y)),
        ("d(y,x-y) = d(-x,y)", _sub(x_y, y) == _sub(y, _neg(x))),
    ]
    for text, holds in checks:
        if not holds:  # pragma: no cover - arithmetic in Z/3
            raise AssertionError(text)
    long_side = 3 * a / 2 - e
    short_side = a / 2 + e
    gap = long_side - 2 * short_side
    forced = gap > 0
    if forced:
        msg = f"triangle 0, y, x-y violated by at least {fmt(gap)}"
    else:
        msg = "no contradiction forced"
    return Exponent3Report(a, e, forced, long_side, short_side, gap if forced else None, tuple(t for t, _ in checks), msg)
