"""Back-and-forth construction of partial isometries inside a growing space.

Everything here works on a :class:`~urysohn_forge.metric.GrowingSpace` and
creates new points through :func:`~urysohn_forge.metric.extend_point` only,
so every construction can be replayed from the space's log.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import PreconditionError, InfeasibleError
from .metric import ZERO, DistanceSpec, GrowingSpace, extend_point, feasible_interval, tuples_isometric
from .rational import RationalLike, fmt, to_rational
from .words import FreeWord, cyclically_reduced_words, require_cyclically_reduced


class PartialIsometry:
    """Injective distance-preserving map between finite point sets.

    ``bound`` (if set) is a promised upper limit on ``d(x, f(x))``.
    """

    def __init__(self, pairs: Iterable[tuple[int, int]] = (), bound: RationalLike | None = None):
        self.forward: dict[int, int] = {}
        self.backward: dict[int, int] = {}
        self.bound = None if bound is None else to_rational(bound)
        for a, b in pairs:
            self.add(a, b)

    def add(self, a: int, b: int) -> None:
        if a in self.forward or b in self.backward:
            raise PreconditionError("map would stop being injective", {"source": a, "image": b})
        self.forward[a] = b
        self.backward[b] = a

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(self.forward.items())

    def domain(self) -> list[int]:
        return list(self.forward)

    def range(self) -> list[int]:
        return list(self.backward)

    def __contains__(self, a: int) -> bool:
        return a in self.forward

    def __len__(self) -> int:
        return len(self.forward)

    def __call__(self, a: int) -> int:
        return self.forward[a]

    def inverse(self) -> "PartialIsometry":
        return PartialIsometry(((b, a) for a, b in self.forward.items()), self.bound)

    def copy(self) -> "PartialIsometry":
        return PartialIsometry(self.forward.items(), self.bound)

    def max_displacement(self, gs: GrowingSpace) -> Fraction:
        return max((gs.d(a, b) for a, b in self.forward.items()), default=ZERO)

    def problems(self, gs: GrowingSpace) -> list[str]:
        """Everything that stops this from being a valid (bounded) partial isometry."""
        out = []
        items = self.pairs
        for (a, b), (a2, b2) in combinations(items, 2):
            if gs.d(a, a2) != gs.d(b, b2):
                out.append(f"d({a},{a2})={fmt(gs.d(a, a2))} but d({b},{b2})={fmt(gs.d(b, b2))}")
        if self.bound is not None:
            for a, b in items:
                if gs.d(a, b) > self.bound:
                    out.append(f"d({a},{b})={fmt(gs.d(a, b))} exceeds bound {fmt(self.bound)}")
        return out

    def to_json(self) -> dict:
        out = {"pairs": [[a, b] for a, b in self.pairs]}
        if self.bound is not None:
            out["bound"] = fmt(self.bound)
        return out


@dataclass(frozen=True)
class Certificate:
    """A point moved by a constructed map (or word) by ``displacement``."""

    kind: str  # "unbounded", "word", "freeness", "homogeneity"
    stage: int
    point: int
    image: int
    displacement: Fraction
    word: str | None = None
    revisit: int | None = None
    threshold: Fraction | None = None
    trace: tuple[int, ...] = ()

    def to_json(self) -> dict:
        out = {"kind": self.kind, "stage": self.stage}
        if self.word is not None:
            out["word"] = self.word
        out["point"] = self.point
        out["image"] = self.image
        out["displacement"] = fmt(self.displacement)
        if self.revisit is not None:
            out["revisit"] = self.revisit
        if self.threshold is not None:
            out["threshold"] = fmt(self.threshold)
        if self.trace:
            out["trace"] = list(self.trace)
        return out


def _require_points(gs: GrowingSpace, points: Iterable[int]) -> None:
    n = len(gs)
    bad = sorted({p for p in points if not 0 <= p < n})
    if bad:
        raise PreconditionError("unknown point ids", {"points": bad, "size": n})


# --- single extensions ---------------------------------------------------------


def _forward_spec(gs: GrowingSpace, f: PartialIsometry, u: int) -> dict[int, Fraction]:
    """Distances an image of ``u`` must have: ``d(f(a), v) = d(a, u)``."""
    return {b: gs.d(a, u) for a, b in f.forward.items()}


def extend_forward(gs: GrowingSpace, f: PartialIsometry, u: int) -> int:
    """Map ``u`` to a fresh point (no displacement constraint)."""
    v = extend_point(gs, DistanceSpec(_forward_spec(gs, f, u)))
    f.add(u, v)
    return v


def extend_backward(gs: GrowingSpace, f: PartialIsometry, v: int) -> int:
    """Give ``v`` a fresh pre-image."""
    u = extend_point(gs, DistanceSpec(_forward_spec(gs, f.inverse(), v)))
    f.add(u, v)
    return u


def first_missing(gs: GrowingSpace, used: Iterable[int] | dict) -> int:
    """First point (in insertion order) not in ``used``; grows the space if none."""
    for p in gs.points:
        if p not in used:
            return p
    return extend_point(gs, DistanceSpec({}))


def approximate_isometry(
    gs: GrowingSpace,
    base: Sequence[int],
    images: Sequence[int],
    vn: int,
    vn_approx: int,
    eps: RationalLike,
) -> int:
    """A new point ``v`` with ``d(images[i], v) = d(base[i], vn)`` exactly and
    ``d(v, vn_approx) < eps``.

    Requires ``base`` and ``images`` isometric and
    ``|d(images[i], vn_approx) - d(base[i], vn)| < eps`` for every ``i``.
    """
    eps = to_rational(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive", {"eps": fmt(eps)})
    _require_points(gs, [*base, *images, vn, vn_approx])
    if not tuples_isometric(gs, base, images):
        raise PreconditionError("base and image tuples are not isometric", {})
    if vn in base:
        raise PreconditionError("vn must differ from the base points", {"vn": vn})
    for i, (b, im) in enumerate(zip(base, images)):
        gap = abs(gs.d(im, vn_approx) - gs.d(b, vn))
        if gap >= eps:
            raise PreconditionError(
                f"hypothesis fails at index {i}: |d(v'_i, v'') - d(v_i, v_n)| = {fmt(gap)} >= eps",
                {"index": i, "gap": fmt(gap), "eps": fmt(eps)},
            )
    targets = {im: gs.d(b, vn) for b, im in zip(base, images)}
    if vn_approx not in targets:
        lo, hi = feasible_interval(gs.rows, vn_approx, targets)
        top = eps if hi is None or hi > eps else hi
        # top == eps is an open end, so the midpoint stays strictly below eps.
        targets[vn_approx] = (lo + top) / 2 if lo < top else lo
    return extend_point(gs, DistanceSpec(targets))


def extend_bounded(gs: GrowingSpace, f: PartialIsometry, u: int) -> int:
    """Extend ``f`` to ``u`` keeping ``d(x, f(x)) <= k`` (``k = f.bound``).

    The displacement ``d(u, v)`` is the midpoint of the feasible interval
    capped at ``k``; a midpoint of zero means ``v = u``.
    """
    k = f.bound
    if k is None:
        raise PreconditionError("partial isometry has no displacement bound", {})
    _require_points(gs, [u, *f.forward, *f.backward])
    if u in f:
        raise PreconditionError("point already in the domain", {"u": u})
    for a, b in f.pairs:
        if gs.d(a, b) > k:
            raise PreconditionError(
                "existing pair already exceeds the bound", {"a": a, "b": b, "d": fmt(gs.d(a, b)), "k": fmt(k)}
            )
    targets = _forward_spec(gs, f, u)
    if u in targets:  # u already an image: its distance to v is forced
        t = targets[u]
    else:
        lo, hi = feasible_interval(gs.rows, u, targets)
        cap = k if hi is None or hi > k else hi
        if lo > cap:  # excluded by the bound hypothesis; kept as a guard
            raise InfeasibleError("no image within the bound", {"lo": fmt(lo), "cap": fmt(cap)})
        t = (lo + cap) / 2
    if t == 0:
        v = u
    else:
        if u not in targets:
            targets[u] = t
        v = extend_point(gs, DistanceSpec(targets))
    f.add(u, v)
    return v


def back_and_forth_bounded(gs: GrowingSpace, f: PartialIsometry, steps: int) -> list[str]:
    """Alternate domain and range extensions with :func:`extend_bounded`.

    Returns the list of invariant problems found after any step (empty when
    the bound and distance preservation held throughout).
    """
    problems: list[str] = []
    for step in range(steps):
        if step % 2 == 0:
            extend_bounded(gs, f, first_missing(gs, f.forward))
        else:
            inv = f.inverse()
            v = first_missing(gs, f.backward)
            u = extend_bounded(gs, inv, v)
            f.add(u, v)
        problems.extend(f.problems(gs))
    return problems


# --- unbounded isometries -----------------------------------------------------


def far_spec(gs: GrowingSpace, anchors: Sequence[int], n: Fraction) -> dict[int, Fraction]:
    """``g(a) = n + d(a0, a)``: least distance ``n`` (attained at ``a0``) and consistent."""
    a0 = anchors[0]
    return {a: n + gs.d(a0, a) for a in anchors}


def build_unbounded(gs: GrowingSpace, stages: int) -> tuple[PartialIsometry, list[Certificate]]:
    """Back-and-forth with a displacement witness ``>= n`` at stage ``4n+2``.

    Odd stages give the first point outside the range a pre-image, stages
    divisible by 4 give the first point outside the domain an image.  At
    stage ``4n+2`` (``n >= 1``) a new point ``z`` at least distance ``n`` from
    the domain is added and mapped as far from itself as the constraints allow.
    """
    if stages < 1:
        raise PreconditionError("stages must be positive", {"stages": stages})
    if len(gs) == 0:
        extend_point(gs, DistanceSpec({}))
    f = PartialIsometry()
    certs: list[Certificate] = []
    for stage in range(1, stages + 1):
        if stage % 2 == 1:
            extend_backward(gs, f, first_missing(gs, f.backward))
        elif stage % 4 == 0:
            extend_forward(gs, f, first_missing(gs, f.forward))
        else:
            n = (stage - 2) // 4
            if n == 0:
                continue
            dom = f.domain()
            z = extend_point(gs, DistanceSpec(far_spec(gs, dom, Fraction(n))))
            fz = _stretched_image(gs, f, z)
            f.add(z, fz)
            certs.append(Certificate("unbounded", stage, z, fz, gs.d(z, fz), threshold=Fraction(n)))
    return f, certs


def _stretched_image(gs: GrowingSpace, f: PartialIsometry, z: int) -> int:
    """Image of ``z`` as far from ``z`` as the isometry constraints allow."""
    targets = _forward_spec(gs, f, z)
    if z not in targets:
        lo, hi = feasible_interval(gs.rows, z, targets)
        targets[z] = hi if hi is not None else Fraction(1)
    return extend_point(gs, DistanceSpec(targets))


# --- free families ----------------------------------------------------------------


def evaluate_word(maps: dict[str, PartialIsometry], word: FreeWord, x: int) -> list[int] | None:
    """Trace ``x, l_k(x), l_{k-1} l_k(x), ...`` (rightmost letter first);
    ``None`` if some letter is undefined along the way."""
    trace = [x]
    for g, e in reversed(word.letters):
        f = maps[g]
        nxt = f.forward.get(trace[-1]) if e > 0 else f.backward.get(trace[-1])
        if nxt is None:
            return None
        trace.append(nxt)
    return trace


class _FamilyBuilder:
    def __init__(self, gs: GrowingSpace, generators: Sequence[str]):
        self.gs = gs
        self.maps = {g: PartialIsometry() for g in generators}

    def bookkeeping(self) -> None:
        for f in self.maps.values():
            extend_forward(self.gs, f, first_missing(self.gs, f.forward))
            extend_backward(self.gs, f, first_missing(self.gs, f.backward))

    def chain(self, word: FreeWord, target: Fraction) -> tuple[int, list[int]]:
        """Fresh base point pushed through ``word`` onto fresh points, each step
        stretched away from the base; returns (base, trace)."""
        gs = self.gs
        radius = max(target, gs.diameter() / 2, Fraction(1))
        base = extend_point(gs, DistanceSpec({p: radius for p in gs.points}))
        trace = [base]
        for g, e in reversed(word.letters):
            f = self.maps[g] if e > 0 else self.maps[g].inverse()
            p = trace[-1]
            targets = _forward_spec(gs, f, p)
            if base not in targets:
                lo, hi = feasible_interval(gs.rows, base, targets)
                targets[base] = hi if hi is not None else radius
            q = extend_point(gs, DistanceSpec(targets))
            if e > 0:
                self.maps[g].add(p, q)
            else:
                self.maps[g].add(q, p)
            trace.append(q)
        return base, trace


def _word_certificate(gs, kind, stage, word, base, trace, threshold, revisit=None) -> Certificate:
    end = trace[-1]
    disp = gs.d(base, end)
    if disp < threshold or (kind == "freeness" and disp == threshold):
        raise InfeasibleError(
            f"word {word} moved its base point only {fmt(disp)}",
            {"word": str(word), "displacement": fmt(disp), "threshold": fmt(threshold)},
        )
    return Certificate(kind, stage, base, end, disp, str(word), revisit, threshold, tuple(trace))


def build_free_pair(
    gs: GrowingSpace, words: Sequence[FreeWord], revisits: int
) -> tuple[PartialIsometry, PartialIsometry, list[Certificate]]:
    """Partial isometries ``a``, ``b`` under which every listed word moves some
    point, by at least ``r`` on its ``r``-th visit.

    Stages alternate: even stages extend ``a``, ``b`` and their inverses by one
    point each; odd stages take the next (word, visit) pair round robin.
    """
    require_cyclically_reduced(words)
    for w in words:
        if not w.generators() <= {"a", "b"}:
            raise PreconditionError(f"word {w} uses letters other than a and b", {"word": str(w)})
    if len(gs) == 0:
        extend_point(gs, DistanceSpec({}))
    fam = _FamilyBuilder(gs, ("a", "b"))
    certs: list[Certificate] = []
    stage = 0
    for r in range(1, revisits + 1):
        for w in words:
            stage += 1
            fam.bookkeeping()
            stage += 1
            base, trace = fam.chain(w, Fraction(r))
            certs.append(_word_certificate(gs, "word", stage, w, base, trace, Fraction(r), revisit=r))
    return fam.maps["a"], fam.maps["b"], certs


@dataclass
class DenseFreeResult:
    generators: dict[str, PartialIsometry]  # the unbounded parts h_i
    correctors: dict[str, PartialIsometry]  # bounded n_i with n_i h_i(alpha_i) = beta_i
    homogeneity: list[Certificate] = field(default_factory=list)
    freeness: list[Certificate] = field(default_factory=list)

    def composite(self, name: str, x: int) -> int | None:
        y = self.generators[name].forward.get(x)
        return None if y is None else self.correctors[name].forward.get(y)


def compose_dense_free(
    gs: GrowingSpace,
    tuple_pairs: Sequence[tuple[Sequence[int], Sequence[int]]],
    word_budget: int,
    corrector_steps: int = 2,
) -> DenseFreeResult:
    """Generators ``n_i h_i`` mapping each ``alpha_i`` onto ``beta_i``.

    ``h_i`` is built freely on fresh points; ``n_i`` is a bounded corrector
    with bound ``k_i``.  For each of the first ``word_budget`` cyclically
    reduced words ``w`` in the ``h_i``, a point is moved by ``w`` further than
    the sum of the ``k_i`` over the letters of ``w``, which rules out
    ``w(n_i h_i) = 1`` at this scale.
    """
    for idx, (alpha, beta) in enumerate(tuple_pairs):
        _require_points(gs, [*alpha, *beta])
        if not tuples_isometric(gs, alpha, beta):
            raise PreconditionError(f"tuple pair {idx} is not isometric", {"pair": idx})
        if len(set(alpha)) != len(alpha):
            raise PreconditionError(f"tuple pair {idx} repeats a point", {"pair": idx})
    names = [f"h{i + 1}" for i in range(len(tuple_pairs))]
    fam = _FamilyBuilder(gs, names)
    result = DenseFreeResult(fam.maps, {})
    stage = 0
    bounds: dict[str, Fraction] = {}
    for name, (alpha, beta) in zip(names, tuple_pairs):
        h = fam.maps[name]
        for a in alpha:
            if a not in h:
                extend_forward(gs, h, a)
        gamma = [h(a) for a in alpha]
        k = max((gs.d(c, b) for c, b in zip(gamma, beta)), default=ZERO)
        corrector = PartialIsometry(zip(gamma, beta), bound=k)
        problems = back_and_forth_bounded(gs, corrector, corrector_steps)
        if problems:
            raise InfeasibleError("corrector lost its bound", {"generator": name, "problems": problems})
        result.correctors[name] = corrector
        bounds[name] = k
        stage += 1
        for a, b in zip(alpha, beta):
            image = result.composite(name, a)
            result.homogeneity.append(
                Certificate("homogeneity", stage, a, image, gs.d(a, image), word=name, threshold=k)
            )
    words = cyclically_reduced_words(names)
    for _ in range(word_budget):
        w = next(words)
        stage += 1
        fam.bookkeeping()
        threshold = sum((bounds[g] for g, _ in w.letters), ZERO)
        stage += 1
        base, trace = fam.chain(w, threshold + 1)
        result.freeness.append(_word_certificate(gs, "freeness", stage, w, base, trace, threshold))
    return result


def random_isometric_pair(gs: GrowingSpace, size: int, rng) -> tuple[list[int], list[int]]:
    """A random ``size``-tuple of existing points and an isometric copy of it
    placed on new points (each copied point stays 1 away from its original
    where the constraints permit, otherwise at the nearest feasible distance)."""
    pool = list(gs.points)
    alpha: list[int] = []
    while len(alpha) < size:
        p = pool[rng.below(len(pool))]
        if p not in alpha:
            alpha.append(p)
    beta: list[int] = []
    for j, a in enumerate(alpha):
        targets = {b: gs.d(alpha[i], a) for i, b in enumerate(beta)}
        lo, hi = feasible_interval(gs.rows, a, targets)
        want = Fraction(1)
        t = min(max(want, lo), hi) if hi is not None else want
        targets[a] = t
        beta.append(extend_point(gs, DistanceSpec(targets)))
    return alpha, beta
