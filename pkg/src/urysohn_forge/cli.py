"""``forge`` command line.

Exit status: 0 on success, 2 on a domain error (error JSON
``{code, message, context}`` on stderr), 1 on usage, parse or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .errors import ForgeError, MetricStructureError
from .group2 import (
    InvariantMetric,
    exponent3_witness,
    extend_invariant_metric,
    extension_stats,
    generic_invariant_metric,
    validate_invariant,
)
from .isometry import (
    PartialIsometry,
    approximate_isometry,
    back_and_forth_bounded,
    build_free_pair,
    build_unbounded,
    compose_dense_free,
    random_isometric_pair,
)
from .jsonio import dumps, json_lines, prefix_to_json, rows_to_csv, space_from_json, space_to_csv, space_to_json
from .metric import DistanceSpec, Domain, GrowingSpace, extend_point, generic_space, validate_metric
from .oracle import SUITES
from .orbit import (
    build_partition,
    check_graph_extension,
    metric_to_graph,
    orbit_graph_experiment,
    required_cover,
    targeted_extension,
)
from .rational import fmt, parse_list, to_rational
from .rng import SplitMix64
from .toeplitz import cyclic_metric, extend_one, is_toeplitz, prolong_detailed, universal_prefix
from .words import FreeWord


class UsageError(Exception):
    """Bad command line or unreadable input (exit 1)."""


@dataclass
class Output:
    json: Any = None
    lines: list[dict] | None = None  # JSON lines instead of one document
    csv: str | None = None
    dot: str | None = None
    status: int = 0
    error: ForgeError | None = None  # reported on stderr with a non-zero status


# --- argument helpers ---------------------------------------------------------


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must not be negative, got {text}")
    return v


def int_list(text: str) -> list[int]:
    text = text.strip()
    return [int(x) for x in text.split(",")] if text else []


def pair_list(text: str) -> list[tuple[int, int]]:
    """``"0:3,1:4"`` -> ``[(0, 3), (1, 4)]``."""
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        a, b = part.split(":")
        out.append((int(a), int(b)))
    return out


def read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def load_space(path: str) -> GrowingSpace:
    m = space_from_json(read_json(path))
    report = validate_metric(m)
    if not report.ok:
        raise MetricStructureError(
            "input is not a metric space", {"violations": [str(v) for v in (report.entries + report.triangles)[:10]]}
        )
    return GrowingSpace.from_space(m)


def space_arg(args) -> GrowingSpace:
    """``--space FILE`` if given, else a generic space from ``--n``, ``--domain`` and ``--seed``."""
    if args.space:
        return load_space(args.space)
    return generic_space(args.n, Domain.parse(args.domain), args.seed)


def read_spec(text: str, gs: GrowingSpace) -> DistanceSpec:
    """Spec as JSON text or a JSON file: ``{point: "p/q"}`` keyed by id or name."""
    p = Path(text)
    raw = read_json(text) if not text.lstrip().startswith("{") and p.exists() else None
    if raw is None:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--spec is neither a file nor JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("a spec must be a JSON object")
    names = {n: i for i, n in enumerate(gs.names)}
    targets = {}
    for key, value in raw.items():
        if key in names:
            targets[names[key]] = value
        else:
            try:
                targets[int(key)] = value
            except ValueError:
                raise UsageError(f"unknown point {key!r} in spec") from None
    return DistanceSpec.of(targets)


# --- commands ---------------------------------------------------------------------


def cmd_validate(args) -> Output:
    m = space_from_json(read_json(args.file))
    report = validate_metric(m)
    doc = {
        "ok": report.ok,
        "points": len(m),
        "entries": [{"i": e.i, "j": e.j, "value": fmt(e.value), "reason": e.reason} for e in report.entries],
        "triangles": [str(t) for t in report.triangles],
    }
    err = None if report.ok else MetricStructureError("not a metric space", {"violations": len(report.entries) + len(report.triangles)})
    return Output(json=doc, status=0 if report.ok else 2, error=err)


def _space_output(gs, extra: dict | None = None) -> Output:
    doc = space_to_json(gs)
    if extra:
        doc.update(extra)
    return Output(json=doc, csv=space_to_csv(gs))


def cmd_extend(args) -> Output:
    gs = load_space(args.file)
    z = extend_point(gs, read_spec(args.spec, gs), name=args.name)
    return _space_output(gs, {"new": z})


def cmd_generic(args) -> Output:
    return _space_output(generic_space(args.n, Domain.parse(args.domain), args.seed))


def cmd_toeplitz_validate(args) -> Output:
    rep = is_toeplitz(parse_list(args.f))
    doc = {"ok": rep.ok, "violations": [v.to_json() for v in rep.violations]}
    err = None if rep.ok else ForgeError("not a Toeplitz prefix", {"violations": len(rep.violations)})
    return Output(json=doc, status=0 if rep.ok else 2, error=err)


def cmd_toeplitz_extend(args) -> Output:
    clamp = tuple(int_list(args.clamp)) if args.clamp else None
    if clamp is not None and len(clamp) != 2:
        raise UsageError("--clamp takes lo,hi")
    step = extend_one(parse_list(args.f), parse_list(args.h), clamp)
    return Output(json={"g1": step.g1, "gN": step.gN, "d": step.d})


def cmd_toeplitz_prolong(args) -> Output:
    p = prolong_detailed(parse_list(args.f), parse_list(args.h), args.budget)
    doc = prefix_to_json(p.values, method=p.method, factor=p.factor)
    return Output(json=doc, csv=rows_to_csv([{"index": i + 1, "value": fmt(v)} for i, v in enumerate(p.values)], ["index", "value"]))


def cmd_toeplitz_universal(args) -> Output:
    res = universal_prefix(args.steps, tuple(int(v) for v in parse_list(args.f0)), budget=args.budget)
    table = [{"vector": ",".join(map(str, vec)), "offset": off} for vec, off in res.table]
    doc = prefix_to_json(
        res.values,
        table=table,
        skipped=[{"vector": ",".join(map(str, vec)), "reason": why} for vec, why in res.skipped],
        prolongations=res.prolongations,
    )
    return Output(json=doc, csv=rows_to_csv(table, ["vector", "offset"]))


def cmd_toeplitz_cyclic(args) -> Output:
    m = cyclic_metric(parse_list(args.f), args.size)
    return Output(json=space_to_json(m), csv=space_to_csv(m))


def _certificates(certs) -> Output:
    rows = [c.to_json() for c in certs]
    cols = ["kind", "stage", "word", "revisit", "point", "image", "displacement", "threshold"]
    return Output(lines=rows, csv=rows_to_csv(rows, cols))


def cmd_iso_approx(args) -> Output:
    gs = space_arg(args)
    base, images = int_list(args.base), int_list(args.images)
    v = approximate_isometry(gs, base, images, args.vn, args.vn2, to_rational(args.eps))
    doc = {
        "point": v,
        "distance_to_vn2": fmt(gs.d(v, args.vn2)),
        "distances": {str(im): fmt(gs.d(im, v)) for im in images},
        "space": space_to_json(gs),
    }
    return Output(json=doc)


def cmd_iso_bounded(args) -> Output:
    gs = space_arg(args)
    f = PartialIsometry(pair_list(args.pairs), bound=to_rational(args.bound))
    problems = back_and_forth_bounded(gs, f, args.steps)
    doc = {"map": f.to_json(), "max_displacement": fmt(f.max_displacement(gs)), "problems": problems, "space": space_to_json(gs)}
    return Output(json=doc, status=2 if problems else 0, error=ForgeError("bound violated", {"problems": problems}) if problems else None)


def cmd_iso_unbounded(args) -> Output:
    gs = load_space(args.space) if args.space else GrowingSpace()
    _, certs = build_unbounded(gs, args.stages)
    return _certificates(certs)


def cmd_iso_free(args) -> Output:
    gs = load_space(args.space) if args.space else GrowingSpace()
    words = [FreeWord.parse(w) for w in args.words.split(",")]
    _, _, certs = build_free_pair(gs, words, args.revisits)
    return _certificates(certs)


def cmd_iso_dense_free(args) -> Output:
    gs = space_arg(args)
    rng = SplitMix64(args.seed).fork()
    pairs = [random_isometric_pair(gs, args.size, rng) for _ in range(args.pairs)]
    res = compose_dense_free(gs, pairs, args.words)
    return _certificates(res.homogeneity + res.freeness)


def _invariant_output(m: InvariantMetric, extra: dict | None = None) -> Output:
    space = m.to_space()
    doc = {**space_to_json(space), **m.to_json(), **(extra or {})}
    return Output(json=doc, csv=space_to_csv(space))


def cmd_group2_extend(args) -> Output:
    vals = parse_list(args.delta)
    size = len(vals) + 1
    if size & (size - 1):
        raise UsageError("--delta needs 2^i - 1 values (one per non-zero element, in order)")
    m = InvariantMetric(size.bit_length() - 1, dict(enumerate(vals, start=1)))
    rep = validate_invariant(m)
    if not rep.ok:
        raise MetricStructureError("--delta is not an invariant metric", {"triangles": [list(t) for t in rep.triangles]})
    new = parse_list(args.new)
    return _invariant_output(extend_invariant_metric(m, dict(enumerate(new))))


def cmd_group2_generic(args) -> Output:
    dom = Domain.parse(args.domain)
    m = generic_invariant_metric(args.levels, dom, args.seed)
    stats = extension_stats(m.to_space(), dom, args.spec_size)
    return _invariant_output(m, {"stats": stats.to_json()})


def cmd_group2_expo3(args) -> Output:
    return Output(json=exponent3_witness(to_rational(args.alpha), to_rational(args.eps)).to_json())


def cmd_orbit_partition(args) -> Output:
    p = build_partition(args.series, to_rational(args.cover))
    rows = [
        {"index": n, "start": fmt(p.breakpoints[n - 1]), "end": fmt(p.breakpoints[n]), "class": "E" if n % 2 else "N"}
        for n in range(1, len(p.breakpoints))
    ]
    return Output(json=p.to_json(), csv=rows_to_csv(rows, ["index", "start", "end", "class"]))


def _partition_for(gs: GrowingSpace, args):
    cover = to_rational(args.cover) if args.cover else required_cover(gs)
    return build_partition(args.series, cover)


def cmd_orbit_graph(args) -> Output:
    gs = space_arg(args)
    g = metric_to_graph(gs, _partition_for(gs, args))
    return Output(json=g.to_json(), csv=g.to_csv(), dot=g.to_dot())


def cmd_orbit_extend_check(args) -> Output:
    gs = space_arg(args)
    part = _partition_for(gs, args)
    U, V = int_list(args.U), int_list(args.V)
    g = metric_to_graph(gs, part)
    before = check_graph_extension(g, U, V)
    res = targeted_extension(gs, part, U, V, g)
    doc = {"U": U, "V": V, "witness_before": before, **res.to_json(), "space": space_to_json(gs)}
    err = None if res.witness is not None else ForgeError("targeted extension found no witness", res.to_json())
    return Output(json=doc, status=0 if err is None else 2, error=err)


def cmd_orbit_experiment(args) -> Output:
    rows = orbit_graph_experiment(int_list(args.sizes), args.uv_bound, Domain.parse(args.domain), args.seed, args.series)
    table = [r.to_json() for r in rows]
    return Output(json={"rows": table}, csv=rows_to_csv(table, ["size", "pairs", "witnessed", "fraction", "edges"]))


_ORACLE_OPTIONS = {
    "metric": ("points", "max"),
    "toeplitz": ("n", "max", "prolong_n", "prolong_max"),
    "isometry": ("points", "max", "steps", "stages"),
    "group2": ("levels", "max", "invariance_levels", "seeds"),
    "orbit": ("spaces", "points", "uv_bound", "domain", "series"),
}


def cmd_oracle(args) -> Output:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r} (choose from {', '.join(SUITES)})")
    allowed = _ORACLE_OPTIONS[args.suite]
    kwargs = {}
    for name in ("points", "max", "n", "prolong_n", "prolong_max", "steps", "stages", "levels", "invariance_levels", "seeds", "spaces", "uv_bound", "domain", "series"):
        value = getattr(args, "o_" + name)
        if value is None:
            continue
        if name not in allowed:
            raise UsageError(f"--{name.replace('_', '-')} does not apply to suite {args.suite}")
        kwargs["maximum" if name == "max" else name] = value
    report = SUITES[args.suite](**kwargs)
    doc = report.to_json()
    if report.ok:
        return Output(json=doc)
    bad = {c.name: c.counterexamples[:1] for c in report.checks if not c.ok}
    return Output(json=doc, status=2, error=ForgeError("counterexample found", {"suite": args.suite, "first": bad}))


# --- parser ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default; usage errors are 1 here
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="64-bit seed for every random choice (default 0)")
    p.add_argument("--out", default=d(None), help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv", "dot"), default=d("json"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="forge", description="Finite rational Urysohn constructions with exact arithmetic.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(parent, name, func: Callable, help: str):
        p = parent.add_parser(name, help=help, description=help)
        _common(p, suppress=True)
        p.set_defaults(func=func)
        return p

    def gen_space_opts(p, n=6):
        p.add_argument("--space", help="space JSON file (default: a generic space)")
        p.add_argument("--n", type=positive_int, default=n, help="points of the generic space")
        p.add_argument("--domain", default="int:4", help="value domain: int:D, rat:Q:D or graph")

    p = leaf(sub, "validate", cmd_validate, "check the metric axioms of a space file")
    p.add_argument("file")
    p = leaf(sub, "extend", cmd_extend, "add one point realising a distance spec")
    p.add_argument("file")
    p.add_argument("--spec", required=True, help='JSON object or file, e.g. {"0": "1", "1": "3/2"}')
    p.add_argument("--name")
    p = leaf(sub, "generic", cmd_generic, "random space grown by consistent extensions")
    p.add_argument("--n", type=positive_int, required=True)
    p.add_argument("--domain", default="int:4")

    tz = sub.add_parser("toeplitz", help="Toeplitz distance functions").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = leaf(tz, "validate", cmd_toeplitz_validate, "check a prefix")
    p.add_argument("--f", required=True)
    p = leaf(tz, "extend", cmd_toeplitz_extend, "one amalgamation step between F and H")
    p.add_argument("--f", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--clamp", help="lo,hi range for the new values")
    p = leaf(tz, "prolong", cmd_toeplitz_prolong, "prefix starting with F and ending with H")
    p.add_argument("--f", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--budget", type=positive_int, default=10**6, help="search node budget")
    p = leaf(tz, "universal", cmd_toeplitz_universal, "prefix realising the first K admissible vectors (--seed has no effect)")
    p.add_argument("--steps", type=positive_int, required=True)
    p.add_argument("--f0", default="1")
    p.add_argument("--budget", type=positive_int, default=10**6)
    p = leaf(tz, "cyclic", cmd_toeplitz_cyclic, "metric d(i,j) = f(|i-j|) on 0..size")
    p.add_argument("--f", required=True)
    p.add_argument("--size", type=positive_int)

    iso = sub.add_parser("iso", help="partial isometries").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = leaf(iso, "approx", cmd_iso_approx, "exact copy of vn over the images, close to vn2")
    gen_space_opts(p)
    p.add_argument("--base", default="")
    p.add_argument("--images", default="")
    p.add_argument("--vn", type=int, required=True)
    p.add_argument("--vn2", type=int, required=True)
    p.add_argument("--eps", required=True)
    p = leaf(iso, "bounded", cmd_iso_bounded, "bounded back-and-forth from the given pairs")
    gen_space_opts(p)
    p.add_argument("--pairs", required=True, help="a:b,c:d")
    p.add_argument("--bound", required=True)
    p.add_argument("--steps", type=positive_int, default=6)
    p = leaf(iso, "unbounded", cmd_iso_unbounded, "isometry with displacement witnesses n = 1, 2, ...")
    p.add_argument("--space")
    p.add_argument("--stages", type=positive_int, required=True)
    p = leaf(iso, "free", cmd_iso_free, "free pair a, b with word displacement certificates")
    p.add_argument("--space")
    p.add_argument("--words", default="a,b,ab,abAB")
    p.add_argument("--revisits", type=positive_int, default=3)
    p = leaf(iso, "dense-free", cmd_iso_dense_free, "generators mapping random tuple pairs, with freeness certificates")
    gen_space_opts(p, n=8)
    p.add_argument("--pairs", type=positive_int, default=2, help="number of random tuple pairs")
    p.add_argument("--size", type=positive_int, default=2, help="tuple length")
    p.add_argument("--words", type=nonneg_int, default=8, help="word budget")

    g2 = sub.add_parser("group2", help="invariant metrics on (Z/2)^i").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = leaf(g2, "extend", cmd_group2_extend, "add a generator with the given distances")
    p.add_argument("--delta", default="", help="d(0,x) for x = 1 .. 2^i-1")
    p.add_argument("--new", required=True, help="d(h,x) for x = 0 .. 2^i-1")
    p = leaf(g2, "generic", cmd_group2_generic, "random invariant metric and extension statistics")
    p.add_argument("--levels", type=positive_int, required=True)
    p.add_argument("--domain", default="int:5")
    p.add_argument("--spec-size", type=positive_int, default=2)
    p = leaf(g2, "expo3", cmd_group2_expo3, "triangle violation forced on (Z/3)^2")
    p.add_argument("--alpha", required=True)
    p.add_argument("--eps", required=True)

    ob = sub.add_parser("orbit", help="metric to graph reduction").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = leaf(ob, "partition", cmd_orbit_partition, "E/N intervals from a divergent series")
    p.add_argument("--series", default="harmonic")
    p.add_argument("--cover", required=True)
    for name, func, help in (
        ("graph", cmd_orbit_graph, "graph with an edge for every distance in E"),
        ("extend-check", cmd_orbit_extend_check, "targeted extension for (U, V) and witness check"),
    ):
        p = leaf(ob, name, func, help)
        gen_space_opts(p, n=12)
        p.add_argument("--series", default="harmonic")
        p.add_argument("--cover", help="partition cover (default: enough for the space)")
        if name == "extend-check":
            p.add_argument("--U", default="")
            p.add_argument("--V", default="")
    p = leaf(ob, "experiment", cmd_orbit_experiment, "witness rates as a generic space grows")
    p.add_argument("--sizes", required=True)
    p.add_argument("--uv-bound", type=nonneg_int, default=2)
    p.add_argument("--domain", default="int:4")
    p.add_argument("--series", default="harmonic")

    p = leaf(sub, "oracle", cmd_oracle, "run an exhaustive cross-check suite")
    p.add_argument("suite", help=", ".join(SUITES))
    for flag, typ in (
        ("points", positive_int), ("max", positive_int), ("n", positive_int), ("prolong-n", nonneg_int),
        ("prolong-max", positive_int), ("steps", positive_int), ("stages", positive_int), ("levels", nonneg_int),
        ("invariance-levels", nonneg_int), ("seeds", nonneg_int), ("spaces", nonneg_int), ("uv-bound", nonneg_int),
        ("domain", str), ("series", str),
    ):
        p.add_argument(f"--{flag}", dest="o_" + flag.replace("-", "_"), type=typ)
    return parser


# --- running --------------------------------------------------------------------------


def _render(out: Output, fmt_name: str) -> str:
    if fmt_name == "csv":
        if out.csv is None:
            raise UsageError("csv output is not available for this command")
        return out.csv
    if fmt_name == "dot":
        if out.dot is None:
            raise UsageError("dot output is not available for this command")
        return out.dot
    return json_lines(out.lines) if out.lines is not None else dumps(out.json)


def _fail(code: str, message: str, context: dict | None = None) -> None:
    sys.stderr.write(json.dumps({"code": code, "message": message, "context": context or {}}) + "\n")


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = args.func(args)
        text = _render(out, args.format)
        if args.out:
            try:
                Path(args.out).write_text(text)
            except OSError as exc:
                raise UsageError(f"cannot write {args.out}: {exc.strerror}") from exc
        else:
            sys.stdout.write(text)
        if out.error is not None:
            sys.stderr.write(json.dumps(out.error.to_json()) + "\n")
        return out.status
    except ForgeError as exc:
        sys.stderr.write(json.dumps(exc.to_json()) + "\n")
        return 2
    except UsageError as exc:
        _fail("usage", str(exc))
        return 1
    except (ValueError, TypeError) as exc:
        _fail("parse", str(exc))
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
