"""Command line interface.

Exit codes: 0 success, 1 domain error (invalid world, no paths, missing
preference, ...), 2 usage, parse or I/O error. Failures print a JSON error
object on standard output and a short message on standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from normalign import __version__, io, report
from normalign.alignment import (
    DEFAULT_HORIZON,
    AlignmentRequest,
    Weighting,
    aggregated_alignment,
    alignment_matrix,
)
from normalign.errors import AlignError, ExpressionError, FormatError, SchemaMismatch, SpecError
from normalign.norms import apply_norm_set, bind_norm
from normalign.preferences import parse_catalog, validate_specs
from normalign.world import enumerate_paths, validate_world

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _ids(text: Optional[str]) -> list:
    if not text:
        return []
    return [part.strip() for part in text.split(",") if part.strip()]


def _fail(code: int, error: str, message: str, out=None) -> int:
    out = out or sys.stdout
    out.write(json.dumps({"error": error, "message": message}, sort_keys=True) + "\n")
    print(f"normalign: {error}: {message}", file=sys.stderr)
    return code


def _load(path: str) -> io.WorldFile:
    return io.load(path, check_specs=True)


def _norm_entry(wf: io.WorldFile, text: str) -> tuple:
    """``a+b`` names the ordered norm set (a, b)."""
    try:
        return tuple(wf.norm(part) for part in text.split("+") if part)
    except SpecError as exc:
        raise UsageError(str(exc)) from None


def _scope(wf: io.WorldFile, args, value_required: bool = True) -> tuple:
    catalog = wf.catalog
    values = catalog.value_ids if args.value == "all" else _ids(args.value)
    if value_required and not values:
        raise UsageError("--value is required")
    unknown = [v for v in values if v not in catalog.values]
    if unknown:
        raise UsageError(f"unknown value(s) {unknown}")
    agents = catalog.agent_ids if args.agent == "all" else _ids(args.agent)
    unknown = [a for a in agents if a not in catalog.agent_ids]
    if unknown:
        raise UsageError(f"unknown agent(s) {unknown}")
    return tuple(values), tuple(agents)


def _request(wf, args, norms=(), values=(), agents=()) -> AlignmentRequest:
    return AlignmentRequest(wf.world, wf.catalog, norms, values, agents,
                            horizon=args.horizon, weighting=Weighting(args.weighting))


def cmd_validate(args) -> int:
    doc = io.read_document(args.path)
    try:
        world = validate_world(doc)
    except FormatError:
        raise
    except AlignError as exc:
        print(f"world: {exc.code}: {exc}")
        return EXIT_DOMAIN
    catalog = parse_catalog(doc.get("values"), doc.get("agents"))
    norms = io.parse_norms(doc)
    problems = [str(issue) for issue in validate_specs(catalog, world).issues]
    for norm in norms:
        try:
            bind_norm(norm, world)
        except SchemaMismatch as exc:
            problems.append(f"norms: norm {norm.id!r}: {exc.code}: {exc}")
    if problems:
        print("\n".join(problems))
        return EXIT_DOMAIN
    print(f"ok: {len(world.states)} states, {len(world.actions)} actions, "
          f"{len(world.transitions)} transitions, {len(catalog.values)} values, "
          f"{len(catalog.agents)} agents, {len(norms)} norms")
    return EXIT_OK


def cmd_align(args) -> int:
    wf = _load(args.path)
    norms = _norm_entry(wf, args.norm) if args.norm else ()
    values, agents = _scope(wf, args)
    result = aggregated_alignment(_request(wf, args, norms, values, agents))
    sys.stdout.write(report.render_align(result, args.format))
    return EXIT_OK


def cmd_compare(args) -> int:
    wf = _load(args.path)
    entries = args.norms.split(",")
    if len(entries) != 2:
        raise UsageError("--norms takes exactly two comma-separated norms")
    first_norms, second_norms = (_norm_entry(wf, e) for e in entries)
    values, agents = _scope(wf, args)
    first = aggregated_alignment(_request(wf, args, first_norms, values, agents))
    second = aggregated_alignment(_request(wf, args, second_norms, values, agents))
    sys.stdout.write(report.render_compare(first, second, first.degree - second.degree, args.format))
    return EXIT_OK


def cmd_matrix(args) -> int:
    wf = _load(args.path)
    if args.norms == "all":
        entries = [(n,) for n in wf.norms]
    else:
        entries = [_norm_entry(wf, e) for e in args.norms.split(",")]
    if not entries:
        raise UsageError("no norms to tabulate")
    values, agents = _scope(wf, args)
    req = _request(wf, args, entries, values, agents)
    matrix = alignment_matrix(req)
    agent_ids = [a.id for a in req.resolve_agents()]
    sys.stdout.write(report.render_matrix(matrix, args.horizon, req.weighting, agent_ids, args.format))
    return EXIT_OK if matrix.any_ok else EXIT_DOMAIN


def cmd_paths(args) -> int:
    wf = _load(args.path)
    norms = _norm_entry(wf, args.norm) if args.norm else ()
    values, agents = _scope(wf, args, value_required=False)
    normative = apply_norm_set(wf.world, norms)
    pathset = enumerate_paths(normative.world, args.horizon)
    scored = None
    if values:
        scored = aggregated_alignment(_request(wf, args, norms, values, agents))
    sys.stdout.write(report.render_paths(normative, pathset, args.format, scored))
    return EXIT_OK


def cmd_apply_norm(args) -> int:
    wf = _load(args.path)
    norms = _norm_entry(wf, args.norm)
    normative = apply_norm_set(wf.world, norms)
    out = io.WorldFile(normative.world, wf.catalog, wf.norms, wf.description)
    if args.out:
        io.dump(out, args.out)
        summary = normative.summary()
        print(f"wrote {args.out}: {len(summary['states_added'])} states added, "
              f"{summary['transitions_forbidden']} transitions forbidden, "
              f"{summary['transitions_rewritten']} rewritten", file=sys.stderr)
    else:
        sys.stdout.write(io.dumps(out))
    return EXIT_OK


def _common(p: argparse.ArgumentParser, value: bool = True, norm: bool = True) -> None:
    p.add_argument("path", help="world file (JSON)")
    if norm:
        p.add_argument("--norm", help="norm id; 'a+b' applies a then b; omit for the bare world")
    if value:
        p.add_argument("--value", help="value id, comma-separated ids, or 'all'")
        p.add_argument("--agent", help="agent id, comma-separated ids, or 'all' (default: first agent)")
    p.add_argument("--horizon", type=positive_int, default=DEFAULT_HORIZON,
                   help=f"maximum transitions per path (default {DEFAULT_HORIZON})")
    p.add_argument("--weighting", choices=[w.value for w in Weighting], default=Weighting.UNIFORM.value)
    p.add_argument("--format", choices=report.FORMATS, default="table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normalign", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"normalign {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a world file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("align", help="degree of alignment of a norm with values")
    _common(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("compare", help="relative alignment of two norms")
    _common(p, norm=False)
    p.add_argument("--norms", required=True, help="two norms, e.g. n1,n2 (positive favours n1)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("matrix", help="norm x value grid of degrees")
    _common(p, norm=False)
    p.add_argument("--norms", default="all", help="comma-separated norms or 'all'")
    p.set_defaults(func=cmd_matrix, value="all")

    p = sub.add_parser("paths", help="list the bounded paths of a normative world")
    _common(p)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("apply-norm", help="write the normative world as a world file")
    p.add_argument("path")
    p.add_argument("--norm", required=True, help="norm id; 'a+b' applies a then b")
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=cmd_apply_norm)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "UsageError", str(exc))
    except OSError as exc:
        return _fail(EXIT_USAGE, "IOError", str(exc))
    except (FormatError, ExpressionError) as exc:
        return _fail(EXIT_USAGE, exc.code, str(exc))
    except AlignError as exc:
        return _fail(EXIT_DOMAIN, exc.code, str(exc))


if __name__ == "__main__":
    sys.exit(main())
