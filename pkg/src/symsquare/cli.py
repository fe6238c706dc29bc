"""Command line: ``symsquare {space,sp2,cuplength,bounds,verify}``.

Exit codes: 0 success, 1 failed verification, 2 usage / bad input,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import f2core
from .bounds import (KBFormatError, cup_length_witness, kb_default, load_kb,
                     lower_bound_facts, propagate)
from .f2core import MalformedAlgebraError, PresentedAlgebra
from .nakaoka import ABSOLUTE, RELATIVE, build_sp2
from .spaces import DescriptorError, build_space, canonical
from .verify import CHECKS, run_checks

CACHE_ENV = "SYMSQUARE_CACHE_DIR"


class UsageError(Exception):
    pass


def default_cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "symsquare")


def _space(desc: str) -> PresentedAlgebra:
    try:
        return build_space(desc)
    except (DescriptorError, ValueError) as exc:
        raise UsageError(f"bad space descriptor {desc!r}: {exc}") from exc


def format_table(A: PresentedAlgebra) -> str:
    lines = [f"# {A.name}, top degree {A.top_degree}", "basis:"]
    for d in range(A.top_degree + 1):
        ids = A.in_degree(d)
        if ids:
            lines.append(f"  deg {d}: " + ", ".join(A.label(i) for i in ids))
    lines.append("products:")
    for (i, j), v in sorted(A.mult.items(), key=lambda t: (A.degree(t[0][0]) + A.degree(t[0][1]), t[0])):
        if i <= j and A.degree(i) > 0 and A.degree(j) > 0:
            lines.append(f"  {A.label(i)} * {A.label(j)} = {A.show(v)}")
    lines.append("Steenrod squares:")
    for (k, i), v in sorted(A.sq.items(), key=lambda t: (t[0][1], t[0][0])):
        if k > 0:
            lines.append(f"  Sq^{k} {A.label(i)} = {A.show(v)}")
    return "\n".join(lines)


def emit(A: PresentedAlgebra, fmt: str) -> str:
    return f2core.dumps(A, indent=1) if fmt == "json" else format_table(A)


def cached_sp2(A: PresentedAlgebra, relative: bool, cache_dir: Path | None) -> PresentedAlgebra:
    """build_sp2 with a content-addressed on-disk cache keyed by input and variant."""
    variant = RELATIVE if relative else ABSOLUTE
    if cache_dir is None:
        return build_sp2(A, variant)
    key = hashlib.sha256((f2core.dumps(A) + f"|relative={relative}").encode()).hexdigest()[:32]
    path = Path(cache_dir) / f"sp2-{key}.json"
    if path.exists():
        return f2core.load(path)
    ring = build_sp2(A, variant)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(f2core.dumps(ring))
    tmp.replace(path)
    return ring


def cmd_space(args) -> int:
    A = _space(args.space)
    _out(args, emit(A, args.format))
    return 0


def cmd_sp2(args) -> int:
    A = _space(args.space)
    ring = cached_sp2(A, args.relative, None if args.no_cache else args.cache_dir)
    _out(args, emit(ring, args.format))
    return 0


def cmd_cuplength(args) -> int:
    A = _space(args.space)
    ring = A if args.of == "space" else cached_sp2(A, False, None if args.no_cache else args.cache_dir)
    n, witness = cup_length_witness(ring)
    if args.format == "json":
        _out(args, json.dumps({"space": canonical(args.space), "of": args.of, "cupLength": n,
                               "witness": [ring.label(i) for i in witness]}, sort_keys=True))
    else:
        _out(args, f"cup-length of {ring.name}: {n}"
             + (f"  (witness {' * '.join(ring.label(i) for i in witness)})" if witness else ""))
    return 0


def cmd_bounds(args) -> int:
    _space(args.space)
    space = canonical(args.space)
    kb = [] if args.no_default_kb else kb_default()
    if args.kb:
        try:
            kb += load_kb(args.kb)
        except KBFormatError as exc:
            raise UsageError(f"{args.kb}: {exc}") from exc
    result = propagate(kb + lower_bound_facts(space, kb))
    report = result.report(space)
    if args.format == "json":
        doc = {"space": space,
               "intervals": {k.value: [iv.lo, iv.hi] for k, iv in report.items()},
               "conflicts": [str(c) for c in result.conflicts]}
        if args.trace:
            doc["trace"] = [s.describe() for s in result.trace]
        _out(args, json.dumps(doc, indent=1, sort_keys=True))
    else:
        lines = [f"{kind.pretty(space)} {iv}" for kind, iv in report.items()]
        lines += [f"CONFLICT {c}" for c in result.conflicts]
        if args.trace:
            for kind in report:
                lines.append("")
                lines += result.trace.explain((space, kind))
        _out(args, "\n".join(lines))
    return 0


def cmd_verify(args) -> int:
    only = args.only or None
    results = run_checks(only, args.max_m)
    for r in results:
        if not (args.quiet and r.passed):
            print(r.line())
    failed = [r for r in results if not r.passed]
    if failed:
        print("failed: " + ", ".join(f"{r.group}/{r.name}" for r in failed), file=sys.stderr)
        return 1
    return 0


def _out(args, text: str) -> None:
    if not args.quiet:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache-dir", type=Path, default=argparse.SUPPRESS,
                        help=f"ring cache directory (default ${CACHE_ENV} or ~/.cache/symsquare)")
    common.add_argument("--format", choices=["table", "json"], default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="symsquare", parents=[common],
                                     description="mod 2 cohomology of symmetric squares and TC bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("space", parents=[common], help="print H*(X)")
    p.add_argument("--space", required=True)
    p.set_defaults(func=cmd_space)

    p = sub.add_parser("sp2", parents=[common], help="build H*(SP^2 X)")
    p.add_argument("--space", required=True)
    p.add_argument("--relative", action="store_true", help="H*(SP^2 X, X) instead")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_sp2)

    p = sub.add_parser("cuplength", parents=[common], help="cup-length of H*(X) or H*(SP^2 X)")
    p.add_argument("--space", required=True)
    p.add_argument("--of", choices=["sp2", "space"], default="sp2")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_cuplength)

    p = sub.add_parser("bounds", parents=[common], help="propagate invariant bounds")
    p.add_argument("--space", required=True)
    p.add_argument("--kb", type=Path, help="extra facts, JSON list of records")
    p.add_argument("--no-default-kb", action="store_true")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", parents=[common], help="run the golden checks")
    p.add_argument("--only", action="append", choices=sorted(CHECKS))
    p.add_argument("--max-m", type=int, default=16)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.cache_dir = getattr(args, "cache_dir", None) or default_cache_dir()
    args.format = getattr(args, "format", None) or "table"
    args.quiet = getattr(args, "quiet", False)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"symsquare {args.command}: {exc}", file=sys.stderr)
        return 2
    except MalformedAlgebraError as exc:
        print(f"symsquare {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"symsquare {args.command}: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
