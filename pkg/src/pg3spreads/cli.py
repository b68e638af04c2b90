"""Command-line front end.

Every flag can also be set through an environment variable named
``PG3SPREADS_<FLAG>`` (for example ``PG3SPREADS_JOBS=4``); flags given on
the command line win. Exit status: 0 success, 1 invariant failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from . import pipeline
from .classify import InvariantError, dedupe, labeled_count, split_duality
from .collineation import pgammal_order
from .geometry import GeometryError, build_geometry, gamma_structure_check
from .gf import GF, SUPPORTED_ORDERS
from .perm import minimal_image
from .pipeline import CheckpointError, ConfigError, RunConfig, context, parse_range
from .plane import build_plane, rank_histogram, rank_report
from .search import spreads_from_scratch
from .spreadset import (
    SpreadSetError,
    check_spread_set,
    encode_line,
    from_spread_set,
    read_spread_sets,
    regular_spread_set,
    to_spread_set,
    transpose_set,
)

ENV_PREFIX = "PG3SPREADS_"
EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("pg3spreads")


class UsageError(Exception):
    pass


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper(), default)


def _env_int(name: str, default: int | None) -> int | None:
    v = _env(name)
    if v is None:
        return default
    try:
        return int(v)
    except ValueError:
        raise UsageError("%s%s must be an integer, got %r" % (ENV_PREFIX, name.upper(), v)) from None


def _add_common(p: argparse.ArgumentParser, q: bool = True, run: bool = True) -> None:
    if q:
        p.add_argument("--q", type=int, default=None, help="field order")
    p.add_argument("--out", type=Path, default=None, help="output directory or file")
    if run:
        p.add_argument("--jobs", type=int, default=None, help="worker processes")
        p.add_argument("--checkpoint-dir", type=Path, default=None)
        p.add_argument("--starter-range", default=None, metavar="A..B", help="only complete starters A <= i < B")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pg3spreads", description="Classify line spreads of PG(3,q).")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("starters", help="enumerate starters and check the counting identity"))
    _add_common(sub.add_parser("classify", help="run the whole pipeline"))
    p = sub.add_parser("resume", help="continue an interrupted run from its checkpoint directory")
    _add_common(p)

    p = sub.add_parser("spreadsets", help="write spread sets for spreads or built-in examples")
    _add_common(p, run=False)
    p.add_argument("--in", dest="infile", type=Path, help="file of spreads as line ids, one per line")
    p.add_argument("--regular", action="store_true", help="the regular spread set")
    p.add_argument("--transpose", action="store_true", help="also write the transposed sets")

    p = sub.add_parser("rank", help="p-rank of the plane of each spread set in a file")
    _add_common(p, run=False)
    p.add_argument("file", type=Path)

    p = sub.add_parser("check", help="run the invariant suite for one q")
    _add_common(p, run=False)
    return ap


def _q(args) -> int:
    q = args.q if args.q is not None else _env_int("q", None)
    if q is None:
        raise UsageError("--q is required")
    if q not in SUPPORTED_ORDERS:
        raise UsageError("unsupported q=%d (supported: %s)" % (q, ", ".join(map(str, SUPPORTED_ORDERS))))
    return q


def _out(args, default: str) -> Path:
    if args.out is not None:
        return args.out
    return Path(_env("out", default))


def _config(args, stages: Sequence[str]) -> RunConfig:
    q = _q(args)
    rng = args.starter_range or _env("starter_range")
    ckpt = args.checkpoint_dir or _env("checkpoint_dir")
    return RunConfig(
        q=q,
        out=_out(args, "run_q%d" % q),
        stages=tuple(stages),
        jobs=args.jobs if args.jobs is not None else _env_int("jobs", 1),
        checkpoint_dir=Path(ckpt) if ckpt else None,
        starter_range=parse_range(rng) if rng else None,
    )


def _progress(msg: str) -> None:
    log.info(msg)


def _finish(result: pipeline.RunResult, out: Path) -> int:
    for f in result.failures:
        print("invariant failure: %s" % f, file=sys.stderr)
    if result.report is not None:
        print("\n".join(result.report.lines()))
    print("outputs in %s" % out)
    return EXIT_INVARIANT if result.failures else EXIT_OK


def cmd_starters(args) -> int:
    cfg = _config(args, ("starters",))
    result = pipeline.run(cfg, _progress)
    print("\n".join(result.ledger.identity))
    return _finish(result, cfg.out)


def cmd_classify(args) -> int:
    cfg = _config(args, pipeline.ALL_STAGES)
    result = pipeline.run(cfg, _progress)
    if result.report is None and not result.failures:
        print("%d of %d starters complete" % (result.ledger.done_count, len(result.ledger.entries)))
    return _finish(result, cfg.out)


def cmd_resume(args) -> int:
    ckpt = args.checkpoint_dir or _env("checkpoint_dir")
    if ckpt is None:
        raise UsageError("resume needs --checkpoint-dir")
    q = args.q if args.q is not None else _env_int("q", None)
    jobs = args.jobs if args.jobs is not None else _env_int("jobs", 1)
    out = args.out or (Path(_env("out")) if _env("out") else None)
    result = pipeline.resume(Path(ckpt), q=q, jobs=jobs, out=out, progress=_progress)
    if result.report is None and not result.failures:
        print("nothing to do" if result.ledger.finished else "%d of %d starters complete" % (result.ledger.done_count, len(result.ledger.entries)))
        return EXIT_OK
    return _finish(result, out or Path(ckpt).parent)


def _read_spreads(path: Path) -> list[list[int]]:
    spreads = []
    for n, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split(":")[-1].strip()
        if not line:
            continue
        try:
            spreads.append([int(v) for v in line.split()])
        except ValueError:
            raise UsageError("%s:%d: expected line ids" % (path, n)) from None
    return spreads


def cmd_spreadsets(args) -> int:
    q = _q(args)
    F = GF(q)
    sets = []
    if args.regular:
        sets.append(regular_spread_set(F))
    if args.infile is not None:
        geom = build_geometry(F)
        for s in _read_spreads(args.infile):
            sets.append(to_spread_set(geom, s))
    if not args.regular and args.infile is None:
        raise UsageError("give --in FILE and/or --regular")
    if args.transpose:
        sets += [transpose_set(ss) for ss in sets]
    for ss in sets:
        check_spread_set(ss)
    text = "".join(encode_line(ss) + "\n" for ss in sets)
    out = args.out if args.out is not None else (Path(_env("out")) if _env("out") else None)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)
    return EXIT_OK


def cmd_rank(args) -> int:
    q = _q(args)
    F = GF(q)
    geom = build_geometry(F)
    if not args.file.exists():
        raise UsageError("no such file: %s" % args.file)
    reports, bad = [], 0
    rows = []
    with args.file.open() as f:
        for n, item in read_spread_sets(f, F):
            if isinstance(item, SpreadSetError):
                print("%s:%d: %s" % (args.file, n, item), file=sys.stderr)
                bad += 1
                continue
            plane = build_plane(geom, from_spread_set(geom, item))
            r = rank_report(plane, str(n))
            reports.append(r)
            rows.append("%d %d" % (n, r.rank))
    rows.append("# rank count")
    rows += ["%d %d" % row for row in rank_histogram(reports)]
    text = "".join(r + "\n" for r in rows)
    out = args.out if args.out is not None else (Path(_env("out")) if _env("out") else None)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)
    return EXIT_INVARIANT if bad else EXIT_OK


def run_checks(q: int) -> list[tuple[str, bool, str]]:
    """The invariant suite for one field order; each entry is (name, ok, detail)."""
    out: list[tuple[str, bool, str]] = []
    t = time.perf_counter()
    ctx = context(q)
    try:
        rep = gamma_structure_check(ctx.geom)
        out.append(("gamma structure", True, "; ".join(rep.lines())))
    except GeometryError as exc:
        out.append(("gamma structure", False, str(exc)))
    want = pgammal_order(q)
    out.append(("group order", ctx.pgl.order == want and ctx.ext.order == 2 * want, "%d / %d" % (ctx.pgl.order, ctx.ext.order)))

    F = ctx.geom.field
    reg = from_spread_set(ctx.geom, regular_spread_set(F))
    cls = dedupe([reg], ctx.ext)[0]
    try:
        split_duality(cls, ctx.pgl, ctx.ext, ctx.duality)
        out.append(("regular spread stabilizer ratio", True, "%d / %d" % (cls.aut_order, cls.pgl_order)))
    except InvariantError as exc:
        out.append(("regular spread stabilizer ratio", False, str(exc)))
    rt = from_spread_set(ctx.geom, to_spread_set(ctx.geom, reg))
    out.append(("spread set round trip", minimal_image(ctx.pgl, rt) == minimal_image(ctx.pgl, reg), ""))
    if q <= 5:
        from .search import enumerate_starters, starter_identity_check

        starters = enumerate_starters(ctx.geom, ctx.ext)
        ident = starter_identity_check(ctx.geom, ctx.ext, starters)
        out.append(("counting identity", ident.ok, "lhs %d rhs %d" % (ident.lhs, ident.rhs)))
    if q <= 3:
        spreads = spreads_from_scratch(ctx.geom)
        classes = dedupe(spreads, ctx.ext)
        for c in classes:
            split_duality(c, ctx.pgl, ctx.ext, ctx.duality)
        total = labeled_count(classes, want)
        out.append(("from-scratch orbit sizes", total == len(spreads), "%d spreads, orbits sum to %d" % (len(spreads), total)))
    plane = build_plane(ctx.geom, reg)
    r = rank_report(plane, "regular")
    out.append(("regular plane rank equals Hamada value", r.equals_bound, "%d vs %d" % (r.rank, r.hamada)))
    log.info("checks for q=%d took %.1fs", q, time.perf_counter() - t)
    return out


def cmd_check(args) -> int:
    q = _q(args)
    results = run_checks(q)
    lines = ["%s %s%s" % ("PASS" if ok else "FAIL", name, ": " + detail if detail else "") for name, ok, detail in results]
    print("\n".join(lines))
    if args.out is not None:
        args.out.write_text("".join(l + "\n" for l in lines))
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_INVARIANT


COMMANDS = {
    "starters": cmd_starters,
    "classify": cmd_classify,
    "resume": cmd_resume,
    "spreadsets": cmd_spreadsets,
    "rank": cmd_rank,
    "check": cmd_check,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, CheckpointError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print("invariant failure: %s" % exc, file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
