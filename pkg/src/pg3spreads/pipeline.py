"""End-to-end classification runs with per-starter checkpoints.

A run works in a checkpoint directory holding ``ledger.json`` (config,
starter list, per-starter status) and one ``starter_NNNNN.txt`` per
completion job: a header naming the starter, one spread per line as sorted
line ids, and a final ``done`` line. Jobs are merged in starter order, so
outputs do not depend on the number of workers.
"""

from __future__ import annotations

import hashlib
import json
import logging
import multiprocessing as mp
import os
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .classify import (
    ClassificationReport,
    Deduper,
    InvariantError,
    SpreadClass,
    classify,
    format_table,
    pair_consistency_check,
)
from .collineation import duality_element, extended_group, pgl_group
from .geometry import Geometry, build_geometry
from .gf import SUPPORTED_ORDERS
from .perm import PermGroup, minimal_image
from .plane import build_plane, rank_histogram, rank_report
from .search import (
    BASE_LINE,
    Starter,
    StarterStats,
    complete_starter,
    enumerate_starters,
    starter_identity_check,
    starter_stats,
)
from .spreadset import encode_line, from_spread_set, to_spread_set

log = logging.getLogger(__name__)

ALL_STAGES = ("starters", "complete", "classify", "spreadsets", "ranks")
PENDING, RUNNING, DONE = "pending", "running", "done"


class ConfigError(ValueError):
    """Bad configuration or a checkpoint that belongs to another run."""


class CheckpointError(RuntimeError):
    pass


@dataclass
class RunConfig:
    q: int
    out: Path
    stages: tuple[str, ...] = ALL_STAGES
    jobs: int = 1
    checkpoint_dir: Path | None = None
    starter_range: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.q not in SUPPORTED_ORDERS:
            raise ConfigError("unsupported q=%d (supported: %s)" % (self.q, ", ".join(map(str, SUPPORTED_ORDERS))))
        bad = set(self.stages) - set(ALL_STAGES)
        if bad:
            raise ConfigError("unknown stages: %s" % ", ".join(sorted(bad)))
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")
        self.out = Path(self.out)
        if self.checkpoint_dir is not None:
            self.checkpoint_dir = Path(self.checkpoint_dir)

    @property
    def ckpt(self) -> Path:
        return self.checkpoint_dir if self.checkpoint_dir is not None else self.out / "checkpoints"


def parse_range(text: str) -> tuple[int, int]:
    """'A..B' -> (A, B), the half-open interval of starter indices."""
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise ConfigError("starter range must look like A..B, got %r" % text) from None
    if not 0 <= lo < hi:
        raise ConfigError("empty starter range %r" % text)
    return lo, hi


@dataclass
class StarterEntry:
    index: int
    lines: list[int]
    status: str = PENDING
    solutions: int = 0
    wall: float = 0.0
    cpu: float = 0.0


@dataclass
class RunLedger:
    q: int
    starter_hash: str
    entries: list[StarterEntry]
    identity: list[str] = field(default_factory=list)
    identity_ok: bool = True
    finished: bool = False

    @property
    def done_count(self) -> int:
        return sum(e.status == DONE for e in self.entries)

    @property
    def total_solutions(self) -> int:
        return sum(e.solutions for e in self.entries)

    @property
    def total_cpu(self) -> float:
        return sum(e.cpu for e in self.entries)

    def save(self, path: Path) -> None:
        data = asdict(self)
        data["totals"] = {"done": self.done_count, "solutions": self.total_solutions, "cpu": round(self.total_cpu, 3)}
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(data, indent=1) + "\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: Path) -> "RunLedger":
        try:
            data = json.loads(path.read_text())
            data.pop("totals", None)
            data["entries"] = [StarterEntry(**e) for e in data["entries"]]
            ledger = cls(**data)
        except (OSError, ValueError, TypeError, KeyError) as exc:
            raise CheckpointError("unreadable ledger %s: %s" % (path, exc)) from None
        if ledger.starter_hash != starter_hash(ledger.q, [e.lines for e in ledger.entries]):
            raise CheckpointError("ledger %s does not match its starter list" % path)
        return ledger


def starter_hash(q: int, starters: Iterable[Sequence[int]]) -> str:
    h = hashlib.sha256(("q=%d\n" % q).encode())
    for s in starters:
        h.update((" ".join(map(str, s)) + "\n").encode())
    return h.hexdigest()


# -- shared read-only state, built once per process --------------------------------


@dataclass
class Context:
    q: int
    geom: Geometry
    pgl: PermGroup
    ext: PermGroup
    duality: np.ndarray


_CONTEXTS: dict[int, Context] = {}


def context(q: int) -> Context:
    ctx = _CONTEXTS.get(q)
    if ctx is None:
        geom = build_geometry(q)
        ctx = _CONTEXTS[q] = Context(q, geom, pgl_group(geom), extended_group(geom), duality_element(geom))
    return ctx


# -- checkpoint files --------------------------------------------------------------


def checkpoint_path(ckpt: Path, index: int) -> Path:
    return ckpt / ("starter_%05d.txt" % index)


def read_checkpoint(path: Path, index: int, lines: Sequence[int]) -> tuple[list[tuple[int, ...]], bool]:
    """Solutions recorded so far and whether the job finished."""
    if not path.exists():
        return [], False
    text = path.read_text()
    rows = text.split("\n")
    if not text.endswith("\n"):
        rows = rows[:-1]  # torn final write
    rows = [r for r in rows if r]
    header = "starter %d %s" % (index, " ".join(map(str, lines)))
    if not rows or rows[0] != header:
        raise CheckpointError("%s does not belong to starter %d" % (path, index))
    done = rows[-1] == "done"
    sols = []
    for r in rows[1 : len(rows) - done]:
        try:
            sols.append(tuple(int(v) for v in r.split()))
        except ValueError:
            raise CheckpointError("corrupt solution line in %s" % path) from None
    return sols, done


def run_starter_job(args: tuple[int, int, list[int], str]) -> tuple[int, int, float, float]:
    """Complete one starter into its checkpoint file; resumes a partial file."""
    q, index, lines, path_str = args
    path = Path(path_str)
    ctx = context(q)
    existing, done = read_checkpoint(path, index, lines)
    if done:
        return index, len(existing), 0.0, 0.0
    t0, c0 = time.perf_counter(), time.process_time()
    st = Starter.make(ctx.geom, BASE_LINE, lines, canonical=sorted(lines))
    header = "starter %d %s\n" % (index, " ".join(map(str, lines)))
    with path.open("w") as f:
        f.write(header)
        for s in existing:
            f.write(" ".join(map(str, s)) + "\n")
        f.flush()
        seen = 0

        def emit(sol: tuple[int, ...]) -> None:
            nonlocal seen
            seen += 1
            if seen <= len(existing):
                if existing[seen - 1] != sol:
                    raise CheckpointError("%s disagrees with the solver at solution %d" % (path, seen))
                return
            f.write(" ".join(map(str, sol)) + "\n")
            if seen % 256 == 0:
                f.flush()

        count = complete_starter(ctx.geom, st, emit)
        f.write("done\n")
    return index, count, time.perf_counter() - t0, time.process_time() - c0


def _canon_job(args: tuple[int, int, list[int], str]) -> tuple[int, Counter]:
    q, index, lines, path_str = args
    ctx = context(q)
    sols, done = read_checkpoint(Path(path_str), index, lines)
    if not done:
        raise CheckpointError("starter %d is not complete" % index)
    return index, Counter(minimal_image(ctx.ext, s) for s in sols)


def _pool_map(fn: Callable, items: list, jobs: int) -> Iterable:
    if jobs <= 1 or len(items) <= 1:
        return map(fn, items)
    pool = mp.get_context("fork").Pool(jobs)
    return _PoolIter(pool, pool.imap_unordered(fn, items))


class _PoolIter:
    def __init__(self, pool, it):
        self.pool, self.it = pool, it

    def __iter__(self):
        try:
            yield from self.it
        finally:
            self.pool.terminate()
            self.pool.join()


# -- stages ------------------------------------------------------------------------


def _write(path: Path, lines: Iterable[str]) -> None:
    path.write_text("".join(l + "\n" for l in lines))


def _fmt(ids: Iterable[int]) -> str:
    return " ".join(map(str, ids))


@dataclass
class RunResult:
    ledger: RunLedger
    report: ClassificationReport | None = None
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def init_ledger(cfg: RunConfig, progress: Callable[[str], None] | None = None) -> RunLedger:
    """Enumerate starters, run the counting identity and write a fresh ledger."""
    ctx = context(cfg.q)
    starters = enumerate_starters(ctx.geom, ctx.ext)
    stats = starter_stats(ctx.geom, ctx.ext, starters)
    ident = starter_identity_check(ctx.geom, ctx.ext, starters, stats)
    entries = [StarterEntry(i, list(s.canonical)) for i, s in enumerate(starters)]
    ledger = RunLedger(cfg.q, starter_hash(cfg.q, [e.lines for e in entries]), entries, ident.lines(), ident.ok)
    cfg.ckpt.mkdir(parents=True, exist_ok=True)
    ledger.save(cfg.ckpt / "ledger.json")
    if progress:
        progress("%d starters, identity %s" % (len(entries), "holds" if ident.ok else "FAILS"))
    return ledger


def write_starters(cfg: RunConfig, ledger: RunLedger) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    ctx = context(cfg.q)
    rows = []
    for e in ledger.entries:
        st = Starter.make(ctx.geom, BASE_LINE, e.lines)
        rows.append(_fmt(st.lines))
    _write(cfg.out / "starters.txt", rows)
    _write(cfg.out / "identity.txt", ledger.identity)


def load_or_init_ledger(cfg: RunConfig, progress: Callable[[str], None] | None = None) -> RunLedger:
    path = cfg.ckpt / "ledger.json"
    if path.exists():
        ledger = RunLedger.load(path)
        if ledger.q != cfg.q:
            raise ConfigError("checkpoint directory holds a q=%d run, not q=%d" % (ledger.q, cfg.q))
        return ledger
    return init_ledger(cfg, progress)


def run_completions(
    cfg: RunConfig,
    ledger: RunLedger,
    progress: Callable[[str], None] | None = None,
    stop_after: int | None = None,
) -> int:
    """Dispatch pending and interrupted starters; returns how many jobs ran."""
    path = cfg.ckpt / "ledger.json"
    todo = [e for e in ledger.entries if e.status != DONE]
    if cfg.starter_range is not None:
        lo, hi = cfg.starter_range
        if hi > len(ledger.entries):
            raise ConfigError("starter range %d..%d exceeds %d starters" % (lo, hi, len(ledger.entries)))
        todo = [e for e in todo if lo <= e.index < hi]
    if stop_after is not None:
        todo = todo[:stop_after]
    for e in todo:
        e.status = RUNNING
    ledger.save(path)
    args = [(cfg.q, e.index, e.lines, str(checkpoint_path(cfg.ckpt, e.index))) for e in todo]
    ran = 0
    for index, count, wall, cpu in _pool_map(run_starter_job, args, cfg.jobs):
        e = ledger.entries[index]
        e.status, e.solutions = DONE, count
        e.wall += wall
        e.cpu += cpu
        ledger.save(path)
        ran += 1
        if progress:
            progress("starter %d: %d spreads (%d/%d done)" % (index, count, ledger.done_count, len(ledger.entries)))
    return ran


def run_classification(cfg: RunConfig, ledger: RunLedger) -> tuple[ClassificationReport, list[str]]:
    ctx = context(cfg.q)
    args = [(cfg.q, e.index, e.lines, str(checkpoint_path(cfg.ckpt, e.index))) for e in ledger.entries]
    dd = Deduper(ctx.ext)
    merged: dict[int, Counter] = dict(_pool_map(_canon_job, args, cfg.jobs))
    for i in sorted(merged):
        for key, n in merged[i].items():
            dd._classes.setdefault(key, SpreadClass(key)).count += n
    report = classify(dd.classes(), cfg.q, ctx.pgl, ctx.ext, ctx.duality)
    failures = []

    starters = [Starter.make(ctx.geom, BASE_LINE, e.lines, e.lines) for e in ledger.entries]
    completions = {}
    for a in args:
        sols, _ = read_checkpoint(Path(a[3]), a[1], a[2])
        completions[a[1]] = {frozenset(s) for s in sols}
    pairs = pair_consistency_check(ctx.geom, ctx.ext, report.classes, starters, completions)
    if not pairs.ok:
        failures.append("pair consistency: %d (line, spread) pairs not discovered" % len(pairs.missing))

    cfg.out.mkdir(parents=True, exist_ok=True)
    _write(
        cfg.out / "classes_ext.txt",
        ["%d %d %s : %s" % (c.aut_order, c.pgl_order, c.split, _fmt(c.canonical)) for c in report.classes],
    )
    _write(cfg.out / "classes_pgl.txt", [_fmt(r) for r in report.pgl_representatives()])
    rows = report.table()
    _write(cfg.out / "group_orders.txt", format_table(rows))
    _write(cfg.out / "group_orders.csv", ["order,count_one_class,count_two_class,total"] + [",".join(map(str, r)) for r in rows])
    summary = report.lines() + [
        "labeled spreads avoiding base line %d" % ledger.total_solutions,
        "pair checks %d, missing %d" % (pairs.checked, len(pairs.missing)),
    ]
    _write(cfg.out / "summary.txt", summary)
    return report, failures


def run_spreadsets(cfg: RunConfig, report: ClassificationReport) -> list[str]:
    ctx = context(cfg.q)
    failures = []
    ext_lines = [encode_line(to_spread_set(ctx.geom, c.canonical)) for c in report.classes]
    pgl_lines = []
    for rep in report.pgl_representatives():
        ss = to_spread_set(ctx.geom, rep)
        back = from_spread_set(ctx.geom, ss)
        if minimal_image(ctx.pgl, back) != minimal_image(ctx.pgl, rep):
            failures.append("spread set of %s does not round-trip" % _fmt(rep))
        pgl_lines.append(encode_line(ss))
    _write(cfg.out / "spreadsets_ext.txt", ext_lines)
    _write(cfg.out / "spreadsets_pgl.txt", pgl_lines)
    return failures


def run_ranks(cfg: RunConfig, report: ClassificationReport) -> list[str]:
    ctx = context(cfg.q)
    reports = []
    for i, rep in enumerate(report.pgl_representatives()):
        plane = build_plane(ctx.geom, rep)
        reports.append(rank_report(plane, str(i)))
    _write(cfg.out / "ranks_by_plane.txt", ["%s %d %d" % (r.plane_id, r.rank, r.hamada) for r in reports])
    _write(cfg.out / "ranks.txt", ["%d %d" % row for row in rank_histogram(reports)])
    return ["plane %s has rank %d below %d" % (r.plane_id, r.rank, r.hamada) for r in reports if r.below_bound]


def run(
    cfg: RunConfig,
    progress: Callable[[str], None] | None = None,
    stop_after: int | None = None,
) -> RunResult:
    """Run the configured stages; ``stop_after`` interrupts after that many completion jobs."""
    ledger = load_or_init_ledger(cfg, progress)
    result = RunResult(ledger)
    if not ledger.identity_ok:
        result.failures.append("counting identity fails")
    if "starters" in cfg.stages:
        write_starters(cfg, ledger)
    later = [s for s in ALL_STAGES[1:] if s in cfg.stages]
    if not later:
        return result
    run_completions(cfg, ledger, progress, stop_after)
    if ledger.done_count < len(ledger.entries):
        if progress:
            progress("%d of %d starters complete; later stages wait" % (ledger.done_count, len(ledger.entries)))
        return result
    if not any(s in cfg.stages for s in ("classify", "spreadsets", "ranks")):
        return result
    report, fails = run_classification(cfg, ledger)
    result.report = report
    result.failures += fails
    if "spreadsets" in cfg.stages:
        result.failures += run_spreadsets(cfg, report)
    if "ranks" in cfg.stages:
        result.failures += run_ranks(cfg, report)
    ledger.finished = True
    ledger.save(cfg.ckpt / "ledger.json")
    return result


def resume(ckpt: Path, q: int | None = None, jobs: int = 1, out: Path | None = None, progress=None) -> RunResult:
    path = Path(ckpt) / "ledger.json"
    if not path.exists():
        raise ConfigError("no ledger in %s" % ckpt)
    ledger = RunLedger.load(path)
    if q is not None and q != ledger.q:
        raise ConfigError("checkpoint holds a q=%d run, not q=%d" % (ledger.q, q))
    meta = json.loads(path.read_text())
    out = Path(out) if out is not None else Path(meta.get("out") or Path(ckpt).parent)
    if ledger.finished:
        return RunResult(ledger)
    cfg = RunConfig(ledger.q, out, jobs=jobs, checkpoint_dir=Path(ckpt))
    return run(cfg, progress)
