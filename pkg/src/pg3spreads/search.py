"""Starters based at a fixed line, the counting identity, and spread completion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .exactcover import ExactCoverInstance, exact_cover_solve
from .geometry import Geometry, bits_of, mask_of
from .perm import PermGroup, minimal_image, setwise_stabilizer

BASE_LINE = 0


@dataclass(frozen=True)
class Starter:
    """q+1 pairwise skew lines, one through each point of ``base_line``.

    ``lines`` is ordered by the point of the base line each member passes
    through; ``canonical`` is the sorted minimal image under the base
    line's stabilizer, which is what equivalence is decided on.
    """

    base_line: int
    lines: tuple[int, ...]
    canonical: tuple[int, ...] = ()

    @classmethod
    def make(cls, geom: Geometry, base_line: int, lines: Iterable[int], canonical: Iterable[int] = ()) -> "Starter":
        pts = geom.line_points[base_line].tolist()
        by_point = {}
        for l in lines:
            common = geom.line_masks[l] & geom.line_masks[base_line]
            by_point[pts.index(common.bit_length() - 1)] = int(l)
        ordered = tuple(by_point[i] for i in sorted(by_point))
        return cls(base_line, ordered, tuple(canonical) or tuple(sorted(ordered)))


def check_starter(geom: Geometry, st: Starter) -> None:
    q = geom.q
    if len(st.lines) != q + 1 or st.base_line in st.lines:
        raise ValueError("a starter needs %d lines other than the base line" % (q + 1))
    pts = geom.line_points[st.base_line].tolist()
    for i, l in enumerate(st.lines):
        if not geom.line_masks[l] >> pts[i] & 1:
            raise ValueError("starter line %d misses point %d of the base line" % (l, pts[i]))
        for m in st.lines[i + 1 :]:
            if geom.lines_meet(l, m):
                raise ValueError("starter lines %d and %d meet" % (l, m))


def starters_per_line(q: int) -> int:
    return math.prod(q * q + q - j * q for j in range(q + 1))


def enumerate_starters(
    geom: Geometry,
    group: PermGroup,
    base_line: int = BASE_LINE,
    progress: Callable[[int, int], None] | None = None,
) -> list[Starter]:
    """One starter per orbit of the base line's stabilizer, sorted by canonical form.

    Partial starters grow one line at a time; at each size only the minimal
    images under the stabilizer are kept.
    """
    H = group.stabilizer(base_line)
    meeting = geom.gamma[base_line]
    level: set[tuple[int, ...]] = {()}
    for size in range(1, geom.q + 2):
        nxt: set[tuple[int, ...]] = set()
        for rep in sorted(level):
            blocked = 0
            for l in rep:
                blocked |= geom.gamma[l] | (1 << l)
            for m in bits_of(meeting & ~blocked):
                nxt.add(minimal_image(H, rep + (m,)))
        level = nxt
        if progress is not None:
            progress(size, len(level))
    return [Starter.make(geom, base_line, rep, rep) for rep in sorted(level)]


def transversal_count(geom: Geometry, lines: Iterable[int]) -> int:
    """Number of lines meeting every line of the set."""
    acc = (1 << geom.n_lines) - 1
    for l in lines:
        acc &= geom.gamma[l]
    return acc.bit_count()


@dataclass
class StarterStats:
    index: int
    stabilizer_order: int  # of the starter as a set, in the full group
    transversals: int
    base_line_orbit: int  # orbit of the base line under the starter's stabilizer
    set_class: tuple[int, ...]  # minimal image of the set under the full group


@dataclass
class IdentityReport:
    q: int
    lhs: int
    rhs: int  # sum over set classes of |G|/|G_S| t(S)
    rhs_pairs: int  # sum over starter reps of |G|/|G_S| |orbit of base line|
    n_starters: int
    n_set_classes: int
    stats: list[StarterStats] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs == self.rhs_pairs

    def lines(self) -> list[str]:
        return [
            "q %d" % self.q,
            "starters %d" % self.n_starters,
            "starter set classes %d" % self.n_set_classes,
            "lhs %d" % self.lhs,
            "rhs %d" % self.rhs,
            "rhs (pairs) %d" % self.rhs_pairs,
            "identity %s" % ("holds" if self.ok else "FAILS"),
        ]


def starter_stats(geom: Geometry, group: PermGroup, starters: Sequence[Starter]) -> list[StarterStats]:
    out = []
    for i, st in enumerate(starters):
        stab = setwise_stabilizer(group, st.lines)
        orbit = stab.orbit(st.base_line)
        out.append(
            StarterStats(
                index=i,
                stabilizer_order=stab.order,
                transversals=transversal_count(geom, st.lines),
                base_line_orbit=len(orbit),
                set_class=minimal_image(group, st.lines),
            )
        )
    return out


def starter_identity_check(
    geom: Geometry,
    group: PermGroup,
    starters: Sequence[Starter],
    stats: Sequence[StarterStats] | None = None,
) -> IdentityReport:
    """Count pairs (line, starter based at it) two ways, with exact integers.

    The left side is #lines times the number of starters at one line. The
    right side sums |G|/|G_S| t(S) once per class of starter sets; the pair
    form sums |G|/|G_S| times the orbit of the base line under G_S once per
    starter, which also catches a starter missing from a class that is
    otherwise represented.
    """
    stats = list(starter_stats(geom, group, starters) if stats is None else stats)
    lhs = geom.n_lines * starters_per_line(geom.q)
    G = group.order
    seen: dict[tuple[int, ...], StarterStats] = {}
    rhs_pairs = 0
    for s in stats:
        rhs_pairs += G // s.stabilizer_order * s.base_line_orbit
        seen.setdefault(s.set_class, s)
    rhs = sum(G // s.stabilizer_order * s.transversals for s in seen.values())
    return IdentityReport(geom.q, lhs, rhs, rhs_pairs, len(stats), len(seen), stats)


def build_instance(geom: Geometry, starter: Starter) -> ExactCoverInstance:
    """Exact cover of the points the starter leaves uncovered, by lines skew to it."""
    covered = geom.covered_points(starter.lines)
    columns = bits_of(((1 << geom.n_points) - 1) & ~covered)
    pos = {p: i for i, p in enumerate(columns)}
    rows, masks = [], []
    for l in range(geom.n_lines):
        if l == starter.base_line or geom.line_masks[l] & covered:
            continue
        rows.append(l)
        masks.append(mask_of(pos[p] for p in geom.line_points[l].tolist()))
    return ExactCoverInstance(columns, rows, masks, fixed=list(starter.lines))


def complete_starter(geom: Geometry, starter: Starter, emit: Callable[[tuple[int, ...]], None] | None = None) -> int:
    """Stream every spread containing the starter and avoiding its base line."""
    inst = build_instance(geom, starter)
    fixed = tuple(starter.lines)
    if emit is None:
        return exact_cover_solve(inst)
    return exact_cover_solve(inst, lambda sol: emit(tuple(sorted(fixed + sol))))


class SearchLimitError(ValueError):
    pass


def spreads_from_scratch(geom: Geometry, allow_large: bool = False) -> list[tuple[int, ...]]:
    """Every spread of PG(3,q), by exact cover with no symmetry reduction."""
    if geom.q > 3 and not allow_large:
        raise SearchLimitError("from-scratch enumeration is limited to q <= 3")
    inst = ExactCoverInstance(
        columns=list(range(geom.n_points)),
        rows=list(range(geom.n_lines)),
        row_masks=list(geom.line_masks),
    )
    out: list[tuple[int, ...]] = []
    exact_cover_solve(inst, out.append)
    return out


def is_spread(geom: Geometry, lines: Sequence[int]) -> bool:
    q = geom.q
    if len(set(lines)) != q * q + 1:
        return False
    cover = 0
    for l in lines:
        if cover & geom.line_masks[l]:
            return False
        cover |= geom.line_masks[l]
    return cover == (1 << geom.n_points) - 1
