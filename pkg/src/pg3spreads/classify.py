"""Isomorph rejection of spreads and the split into PGammaL classes."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .geometry import Geometry, bits_of
from .perm import PermGroup, minimal_image, set_image, setwise_stabilizer
from .search import BASE_LINE, Starter

ONE_CLASS = "one"
TWO_CLASS = "two"


class InvariantError(RuntimeError):
    """A consistency check of the classification failed."""


@dataclass
class SpreadClass:
    canonical: tuple[int, ...]  # minimal image under the extended group
    aut_order: int = 0
    pgl_order: int = 0
    stabilizer: PermGroup | None = field(default=None, repr=False, compare=False)
    representatives: list[tuple[int, ...]] = field(default_factory=list)
    count: int = 0  # how many input spreads fell into this class

    @property
    def split(self) -> str:
        return ONE_CLASS if self.aut_order == 2 * self.pgl_order else TWO_CLASS

    @property
    def n_pgl_classes(self) -> int:
        return 1 if self.split == ONE_CLASS else 2


class Deduper:
    """Collects spreads into classes keyed by their minimal image.

    ``add`` can be fed from several producers; ``classes`` merges
    deterministically by canonical form regardless of arrival order.
    """

    def __init__(self, group: PermGroup):
        self.group = group
        self._classes: dict[tuple[int, ...], SpreadClass] = {}

    def add(self, spread: Iterable[int]) -> tuple[int, ...]:
        key = minimal_image(self.group, spread)
        cls = self._classes.get(key)
        if cls is None:
            cls = self._classes[key] = SpreadClass(key)
        cls.count += 1
        return key

    def merge(self, other: "Deduper") -> None:
        for key, c in other._classes.items():
            mine = self._classes.setdefault(key, SpreadClass(key))
            mine.count += c.count

    def classes(self) -> list[SpreadClass]:
        return [self._classes[k] for k in sorted(self._classes)]


def dedupe(spreads: Iterable[Iterable[int]], group: PermGroup) -> list[SpreadClass]:
    d = Deduper(group)
    for s in spreads:
        d.add(s)
    return d.classes()


def split_duality(
    cls: SpreadClass, pgl: PermGroup, ext: PermGroup, duality: np.ndarray
) -> list[tuple[int, ...]]:
    """Fill in both stabilizer orders and return the PGammaL class representatives.

    The class gives one PGammaL class when its extended stabilizer is twice
    the PGammaL one, otherwise two: S and its image under ``duality``.
    """
    S = cls.canonical
    ext_stab = setwise_stabilizer(ext, S)
    pgl_stab = setwise_stabilizer(pgl, S)
    cls.stabilizer = ext_stab
    cls.aut_order = ext_stab.order
    cls.pgl_order = pgl_stab.order
    if cls.aut_order not in (cls.pgl_order, 2 * cls.pgl_order):
        raise InvariantError(
            "stabilizer orders %d (extended) and %d (PGammaL) are not in ratio 1 or 2" % (cls.aut_order, cls.pgl_order)
        )
    if cls.split == ONE_CLASS:
        cls.representatives = [S]
    else:
        cls.representatives = [S, set_image(duality, S)]
    return cls.representatives


@dataclass
class ClassificationReport:
    q: int
    classes: list[SpreadClass]

    @property
    def n_ext_classes(self) -> int:
        return len(self.classes)

    @property
    def n_one_class(self) -> int:
        return sum(1 for c in self.classes if c.split == ONE_CLASS)

    @property
    def n_two_class(self) -> int:
        return sum(1 for c in self.classes if c.split == TWO_CLASS)

    @property
    def n_pgl_classes(self) -> int:
        return self.n_one_class + 2 * self.n_two_class

    def pgl_representatives(self) -> list[tuple[int, ...]]:
        return [r for c in self.classes for r in c.representatives]

    def table(self) -> list[tuple[int, int, int, int]]:
        return group_order_table(self.classes)

    def lines(self) -> list[str]:
        out = [
            "q %d" % self.q,
            "extended-group classes %d" % self.n_ext_classes,
            "one-class %d" % self.n_one_class,
            "two-class %d" % self.n_two_class,
            "PGammaL classes %d" % self.n_pgl_classes,
        ]
        return out


def classify(classes: Sequence[SpreadClass], q: int, pgl: PermGroup, ext: PermGroup, duality: np.ndarray) -> ClassificationReport:
    for c in classes:
        split_duality(c, pgl, ext, duality)
    return ClassificationReport(q, list(classes))


def group_order_table(classes: Iterable[SpreadClass]) -> list[tuple[int, int, int, int]]:
    """Rows (PGammaL stabilizer order, one-class count, two-class count, total), counting PGammaL classes."""
    one: Counter[int] = Counter()
    two: Counter[int] = Counter()
    for c in classes:
        if c.split == ONE_CLASS:
            one[c.pgl_order] += 1
        else:
            two[c.pgl_order] += 2
    return [(o, one[o], two[o], one[o] + two[o]) for o in sorted(set(one) | set(two))]


def format_table(rows: Sequence[tuple[int, int, int, int]]) -> list[str]:
    head = ("order", "one-class", "two-class", "total")
    cells = [head] + [tuple(str(v) for v in r) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(4)]
    return ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]


@dataclass
class PairReport:
    checked: int = 0  # (line, spread) orbit representatives examined
    missing: list[tuple[tuple[int, ...], int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.missing


def pair_consistency_check(
    geom: Geometry,
    ext: PermGroup,
    classes: Sequence[SpreadClass],
    starters: Sequence[Starter],
    completions: Mapping[int, set[frozenset[int]]],
) -> PairReport:
    """Check every (line, spread) pair was discovered from some starter.

    For each class representative S and each orbit of its stabilizer on the
    lines outside S, the pair is moved so that the line becomes the base
    line; the lines of S through the base line then form a starter, which
    is brought to canonical form while carrying S along. The carried spread
    must be among the completions recorded for that starter.
    """
    H = ext.stabilizer(BASE_LINE)
    index = {st.canonical: i for i, st in enumerate(starters)}
    meeting = geom.gamma[BASE_LINE]
    report = PairReport()
    for c in classes:
        S = c.canonical
        stab = c.stabilizer if c.stabilizer is not None else setwise_stabilizer(ext, S)
        inside = set(S)
        for orbit in stab.orbits():
            ell = int(orbit[0])
            if ell in inside:
                continue
            report.checked += 1
            g = ext.element_to(ell, BASE_LINE)
            moved = [int(g[l]) for l in S]
            part = [l for l in moved if meeting >> l & 1]
            canon, carried = minimal_image(H, part, carry=moved)
            i = index.get(canon)
            if i is None or frozenset(carried) not in completions.get(i, ()):
                report.missing.append((S, ell))
    return report


def labeled_count(classes: Iterable[SpreadClass], pgl_order: int) -> int:
    """Number of spreads in all PGammaL orbits covered by the classes."""
    return sum(pgl_order // c.pgl_order * c.n_pgl_classes for c in classes)
