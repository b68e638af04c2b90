"""Exact cover by Algorithm X over int bitsets.

Rows and columns are positions; a row's columns are a bitmask. The column
chosen at each node is the one with fewest remaining candidate rows (ties
to the lowest column), so the emission order is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .geometry import bits_of


@dataclass
class ExactCoverInstance:
    columns: list[int]  # labels, e.g. point ids
    rows: list[int]  # labels, e.g. line ids
    row_masks: list[int]  # bitmask over column positions
    fixed: list[int] = field(default_factory=list)  # labels already chosen (starter lines)

    @classmethod
    def from_sets(cls, columns: Sequence[int], rows: dict[int, Iterable[int]]) -> "ExactCoverInstance":
        pos = {c: i for i, c in enumerate(columns)}
        labels = list(rows)
        masks = []
        for r in labels:
            m = 0
            for c in rows[r]:
                m |= 1 << pos[c]
            masks.append(m)
        return cls(list(columns), labels, masks)

    @property
    def n_columns(self) -> int:
        return len(self.columns)


def exact_cover_solve(
    inst: ExactCoverInstance,
    emit: Callable[[tuple[int, ...]], None] | None = None,
) -> int:
    """Enumerate every exact cover; ``emit`` receives each as sorted row labels."""
    n_cols = inst.n_columns
    n_rows = len(inst.rows)
    col_rows = [0] * n_cols
    for r, m in enumerate(inst.row_masks):
        for c in bits_of(m):
            col_rows[c] |= 1 << r
    conflict = [0] * n_rows
    for r, m in enumerate(inst.row_masks):
        acc = 0
        for c in bits_of(m):
            acc |= col_rows[c]
        conflict[r] = acc
    labels = inst.rows
    row_masks = inst.row_masks
    chosen: list[int] = []
    count = 0

    def search(uncovered: int, avail: int) -> None:
        nonlocal count
        if not uncovered:
            count += 1
            if emit is not None:
                emit(tuple(sorted(labels[r] for r in chosen)))
            return
        best_c = -1
        best_n = n_rows + 1
        u = uncovered
        while u:
            low = u & -u
            c = low.bit_length() - 1
            u ^= low
            k = (col_rows[c] & avail).bit_count()
            if k < best_n:
                best_n, best_c = k, c
                if k == 0:
                    return
        cand = col_rows[best_c] & avail
        while cand:
            low = cand & -cand
            r = low.bit_length() - 1
            cand ^= low
            chosen.append(r)
            search(uncovered & ~row_masks[r], avail & ~conflict[r])
            chosen.pop()

    search((1 << n_cols) - 1, (1 << n_rows) - 1)
    return count


def iter_solutions(inst: ExactCoverInstance) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    exact_cover_solve(inst, out.append)
    return out


def naive_exact_cover(columns: Iterable[int], rows: dict[int, Iterable[int]]) -> list[frozenset[int]]:
    """Reference solver: plain sets, first uncovered column, no pruning."""
    cols = sorted(columns)
    rsets = {r: frozenset(cs) for r, cs in rows.items()}
    out = []

    def rec(covered: frozenset[int], picked: list[int]) -> None:
        todo = [c for c in cols if c not in covered]
        if not todo:
            out.append(frozenset(picked))
            return
        c = todo[0]
        for r, cs in rsets.items():
            if c in cs and not (cs & covered):
                picked.append(r)
                rec(covered | cs, picked)
                picked.pop()

    rec(frozenset(), [])
    return out

