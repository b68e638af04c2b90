"""Spread sets: q^2 two-by-two matrices with pairwise nonsingular differences.

A spread containing W_inf = {(0,0,x,y)} and W_0 = {(x,y,0,0)} has every other
component of the form W_A = {(x, xA)}; the matrices A (with A = 0 for W_0)
form its spread set. On disk a spread set is one text line: the matrices
row by row, one digit per field element, in ascending order of their
four-character encodings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .collineation import fdet2, fmat_inv, fmatmul
from .geometry import Geometry
from .gf import FieldSpec

Matrix2 = tuple[int, int, int, int]  # (a, b, c, d) row-major


class SpreadSetError(ValueError):
    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


def encode_matrix(F: FieldSpec, m: Matrix2) -> str:
    return "".join(F.encode_char(v) for v in m)


@dataclass(frozen=True)
class SpreadSet:
    field: FieldSpec
    mats: tuple[Matrix2, ...]

    @classmethod
    def from_matrices(cls, F: FieldSpec, mats: Iterable[Sequence[int]], check: bool = True) -> "SpreadSet":
        ms = sorted((tuple(int(v) for v in m) for m in mats), key=lambda m: encode_matrix(F, m))  # type: ignore[misc]
        ss = cls(F, tuple(ms))  # type: ignore[arg-type]
        if check:
            check_spread_set(ss)
        return ss

    def __len__(self) -> int:
        return len(self.mats)

    def array(self) -> np.ndarray:
        return np.array(self.mats, dtype=np.int64).reshape(-1, 2, 2)


def check_spread_set(ss: SpreadSet) -> None:
    """Raise SpreadSetError naming the first pair (i, j) with singular difference."""
    F = ss.field
    q = F.q
    if len(ss.mats) != q * q:
        raise SpreadSetError("spread set has %d matrices, expected %d" % (len(ss.mats), q * q))
    if (0, 0, 0, 0) not in ss.mats:
        raise SpreadSetError("spread set lacks the zero matrix")
    A = ss.array()
    diff = F.add_table[A[:, None], F.neg_table[A[None, :]]]
    det = fdet2(F, diff)
    np.fill_diagonal(det, 1)
    bad = np.argwhere(det == 0)
    if len(bad):
        i, j = (int(v) for v in bad[0])
        raise SpreadSetError("matrices %d and %d have a singular difference" % (i, j), (i, j))


def encode_line(ss: SpreadSet) -> str:
    return "".join(encode_matrix(ss.field, m) for m in ss.mats)


def decode_line(text: str, F: FieldSpec) -> SpreadSet:
    text = text.rstrip()
    q = F.q
    if len(text) != 4 * q * q:
        raise SpreadSetError("line has %d characters, expected %d" % (len(text), 4 * q * q))
    vals = [F.decode_char(c) for c in text]
    mats = [tuple(vals[i : i + 4]) for i in range(0, len(vals), 4)]
    return SpreadSet.from_matrices(F, mats)


def read_spread_sets(f: TextIO, F: FieldSpec) -> Iterator[tuple[int, SpreadSet | SpreadSetError]]:
    """Yield (line number, spread set or the error for that line); blank lines are skipped."""
    for n, line in enumerate(f, start=1):
        if not line.strip():
            continue
        try:
            yield n, decode_line(line, F)
        except ValueError as exc:
            err = exc if isinstance(exc, SpreadSetError) else SpreadSetError(str(exc))
            yield n, err


def write_spread_sets(f: TextIO, sets: Iterable[SpreadSet]) -> None:
    for ss in sets:
        f.write(encode_line(ss) + "\n")


def transpose_set(ss: SpreadSet) -> SpreadSet:
    return SpreadSet.from_matrices(ss.field, [(a, c, b, d) for a, b, c, d in ss.mats], check=False)


def irreducible_quadratic(F: FieldSpec) -> tuple[int, int]:
    """Smallest (t, n) such that x^2 - t x - n has no root in GF(q)."""
    for t, n in itertools.product(F.elements, repeat=2):
        if all(F.sub(F.sub(F.mul(x, x), F.mul(t, x)), n) != 0 for x in F.elements):
            return t, n
    raise AssertionError("no irreducible quadratic")


def regular_spread_set(F: FieldSpec) -> SpreadSet:
    """{aI + bC}: GF(q^2) as 2x2 matrices over GF(q), C a companion matrix."""
    t, n = irreducible_quadratic(F)
    C = (0, 1, n, t)
    mats = []
    for a, b in itertools.product(F.elements, repeat=2):
        bc = [F.mul(b, v) for v in C]
        mats.append((F.add(a, bc[0]), bc[1], bc[2], F.add(a, bc[3])))
    return SpreadSet.from_matrices(F, mats)


def graph_line(geom: Geometry, A: Matrix2) -> int:
    a, b, c, d = A
    return geom.line_id([[1, 0, a, b], [0, 1, c, d]])


def w_infinity(geom: Geometry) -> int:
    return geom.line_id([[0, 0, 1, 0], [0, 0, 0, 1]])


def from_spread_set(geom: Geometry, ss: SpreadSet) -> list[int]:
    """The spread {W_inf} + {W_A}, as sorted line ids."""
    if ss.field.q != geom.q:
        raise SpreadSetError("spread set over GF(%d) used with PG(3,%d)" % (ss.field.q, geom.q))
    check_spread_set(ss)
    A = ss.array()
    bases = np.zeros((len(A), 2, 4), dtype=np.int64)
    bases[:, 0, 0] = 1
    bases[:, 1, 1] = 1
    bases[:, :, 2:] = A
    ids = geom.line_ids(bases).tolist()
    return sorted(ids + [w_infinity(geom)])


def _spread_set_for_pair(geom: Geometry, spread: Sequence[int], inf: int, zero: int) -> list[Matrix2]:
    F = geom.field
    rows = np.concatenate([geom.line_bases[zero], geom.line_bases[inf]])
    T = fmat_inv(F, rows)
    others = [l for l in spread if l != inf]
    img = fmatmul(F, geom.line_bases[others], T)  # (k, 2, 4)
    X, Y = img[:, :, :2], img[:, :, 2:]
    det = fdet2(F, X)
    if (det == 0).any():
        raise SpreadSetError("image line not in graph form: input is not a spread")
    dinv = F.inv_table[det]
    adj = np.stack(
        [
            np.stack([X[:, 1, 1], F.neg_table[X[:, 0, 1]]], axis=-1),
            np.stack([F.neg_table[X[:, 1, 0]], X[:, 0, 0]], axis=-1),
        ],
        axis=1,
    )
    Xinv = F.mul_table[dinv[:, None, None], adj]
    A = fmatmul(F, Xinv, Y)
    return [tuple(int(v) for v in m.ravel()) for m in A]  # type: ignore[misc]


def to_spread_set(geom: Geometry, spread: Sequence[int], max_lines: int | None = None) -> SpreadSet:
    """Spread set of a spread, after moving two of its lines to W_inf and W_0.

    Every ordered pair among the first ``max_lines`` lines (all of them by
    default for q <= 5, eight otherwise) is tried and the pair giving the
    smallest encoded line wins.
    """
    F = geom.field
    spread = sorted(int(l) for l in spread)
    if len(spread) != F.q**2 + 1:
        raise SpreadSetError("a spread of PG(3,%d) has %d lines, got %d" % (F.q, F.q**2 + 1, len(spread)))
    if max_lines is None:
        max_lines = len(spread) if F.q <= 5 else 8
    pool = spread[:max_lines]
    best: tuple[str, SpreadSet] | None = None
    for inf, zero in itertools.permutations(pool, 2):
        mats = _spread_set_for_pair(geom, spread, inf, zero)
        ss = SpreadSet.from_matrices(F, mats, check=False)
        key = encode_line(ss)
        if best is None or key < best[0]:
            best = (key, ss)
    assert best is not None
    check_spread_set(best[1])
    return best[1]
