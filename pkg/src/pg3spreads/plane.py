"""Translation planes of order q^2 from spreads, and their p-ranks."""

from __future__ import annotations

import logging
import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .geometry import Geometry

log = logging.getLogger(__name__)


class PlaneError(ValueError):
    pass


@dataclass(eq=False)
class TranslationPlane:
    """Projective completion of the translation plane of a spread.

    Points 0..q^4-1 are the vectors of GF(q)^4 (by base-q code); point
    q^4 + i is the direction of the i-th spread line. Lines are the cosets
    of each spread line, component by component, then the line at infinity.
    """

    q: int
    spread: tuple[int, ...]
    incidence: np.ndarray  # lines x points, uint8

    @property
    def n(self) -> int:
        return self.q * self.q

    @property
    def size(self) -> int:
        return self.incidence.shape[0]


def _cosets(geom: Geometry, line: int) -> np.ndarray:
    """Coset label (smallest member code) of every vector modulo the line's subspace."""
    F = geom.field
    q = F.q
    r1, r2 = geom.line_bases[line]
    sub = np.array([F.add_table[F.mul_table[a, r1], F.mul_table[b, r2]] for a in range(q) for b in range(q)])
    allvec = np.stack(np.unravel_index(np.arange(q**4), (q,) * 4), axis=1)
    sums = F.add_table[allvec[:, None, :], sub[None, :, :]]
    codes = geom.vector_code(sums)
    return codes.min(axis=1)


def build_plane(geom: Geometry, spread: Sequence[int], check: bool = True, seed: int = 0, samples: int = 1000) -> TranslationPlane:
    q = geom.q
    spread = tuple(sorted(int(l) for l in spread))
    n = q * q
    n_aff = q**4
    n_pts = n_aff + len(spread)
    rows = []
    for i, l in enumerate(spread):
        labels = _cosets(geom, l)
        _, inverse = np.unique(labels, return_inverse=True)
        k = int(inverse.max()) + 1
        block = np.zeros((k, n_pts), dtype=np.uint8)
        block[inverse, np.arange(n_aff)] = 1
        block[:, n_aff + i] = 1
        rows.append(block)
    inf = np.zeros((1, n_pts), dtype=np.uint8)
    inf[0, n_aff:] = 1
    rows.append(inf)
    plane = TranslationPlane(q, spread, np.concatenate(rows))
    if check:
        check_plane(plane, seed=seed, samples=samples)
    return plane


def check_plane(plane: TranslationPlane, seed: int = 0, samples: int = 1000) -> None:
    """Projective plane axioms: counts, regularity, and sampled point pairs on one line."""
    n = plane.n
    inc = plane.incidence
    expected = n * n + n + 1
    if inc.shape != (expected, expected):
        raise PlaneError("incidence is %dx%d, expected %d points and lines" % (*inc.shape, expected))
    if (inc.sum(axis=1) != n + 1).any():
        raise PlaneError("a line does not have %d points" % (n + 1))
    if (inc.sum(axis=0) != n + 1).any():
        raise PlaneError("a point is not on %d lines" % (n + 1))
    cols = np.ascontiguousarray(inc.T).astype(bool)
    rng = random.Random(seed)
    for _ in range(samples):
        a, b = rng.sample(range(expected), 2)
        common = int(np.count_nonzero(cols[a] & cols[b]))
        if common != 1:
            raise PlaneError("points %d and %d lie on %d common lines" % (a, b, common))


def incidence_from_lines(lines: Sequence[Iterable[int]], n_points: int) -> np.ndarray:
    m = np.zeros((len(lines), n_points), dtype=np.uint8)
    for i, pts in enumerate(lines):
        m[i, list(pts)] = 1
    return m


def _rank_gf2(m: np.ndarray) -> int:
    rows, cols = m.shape
    packed = np.packbits(m.astype(bool), axis=1, bitorder="little")
    pad = (-packed.shape[1]) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros((rows, pad), dtype=np.uint8)], axis=1)
    w = packed.view(np.uint64).copy()
    r = 0
    for col in range(cols):
        if r == rows:
            break
        word, bit = divmod(col, 64)
        colbits = (w[r:, word] >> np.uint64(bit)) & np.uint64(1)
        hits = np.flatnonzero(colbits)
        if not hits.size:
            continue
        piv = r + int(hits[0])
        if piv != r:
            w[[r, piv]] = w[[piv, r]]
        # the row swapped out of position r lacked the bit, so only later hits need clearing
        below = r + hits[1:]
        if below.size:
            w[below, word:] ^= w[r, word:]
        r += 1
    return r


def _rank_modp(m: np.ndarray, p: int) -> int:
    a = m.astype(np.int64) % p
    rows, cols = a.shape
    r = 0
    for col in range(cols):
        if r == rows:
            break
        hits = np.flatnonzero(a[r:, col])
        if not hits.size:
            continue
        piv = r + int(hits[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, col]), -1, p)
        a[r, col:] = a[r, col:] * inv % p
        below = r + 1 + np.flatnonzero(a[r + 1 :, col])
        if below.size:
            f = a[below, col][:, None]
            a[below, col:] = (a[below, col:] - f * a[r, col:]) % p
        r += 1
    return r


def matrix_rank(m: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over GF(p); the input is not modified."""
    m = np.asarray(m)
    if p == 2:
        return _rank_gf2(m)
    return _rank_modp(m, p)


def naive_rank(m: Sequence[Sequence[int]], p: int) -> int:
    """Plain-list row reduction mod p, for cross-checking."""
    a = [[int(v) % p for v in row] for row in m]
    rank = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][c], -1, p)
        a[rank] = [v * inv % p for v in a[rank]]
        for i in range(len(a)):
            if i != rank and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def p_rank(plane: TranslationPlane, p: int) -> int:
    return matrix_rank(plane.incidence, p)


def hamada_bound(p: int, m: int) -> int:
    """p-rank of the Desarguesian plane of order p^m: C(p+1, 2)^m + 1."""
    return math.comb(p + 1, 2) ** m + 1


def prime_power(n: int) -> tuple[int, int]:
    p = next(d for d in range(2, n + 1) if n % d == 0)
    m = 0
    while n > 1:
        if n % p:
            raise ValueError("%d is not a prime power" % n)
        n //= p
        m += 1
    return p, m


@dataclass
class RankReport:
    plane_id: str
    p: int
    rank: int
    hamada: int

    @property
    def equals_bound(self) -> bool:
        return self.rank == self.hamada

    @property
    def below_bound(self) -> bool:
        return self.rank < self.hamada


def rank_report(plane: TranslationPlane, plane_id: str = "", p: int | None = None) -> RankReport:
    pp, m = prime_power(plane.n)
    p = pp if p is None else p
    rank = p_rank(plane, p)
    bound = hamada_bound(pp, m)
    rep = RankReport(plane_id, p, rank, bound)
    if p == pp and rep.below_bound:
        log.warning("plane %s has %d-rank %d below the Hamada value %d", plane_id, p, rank, bound)
    return rep


def rank_histogram(reports: Iterable[RankReport]) -> list[tuple[int, int]]:
    c = Counter(r.rank for r in reports)
    return sorted(c.items())


def write_triplets(plane: TranslationPlane, out: TextIO) -> None:
    """Incidence matrix as 1-based 'row col 1' lines after a 'rows cols nnz' header."""
    rows, cols = np.nonzero(plane.incidence)
    out.write("%d %d %d\n" % (*plane.incidence.shape, len(rows)))
    for r, c in zip(rows.tolist(), cols.tolist()):
        out.write("%d %d 1\n" % (r + 1, c + 1))
