"""Points, lines and the line intersection graph of PG(3,q).

Points are row vectors normalised so the first nonzero coordinate is 1;
lines are 2x4 bases in reduced row-echelon form. Both are numbered in
lexicographic order of those representatives (coordinates in the field's
exponential encoding), so ids are stable across runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .gf import GF, FieldSpec


class GeometryError(RuntimeError):
    pass


def bits_of(mask: int) -> list[int]:
    """Indices of the set bits of a Python int, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << int(i)
    return m


def _rref_lines(q: int) -> list[tuple[int, ...]]:
    out = []
    F = range(q)
    for i, j in itertools.combinations(range(4), 2):
        free1 = [c for c in range(i + 1, 4) if c != j]
        free2 = list(range(j + 1, 4))
        for v1 in itertools.product(F, repeat=len(free1)):
            for v2 in itertools.product(F, repeat=len(free2)):
                r1 = [0] * 4
                r2 = [0] * 4
                r1[i] = 1
                r2[j] = 1
                for c, v in zip(free1, v1):
                    r1[c] = v
                for c, v in zip(free2, v2):
                    r2[c] = v
                out.append(tuple(r1 + r2))
    out.sort()
    return out


@dataclass(eq=False)
class Geometry:
    field: FieldSpec
    points: np.ndarray  # (P, 4) normalised coordinates
    line_bases: np.ndarray  # (L, 2, 4) RREF bases
    line_points: np.ndarray  # (L, q+1) sorted point ids
    pencils: np.ndarray  # (P, q^2+q+1) sorted line ids
    point_index: np.ndarray = field(repr=False)  # vector code -> point id of its span, -1 for 0
    line_of: np.ndarray = field(repr=False)  # (P, P) line through two points, -1 on diagonal
    gamma: list[int] = field(repr=False)  # adjacency rows as int bitsets over line ids
    line_masks: list[int] = field(repr=False)  # point bitset per line
    pencil_masks: list[int] = field(repr=False)  # line bitset per point

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_lines(self) -> int:
        return len(self.line_bases)

    def vector_code(self, vecs: np.ndarray) -> np.ndarray:
        vecs = np.asarray(vecs)
        q = self.q
        return ((vecs[..., 0] * q + vecs[..., 1]) * q + vecs[..., 2]) * q + vecs[..., 3]

    def point_id(self, vec) -> int:
        pid = int(self.point_index[self.vector_code(np.asarray(vec))])
        if pid < 0:
            raise GeometryError("zero vector has no point")
        return pid

    def line_id(self, basis) -> int:
        """Line spanned by the two rows of ``basis`` (any basis, not necessarily RREF)."""
        basis = np.asarray(basis)
        p1, p2 = self.point_index[self.vector_code(basis)]
        if p1 < 0 or p2 < 0 or p1 == p2:
            raise GeometryError("rows do not span a line")
        return int(self.line_of[p1, p2])

    def line_ids(self, bases: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`line_id` over an (..., 2, 4) array; -1 where rows are dependent."""
        pts = self.point_index[self.vector_code(bases)]
        p1, p2 = pts[..., 0], pts[..., 1]
        ok = (p1 >= 0) & (p2 >= 0) & (p1 != p2)
        out = np.full(p1.shape, -1, dtype=np.int64)
        out[ok] = self.line_of[p1[ok], p2[ok]]
        return out

    def lines_meet(self, l1: int, l2: int) -> bool:
        if l1 == l2:
            return True
        return bool(self.gamma[l1] >> l2 & 1)

    def line_through(self, p1: int, p2: int) -> int:
        if p1 == p2:
            raise GeometryError("line_through needs two distinct points")
        return int(self.line_of[p1, p2])

    def neighbours(self, line: int) -> list[int]:
        return bits_of(self.gamma[line])

    def covered_points(self, lines: Iterable[int]) -> int:
        m = 0
        for l in lines:
            m |= self.line_masks[l]
        return m

    def incidence_matrix(self) -> np.ndarray:
        """Lines x points 0/1 matrix."""
        n = np.zeros((self.n_lines, self.n_points), dtype=np.uint8)
        n[np.arange(self.n_lines)[:, None], self.line_points] = 1
        return n

    def write_dimacs(self, out: TextIO) -> None:
        edges = [(i, j) for i in range(self.n_lines) for j in bits_of(self.gamma[i] >> (i + 1) << (i + 1))]
        out.write("p edge %d %d\n" % (self.n_lines, len(edges)))
        for i, j in edges:
            out.write("e %d %d\n" % (i + 1, j + 1))


def _rows_to_ints(matrix: np.ndarray) -> list[int]:
    packed = np.packbits(matrix.astype(bool), axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def adjacency_from_incidence(inc: np.ndarray) -> np.ndarray:
    """Boolean line adjacency (sharing a point, no self-loops) from a lines x points matrix."""
    f = inc.astype(np.float32)
    common = f @ f.T
    adj = common > 0.5
    np.fill_diagonal(adj, False)
    return adj


def build_geometry(field: FieldSpec | int) -> Geometry:
    F = GF(field) if isinstance(field, int) else field
    q = F.q
    add, mul = F.add_table, F.mul_table

    allvec = np.array(list(itertools.product(range(q), repeat=4)), dtype=np.int64)
    lead = np.argmax(allvec != 0, axis=1)
    nonzero = allvec.any(axis=1)
    normal = nonzero & (allvec[np.arange(len(allvec)), lead] == 1)
    points = allvec[normal]  # product order is already lexicographic
    n_pts = len(points)

    point_index = np.full(q**4, -1, dtype=np.int64)
    codes = ((points[:, 0] * q + points[:, 1]) * q + points[:, 2]) * q + points[:, 3]
    for s in range(1, q):
        scaled = mul[s, points]
        sc = ((scaled[:, 0] * q + scaled[:, 1]) * q + scaled[:, 2]) * q + scaled[:, 3]
        point_index[sc] = np.arange(n_pts)
    del codes

    rref = _rref_lines(q)
    bases = np.array(rref, dtype=np.int64).reshape(-1, 2, 4)
    n_lines = len(bases)

    # points on each line: r2 and r1 + a*r2
    r1, r2 = bases[:, 0, :], bases[:, 1, :]
    vecs = [r2] + [add[r1, mul[a, r2]] for a in range(q)]
    vecs = np.stack(vecs, axis=1)  # (L, q+1, 4)
    vc = ((vecs[..., 0] * q + vecs[..., 1]) * q + vecs[..., 2]) * q + vecs[..., 3]
    line_points = np.sort(point_index[vc], axis=1)
    if (line_points < 0).any():
        raise GeometryError("line enumeration produced a zero vector")

    line_of = np.full((n_pts, n_pts), -1, dtype=np.int64)
    for k in range(q + 1):
        for m in range(q + 1):
            if k != m:
                line_of[line_points[:, k], line_points[:, m]] = np.arange(n_lines)

    order = np.argsort(line_points.ravel(), kind="stable")
    pencils = (order // (q + 1)).reshape(n_pts, q * q + q + 1)
    pencils.sort(axis=1)

    inc = np.zeros((n_lines, n_pts), dtype=np.uint8)
    inc[np.arange(n_lines)[:, None], line_points] = 1
    adj = adjacency_from_incidence(inc)

    geom = Geometry(
        field=F,
        points=points,
        line_bases=bases,
        line_points=line_points,
        pencils=pencils,
        point_index=point_index,
        line_of=line_of,
        gamma=_rows_to_ints(adj),
        line_masks=_rows_to_ints(inc),
        pencil_masks=_rows_to_ints(inc.T),
    )
    for arr in (points, bases, line_points, pencils, point_index, line_of):
        arr.setflags(write=False)
    return geom


@dataclass
class GammaReport:
    q: int
    n_points: int
    n_lines: int
    pencil_size: int
    degree: int
    edge_count: int

    def lines(self) -> list[str]:
        return [
            "points %d" % self.n_points,
            "lines %d" % self.n_lines,
            "pencil size %d" % self.pencil_size,
            "gamma degree %d" % self.degree,
            "gamma edges %d" % self.edge_count,
        ]


def gamma_structure_check(geom: Geometry, gamma: list[int] | None = None) -> GammaReport:
    """Check that Γ is exactly the union of the pencil cliques.

    Verifies each pencil is a clique, every edge lies in exactly one pencil,
    and any two pencils share exactly one line. ``gamma`` defaults to the
    geometry's own rows; pass a modified copy to test the checker.
    """
    gamma = geom.gamma if gamma is None else gamma
    n = geom.n_lines
    q = geom.q
    inc = geom.incidence_matrix().astype(np.float32)
    common = inc @ inc.T  # points shared by two lines
    adj = np.zeros((n, n), dtype=bool)
    for i, row in enumerate(gamma):
        b = np.frombuffer(row.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
        adj[i] = np.unpackbits(b, bitorder="little")[:n].astype(bool)

    if adj.diagonal().any():
        i = int(np.flatnonzero(adj.diagonal())[0])
        raise GeometryError("self-loop at line %d" % i)
    asym = np.argwhere(adj != adj.T)
    if len(asym):
        i, j = asym[0]
        raise GeometryError("adjacency not symmetric at (%d, %d)" % (i, j))
    off = ~np.eye(n, dtype=bool)
    if (common[off] > 1.5).any():
        i, j = np.argwhere((common > 1.5) & off)[0]
        raise GeometryError("lines %d and %d share more than one point" % (i, j))
    # each edge in exactly one pencil, each pencil a clique
    in_pencil = (common > 0.5) & off
    bad = np.argwhere(in_pencil != adj)
    if len(bad):
        i, j = bad[0]
        if adj[i, j]:
            raise GeometryError("edge (%d, %d) lies in no pencil" % (i, j))
        raise GeometryError("pencil pair (%d, %d) missing from gamma" % (i, j))
    pen = inc.T @ inc  # lines shared by two pencils
    pen_off = ~np.eye(geom.n_points, dtype=bool)
    if (np.abs(pen[pen_off] - 1) > 0.5).any():
        a, b = np.argwhere((np.abs(pen - 1) > 0.5) & pen_off)[0]
        raise GeometryError("pencils %d and %d share %d lines" % (a, b, int(pen[a, b])))

    degrees = adj.sum(axis=1)
    if (degrees != degrees[0]).any():
        raise GeometryError("gamma is not regular")
    return GammaReport(
        q=q,
        n_points=geom.n_points,
        n_lines=n,
        pencil_size=geom.pencils.shape[1],
        degree=int(degrees[0]),
        edge_count=int(adj.sum() // 2),
    )
