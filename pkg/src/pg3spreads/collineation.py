"""Semilinear maps of GF(q)^4 and correlations, and their action on line ids.

Vectors are rows acted on from the right: a collineation (M, k) sends the
subspace U to sigma^k(U) M with sigma the Frobenius map. A correlation
additionally replaces the image by its orthogonal complement under the
standard symmetric form x.y = sum x_i y_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Geometry, GeometryError
from .gf import FieldSpec
from .perm import IDX, PermGroup


def fmatmul(F: FieldSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix product over GF(q) with numpy broadcasting over leading axes."""
    A = np.asarray(A)
    B = np.asarray(B)
    prods = F.mul_table[A[..., :, :, None], B[..., None, :, :]]  # (..., i, k, j)
    out = prods[..., 0, :]
    for k in range(1, A.shape[-1]):
        out = F.add_table[out, prods[..., k, :]]
    return out


def fdot(F: FieldSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    prods = F.mul_table[x, y]
    out = prods[..., 0]
    for k in range(1, prods.shape[-1]):
        out = F.add_table[out, prods[..., k]]
    return out


def fmat_inv(F: FieldSpec, M: np.ndarray) -> np.ndarray:
    """Inverse of a square matrix over GF(q) by Gauss-Jordan."""
    n = M.shape[0]
    a = [list(map(int, row)) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        s = F.inv(a[col][col])
        a[col] = [F.mul(s, v) for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = F.neg(a[r][col])
                a[r] = [F.add(v, F.mul(f, w)) for v, w in zip(a[r], a[col])]
    return np.array([row[n:] for row in a], dtype=np.int64)


def fdet2(F: FieldSpec, A: np.ndarray) -> np.ndarray:
    """Determinants of (..., 2, 2) matrices."""
    ad = F.mul_table[A[..., 0, 0], A[..., 1, 1]]
    bc = F.mul_table[A[..., 0, 1], A[..., 1, 0]]
    return F.add_table[ad, F.neg_table[bc]]


def identity_matrix(n: int = 4) -> np.ndarray:
    return np.eye(n, dtype=np.int64)  # idx 1 is the field's one


@dataclass(frozen=True, eq=False)
class Collineation:
    """x -> frob^k(x) M, followed by orthogonal complement when ``dual``."""

    matrix: np.ndarray
    frob: int = 0
    dual: bool = False

    def then(self, other: "Collineation", F: FieldSpec) -> "Collineation":
        """The map doing ``self`` first and ``other`` second."""
        m = F.frobenius_table(other.frob)[self.matrix] if other.frob else self.matrix
        right = other.matrix
        if self.dual:
            # (W^perp) M = (W M^-T)^perp
            right = fmat_inv(F, other.matrix).T
        return Collineation(fmatmul(F, m, right), (self.frob + other.frob) % F.e, self.dual ^ other.dual)

    def map_bases(self, F: FieldSpec, bases: np.ndarray) -> np.ndarray:
        b = F.frobenius_table(self.frob)[bases] if self.frob else bases
        return fmatmul(F, b, self.matrix)

    def line_perm(self, geom: Geometry) -> np.ndarray:
        imgs = geom.line_ids(self.map_bases(geom.field, geom.line_bases))
        if (imgs < 0).any():
            raise GeometryError("matrix is singular")
        if self.dual:
            imgs = perp_map(geom)[imgs]
        perm = imgs.astype(IDX)
        if len(np.unique(perm)) != geom.n_lines:
            raise GeometryError("collineation does not permute the lines")
        return perm


_PERP_CACHE: dict[int, np.ndarray] = {}


def perp_map(geom: Geometry) -> np.ndarray:
    """Line id -> id of its orthogonal complement under the standard form."""
    key = id(geom)
    cached = _PERP_CACHE.get(key)
    if cached is not None and len(cached) == geom.n_lines:
        return cached
    F = geom.field
    q = F.q
    out = np.empty(geom.n_lines, dtype=IDX)
    pts = geom.points
    for start in range(0, geom.n_lines, 256):
        rows = geom.line_bases[start : start + 256]  # (b, 2, 4)
        dots = fdot(F, pts[None, None, :, :], rows[:, :, None, :])  # (b, 2, P)
        ortho = (dots == 0).all(axis=1)  # (b, P)
        for r, mask in enumerate(ortho):
            idx = np.flatnonzero(mask)
            if len(idx) != q + 1:
                raise GeometryError("complement of a line is not a line")
            out[start + r] = geom.line_of[idx[0], idx[1]]
    _PERP_CACHE[key] = out
    return out


def pgammal_order(q: int) -> int:
    p = next(d for d in range(2, q + 1) if q % d == 0)
    e = 0
    while p**e < q:
        e += 1
    return q**6 * (q**2 - 1) * (q**3 - 1) * (q**4 - 1) * e


def pgammal_collineations(F: FieldSpec) -> list[Collineation]:
    """Generators of GammaL(4,q): a diagonal, a transvection, a 4-cycle, Frobenius."""
    out = []
    if F.q > 2:
        d = identity_matrix()
        d[0, 0] = F.primitive
        out.append(Collineation(d))
    t = identity_matrix()
    t[0, 1] = 1
    out.append(Collineation(t))
    c = np.zeros((4, 4), dtype=np.int64)
    for i in range(4):
        c[i, (i + 1) % 4] = 1
    out.append(Collineation(c))
    if F.e > 1:
        out.append(Collineation(identity_matrix(), frob=1))
    return out


def pgammal_generators(geom: Geometry) -> list[np.ndarray]:
    return [c.line_perm(geom) for c in pgammal_collineations(geom.field)]


def duality_element(geom: Geometry) -> np.ndarray:
    return perp_map(geom).copy()


def pgl_group(geom: Geometry) -> PermGroup:
    """The image of PGammaL(4,q) on line ids, with its known order."""
    return PermGroup(pgammal_generators(geom), geom.n_lines, pgammal_order(geom.q))


def extended_group(geom: Geometry) -> PermGroup:
    """PGammaL(4,q) together with the duality: the full automorphism group of Γ."""
    return PermGroup(pgammal_generators(geom) + [duality_element(geom)], geom.n_lines, 2 * pgammal_order(geom.q))


def frame_transform(F: FieldSpec, rows: np.ndarray) -> np.ndarray:
    """Matrix sending rows[i] to the i-th unit vector (inverse of the row matrix)."""
    return fmat_inv(F, rows)
