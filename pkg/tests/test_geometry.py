from __future__ import annotations

import io
import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pg3spreads.geometry import (
    GeometryError,
    adjacency_from_incidence,
    bits_of,
    build_geometry,
    gamma_structure_check,
    mask_of,
)
from pg3spreads.gf import GF


def count_formula(q):
    pts = (q**4 - 1) // (q - 1)
    lines = (q**2 + 1) * (q**2 + q + 1)
    return pts, lines, q * q + q + 1, (q + 1) * (q * q + q)


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_counts_and_gamma(q):
    geom = build_geometry(q)
    pts, lines, pencil, degree = count_formula(q)
    rep = gamma_structure_check(geom)
    assert (rep.n_points, rep.n_lines, rep.pencil_size, rep.degree) == (pts, lines, pencil, degree)
    assert rep.edge_count == pts * pencil * (pencil - 1) // 2


def test_line_zero_is_w_infinity():
    geom = build_geometry(3)
    assert geom.line_bases[0].tolist() == [[0, 0, 1, 0], [0, 0, 0, 1]]


def span_points(geom, u, v):
    """Point ids on the span of u and v, computed with scalar field arithmetic."""
    F = geom.field
    out = set()
    for a, b in itertools.product(F.elements, repeat=2):
        if a == 0 and b == 0:
            continue
        w = [F.add(F.mul(a, x), F.mul(b, y)) for x, y in zip(u, v)]
        out.add(geom.point_id(w))
    return out


@pytest.mark.parametrize("q", [2, 3])
def test_line_through_brute_force(q):
    geom = build_geometry(q)
    for p1, p2 in itertools.combinations(range(geom.n_points), 2):
        l = geom.line_through(p1, p2)
        want = span_points(geom, geom.points[p1].tolist(), geom.points[p2].tolist())
        assert set(geom.line_points[l].tolist()) == want
    with pytest.raises(GeometryError):
        geom.line_through(0, 0)


@pytest.mark.parametrize("q", [2, 3])
def test_gamma_matches_incidence(q):
    geom = build_geometry(q)
    adj = adjacency_from_incidence(geom.incidence_matrix())
    for i in range(geom.n_lines):
        assert bits_of(geom.gamma[i]) == np.flatnonzero(adj[i]).tolist()


def test_perturbed_gamma_is_rejected():
    geom = build_geometry(3)
    rng = random.Random(7)
    for _ in range(5):
        i, j = rng.sample(range(geom.n_lines), 2)
        gamma = list(geom.gamma)
        gamma[i] ^= 1 << j
        gamma[j] ^= 1 << i
        with pytest.raises(GeometryError):
            gamma_structure_check(geom, gamma)
    gamma = list(geom.gamma)
    gamma[4] ^= 1 << 9  # asymmetric flip
    with pytest.raises(GeometryError):
        gamma_structure_check(geom, gamma)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.data())
def test_line_ids_any_basis(q, data):
    geom = build_geometry(q)
    F = geom.field
    l = data.draw(st.integers(0, geom.n_lines - 1))
    # a random invertible change of basis of the stored rows
    invertible = [m for m in itertools.product(range(q), repeat=4) if F.sub(F.mul(m[0], m[3]), F.mul(m[1], m[2]))]
    a, b, c, d = data.draw(st.sampled_from(invertible))
    r1, r2 = geom.line_bases[l].tolist()
    u = [F.add(F.mul(a, x), F.mul(b, y)) for x, y in zip(r1, r2)]
    v = [F.add(F.mul(c, x), F.mul(d, y)) for x, y in zip(r1, r2)]
    assert geom.line_id([u, v]) == l
    assert geom.line_ids(np.array([[u, v], [u, u]])).tolist() == [l, -1]


def test_dimacs_export():
    geom = build_geometry(2)
    buf = io.StringIO()
    geom.write_dimacs(buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "p edge 35 315"
    assert len(rows) == 316
    i, j = map(int, rows[1].split()[1:])
    assert geom.lines_meet(i - 1, j - 1)


def test_mask_round_trip():
    ids = [0, 5, 64, 130]
    assert bits_of(mask_of(ids)) == ids


def test_build_accepts_field():
    assert build_geometry(GF(2)).n_lines == 35
