from __future__ import annotations

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pg3spreads.geometry import build_geometry
from pg3spreads.plane import (
    PlaneError,
    build_plane,
    check_plane,
    hamada_bound,
    matrix_rank,
    naive_rank,
    p_rank,
    prime_power,
    rank_histogram,
    rank_report,
    write_triplets,
)
from pg3spreads.spreadset import from_spread_set, regular_spread_set


def regular_plane(q):
    geom = build_geometry(q)
    return build_plane(geom, from_spread_set(geom, regular_spread_set(geom.field)))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 40), st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_fast_rank_matches_naive(p, rows, cols, seed):
    rng = np.random.default_rng(seed)
    density = rng.uniform(0.05, 0.9)
    m = (rng.random((rows, cols)) < density) * rng.integers(1, p, size=(rows, cols))
    assert matrix_rank(m, p) == naive_rank(m.tolist(), p)


def test_rank_gf2_wide_words():
    rng = np.random.default_rng(9)
    m = rng.integers(0, 2, size=(90, 200))
    assert matrix_rank(m, 2) == naive_rank(m.tolist(), 2)
    m[:, :] = 0
    assert matrix_rank(m, 2) == 0


def test_rank_invariant_under_permutation():
    plane = regular_plane(3)
    rng = np.random.default_rng(0)
    inc = plane.incidence
    shuffled = inc[rng.permutation(inc.shape[0])][:, rng.permutation(inc.shape[1])]
    assert matrix_rank(shuffled, 3) == p_rank(plane, 3)


@pytest.mark.parametrize("q,rank", [(2, 10), (3, 37), (4, 82)])
def test_desarguesian_ranks_equal_hamada(q, rank):
    plane = regular_plane(q)
    rep = rank_report(plane, "reg")
    assert rep.rank == rank == rep.hamada
    assert rep.equals_bound


def test_hamada_values():
    assert hamada_bound(2, 6) == 730
    assert hamada_bound(3, 2) == 37
    assert prime_power(64) == (2, 6)
    with pytest.raises(ValueError):
        prime_power(12)


def test_plane_axioms_and_negative_control():
    plane = regular_plane(2)
    assert plane.incidence.shape == (21, 21)
    broken = plane.incidence.copy()
    broken[[0, 1]] = broken[[0, 0]]  # duplicate a line
    plane.incidence = broken
    with pytest.raises(PlaneError):
        check_plane(plane, samples=2000)


def test_non_spread_rejected():
    geom = build_geometry(2)
    lines = list(range(5))  # lines through a common point
    with pytest.raises(PlaneError):
        build_plane(geom, lines)


def test_triplets_and_histogram():
    plane = regular_plane(2)
    buf = io.StringIO()
    write_triplets(plane, buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "21 21 105"
    assert len(rows) == 106
    reps = [rank_report(plane, str(i)) for i in range(3)]
    assert rank_histogram(reps) == [(10, 3)]
