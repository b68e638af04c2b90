from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from pg3spreads.exactcover import ExactCoverInstance, exact_cover_solve, iter_solutions, naive_exact_cover
from pg3spreads.geometry import build_geometry
from pg3spreads.search import spreads_from_scratch


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 9), st.integers(1, 14))
def test_solver_matches_naive(seed, n_cols, n_rows):
    rng = random.Random(seed)
    rows = {}
    for r in range(n_rows):
        k = rng.randint(1, min(3, n_cols))
        rows[r] = rng.sample(range(n_cols), k)
    inst = ExactCoverInstance.from_sets(list(range(n_cols)), rows)
    got = {frozenset(s) for s in iter_solutions(inst)}
    want = set(naive_exact_cover(range(n_cols), rows))
    assert got == want
    assert exact_cover_solve(inst) == len(want)


def test_no_solution_and_trivial():
    inst = ExactCoverInstance.from_sets([0, 1], {0: [0], 1: [0, 1]})
    assert iter_solutions(inst) == [(1,)]
    assert exact_cover_solve(ExactCoverInstance.from_sets([0, 1], {0: [0]})) == 0


def test_spreads_of_pg32_match_naive():
    geom = build_geometry(2)
    rows = {l: geom.line_points[l].tolist() for l in range(geom.n_lines)}
    want = set(naive_exact_cover(range(geom.n_points), rows))
    got = {frozenset(s) for s in spreads_from_scratch(geom)}
    assert len(want) == 56
    assert got == want


def test_solutions_are_sorted_labels():
    inst = ExactCoverInstance.from_sets(list("abc"), {9: "a", 3: "bc", 5: "b", 1: "c"})
    sols = iter_solutions(inst)
    assert sorted(sols) == [(1, 5, 9), (3, 9)]
    assert all(list(s) == sorted(s) for s in sols)
