from __future__ import annotations

import itertools

import numpy as np
import pytest

from pg3spreads.collineation import pgammal_order
from pg3spreads.geometry import bits_of
from pg3spreads.perm import set_image, setwise_stabilizer
from pg3spreads.search import (
    BASE_LINE,
    SearchLimitError,
    Starter,
    check_starter,
    complete_starter,
    enumerate_starters,
    is_spread,
    spreads_from_scratch,
    starter_identity_check,
    starters_per_line,
)


def all_labeled_starters(geom):
    """Every starter at the base line, by brute force over one line per point."""
    pts = geom.line_points[BASE_LINE].tolist()
    choices = [[l for l in geom.pencils[p].tolist() if l != BASE_LINE] for p in pts]
    out = []

    def rec(i, chosen):
        if i == len(pts):
            out.append(tuple(sorted(chosen)))
            return
        for l in choices[i]:
            if all(not geom.lines_meet(l, m) for m in chosen):
                chosen.append(l)
                rec(i + 1, chosen)
                chosen.pop()

    rec(0, [])
    return out


def orbit_count(sets, gens):
    """Number of orbits of the group generated by ``gens`` on a family of sets."""
    remaining = set(sets)
    n = 0
    while remaining:
        n += 1
        seed = remaining.pop()
        stack = [seed]
        while stack:
            s = stack.pop()
            for g in gens:
                t = set_image(g, s)
                if t in remaining:
                    remaining.remove(t)
                    stack.append(t)
    return n


@pytest.mark.parametrize("q", [2, 3])
def test_starters_match_orbit_partition(q, request):
    ctx = request.getfixturevalue("ctx%d" % q)
    labeled = all_labeled_starters(ctx.geom)
    assert len(labeled) == starters_per_line(q)
    H = ctx.ext.stabilizer(BASE_LINE)
    reps = enumerate_starters(ctx.geom, ctx.ext)
    assert len(reps) == orbit_count(labeled, H.gens)
    for st in reps:
        check_starter(ctx.geom, st)


def test_per_line_counts():
    assert starters_per_line(2) == 48
    assert starters_per_line(3) == 1944


@pytest.mark.parametrize("q,lhs", [(2, 1680), (3, 130 * 1944), (4, 357 * starters_per_line(4))])
def test_counting_identity(q, lhs, request):
    ctx = request.getfixturevalue("ctx%d" % q)
    reps = enumerate_starters(ctx.geom, ctx.ext)
    rep = starter_identity_check(ctx.geom, ctx.ext, reps)
    assert rep.lhs == lhs
    assert rep.ok, rep.lines()


def test_dropped_starter_breaks_identity(ctx4):
    reps = enumerate_starters(ctx4.geom, ctx4.ext)
    for k in range(len(reps)):
        rep = starter_identity_check(ctx4.geom, ctx4.ext, reps[:k] + reps[k + 1 :])
        assert not rep.ok


@pytest.mark.parametrize("q", [2, 3])
def test_completions_account_for_every_spread(q, request):
    """Orbit-weighted completion counts equal the number of spreads avoiding the base line."""
    ctx = request.getfixturevalue("ctx%d" % q)
    H = ctx.ext.stabilizer(BASE_LINE)
    total = 0
    for st in enumerate_starters(ctx.geom, ctx.ext):
        sols = []
        n = complete_starter(ctx.geom, st, sols.append)
        assert n == len(sols)
        assert all(is_spread(ctx.geom, s) and set(st.lines) <= set(s) and BASE_LINE not in s for s in sols)
        total += H.order // setwise_stabilizer(H, st.lines).order * n
    spreads = spreads_from_scratch(ctx.geom)
    assert total == sum(1 for s in spreads if BASE_LINE not in s)


def test_from_scratch_limit(ctx4):
    with pytest.raises(SearchLimitError):
        spreads_from_scratch(ctx4.geom)


def test_starter_order_follows_base_points(ctx3):
    st = enumerate_starters(ctx3.geom, ctx3.ext)[0]
    pts = ctx3.geom.line_points[BASE_LINE].tolist()
    for p, l in zip(pts, st.lines):
        assert ctx3.geom.line_masks[l] >> p & 1
    bad = Starter(BASE_LINE, st.lines[1:] + st.lines[:1])
    with pytest.raises(ValueError):
        check_starter(ctx3.geom, bad)
