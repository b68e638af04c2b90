from __future__ import annotations

import random

import pytest

from pg3spreads.classify import (
    ONE_CLASS,
    Deduper,
    classify,
    dedupe,
    format_table,
    group_order_table,
    labeled_count,
    pair_consistency_check,
    split_duality,
    SpreadClass,
)
from pg3spreads.collineation import pgammal_order
from pg3spreads.perm import set_image
from pg3spreads.search import complete_starter, enumerate_starters, spreads_from_scratch


def run_pipeline(ctx):
    starters = enumerate_starters(ctx.geom, ctx.ext)
    completions = {}
    dd = Deduper(ctx.ext)
    for i, st in enumerate(starters):
        sols = []
        complete_starter(ctx.geom, st, sols.append)
        completions[i] = {frozenset(s) for s in sols}
        for s in sols:
            dd.add(s)
    report = classify(dd.classes(), ctx.q, ctx.pgl, ctx.ext, ctx.duality)
    return starters, completions, report


def test_q2_one_class(ctx2):
    spreads = spreads_from_scratch(ctx2.geom)
    assert len(spreads) == 56
    classes = dedupe(spreads, ctx2.ext)
    assert len(classes) == 1
    split_duality(classes[0], ctx2.pgl, ctx2.ext, ctx2.duality)
    assert classes[0].split == ONE_CLASS
    assert pgammal_order(2) == 56 * classes[0].pgl_order


def test_q3_from_scratch_matches_starter_pipeline(ctx3):
    spreads = spreads_from_scratch(ctx3.geom)
    classes = dedupe(spreads, ctx3.ext)
    report = classify(classes, 3, ctx3.pgl, ctx3.ext, ctx3.duality)
    assert report.n_pgl_classes == 2
    assert labeled_count(report.classes, pgammal_order(3)) == len(spreads)
    starters, completions, piped = run_pipeline(ctx3)
    assert [c.canonical for c in piped.classes] == [c.canonical for c in report.classes]
    pairs = pair_consistency_check(ctx3.geom, ctx3.ext, piped.classes, starters, completions)
    assert pairs.ok and pairs.checked > 0


def test_q4_pipeline(ctx4):
    starters, completions, report = run_pipeline(ctx4)
    for c in report.classes:
        assert c.aut_order in (c.pgl_order, 2 * c.pgl_order)
    pairs = pair_consistency_check(ctx4.geom, ctx4.ext, report.classes, starters, completions)
    assert pairs.ok
    assert report.n_pgl_classes == 3
    # every class is reached, and orbit sizes add up to all labeled spreads avoiding line 0
    assert sum(c.count for c in report.classes) == sum(len(v) for v in completions.values())


def test_suppressed_starter_fails_pair_check(ctx3):
    starters, completions, report = run_pipeline(ctx3)
    for k in completions:
        partial = dict(completions)
        partial[k] = set()
        if not completions[k]:
            continue
        pairs = pair_consistency_check(ctx3.geom, ctx3.ext, report.classes, starters, partial)
        assert not pairs.ok


def test_dedupe_is_order_independent(ctx3):
    spreads = spreads_from_scratch(ctx3.geom)
    rng = random.Random(1)
    a, b = Deduper(ctx3.ext), Deduper(ctx3.ext)
    sample = rng.sample(spreads, 60)
    for s in sample:
        a.add(s)
    half = len(sample) // 2
    other = Deduper(ctx3.ext)
    for s in reversed(sample[:half]):
        b.add(s)
    for s in sample[half:]:
        other.add(s)
    b.merge(other)
    assert [(c.canonical, c.count) for c in a.classes()] == [(c.canonical, c.count) for c in b.classes()]


def test_duality_image_is_other_class_member(ctx3):
    """When a class is one PGammaL class, S and its dual image are PGammaL-equivalent."""
    from pg3spreads.perm import in_same_orbit

    _, _, report = run_pipeline(ctx3)
    for c in report.classes:
        dual = set_image(ctx3.duality, c.canonical)
        assert in_same_orbit(ctx3.pgl, c.canonical, dual) == (c.split == ONE_CLASS)


def test_group_order_table_counts_two_class_twice():
    one = SpreadClass((0,), aut_order=20, pgl_order=10)
    two = SpreadClass((1,), aut_order=10, pgl_order=10)
    rows = group_order_table([one, two])
    assert rows == [(10, 1, 2, 3)]
    assert format_table(rows)[1].split() == ["10", "1", "2", "3"]
