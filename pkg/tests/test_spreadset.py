from __future__ import annotations

import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pg3spreads.geometry import build_geometry
from pg3spreads.gf import GF
from pg3spreads.perm import minimal_image, set_image
from pg3spreads.search import is_spread, spreads_from_scratch
from pg3spreads.spreadset import (
    SpreadSet,
    SpreadSetError,
    check_spread_set,
    decode_line,
    encode_line,
    from_spread_set,
    read_spread_sets,
    regular_spread_set,
    to_spread_set,
    transpose_set,
    write_spread_sets,
)


def singular(F, m):
    a, b, c, d = m
    return F.sub(F.mul(a, d), F.mul(b, c)) == 0


def brute_check(ss):
    F = ss.field
    for i, x in enumerate(ss.mats):
        for y in ss.mats[i + 1 :]:
            if singular(F, tuple(F.sub(u, v) for u, v in zip(x, y))):
                return False
    return (0, 0, 0, 0) in ss.mats and len(ss.mats) == F.q**2


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
def test_regular_set_is_valid(q):
    ss = regular_spread_set(GF(q))
    assert brute_check(ss)
    assert len(encode_line(ss)) == 4 * q * q


def test_q8_line_length_and_round_trip():
    F = GF(8)
    ss = regular_spread_set(F)
    line = encode_line(ss)
    assert len(line) == 256
    assert encode_line(decode_line(line + "\n", F)) == line
    assert transpose_set(transpose_set(ss)) == ss


@pytest.mark.parametrize("q", [2, 3])
def test_every_spread_gives_a_valid_set(q):
    geom = build_geometry(q)
    for spread in spreads_from_scratch(geom)[:: max(1, q * 40)]:
        ss = to_spread_set(geom, spread)
        assert brute_check(ss)
        assert is_spread(geom, from_spread_set(geom, ss))
        assert brute_check(transpose_set(ss))


def test_round_trip_stays_in_class(ctx3):
    rng = random.Random(2)
    spreads = spreads_from_scratch(ctx3.geom)
    for s in rng.sample(spreads, 15):
        back = from_spread_set(ctx3.geom, to_spread_set(ctx3.geom, s))
        assert minimal_image(ctx3.pgl, back) == minimal_image(ctx3.pgl, s)


def test_set_of_canonical_representative_depends_only_on_class(ctx4):
    """The pipeline encodes the minimal image, so every member of a class yields one line."""
    geom = ctx4.geom
    s = from_spread_set(geom, regular_spread_set(geom.field))
    want = encode_line(to_spread_set(geom, minimal_image(ctx4.pgl, s)))
    rng = random.Random(4)
    for _ in range(5):
        g = ctx4.pgl.random_element(rng)
        img = set_image(g, s)
        assert encode_line(to_spread_set(geom, minimal_image(ctx4.pgl, img))) == want


def test_regular_set_is_a_field(ctx4):
    """The regular spread set is closed under matrix sum and product."""
    F = ctx4.geom.field
    ss = to_spread_set(ctx4.geom, from_spread_set(ctx4.geom, regular_spread_set(F)))
    mats = set(ss.mats)
    for x in mats:
        for y in mats:
            a, b, c, d = x
            e, f, g, h = y
            assert tuple(F.add(u, v) for u, v in zip(x, y)) in mats
            prod = (
                F.add(F.mul(a, e), F.mul(b, g)),
                F.add(F.mul(a, f), F.mul(b, h)),
                F.add(F.mul(c, e), F.mul(d, g)),
                F.add(F.mul(c, f), F.mul(d, h)),
            )
            assert prod in mats


def test_invalid_sets_are_named():
    F = GF(3)
    mats = list(regular_spread_set(F).mats)
    mats[-1] = (0, 0, 0, 1)
    with pytest.raises(SpreadSetError) as err:
        SpreadSet.from_matrices(F, mats)
    i, j = err.value.pair
    assert singular(F, tuple(F.sub(u, v) for u, v in zip(sorted_mats(F, mats)[i], sorted_mats(F, mats)[j])))
    with pytest.raises(SpreadSetError):
        SpreadSet.from_matrices(F, mats[:-1])


def sorted_mats(F, mats):
    return SpreadSet.from_matrices(F, mats, check=False).mats


def test_file_reader_reports_line_numbers():
    F = GF(2)
    good = encode_line(regular_spread_set(F))
    text = good + "\n\n" + good[:-1] + "\n" + good + "\n"
    out = list(read_spread_sets(io.StringIO(text), F))
    assert [n for n, _ in out] == [1, 3, 4]
    assert isinstance(out[1][1], SpreadSetError)
    assert isinstance(out[2][1], SpreadSet)
    buf = io.StringIO()
    write_spread_sets(buf, [out[0][1]])
    assert buf.getvalue() == good + "\n"


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.data())
def test_transpose_involution(q, data):
    F = GF(q)
    ss = regular_spread_set(F)
    # the involution holds for arbitrary matrix lists, valid or not
    mats = [tuple(data.draw(st.integers(0, q - 1)) for _ in range(4)) for _ in range(q * q)]
    rnd = SpreadSet.from_matrices(F, mats, check=False)
    assert transpose_set(transpose_set(rnd)) == rnd
    assert transpose_set(transpose_set(ss)) == ss
    check_spread_set(transpose_set(ss))
