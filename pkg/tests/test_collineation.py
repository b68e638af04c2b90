from __future__ import annotations

import random

import numpy as np
import pytest

from pg3spreads.collineation import (
    Collineation,
    duality_element,
    fmat_inv,
    fmatmul,
    identity_matrix,
    pgammal_collineations,
    pgammal_generators,
    pgammal_order,
)
from pg3spreads.geometry import build_geometry
from pg3spreads.gf import GF
from pg3spreads.perm import deterministic_schreier_sims, then


def preserves_gamma(geom, perm):
    for i in range(geom.n_lines):
        img = 0
        for j in range(geom.n_lines):
            if geom.gamma[i] >> j & 1:
                img |= 1 << int(perm[j])
        if img != geom.gamma[int(perm[i])]:
            return False
    return True


def test_order_formula_small_values():
    # |PGL(4,2)| = |A8| = 20160
    assert pgammal_order(2) == 20160
    assert pgammal_order(4) == 2 * 987033600


@pytest.mark.parametrize("q", [2, 3, 4])
def test_generators_generate_full_group(q):
    """Exact Schreier-Sims (no known order) reproduces the order formula."""
    geom = build_geometry(q)
    gens = pgammal_generators(geom)
    chain = deterministic_schreier_sims(geom.n_lines, gens)
    assert np.prod([l.size for l in chain], dtype=object) == pgammal_order(q)
    chain = deterministic_schreier_sims(geom.n_lines, gens + [duality_element(geom)])
    assert np.prod([l.size for l in chain], dtype=object) == 2 * pgammal_order(q)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_generators_are_automorphisms_of_gamma(q):
    geom = build_geometry(q)
    for g in pgammal_generators(geom) + [duality_element(geom)]:
        assert preserves_gamma(geom, g)


def test_duality_swaps_pencils_and_planes():
    geom = build_geometry(3)
    d = duality_element(geom)
    assert then(d, d).tolist() == list(range(geom.n_lines))
    pencil = geom.pencils[0].tolist()
    image = {int(d[l]) for l in pencil}
    # the image is a clique of the same size, but not a pencil: no point is on all its lines
    common = (1 << geom.n_points) - 1
    for l in image:
        common &= geom.line_masks[l]
    assert common == 0


@pytest.mark.parametrize("q", [4, 9])
def test_then_matches_permutation_composition(q):
    geom = build_geometry(q)
    F = geom.field
    rng = random.Random(q)
    cols = pgammal_collineations(F) + [Collineation(identity_matrix(), 0, True)]
    for _ in range(10):
        a, b = rng.choice(cols), rng.choice(cols)
        ab = a.then(b, F)
        assert ab.line_perm(geom).tolist() == then(a.line_perm(geom), b.line_perm(geom)).tolist()


def test_matrix_inverse():
    F = GF(5)
    rng = np.random.default_rng(1)
    found = 0
    while found < 10:
        M = rng.integers(0, 5, size=(4, 4))
        try:
            Mi = fmat_inv(F, M)
        except ZeroDivisionError:
            continue
        assert fmatmul(F, M, Mi).tolist() == identity_matrix().tolist()
        found += 1
