"""Permutation groups on line ids: stabilizer chains, set stabilizers, minimal images.

Permutations are numpy int arrays ``img`` with ``img[x]`` the image of x;
``a`` then ``b`` is ``b[a]``. Stabilizer chains keep Schreier trees as one
generator label per point, so coset representatives are never stored whole;
walking a point back to the root applies inverse generators, which is all
the set-image algorithms need.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

IDX = np.int32
OUTSIDE = -2
ROOT = -1


def identity(n: int) -> np.ndarray:
    return np.arange(n, dtype=IDX)


def inverse(a: np.ndarray) -> np.ndarray:
    inv = np.empty_like(a)
    inv[a] = np.arange(len(a), dtype=a.dtype)
    return inv


def then(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """The permutation doing ``a`` first, then ``b``."""
    return b[a]


def is_identity(a: np.ndarray) -> bool:
    return bool((a == np.arange(len(a))).all())


def check_perm(a: np.ndarray, n: int | None = None) -> None:
    n = len(a) if n is None else n
    if len(a) != n or not np.array_equal(np.sort(a), np.arange(n)):
        raise ValueError("not a permutation of degree %d" % n)


def orbit_mins(n: int, gens: Sequence[np.ndarray]) -> np.ndarray:
    """For every point, the smallest point of its orbit under ``gens``."""
    m = np.arange(n, dtype=IDX)
    if not gens:
        return m
    invs = [inverse(g) for g in gens]
    while True:
        old = m
        for g, h in zip(gens, invs):
            m = np.minimum(m, m[g])
            m = np.minimum(m, m[h])
        m = m[m]
        if np.array_equal(m, old):
            return m


def schreier_tree(gens: Sequence[np.ndarray], root: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Breadth-first Schreier tree: (label, orbit).

    ``label[x]`` is the index of the generator that reached x, ROOT at the
    root and OUTSIDE off the orbit; the parent of x is ``inv_gens[label[x]][x]``.
    """
    label = np.full(n, OUTSIDE, dtype=IDX)
    label[root] = ROOT
    frontier = np.array([root], dtype=IDX)
    layers = [frontier]
    while frontier.size:
        found = []
        for gi, g in enumerate(gens):
            img = g[frontier]
            img = img[label[img] == OUTSIDE]
            if img.size:
                img = np.unique(img)
                label[img] = gi
                found.append(img)
        frontier = np.concatenate(found) if found else np.empty(0, dtype=IDX)
        layers.append(frontier)
    return label, np.concatenate(layers)


@dataclass
class Level:
    base: int
    gens: list[np.ndarray]
    inv: list[np.ndarray]
    label: np.ndarray
    orbit: np.ndarray

    @classmethod
    def make(cls, base: int, gens: list[np.ndarray], n: int, inv: list[np.ndarray] | None = None) -> "Level":
        inv = [inverse(g) for g in gens] if inv is None else inv
        label, orbit = schreier_tree(gens, base, n)
        return cls(base, gens, inv, label, orbit)

    def add_gen(self, g: np.ndarray, n: int) -> None:
        self.gens.append(g)
        self.inv.append(inverse(g))
        self.label, self.orbit = schreier_tree(self.gens, self.base, n)

    @property
    def size(self) -> int:
        return len(self.orbit)

    def to_root(self, x: int) -> np.ndarray:
        """Permutation mapping x to the base point (inverse coset representative)."""
        w = np.arange(len(self.label), dtype=IDX)
        while x != self.base:
            h = self.inv[self.label[x]]
            w = h[w]
            x = int(h[x])
        return w

    def rep(self, x: int) -> np.ndarray:
        """Coset representative mapping the base point to x."""
        return inverse(self.to_root(x))

    def conjugate(self, u: np.ndarray, uinv: np.ndarray) -> "Level":
        gens = [u[g[uinv]] for g in self.gens]
        inv = [u[g[uinv]] for g in self.inv]
        return Level(int(u[self.base]), gens, inv, self.label[uinv], u[self.orbit])


def sift(levels: Sequence[Level], g: np.ndarray, start: int = 0) -> tuple[np.ndarray, int]:
    for i in range(start, len(levels)):
        lv = levels[i]
        x = int(g[lv.base])
        if lv.label[x] == OUTSIDE:
            return g, i
        while x != lv.base:
            h = lv.inv[lv.label[x]]
            g = h[g]
            x = int(h[x])
    return g, len(levels)


def _chain_order(levels: Sequence[Level]) -> int:
    out = 1
    for lv in levels:
        out *= lv.size
    return out


class ProductReplacement:
    """Pseudo-random group elements from generators (product replacement)."""

    def __init__(self, gens: Sequence[np.ndarray], n: int, rng: random.Random, slots: int = 10, warmup: int = 60):
        self.rng = rng
        base = list(gens) or [identity(n)]
        self.state = [base[i % len(base)].copy() for i in range(max(slots, len(base)))]
        self.acc = identity(n)
        for _ in range(warmup):
            self()

    def __call__(self) -> np.ndarray:
        s = self.state
        i, j = self.rng.sample(range(len(s)), 2)
        if self.rng.random() < 0.5:
            s[i] = then(s[i], s[j])
        else:
            s[i] = then(s[j], s[i])
        self.acc = then(self.acc, s[i])
        return self.acc


def random_schreier_sims(
    n: int,
    random_element: Callable[[], np.ndarray],
    order: int | None,
    base: Sequence[int] = (),
    stop_after: int = 40,
) -> list[Level]:
    """Stabilizer chain from random elements.

    With ``order`` given the loop stops when the chain accounts for every
    element, which makes the result exact. Without it, it stops after
    ``stop_after`` consecutive elements sift to the identity.
    """
    levels = [Level.make(int(b), [], n) for b in base]
    have = 1
    quiet = 0
    while (order is not None and have < order) or (order is None and quiet < stop_after):
        h, j = sift(levels, random_element())
        if j == len(levels):
            moved = np.flatnonzero(h != np.arange(n))
            if not moved.size:
                quiet += 1
                continue
            levels.append(Level.make(int(moved[0]), [], n))
        quiet = 0
        for lv in levels[: j + 1]:
            lv.add_gen(h, n)
        have = _chain_order(levels)
        if order is not None and have > order:
            raise ArithmeticError("chain order %d exceeds the stated group order %d" % (have, order))
    return _trim(levels)


def _trim(levels: list[Level]) -> list[Level]:
    # drop trailing trivial levels; keep interior ones (they are prescribed base points)
    while levels and levels[-1].size == 1:
        levels.pop()
    return levels


def deterministic_schreier_sims(n: int, gens: Sequence[np.ndarray], base: Sequence[int] = ()) -> list[Level]:
    """Exact Schreier-Sims: every Schreier generator is sifted."""
    gens = [g for g in gens if not is_identity(g)]
    levels = [Level.make(int(b), [], n) for b in base]
    for g in gens:
        if all(g[lv.base] == lv.base for lv in levels):
            moved = np.flatnonzero(g != np.arange(n))
            levels.append(Level.make(int(moved[0]), [], n))
    for g in gens:
        for lv in levels:
            lv.gens.append(g)
            lv.inv.append(inverse(g))
            if g[lv.base] != lv.base:
                break
    for lv in levels:
        lv.label, lv.orbit = schreier_tree(lv.gens, lv.base, n)

    i = len(levels) - 1
    while i >= 0:
        lv = levels[i]
        restart = None
        reps = {}
        for x in lv.orbit.tolist():
            ux = reps.get(x)
            if ux is None:
                ux = reps[x] = lv.rep(x)
            for s in lv.gens:
                y = int(s[x])
                h = then(then(ux, s), lv.to_root(y))
                res, j = sift(levels, h, i + 1)
                if is_identity(res):
                    continue
                if j == len(levels):
                    moved = np.flatnonzero(res != np.arange(n))
                    levels.append(Level.make(int(moved[0]), [], n))
                for l in range(i + 1, j + 1):
                    levels[l].add_gen(res, n)
                restart = j
                break
            if restart is not None:
                break
        i = restart if restart is not None else i - 1
    return _trim(levels)


class PermGroup:
    """A permutation group with exact order and a lazily built stabilizer chain.

    Stabilizers of single points are cached as child groups, so repeated
    minimal-image and stabilizer queries along similar prefixes reuse work.
    """

    def __init__(
        self,
        gens: Iterable[np.ndarray],
        degree: int | None = None,
        order: int | None = None,
        *,
        seed: int = 0,
        levels: list[Level] | None = None,
    ):
        gens = [np.asarray(g, dtype=IDX) for g in gens]
        if degree is None:
            if not gens:
                raise ValueError("degree needed for a group without generators")
            degree = len(gens[0])
        for g in gens:
            if len(g) != degree:
                raise ValueError("generators of unequal degree")
        self.degree = degree
        self.gens = [g for g in gens if not is_identity(g)]
        self._inv: list[np.ndarray] | None = None
        self._seed = seed
        self._levels = levels
        self._order = order
        self._children: dict[int, PermGroup] = {}
        self._trees: dict[int, np.ndarray] = {}
        self._omin: np.ndarray | None = None
        if levels is not None and order is None:
            self._order = _chain_order(levels)

    # -- basic data -------------------------------------------------------
    @property
    def inv_gens(self) -> list[np.ndarray]:
        if self._inv is None:
            self._inv = [inverse(g) for g in self.gens]
        return self._inv

    @property
    def levels(self) -> list[Level]:
        if self._levels is None:
            if self._order is None:
                self._levels = deterministic_schreier_sims(self.degree, self.gens)
                self._order = _chain_order(self._levels)
            elif self._order == 1:
                self._levels = []
            else:
                rng = random.Random(self._seed)
                pr = ProductReplacement(self.gens, self.degree, rng)
                self._levels = random_schreier_sims(self.degree, pr, self._order)
        return self._levels

    @property
    def order(self) -> int:
        if self._order is None:
            self.levels
        return self._order  # type: ignore[return-value]

    @property
    def base(self) -> list[int]:
        return [lv.base for lv in self.levels]

    def is_trivial(self) -> bool:
        return not self.gens

    def contains(self, g: np.ndarray) -> bool:
        g = np.asarray(g, dtype=IDX)
        if len(g) != self.degree:
            return False
        res, j = sift(self.levels, g)
        return j == len(self.levels) and is_identity(res)

    def random_element(self, rng: random.Random) -> np.ndarray:
        """Uniformly random element, built from random coset representatives."""
        g = identity(self.degree)
        for lv in reversed(self.levels):
            x = int(lv.orbit[rng.randrange(lv.size)])
            g = then(g, lv.rep(x))
        return g

    # -- orbits -----------------------------------------------------------
    def orbit_mins(self) -> np.ndarray:
        if self._omin is None:
            self._omin = orbit_mins(self.degree, self.gens)
        return self._omin

    def orbits(self) -> list[np.ndarray]:
        om = self.orbit_mins()
        order = np.argsort(om, kind="stable")
        cuts = np.flatnonzero(np.diff(om[order])) + 1
        return np.split(order.astype(IDX), cuts)

    def orbit(self, point: int) -> np.ndarray:
        om = self.orbit_mins()
        return np.flatnonzero(om == om[point]).astype(IDX)

    def tree(self, root: int) -> np.ndarray:
        """Schreier tree labels rooted at ``root`` over this group's generators."""
        t = self._trees.get(root)
        if t is None:
            t, _ = schreier_tree(self.gens, root, self.degree)
            self._trees[root] = t
        return t

    def element_to(self, x: int, root: int) -> np.ndarray:
        """An element mapping x to ``root``; x must lie in root's orbit."""
        label = self.tree(root)
        if label[x] == OUTSIDE:
            raise ValueError("%d is not in the orbit of %d" % (x, root))
        w = identity(self.degree)
        inv = self.inv_gens
        while x != root:
            h = inv[label[x]]
            w = h[w]
            x = int(h[x])
        return w

    # -- stabilizers ------------------------------------------------------
    def stabilizer(self, point: int) -> "PermGroup":
        point = int(point)
        child = self._children.get(point)
        if child is not None:
            return child
        if self.orbit_mins()[point] == point and len(self.orbit(point)) == 1:
            child = self
        else:
            levels = self.levels
            lv0 = levels[0]
            if lv0.base == point:
                child = self._tail(levels[1:])
            elif lv0.label[point] != OUTSIDE:
                u = lv0.rep(point)
                uinv = inverse(u)
                child = self._tail([lv.conjugate(u, uinv) for lv in levels[1:]])
            else:
                rng = random.Random(self._seed + point + 1)
                new = random_schreier_sims(self.degree, lambda: self.random_element(rng), self.order, base=(point,))
                self._levels = new
                child = self._tail(new[1:])
        self._children[point] = child
        return child

    def _tail(self, levels: list[Level]) -> "PermGroup":
        if not levels:
            return PermGroup([], self.degree, 1)
        return PermGroup(levels[0].gens, self.degree, _chain_order(levels), seed=self._seed, levels=list(levels))

    def pointwise_stabilizer(self, points: Iterable[int]) -> "PermGroup":
        g = self
        for p in points:
            g = g.stabilizer(p)
        return g

    def clear_cache(self) -> None:
        self._children.clear()
        self._trees.clear()

    def __repr__(self) -> str:
        return "PermGroup(degree=%d, order=%s, gens=%d)" % (self.degree, self._order, len(self.gens))


def schreier_sims(gens: Sequence[np.ndarray], degree: int | None = None, order: int | None = None, seed: int = 0) -> PermGroup:
    """Group with a computed stabilizer chain.

    ``order`` is the known group order; without it the chain is computed
    by exact Schreier-Sims and the order read off the chain.
    """
    g = PermGroup(gens, degree, order, seed=seed)
    g.levels
    return g


def estimate_order(gens: Sequence[np.ndarray], degree: int | None = None, seed: int = 0, stop_after: int = 40) -> int:
    """Order from random Schreier-Sims without a target; a lower bound that is exact with high probability."""
    gens = [np.asarray(g, dtype=IDX) for g in gens]
    n = len(gens[0]) if degree is None else degree
    rng = random.Random(seed)
    pr = ProductReplacement(gens, n, rng)
    return _chain_order(random_schreier_sims(n, pr, None, stop_after=stop_after))


# -- set images ----------------------------------------------------------------


def _walk_to_root(
    rows: np.ndarray, x: np.ndarray, root: int, label: np.ndarray, inv: Sequence[np.ndarray]
) -> np.ndarray:
    """Apply, row by row, the tree path taking x[r] to ``root`` to every entry of rows[r]."""
    rows = rows.copy()
    x = x.copy()
    active = np.flatnonzero(x != root)
    while active.size:
        lab = label[x[active]]
        for gi in np.unique(lab):
            sel = active[lab == gi]
            h = inv[gi]
            rows[sel] = h[rows[sel]]
            x[sel] = h[x[sel]]
        active = active[x[active] != root]
    return rows


_HASH_WEIGHTS = np.random.default_rng(0x5eed).integers(1, 2**63, size=4096, dtype=np.uint64) | np.uint64(1)


def _first_distinct(rows: np.ndarray) -> np.ndarray:
    """Indices of the first occurrence of each distinct row, in increasing order.

    Rows are bucketed by a 64-bit hash; the buckets are then checked for
    equality so a collision only costs a slower exact pass.
    """
    if len(rows) < 2:
        return np.arange(len(rows))
    w = _HASH_WEIGHTS[: rows.shape[1]]
    with np.errstate(over="ignore"):
        h = (rows.astype(np.uint64) * w).sum(axis=1)
    _, first, inv = np.unique(h, return_index=True, return_inverse=True)
    if not (rows == rows[first[inv]]).all():
        _, first = np.unique(rows, axis=0, return_index=True)
    return np.sort(first)


def minimal_image(group: PermGroup, points: Iterable[int], carry: Iterable[int] | None = None):
    """Lexicographically least image of a set under ``group``.

    Returns the sorted image as a tuple. With ``carry`` the function also
    returns the images of the carried points under one element realising
    the minimum, as a second tuple.
    """
    pts = sorted(set(int(p) for p in points))
    k = len(pts)
    extra = [] if carry is None else [int(c) for c in carry]
    rows = np.array([pts + extra], dtype=IDX)
    node = group
    for j in range(k):
        if node.is_trivial():
            break
        om = node.orbit_mins()
        tails = rows[:, j:k]
        vals = om[tails]
        m = int(vals.min())
        r_idx, c_idx = np.nonzero(vals == m)
        src = tails[r_idx, c_idx]
        new = rows[r_idx]
        new = _walk_to_root(new, src, m, node.tree(m), node.inv_gens)
        head = np.sort(new[:, :k], axis=1)
        new[:, :k] = head
        rows = new[_first_distinct(head)]
        node = node.stabilizer(m)
    if len(rows) > 1:
        head = rows[:, :k]
        best = np.lexsort(head.T[::-1])[0]
        rows = rows[best : best + 1]
    image = tuple(int(v) for v in rows[0, :k])
    if carry is None:
        return image
    return image, tuple(int(v) for v in rows[0, k:])


def set_image(g: np.ndarray, points: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(int(g[p]) for p in points))


# -- set stabilizer --------------------------------------------------------------


@dataclass
class _StabSearch:
    S: np.ndarray  # sorted target set
    base: list[int]
    nodes: list[PermGroup]  # nodes[i] fixes base[:i]
    trees: list[np.ndarray]
    profiles: list[np.ndarray]  # sorted orbit ids of S under nodes[i]
    omins: list[np.ndarray]
    visited: int = 0

    def pull(self, i: int, Sw: np.ndarray, delta: int) -> np.ndarray:
        node = self.nodes[i]
        out = _walk_to_root(Sw[None, :], np.array([delta], dtype=IDX), self.base[i], self.trees[i], node.inv_gens)[0]
        return np.sort(out)

    def consistent(self, i: int, Sw: np.ndarray) -> bool:
        if i == len(self.base):
            return np.array_equal(Sw, self.S)
        return np.array_equal(np.sort(self.omins[i][Sw]), self.profiles[i])

    def dfs(self, i: int, Sw: np.ndarray, path: list[int]) -> list[int] | None:
        self.visited += 1
        if i == len(self.base):
            return list(path)
        label = self.trees[i]
        for delta in Sw[label[Sw] != OUTSIDE].tolist():
            nxt = self.pull(i, Sw, delta)
            if not self.consistent(i + 1, nxt):
                continue
            path.append(delta)
            found = self.dfs(i + 1, nxt, path)
            path.pop()
            if found is not None:
                return found
        return None

    def element(self, start: int, path: list[int]) -> np.ndarray:
        n = self.nodes[0].degree
        winv = identity(n)
        for i, delta in zip(range(start, len(self.base)), path):
            winv = then(winv, self.nodes[i].element_to(delta, self.base[i]))
        return inverse(winv)


def setwise_stabilizer(group: PermGroup, points: Iterable[int]) -> PermGroup:
    """Stabilizer of a set of points, by backtrack over a base inside the set."""
    S = np.array(sorted(set(int(p) for p in points)), dtype=IDX)
    n = group.degree
    if len(S) in (0, n):
        return group
    base: list[int] = []
    nodes = [group]
    node = group
    while True:
        om = node.orbit_mins()
        sizes = np.bincount(om, minlength=n)
        moving = S[sizes[om[S]] > 1]
        if not moving.size:
            break
        best = moving[np.argmax(sizes[om[moving]])]  # argmax keeps the smallest id on ties
        base.append(int(best))
        node = node.stabilizer(int(best))
        nodes.append(node)
    k = len(base)
    P = nodes[k]
    trees = [nodes[i].tree(base[i]) for i in range(k)]
    omins = [nd.orbit_mins() for nd in nodes]
    profiles = [np.sort(om[S]) for om in omins]
    search = _StabSearch(S, base, nodes, trees, profiles, omins)

    found: dict[int, list[np.ndarray]] = {i: [] for i in range(k)}
    orbit_len = [1] * k
    for i in range(k - 1, -1, -1):
        kgens = list(P.gens) + [g for s in range(i, k) for g in found[s]]
        om = orbit_mins(n, kgens)
        tested = [base[i]]
        label = trees[i]
        cands = S[label[S] != OUTSIDE].tolist()
        for delta in cands:
            if any(om[delta] == om[t] for t in tested):
                continue
            tested.append(delta)
            Sw = search.pull(i, S, delta)
            if not search.consistent(i + 1, Sw):
                continue
            path = search.dfs(i + 1, Sw, [delta])
            if path is None:
                continue
            g = search.element(i, path)
            found[i].append(g)
            kgens.append(g)
            om = orbit_mins(n, kgens)
        orbit_len[i] = int((om == om[base[i]]).sum())
    order = P.order
    for length in orbit_len:
        order *= length
    gens = list(P.gens) + [g for i in range(k) for g in found[i]]
    return PermGroup(gens, n, order)


def in_same_orbit(group: PermGroup, a: Iterable[int], b: Iterable[int]) -> bool:
    return minimal_image(group, a) == minimal_image(group, b)
