"""Table-driven arithmetic in GF(q) for q = p^e <= 9.

Elements are plain ints in the exponential encoding: 0 is zero and j > 0
stands for x^(j-1), x a fixed primitive element. This is also the digit a
field element gets in a spread-set file, so encoding is just ``str(idx)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SUPPORTED_ORDERS = (2, 3, 4, 5, 7, 8, 9)

# Monic primitive polynomials, coefficients from the leading term down.
# For prime fields the entry is x - g with g the smallest primitive root.
PRIMITIVE_POLYS: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 1): (1, 1),  # x + 1, g = 1
    (3, 1): (1, 1),  # x - 2, g = 2
    (5, 1): (1, 3),  # x - 2, g = 2
    (7, 1): (1, 4),  # x - 3, g = 3
    (2, 2): (1, 1, 1),  # x^2 + x + 1
    (2, 3): (1, 0, 1, 1),  # x^3 + x + 1
    (3, 2): (1, 1, 2),  # x^2 + x + 2
}


class FieldError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


def _power_codes(p: int, e: int, poly: tuple[int, ...]) -> list[int]:
    """Codes (base-p digit vectors, low degree first) of x^0, x^1, ..., x^(q-2)."""
    q = p**e
    if e == 1:
        g = (-poly[1]) % p
        return [pow(g, k, p) for k in range(q - 1)]
    # reduce x^e = -(poly[1] x^(e-1) + ... + poly[e])
    tail = [(-c) % p for c in reversed(poly[1:])]  # coefficients of x^0..x^(e-1)
    vec = [1] + [0] * (e - 1)
    codes = []
    for _ in range(q - 1):
        codes.append(sum(c * p**i for i, c in enumerate(vec)))
        top = vec[-1]
        vec = [0] + vec[:-1]
        vec = [(v + top * t) % p for v, t in zip(vec, tail)]
    return codes


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """GF(p^e) with precomputed operation tables over the exponential encoding."""

    p: int
    e: int
    prim_poly: tuple[int, ...]
    add_table: np.ndarray = field(repr=False)
    mul_table: np.ndarray = field(repr=False)
    neg_table: np.ndarray = field(repr=False)
    inv_table: np.ndarray = field(repr=False)
    # element idx -> base-p coefficient code, and back
    to_code: np.ndarray = field(repr=False)
    from_code: np.ndarray = field(repr=False)

    @property
    def q(self) -> int:
        return self.p**self.e

    @property
    def elements(self) -> range:
        return range(self.q)

    @property
    def primitive(self) -> int:
        return 2 if self.q > 2 else 1

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(%d)" % self.q)
        return int(self.inv_table[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def power(self, a: int, k: int) -> int:
        if a == 0:
            return 1 if k == 0 else 0
        return (a - 1) * k % (self.q - 1) + 1

    def frobenius(self, a: int, k: int = 1) -> int:
        """a^(p^k)."""
        if not 0 <= k < self.e:
            raise FieldError("Frobenius exponent %d outside [0, %d)" % (k, self.e))
        return self.power(a, self.p**k)

    def frobenius_table(self, k: int) -> np.ndarray:
        return np.array([self.frobenius(a, k) for a in self.elements], dtype=np.int64)

    def encode_char(self, a: int) -> str:
        if not 0 <= a < self.q:
            raise FieldError("%r is not an element of GF(%d)" % (a, self.q))
        return str(a)

    def decode_char(self, c: str) -> int:
        if len(c) != 1 or not c.isdigit() or int(c) >= self.q:
            raise FieldError("character %r out of range for GF(%d)" % (c, self.q))
        return int(c)

    def __repr__(self) -> str:
        return "GF(%d)" % self.q


def field_new(p: int, e: int = 1, prim_poly: tuple[int, ...] | None = None) -> FieldSpec:
    """Build GF(p^e). ``prim_poly`` overrides the built-in polynomial and is validated."""
    if not _is_prime(p) or e < 1 or p**e > 9:
        raise FieldError("unsupported field order %d^%d" % (p, e))
    if prim_poly is None:
        prim_poly = PRIMITIVE_POLYS[(p, e)]
    prim_poly = tuple(int(c) % p for c in prim_poly)
    if len(prim_poly) != e + 1 or prim_poly[0] != 1:
        raise FieldError("polynomial must be monic of degree %d" % e)
    q = p**e
    codes = _power_codes(p, e, prim_poly)
    if len(set(codes)) != q - 1 or 0 in codes:
        raise FieldError("polynomial %r is not primitive over GF(%d)" % (prim_poly, p))

    to_code = np.array([0] + codes, dtype=np.int64)
    from_code = np.zeros(q, dtype=np.int64)
    from_code[to_code] = np.arange(q)

    def code_add(a: int, b: int) -> int:
        out = 0
        for i in range(e):
            out += ((a // p**i + b // p**i) % p) * p**i
        return out

    add = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(q):
            add[a, b] = from_code[code_add(int(to_code[a]), int(to_code[b]))]
    mul = np.zeros((q, q), dtype=np.int64)
    for a in range(1, q):
        for b in range(1, q):
            mul[a, b] = (a - 1 + b - 1) % (q - 1) + 1
    neg = np.array([int(np.flatnonzero(add[a] == 0)[0]) for a in range(q)], dtype=np.int64)
    inv = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        inv[a] = (-(a - 1)) % (q - 1) + 1
    for t in (add, mul, neg, inv, to_code, from_code):
        t.setflags(write=False)
    return FieldSpec(p, e, prim_poly, add, mul, neg, inv, to_code, from_code)


_FACTORS = {2: (2, 1), 3: (3, 1), 4: (2, 2), 5: (5, 1), 7: (7, 1), 8: (2, 3), 9: (3, 2)}


@lru_cache(maxsize=None)
def GF(q: int) -> FieldSpec:
    if q not in _FACTORS:
        raise FieldError("unsupported field order %d" % q)
    return field_new(*_FACTORS[q])
