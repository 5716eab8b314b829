"""Arithmetic in GF(2^v) through log/antilog tables."""

from __future__ import annotations

import numpy as np

# One primitive polynomial per degree, bit i = coefficient of x^i.
PRIMITIVE_POLYS = {
    2: 0x7,        # x^2 + x + 1
    3: 0xB,        # x^3 + x + 1
    4: 0x13,       # x^4 + x + 1
    5: 0x25,       # x^5 + x^2 + 1
    6: 0x43,       # x^6 + x + 1
    7: 0x89,       # x^7 + x^3 + 1
    8: 0x11D,      # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,      # x^9 + x^4 + 1
    10: 0x409,     # x^10 + x^3 + 1
    11: 0x805,     # x^11 + x^2 + 1
    12: 0x1053,    # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,    # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,    # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,    # x^15 + x + 1
    16: 0x1100B,   # x^16 + x^12 + x^3 + x + 1
}


class FieldError(ValueError):
    pass


class GaloisField:
    """GF(2^v) with elements stored as integers in ``[0, 2^v)``.

    ``exp`` has length ``2 * order`` so that a product of two nonzero
    elements can be looked up as ``exp[log[a] + log[b]]`` without a
    modulo. ``log[0]`` is set to ``-1`` and must never be used.
    """

    def __init__(self, v: int, primitive_poly: int | None = None):
        if not 2 <= v <= 16:
            raise FieldError(f"unsupported field degree v={v}")
        poly = PRIMITIVE_POLYS[v] if primitive_poly is None else int(primitive_poly)
        if poly >> v != 1:
            raise FieldError(f"polynomial {poly:#x} does not have degree {v}")
        self.v = v
        self.primitive_poly = poly
        self.size = 1 << v
        self.order = self.size - 1  # multiplicative order of alpha

        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.full(self.size, -1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            if log[x] != -1:
                raise FieldError(f"polynomial {poly:#x} is not primitive")
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.size:
                x ^= poly
        if x != 1:
            raise FieldError(f"polynomial {poly:#x} is not primitive")
        exp[self.order:] = exp[: self.order]
        exp.setflags(write=False)
        log.setflags(write=False)
        self.exp = exp
        self.log = log

    def __repr__(self) -> str:
        return f"GaloisField(v={self.v}, primitive_poly={self.primitive_poly:#x})"

    def alpha_pow(self, e: int) -> int:
        return int(self.exp[e % self.order])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^v)")
        return int(self.exp[(self.order - self.log[a]) % self.order])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e > 0 else 1
        return int(self.exp[(self.log[a] * e) % self.order])


_FIELDS: dict[tuple[int, int], GaloisField] = {}


def build_field(v: int, primitive_poly: int | None = None) -> GaloisField:
    """Return GF(2^v), cached per (v, polynomial); fields are immutable."""
    if not 2 <= v <= 16:
        raise FieldError(f"unsupported field degree v={v}")
    key = (v, PRIMITIVE_POLYS[v] if primitive_poly is None else int(primitive_poly))
    if key not in _FIELDS:
        _FIELDS[key] = GaloisField(v, key[1])
    return _FIELDS[key]
