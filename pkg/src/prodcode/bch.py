"""Shortened binary BCH component codes with bounded-distance decoding.

Bit ordering: position ``j`` of a word is the coefficient of ``x^j``. The
``n - k`` parity bits occupy positions ``0..n-k-1`` and the message the
high-order block ``n-k..n-1``. Shortening removes the ``s`` highest mother
positions ``n..2^v-2``, which are implicitly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .gf import GaloisField, build_field


class CodeError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class CodeParams:
    v: int
    t: int
    s: int = 0

    def __post_init__(self):
        if not 2 <= self.v <= 16:
            raise CodeError(f"field degree v={self.v} outside 2..16")
        if not 1 <= self.t <= 5:
            raise CodeError(f"error-correction capability t={self.t} outside 1..5")
        if self.s < 0:
            raise CodeError(f"shortening s={self.s} is negative")
        if self.k < 1:
            raise CodeError(f"{self} has dimension k={self.k} < 1")

    @property
    def mother_n(self) -> int:
        return (1 << self.v) - 1

    @property
    def n(self) -> int:
        return self.mother_n - self.s

    @property
    def k(self) -> int:
        """Nominal dimension 2^v - v*t - 1 - s."""
        return (1 << self.v) - self.v * self.t - 1 - self.s

    def __str__(self) -> str:
        return f"({self.v},{self.t},{self.s})"


def cyclotomic_coset(i: int, order: int) -> list[int]:
    coset = []
    j = i % order
    while j not in coset:
        coset.append(j)
        j = (2 * j) % order
    return coset


def minimal_polynomial(gf: GaloisField, i: int) -> int:
    """Minimal polynomial of alpha^i over GF(2), as an int bit pattern."""
    # Product of (x + alpha^j) over the coset, coefficients in GF(2^v).
    poly = [1]
    for j in cyclotomic_coset(i, gf.order):
        root = gf.alpha_pow(j)
        nxt = [0] * (len(poly) + 1)
        for d, c in enumerate(poly):
            nxt[d + 1] ^= c
            nxt[d] ^= gf.mul(c, root)
        poly = nxt
    if any(c not in (0, 1) for c in poly):
        raise CodeError(f"minimal polynomial of alpha^{i} is not binary")
    return sum(c << d for d, c in enumerate(poly))


def _gf2_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _gf2_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


@dataclass(frozen=True, eq=False)
class ComponentCode:
    params: CodeParams
    field: GaloisField
    generator: np.ndarray  # uint8 coefficients, lowest degree first
    n: int
    k: int
    parity_matrix: np.ndarray = field(repr=False)  # (k, n-k): row i = x^(n-k+i) mod g

    @property
    def mother_n(self) -> int:
        return self.field.order

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def redundancy(self) -> int:
        return self.n - self.k

    def syndromes(self, word) -> list[int]:
        """S_1..S_2t of a length-n word."""
        word = self._check(word)
        S = np.zeros(2 * self.t + 1, dtype=np.int64)
        _kernels._syndromes(word, self.field.exp, self.field.log, self.mother_n, self.t, S)
        return [int(s) for s in S[1:]]

    def is_codeword(self, word) -> bool:
        return not any(self.syndromes(word))

    def _check(self, word) -> np.ndarray:
        word = np.ascontiguousarray(word, dtype=np.uint8)
        if word.shape != (self.n,):
            raise CodeError(f"expected a word of length {self.n}, got shape {word.shape}")
        return word


def construct_bch(params: CodeParams, *, strict: bool = True,
                  primitive_poly: int | None = None) -> ComponentCode:
    """Build the (possibly shortened) narrow-sense BCH code for ``params``.

    The generator is the lcm of the minimal polynomials of alpha..alpha^2t.
    With ``strict`` (the default) its degree must equal ``v*t`` so that the
    realized dimension matches ``2^v - v*t - 1 - s``; small toy codes whose
    cyclotomic cosets collapse (e.g. the (15,5) code, degree 10) need
    ``strict=False`` and then take ``k = n - deg(g)``.
    """
    gf = build_field(params.v, primitive_poly)
    g = 1
    seen: set[int] = set()
    for i in range(1, 2 * params.t + 1):
        leader = min(cyclotomic_coset(i, gf.order))
        if leader in seen:
            continue
        seen.add(leader)
        g = _gf2_mul(g, minimal_polynomial(gf, i))
    deg = g.bit_length() - 1
    if strict and deg != params.v * params.t:
        raise CodeError(
            f"generator of {params} has degree {deg}, expected v*t={params.v * params.t}")
    n = params.n
    k = n - deg
    if k < 1:
        raise CodeError(f"{params} has realized dimension {k} < 1")
    gen = np.array([(g >> d) & 1 for d in range(deg + 1)], dtype=np.uint8)

    P = np.zeros((k, deg), dtype=np.uint8)
    r = _gf2_mod(1 << deg, g)  # x^deg mod g
    for i in range(k):
        P[i] = [(r >> d) & 1 for d in range(deg)]
        r <<= 1
        if r >> deg:
            r ^= g
    gen.setflags(write=False)
    P.setflags(write=False)
    return ComponentCode(params=params, field=gf, generator=gen, n=n, k=k, parity_matrix=P)


def encode(code: ComponentCode, message) -> np.ndarray:
    """Systematic encoding of one message (length k) or a stack (..., k)."""
    msg = np.asarray(message, dtype=np.uint8)
    if msg.shape[-1] != code.k:
        raise CodeError(f"message length {msg.shape[-1]} != k={code.k}")
    parity = (msg.astype(np.float64) @ code.parity_matrix.astype(np.float64)) % 2
    return np.concatenate([parity.astype(np.uint8), msg], axis=-1)


@dataclass(frozen=True, eq=False)
class BddOutcome:
    """Result of one bounded-distance decode; ``codeword`` is None on failure."""
    codeword: np.ndarray | None

    @property
    def decoded(self) -> bool:
        return self.codeword is not None


FAILURE = BddOutcome(None)


def bdd_decode(code: ComponentCode, word) -> BddOutcome:
    """Syndromes, Berlekamp-Massey and Chien search on one word.

    Returns the unique codeword within distance t, which may be a
    miscorrection, or FAILURE when no such codeword is found.
    """
    word = code._check(word)
    out, status = bdd_decode_batch(code, word[None, :])
    if status[0] == _kernels.FAILURE:
        return FAILURE
    return BddOutcome(out[0])


def bdd_decode_batch(code: ComponentCode, words) -> tuple[np.ndarray, np.ndarray]:
    """Decode each row; returns (decoded rows, status codes).

    Failed rows are returned unchanged. Status codes are 0 (failure),
    1 (already a codeword) and 2 (corrected).
    """
    words = np.ascontiguousarray(words, dtype=np.uint8)
    if words.ndim != 2 or words.shape[1] != code.n:
        raise CodeError(f"expected rows of length {code.n}, got shape {words.shape}")
    out = np.empty_like(words)
    status = np.empty(words.shape[0], dtype=np.int8)
    _kernels.bdd_batch(words, code.field.exp, code.field.log, code.mother_n, code.t, out, status)
    return out, status


def codeword_mask(code: ComponentCode, words) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint8)
    ok = np.empty(words.shape[0], dtype=np.bool_)
    _kernels.codeword_rows(words, code.field.exp, code.field.log, code.mother_n, code.t, ok)
    return ok
