"""Compiled BDD kernels shared by the component and product decoders.

Conventions: ``exp`` is the doubled antilog table of the field, ``log`` its
inverse with ``log[0] == -1``, ``N`` the mother-code length ``2^v - 1``.
Word position ``j`` is the coefficient of ``x^j``; a length-``n`` word of a
shortened code occupies mother positions ``0..n-1``.

Status codes returned per word: 0 failure, 1 input already a codeword,
2 decoded with at least one bit flipped.
"""

import numpy as np
from numba import njit

FAILURE = 0
CLEAN = 1
CORRECTED = 2


@njit(cache=True)
def _gf_mul(a, b, exp, log):
    if a == 0 or b == 0:
        return 0
    return exp[log[a] + log[b]]


@njit(cache=True)
def _syndromes(word, exp, log, N, t, S):
    """Fill S[1..2t]; returns True when all are zero."""
    two_t = 2 * t
    for i in range(1, two_t + 1):
        S[i] = 0
    n = word.shape[0]
    for j in range(n):
        if word[j]:
            for i in range(1, two_t + 1, 2):
                S[i] ^= exp[(i * j) % N]
    for i in range(2, two_t + 1, 2):
        S[i] = _gf_mul(S[i // 2], S[i // 2], exp, log)
    for i in range(1, two_t + 1):
        if S[i] != 0:
            return False
    return True


@njit(cache=True)
def _berlekamp_massey(S, t, exp, log, N, C, B, T):
    """Error-locator polynomial into C (C[0] == 1); returns its length L."""
    two_t = 2 * t
    for i in range(C.shape[0]):
        C[i] = 0
        B[i] = 0
    C[0] = 1
    B[0] = 1
    L = 0
    m = 1
    b = 1
    for r in range(two_t):
        d = S[r + 1]
        for i in range(1, L + 1):
            d ^= _gf_mul(C[i], S[r + 1 - i], exp, log)
        if d == 0:
            m += 1
            continue
        # coef = d / b
        coef = exp[(log[d] - log[b]) % N]
        if 2 * L <= r:
            for i in range(C.shape[0]):
                T[i] = C[i]
            for i in range(C.shape[0] - m):
                if B[i] != 0:
                    C[i + m] ^= _gf_mul(coef, B[i], exp, log)
            L = r + 1 - L
            for i in range(C.shape[0]):
                B[i] = T[i]
            b = d
            m = 1
        else:
            for i in range(C.shape[0] - m):
                if B[i] != 0:
                    C[i + m] ^= _gf_mul(coef, B[i], exp, log)
            m += 1
    return L


@njit(cache=True)
def _decode_one(word, out, exp, log, N, t, S, C, B, T, idx, roots):
    n = word.shape[0]
    for j in range(n):
        out[j] = word[j]
    if _syndromes(word, exp, log, N, t, S):
        return CLEAN
    L = _berlekamp_massey(S, t, exp, log, N, C, B, T)
    if L > t or C[L] == 0:
        return FAILURE
    # Chien search over the n transmitted positions only; a root that falls
    # in a shortened position shows up as a missing root.
    for k in range(1, L + 1):
        idx[k] = log[C[k]] if C[k] != 0 else -1
    count = 0
    for j in range(n):
        acc = 1
        for k in range(1, L + 1):
            if idx[k] >= 0:
                acc ^= exp[idx[k]]
                idx[k] -= k
                if idx[k] < 0:
                    idx[k] += N
        if acc == 0:
            if count == L:
                return FAILURE
            roots[count] = j
            count += 1
    if count != L:
        return FAILURE
    # The flipped positions must reproduce every odd syndrome.
    for i in range(1, 2 * t + 1, 2):
        acc = 0
        for r in range(L):
            acc ^= exp[(i * roots[r]) % N]
        if acc != S[i]:
            return FAILURE
    for r in range(L):
        out[roots[r]] ^= 1
    return CORRECTED


@njit(cache=True)
def bdd_batch(words, exp, log, N, t, out, status):
    """Bounded-distance decode every row of ``words`` into ``out``.

    On failure the row is copied unchanged. ``status`` receives one of
    FAILURE / CLEAN / CORRECTED per row.
    """
    m = words.shape[0]
    S = np.zeros(2 * t + 1, dtype=np.int64)
    C = np.zeros(2 * t + 2, dtype=np.int64)
    B = np.zeros(2 * t + 2, dtype=np.int64)
    T = np.zeros(2 * t + 2, dtype=np.int64)
    idx = np.zeros(2 * t + 2, dtype=np.int64)
    roots = np.zeros(2 * t + 2, dtype=np.int64)
    for r in range(m):
        status[r] = _decode_one(words[r], out[r], exp, log, N, t, S, C, B, T, idx, roots)


@njit(cache=True)
def codeword_rows(words, exp, log, N, t, ok):
    """ok[r] = whether row r has all-zero syndromes."""
    S = np.zeros(2 * t + 1, dtype=np.int64)
    for r in range(words.shape[0]):
        ok[r] = _syndromes(words[r], exp, log, N, t, S)


@njit(cache=True)
def error_pattern_stats(positions, n, exp, log, N, t, result):
    """Decode a set of error patterns applied to the all-zero codeword.

    ``positions`` is (trials, e) with distinct positions per row. For each
    trial ``result`` receives (status, errors corrected, correct bits
    flipped). Works for any linear code by symmetry.
    """
    word = np.zeros(n, dtype=np.uint8)
    out = np.zeros(n, dtype=np.uint8)
    S = np.zeros(2 * t + 1, dtype=np.int64)
    C = np.zeros(2 * t + 2, dtype=np.int64)
    B = np.zeros(2 * t + 2, dtype=np.int64)
    T = np.zeros(2 * t + 2, dtype=np.int64)
    idx = np.zeros(2 * t + 2, dtype=np.int64)
    roots = np.zeros(2 * t + 2, dtype=np.int64)
    e = positions.shape[1]
    for r in range(positions.shape[0]):
        for i in range(e):
            word[positions[r, i]] = 1
        st = _decode_one(word, out, exp, log, N, t, S, C, B, T, idx, roots)
        fixed = 0
        broken = 0
        if st == CORRECTED:
            for j in range(n):
                if out[j] != word[j]:
                    if word[j]:
                        fixed += 1
                    else:
                        broken += 1
        result[r, 0] = st
        result[r, 1] = fixed
        result[r, 2] = broken
        for i in range(e):
            word[positions[r, i]] = 0
