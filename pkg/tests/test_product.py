import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prodcode.bch import CodeParams, bdd_decode, construct_bch
from prodcode.product import (
    DecoderError, DecoderSchedule, ProductCodeSpec, hard_decision, ibdd_decode,
    ibdd_sr_decode, ideal_ibdd_decode, info_bits, is_product_codeword, pc_encode,
)

TOY5 = ProductCodeSpec(construct_bch(CodeParams(4, 3), strict=False))   # (15,5) t=3
TOY7 = ProductCodeSpec(construct_bch(CodeParams(4, 2)))                 # (15,7) t=2
C8 = ProductCodeSpec.from_params(CodeParams(8, 3, 76))


def random_codeword(spec, rng):
    return pc_encode(spec, rng.integers(0, 2, (spec.k, spec.k), dtype=np.uint8))


def test_spec_quantities():
    spec = ProductCodeSpec.from_params(CodeParams(9, 3, 93))
    assert spec.n_c == 174724
    assert float(spec.oh) == pytest.approx(418**2 / 391**2 - 1)
    assert spec.rate == 1 / (1 + spec.oh)


# ---------------------------------------------------------------- encoding

def test_zero_info_encodes_to_zero():
    assert not pc_encode(C8, np.zeros((C8.k, C8.k), np.uint8)).any()


@pytest.mark.parametrize("spec", [TOY5, TOY7, C8])
def test_all_rows_and_columns_are_codewords(spec):
    rng = np.random.default_rng(0)
    c = random_codeword(spec, rng)
    assert is_product_codeword(spec, c)
    code = spec.component
    for i in range(spec.n):
        assert code.is_codeword(c[i]) and code.is_codeword(c[:, i])


@pytest.mark.parametrize("spec", [TOY7, C8])
def test_encode_order_commutes(spec):
    rng = np.random.default_rng(1)
    info = rng.integers(0, 2, (spec.k, spec.k), dtype=np.uint8)
    a = pc_encode(spec, info, order="rows")
    b = pc_encode(spec, info, order="cols")
    assert np.array_equal(a, b)
    assert np.array_equal(info_bits(spec, a), info)


def test_encode_dimension_mismatch():
    with pytest.raises(DecoderError):
        pc_encode(C8, np.zeros((C8.k, C8.k + 1), np.uint8))


# ---------------------------------------------------------------- iBDD

def test_error_free_converges_in_first_half_iteration():
    c = random_codeword(C8, np.random.default_rng(2))
    rep = ibdd_decode(C8, c)
    assert rep.converged and rep.half_iterations == 1
    assert np.array_equal(rep.decoded, c)


def test_single_error_anywhere_corrected_in_first_row_pass():
    rng = np.random.default_rng(3)
    c = random_codeword(C8, rng)
    for _ in range(20):
        i, j = rng.integers(0, C8.n, 2)
        r = c.copy()
        r[i, j] ^= 1
        rep = ibdd_decode(C8, r, genie=c)
        assert rep.bit_errors[0] == 0
        assert rep.converged and np.array_equal(rep.decoded, c)


def failing_support(code, size, rng):
    """A set of `size` positions whose indicator word makes BDD fail."""
    while True:
        pos = np.sort(rng.choice(code.n, size, replace=False))
        w = np.zeros(code.n, np.uint8)
        w[pos] = 1
        if not bdd_decode(code, w).decoded:
            return pos


def test_minimal_stall_pattern_is_never_corrected():
    rng = np.random.default_rng(4)
    code = C8.component
    support = failing_support(code, code.t + 1, rng)
    c = random_codeword(C8, rng)
    r = c.copy()
    r[np.ix_(support, support)] ^= 1
    rep = ibdd_decode(C8, r, DecoderSchedule.ibdd(12), genie=c)
    assert not rep.converged
    assert rep.half_iterations == 24
    assert np.array_equal(rep.decoded, r)
    assert all(e == (code.t + 1) ** 2 for e in rep.bit_errors)


def test_dimension_checks():
    with pytest.raises(DecoderError):
        ibdd_decode(C8, np.zeros((3, 3), np.uint8))
    with pytest.raises(DecoderError):
        ideal_ibdd_decode(C8, np.zeros((C8.n, C8.n), np.uint8), None, np.zeros((2, 2), np.uint8))
    with pytest.raises(DecoderError):
        ibdd_decode(C8, np.zeros((C8.n, C8.n), np.uint8), DecoderSchedule.ideal())


# ---------------------------------------------------------------- ideal iBDD

def miscorrecting_row_pattern(code):
    """Weight-(t+1) pattern on the zero word that BDD miscorrects (oracle search)."""
    for pos in itertools.combinations(range(code.n), code.t + 1):
        w = np.zeros(code.n, np.uint8)
        w[list(pos)] = 1
        out = bdd_decode(code, w)
        if out.decoded and out.codeword.any():
            # Oracle: the decoded word is a codeword within distance t.
            assert code.is_codeword(out.codeword)
            assert np.count_nonzero(out.codeword != w) <= code.t
            return np.array(pos)
    raise AssertionError("no miscorrecting pattern")


def test_ideal_keeps_row_on_forced_miscorrection():
    rng = np.random.default_rng(5)
    c = random_codeword(TOY5, rng)
    pos = miscorrecting_row_pattern(TOY5.component)
    r = c.copy()
    r[6, pos] ^= 1
    ideal = ideal_ibdd_decode(TOY5, r, DecoderSchedule.ideal(1), c)
    assert ideal.miscorrections[0] == 1
    assert ideal.bit_errors[0] == TOY5.component.t + 1  # row left unchanged
    assert ideal.converged and np.array_equal(ideal.decoded, c)
    plain = ibdd_decode(TOY5, r, DecoderSchedule.ibdd(1), genie=c)
    assert plain.miscorrections[0] == 1
    assert plain.bit_errors[0] > TOY5.component.t + 1


def test_ideal_equals_ibdd_without_miscorrections():
    rng = np.random.default_rng(6)
    c = random_codeword(C8, rng)
    r = c.copy()
    for i in range(0, C8.n, 7):
        r[i, rng.choice(C8.n, 2, replace=False)] ^= 1
    a = ibdd_decode(C8, r, genie=c)
    b = ideal_ibdd_decode(C8, r, DecoderSchedule.ideal(), c)
    assert sum(a.miscorrections) == 0
    assert np.array_equal(a.decoded, b.decoded)


# ---------------------------------------------------------------- iBDD-SR

def test_sr_zero_weights_is_channel_then_ibdd():
    rng = np.random.default_rng(7)
    c = random_codeword(C8, rng)
    llr = (1.0 - 2.0 * c) * 4.0 + rng.normal(0, 3.0, c.shape)
    sr = ibdd_sr_decode(C8, llr, DecoderSchedule.sr_constant(0.0, 10, 0))
    assert np.array_equal(sr.decoded, hard_decision(llr))


def test_sr_error_free_channel_converges_immediately():
    c = random_codeword(C8, np.random.default_rng(8))
    llr = (1.0 - 2.0 * c) * 1e6
    rep = ibdd_sr_decode(C8, llr, DecoderSchedule.sr_constant(3.0))
    assert rep.converged and np.array_equal(rep.decoded, c)
    assert rep.half_iterations <= 1


def test_sr_strong_llrs_override_miscorrection():
    rng = np.random.default_rng(9)
    c = random_codeword(TOY5, rng)
    pos = miscorrecting_row_pattern(TOY5.component)
    r = c.copy()
    r[3, pos] ^= 1
    w = 2.0
    llr = (1.0 - 2.0 * r) * (w + 1.0 + rng.random(r.shape))
    rep = ibdd_sr_decode(TOY5, llr, DecoderSchedule.sr_constant(w, 1, 0), genie=c)
    assert rep.miscorrections[0] == 1
    assert np.array_equal(rep.decoded[3], r[3])
    assert np.array_equal(rep.decoded, hard_decision(llr))


def test_sr_requires_weights():
    with pytest.raises(DecoderError):
        DecoderSchedule("ibdd-sr", 12, 10, 2, (1.0,) * 5)
    with pytest.raises(DecoderError):
        DecoderSchedule("ibdd-sr", 12, 10, 1, (1.0,) * 20)
    with pytest.raises(DecoderError):
        ibdd_sr_decode(C8, np.zeros((C8.n, C8.n)), DecoderSchedule.ibdd())
    assert len(DecoderSchedule.sr([1.0] * 10).weights) == 20


# ---------------------------------------------------------------- properties

def noisy(spec, seed, sigma):
    rng = np.random.default_rng(seed)
    c = random_codeword(spec, rng)
    y = 1.0 - 2.0 * c + rng.normal(0.0, sigma, c.shape)
    return c, 2.0 * y / sigma**2


seeds = st.integers(0, 2**32 - 1)
sigmas = st.floats(0.35, 0.75)


@settings(max_examples=1000, deadline=None)
@given(seeds, sigmas, st.integers(0, 4))
def test_prop_zero_weight_sr_equals_ibdd_on_channel(seed, sigma, m):
    c, llr = noisy(TOY7, seed, sigma)
    sr = ibdd_sr_decode(TOY7, llr, DecoderSchedule.sr_constant(0.0, 3, m))
    ib = ibdd_decode(TOY7, hard_decision(llr), DecoderSchedule.ibdd(m))
    assert np.array_equal(sr.decoded, ib.decoded)


@settings(max_examples=1000, deadline=None)
@given(seeds, sigmas, st.sampled_from(["ibdd", "ideal", "sr"]))
def test_prop_counts_and_determinism(seed, sigma, kind):
    c, llr = noisy(TOY5, seed, sigma)
    hard = hard_decision(llr)
    if kind == "ibdd":
        run = lambda: ibdd_decode(TOY5, hard, genie=c)
    elif kind == "ideal":
        run = lambda: ideal_ibdd_decode(TOY5, hard, DecoderSchedule.ideal(), c)
    else:
        run = lambda: ibdd_sr_decode(TOY5, llr, DecoderSchedule.sr_constant(1.5), genie=c)
    a, b = run(), run()
    assert np.array_equal(a.decoded, b.decoded)
    for s, f, m in zip(a.successes, a.failures, a.miscorrections):
        assert s + f == TOY5.n
        assert m <= s


@settings(max_examples=1000, deadline=None)
@given(seeds, sigmas)
def test_prop_ideal_never_adds_errors(seed, sigma):
    c, llr = noisy(TOY5, seed, sigma)
    hard = hard_decision(llr)
    rep = ideal_ibdd_decode(TOY5, hard, DecoderSchedule.ideal(), c)
    errs = [int(np.count_nonzero(hard != c))] + rep.bit_errors
    assert all(b <= a for a, b in zip(errs, errs[1:]))


@settings(max_examples=1000, deadline=None)
@given(seeds, sigmas, st.sampled_from(["ibdd", "ideal", "sr"]))
def test_prop_transpose_symmetry(seed, sigma, kind):
    c, llr = noisy(TOY7, seed, sigma)
    hard = hard_decision(llr)
    if kind == "ibdd":
        a = ibdd_decode(TOY7, hard)
        b = ibdd_decode(TOY7, hard.T, first="cols")
    elif kind == "ideal":
        a = ideal_ibdd_decode(TOY7, hard, None, c)
        b = ideal_ibdd_decode(TOY7, hard.T, None, c.T, first="cols")
    else:
        sched = DecoderSchedule.sr([0.5, 1.0, 2.0, 3.0, 4.0, 5.0], 3, 1)
        a = ibdd_sr_decode(TOY7, llr, sched)
        b = ibdd_sr_decode(TOY7, llr.T, sched, first="cols")
    assert np.array_equal(a.decoded, b.decoded.T)
    assert a.half_iterations == b.half_iterations


@settings(max_examples=300, deadline=None)
@given(seeds, st.floats(0.4, 0.6))
def test_prop_early_stop_does_not_change_result(seed, sigma):
    from prodcode import product
    c, llr = noisy(TOY7, seed, sigma)
    sched = DecoderSchedule.sr([1.0, 2.0, 3.0, 3.0], 2, 2)
    fast = ibdd_sr_decode(TOY7, llr, sched)
    # Reference: brute-force loop without early exit.
    code = TOY7.component
    msg = hard_decision(llr)
    for h, w in enumerate(sched.half_passes()):
        m = msg if h % 2 == 0 else msg.T
        L = llr if h % 2 == 0 else llr.T
        out = m.copy()
        for i in range(TOY7.n):
            res = bdd_decode(code, m[i])
            if w is None:
                out[i] = res.codeword if res.decoded else m[i]
            else:
                mu = (1.0 - 2.0 * res.codeword) if res.decoded else np.zeros(TOY7.n)
                out[i] = hard_decision(w * mu + L[i])
        msg = out if h % 2 == 0 else out.T
    assert np.array_equal(fast.decoded, msg)
