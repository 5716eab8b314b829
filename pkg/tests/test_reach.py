import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prodcode.reach import (LinkSpec, ReachError, optimal_power_dbm, optimal_power_w,
                            optimal_snr_db, reach, reach_gain, snr_after)

LINK = LinkSpec()


def gn_snr_reference(n_spans, p_dbm):
    """Closed-form incoherent GN SNR evaluated from raw SI constants."""
    h, c = 6.62607015e-34, 299792458.0
    a_lin = 0.2 * math.log(10) / 10 / 1000          # 1/m
    L = 80e3
    g = 10 ** (0.2 * 80 / 10)                       # span loss = amplifier gain
    nu = c / 1550e-9
    rs = 32e9
    p_ase = 10 ** 0.5 * h * nu * (g - 1) * rs
    lam = 1550e-9
    b2 = 17e-6 * lam**2 / (2 * np.pi * c)
    leff = (1 - 1 / g) / a_lin
    gam = 1.3e-3
    bwdm = 81 * 50e9
    eta = (8 / 27) * gam**2 * leff**2 * 2 * a_lin / (np.pi * b2 * rs**2) \
        * np.arcsinh(np.pi**2 * b2 * bwdm**2 / (4 * a_lin))
    p = 1e-3 * 10 ** (p_dbm / 10)
    return 10 * np.log10(p / (n_spans * (p_ase + eta * p**3)))


def test_linkspec_defaults_and_validation():
    assert (LINK.span_km, LINK.n_channels, LINK.symbol_rate_gbaud) == (80.0, 81, 32.0)
    with pytest.raises(ReachError):
        LinkSpec(span_km=0)
    with pytest.raises(ReachError):
        LinkSpec(noise_figure_db=-1.0)
    with pytest.raises(ReachError):
        LinkSpec.from_dict({"span_len": 80})


def test_linkspec_json_roundtrip(tmp_path):
    path = tmp_path / "link.json"
    path.write_text(json.dumps(LinkSpec(span_km=100.0).to_dict()))
    assert LinkSpec.load(path) == LinkSpec(span_km=100.0)


@pytest.mark.parametrize("n", [1, 10, 121, 184])
@pytest.mark.parametrize("p_dbm", [-6.0, -3.0, 0.0, 2.0])
def test_snr_matches_independent_gn_evaluation(n, p_dbm):
    assert snr_after(n, LINK, p_dbm) == pytest.approx(gn_snr_reference(n, p_dbm), abs=1e-9)


def test_snr_at_121_spans_reference_value():
    p = optimal_power_dbm(LINK)
    assert optimal_snr_db(121, LINK) == pytest.approx(gn_snr_reference(121, p), abs=1e-9)


def test_doubling_spans_halves_snr():
    for p in (-5.0, 0.0, 3.0):
        assert snr_after(20, LINK, p) - snr_after(40, LINK, p) == pytest.approx(
            10 * math.log10(2), abs=1e-12)


def test_optimal_power_formula():
    p = optimal_power_w(LINK)
    assert p == pytest.approx((LINK.p_ase / (2 * LINK.eta)) ** (1 / 3), rel=1e-14)
    pdbm = optimal_power_dbm(LINK)
    for n in (1, 50, 121):
        best = snr_after(n, LINK, pdbm)
        assert best > snr_after(n, LINK, pdbm + 1)
        assert best > snr_after(n, LINK, pdbm - 1)


def test_snr_rejects_zero_spans():
    with pytest.raises(ReachError):
        snr_after(0, LINK, 0.0)


def test_reach_examples():
    base = optimal_snr_db(121, LINK)
    assert reach(base, LINK).reach_km == 9680
    assert reach(base - 10 * math.log10(122 / 121), LINK).reach_km == 9760
    assert reach(base + 1, LINK).n_spans == math.floor(121 / 10**0.1) == 96


def test_reach_result_invariants():
    req = optimal_snr_db(57.3, LINK)
    r = reach(req, LINK)
    assert r.reach_km == r.n_spans * LINK.span_km
    assert r.snr_db >= req > optimal_snr_db(r.n_spans + 1, LINK)


def test_unreachable_requirement():
    with pytest.raises(ReachError):
        reach(optimal_snr_db(1, LINK) + 0.5, LINK)


def test_reach_gain_examples():
    assert reach_gain(0.0, 9680, LINK) == 0
    assert abs(reach_gain(0.24, 9680, LINK) - 560) <= 80
    with pytest.raises(ReachError):
        reach_gain(0.1, 9700, LINK)


def test_reach_gain_relative_headline():
    ratio = reach_gain(0.24, 9680, LINK) / 9680
    assert abs(ratio - (10**0.024 - 1)) <= 80 / 9680
    assert ratio == pytest.approx(0.058, abs=0.0015)


def test_coherence_exponent_reduces_reach():
    base = optimal_snr_db(121, LINK)
    assert reach(base, LinkSpec(coherence_eps=0.05)).n_spans < 121


@settings(max_examples=1000, deadline=None)
@given(st.floats(1, 500), st.floats(1, 500))
def test_prop_one_over_n_law(a, b):
    pa, pb = optimal_power_w(LINK, a), optimal_power_w(LINK, b)
    assert pa == pytest.approx(pb, rel=1e-12)
    sa = 10 ** (optimal_snr_db(a, LINK) / 10) * a
    sb = 10 ** (optimal_snr_db(b, LINK) / 10) * b
    assert sa == pytest.approx(sb, rel=1e-9)


@settings(max_examples=1000, deadline=None)
@given(st.floats(5, 20), st.floats(5, 20))
def test_prop_reach_monotone_in_requirement(a, b):
    lo, hi = min(a, b), max(a, b)
    assert reach(lo, LINK).n_spans >= reach(hi, LINK).n_spans


@settings(max_examples=1000, deadline=None)
@given(st.floats(0, 2), st.floats(0, 2), st.integers(10, 200))
def test_prop_reach_gain_monotone_and_scaling(a, b, spans):
    lo, hi = min(a, b), max(a, b)
    base = spans * LINK.span_km
    g_lo = reach_gain(lo, base, LINK)
    assert g_lo <= reach_gain(hi, base, LINK)
    assert abs(g_lo / base - (10 ** (lo / 10) - 1)) <= LINK.span_km / base + 1e-12


@settings(max_examples=1000, deadline=None)
@given(st.floats(-10, 5), st.integers(1, 300))
def test_prop_snr_unimodal_in_power(p, n):
    pstar = optimal_power_dbm(LINK)
    d = abs(p - pstar)
    if d > 1e-6:
        closer = pstar + 0.5 * (p - pstar)
        assert snr_after(n, LINK, closer) >= snr_after(n, LINK, p)
