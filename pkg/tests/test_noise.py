import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kljn_lab.attacks.statistical import ccc
from kljn_lab.errors import DegenerateInput, InvalidArgument
from kljn_lab.noise import (
    BOLTZMANN,
    NoiseTrace,
    derive_seed,
    gen_gblwn,
    johnson_rms,
    johnson_trace,
    lag1_autocorr,
    mix_eve_noise,
    quality_report,
    scale_johnson,
)

BW = 500.0


def test_gblwn_mean_and_std():
    t = gen_gblwn(1024, BW, 7, 10)
    assert abs(t.samples.mean()) < 4 / math.sqrt(1024)
    assert abs(t.samples.std() - 1) < 0.05
    assert t.dt == 1 / (2 * BW)


def test_gblwn_is_deterministic():
    a = gen_gblwn(1024, BW, derive_seed(3, "H,A"), 1)
    b = gen_gblwn(1024, BW, derive_seed(3, "H,A"), 1)
    assert np.array_equal(a.samples, b.samples)


def test_gblwn_whiteness():
    t = gen_gblwn(4096, BW, 11, 10)
    assert abs(lag1_autocorr(t.samples)) < 3 / math.sqrt(4096)


def test_gblwn_different_seeds_uncorrelated():
    a = gen_gblwn(4096, BW, derive_seed(0, "a"))
    b = gen_gblwn(4096, BW, derive_seed(0, "b"))
    assert abs(ccc(a.samples, b.samples)) < 4 / math.sqrt(4096)


def test_gblwn_is_band_limited():
    # The bin at half the sample rate is cleared and the rest stays inside the band.
    t = gen_gblwn(2048, BW, 5)
    spec = np.fft.rfft(t.samples)
    assert abs(spec[-1]) < 1e-9 * np.abs(spec).max()


@pytest.mark.parametrize("n", [1000, 3, 0, 1])
def test_gblwn_rejects_bad_length(n):
    with pytest.raises(InvalidArgument):
        gen_gblwn(n, BW, 0)


def test_gblwn_rejects_zero_ensemble():
    with pytest.raises(InvalidArgument):
        gen_gblwn(1024, BW, 0, 0)


def test_trace_rejects_non_finite():
    with pytest.raises(InvalidArgument):
        NoiseTrace(np.array([0.0, np.nan]), 1e-3, BW)


@pytest.mark.parametrize("r, want", [(10e3, 276.13), (100e3, 2761.3)])
def test_scale_johnson_levels(r, want):
    t = scale_johnson(gen_gblwn(1024, BW, 1), r, 1e18, BW)
    assert np.mean(t.samples**2) == pytest.approx(want, rel=1e-4)


def test_scale_johnson_is_exact():
    t = scale_johnson(gen_gblwn(1024, BW, 2).with_samples(np.arange(1024.0) - 3), 1e4, 1e18, BW)
    want = 4 * BOLTZMANN * 1e18 * 1e4 * BW
    assert abs(np.mean(t.samples**2) / want - 1) < 1e-10


def test_scale_johnson_equal_resistors_equal_rms():
    a = scale_johnson(gen_gblwn(1024, BW, 1), 5e3, 3e17, BW)
    b = scale_johnson(gen_gblwn(1024, BW, 2), 5e3, 3e17, BW)
    assert a.rms == pytest.approx(b.rms, rel=1e-12)


def test_scale_johnson_rejects_zero_temperature_and_zero_trace():
    t = gen_gblwn(1024, BW, 1)
    with pytest.raises(InvalidArgument):
        scale_johnson(t, 1e4, 0.0, BW)
    with pytest.raises(DegenerateInput):
        scale_johnson(t.with_samples(np.zeros(1024)), 1e4, 1e18, BW)


def test_johnson_trace_window_of_long_record():
    short = johnson_trace(1000, 1e4, 1e18, BW, 9, record_length=1 << 14)
    full = johnson_trace(1 << 14, 1e4, 1e18, BW, 9)
    assert len(short) == 1000
    assert np.array_equal(short.samples, full.samples[:1000])
    assert full.rms == pytest.approx(johnson_rms(1e4, 1e18, BW), rel=1e-12)


def _mix(m, seed=0, n=1000):
    base = johnson_trace(n, 1e4, 1e18, BW, derive_seed(seed, "base"))
    ind = johnson_trace(n, 1e4, 1e18, BW, derive_seed(seed, "ind"))
    return base, mix_eve_noise(base, ind, m, 1e4, 1e18, BW)


def test_mix_zero_is_copy():
    base, out = _mix(0.0)
    assert ccc(out.samples, base.samples) == pytest.approx(1.0, abs=1e-12)
    assert out.rms == pytest.approx(johnson_rms(1e4, 1e18, BW), rel=1e-12)


@pytest.mark.parametrize("m, want", [(1.0, 0.7071), (10.0, 0.0995)])
def test_mix_correlation(m, want):
    base, out = _mix(m)
    assert ccc(out.samples, base.samples) == pytest.approx(want, abs=0.03)


def test_mix_correlation_law_across_m():
    # Mean CCC over 200 independent draws within 4 standard errors of 1/sqrt(1+M^2).
    for m in (0.0, 0.1, 0.5, 1.0, 1.5, 5.0, 10.0):
        vals = np.array([ccc(*(t.samples for t in _mix(m, seed)[::-1])) for seed in range(200)])
        law = 1 / math.sqrt(1 + m * m)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean() - law) <= 4 * se + 1e-12, (m, vals.mean(), law, se)


def test_mix_rejects_mismatch_and_negative_m():
    base, _ = _mix(0.0)
    with pytest.raises(InvalidArgument):
        mix_eve_noise(base, base.head(10), 1.0, 1e4, 1e18, BW)
    with pytest.raises(InvalidArgument):
        mix_eve_noise(base, base, -1.0, 1e4, 1e18, BW)


def test_quality_report_psd_level():
    t = scale_johnson(gen_gblwn(16384, BW, 4), 1e4, 1e18, BW)
    q = quality_report(t, 8)
    assert q.in_band_psd_mean() == pytest.approx(276.13 / BW, rel=0.15)
    freqs = [f for f, _ in q.psd_bins]
    assert freqs[0] == 0.0 and freqs[-1] == pytest.approx(BW)


def test_quality_report_gaussian_moments():
    q = quality_report(gen_gblwn(16384, BW, 8), 8)
    assert abs(q.skewness) < 0.2
    assert abs(q.excess_kurtosis) < 0.3


def test_quality_report_zero_trace_and_short_trace():
    q = quality_report(NoiseTrace(np.zeros(64), 1e-3, BW), 4)
    assert q.std == 0.0
    with pytest.raises(InvalidArgument):
        quality_report(NoiseTrace(np.zeros(8), 1e-3, BW), 4)


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    r=st.floats(1.0, 1e7),
    t=st.floats(1e3, 1e20),
)
def test_property_johnson_rms_exact(seed, r, t):
    tr = scale_johnson(gen_gblwn(256, BW, seed), r, t, BW)
    assert abs(np.mean(tr.samples**2) / (4 * BOLTZMANN * t * r * BW) - 1) < 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 12))
def test_property_gblwn_reproducible_and_normalized(seed, k):
    a = gen_gblwn(512, BW, seed, k)
    b = gen_gblwn(512, BW, seed, k)
    assert np.array_equal(a.samples, b.samples)
    assert abs(a.samples.mean()) < 1e-12
    assert a.rms == pytest.approx(1.0, rel=1e-12)
