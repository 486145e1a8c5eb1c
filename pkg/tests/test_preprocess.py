import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrvkit.dataset import RriSeries
from hrvkit.errors import InsufficientDataError
from hrvkit.preprocess import (
    IhrSeries,
    ImpulseRejectConfig,
    impulse_reject,
    median_filter,
    preprocess_ch4,
    preprocess_ch5,
    preprocess_ch6,
    resample_uniform,
    rri_to_ihr,
    wavelet_denoise,
)


class TestRriToIhr:
    def test_eq_values(self):
        ihr = rri_to_ihr(RriSeries(np.array([1000.0, 600.0])))
        assert np.allclose(ihr.values, [60.0, 100.0])

    def test_single(self):
        assert rri_to_ihr(RriSeries(np.array([500.0]))).values[0] == 120.0

    def test_constant_857ms(self):
        ihr = rri_to_ihr(RriSeries(np.full(20, 857.0)))
        assert np.allclose(ihr.values, 70.0, atol=0.1)

    def test_sample_times_are_prefix_sums(self):
        ihr = rri_to_ihr(RriSeries(np.array([1000.0, 500.0, 500.0])))
        assert np.allclose(ihr.sample_times, [1.0, 1.5, 2.0])


class TestMedianFilter:
    def test_spec_edge_case(self):
        out = median_filter([1.0, 9.0, 1.0], order=3)
        assert np.array_equal(out, [5.0, 1.0, 5.0])

    def test_constant_unchanged(self):
        out = median_filter(np.full(20, 7.0), order=5)
        assert np.array_equal(out, np.full(20, 7.0))

    def test_increasing_interior_unchanged(self):
        x = np.arange(30, dtype=float)
        out = median_filter(x, order=5)
        assert np.array_equal(out[2:-2], x[2:-2])

    def test_even_order_rejected(self):
        with pytest.raises(ValueError):
            median_filter([1.0, 2.0, 3.0], order=4)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=45)
        for order in (3, 5, 11):
            expected = [np.median(x[max(0, i - order // 2):min(45, i + order // 2 + 1)])
                        for i in range(45)]
            assert np.allclose(median_filter(x, order), expected)

    def test_idempotent_on_constant(self):
        x = np.full(12, 3.0)
        once = median_filter(x, 5)
        assert np.array_equal(median_filter(once, 5), once)


class TestWaveletDenoise:
    def test_constant_preserved(self):
        out = wavelet_denoise(np.full(64, 5.5))
        assert np.abs(out - 5.5).max() < 1e-9

    def test_nyquist_alternation_killed(self):
        x = np.array([1.0, -1.0] * 64)
        out = wavelet_denoise(x)
        assert np.abs(out[16:-16]).max() < 1e-9  # interior: lowpass is zero at Nyquist
        assert out.var() <= x.var()

    def test_variance_never_grows_on_noise(self):
        rng = np.random.default_rng(1)
        x = 800 + rng.normal(0, 30, 256)
        out = wavelet_denoise(x)
        assert out.var() <= x.var()
        assert out.size == x.size

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            wavelet_denoise(np.ones(15))

    def test_perfect_reconstruction_identity(self):
        # adding the detail branch back reproduces the input exactly
        from hrvkit.preprocess import SYM8_LO, _dwt_approx_coeffs
        rng = np.random.default_rng(2)
        for n in (33, 64):
            x = rng.normal(size=n)
            fl = SYM8_LO.size
            hi = np.array([(-1) ** j * SYM8_LO[fl - 1 - j] for j in range(fl)])
            ext = np.pad(x, (fl - 1, fl - 1), mode="symmetric")
            rec = np.zeros(ext.size)
            for filt in (SYM8_LO, hi):
                coeffs, tsel = _dwt_approx_coeffs(ext, filt)
                up = np.zeros(ext.size + fl - 1)
                up[tsel] = coeffs
                conv = np.convolve(up, filt, mode="full")
                rec += conv[fl - 1: fl - 1 + ext.size]
            assert np.abs(rec - ext).max() < 1e-10


class TestImpulseReject:
    def _series(self, values):
        values = np.asarray(values, dtype=float)
        return IhrSeries(values, np.arange(values.size) / 7.0, rate_hz=7.0)

    def test_constant_unchanged(self):
        ihr = self._series(np.full(30, 70.0))
        out = impulse_reject(ihr)
        assert np.array_equal(out.values, ihr.values)

    def test_single_spike_replaced(self):
        values = np.full(40, 70.0)
        values[17] = 200.0
        out = impulse_reject(self._series(values))
        assert out.values[17] == 70.0
        assert np.array_equal(np.delete(out.values, 17), np.full(39, 70.0))

    def test_below_threshold_untouched(self):
        rng = np.random.default_rng(4)
        values = 70 + rng.normal(0, 1.0, 60)  # residuals well under 4 MADs... mostly
        cfg = ImpulseRejectConfig(tau=50.0, wm=11)  # huge tau: gate can never fire
        out = impulse_reject(self._series(values), cfg)
        assert np.array_equal(out.values, values)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            impulse_reject(self._series(np.full(11, 70.0)))

    def test_hand_evaluated_statistic(self):
        # residuals: spike vs everything else; MAD over the whole series
        values = np.full(25, 70.0)
        values[10] = 90.0
        values[20] = 71.0
        local_med = np.array([np.median(values[max(0, i - 5):i + 6]) for i in range(25)])
        residual = np.abs(values - local_med)
        scale = 1.483 * np.median(residual)
        d = np.where(residual == 0, 0.0,
                     residual / scale if scale > 0 else np.inf)
        expected = np.where(d >= 4.0, local_med, values)
        out = impulse_reject(self._series(values))
        assert np.allclose(out.values, expected)


class TestResampleUniform:
    def test_linear_data_reproduced(self):
        times = np.array([0.0, 0.7, 1.1, 2.0, 3.2])
        values = 3.0 * times + 40.0
        out = resample_uniform(IhrSeries(values, times), rate_hz=8.0)
        assert np.allclose(out.values, 3.0 * out.sample_times + 40.0, atol=1e-9)
        assert out.rate_hz == 8.0
        assert np.allclose(np.diff(out.sample_times), 1 / 8.0)

    def test_constant(self):
        times = np.array([0.0, 1.0, 2.5, 4.0])
        out = resample_uniform(IhrSeries(np.full(4, 70.0), times), rate_hz=5.0)
        assert np.allclose(out.values, 70.0)

    def test_sine_error_bound(self):
        # jittered sampling at 16x the sine frequency; monotone cubics need
        # comfortably more than the minimum rate to stay inside 2% at the peaks
        rng = np.random.default_rng(5)
        freq = 0.4
        dt = 1.0 / (16 * freq)
        base = np.arange(0.0, 30.0, dt)
        times = np.sort(base + rng.uniform(-0.2 * dt, 0.2 * dt, base.size))
        values = 80 + 10 * np.sin(2 * np.pi * freq * times)
        out = resample_uniform(IhrSeries(values, times), rate_hz=16.0)
        reference = 80 + 10 * np.sin(2 * np.pi * freq * out.sample_times)
        assert np.abs(out.values - reference).max() < 0.02 * 10

    def test_no_overshoot(self):
        rng = np.random.default_rng(6)
        times = np.sort(rng.uniform(0, 20, 50))
        times += np.arange(50) * 1e-6  # guard against duplicate times
        values = rng.uniform(60, 100, 50)
        out = resample_uniform(IhrSeries(values, times), rate_hz=16.0)
        assert out.values.min() >= values.min() - 1e-9
        assert out.values.max() <= values.max() + 1e-9

    def test_too_few_samples(self):
        with pytest.raises(InsufficientDataError):
            resample_uniform(IhrSeries(np.array([70.0, 71, 72]), np.array([0.0, 1, 2])), 4.0)


class TestPresets:
    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 6))
    def test_pipelines_pure_and_deterministic(self, seed):
        rng = np.random.default_rng(seed)
        values = np.maximum(rng.normal(800, 40, 180), 200.0)
        series = RriSeries(values)
        for fn in (preprocess_ch4, preprocess_ch5, preprocess_ch6):
            a = fn(series)
            b = fn(series)
            assert np.array_equal(a.values, b.values)
            assert a.rate_hz in (16.0, 7.0)

    def test_rates(self):
        series = RriSeries(np.full(200, 800.0))
        assert preprocess_ch4(series).rate_hz == 16.0
        assert preprocess_ch5(series).rate_hz == 16.0
        assert preprocess_ch6(series).rate_hz == 7.0

    def test_uniform_spacing(self):
        rng = np.random.default_rng(8)
        series = RriSeries(np.maximum(rng.normal(750, 30, 250), 200.0))
        for fn, rate in ((preprocess_ch5, 16.0), (preprocess_ch6, 7.0)):
            out = fn(series)
            assert np.allclose(np.diff(out.sample_times), 1.0 / rate)
