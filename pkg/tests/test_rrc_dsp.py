import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import rrc_power_fraction_width
from osaas_plan.rrc_dsp import (
    BandwidthCriterion,
    RrcParams,
    estimate_psd,
    generate_shaped_signal,
    level_bandwidth,
    matched_pair_response,
    occupied_bandwidth,
    rrc_frequency_response,
    rrc_impulse_response,
)


def _psd(rate, alpha, seed=0, nsym=16384):
    p = RrcParams(rate, alpha, num_symbols=nsym)
    return estimate_psd(generate_shaped_signal(p, seed), p.sampling_rate)


class TestParams:
    @pytest.mark.parametrize("kw", [
        dict(symbol_rate=0, rolloff=0.2), dict(symbol_rate=32, rolloff=-0.1),
        dict(symbol_rate=32, rolloff=1.2), dict(symbol_rate=32, rolloff=0.2, samples_per_symbol=2),
        dict(symbol_rate=32, rolloff=0.2, span_symbols=8), dict(symbol_rate=32, rolloff=0.2, num_symbols=10),
    ])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(ValueError):
            RrcParams(**kw)

    def test_tap_count(self):
        assert RrcParams(32, 0.2).num_taps == 32 * 8 + 1


class TestImpulse:
    @pytest.mark.parametrize("alpha", [0.0, 0.1, 0.25, 0.5, 1.0])
    def test_unit_energy_and_finite(self, alpha):
        h = rrc_impulse_response(RrcParams(32, alpha))
        assert np.all(np.isfinite(h))
        assert np.sum(h * h) == pytest.approx(1.0, abs=1e-12)

    def test_alpha_zero_is_sinc(self):
        p = RrcParams(32, 0.0)
        tau = np.arange(-(p.num_taps // 2), p.num_taps // 2 + 1) / p.samples_per_symbol
        s = np.sinc(tau)
        s /= np.sqrt(np.sum(s * s))
        h = rrc_impulse_response(p)
        assert h[p.num_taps // 2] == pytest.approx(s[p.num_taps // 2], abs=1e-12)
        assert np.allclose(h, s, atol=1e-12)

    def test_pole_uses_limit(self):
        # alpha = 0.25 puts taps exactly on t = +-1/(4 alpha) = +-1 symbol
        p = RrcParams(32, 0.25)
        h = rrc_impulse_response(p)
        mid, sps = p.num_taps // 2, p.samples_per_symbol
        neighbours = h[mid + sps - 1], h[mid + sps + 1]
        assert min(neighbours) - 1e-3 < h[mid + sps] < max(neighbours) + 1e-3

    def test_sidelobes_decay_faster_with_rolloff(self):
        def tail(alpha):
            p = RrcParams(32, alpha)
            h = rrc_impulse_response(p)
            tau = (np.arange(p.num_taps) - p.num_taps // 2) / p.samples_per_symbol
            return np.max(np.abs(h[np.abs(tau) >= 3]))
        assert tail(0.4) < tail(0.1)


class TestFrequencyResponse:
    def test_brick_wall(self):
        p = RrcParams(32, 0.0)
        assert rrc_frequency_response(p, [0.49 * 32])[0] == 1.0
        assert rrc_frequency_response(p, [0.51 * 32])[0] == 0.0

    def test_half_power_at_nyquist(self):
        p = RrcParams(32, 0.4)
        assert rrc_frequency_response(p, [16.0, -16.0]) == pytest.approx([np.sqrt(0.5)] * 2, abs=1e-12)

    def test_zero_beyond_support(self):
        assert rrc_frequency_response(RrcParams(32, 0.2), [0.61 * 32])[0] == 0.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            rrc_frequency_response(RrcParams(32, 0.2), [np.nan])

    @given(st.floats(0.01, 1.0), st.floats(0, 0.5))
    def test_power_complementary(self, alpha, x):
        # |H(f)|^2 + |H(f - Rs)|^2 = 1 for 0 <= f <= Rs (Nyquist criterion)
        p = RrcParams(10, alpha)
        f = x * 10
        h = rrc_frequency_response(p, [f, f - 10])
        assert h[0] ** 2 + h[1] ** 2 == pytest.approx(1.0, abs=1e-9)


class TestZeroIsi:
    @pytest.mark.parametrize("alpha", np.round(np.arange(0, 1.01, 0.1), 2))
    def test_matched_pair_nulls(self, alpha):
        p = RrcParams(32, float(alpha))
        g = matched_pair_response(p)
        lags = g[p.samples_per_symbol::p.samples_per_symbol]
        assert np.max(np.abs(lags)) <= 1e-6 * g[0]

    def test_truncated_fir_self_convolution(self):
        # The span-32 FIR cannot reach the ideal nulls; the residual is
        # dominated by truncation and stays below 1e-3 of the peak.
        p = RrcParams(32, 0.25)
        h = rrc_impulse_response(p)
        g = np.convolve(h, h)
        mid, sps = len(g) // 2, p.samples_per_symbol
        lags = np.r_[g[mid + sps::sps], g[mid - sps::-sps]]
        assert np.max(np.abs(lags)) / g[mid] < 1e-3


class TestSignal:
    def test_deterministic(self):
        p = RrcParams(32, 0.2, num_symbols=4096)
        assert np.array_equal(generate_shaped_signal(p, 3), generate_shaped_signal(p, 3))

    def test_seed_matters(self):
        p = RrcParams(32, 0.2, num_symbols=4096)
        assert not np.array_equal(generate_shaped_signal(p, 1), generate_shaped_signal(p, 2))

    @pytest.mark.parametrize("alpha", [0.05, 0.2, 0.6, 1.0])
    def test_mean_power(self, alpha):
        x = generate_shaped_signal(RrcParams(32, alpha, num_symbols=4096), 0)
        assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_matched_filter_evm(self):
        p = RrcParams(32, 0.2, num_symbols=4096)
        from osaas_plan.rrc_dsp import qpsk_symbols

        x = generate_shaped_signal(p, 5)
        freqs = np.fft.fftfreq(x.size, d=1 / p.sampling_rate)
        y = np.fft.ifft(np.fft.fft(x) * rrc_frequency_response(p, freqs))
        rx = y[::p.samples_per_symbol] / np.sqrt(p.samples_per_symbol)
        tx = qpsk_symbols(p.num_symbols, 5)
        edge = p.span_symbols
        core = slice(edge, -edge)
        rx = rx[core] * np.vdot(rx[core], tx[core]) / np.vdot(rx[core], rx[core])
        evm = np.sqrt(np.mean(np.abs(rx - tx[core]) ** 2))
        assert evm < 1e-3


class TestPsd:
    def test_tone_peak(self):
        fs = 100.0
        n = 2 ** 16
        x = np.exp(2j * np.pi * 5.0 * np.arange(n) / fs)
        psd = estimate_psd(x, fs)
        nearest = psd.freqs[np.argmin(np.abs(psd.freqs - 5.0))]
        assert psd.freqs[np.argmax(psd.power_density)] == nearest

    def test_grid_symmetric(self):
        psd = _psd(32, 0.2, nsym=4096)
        assert np.allclose(psd.freqs, -psd.freqs[::-1])

    def test_out_of_band_suppression(self):
        psd = _psd(40, 0.3)
        peak = psd.power_density.max()
        for f0 in (-26.0, 26.0):
            d = psd.power_density[np.argmin(np.abs(psd.freqs - f0))]
            assert 10 * np.log10(d / peak) <= -30

    def test_white_noise_flat(self):
        rng = np.random.default_rng(7)
        n = 2 ** 20
        x = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        psd = estimate_psd(x, 1.0)
        ratio_db = 10 * np.log10(psd.power_density / 1.0)
        assert np.max(np.abs(ratio_db)) <= 1.5

    def test_parseval(self):
        x = generate_shaped_signal(RrcParams(32, 0.3, num_symbols=8192), 1)
        psd = estimate_psd(x, 8 * 32)
        assert psd.total_power == pytest.approx(np.mean(np.abs(x) ** 2), rel=0.01)

    def test_too_short(self):
        with pytest.raises(ValueError):
            estimate_psd(np.ones(100), 1.0)


class TestOccupiedBandwidth:
    def test_63gbd_below_support(self):
        bw = occupied_bandwidth(_psd(63, 0.2))
        assert 63 < bw < 75.6

    def test_matches_closed_form(self):
        bw = occupied_bandwidth(_psd(63, 0.2, nsym=32768))
        assert bw == pytest.approx(rrc_power_fraction_width(63, 0.2, 0.99), abs=0.5)

    def test_fraction_limit_approaches_support(self):
        psd = _psd(32, 0.3, nsym=32768)
        assert occupied_bandwidth(psd, 0.9999) == pytest.approx(32 * 1.3, rel=0.03)

    def test_increasing_in_rolloff(self):
        widths = [occupied_bandwidth(_psd(40, a)) for a in np.arange(0.05, 0.61, 0.05)]
        assert np.all(np.diff(widths) > 0)

    def test_monotone_in_fraction(self):
        psd = _psd(40, 0.3)
        assert occupied_bandwidth(psd, 0.5) < occupied_bandwidth(psd, 0.99)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2])
    def test_rejects_fraction(self, bad):
        with pytest.raises(ValueError):
            occupied_bandwidth(_psd(40, 0.3, nsym=1024), bad)

    def test_level_bandwidth_between_edges(self):
        psd = _psd(42, 0.35)
        bw = level_bandwidth(psd, 4.0)
        assert 42 * 0.65 < bw < 42 * 1.35
        assert level_bandwidth(psd, 3.0) < bw < level_bandwidth(psd, 10.0)

    def test_criterion_validation(self):
        with pytest.raises(ValueError):
            BandwidthCriterion("power_fraction", 1.5)
        with pytest.raises(ValueError):
            BandwidthCriterion("db_down", 0.0)
        with pytest.raises(ValueError):
            BandwidthCriterion("nope", 1.0)

    def test_criterion_dispatch(self):
        psd = _psd(40, 0.3, nsym=4096)
        assert BandwidthCriterion("power_fraction", 0.99).measure(psd) == occupied_bandwidth(psd, 0.99)
        assert BandwidthCriterion("db_down", 4.0).measure(psd) == level_bandwidth(psd, 4.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(10, 80), st.floats(0.05, 0.9), st.integers(0, 1000))
def test_occupied_within_support(rate, alpha, seed):
    bw = occupied_bandwidth(_psd(rate, alpha, seed=seed, nsym=2048))
    assert 0 < bw < rate * (1 + alpha) * 1.05


@pytest.mark.xfail(strict=True, reason="span-32 FIR truncation leaves ~1e-3 residual ISI")
def test_truncated_fir_reaches_1e6():
    p = RrcParams(32, 0.25)
    h = rrc_impulse_response(p)
    g = np.convolve(h, h)
    mid, sps = len(g) // 2, p.samples_per_symbol
    lags = np.r_[g[mid + sps::sps], g[mid - sps::-sps]]
    assert np.max(np.abs(lags)) / g[mid] <= 1e-6
