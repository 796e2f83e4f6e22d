import numpy as np
import pytest

from fbssvep.core import Recording
from fbssvep.dsp import (CHEBY_ORDER, CHEBY_RIPPLE_DB, SUB_BAND_LOW_EDGES_HZ, apply_filter_bank,
                         bandpass_2_90, car, design_cheby1, filtfilt, make_filter_bank,
                         notch_50hz, window_slice)

FS = 250.0


def response_db(filt, freq_hz, fs=FS):
    """|H| in dB straight from the b/a coefficients (independent oracle)."""
    z = np.exp(-2j * np.pi * freq_hz / fs)
    h = np.polyval(filt.b[::-1], z) / np.polyval(filt.a[::-1], z)
    return 20.0 * np.log10(abs(h))


def tone(freq_hz, seconds=2.0, fs=FS):
    t = np.arange(round(seconds * fs)) / fs
    return np.sin(2 * np.pi * freq_hz * t)


def rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


class TestDesign:
    def test_passband_within_ripple(self):
        f = design_cheby1(4, 0.5, (6.0, 90.0), FS)
        assert -0.5 <= response_db(f, 48.0) <= 1e-9

    def test_stopband_attenuation_zero_phase(self):
        # forward-backward application squares the magnitude response
        f = design_cheby1(4, 0.5, (14.0, 90.0), FS)
        assert 2 * response_db(f, 6.0) <= -20.0

    def test_reversed_band_rejected(self):
        with pytest.raises(ValueError):
            design_cheby1(4, 0.5, (90.0, 6.0), FS)

    def test_all_bank_filters_stable(self):
        for f in make_filter_bank(FS, 10).filters:
            roots = np.roots(f.a)
            assert np.all(np.abs(roots) < 1.0)


class TestFiltfilt:
    def test_zero_phase_on_in_band_tone(self):
        f = design_cheby1(CHEBY_ORDER, CHEBY_RIPPLE_DB, (6.0, 90.0), FS)
        x = tone(30.0)
        y = filtfilt(f, x)
        corr = np.correlate(y, x, mode="full")
        assert np.argmax(corr) == len(x) - 1  # zero lag

    def test_zero_in_zero_out(self):
        f = design_cheby1(CHEBY_ORDER, CHEBY_RIPPLE_DB, (6.0, 90.0), FS)
        assert np.allclose(filtfilt(f, np.zeros(500)), 0.0)

    def test_below_band_tone_suppressed(self):
        f = design_cheby1(CHEBY_ORDER, CHEBY_RIPPLE_DB, (6.0, 90.0), FS)
        x = tone(2.0, seconds=4.0)
        assert rms(filtfilt(f, x)) <= 0.1 * rms(x)

    def test_too_short_input_rejected(self):
        f = design_cheby1(CHEBY_ORDER, CHEBY_RIPPLE_DB, (6.0, 90.0), FS)
        with pytest.raises(ValueError):
            filtfilt(f, np.zeros(f.padlen))

    @pytest.mark.parametrize("band", [(6.0, 90.0), (14.0, 90.0), (78.0, 90.0)])
    def test_forward_backward_symmetry(self, band):
        # pad-based filtfilt leaves boundary transients that decay with the
        # slowest pole (~2600 samples here), so the symmetry is checked in
        # the transient-free interior
        f = design_cheby1(CHEBY_ORDER, CHEBY_RIPPLE_DB, band, FS)
        rng = np.random.default_rng(5)
        x = rng.normal(size=7000)
        fwd = filtfilt(f, x)
        rev = filtfilt(f, x[::-1])[::-1]
        assert np.allclose(fwd[3000:-3000], rev[3000:-3000], atol=1e-9)
        assert np.abs(fwd - rev).max() < 1.0  # edges bounded, no blow-up


class TestNotch:
    def test_50hz_removed(self):
        x = tone(50.0, seconds=4.0)
        assert rms(notch_50hz(x, FS)) <= 0.1 * rms(x)

    def test_signal_band_untouched(self):
        x = tone(12.0, seconds=4.0)
        assert rms(notch_50hz(x, FS)) >= 0.95 * rms(x)

    def test_neighbors_within_3db(self):
        for f in (45.0, 55.0):
            x = tone(f, seconds=4.0)
            assert rms(notch_50hz(x, FS)) >= rms(x) * 10 ** (-3 / 20)

    def test_zero_signal(self):
        assert np.allclose(notch_50hz(np.zeros(1000), FS), 0.0)

    def test_low_fs_rejected(self):
        with pytest.raises(ValueError):
            notch_50hz(np.zeros(1000), 100.0)


class TestCar:
    def test_two_channel_arithmetic(self):
        rec = Recording("s", FS, ("a", "b"),
                        np.array([[1.0, 1, 1], [3.0, 3, 3]]), ((0, 3, 0),))
        out = car(rec)
        assert np.allclose(out.data, [[-1, -1, -1], [1, 1, 1]])

    def test_identical_channels_cancel(self):
        data = np.tile(np.sin(np.arange(100)), (4, 1))
        rec = Recording("s", FS, ("a", "b", "c", "d"), data, ((0, 100, 0),))
        assert np.allclose(car(rec).data, 0.0)

    def test_channel_mean_is_zero(self):
        rng = np.random.default_rng(0)
        rec = Recording("s", FS, ("a", "b", "c"), rng.normal(size=(3, 200)), ((0, 200, 0),))
        assert np.allclose(car(rec).data.mean(axis=0), 0.0, atol=1e-12)

    def test_single_channel_rejected(self):
        rec = Recording("s", FS, ("oz",), np.zeros((1, 100)), ((0, 100, 0),))
        with pytest.raises(ValueError):
            car(rec)


class TestBandpass:
    def test_dc_removed(self):
        out = bandpass_2_90(np.full(1000, 5.0), FS)
        assert np.mean(np.abs(out)) < 0.05

    def test_in_band_rms_preserved(self):
        x = tone(40.0, seconds=4.0)
        assert abs(rms(bandpass_2_90(x, FS)) - rms(x)) <= 0.05 * rms(x)

    def test_zero_signal(self):
        assert np.allclose(bandpass_2_90(np.zeros(1000), FS), 0.0)


class TestFilterBank:
    def test_table_low_edges(self):
        bank = make_filter_bank(FS, 10)
        lows = [f.design_meta[3][0] for f in bank.filters]
        assert lows == [6, 14, 22, 30, 38, 46, 54, 62, 70, 78]
        assert all(f.design_meta[3][1] == 90.0 for f in bank.filters)

    def test_seven_band_variant_is_prefix(self):
        b7 = make_filter_bank(FS, 7)
        b10 = make_filter_bank(FS, 10)
        for f7, f10 in zip(b7.filters, b10.filters):
            assert np.allclose(f7.b, f10.b) and np.allclose(f7.a, f10.a)

    def test_output_count_and_length(self):
        x = np.random.default_rng(1).normal(size=700)
        out = apply_filter_bank(x, FS, 10)
        assert out.shape == (10, 700)

    def test_band_selectivity(self):
        x = tone(10.0, seconds=4.0)
        out = apply_filter_bank(x, FS, 10)
        assert rms(out[0]) >= 10.0 * rms(out[2])

    def test_invalid_band_count(self):
        with pytest.raises(ValueError):
            apply_filter_bank(np.zeros(500), FS, 5)

    def test_low_edge_formula(self):
        assert list(SUB_BAND_LOW_EDGES_HZ) == [6.0 + 8.0 * n for n in range(10)]


class TestWindowSlice:
    def test_five_second_trial(self):
        assert len(window_slice(np.zeros(1250), FS)) == 46

    def test_two_second_trial(self):
        assert len(window_slice(np.zeros(500), FS)) == 16

    def test_exactly_one_window(self):
        assert len(window_slice(np.zeros(125), FS)) == 1

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            window_slice(np.zeros(124), FS)

    def test_windows_reconstruct_signal(self):
        x = np.random.default_rng(2).normal(size=500)
        for i, w in enumerate(window_slice(x, FS)):
            assert np.array_equal(w.samples, x[25 * i:25 * i + 125])

    def test_band_stack_slicing_aligned(self):
        bands = np.random.default_rng(3).normal(size=(10, 500))
        stacks = window_slice(bands, FS, label=1)
        assert len(stacks) == 16
        for i, s in enumerate(stacks):
            assert s.label == 1
            assert np.array_equal(s.bands, bands[:, 25 * i:25 * i + 125])
