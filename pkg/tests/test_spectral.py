import numpy as np
import pytest

from fbssvep.core import SubBandStack, Window
from fbssvep.spectral import (complex_spectrogram_single, complex_spectrogram_tensor,
                              complex_spectrum_matrix, compute_norm_stats, dft, magnitude_db,
                              normalize, spectrum_2to90, stft)

FS = 250.0


def direct_dft(x):
    """O(N^2) summation oracle."""
    n = len(x)
    k = np.arange(n // 2 + 1)
    t = np.arange(n)
    return (x[None, :] * np.exp(-2j * np.pi * k[:, None] * t[None, :] / n)).sum(axis=1)


def cosine_window(freq_hz, amplitude=1.0, label=0):
    t = np.arange(125) / FS
    return Window(amplitude * np.cos(2 * np.pi * freq_hz * t), FS, label)


class TestDft:
    def test_matches_direct_sum(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.normal(size=125)
            assert np.abs(dft(x) - direct_dft(x)).max() < 1e-9

    def test_on_bin_cosine(self):
        out = dft(cosine_window(12.0).samples)
        assert abs(abs(out[6]) - 62.5) < 1e-9
        rest = np.delete(np.abs(out), 6)
        assert rest.max() < 1e-9

    def test_dc(self):
        out = dft(np.ones(125))
        assert abs(out[0] - 125.0) < 1e-9
        assert np.abs(out[1:]).max() < 1e-9

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            dft(np.zeros(126))

    def test_parseval(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=125)
        spec = dft(x)
        two_sided = abs(spec[0]) ** 2 + 2 * np.sum(np.abs(spec[1:]) ** 2)
        assert abs(two_sided - 125 * np.sum(x * x)) / (125 * np.sum(x * x)) < 1e-6

    def test_linearity(self):
        rng = np.random.default_rng(13)
        x, y = rng.normal(size=125), rng.normal(size=125)
        lhs = dft(2.5 * x - 1.5 * y)
        rhs = 2.5 * dft(x) - 1.5 * dft(y)
        assert np.abs(lhs - rhs).max() < 1e-9


class TestSpectrum2to90:
    def test_dominant_bin(self):
        spec = spectrum_2to90(cosine_window(12.0))
        assert np.argmax(np.abs(spec)) == 5  # 12 Hz at 2 Hz resolution, DC excluded

    def test_zero_window(self):
        spec = spectrum_2to90(Window(np.zeros(125), FS, 0))
        assert spec.shape == (45,) and np.all(spec == 0)

    def test_always_45_bins(self):
        rng = np.random.default_rng(14)
        assert spectrum_2to90(Window(rng.normal(size=125), FS, 0)).shape == (45,)


class TestComplexSpectrumMatrix:
    def test_zero_stack(self):
        out = complex_spectrum_matrix(SubBandStack(np.zeros((10, 125)), FS, 0))
        assert out.shape == (20, 45) and np.all(out == 0)

    def test_single_band_activity(self):
        bands = np.zeros((10, 125))
        bands[0] = cosine_window(12.0).samples
        out = complex_spectrum_matrix(SubBandStack(bands, FS, 0))
        assert np.abs(out[:2]).max() > 1.0
        assert np.abs(out[2:]).max() == 0.0

    def test_row_interleaving_definition(self):
        rng = np.random.default_rng(15)
        bands = rng.normal(size=(10, 125))
        out = complex_spectrum_matrix(SubBandStack(bands, FS, 0))
        for i in range(10):
            spec = spectrum_2to90(Window(bands[i], FS, 0))
            assert np.array_equal(out[2 * i], spec.real)
            assert np.array_equal(out[2 * i + 1], spec.imag)

    def test_wrong_band_count(self):
        with pytest.raises(ValueError):
            complex_spectrum_matrix(SubBandStack(np.zeros((7, 125)), FS, 0))


class TestStft:
    def test_zero_input(self):
        out = stft(np.zeros(125))
        assert out.shape == (45, 3) and np.all(out == 0)

    def test_three_frames_45_bins(self):
        assert stft(np.random.default_rng(16).normal(size=125)).shape == (45, 3)

    def test_stationary_tone_dominates_every_frame(self):
        out = np.abs(stft(cosine_window(12.0).samples))
        for j in range(3):
            assert np.argmax(out[:, j]) == 5

    def test_frames_match_padded_direct_dft(self):
        rng = np.random.default_rng(17)
        x = rng.normal(size=125)
        padded = np.concatenate([np.zeros(62), x, np.zeros(62)])
        out = stft(x)
        for j in range(3):
            frame = padded[62 * j:62 * j + 125]
            assert np.abs(out[:, j] - direct_dft(frame)[1:46]).max() < 1e-9


class TestComplexSpectrogram:
    def test_zero_stack(self):
        out = complex_spectrogram_tensor(SubBandStack(np.zeros((10, 125)), FS, 0))
        assert out.shape == (10, 45, 6) and np.all(out == 0)

    def test_time_interleaving_definition(self):
        rng = np.random.default_rng(18)
        bands = rng.normal(size=(10, 125))
        out = complex_spectrogram_tensor(SubBandStack(bands, FS, 0))
        for n in range(10):
            c = stft(bands[n])
            for j in range(3):
                assert np.array_equal(out[n, :, 2 * j], c[:, j].real)
                assert np.array_equal(out[n, :, 2 * j + 1], c[:, j].imag)

    def test_single_band_slab(self):
        bands = np.zeros((10, 125))
        bands[0] = cosine_window(15.0).samples
        out = complex_spectrogram_tensor(SubBandStack(bands, FS, 0))
        assert np.abs(out[0]).max() > 1.0
        assert np.abs(out[1:]).max() == 0.0

    def test_single_window_matches_slab(self):
        rng = np.random.default_rng(19)
        x = rng.normal(size=125)
        bands = np.zeros((10, 125))
        bands[3] = x
        tensor = complex_spectrogram_tensor(SubBandStack(bands, FS, 0))
        single = complex_spectrogram_single(Window(x, FS, 0))
        assert np.array_equal(single, tensor[3])

    def test_tone_row_energy(self):
        out = complex_spectrogram_single(cosine_window(12.0))
        energy = (out ** 2).sum(axis=1)
        assert np.argmax(energy) == 5


class TestMagnitudeDb:
    def test_log_identities(self):
        # amplitude 2/125 puts exactly 1.0 into the on-bin magnitude
        w = cosine_window(12.0, amplitude=2.0 / 125.0)
        out = magnitude_db(w)
        assert abs(out[5] - 0.0) < 1e-9
        w10 = cosine_window(12.0, amplitude=20.0 / 125.0)
        assert abs(magnitude_db(w10)[5] - 20.0) < 1e-9

    def test_silent_window_floored(self):
        out = magnitude_db(Window(np.zeros(125), FS, 0))
        assert np.allclose(out, -240.0)


class TestNormalize:
    def test_constant_input_maps_to_zero(self):
        x = np.full((4, 5), 3.0)
        assert np.allclose(normalize(x, (3.0, 2.0)), 0.0)

    def test_train_stats_roundtrip(self):
        rng = np.random.default_rng(20)
        x = rng.normal(5.0, 3.0, size=(50, 45))
        stats = compute_norm_stats(x)
        z = normalize(x, stats)
        assert abs(z.mean()) < 1e-9
        assert abs(z.std() - 1.0) < 1e-9

    def test_zero_std_rejected(self):
        with pytest.raises(ValueError):
            compute_norm_stats(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            normalize(np.ones(5), (0.0, 0.0))

    def test_feature_constructors_deterministic(self):
        rng = np.random.default_rng(21)
        bands = rng.normal(size=(10, 125))
        s = SubBandStack(bands, FS, 0)
        a = complex_spectrogram_tensor(s)
        b = complex_spectrogram_tensor(s)
        assert np.array_equal(a, b)
        assert np.array_equal(complex_spectrum_matrix(s), complex_spectrum_matrix(s))
