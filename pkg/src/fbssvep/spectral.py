"""Spectral feature construction for the classifiers.

A 125-sample window at 250 Hz gives 2 Hz resolution; the working band is
2-90 Hz, i.e. DFT bins 1..45 (DC excluded, removed anyway by referencing).
Feature layouts:

  complex spectrum matrix   20 x 45    rows alternate Re/Im per sub-band
  complex spectrogram       10 x 45 x 6  Re/Im interleaved along time
  single-band spectrogram   45 x 6
  magnitude features        45         dB scale

All constructors are deterministic and pure.
"""
from __future__ import annotations

import numpy as np

from .core import SubBandStack, Window

WINDOW_LEN = 125
N_BINS = 45
STFT_HOP = 62
STFT_FRAMES = 3
DB_FLOOR = 1e-12


def dft(x: np.ndarray) -> np.ndarray:
    """One-sided DFT of a 125-sample window: 63 complex bins, 0..124 Hz.

    Bin k is sum_t x[t] * exp(-2j*pi*k*t/125). Computed via FFT; tests hold
    it to the direct summation within 1e-9.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (WINDOW_LEN,):
        raise ValueError(f"expected {WINDOW_LEN} samples, got {x.shape}")
    return np.fft.rfft(x)


def spectrum_2to90(w: Window) -> np.ndarray:
    """Complex spectrum restricted to 2..90 Hz (45 bins, DC excluded)."""
    return dft(w.samples)[1:N_BINS + 1]


def complex_spectrum_matrix(s: SubBandStack) -> np.ndarray:
    """20 x 45 real matrix: adjacent rows hold Re and Im of each band's spectrum.

    Row 2i is Re, row 2i+1 is Im of sub-band i's spectrum, so small kernels
    see both parts of each complex bin together.
    """
    if s.n_bands != 10:
        raise ValueError(f"expected 10 bands, got {s.n_bands}")
    out = np.empty((20, N_BINS), dtype=np.float64)
    for i in range(10):
        spec = dft(s.bands[i])[1:N_BINS + 1]
        out[2 * i] = spec.real
        out[2 * i + 1] = spec.imag
    return out


def stft(x: np.ndarray) -> np.ndarray:
    """Short-time transform of one window: 45 x 3 complex matrix.

    The 125-sample signal is zero-padded by 62 samples at each end; three
    rectangular 125-sample frames start at padded offsets 0, 62 and 124.
    Each frame's DFT is reduced to bins 1..45 (2..90 Hz).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (WINDOW_LEN,):
        raise ValueError(f"expected {WINDOW_LEN} samples, got {x.shape}")
    padded = np.concatenate([np.zeros(STFT_HOP), x, np.zeros(STFT_HOP)])
    out = np.empty((N_BINS, STFT_FRAMES), dtype=np.complex128)
    for j in range(STFT_FRAMES):
        frame = padded[j * STFT_HOP:j * STFT_HOP + WINDOW_LEN]
        out[:, j] = np.fft.rfft(frame)[1:N_BINS + 1]
    return out


def _interleave_time(c: np.ndarray) -> np.ndarray:
    out = np.empty((c.shape[0], 2 * c.shape[1]), dtype=np.float64)
    out[:, 0::2] = c.real
    out[:, 1::2] = c.imag
    return out


def complex_spectrogram_single(w: Window) -> np.ndarray:
    """45 x 6 real matrix: window STFT with Re/Im interleaved along time."""
    return _interleave_time(stft(w.samples))


def complex_spectrogram_tensor(s: SubBandStack) -> np.ndarray:
    """10 x 45 x 6 tensor: per-band STFT, Re/Im interleaved along time."""
    if s.n_bands != 10:
        raise ValueError(f"expected 10 bands, got {s.n_bands}")
    return np.stack([_interleave_time(stft(band)) for band in s.bands])


def magnitude_db(w: Window) -> np.ndarray:
    """45 magnitude-spectrum values on the decibel scale.

    Magnitudes are floored at 1e-12 before the log so silent windows stay
    finite (-240 dB).
    """
    mag = np.abs(spectrum_2to90(w))
    return 20.0 * np.log10(np.maximum(mag, DB_FLOOR))


def compute_norm_stats(features: np.ndarray) -> tuple[float, float]:
    """Scalar mean/std over every element of a training feature array."""
    features = np.asarray(features, dtype=np.float64)
    mean = float(features.mean())
    std = float(features.std())
    if std == 0.0:
        raise ValueError("degenerate statistics: feature std is zero")
    return mean, std


def normalize(features: np.ndarray, stats: tuple[float, float]) -> np.ndarray:
    """Apply (x - mean) / std with scalar training-set statistics."""
    mean, std = stats
    if std <= 0.0:
        raise ValueError(f"std must be positive, got {std}")
    return (np.asarray(features, dtype=np.float64) - mean) / std
