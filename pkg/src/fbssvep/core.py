"""Shared domain types for the SSVEP pipeline.

All types are immutable after construction and safe to share across
workers. Signals are float64 throughout; narrowing to float32 happens
only at serialization time (see dataio).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FS_DEFAULT = 250.0
WINDOW_SECONDS = 0.5
WINDOW_STEP_SECONDS = 0.1


@dataclass(frozen=True)
class StimulusTable:
    """Ordered stimulus classes: (class_index, frequency Hz, phase rad)."""

    entries: tuple[tuple[int, float, float], ...]

    def __post_init__(self):
        freqs = [f for _, f, _ in self.entries]
        if any(f <= 0 for f in freqs):
            raise ValueError("stimulus frequencies must be strictly positive")
        if len(set(freqs)) != len(freqs):
            raise ValueError("stimulus frequencies must be distinct")
        if [c for c, _, _ in self.entries] != list(range(len(self.entries))):
            raise ValueError("class indices must be contiguous from 0")

    @property
    def n_classes(self) -> int:
        return len(self.entries)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([f for _, f, _ in self.entries], dtype=np.float64)

    @property
    def phases(self) -> np.ndarray:
        return np.array([p for _, _, p in self.entries], dtype=np.float64)

    @classmethod
    def from_frequencies(cls, freqs, phase_step: float = 0.5 * np.pi) -> "StimulusTable":
        """Build a table from frequencies, spacing phases by phase_step."""
        entries = tuple(
            (i, float(f), (i * phase_step) % (2.0 * np.pi)) for i, f in enumerate(freqs)
        )
        return cls(entries)


@dataclass(frozen=True)
class Recording:
    """One subject's continuous multi-channel recording with trial markers.

    data is channel-major, shape (n_channels, n_samples). Each trial is
    (start_sample, length_samples, stimulus_label).
    """

    subject_id: str
    fs: float
    channels: tuple[str, ...]
    data: np.ndarray
    trials: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "data", np.asarray(self.data, dtype=np.float64))
        if self.data.ndim != 2 or self.data.shape[0] != len(self.channels):
            raise ValueError(
                f"data must be (n_channels={len(self.channels)}, n_samples), "
                f"got {self.data.shape}"
            )

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def channel(self, name: str) -> np.ndarray:
        return self.data[self.channels.index(name)]


@dataclass(frozen=True)
class Window:
    """A 0.5 s single-channel analysis window (125 samples at 250 Hz)."""

    samples: np.ndarray
    fs: float
    label: int

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        expect = round(WINDOW_SECONDS * self.fs)
        if self.samples.shape != (expect,):
            raise ValueError(f"window must hold {expect} samples, got {self.samples.shape}")


@dataclass(frozen=True)
class SubBandStack:
    """Band-pass filtered versions of one window, ordered by filter index."""

    bands: np.ndarray  # (n_bands, n_samples)
    fs: float
    label: int

    def __post_init__(self):
        object.__setattr__(self, "bands", np.asarray(self.bands, dtype=np.float64))
        if self.bands.ndim != 2:
            raise ValueError("bands must be a 2-D (n_bands, n_samples) array")

    @property
    def n_bands(self) -> int:
        return self.bands.shape[0]


def validate_recording(rec: Recording, table: StimulusTable | None = None) -> list[str]:
    """Check Recording invariants; returns a list of violation messages.

    An empty list means the recording is well formed. Violations are data,
    not exceptions, so callers can aggregate them across a dataset.
    """
    out = []
    if rec.fs <= 0:
        out.append(f"fs must be positive, got {rec.fs}")
    n = rec.n_samples
    for i, (start, length, label) in enumerate(rec.trials):
        if start < 0 or length <= 0 or start + length > n:
            out.append(
                f"trial {i} window [{start}, {start + length}) outside data bounds [0, {n})"
            )
        if table is not None and not (0 <= label < table.n_classes):
            out.append(f"trial {i} label {label} not in stimulus table (0..{table.n_classes - 1})")
    return out
