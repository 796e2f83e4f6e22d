"""Synthetic single-channel SSVEP generator.

Serves as the desk-scale ground truth for every classifier: each trial is
a harmonic series at the stimulus frequency (amplitudes h**-decay), with
per-subject gain, per-trial latency jitter expressed as a phase offset,
plus white and 1/f-shaped noise. Everything is deterministic under the
config seed.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal

from .core import Recording, StimulusTable

# 3-pole/3-zero IIR approximation of a -10 dB/decade pink spectrum
_PINK_B = (0.049922035, -0.095993537, 0.050612699, -0.004408786)
_PINK_A = (1.0, -2.494956002, 2.017265875, -0.522189400)


@dataclass(frozen=True)
class SynthConfig:
    table: StimulusTable
    n_harmonics: int = 5
    harmonic_decay: float = 1.0
    white_sigma: float = 0.0
    pink_sigma: float = 0.0
    gain_range: tuple[float, float] = (0.7, 1.3)
    phase_jitter_std_range: tuple[float, float] = (0.0, 0.2)
    fs: float = 250.0
    trial_seconds: float = 2.0
    seed: int = 0

    def __post_init__(self):
        nyquist = self.fs / 2.0
        if any(f >= nyquist for f in self.table.frequencies):
            raise ValueError("stimulus frequencies must lie below Nyquist")
        if self.white_sigma < 0 or self.pink_sigma < 0:
            raise ValueError("noise levels must be nonnegative")

    def noise_free(self) -> "SynthConfig":
        return replace(self, white_sigma=0.0, pink_sigma=0.0,
                       gain_range=(1.0, 1.0), phase_jitter_std_range=(0.0, 0.0))


@dataclass(frozen=True)
class SubjectParams:
    gain: float
    phase_jitter_std: float


def draw_subject_params(cfg: SynthConfig, rng: np.random.Generator) -> SubjectParams:
    return SubjectParams(
        gain=float(rng.uniform(*cfg.gain_range)),
        phase_jitter_std=float(rng.uniform(*cfg.phase_jitter_std_range)),
    )


def generate_trial(class_index: int, cfg: SynthConfig, subject: SubjectParams,
                   rng: np.random.Generator) -> np.ndarray:
    """One single-channel trial of cfg.trial_seconds for the given class."""
    if not 0 <= class_index < cfg.table.n_classes:
        raise ValueError(f"class {class_index} not in stimulus table")
    f = cfg.table.frequencies[class_index]
    phase = cfg.table.phases[class_index]
    n = round(cfg.trial_seconds * cfg.fs)
    t = np.arange(n) / cfg.fs
    jitter = rng.normal(0.0, subject.phase_jitter_std) if subject.phase_jitter_std > 0 else 0.0
    x = np.zeros(n)
    for h in range(1, cfg.n_harmonics + 1):
        if h * f >= cfg.fs / 2.0:
            break
        amp = h ** (-cfg.harmonic_decay)
        x += amp * np.sin(2.0 * np.pi * h * f * t + h * (phase + jitter))
    x *= subject.gain
    if cfg.white_sigma > 0:
        x += cfg.white_sigma * rng.standard_normal(n)
    if cfg.pink_sigma > 0:
        pink = signal.lfilter(_PINK_B, _PINK_A, rng.standard_normal(n))
        x += cfg.pink_sigma * pink / pink.std()
    return x


def generate_dataset(n_subjects: int, trials_per_class: int, cfg: SynthConfig) -> list[Recording]:
    """Per-subject recordings: trials for every class in repeated blocks.

    Subject parameters are drawn once per subject from independent
    sub-seeds, so recordings differ across subjects but the whole dataset
    is reproducible from cfg.seed.
    """
    recordings = []
    for subject_seq in np.random.SeedSequence(cfg.seed).spawn(n_subjects):
        rng = np.random.default_rng(subject_seq)
        sid = f"S{len(recordings):02d}"
        subject = draw_subject_params(cfg, rng)
        chunks, trials = [], []
        start = 0
        for _ in range(trials_per_class):
            for class_index in range(cfg.table.n_classes):
                x = generate_trial(class_index, cfg, subject, rng)
                chunks.append(x)
                trials.append((start, len(x), class_index))
                start += len(x)
        data = np.concatenate(chunks)[None, :]
        recordings.append(Recording(sid, cfg.fs, ("Oz",), data, tuple(trials)))
    return recordings
