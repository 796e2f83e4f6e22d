"""Canonical dataset format, loaders, split protocol, feature assembly.

Datasets are a JSON manifest (schema "fbssvep-manifest/1") plus one raw
signal file per subject: little-endian IEEE-754 float32, channel-major,
headerless (shapes live in the manifest).

The leave-one-subject-out split holds the test subject out entirely and
divides the remaining windows 75/25 at trial granularity by default, so
overlapping windows of one trial never straddle train and validation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Recording, StimulusTable, WINDOW_SECONDS, WINDOW_STEP_SECONDS, validate_recording
from .dsp import apply_filter_bank, bandpass_2_90, car, make_filter_bank, notch_50hz, window_slice
from .models import FEATURE_KINDS
from .spectral import (complex_spectrogram_single, complex_spectrogram_tensor,
                       complex_spectrum_matrix, compute_norm_stats, magnitude_db, normalize)

MANIFEST_FORMAT = "fbssvep-manifest/1"

_BANKED_KINDS = ("complex_spectrum_matrix", "complex_spectrogram_tensor", "sub_band_stack")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class PreprocessConfig:
    """Stream preprocessing ahead of windowing.

    reference "car" subtracts the cross-channel mean (stationary rigs);
    "bandpass" runs the 2-90 Hz zero-phase filter (single-channel rigs);
    "none" skips referencing. notch toggles the 50 Hz line filter.
    """

    channel: str = "Oz"
    reference: str = "bandpass"
    notch: bool = False
    filter_bank: bool = True
    n_bands: int = 10
    win_s: float = WINDOW_SECONDS
    step_s: float = WINDOW_STEP_SECONDS

    def __post_init__(self):
        if self.reference not in ("car", "bandpass", "none"):
            raise ValueError(f"unknown reference mode {self.reference!r}")

    def to_dict(self) -> dict:
        return dict(channel=self.channel, reference=self.reference, notch=self.notch,
                    filter_bank=self.filter_bank, n_bands=self.n_bands,
                    win_s=self.win_s, step_s=self.step_s)


def save_dataset(recordings: list[Recording], table: StimulusTable, out_dir,
                 name: str = "dataset") -> Path:
    """Write manifest + per-subject float32 signal files; returns manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    subjects = []
    for rec in recordings:
        fname = f"{rec.subject_id}.f32"
        rec.data.astype("<f4").tofile(out / fname)
        subjects.append(dict(id=rec.subject_id, file=fname, n_samples=rec.n_samples,
                             trials=[list(t) for t in rec.trials]))
    manifest = dict(
        format=MANIFEST_FORMAT,
        name=name,
        fs=recordings[0].fs,
        channels=list(recordings[0].channels),
        stimulus_table=[list(e) for e in table.entries],
        subjects=subjects,
    )
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1))
    return path


def load_dataset(manifest_path) -> tuple[list[Recording], StimulusTable]:
    path = Path(manifest_path)
    manifest = json.loads(path.read_text())
    if manifest.get("format") != MANIFEST_FORMAT:
        raise DatasetError(f"{path}: unknown manifest format {manifest.get('format')!r}")
    table = StimulusTable(tuple((int(c), float(f), float(p))
                                for c, f, p in manifest["stimulus_table"]))
    fs = float(manifest["fs"])
    channels = tuple(manifest["channels"])
    seen = set()
    recordings = []
    for sub in manifest["subjects"]:
        sid = sub["id"]
        if sid in seen:
            raise DatasetError(f"{path}: duplicate subject id {sid!r}")
        seen.add(sid)
        f = path.parent / sub["file"]
        if not f.exists():
            raise DatasetError(f"subject {sid}: signal file {f} missing")
        raw = np.fromfile(f, dtype="<f4")
        want = len(channels) * sub["n_samples"]
        if raw.size != want:
            raise DatasetError(
                f"subject {sid}: {f} holds {raw.size} floats, manifest declares {want}")
        data = raw.astype(np.float64).reshape(len(channels), sub["n_samples"])
        rec = Recording(sid, fs, channels, data, tuple(tuple(t) for t in sub["trials"]))
        problems = validate_recording(rec, table)
        if problems:
            raise DatasetError(f"subject {sid}: " + "; ".join(problems))
        recordings.append(rec)
    return recordings, table


@dataclass(frozen=True)
class SplitPlan:
    """Trial-granular partition for one leave-one-subject-out fold."""

    test_subject: str
    train_refs: tuple[tuple[str, int], ...]  # (subject_id, trial_index)
    val_refs: tuple[tuple[str, int], ...]
    val_fraction: float
    seed: int
    granularity: str = "trial"

    def __post_init__(self):
        pool = set(self.train_refs) | set(self.val_refs)
        if set(self.train_refs) & set(self.val_refs):
            raise ValueError("train and validation refs overlap")
        if any(ref[0] == self.test_subject for ref in pool):
            raise ValueError("test subject leaked into train/val refs")


def _window_count(length: int, fs: float, win_s: float, step_s: float) -> int:
    win, step = round(win_s * fs), round(step_s * fs)
    return 0 if length < win else (length - win) // step + 1


def loso_split(recordings: list[Recording], test_subject: str, val_fraction: float = 0.25,
               seed: int = 0, granularity: str = "trial",
               win_s: float = WINDOW_SECONDS, step_s: float = WINDOW_STEP_SECONDS) -> SplitPlan:
    """Hold one subject out; split the rest 75/25 by windows.

    granularity "trial" assigns whole trials (default, avoids overlapping
    windows straddling the split); "window" splits at individual windows.
    """
    if len(recordings) < 2:
        raise ValueError("need at least 2 subjects for a leave-one-out split")
    ids = [rec.subject_id for rec in recordings]
    if test_subject not in ids:
        raise ValueError(f"unknown test subject {test_subject!r}")
    if granularity not in ("trial", "window"):
        raise ValueError(f"granularity must be 'trial' or 'window', got {granularity!r}")

    refs, weights = [], []
    for rec in recordings:
        if rec.subject_id == test_subject:
            continue
        for ti, (_, length, _) in enumerate(rec.trials):
            wc = _window_count(length, rec.fs, win_s, step_s)
            if granularity == "trial":
                refs.append((rec.subject_id, ti))
                weights.append(wc)
            else:
                refs.extend((rec.subject_id, ti, wi) for wi in range(wc))
                weights.extend([1] * wc)

    order = np.random.default_rng(np.random.SeedSequence([seed, 0xB1D])).permutation(len(refs))
    target = round(val_fraction * sum(weights))
    val, train, val_windows = [], [], 0
    for i in order:
        if val_windows < target:
            val.append(refs[i])
            val_windows += weights[i]
        else:
            train.append(refs[i])
    return SplitPlan(test_subject, tuple(train), tuple(val), val_fraction, seed, granularity)


@dataclass
class FeatureSet:
    """Labeled feature rows with provenance back to subject/trial/window."""

    x: np.ndarray
    y: np.ndarray
    subject_ids: list[str]
    trial_index: np.ndarray
    window_index: np.ndarray


def build_features(rec: Recording, kind: str, cfg: PreprocessConfig) -> FeatureSet:
    """Stream-ordered pipeline: notch, reference, bank, slice, transform.

    kind is a feature kind from models.FEATURE_KINDS (or a model kind).
    Output is unnormalized; normalization belongs to the training split.
    """
    kind = FEATURE_KINDS.get(kind, kind)
    banked = kind in _BANKED_KINDS
    if banked and not cfg.filter_bank:
        raise ValueError(f"{kind} requires the filter bank, disabled in config")

    data = rec.data
    if cfg.notch:
        data = np.stack([notch_50hz(ch, rec.fs) for ch in data])
    if cfg.reference == "car":
        rec2 = car(Recording(rec.subject_id, rec.fs, rec.channels, data, rec.trials))
        x = rec2.channel(cfg.channel)
    elif cfg.reference == "bandpass":
        x = bandpass_2_90(data[rec.channels.index(cfg.channel)], rec.fs)
    else:
        x = data[rec.channels.index(cfg.channel)]

    if banked:
        bank = make_filter_bank(rec.fs, cfg.n_bands)
        stream = apply_filter_bank(x, rec.fs, cfg.n_bands, bank)
    else:
        stream = x

    rows, labels, trial_idx, window_idx = [], [], [], []
    for ti, (start, length, label) in enumerate(rec.trials):
        segment = stream[..., start:start + length]
        pieces = window_slice(segment, rec.fs, cfg.win_s, cfg.step_s, label=label)
        for wi, piece in enumerate(pieces):
            if kind == "complex_spectrum_matrix":
                row = complex_spectrum_matrix(piece)[None]
            elif kind == "complex_spectrogram_tensor":
                row = complex_spectrogram_tensor(piece)[None]
            elif kind == "sub_band_stack":
                row = piece.bands
            elif kind == "complex_spectrogram_single":
                row = complex_spectrogram_single(piece)[None]
            elif kind == "window":
                row = piece.samples[None]
            elif kind == "magnitude_db":
                row = magnitude_db(piece)
            elif kind == "window_raw":
                row = piece.samples
            else:
                raise ValueError(f"unknown feature kind {kind!r}")
            rows.append(row)
            labels.append(label)
            trial_idx.append(ti)
            window_idx.append(wi)
    return FeatureSet(np.stack(rows), np.array(labels, dtype=np.int64),
                      [rec.subject_id] * len(rows),
                      np.array(trial_idx), np.array(window_idx))


def assemble_split(recordings: list[Recording], plan: SplitPlan, kind: str,
                   cfg: PreprocessConfig):
    """Features for one fold: (train, val, test) FeatureSets plus norm stats.

    Normalization statistics come from the train split only; window_raw
    features stay unnormalized (the correlation classifier is scale
    invariant and expects raw signal windows).
    """
    kind = FEATURE_KINDS.get(kind, kind)
    by_id = {rec.subject_id: rec for rec in recordings}
    per_subject = {}
    needed = {plan.test_subject} | {ref[0] for ref in plan.train_refs + plan.val_refs}
    for sid in sorted(needed):
        per_subject[sid] = build_features(by_id[sid], kind, cfg)

    def gather(ref_list):
        keys = set(ref_list)
        xs, ys = [], []
        for sid, fs_ in per_subject.items():
            if plan.granularity == "trial":
                mask = np.array([(sid, ti) in keys for ti in fs_.trial_index])
            else:
                mask = np.array([(sid, ti, wi) in keys
                                 for ti, wi in zip(fs_.trial_index, fs_.window_index)])
            if mask.any():
                xs.append(fs_.x[mask])
                ys.append(fs_.y[mask])
        if not xs:
            raise ValueError("empty split: no windows matched the plan refs")
        return np.concatenate(xs), np.concatenate(ys)

    x_train, y_train = gather(plan.train_refs)
    x_val, y_val = gather(plan.val_refs)
    test = per_subject[plan.test_subject]
    x_test, y_test = test.x, test.y

    assert plan.test_subject not in {ref[0] for ref in plan.train_refs + plan.val_refs}
    if kind == "window_raw":
        stats = None
    else:
        stats = compute_norm_stats(x_train)
        x_train = normalize(x_train, stats)
        x_val = normalize(x_val, stats)
        x_test = normalize(x_test, stats)
    return (x_train, y_train), (x_val, y_val), (x_test, y_test), stats
