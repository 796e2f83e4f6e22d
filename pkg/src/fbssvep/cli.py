"""Command-line interface: synth, train, eval, compare.

Artifacts are plain files in the output directory:
  {model}_{subject}.ckpt            nn checkpoint (params, stats, meta)
  {model}_{subject}.forest.json     random-forest checkpoint
  {model}_{subject}.history.json    per-epoch train/val loss
  {model}_{subject}.result.json     held-out test metrics for the fold

FBSSVEP_THREADS caps fold parallelism for `train --test-subject all`;
per-fold seeds derive from (base seed, subject id) so results do not
depend on scheduling.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dataio, models, synth
from .core import StimulusTable
from .evaluation import EvalReport, REPORT_FORMAT, accuracy, compare_methods, macro_f1, \
    render_p_matrix, render_summary_table
from .fbcca import FBCCAClassifier, FBCCAConfig
from .forest import ForestConfig, fit_forest, forest_from_dict, forest_to_dict, predict_forest
from .nn import save_checkpoint, train_loop

ALL_KINDS = models.MODEL_KINDS + ("forest", "fbcca")

CLASS_PRESETS = {
    "benchmark2": (12.0, 15.0),
    "portable12": tuple(9.25 + 0.5 * k for k in range(12)),
}


def parse_class_table(spec: str) -> StimulusTable:
    freqs = CLASS_PRESETS.get(spec) or tuple(float(tok) for tok in spec.split(","))
    return StimulusTable.from_frequencies(freqs)


def fold_seed(base_seed: int, subject_id: str) -> int:
    """Stable per-fold seed derived from the base seed and subject id."""
    mix = np.random.SeedSequence([base_seed, zlib.crc32(subject_id.encode())])
    return int(mix.generate_state(1)[0])


def default_preproc(recordings) -> dataio.PreprocessConfig:
    multi = len(recordings[0].channels) > 1
    return dataio.PreprocessConfig(channel=recordings[0].channels[0] if not multi else "Oz",
                                   reference="car" if multi else "bandpass")


# ----------------------------------------------------------------- synth

def fbcca_dataset_accuracy(recordings, table, preproc: dataio.PreprocessConfig,
                           cfg: FBCCAConfig = FBCCAConfig(), subjects=None) -> dict:
    """Per-subject FBCCA accuracy/F1 over every window of the dataset."""
    out = {}
    clf = None
    for rec in recordings:
        if subjects is not None and rec.subject_id not in subjects:
            continue
        feats = dataio.build_features(rec, "window_raw", preproc)
        if clf is None:
            clf = FBCCAClassifier(table, rec.fs, feats.x.shape[1], cfg)
        preds = np.array([clf.classify(w) for w in feats.x])
        out[rec.subject_id] = (accuracy(preds, feats.y),
                               macro_f1(preds, feats.y, table.n_classes))
    return out


def cmd_synth(args) -> int:
    table = parse_class_table(args.classes)
    cfg = synth.SynthConfig(table=table, white_sigma=args.snr, pink_sigma=args.pink_sigma,
                            trial_seconds=args.trial_seconds, seed=args.seed)
    if args.sweep:
        preproc = dataio.PreprocessConfig(channel="Oz", reference="bandpass")
        print("sigma  fbcca_accuracy_pct")
        for sigma in (float(s) for s in args.sweep.split(",")):
            cfg_s = synth.SynthConfig(table=table, white_sigma=sigma,
                                      pink_sigma=args.pink_sigma,
                                      trial_seconds=args.trial_seconds, seed=args.seed)
            recs = synth.generate_dataset(args.subjects, args.trials_per_class, cfg_s)
            per = fbcca_dataset_accuracy(recs, table, preproc)
            mean_acc = 100.0 * np.mean([a for a, _ in per.values()])
            print(f"{sigma:<6g} {mean_acc:.1f}")
        return 0
    recordings = synth.generate_dataset(args.subjects, args.trials_per_class, cfg)
    manifest = dataio.save_dataset(recordings, table, args.out, name=f"synth-{args.classes}")
    n_trials = sum(len(r.trials) for r in recordings)
    print(f"wrote {manifest}: {len(recordings)} subjects, {table.n_classes} classes, "
          f"{n_trials} trials")
    return 0


# ----------------------------------------------------------------- train

def train_fold(manifest_path, kind: str, test_subject: str, out_dir, base_seed: int,
               overrides: dict | None = None) -> dict:
    """Train (or directly evaluate) one leave-one-subject-out fold."""
    recordings, table = dataio.load_dataset(manifest_path)
    preproc = default_preproc(recordings)
    seed = fold_seed(base_seed, test_subject)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = out_dir / f"{kind}_{test_subject}"
    meta = dict(test_subject=test_subject, seed=seed, base_seed=base_seed,
                dataset=str(manifest_path), preproc=preproc.to_dict())

    plan = dataio.loso_split(recordings, test_subject, seed=seed)

    if kind == "fbcca":
        per = fbcca_dataset_accuracy(recordings, table, preproc, subjects={test_subject})
        acc, f1 = per[test_subject]
        result = dict(method=kind, test_subject=test_subject, accuracy_pct=100.0 * acc,
                      macro_f1=f1, seed=seed)
        (stem.parent / f"{stem.name}.result.json").write_text(json.dumps(result, indent=1))
        return result

    train_set, val_set, test_set, stats = dataio.assemble_split(recordings, plan, kind, preproc)

    if kind == "forest":
        fcfg = ForestConfig(n_trees=(overrides or {}).get("n_trees", 100),
                            max_features=(overrides or {}).get("max_features", 11),
                            seed=seed)
        forest = fit_forest(train_set[0], train_set[1], fcfg, n_classes=table.n_classes)
        preds = predict_forest(forest, test_set[0])
        payload = dict(format="fbssvep-forest/1", norm_stats=list(stats), meta=meta,
                       **forest_to_dict(forest))
        (stem.parent / f"{stem.name}.forest.json").write_text(json.dumps(payload))
    else:
        model = models.build_model(kind, table.n_classes, seed=seed)
        cfg = models.default_train_config(kind, table.n_classes, seed=seed)
        for key, value in (overrides or {}).items():
            if value is not None and hasattr(cfg, key):
                setattr(cfg, key, value)
        history = train_loop(model, train_set, val_set, cfg)
        preds = model.predict(test_set[0])
        save_checkpoint(f"{stem}.ckpt", model, norm_stats=stats, meta=meta)
        (stem.parent / f"{stem.name}.history.json").write_text(
            json.dumps(history.to_dict(), indent=1))

    acc = accuracy(preds, test_set[1])
    f1 = macro_f1(preds, test_set[1], table.n_classes)
    result = dict(method=kind, test_subject=test_subject, accuracy_pct=100.0 * acc,
                  macro_f1=f1, seed=seed)
    (stem.parent / f"{stem.name}.result.json").write_text(json.dumps(result, indent=1))
    return result


def cmd_train(args) -> int:
    recordings, _ = dataio.load_dataset(args.data)
    ids = [r.subject_id for r in recordings]
    subjects = ids if args.test_subject == "all" else [args.test_subject]
    for sid in subjects:
        if sid not in ids:
            raise ValueError(f"unknown test subject {sid!r}; dataset has {ids}")
    overrides = dict(max_epochs=args.max_epochs, patience=args.patience,
                     batch_size=args.batch_size, lr=args.lr)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    threads = int(os.environ.get("FBSSVEP_THREADS", "1"))
    jobs = [(args.data, args.model, sid, args.out, args.seed, overrides) for sid in subjects]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_train_fold_star, jobs))
    else:
        results = [_train_fold_star(job) for job in jobs]
    for res in results:
        print(f"{res['method']} {res['test_subject']}: "
              f"accuracy {res['accuracy_pct']:.1f}% f1 {res['macro_f1']:.3f}")
    return 0


def _train_fold_star(job):
    return train_fold(*job)


# ----------------------------------------------------------------- eval

def _evaluate_checkpoint(path: Path, recordings, table) -> dict:
    by_id = {r.subject_id: r for r in recordings}
    if path.suffix == ".ckpt":
        model, stats, meta = models.load_model(path)
        preproc = dataio.PreprocessConfig(**meta["preproc"])
        rec = by_id[meta["test_subject"]]
        feats = dataio.build_features(rec, model.feature_kind, preproc)
        from .spectral import normalize
        preds = model.predict(normalize(feats.x, stats))
        kind = model.kind
    else:  # forest checkpoint
        payload = json.loads(path.read_text())
        forest = forest_from_dict(payload)
        meta = payload["meta"]
        preproc = dataio.PreprocessConfig(**meta["preproc"])
        rec = by_id[meta["test_subject"]]
        feats = dataio.build_features(rec, "magnitude_db", preproc)
        from .spectral import normalize
        preds = predict_forest(forest, normalize(feats.x, tuple(payload["norm_stats"])))
        kind = "forest"
    return dict(method=kind, test_subject=meta["test_subject"],
                accuracy_pct=100.0 * accuracy(preds, feats.y),
                macro_f1=macro_f1(preds, feats.y, table.n_classes))


def cmd_eval(args) -> int:
    recordings, table = dataio.load_dataset(args.data)
    ckpt_dir = Path(args.checkpoints)
    rows = []
    for path in sorted(ckpt_dir.glob("*.ckpt")) + sorted(ckpt_dir.glob("*.forest.json")):
        rows.append(_evaluate_checkpoint(path, recordings, table))
    for path in sorted(ckpt_dir.glob("fbcca_*.result.json")):
        rows.append(json.loads(path.read_text()))

    by_method: dict[str, dict[str, tuple]] = {}
    for row in rows:
        by_method.setdefault(row["method"], {})[row["test_subject"]] = (
            row["accuracy_pct"], row["macro_f1"])

    if args.subjects:
        want = ([r.subject_id for r in recordings] if args.subjects == "all"
                else args.subjects.split(","))
        for method, per in by_method.items():
            missing = [s for s in want if s not in per]
            if missing:
                raise ValueError(f"{method}: no checkpoint for subjects {missing}")
    if not by_method:
        raise ValueError(f"no checkpoints found in {ckpt_dir}")

    reports = []
    for method, per in sorted(by_method.items()):
        subjects = sorted(per)
        reports.append(EvalReport(method, subjects,
                                  [per[s][0] for s in subjects],
                                  [per[s][1] for s in subjects]))
    print(render_summary_table(reports))
    out_dir = Path(args.out) if args.out else ckpt_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    for report in reports:
        path = out_dir / f"report_{report.method}.json"
        path.write_text(json.dumps(report.to_dict(), indent=1))
        print(f"wrote {path}")
    return 0


# ----------------------------------------------------------------- compare

def cmd_compare(args) -> int:
    reports = [EvalReport.from_dict(json.loads(Path(p).read_text())) for p in args.reports]
    subject_lists = {tuple(r.subjects) for r in reports}
    if len(subject_lists) != 1:
        raise ValueError("reports cover different subject lists; cannot pair them")
    results = {r.method: np.asarray(r.accuracy_pct) for r in reports}
    names, matrix = compare_methods(results)
    print(render_summary_table(reports))
    print()
    print(render_p_matrix(names, matrix))
    if args.out:
        payload = dict(
            format="fbssvep-compare/1",
            methods=names,
            p_values=[[("degenerate" if isinstance(v, float) and np.isnan(v) else v)
                       for v in row] for row in matrix],
            summary={r.method: dict(mean_accuracy=float(np.mean(r.accuracy_pct)),
                                    accuracy_std=float(np.std(r.accuracy_pct)),
                                    mean_f1=float(np.mean(r.f1)),
                                    f1_std=float(np.std(r.f1)))
                     for r in reports},
        )
        Path(args.out).write_text(json.dumps(payload, indent=1))
        print(f"wrote {args.out}")
    return 0


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fbssvep",
                                     description="Filter-bank SSVEP classification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--subjects", type=int, default=20)
    p.add_argument("--classes", default="benchmark2",
                   help="preset (benchmark2, portable12) or comma-separated Hz list")
    p.add_argument("--snr", type=float, default=0.0, help="white noise sigma")
    p.add_argument("--pink-sigma", type=float, default=0.0)
    p.add_argument("--trials-per-class", type=int, default=2)
    p.add_argument("--trial-seconds", type=float, default=2.0)
    p.add_argument("--out", default="dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweep", default="",
                   help="comma-separated sigmas; print FBCCA accuracy per sigma instead")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("train", help="train one model per held-out subject")
    p.add_argument("--data", required=True, help="dataset manifest path")
    p.add_argument("--model", required=True, choices=ALL_KINDS)
    p.add_argument("--test-subject", required=True, help="subject id or 'all'")
    p.add_argument("--out", default="runs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate checkpoints into per-method reports")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoints", required=True)
    p.add_argument("--subjects", default="",
                   help="'all' or comma list; error if a checkpoint is missing")
    p.add_argument("--out", default="")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("compare", help="pairwise Wilcoxon comparison of reports")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--out", default="")
    p.set_defaults(fn=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # CLI contract: nonzero exit on any reported error
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
