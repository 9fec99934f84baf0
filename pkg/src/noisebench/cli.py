"""Command-line interface.

Subcommands cover the whole workflow: synthesize a dataset, corrupt its
labels, train a head or run the k-NN probe, inspect spectra, and drive
config-file sweeps.  Figure-producing paths write PNGs next to the CSVs.

Exit codes: 0 success, 1 usage or validation error, 2 sweep stopped before
every trial ran, 3 sweep finished but some trials failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import default_parallelism, load_config
from .data import EmbeddingDataset, SyntheticSpec, gen_synthetic, make_split
from .errors import NoiseBenchError
from .io import load_csv, load_emb1, save_csv, save_emb1
from .knn import KnnConfig, knn_experiment
from .losses import LOSS_KINDS, LossSpec
from .noise import NoiseSpec, PRESET_NAMES, TransitionMatrix, flip_mask
from .runner import format_summary_table, run_experiment, summarize
from .spectral import spectral_report
from .trainer import TrainConfig, train


def _load_dataset(path: str) -> EmbeddingDataset:
    p = Path(path)
    if p.suffix.lower() == ".csv":
        return load_csv(p)
    return load_emb1(p)


def _save_dataset(ds: EmbeddingDataset, path: str) -> None:
    p = Path(path)
    if p.suffix.lower() == ".csv":
        save_csv(ds, p)
    else:
        save_emb1(ds, p)


def _noise_spec(args, seed: int) -> NoiseSpec:
    matrix = None
    if getattr(args, "matrix_file", None):
        rows = np.loadtxt(args.matrix_file, delimiter=",", dtype=np.float64, ndmin=2)
        matrix = TransitionMatrix(rows)
    return NoiseSpec(
        kind=args.noise, eta=args.eta, seed=seed,
        preset=getattr(args, "preset", None), matrix=matrix,
    )


def _add_noise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--noise", choices=("uniform", "asymmetric"), default="uniform")
    p.add_argument("--eta", type=float, default=0.0, help="label noise rate")
    p.add_argument("--preset", choices=PRESET_NAMES, help="asymmetric preset")
    p.add_argument("--matrix-file", help="CSV transition matrix for asymmetric noise")


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--fractions", type=float, nargs=3, default=(0.8, 0.1, 0.1),
        metavar=("TRAIN", "VAL", "TEST"),
    )
    p.add_argument("--split-seed", type=int, default=0)


def cmd_gen(args) -> int:
    spec = SyntheticSpec(
        n_classes=args.classes, dim=args.dim, samples_per_class=args.per_class,
        cluster_spread=args.spread, center_separation=args.separation,
        seed=args.seed, name=args.name or "",
    )
    ds = gen_synthetic(spec)
    _save_dataset(ds, args.out)
    print(f"wrote {args.out}: {ds.n_samples} x {ds.dim}, K={ds.n_classes}")
    return 0


def cmd_info(args) -> int:
    ds = _load_dataset(args.data)
    counts = ds.class_counts()
    print(f"name      {ds.name}")
    print(f"samples   {ds.n_samples}")
    print(f"dim       {ds.dim}")
    print(f"classes   {ds.n_classes}")
    print(f"counts    {counts.tolist()}")
    return 0


def cmd_noise(args) -> int:
    ds = _load_dataset(args.data)
    spec = _noise_spec(args, args.seed)
    spec.validate_for(ds.n_classes)
    noisy = spec.apply(ds.labels, ds.n_classes)
    mask = flip_mask(ds.labels, noisy)
    lines = ["clean,noisy,flip"]
    lines += [f"{c},{n},{int(f)}" for c, n, f in zip(ds.labels, noisy, mask)]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.dataset_out:
        _save_dataset(
            EmbeddingDataset(ds.name, ds.vectors, noisy, ds.n_classes),
            args.dataset_out,
        )
    frac = float(mask.mean())
    print(f"wrote {args.out}: flipped {frac:.4f} of {ds.n_samples} labels")
    return 0


def cmd_train(args) -> int:
    ds = _load_dataset(args.data)
    split = make_split(ds, tuple(args.fractions), args.split_seed)
    spec = _noise_spec(args, args.seed)
    spec.validate_for(ds.n_classes)

    corrupted = spec.apply(ds.labels, ds.n_classes)
    noisy = ds.labels.copy()
    fit_idx = np.concatenate([split.train_idx, split.val_idx])
    noisy[fit_idx] = corrupted[fit_idx]

    loss = LossSpec(
        kind=args.loss, q=args.q, alpha=args.alpha, beta=args.beta, A=args.A
    )
    cfg = TrainConfig(
        lr_max=args.lr_max, lr_min=args.lr_min, epochs_max=args.epochs,
        batch_size=args.batch_size, patience=args.patience,
        warmup_epochs=args.warmup, aug_sigma=args.aug_sigma,
        seed=args.seed, hidden=tuple(args.hidden),
    )
    _, record = train(ds, split, noisy, loss, cfg)
    print(json.dumps(record.to_dict(), indent=2))
    print(
        f"{loss.label()}: test acc {record.test_accuracy:.4f}, "
        f"best val {record.best_val_accuracy:.4f} at epoch {record.best_epoch + 1}, "
        f"{record.epochs_run} epochs ({record.stopped_reason})",
        file=sys.stderr,
    )
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["epoch,lr,train_loss,val_accuracy"]
        lines += [
            f"{e},{lr!r},{tl!r},{va!r}"
            for e, (lr, tl, va) in enumerate(
                zip(record.lrs, record.train_losses, record.val_accuracies)
            )
        ]
        (out / "history.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        from .report import render_history

        render_history(record, out / "history.png")
        print(f"wrote {out / 'history.csv'} and {out / 'history.png'}", file=sys.stderr)
    return 0


def cmd_knn(args) -> int:
    ds = _load_dataset(args.data)
    split = make_split(ds, tuple(args.fractions), args.split_seed)
    spec = _noise_spec(args, args.seed)
    spec.validate_for(ds.n_classes)
    cfg = KnnConfig(
        k=args.k, subsample_fraction=args.fraction, metric=args.metric, seed=args.seed
    )
    acc = knn_experiment(ds, split, spec, cfg)
    print(f"knn-{args.k} ({args.metric}): test acc {acc:.4f}")
    return 0


def cmd_spectral(args) -> int:
    ds = _load_dataset(args.data)
    report = spectral_report(ds, n_prominent=args.k)
    print(json.dumps(report.to_dict(), indent=2))
    if args.fig:
        from .report import render_spectrum

        render_spectrum(report, args.fig)
        print(f"wrote {args.fig}", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    from .config import validate_config

    cfg = load_config(args.config)
    problems = validate_config(cfg)
    if problems:
        for p in problems:
            print(f"problem: {p}", file=sys.stderr)
        return 1
    n = len(cfg.datasets) * len(cfg.methods)
    n_cells = sum(len(t.etas) for t in cfg.noise) * n * len(cfg.seeds)
    print(f"config ok: {n_cells} trials")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.output_dir:
        overrides["output_dir"] = args.output_dir
    if args.parallelism is not None:
        overrides["parallelism"] = args.parallelism
    if args.no_figures:
        overrides["figures"] = False
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)

    def progress(result):
        k = result.key
        if result.status == "ok":
            print(
                f"ok   {k.dataset}/{k.method} {k.noise} eta={k.eta} seed={k.seed} "
                f"acc={result.test_accuracy:.4f} ({result.wall_time:.1f}s)"
            )
        else:
            print(
                f"FAIL {k.dataset}/{k.method} {k.noise} eta={k.eta} seed={k.seed}: "
                f"{result.error}",
                file=sys.stderr,
            )

    outcome = run_experiment(
        cfg,
        max_new_trials=args.max_new_trials,
        progress=None if args.quiet else progress,
    )
    if not outcome.complete:
        remaining = (
            len(cfg.datasets) * len(cfg.methods) * len(cfg.seeds)
            * sum(len(t.etas) for t in cfg.noise) - len(outcome.results)
        )
        print(f"stopped early: {remaining} trials remaining; rerun to resume")
        return 2
    print(format_summary_table(summarize(outcome.results, expected_seeds=len(cfg.seeds))))
    for path in outcome.tables + outcome.figures:
        print(f"wrote {path}")
    return 0 if outcome.all_ok else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisebench",
        description="Label-noise robustness workbench for embedding datasets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="synthesize a Gaussian-cluster dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--separation", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="")
    p.add_argument("--out", required=True, help=".emb1 or .csv path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("info", help="print dataset header and class counts")
    p.add_argument("data")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("noise", help="corrupt a dataset's labels")
    p.add_argument("data")
    p.add_argument("--out", required=True, help="CSV of clean,noisy,flip columns")
    p.add_argument("--dataset-out", help="also write the corrupted dataset here")
    p.add_argument("--seed", type=int, default=0)
    _add_noise_flags(p)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("train", help="train a classifier head on noisy labels")
    p.add_argument("data")
    p.add_argument("--loss", choices=LOSS_KINDS, default="cce")
    p.add_argument("--q", type=float, default=0.7)
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--beta", type=float, default=0.4)
    p.add_argument("--A", type=float, default=-4.0)
    p.add_argument("--lr-max", type=float, default=5e-4)
    p.add_argument("--lr-min", type=float, default=0.0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--patience", type=int, default=20)
    p.add_argument("--warmup", type=int, default=5)
    p.add_argument("--aug-sigma", type=float, default=0.0)
    p.add_argument("--hidden", type=int, nargs="*", default=(512, 256, 128))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", help="write history.csv and history.png here")
    _add_noise_flags(p)
    _add_split_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("knn", help="few-shot k-NN probe on a noisy subsample")
    p.add_argument("data")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--fraction", type=float, default=0.10)
    p.add_argument("--metric", choices=("euclidean", "cosine"), default="euclidean")
    p.add_argument("--seed", type=int, default=0)
    _add_noise_flags(p)
    _add_split_flags(p)
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("spectral", help="singular spectrum diagnostics")
    p.add_argument("data")
    p.add_argument("--k", type=int, help="prominent-direction count (default: K)")
    p.add_argument("--fig", help="write a spectrum PNG here")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("validate", help="check a sweep config without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="run or resume a sweep config")
    p.add_argument("config")
    p.add_argument("-o", "--output-dir")
    p.add_argument(
        "-j", "--parallelism", type=int, default=None,
        help=f"worker processes (default: config value or NOISEBENCH_PARALLELISM, "
        f"currently {default_parallelism()})",
    )
    p.add_argument("--max-new-trials", type=int, default=None)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoiseBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
