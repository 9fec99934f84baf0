"""Sweep runner: expands a config into trials, runs them, writes tables.

A trial is one (dataset, method, noise, eta, seed) cell.  Each cell derives
its own random seeds from the cell identity, so results do not depend on
execution order, worker count, or which trials ran in an earlier session.
Completed trials are appended to ``trials.jsonl`` as they finish; rerunning
the same config skips cells that already have a successful row, which makes
interrupted sweeps resumable.  Once every cell has a row the runner writes
``results.csv`` (one row per trial, canonically sorted), ``summary.csv``
(mean and sample std over seeds) and ``curves.csv`` (accuracy-vs-eta series
per method).
"""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import DatasetSource, ExperimentConfig, MethodSpec, NoiseTemplate, validate_config
from .data import EmbeddingDataset, SplitSpec, make_split
from .errors import ConfigError, NoiseBenchError
from .knn import knn_experiment
from .rng import derive_seed
from .trainer import train

LEDGER_NAME = "trials.jsonl"
RESULTS_NAME = "results.csv"
SUMMARY_NAME = "summary.csv"
CURVES_NAME = "curves.csv"

RESULT_COLUMNS = (
    "dataset", "method", "noise", "eta", "seed",
    "status", "test_accuracy", "best_val_accuracy", "epochs_run",
)
SUMMARY_COLUMNS = (
    "dataset", "method", "noise", "eta",
    "n_seeds", "mean_acc", "std_acc", "single_seed", "incomplete",
)
CURVE_COLUMNS = ("dataset", "noise", "method", "eta", "mean_acc", "std_acc")


@dataclass(frozen=True)
class TrialKey:
    dataset: str
    method: str
    noise: str
    eta: float
    seed: int

    def as_tuple(self):
        return (self.dataset, self.method, self.noise, self.eta, self.seed)


@dataclass(frozen=True)
class TrialResult:
    key: TrialKey
    status: str                      # ok | failed
    test_accuracy: float = float("nan")
    best_val_accuracy: float | None = None
    epochs_run: int = 0
    wall_time: float = 0.0
    error: str | None = None

    def to_json(self) -> str:
        rec = {
            "dataset": self.key.dataset,
            "method": self.key.method,
            "noise": self.key.noise,
            "eta": self.key.eta,
            "seed": self.key.seed,
            "status": self.status,
            "test_accuracy": self.test_accuracy,
            "best_val_accuracy": self.best_val_accuracy,
            "epochs_run": self.epochs_run,
            "wall_time": self.wall_time,
            "error": self.error,
        }
        return json.dumps(rec, sort_keys=True)

    @staticmethod
    def from_record(rec: dict) -> "TrialResult":
        key = TrialKey(
            dataset=rec["dataset"],
            method=rec["method"],
            noise=rec["noise"],
            eta=float(rec["eta"]),
            seed=int(rec["seed"]),
        )
        return TrialResult(
            key=key,
            status=rec["status"],
            test_accuracy=float(rec["test_accuracy"]),
            best_val_accuracy=(
                None if rec.get("best_val_accuracy") is None
                else float(rec["best_val_accuracy"])
            ),
            epochs_run=int(rec.get("epochs_run", 0)),
            wall_time=float(rec.get("wall_time", 0.0)),
            error=rec.get("error"),
        )


@dataclass(frozen=True)
class TrialTask:
    """Self-contained, picklable description of one trial."""

    key: TrialKey
    source: DatasetSource
    split_fractions: tuple[float, float, float]
    split_seed: int
    method: MethodSpec
    template: NoiseTemplate
    master_seed: int

    def sub_seed(self, purpose: str) -> int:
        return derive_seed(
            self.master_seed, "trial", self.key.dataset, self.key.method,
            self.key.noise, self.key.eta, self.key.seed, purpose,
        )


@dataclass
class SweepOutcome:
    results: list[TrialResult]       # canonical order, one row per cell
    complete: bool                   # every cell has a row
    all_ok: bool                     # ... and every row has status ok
    n_new: int                       # trials executed in this call
    output_dir: Path
    tables: list[Path]
    figures: list[Path]


def expand_trials(cfg: ExperimentConfig) -> list[TrialTask]:
    """All (dataset, method, noise, eta, seed) cells in canonical order."""
    tasks: dict[TrialKey, TrialTask] = {}
    for src in cfg.datasets:
        for method in cfg.methods:
            for tpl in cfg.noise:
                for eta in tpl.etas:
                    for seed in cfg.seeds:
                        key = TrialKey(src.name, method.label, tpl.describe(), eta, seed)
                        tasks[key] = TrialTask(
                            key=key,
                            source=src,
                            split_fractions=cfg.split_fractions,
                            split_seed=cfg.split_seed,
                            method=method,
                            template=tpl,
                            master_seed=cfg.seed,
                        )
    return [tasks[k] for k in sorted(tasks, key=TrialKey.as_tuple)]


# Per-process dataset cache so a worker loads each dataset once.
_DATASET_CACHE: dict = {}


def _dataset_for(task: TrialTask) -> tuple[EmbeddingDataset, SplitSpec]:
    cache_key = (task.source, task.split_fractions, task.split_seed)
    hit = _DATASET_CACHE.get(cache_key)
    if hit is None:
        ds = task.source.load()
        split = make_split(ds, task.split_fractions, task.split_seed)
        hit = (ds, split)
        _DATASET_CACHE[cache_key] = hit
    return hit


def run_trial(task: TrialTask) -> TrialResult:
    """Execute one cell; failures become a failed-status result, not a crash."""
    start = time.perf_counter()
    try:
        ds, split = _dataset_for(task)
        spec = task.template.spec_for(task.key.eta, task.sub_seed("noise"))
        spec.validate_for(ds.n_classes)
        if task.method.kind == "knn":
            cfg_k = dataclasses.replace(task.method.knn, seed=task.sub_seed("knn"))
            acc = knn_experiment(ds, split, spec, cfg_k)
            return TrialResult(
                key=task.key, status="ok", test_accuracy=acc,
                wall_time=time.perf_counter() - start,
            )
        corrupted = spec.apply(ds.labels, ds.n_classes)
        noisy = ds.labels.copy()
        fit_idx = np.concatenate([split.train_idx, split.val_idx])
        noisy[fit_idx] = corrupted[fit_idx]
        cfg_t = dataclasses.replace(task.method.train, seed=task.sub_seed("train"))
        _, record = train(ds, split, noisy, task.method.loss, cfg_t)
        return TrialResult(
            key=task.key, status="ok",
            test_accuracy=record.test_accuracy,
            best_val_accuracy=record.best_val_accuracy,
            epochs_run=record.epochs_run,
            wall_time=time.perf_counter() - start,
        )
    except (NoiseBenchError, OSError) as exc:
        return TrialResult(
            key=task.key, status="failed",
            wall_time=time.perf_counter() - start,
            error=f"{type(exc).__name__}: {exc}",
        )


def read_ledger(path: Path) -> dict[TrialKey, TrialResult]:
    """Last-wins map of trial rows; unparseable lines are skipped."""
    rows: dict[TrialKey, TrialResult] = {}
    if not path.exists():
        return rows
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                result = TrialResult.from_record(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                continue
            rows[result.key] = result
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, columns, rows) -> None:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_results_csv(path: Path, results: list[TrialResult]) -> None:
    rows = [
        (
            r.key.dataset, r.key.method, r.key.noise, r.key.eta, r.key.seed,
            r.status, r.test_accuracy, r.best_val_accuracy, r.epochs_run,
        )
        for r in results
    ]
    _write_csv(path, RESULT_COLUMNS, rows)


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    method: str
    noise: str
    eta: float
    n_seeds: int
    mean_acc: float
    std_acc: float
    single_seed: bool
    incomplete: bool


def summarize(results: list[TrialResult], expected_seeds: int | None = None) -> list[SummaryRow]:
    """Aggregate trials into per-cell mean and sample std over seeds.

    Only successful trials contribute.  A cell with one seed reports std 0
    and is flagged `single_seed`; a cell with fewer successes than
    `expected_seeds` (or with any failures) is flagged `incomplete`.
    """
    groups: dict[tuple, list[TrialResult]] = {}
    for r in results:
        cell = (r.key.dataset, r.key.method, r.key.noise, r.key.eta)
        groups.setdefault(cell, []).append(r)

    rows = []
    for cell in sorted(groups):
        members = groups[cell]
        accs = np.array(
            [r.test_accuracy for r in members if r.status == "ok"], dtype=np.float64
        )
        n_ok = len(accs)
        want = expected_seeds if expected_seeds is not None else len(members)
        if n_ok == 0:
            mean = std = float("nan")
        else:
            mean = float(accs.mean())
            std = 0.0 if n_ok == 1 else float(accs.std(ddof=1))
        rows.append(SummaryRow(
            dataset=cell[0], method=cell[1], noise=cell[2], eta=cell[3],
            n_seeds=n_ok, mean_acc=mean, std_acc=std,
            single_seed=(n_ok == 1), incomplete=(n_ok < want),
        ))
    return rows


def write_summary_csv(path: Path, rows: list[SummaryRow]) -> None:
    _write_csv(path, SUMMARY_COLUMNS, [
        (
            r.dataset, r.method, r.noise, r.eta, r.n_seeds,
            r.mean_acc, r.std_acc, int(r.single_seed), int(r.incomplete),
        )
        for r in rows
    ])


def format_summary_table(rows: list[SummaryRow]) -> str:
    """Human-readable accuracy table, one line per cell, footnoted flags."""
    out = [f"{'dataset':<16} {'method':<12} {'noise':<14} {'eta':>5}  accuracy"]
    notes = set()
    for r in rows:
        if np.isnan(r.mean_acc):
            cell = "(no successful trials)"
        else:
            cell = f"{100 * r.mean_acc:5.1f} +/- {100 * r.std_acc:4.1f}"
        marks = ""
        if r.single_seed:
            marks += "*"
            notes.add("*  single seed: std reported as 0")
        if r.incomplete:
            marks += "!"
            notes.add("!  incomplete cell: some trials missing or failed")
        out.append(
            f"{r.dataset:<16} {r.method:<12} {r.noise:<14} {r.eta:>5.2f}  {cell}{marks}"
        )
    out.extend(sorted(notes))
    return "\n".join(out)


def curve_rows(rows: list[SummaryRow]) -> list[tuple]:
    """Accuracy-vs-eta series, sorted by (dataset, noise, method, eta)."""
    series = [
        (r.dataset, r.noise, r.method, r.eta, r.mean_acc, r.std_acc)
        for r in rows
        if not np.isnan(r.mean_acc)
    ]
    series.sort(key=lambda t: t[:4])
    return series


def write_curves_csv(path: Path, rows: list[SummaryRow]) -> None:
    _write_csv(path, CURVE_COLUMNS, curve_rows(rows))


def run_experiment(
    cfg: ExperimentConfig,
    max_new_trials: int | None = None,
    progress=None,
) -> SweepOutcome:
    """Run (or resume) the sweep described by `cfg`.

    `max_new_trials` caps how many not-yet-successful cells this call
    executes, which emulates an interrupted session.  Final tables and
    figures are written only once every cell has a row.
    """
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("config validation failed:\n  " + "\n  ".join(problems))

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ledger_path = out_dir / LEDGER_NAME

    tasks = expand_trials(cfg)
    done = read_ledger(ledger_path)
    pending = [t for t in tasks if done.get(t.key) is None or done[t.key].status != "ok"]
    to_run = pending if max_new_trials is None else pending[:max_new_trials]

    n_new = 0
    with open(ledger_path, "a", encoding="utf-8") as ledger:
        def record(result: TrialResult) -> None:
            ledger.write(result.to_json() + "\n")
            ledger.flush()
            done[result.key] = result
            if progress is not None:
                progress(result)

        if cfg.parallelism <= 1 or len(to_run) <= 1:
            for task in to_run:
                record(run_trial(task))
                n_new += 1
        else:
            with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
                futures = {pool.submit(run_trial, t): t for t in to_run}
                for fut in as_completed(futures):
                    record(fut.result())
                    n_new += 1

    results = [done[t.key] for t in tasks if t.key in done]
    complete = len(results) == len(tasks)
    all_ok = complete and all(r.status == "ok" for r in results)

    tables: list[Path] = []
    figures: list[Path] = []
    if complete:
        write_results_csv(out_dir / RESULTS_NAME, results)
        summary = summarize(results, expected_seeds=len(cfg.seeds))
        write_summary_csv(out_dir / SUMMARY_NAME, summary)
        write_curves_csv(out_dir / CURVES_NAME, summary)
        tables = [out_dir / RESULTS_NAME, out_dir / SUMMARY_NAME, out_dir / CURVES_NAME]
        if cfg.figures:
            from .report import render_curves

            figures = render_curves(summary, out_dir)

    return SweepOutcome(
        results=results, complete=complete, all_ok=all_ok, n_new=n_new,
        output_dir=out_dir, tables=tables, figures=figures,
    )
