"""Figure rendering for sweep summaries, training records and spectra.

Plots are written as PNG files next to the CSV tables.  The Agg backend is
forced so rendering works headless.
"""

from __future__ import annotations

import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", text).strip("-") or "x"


def render_curves(summary_rows, out_dir) -> list[Path]:
    """One accuracy-vs-eta figure per (dataset, noise) pair."""
    out_dir = Path(out_dir)
    panels: dict[tuple[str, str], dict[str, list]] = {}
    for row in summary_rows:
        if np.isnan(row.mean_acc):
            continue
        panel = panels.setdefault((row.dataset, row.noise), {})
        panel.setdefault(row.method, []).append((row.eta, row.mean_acc, row.std_acc))

    paths = []
    for (dataset, noise), methods in sorted(panels.items()):
        fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
        for method in sorted(methods):
            pts = sorted(methods[method])
            etas = [p[0] for p in pts]
            means = [100 * p[1] for p in pts]
            stds = [100 * p[2] for p in pts]
            ax.errorbar(etas, means, yerr=stds, marker="o", capsize=3, label=method)
        ax.set_xlabel("label noise rate")
        ax.set_ylabel("test accuracy (%)")
        ax.set_title(f"{dataset} under {noise} noise")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / f"curve_{_slug(dataset)}_{_slug(noise)}.png"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths


def render_history(record, path) -> Path:
    """Loss, validation accuracy and learning rate across one training run."""
    path = Path(path)
    epochs = np.arange(1, record.epochs_run + 1)
    fig, axes = plt.subplots(1, 3, figsize=(11.0, 3.4), dpi=120)

    axes[0].plot(epochs, record.train_losses)
    axes[0].set_title("train loss")
    axes[1].plot(epochs, [100 * a for a in record.val_accuracies])
    if record.best_epoch >= 0:
        axes[1].axvline(record.best_epoch + 1, color="gray", ls="--", lw=1)
    axes[1].set_title("val accuracy (%)")
    axes[2].plot(epochs, record.lrs)
    axes[2].set_title("learning rate")
    for ax in axes:
        ax.set_xlabel("epoch")
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_spectrum(report, path, max_bars: int = 60) -> Path:
    """Singular-value profile with the prominent-direction cutoff marked."""
    path = Path(path)
    s = np.asarray(report.singular_values)[:max_bars]
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    ax.bar(np.arange(1, len(s) + 1), s, width=0.8)
    ax.axvline(report.n_prominent + 0.5, color="red", ls="--", lw=1)
    ax.set_xlabel("singular value index")
    ax.set_ylabel("singular value")
    gap = "inf" if np.isinf(report.gap_ratio) else f"{report.gap_ratio:.3g}"
    ax.set_title(f"gap ratio {gap}, alignment {report.alignment:.3f}")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
