"""Spectral diagnostics of embedding quality.

A representation that separates classes well shows a gap between its K-th
and (K+1)-th singular values and concentrates the label structure in its
prominent singular directions.  Two summary numbers capture this:

* ``gap_ratio`` = sigma_K / sigma_{K+1} of the mean-centered embedding
  matrix (+inf sentinel when the numerical rank is below K+1).
* ``alignment`` in [0, 1]: the fraction of label-correlated data energy
  carried by the top-K singular directions.  With U, s from the SVD of
  the centered matrix and Y the column-normalized one-hot label matrix,
  each direction j contributes s_j^2 * ||U[:,j]^T Y||^2; alignment is the
  top-K share of that total.  Point-mass class clusters score 1 exactly;
  isotropic noise with random labels scores about K/d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EmbeddingDataset
from .errors import ValidationError


@dataclass(frozen=True)
class SpectralReport:
    singular_values: np.ndarray  # descending, nonnegative
    gap_ratio: float             # sigma_K / sigma_{K+1}, +inf when rank deficient
    alignment: float             # label-energy share of the top-K directions, in [0, 1]
    n_prominent: int             # the K used for the gap/alignment
    rank_deficient: bool

    def to_dict(self) -> dict:
        return {
            "singular_values": self.singular_values.tolist(),
            "gap_ratio": self.gap_ratio,
            "alignment": self.alignment,
            "n_prominent": self.n_prominent,
            "rank_deficient": self.rank_deficient,
        }


def spectral_report(
    dataset: EmbeddingDataset,
    indices=None,
    n_prominent: int | None = None,
) -> SpectralReport:
    """Singular spectrum and label alignment of the selected rows.

    `n_prominent` defaults to the dataset's class count.
    """
    k = dataset.n_classes if n_prominent is None else int(n_prominent)
    idx = (
        np.arange(dataset.n_samples, dtype=np.int64)
        if indices is None
        else np.asarray(indices, dtype=np.int64)
    )
    if k < 1:
        raise ValidationError(f"need at least 1 prominent direction, got {k}")
    if len(idx) <= k:
        raise ValidationError(f"need more than {k} rows, got {len(idx)}")
    if dataset.dim < k:
        raise ValidationError(f"dim={dataset.dim} smaller than K={k}")

    x = dataset.vectors[idx].astype(np.float64)
    x -= x.mean(axis=0)
    u, s, _ = np.linalg.svd(x, full_matrices=False)

    labels = dataset.labels[idx]
    counts = np.bincount(labels, minlength=dataset.n_classes).astype(np.float64)
    onehot = np.zeros((len(idx), dataset.n_classes))
    onehot[np.arange(len(idx)), labels] = 1.0
    onehot[:, counts > 0] /= np.sqrt(counts[counts > 0])

    # energy each singular direction carries toward the label matrix
    proj = u.T @ onehot                      # (r, K_classes)
    energy = (s ** 2) * (proj ** 2).sum(axis=1)
    total = energy.sum()
    alignment = float(energy[:k].sum() / total) if total > 0 else 0.0

    rank_tol = max(x.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    rank_deficient = s.size <= k or s[k] <= rank_tol
    if rank_deficient:
        gap = float("inf")
    else:
        gap = float(s[k - 1] / s[k])

    return SpectralReport(
        singular_values=s,
        gap_ratio=gap,
        alignment=min(alignment, 1.0),
        n_prominent=k,
        rank_deficient=bool(rank_deficient),
    )
