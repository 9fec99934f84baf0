"""Exact k-nearest-neighbor few-shot probe.

Measures how raw embeddings react to label noise without training a head:
a stratified subsample of the train split gets corrupted labels, an exact
k-NN classifier votes over them, and accuracy is scored on clean test
labels.  Search is brute force (desk-scale N), which keeps predictions
bit-comparable to an independent double-loop oracle.

Tie rules: equal distances prefer the lower training index; tied votes
prefer the class with the nearer neighbor, then the lower class index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EmbeddingDataset, SplitSpec, _allocate
from .errors import ValidationError
from .noise import NoiseSpec
from .rng import stream

_CHUNK_ELEMS = 1 << 24  # cap on queries*train*dim elements per distance block


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5
    subsample_fraction: float = 0.10
    metric: str = "euclidean"
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.subsample_fraction <= 1.0:
            raise ValidationError(
                f"subsample_fraction must lie in (0, 1], got {self.subsample_fraction}"
            )
        if self.metric not in ("euclidean", "cosine"):
            raise ValidationError(f"metric must be euclidean|cosine, got {self.metric!r}")


def _distance_block(queries: np.ndarray, train: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        diff = queries[:, None, :] - train[None, :, :]
        return (diff * diff).sum(axis=-1)
    qn = np.linalg.norm(queries, axis=1, keepdims=True)
    tn = np.linalg.norm(train, axis=1, keepdims=True)
    qn = np.maximum(qn, np.finfo(np.float64).tiny)
    tn = np.maximum(tn, np.finfo(np.float64).tiny)
    return 1.0 - (queries / qn) @ (train / tn).T


def knn_predict(train_vecs, train_labels, query_vecs, k: int, metric: str = "euclidean") -> np.ndarray:
    """Exact k-NN majority vote for each query row."""
    train = np.asarray(train_vecs, dtype=np.float64)
    labels = np.asarray(train_labels, dtype=np.int64)
    queries = np.atleast_2d(np.asarray(query_vecs, dtype=np.float64))
    if train.ndim != 2 or train.shape[0] == 0:
        raise ValidationError("training set must be a non-empty 2-D array")
    if labels.shape != (train.shape[0],):
        raise ValidationError("train_labels length must match training rows")
    if queries.shape[1] != train.shape[1]:
        raise ValidationError("query dimensionality does not match training set")
    if not 1 <= k <= train.shape[0]:
        raise ValidationError(f"need 1 <= k <= |train|={train.shape[0]}, got k={k}")

    n_classes = int(labels.max()) + 1
    out = np.empty(queries.shape[0], dtype=np.int64)
    chunk = max(1, _CHUNK_ELEMS // max(1, train.shape[0] * train.shape[1]))
    for start in range(0, queries.shape[0], chunk):
        block = _distance_block(queries[start:start + chunk], train, metric)
        for row, dists in enumerate(block):
            order = np.argsort(dists, kind="stable")[:k]  # stable: ties -> lower index
            out[start + row] = _vote(labels[order], dists[order], n_classes)
    return out


def _vote(top_labels: np.ndarray, top_dists: np.ndarray, n_classes: int) -> int:
    counts = np.bincount(top_labels, minlength=n_classes)
    winners = np.flatnonzero(counts == counts.max())
    if len(winners) == 1:
        return int(winners[0])
    # tied vote: nearer nearest-neighbor wins, then the lower class index
    return int(min((top_dists[top_labels == c].min(), c) for c in winners)[1])


def stratified_subsample(
    labels: np.ndarray,
    pool: np.ndarray,
    fraction: float,
    seed: int,
    n_classes: int,
) -> np.ndarray:
    """Seeded stratified pick of round(fraction * |pool|) indices from pool."""
    pool = np.asarray(pool, dtype=np.int64)
    total = max(1, int(round(fraction * len(pool))))
    counts = np.bincount(labels[pool], minlength=n_classes).astype(np.float64)
    take = _allocate(total, counts / counts.sum())
    picked = []
    for c in range(n_classes):
        members = pool[labels[pool] == c]
        rng = stream(seed, "knn-subsample", c)
        members = members[rng.permutation(len(members))]
        picked.append(members[: take[c]])
    return np.sort(np.concatenate(picked))


def knn_experiment(
    dataset: EmbeddingDataset,
    split: SplitSpec,
    noise: NoiseSpec,
    cfg: KnnConfig,
) -> float:
    """Few-shot probe accuracy: noisy subsample votes, clean test labels."""
    sub = stratified_subsample(
        dataset.labels, split.train_idx, cfg.subsample_fraction, cfg.seed, dataset.n_classes
    )
    if cfg.k > len(sub):
        raise ValidationError(
            f"k={cfg.k} exceeds subsample size {len(sub)}; "
            f"raise subsample_fraction or lower k"
        )
    noisy = noise.apply(dataset.labels[sub], dataset.n_classes)
    pred = knn_predict(
        dataset.vectors[sub], noisy, dataset.vectors[split.test_idx], cfg.k, cfg.metric
    )
    return float(np.mean(pred == dataset.labels[split.test_idx]))
