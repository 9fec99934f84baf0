"""Embedding datasets, stratified splitting, and the synthetic generator.

Datasets are immutable once constructed: vectors are float32, labels are
integers in {0..K-1}, and every class occurs at least once.  The synthetic
generator places class means on an equidistant simplex under a seeded
random rotation, so linear separability is controlled by the
``center_separation / cluster_spread`` ratio alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StratificationError, ValidationError
from .rng import stream


@dataclass(frozen=True)
class EmbeddingDataset:
    name: str
    vectors: np.ndarray  # (N, d) float32
    labels: np.ndarray   # (N,) int64, values in {0..K-1}
    n_classes: int

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if vectors.ndim != 2:
            raise ValidationError(f"vectors must be 2-D, got shape {vectors.shape}")
        n, d = vectors.shape
        if n < 1 or d < 1:
            raise ValidationError(f"need N >= 1 and d >= 1, got N={n}, d={d}")
        if labels.shape != (n,):
            raise ValidationError(
                f"labels shape {labels.shape} does not match N={n}"
            )
        if self.n_classes < 2:
            raise ValidationError(f"need K >= 2, got K={self.n_classes}")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise ValidationError(
                f"labels must lie in [0, {self.n_classes}), "
                f"got range [{labels.min()}, {labels.max()}]"
            )
        if not np.isfinite(vectors).all():
            raise ValidationError("vectors contain NaN or Inf")
        present = np.bincount(labels, minlength=self.n_classes)
        missing = np.flatnonzero(present == 0)
        if missing.size:
            raise ValidationError(f"classes with no samples: {missing.tolist()}")
        vectors.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class SplitSpec:
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    seed: int
    fractions: tuple[float, float, float]

    def __post_init__(self):
        for name in ("train_idx", "val_idx", "test_idx"):
            idx = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            idx.setflags(write=False)
            object.__setattr__(self, name, idx)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train_idx), len(self.val_idx), len(self.test_idx))


@dataclass(frozen=True)
class SyntheticSpec:
    n_classes: int
    dim: int
    samples_per_class: int
    cluster_spread: float
    center_separation: float
    seed: int
    name: str = ""

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValidationError(f"need K >= 2, got {self.n_classes}")
        if self.dim < 1 or self.samples_per_class < 1:
            raise ValidationError("dim and samples_per_class must be >= 1")
        if self.cluster_spread < 0:
            raise ValidationError("cluster_spread must be >= 0")
        if self.center_separation < 0:
            raise ValidationError("center_separation must be >= 0")
        # K equidistant points need K-1 dimensions.
        if self.dim < self.n_classes - 1:
            raise ValidationError(
                f"dim={self.dim} too small for {self.n_classes} equidistant "
                f"class means (need dim >= K-1)"
            )
        if not self.name:
            object.__setattr__(
                self,
                "name",
                f"synth-k{self.n_classes}-d{self.dim}-s{self.seed}",
            )


def _allocate(total: int, fractions: np.ndarray) -> np.ndarray:
    """Largest-remainder apportionment of `total` items over `fractions`.

    Deviates from exact proportionality by less than one item per bucket;
    remainder ties go to the earlier bucket.
    """
    exact = fractions * total
    counts = np.floor(exact).astype(np.int64)
    remainder = exact - counts
    short = total - counts.sum()
    # stable argsort: equal remainders keep bucket order
    order = np.argsort(-remainder, kind="stable")
    counts[order[:short]] += 1
    return counts


def make_split(
    dataset: EmbeddingDataset,
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> SplitSpec:
    """Stratified train/val/test split, deterministic per (dataset, fractions, seed)."""
    fracs = np.asarray(fractions, dtype=np.float64)
    if fracs.shape != (3,):
        raise ValidationError("fractions must have exactly three entries")
    if (fracs < 0).any() or abs(fracs.sum() - 1.0) > 1e-9:
        raise ValidationError(f"fractions must be nonnegative and sum to 1, got {fractions}")

    nonzero = int((fracs > 0).sum())
    counts = dataset.class_counts()
    too_small = np.flatnonzero(counts < nonzero)
    if too_small.size:
        raise StratificationError(
            f"classes {too_small.tolist()} have fewer samples than the "
            f"{nonzero} nonzero splits"
        )

    parts: list[list[np.ndarray]] = [[], [], []]
    for c in range(dataset.n_classes):
        idx = np.flatnonzero(dataset.labels == c)
        rng = stream(seed, "split", dataset.name, c)
        idx = idx[rng.permutation(len(idx))]
        take = _allocate(len(idx), fracs)
        bounds = np.concatenate([[0], np.cumsum(take)])
        for s in range(3):
            parts[s].append(idx[bounds[s]:bounds[s + 1]])

    train, val, test = (np.sort(np.concatenate(p)) for p in parts)
    return SplitSpec(train, val, test, seed=seed, fractions=tuple(fractions))


def _simplex_means(k: int, dim: int, separation: float, seed: int) -> np.ndarray:
    """K class means in R^dim, all pairwise distances exactly `separation`.

    Centered simplex vertices (pairwise distance sqrt(2)) are expressed in
    their own K-1 dimensional basis, scaled, and pushed through a seeded
    random orthonormal basis of R^dim.
    """
    verts = np.eye(k) - 1.0 / k
    u, s, _ = np.linalg.svd(verts, full_matrices=False)
    coords = u[:, : k - 1] * s[: k - 1]  # (k, k-1), isometric to verts
    coords *= separation / np.sqrt(2.0)

    rng = stream(seed, "synthetic", "rotation")
    gauss = rng.standard_normal((dim, k - 1))
    q, r = np.linalg.qr(gauss)
    q = q * np.sign(np.diag(r))  # fix QR sign ambiguity
    return coords @ q.T  # (k, dim)


def gen_synthetic(spec: SyntheticSpec) -> EmbeddingDataset:
    """Gaussian class clusters around equidistant means; deterministic per seed."""
    k, d, m = spec.n_classes, spec.dim, spec.samples_per_class
    means = _simplex_means(k, d, spec.center_separation, spec.seed)

    rng = stream(spec.seed, "synthetic", "samples")
    noise = rng.standard_normal((k * m, d))
    vectors = np.repeat(means, m, axis=0) + spec.cluster_spread * noise
    labels = np.repeat(np.arange(k, dtype=np.int64), m)
    return EmbeddingDataset(
        name=spec.name,
        vectors=vectors.astype(np.float32),
        labels=labels,
        n_classes=k,
    )
