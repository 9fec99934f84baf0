"""Classifier-head training on frozen embeddings.

The head is a stack of affine layers with ReLU between them (hidden=[]
gives a pure linear probe).  Training follows a fixed recipe: plain
minibatch SGD, cosine-annealed learning rate, a few warmup epochs under
plain cross entropy before switching to the configured loss, optional
Gaussian embedding augmentation, and early stopping on validation
accuracy with best-weight restore.

Everything is deterministic per (inputs, cfg.seed): shuffling and
augmentation draw from per-epoch derived streams.  Parameters and
activations are float32; scalar metrics accumulate in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import EmbeddingDataset, SplitSpec
from .errors import DivergenceError, ValidationError
from .losses import LossSpec, loss_and_grad
from .rng import stream


@dataclass
class HeadModel:
    weights: list[np.ndarray]  # (fan_in, fan_out) float32 per layer
    biases: list[np.ndarray]   # (fan_out,) float32 per layer

    @property
    def layer_dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "HeadModel":
        return HeadModel(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def scores(self, x: np.ndarray) -> np.ndarray:
        h = np.asarray(x, dtype=np.float32)
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        return h @ self.weights[-1] + self.biases[-1]

    def predict(self, x: np.ndarray) -> np.ndarray:
        # argmax breaks ties toward the lower class index
        return np.argmax(self.scores(x), axis=1)


def init_head(dim: int, n_classes: int, hidden=(512, 256, 128), seed: int = 0) -> HeadModel:
    """Uniform(-1,1)/sqrt(fan_in) weights, zero biases, deterministic per seed."""
    if dim < 1 or n_classes < 2:
        raise ValidationError(f"need dim >= 1 and K >= 2, got {dim}, {n_classes}")
    dims = [int(dim)] + [int(h) for h in hidden] + [int(n_classes)]
    if any(d < 1 for d in dims):
        raise ValidationError(f"layer widths must be >= 1, got {dims}")
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        rng = stream(seed, "init", i)
        scale = 1.0 / math.sqrt(fan_in)
        w = rng.uniform(-scale, scale, size=(fan_in, fan_out))
        weights.append(w.astype(np.float32))
        biases.append(np.zeros(fan_out, dtype=np.float32))
    return HeadModel(weights, biases)


def cosine_lr(t: int, total: int, lr_max: float, lr_min: float = 0.0) -> float:
    """Cosine annealing from lr_max at t=0 down to lr_min at t=total."""
    if total < 1:
        raise ValidationError(f"schedule length must be >= 1, got {total}")
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + math.cos(math.pi * t / total))


@dataclass(frozen=True)
class TrainConfig:
    lr_max: float = 5e-4
    lr_min: float = 0.0
    epochs_max: int = 200
    batch_size: int = 128
    patience: int = 20
    warmup_epochs: int = 5
    aug_sigma: float = 0.0
    seed: int = 0
    shuffle: bool = True
    hidden: tuple[int, ...] = (512, 256, 128)

    def __post_init__(self):
        if not self.lr_max > self.lr_min >= 0:
            raise ValidationError(
                f"need lr_max > lr_min >= 0, got {self.lr_max}, {self.lr_min}"
            )
        if self.batch_size < 1 or self.patience < 1 or self.epochs_max < 1:
            raise ValidationError("batch_size, patience, epochs_max must be >= 1")
        if self.warmup_epochs < 0 or self.aug_sigma < 0:
            raise ValidationError("warmup_epochs and aug_sigma must be >= 0")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))


@dataclass
class TrainRecord:
    lrs: list[float] = field(default_factory=list)
    train_losses: list[float] = field(default_factory=list)
    val_accuracies: list[float] = field(default_factory=list)
    best_epoch: int = -1
    best_val_accuracy: float = -1.0
    stopped_reason: str = ""
    test_accuracy: float = float("nan")

    @property
    def epochs_run(self) -> int:
        return len(self.lrs)

    def to_dict(self) -> dict:
        return {
            "epochs": list(range(self.epochs_run)),
            "lr": self.lrs,
            "train_loss": self.train_losses,
            "val_accuracy": self.val_accuracies,
            "best_epoch": self.best_epoch,
            "best_val_accuracy": self.best_val_accuracy,
            "stopped_reason": self.stopped_reason,
            "test_accuracy": self.test_accuracy,
        }


def _forward_cached(head: HeadModel, x: np.ndarray):
    acts = [np.asarray(x, dtype=np.float32)]
    for w, b in zip(head.weights[:-1], head.biases[:-1]):
        acts.append(np.maximum(acts[-1] @ w + b, 0.0))
    scores = acts[-1] @ head.weights[-1] + head.biases[-1]
    return acts, scores


def sgd_step(head: HeadModel, x: np.ndarray, targets: np.ndarray, spec: LossSpec, lr: float) -> float:
    """One in-place SGD step on a batch; returns the pre-step mean loss."""
    acts, scores = _forward_cached(head, x)
    if not np.isfinite(scores).all():
        raise DivergenceError("non-finite scores in forward pass")
    batch = loss_and_grad(spec, scores, targets)
    delta = batch.grad_scores.astype(np.float32)
    for i in range(len(head.weights) - 1, -1, -1):
        grad_w = acts[i].T @ delta
        grad_b = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ head.weights[i].T) * (acts[i] > 0)
        head.weights[i] -= np.float32(lr) * grad_w
        head.biases[i] -= np.float32(lr) * grad_b
    return batch.value


def evaluate(head: HeadModel, dataset: EmbeddingDataset, indices, labels) -> float:
    """Fraction of argmax predictions matching `labels` on the given rows.

    `labels` may be a full length-N vector (indexed by `indices`) or
    already aligned with `indices`.
    """
    idx = np.asarray(indices, dtype=np.int64)
    lab = np.asarray(labels, dtype=np.int64)
    if lab.shape[0] == dataset.n_samples:
        lab = lab[idx]
    elif lab.shape[0] != idx.shape[0]:
        raise ValidationError(
            f"labels length {lab.shape[0]} matches neither N={dataset.n_samples} "
            f"nor |indices|={idx.shape[0]}"
        )
    if idx.size == 0:
        raise ValidationError("cannot evaluate on an empty index set")
    pred = head.predict(dataset.vectors[idx])
    return float(np.mean(pred == lab))


def train(
    dataset: EmbeddingDataset,
    split: SplitSpec,
    noisy_labels,
    loss: LossSpec,
    cfg: TrainConfig,
    head: HeadModel | None = None,
) -> tuple[HeadModel, TrainRecord]:
    """Full training run; returns the best-epoch model and its record.

    Validation accuracy is measured against the provided (possibly noisy)
    labels; the final test accuracy always uses the dataset's clean labels.
    """
    noisy = np.asarray(noisy_labels, dtype=np.int64)
    if noisy.shape != (dataset.n_samples,):
        raise ValidationError(
            f"noisy_labels must have length N={dataset.n_samples}, got {noisy.shape}"
        )
    if noisy.size and (noisy.min() < 0 or noisy.max() >= dataset.n_classes):
        raise ValidationError("noisy labels out of range for K")
    for idx in (split.train_idx, split.val_idx, split.test_idx):
        if idx.size and (idx.min() < 0 or idx.max() >= dataset.n_samples):
            raise ValidationError("split indices out of range")
    if split.train_idx.size == 0 or split.val_idx.size == 0:
        raise ValidationError("train and val splits must be non-empty")

    if head is None:
        head = init_head(dataset.dim, dataset.n_classes, cfg.hidden, cfg.seed)
    elif head.layer_dims[0] != dataset.dim or head.layer_dims[-1] != dataset.n_classes:
        raise ValidationError(
            f"head dims {head.layer_dims} incompatible with dataset "
            f"d={dataset.dim}, K={dataset.n_classes}"
        )

    warmup_spec = LossSpec("cce", prob_floor=loss.prob_floor)
    train_idx = split.train_idx
    n_train = len(train_idx)
    record = TrainRecord()
    best = head.copy()

    for epoch in range(cfg.epochs_max):
        lr = cosine_lr(epoch, cfg.epochs_max, cfg.lr_max, cfg.lr_min)
        spec = warmup_spec if epoch < cfg.warmup_epochs else loss

        if cfg.shuffle:
            order = stream(cfg.seed, "shuffle", epoch).permutation(n_train)
        else:
            order = np.arange(n_train)
        aug_rng = stream(cfg.seed, "augment", epoch) if cfg.aug_sigma > 0 else None

        loss_sum = 0.0
        for start in range(0, n_train, cfg.batch_size):
            rows = train_idx[order[start:start + cfg.batch_size]]
            x = dataset.vectors[rows]
            if aug_rng is not None:
                x = x + np.float32(cfg.aug_sigma) * aug_rng.standard_normal(
                    x.shape, dtype=np.float32
                )
            try:
                value = sgd_step(head, x, noisy[rows], spec, lr)
            except DivergenceError as err:
                raise DivergenceError(
                    f"epoch {epoch}, batch {start // cfg.batch_size}: {err}",
                    epoch=epoch,
                    batch=start // cfg.batch_size,
                ) from None
            if not math.isfinite(value):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}",
                    epoch=epoch,
                    batch=start // cfg.batch_size,
                )
            loss_sum += value * len(rows)

        val_acc = evaluate(head, dataset, split.val_idx, noisy)
        record.lrs.append(lr)
        record.train_losses.append(loss_sum / n_train)
        record.val_accuracies.append(val_acc)

        if val_acc > record.best_val_accuracy:  # ties keep the earlier epoch
            record.best_val_accuracy = val_acc
            record.best_epoch = epoch
            best = head.copy()

        if epoch - record.best_epoch >= cfg.patience:
            record.stopped_reason = "early-stop"
            break
    else:
        record.stopped_reason = "max-epochs"

    if split.test_idx.size:
        record.test_accuracy = evaluate(best, dataset, split.test_idx, dataset.labels)
    return best, record
