"""Classification losses with analytic score-space gradients.

Implements the cross-entropy baseline plus the noise-robust family:
mean absolute error, generalized cross entropy, normalized cross entropy,
reverse cross entropy, and the weighted active-passive combination
alpha*NCE + beta*RCE.  MAE/NCE/RCE satisfy the symmetric-loss identity
(their sum over all class targets is constant in the prediction), which
is what makes them robust to uniform label flips; CCE does not.

All losses evaluate on softmax probabilities clamped to [prob_floor, 1]
and renormalized, so values and gradients stay finite.  Gradients are
taken with respect to pre-softmax scores; coordinates altered by the
clamp receive no gradient through the clamp branch.  Internals run in
float64 so finite-difference checks hold to 1e-4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

LOSS_KINDS = ("cce", "mae", "gce", "nce", "rce", "apl")

DEFAULT_PROB_FLOOR = 1e-7


@dataclass(frozen=True)
class LossSpec:
    kind: str
    q: float = 0.7
    alpha: float = 0.6
    beta: float = 0.4
    A: float = -4.0
    prob_floor: float = DEFAULT_PROB_FLOOR

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValidationError(f"unknown loss {self.kind!r}; choose from {LOSS_KINDS}")
        if not 0.0 < self.q <= 1.0:
            raise ValidationError(f"q must lie in (0, 1], got {self.q}")
        if self.A >= 0:
            raise ValidationError(f"A must be negative, got {self.A}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValidationError("alpha and beta must be positive")
        if not 0.0 < self.prob_floor < 1e-3:
            raise ValidationError(f"prob_floor must lie in (0, 1e-3), got {self.prob_floor}")

    def label(self) -> str:
        if self.kind == "gce":
            return f"gce(q={self.q:g})"
        if self.kind == "apl":
            return f"apl({self.alpha:g},{self.beta:g})"
        return self.kind


@dataclass(frozen=True)
class LossBatch:
    probs: np.ndarray        # (B, K) clamped + renormalized softmax rows
    targets: np.ndarray      # (B,)
    value: float             # mean loss over the batch
    grad_scores: np.ndarray  # (B, K) d(mean loss)/d scores


def clamp_probs(probs: np.ndarray, floor: float = DEFAULT_PROB_FLOOR) -> np.ndarray:
    """Clip rows to [floor, 1] and renormalize back onto the simplex."""
    clipped = np.clip(np.asarray(probs, dtype=np.float64), floor, 1.0)
    return clipped / clipped.sum(axis=-1, keepdims=True)


def _check_targets(targets: np.ndarray, k: int) -> np.ndarray:
    t = np.asarray(targets, dtype=np.int64).reshape(-1)
    if t.size and (t.min() < 0 or t.max() >= k):
        raise ValidationError(f"target out of range for K={k}")
    return t


def _values(spec: LossSpec, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Per-sample loss on already-clamped probability rows."""
    b = np.arange(len(targets))
    p_y = probs[b, targets]
    kind = spec.kind
    if kind == "cce":
        return -np.log(p_y)
    if kind == "mae":
        return 2.0 * (1.0 - p_y)
    if kind == "gce":
        return (1.0 - p_y ** spec.q) / spec.q
    if kind == "nce":
        s = np.log(probs).sum(axis=1)
        return np.log(p_y) / s
    if kind == "rce":
        return -spec.A * (1.0 - p_y)
    # apl
    s = np.log(probs).sum(axis=1)
    nce = np.log(p_y) / s
    rce = -spec.A * (1.0 - p_y)
    return spec.alpha * nce + spec.beta * rce


def _grad_probs(spec: LossSpec, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Per-sample d loss / d probs on already-clamped rows."""
    b = np.arange(len(targets))
    p_y = probs[b, targets]
    grad = np.zeros_like(probs)
    kind = spec.kind
    if kind == "cce":
        grad[b, targets] = -1.0 / p_y
    elif kind == "mae":
        grad[b, targets] = -2.0
    elif kind == "gce":
        grad[b, targets] = -(p_y ** (spec.q - 1.0))
    elif kind == "rce":
        grad[b, targets] = spec.A
    else:  # nce or apl
        s = np.log(probs).sum(axis=1, keepdims=True)
        log_py = np.log(p_y)[:, None]
        grad = -log_py / (probs * s * s)
        grad[b, targets] += s[:, 0] / (p_y * s[:, 0] ** 2)
        if kind == "apl":
            grad *= spec.alpha
            grad[b, targets] += spec.beta * spec.A
    return grad


def loss_values(spec: LossSpec, probs, targets) -> np.ndarray:
    """Per-sample losses for simplex rows (clamped internally)."""
    p = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    t = _check_targets(targets, p.shape[1])
    return _values(spec, clamp_probs(p, spec.prob_floor), t)


def cce(p, y, prob_floor: float = DEFAULT_PROB_FLOOR) -> float:
    return float(loss_values(LossSpec("cce", prob_floor=prob_floor), p, [y])[0])


def mae(p, y, prob_floor: float = DEFAULT_PROB_FLOOR) -> float:
    return float(loss_values(LossSpec("mae", prob_floor=prob_floor), p, [y])[0])


def gce(p, y, q: float = 0.7, prob_floor: float = DEFAULT_PROB_FLOOR) -> float:
    return float(loss_values(LossSpec("gce", q=q, prob_floor=prob_floor), p, [y])[0])


def nce(p, y, prob_floor: float = DEFAULT_PROB_FLOOR) -> float:
    return float(loss_values(LossSpec("nce", prob_floor=prob_floor), p, [y])[0])


def rce(p, y, A: float = -4.0, prob_floor: float = DEFAULT_PROB_FLOOR) -> float:
    return float(loss_values(LossSpec("rce", A=A, prob_floor=prob_floor), p, [y])[0])


def apl(
    p,
    y,
    alpha: float = 0.6,
    beta: float = 0.4,
    A: float = -4.0,
    prob_floor: float = DEFAULT_PROB_FLOOR,
) -> float:
    spec = LossSpec("apl", alpha=alpha, beta=beta, A=A, prob_floor=prob_floor)
    return float(loss_values(spec, p, [y])[0])


def softmax(scores: np.ndarray) -> np.ndarray:
    z = np.asarray(scores, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(spec: LossSpec, scores, targets) -> LossBatch:
    """Mean batch loss and its analytic gradient w.r.t. pre-softmax scores."""
    z = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    if not np.isfinite(z).all():
        raise ValidationError("scores contain NaN or Inf")
    t = _check_targets(targets, z.shape[1])
    if len(t) != z.shape[0]:
        raise ValidationError(f"{z.shape[0]} score rows but {len(t)} targets")

    s = softmax(z)
    clipped = np.clip(s, spec.prob_floor, 1.0)
    total = clipped.sum(axis=1, keepdims=True)
    p = clipped / total

    values = _values(spec, p, t)
    g_p = _grad_probs(spec, p, t)

    # back through renormalization: p = clipped / total
    g_c = (g_p - (g_p * p).sum(axis=1, keepdims=True)) / total
    # back through the clamp: coordinates the clip altered get no gradient
    g_c = g_c * (s >= spec.prob_floor)
    # back through softmax
    g_z = s * (g_c - (g_c * s).sum(axis=1, keepdims=True))

    batch = z.shape[0]
    return LossBatch(
        probs=p,
        targets=t,
        value=float(values.mean()),
        grad_scores=g_z / batch,
    )
