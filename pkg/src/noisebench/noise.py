"""Synthetic label corruption: uniform noise and transition-matrix noise.

Uniform noise keeps a label with probability 1-eta and otherwise flips it
to one of the K-1 other classes with probability eta/(K-1) each.  Rates
above (K-1)/K are rejected: past that point some wrong class would carry
more mass than the true one.  Asymmetric noise draws the new label from
the row of a row-stochastic transition matrix; the three built-in presets
mirror the confusable-class structure of common histopathology benchmarks.

Corruption is per-sample i.i.d. (no exact-count flipping), functional
(inputs untouched), and deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoiseRateError, ValidationError
from .rng import stream

ROW_SUM_TOL = 1e-9

NCT_CLASSES = ("ADI", "BACK", "DEB", "LYM", "MUC", "MUS", "NORM", "STR", "TUM")
BACH_CLASSES = ("Benign", "CIS", "CI", "Normal")
LC25000_CLASSES = ("ColonACA", "BenignColon", "LungACA", "BenignLung", "LungSCC")

# Off-diagonal structure of each preset: row class -> targets receiving an
# equal share of eta.  Diagonals are 1-eta.
_PRESET_FLOWS = {
    "nct-crc": (
        NCT_CLASSES,
        {
            "ADI": ("MUS", "NORM"),
            "BACK": ("DEB", "LYM", "MUC"),
            "DEB": ("BACK", "LYM", "MUC"),
            "LYM": ("BACK", "DEB", "MUC"),
            "MUC": ("BACK", "DEB", "LYM"),
            "MUS": ("ADI", "NORM"),
            "NORM": ("ADI", "MUS"),
            "STR": ("TUM",),
            "TUM": ("STR",),
        },
    ),
    "bach": (
        BACH_CLASSES,
        {
            "Benign": ("CIS",),
            "CIS": ("Benign", "CI"),
            "CI": ("CIS", "Normal"),
            "Normal": ("CI",),
        },
    ),
    "lc25000": (
        LC25000_CLASSES,
        {
            "ColonACA": ("BenignColon", "LungACA"),
            "BenignColon": ("ColonACA", "BenignLung"),
            "LungACA": ("ColonACA", "LungSCC"),
            "BenignLung": ("BenignColon",),
            "LungSCC": ("LungACA",),
        },
    ),
}

PRESET_NAMES = tuple(_PRESET_FLOWS)


@dataclass(frozen=True)
class TransitionMatrix:
    rows: np.ndarray  # (K, K) float64, row-stochastic
    preset_name: str | None = None
    class_names: tuple[str, ...] | None = None

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
            raise ValidationError(f"transition matrix must be square, got {rows.shape}")
        if rows.shape[0] < 2:
            raise ValidationError("transition matrix needs K >= 2")
        if (rows < 0).any():
            raise ValidationError("transition matrix has negative entries")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise ValidationError(
                f"rows {bad.tolist()} do not sum to 1 (sums {sums[bad].tolist()})"
            )
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def k(self) -> int:
        return self.rows.shape[0]


def preset_matrix(name: str, eta: float) -> TransitionMatrix:
    """One of the built-in confusion presets with `eta` substituted."""
    if name not in _PRESET_FLOWS:
        raise ValidationError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"preset eta must lie in [0, 1], got {eta}")
    classes, flows = _PRESET_FLOWS[name]
    index = {c: i for i, c in enumerate(classes)}
    k = len(classes)
    rows = np.zeros((k, k), dtype=np.float64)
    for cls, targets in flows.items():
        i = index[cls]
        rows[i, i] = 1.0 - eta
        for t in targets:
            rows[i, index[t]] = eta / len(targets)
    return TransitionMatrix(rows, preset_name=name, class_names=classes)


def uniform_matrix(k: int, eta: float) -> TransitionMatrix:
    """Transition matrix equivalent of uniform noise at rate eta."""
    rows = np.full((k, k), eta / (k - 1), dtype=np.float64)
    np.fill_diagonal(rows, 1.0 - eta)
    return TransitionMatrix(rows)


def _check_uniform_rate(eta: float, k: int) -> None:
    if eta < 0:
        raise ValidationError(f"noise rate must be >= 0, got {eta}")
    bound = (k - 1) / k
    if eta > bound:
        raise NoiseRateError(
            f"uniform eta={eta} exceeds (K-1)/K = {bound} for K={k}"
        )


def _sample_rows(labels: np.ndarray, rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draw from each label's matrix row; one uniform per sample.

    Boundary ties resolve toward the lower class index; zero-mass entries
    are never selected.
    """
    cdf = np.cumsum(rows, axis=1)
    cdf[:, -1] = 1.0  # guard against cumulative rounding
    u = rng.random(len(labels))
    picked = (cdf[labels] < u[:, None]).sum(axis=1)
    picked = np.minimum(picked, rows.shape[1] - 1)
    # u == 0.0 would otherwise land on a leading zero-mass class
    first_nz = (rows > 0).argmax(axis=1)
    return np.maximum(picked, first_nz[labels]).astype(np.int64)


def _as_label_array(labels) -> np.ndarray:
    arr = np.ascontiguousarray(labels, dtype=np.int64)
    if arr.ndim != 1:
        raise ValidationError(f"labels must be 1-D, got shape {arr.shape}")
    return arr


def inject_uniform(labels, n_classes: int, eta: float, seed: int) -> np.ndarray:
    """Corrupt labels with uniform noise at rate eta; returns a new vector."""
    arr = _as_label_array(labels)
    _check_uniform_rate(eta, n_classes)
    if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
        raise ValidationError("labels out of range for K")
    if eta == 0.0:
        return arr.copy()
    rng = stream(seed, "noise", "uniform", eta)
    return _sample_rows(arr, uniform_matrix(n_classes, eta).rows, rng)


def inject_asymmetric(labels, matrix: TransitionMatrix, seed: int) -> np.ndarray:
    """Corrupt labels by drawing from each label's transition-matrix row."""
    arr = _as_label_array(labels)
    if arr.size and (arr.min() < 0 or arr.max() >= matrix.k):
        raise ValidationError(f"labels out of range for K={matrix.k}")
    rng = stream(seed, "noise", "asymmetric", matrix.preset_name or "custom")
    return _sample_rows(arr, matrix.rows, rng)


def flip_mask(clean, noisy) -> np.ndarray:
    """Boolean vector, true exactly where the two label vectors differ."""
    a = _as_label_array(clean)
    b = _as_label_array(noisy)
    if a.shape != b.shape:
        raise ValidationError("clean/noisy label vectors differ in length")
    return a != b


@dataclass(frozen=True)
class NoiseSpec:
    """Config-level description of a corruption process.

    kind "uniform" uses `eta`; kind "asymmetric" uses a preset name or an
    explicit matrix (eta recorded for bookkeeping).
    """

    kind: str
    eta: float
    seed: int = 0
    preset: str | None = None
    matrix: TransitionMatrix | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "asymmetric"):
            raise ValidationError(f"noise kind must be uniform|asymmetric, got {self.kind!r}")
        if self.kind == "uniform":
            if self.eta < 0:
                raise ValidationError(f"eta must be >= 0, got {self.eta}")
        else:
            if self.preset is None and self.matrix is None:
                raise ValidationError("asymmetric noise needs a preset name or a matrix")

    def resolve_matrix(self) -> TransitionMatrix | None:
        if self.kind == "uniform":
            return None
        if self.matrix is not None:
            return self.matrix
        return preset_matrix(self.preset, self.eta)

    def validate_for(self, n_classes: int) -> None:
        if self.kind == "uniform":
            _check_uniform_rate(self.eta, n_classes)
        else:
            m = self.resolve_matrix()
            if m.k != n_classes:
                raise ValidationError(
                    f"transition matrix is {m.k}x{m.k} but dataset has K={n_classes}"
                )

    def apply(self, labels, n_classes: int, seed: int | None = None) -> np.ndarray:
        s = self.seed if seed is None else seed
        if self.kind == "uniform":
            return inject_uniform(labels, n_classes, self.eta, s)
        m = self.resolve_matrix()
        if m.k != n_classes:
            raise ValidationError(
                f"transition matrix is {m.k}x{m.k} but dataset has K={n_classes}"
            )
        return inject_asymmetric(labels, m, s)

    def describe(self) -> str:
        if self.kind == "uniform":
            return "uniform"
        return f"asym-{self.preset}" if self.preset else "asym-custom"
