"""Experiment configuration: TOML schema, parsing, and validation.

A sweep config names datasets (EMB1/CSV paths or inline synthetic specs),
methods (a loss + trainer setup, or a k-NN probe), noise templates with
their eta grids, and the seed list.  Example::

    seed = 42
    output_dir = "runs/demo"
    parallelism = 2
    seeds = [0, 1, 2, 3]

    [split]
    fractions = [0.8, 0.1, 0.1]
    seed = 7

    [[datasets]]
    name = "blob"
    [datasets.synthetic]
    n_classes = 4
    dim = 32
    samples_per_class = 1000
    cluster_spread = 1.0
    center_separation = 6.0
    seed = 11

    [[methods]]
    label = "gce"
    loss = { kind = "gce", q = 0.7 }
    train = { epochs_max = 60, aug_sigma = 0.1 }

    [[methods]]
    label = "knn5"
    knn = { k = 5, subsample_fraction = 0.1 }

    [[noise]]
    kind = "uniform"
    etas = [0.0, 0.2, 0.4]

CLI flags override the scalar keys (output_dir, parallelism).
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .data import EmbeddingDataset, SyntheticSpec, gen_synthetic
from .errors import ConfigError, NoiseBenchError, ValidationError
from .io import load_csv, load_emb1
from .knn import KnnConfig
from .losses import LossSpec
from .noise import NoiseSpec, TransitionMatrix
from .trainer import TrainConfig

PARALLELISM_ENV = "NOISEBENCH_PARALLELISM"


@dataclass(frozen=True)
class DatasetSource:
    name: str
    path: str | None = None
    synthetic: SyntheticSpec | None = None

    def load(self) -> EmbeddingDataset:
        if self.synthetic is not None:
            ds = gen_synthetic(self.synthetic)
            return EmbeddingDataset(self.name, ds.vectors, ds.labels, ds.n_classes)
        p = Path(self.path)
        if p.suffix.lower() == ".csv":
            return load_csv(p, name=self.name)
        return load_emb1(p)


@dataclass(frozen=True)
class MethodSpec:
    label: str
    loss: LossSpec | None = None       # train method
    train: TrainConfig | None = None
    knn: KnnConfig | None = None       # probe method

    @property
    def kind(self) -> str:
        return "knn" if self.knn is not None else "train"


@dataclass(frozen=True)
class NoiseTemplate:
    kind: str                      # uniform | asymmetric
    etas: tuple[float, ...]
    preset: str | None = None
    matrix: TransitionMatrix | None = None

    def describe(self) -> str:
        if self.kind == "uniform":
            return "uniform"
        return f"asym-{self.preset}" if self.preset else "asym-custom"

    def spec_for(self, eta: float, seed: int) -> NoiseSpec:
        return NoiseSpec(
            kind=self.kind, eta=eta, seed=seed, preset=self.preset, matrix=self.matrix
        )


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[DatasetSource, ...]
    methods: tuple[MethodSpec, ...]
    noise: tuple[NoiseTemplate, ...]
    seeds: tuple[int, ...]
    seed: int = 0
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    split_seed: int = 0
    parallelism: int = 1
    output_dir: str = "runs/sweep"
    figures: bool = True


def default_parallelism() -> int:
    raw = os.environ.get(PARALLELISM_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return table[key]


def _parse_dataset(entry: dict, i: int) -> DatasetSource:
    where = f"datasets[{i}]"
    name = _require(entry, "name", where)
    has_path = "path" in entry
    has_synth = "synthetic" in entry
    if has_path == has_synth:
        raise ConfigError(f"{where}: give exactly one of 'path' or 'synthetic'")
    if has_path:
        return DatasetSource(name=name, path=str(entry["path"]))
    s = entry["synthetic"]
    try:
        spec = SyntheticSpec(
            n_classes=int(_require(s, "n_classes", where)),
            dim=int(_require(s, "dim", where)),
            samples_per_class=int(_require(s, "samples_per_class", where)),
            cluster_spread=float(s.get("cluster_spread", 1.0)),
            center_separation=float(s.get("center_separation", 6.0)),
            seed=int(s.get("seed", 0)),
            name=name,
        )
    except ValidationError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    return DatasetSource(name=name, synthetic=spec)


def _parse_loss(table: dict, where: str) -> LossSpec:
    kind = _require(table, "kind", where)
    kwargs = {}
    for key in ("q", "alpha", "beta", "A", "prob_floor"):
        if key in table:
            kwargs[key] = float(table[key])
    try:
        return LossSpec(kind=kind, **kwargs)
    except ValidationError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_method(entry: dict, i: int) -> MethodSpec:
    where = f"methods[{i}]"
    label = _require(entry, "label", where)
    has_loss = "loss" in entry
    has_knn = "knn" in entry
    if has_loss == has_knn:
        raise ConfigError(f"{where}: give exactly one of 'loss' or 'knn'")
    if has_knn:
        k = entry["knn"]
        try:
            cfg = KnnConfig(
                k=int(k.get("k", 5)),
                subsample_fraction=float(k.get("subsample_fraction", 0.10)),
                metric=str(k.get("metric", "euclidean")),
            )
        except ValidationError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        return MethodSpec(label=label, knn=cfg)
    loss = _parse_loss(entry["loss"], f"{where}.loss")
    t = entry.get("train", {})
    known = {
        "lr_max", "lr_min", "epochs_max", "batch_size", "patience",
        "warmup_epochs", "aug_sigma", "shuffle", "hidden",
    }
    unknown = set(t) - known
    if unknown:
        raise ConfigError(f"{where}.train: unknown keys {sorted(unknown)}")
    try:
        train = TrainConfig(**{k: v for k, v in t.items()})
    except (ValidationError, TypeError) as exc:
        raise ConfigError(f"{where}.train: {exc}") from exc
    return MethodSpec(label=label, loss=loss, train=train)


def _parse_noise(entry: dict, i: int) -> NoiseTemplate:
    where = f"noise[{i}]"
    kind = _require(entry, "kind", where)
    if kind not in ("uniform", "asymmetric"):
        raise ConfigError(f"{where}: kind must be uniform|asymmetric, got {kind!r}")
    if "etas" in entry:
        etas = tuple(float(e) for e in entry["etas"])
    elif "eta" in entry:
        etas = (float(entry["eta"]),)
    else:
        raise ConfigError(f"{where}: missing 'etas' (or single 'eta')")
    if not etas:
        raise ConfigError(f"{where}: empty eta grid")
    if any(e < 0 for e in etas):
        raise ConfigError(f"{where}: negative eta in {etas}")

    preset = entry.get("preset")
    matrix = None
    if "matrix" in entry:
        if preset is not None:
            raise ConfigError(f"{where}: give either 'preset' or 'matrix', not both")
        try:
            matrix = TransitionMatrix(np.asarray(entry["matrix"], dtype=np.float64))
        except (ValidationError, ValueError) as exc:
            raise ConfigError(f"{where}: bad matrix: {exc}") from exc
    if kind == "asymmetric" and preset is None and matrix is None:
        raise ConfigError(f"{where}: asymmetric noise needs 'preset' or 'matrix'")
    if kind == "uniform" and (preset is not None or matrix is not None):
        raise ConfigError(f"{where}: uniform noise takes no preset/matrix")
    return NoiseTemplate(kind=kind, etas=etas, preset=preset, matrix=matrix)


def parse_config(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Build an ExperimentConfig from a decoded TOML table."""
    for key in ("datasets", "methods", "noise", "seeds"):
        if not data.get(key):
            raise ConfigError(f"config: '{key}' must be present and non-empty")

    datasets = tuple(_parse_dataset(d, i) for i, d in enumerate(data["datasets"]))
    names = [d.name for d in datasets]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate dataset names in {names}")
    if base_dir is not None:
        datasets = tuple(
            DatasetSource(d.name, str(base_dir / d.path), d.synthetic)
            if d.path is not None and not Path(d.path).is_absolute()
            else d
            for d in datasets
        )

    methods = tuple(_parse_method(m, i) for i, m in enumerate(data["methods"]))
    labels = [m.label for m in methods]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate method labels in {labels}")

    noise = tuple(_parse_noise(n, i) for i, n in enumerate(data["noise"]))
    seeds = tuple(int(s) for s in data["seeds"])

    split = data.get("split", {})
    fractions = tuple(float(f) for f in split.get("fractions", (0.8, 0.1, 0.1)))
    if len(fractions) != 3:
        raise ConfigError(f"split.fractions must have 3 entries, got {fractions}")

    return ExperimentConfig(
        datasets=datasets,
        methods=methods,
        noise=noise,
        seeds=seeds,
        seed=int(data.get("seed", 0)),
        split_fractions=fractions,
        split_seed=int(split.get("seed", 0)),
        parallelism=int(data.get("parallelism", default_parallelism())),
        output_dir=str(data.get("output_dir", "runs/sweep")),
        figures=bool(data.get("figures", True)),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data, base_dir=path.parent)


def validate_config(cfg: ExperimentConfig) -> list[str]:
    """Fail-fast checks before any trial runs.

    Loads every dataset and verifies each noise template against each
    dataset's class count.  Returns human-readable problem descriptions
    (empty list means the config is runnable).
    """
    problems: list[str] = []
    loaded: dict[str, EmbeddingDataset] = {}
    for src in cfg.datasets:
        try:
            loaded[src.name] = src.load()
        except NoiseBenchError as exc:
            problems.append(f"dataset {src.name!r}: {exc}")
        except OSError as exc:
            problems.append(f"dataset {src.name!r}: {exc}")

    for name, ds in loaded.items():
        for tpl in cfg.noise:
            for eta in tpl.etas:
                try:
                    tpl.spec_for(eta, seed=0).validate_for(ds.n_classes)
                except NoiseBenchError as exc:
                    problems.append(
                        f"noise {tpl.describe()} eta={eta} on dataset {name!r}: {exc}"
                    )
    return problems
