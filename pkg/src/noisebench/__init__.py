"""noisebench: a desk-scale workbench for label-noise robustness studies.

The package covers the full loop: load or synthesize embedding datasets,
corrupt their labels with uniform or structured noise, train small
classifier heads under robust losses, probe with k-NN, inspect singular
spectra, and sweep the whole grid reproducibly from a TOML config.
"""

from .config import (
    DatasetSource,
    ExperimentConfig,
    MethodSpec,
    NoiseTemplate,
    load_config,
    parse_config,
    validate_config,
)
from .data import (
    EmbeddingDataset,
    SplitSpec,
    SyntheticSpec,
    gen_synthetic,
    make_split,
)
from .errors import (
    ConfigError,
    DivergenceError,
    FormatError,
    IoError,
    NoiseBenchError,
    NoiseRateError,
    StratificationError,
    ValidationError,
)
from .io import load_csv, load_emb1, save_csv, save_emb1
from .knn import KnnConfig, knn_experiment, knn_predict, stratified_subsample
from .losses import (
    DEFAULT_PROB_FLOOR,
    LOSS_KINDS,
    LossSpec,
    apl,
    cce,
    clamp_probs,
    gce,
    loss_and_grad,
    loss_values,
    mae,
    nce,
    rce,
    softmax,
)
from .noise import (
    NoiseSpec,
    PRESET_NAMES,
    TransitionMatrix,
    flip_mask,
    inject_asymmetric,
    inject_uniform,
    preset_matrix,
    uniform_matrix,
)
from .rng import derive_seed, stream, stream_key
from .runner import (
    SummaryRow,
    SweepOutcome,
    TrialKey,
    TrialResult,
    expand_trials,
    format_summary_table,
    run_experiment,
    run_trial,
    summarize,
)
from .spectral import SpectralReport, spectral_report
from .trainer import (
    HeadModel,
    TrainConfig,
    TrainRecord,
    cosine_lr,
    evaluate,
    init_head,
    sgd_step,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DEFAULT_PROB_FLOOR",
    "DatasetSource",
    "DivergenceError",
    "EmbeddingDataset",
    "ExperimentConfig",
    "FormatError",
    "HeadModel",
    "IoError",
    "KnnConfig",
    "LOSS_KINDS",
    "LossSpec",
    "MethodSpec",
    "NoiseBenchError",
    "NoiseRateError",
    "NoiseSpec",
    "NoiseTemplate",
    "PRESET_NAMES",
    "SpectralReport",
    "SplitSpec",
    "StratificationError",
    "SummaryRow",
    "SweepOutcome",
    "SyntheticSpec",
    "TrainConfig",
    "TrainRecord",
    "TransitionMatrix",
    "TrialKey",
    "TrialResult",
    "ValidationError",
    "apl",
    "cce",
    "clamp_probs",
    "cosine_lr",
    "derive_seed",
    "evaluate",
    "expand_trials",
    "flip_mask",
    "format_summary_table",
    "gce",
    "gen_synthetic",
    "init_head",
    "inject_asymmetric",
    "inject_uniform",
    "knn_experiment",
    "knn_predict",
    "load_config",
    "load_csv",
    "load_emb1",
    "loss_and_grad",
    "loss_values",
    "mae",
    "make_split",
    "nce",
    "parse_config",
    "preset_matrix",
    "rce",
    "run_experiment",
    "run_trial",
    "save_csv",
    "save_emb1",
    "sgd_step",
    "softmax",
    "spectral_report",
    "stratified_subsample",
    "stream",
    "stream_key",
    "summarize",
    "train",
    "uniform_matrix",
    "validate_config",
    "__version__",
]
