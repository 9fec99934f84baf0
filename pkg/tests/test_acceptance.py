"""Top-level acceptance checks.

Each test exercises one headline guarantee end to end, records a
PASS/FAIL line through the criteria_log fixture (printed in the terminal
summary), and then asserts. Reference values are recomputed here from
first principles rather than imported from the library under test.
"""

import csv
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

import noisebench as nb
from noisebench.config import load_config
from noisebench.runner import run_experiment


# --------------------------------------------------------------------------
# criterion 1: uniform noise statistics


def test_criterion_1_uniform_noise_statistics(criteria_log):
    n, k, eta = 100_000, 9, 0.4
    labels = np.zeros(n, dtype=np.int64)
    spec = nb.NoiseSpec("uniform", eta, seed=17)
    t0 = time.perf_counter()
    noisy = spec.apply(labels, k)
    elapsed = time.perf_counter() - t0
    frac = float((noisy != labels).mean())
    wrong = np.bincount(noisy[noisy != 0], minlength=k)[1:]
    chi = stats.chisquare(wrong)
    ok = abs(frac - eta) <= 0.01 and chi.pvalue > 0.001 and elapsed < 1.0
    criteria_log(
        1, "uniform noise flip rate, wrong-class uniformity, runtime", ok,
        f"flip={frac:.4f}, chi2 p={chi.pvalue:.3f}, {elapsed * 1e3:.0f} ms",
    )
    assert abs(frac - eta) <= 0.01
    assert chi.pvalue > 0.001
    assert elapsed < 1.0


# --------------------------------------------------------------------------
# criterion 2: noise-rate bound enforcement


def test_criterion_2_noise_rate_bound(criteria_log):
    labels9 = np.arange(9, dtype=np.int64).repeat(10)
    labels2 = np.array([0, 1, 0, 1], dtype=np.int64)
    # the uniform bound is inclusive: eta = (K-1)/K itself is the largest
    # admissible rate, anything above it must raise
    at_bound_ok = True
    try:
        nb.NoiseSpec("uniform", 8 / 9, seed=0).apply(labels9, 9)
    except nb.NoiseRateError:
        at_bound_ok = False
    over_ok = False
    try:
        nb.NoiseSpec("uniform", 0.95, seed=0).apply(labels9, 9)
    except nb.NoiseRateError:
        over_ok = True
    two_class_ok = False
    try:
        nb.NoiseSpec("uniform", 0.6, seed=0).apply(labels2, 2)
    except nb.NoiseRateError:
        two_class_ok = True
    ok = at_bound_ok and over_ok and two_class_ok
    criteria_log(
        2, "uniform rate bound (K-1)/K enforced", ok,
        "8/9 at K=9 accepted; 0.95 at K=9 and 0.6 at K=2 rejected",
    )
    assert at_bound_ok
    assert over_ok
    assert two_class_ok


# --------------------------------------------------------------------------
# criterion 3: asymmetric preset fidelity

# confusion structure per preset: row index -> targets sharing eta, written
# down independently of the library's builder
PRESET_ROWS = {
    "nct-crc": (9, {
        0: (5, 6), 1: (2, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3),
        5: (0, 6), 6: (0, 5), 7: (8,), 8: (7,),
    }),
    "bach": (4, {0: (1,), 1: (0, 2), 2: (1, 3), 3: (2,)}),
    "lc25000": (5, {0: (1, 2), 1: (0, 3), 2: (0, 4), 3: (1,), 4: (2,)}),
}


def rational_matrix(name: str, eta: Fraction) -> np.ndarray:
    k, rows = PRESET_ROWS[name]
    out = np.zeros((k, k))
    for i in range(k):
        targets = rows[i]
        out[i, i] = float(1 - eta)
        for j in targets:
            out[i, j] = float(eta / len(targets))
    return out


def test_criterion_3_preset_matrices_exact_and_sampled(criteria_log):
    exact_ok = True
    mc_ok = True
    n = 100_000
    for name, (k, _) in PRESET_ROWS.items():
        for eta in (Fraction(1, 5), Fraction(2, 5)):
            want = rational_matrix(name, eta)
            got = nb.preset_matrix(name, float(eta)).rows
            exact_ok &= np.array_equal(got, want)

            labels = np.arange(k, dtype=np.int64).repeat(n // k + 1)[:n]
            spec = nb.NoiseSpec("asymmetric", float(eta), seed=11, preset=name)
            noisy = spec.apply(labels, k)
            for c in range(k):
                sel = noisy[labels == c]
                emp = np.bincount(sel, minlength=k) / len(sel)
                for j in range(k):
                    p = want[c, j]
                    if p == 0.0:
                        mc_ok &= emp[j] == 0.0
                    else:
                        sigma = math.sqrt(p * (1 - p) / len(sel))
                        mc_ok &= abs(emp[j] - p) <= 3 * sigma
    criteria_log(
        3, "preset transition matrices exact and Monte-Carlo consistent",
        exact_ok and mc_ok,
        "3 presets x eta in {0.2, 0.4}, rows vs rational oracle, N=1e5 within 3 sigma",
    )
    assert exact_ok
    assert mc_ok


# --------------------------------------------------------------------------
# criterion 4: gradient checks for every loss


def _fd_grad(spec, scores, target, h=1e-6):
    g = np.zeros_like(scores)
    t = np.array([target])
    for i in range(scores.size):
        up, down = scores.copy(), scores.copy()
        up[i] += h
        down[i] -= h
        fp = nb.loss_and_grad(spec, up[None, :], t).value
        fm = nb.loss_and_grad(spec, down[None, :], t).value
        g[i] = (fp - fm) / (2 * h)
    return g


def test_criterion_4_gradient_checks(criteria_log):
    variants = [
        nb.LossSpec("cce"),
        nb.LossSpec("mae"),
        nb.LossSpec("gce", q=0.7),
        nb.LossSpec("nce"),
        nb.LossSpec("rce"),
        nb.LossSpec("apl", alpha=0.6, beta=0.4),
    ]
    rng = np.random.default_rng(23)
    t0 = time.perf_counter()
    worst = 0.0
    for spec in variants:
        for case in range(100):
            k = (2, 5, 9)[case % 3]
            scores = rng.normal(0.0, 2.0, size=k)
            target = int(rng.integers(k))
            analytic = nb.loss_and_grad(spec, scores[None, :], np.array([target]))
            fd = _fd_grad(spec, scores, target)
            num = np.abs(analytic.grad_scores[0] - fd).max()
            den = max(np.abs(analytic.grad_scores[0]).max(), 1e-12)
            worst = max(worst, num / den)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and elapsed < 10.0
    criteria_log(
        4, "analytic gradients match central differences for all six losses", ok,
        f"600 cases, worst rel err {worst:.2e}, {elapsed:.1f} s",
    )
    assert worst <= 1e-4
    assert elapsed < 10.0


# --------------------------------------------------------------------------
# criterion 5: symmetry identities and GCE endpoints


def _class_sum(spec, p):
    k = len(p)
    rows = np.repeat(np.log(p)[None, :], k, axis=0)
    return nb.loss_and_grad(spec, rows, np.arange(k)).value * k


def test_criterion_5_symmetry_identities(criteria_log):
    rng = np.random.default_rng(5)
    a = nb.LossSpec("rce").A
    worst = {"mae": 0.0, "nce": 0.0, "rce": 0.0}
    for i in range(1000):
        k = (2, 5, 9)[i % 3]
        p = np.clip(rng.dirichlet(np.ones(k)), 1e-300, None)
        worst["mae"] = max(
            worst["mae"], abs(_class_sum(nb.LossSpec("mae"), p) - 2 * (k - 1))
        )
        worst["nce"] = max(worst["nce"], abs(_class_sum(nb.LossSpec("nce"), p) - 1.0))
        worst["rce"] = max(
            worst["rce"], abs(_class_sum(nb.LossSpec("rce"), p) - (-a) * (k - 1))
        )
    identities_ok = all(v <= 1e-9 for v in worst.values())

    cce_gap = abs(
        _class_sum(nb.LossSpec("cce"), np.array([0.9, 0.05, 0.05]))
        - _class_sum(nb.LossSpec("cce"), np.full(3, 1 / 3))
    )
    witness_ok = cce_gap > 0.1

    scores = rng.normal(size=(64, 5))
    targets = rng.integers(5, size=64)
    g1 = nb.loss_and_grad(nb.LossSpec("gce", q=1.0), scores, targets)
    mae = nb.loss_and_grad(nb.LossSpec("mae"), scores, targets)
    half_ok = g1.value == mae.value / 2.0 and np.array_equal(
        g1.grad_scores, mae.grad_scores / 2.0
    )
    g0 = nb.loss_and_grad(nb.LossSpec("gce", q=1e-6), scores, targets)
    cce = nb.loss_and_grad(nb.LossSpec("cce"), scores, targets)
    limit_ok = abs(g0.value - cce.value) / abs(cce.value) <= 1e-4

    ok = identities_ok and witness_ok and half_ok and limit_ok
    criteria_log(
        5, "loss symmetry identities and GCE endpoints", ok,
        f"worst dev mae={worst['mae']:.1e} nce={worst['nce']:.1e} "
        f"rce={worst['rce']:.1e}, cce gap {cce_gap:.2f}",
    )
    assert identities_ok, worst
    assert witness_ok
    assert half_ok
    assert limit_ok


# --------------------------------------------------------------------------
# criterion 6: cosine schedule anchors


def test_criterion_6_cosine_anchor_points(criteria_log):
    lr_max, lr_min = 0.02, 0.01
    ok = True
    for total in (2, 40, 100):
        anchors = (
            (0, lr_max),
            (total // 2, (lr_max + lr_min) / 2),
            (total, lr_min),
        )
        for t, want in anchors:
            got = nb.cosine_lr(t, total, lr_max, lr_min)
            ok &= abs(got - want) <= math.ulp(want)
    criteria_log(
        6, "cosine schedule exact at start, midpoint, end", ok,
        "within 1 ulp for T in {2, 40, 100}",
    )
    assert ok


# --------------------------------------------------------------------------
# criterion 7: robustness trend on the synthetic sweep

TREND_TOML = """
seed = 2
parallelism = 8
output_dir = "{out_dir}"
figures = false
seeds = [0, 1, 2, 3]

[split]
fractions = [0.7, 0.1, 0.2]
seed = 0

[[datasets]]
name = "trend"
[datasets.synthetic]
n_classes = 4
dim = 32
samples_per_class = 1000
cluster_spread = 1.0
center_separation = 6.0
seed = 11

[[methods]]
label = "cce"
loss = {{ kind = "cce" }}
train = {{ lr_max = 0.02, lr_min = 0.01, epochs_max = 40, batch_size = 32, patience = 10, warmup_epochs = 0 }}

[[methods]]
label = "gce"
loss = {{ kind = "gce", q = 0.7 }}
train = {{ lr_max = 0.02, lr_min = 0.01, epochs_max = 40, batch_size = 32, patience = 10, warmup_epochs = 0 }}

[[methods]]
label = "apl"
loss = {{ kind = "apl", alpha = 0.6, beta = 0.4 }}
train = {{ lr_max = 0.02, lr_min = 0.01, epochs_max = 40, batch_size = 32, patience = 10, warmup_epochs = 0 }}

[[noise]]
kind = "uniform"
etas = [0.0, 0.2, 0.4]
"""


def test_criterion_7_robust_loss_trend(criteria_log, tmp_path):
    cfg_path = tmp_path / "trend.toml"
    cfg_path.write_text(TREND_TOML.format(out_dir=tmp_path / "run"))
    t0 = time.perf_counter()
    outcome = run_experiment(load_config(cfg_path))
    elapsed = time.perf_counter() - t0

    means: dict[str, dict[float, float]] = {}
    with open(outcome.output_dir / "summary.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            means.setdefault(row["method"], {})[float(row["eta"])] = float(
                row["mean_acc"]
            )

    clean_ok = all(means[m][0.0] >= 0.99 for m in ("cce", "gce", "apl"))
    drop = {m: means[m][0.0] - means[m][0.4] for m in ("cce", "gce", "apl")}
    order_ok = drop["gce"] < drop["cce"] and drop["apl"] < drop["cce"]
    mono_ok = all(
        means[m][0.0] >= means[m][0.2] >= means[m][0.4] for m in ("cce", "gce", "apl")
    )
    time_ok = elapsed < 300.0
    ok = outcome.all_ok and clean_ok and order_ok and mono_ok and time_ok
    criteria_log(
        7, "robust losses degrade less than the CCE baseline", ok,
        f"drops cce={drop['cce']:.4f} gce={drop['gce']:.4f} "
        f"apl={drop['apl']:.4f}, {elapsed:.0f} s",
    )
    assert outcome.all_ok
    assert clean_ok, means
    assert order_ok, drop
    assert mono_ok, means
    assert time_ok


# --------------------------------------------------------------------------
# criterion 8: exact k-NN and few-shot degradation


def _oracle_knn(train, labels, queries, k, metric):
    train = np.asarray(train, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n_classes = int(labels.max()) + 1
    tiny = np.finfo(np.float64).tiny
    out = []
    for q in np.atleast_2d(np.asarray(queries, dtype=np.float64)):
        if metric == "euclidean":
            dists = np.array([((q - t) ** 2).sum() for t in train])
        else:
            qn = q / max(np.linalg.norm(q), tiny)
            dists = np.array(
                [1.0 - qn @ (t / max(np.linalg.norm(t), tiny)) for t in train]
            )
        order = sorted(range(len(train)), key=lambda i: (dists[i], i))[:k]
        top_lab, top_dist = labels[list(order)], dists[list(order)]
        counts = np.bincount(top_lab, minlength=n_classes)
        winners = np.flatnonzero(counts == counts.max())
        if len(winners) == 1:
            out.append(int(winners[0]))
        else:
            out.append(int(min((top_dist[top_lab == c].min(), c) for c in winners)[1]))
    return np.array(out, dtype=np.int64)


def test_criterion_8_knn_exactness_and_trend(criteria_log):
    rng = np.random.default_rng(11)
    exact_ok = True
    for case in range(20):
        n = int(rng.integers(20, 501))
        m = int(rng.integers(5, 501))
        d = int(rng.integers(2, 17))
        k = int(rng.choice([1, 5, 15]))
        metric = ("euclidean", "cosine")[case % 2]
        train = rng.normal(size=(n, d))
        labels = rng.integers(4, size=n)
        queries = rng.normal(size=(m, d))
        got = nb.knn_predict(train, labels, queries, k, metric)
        want = _oracle_knn(train, labels, queries, k, metric)
        exact_ok &= np.array_equal(got, want)

    ds = nb.gen_synthetic(
        nb.SyntheticSpec(
            n_classes=4, dim=32, samples_per_class=1000,
            cluster_spread=1.0, center_separation=6.0, seed=11,
        )
    )
    split = nb.make_split(ds, (0.7, 0.1, 0.2), seed=0)
    means = []
    for eta in (0.0, 0.3, 0.6):
        accs = []
        for seed in range(4):
            spec = nb.NoiseSpec(
                "uniform", eta, seed=nb.derive_seed(0, "c8", eta, seed)
            )
            cfg = nb.KnnConfig(k=5, subsample_fraction=0.1, seed=seed)
            accs.append(nb.knn_experiment(ds, split, spec, cfg))
        means.append(float(np.mean(accs)))
    trend_ok = means[0] >= means[1] >= means[2]
    ok = exact_ok and trend_ok
    criteria_log(
        8, "k-NN matches brute-force oracle; few-shot accuracy degrades with noise",
        ok,
        f"20/20 oracle matches, means {means[0]:.3f} >= {means[1]:.3f} "
        f">= {means[2]:.3f}",
    )
    assert exact_ok
    assert trend_ok, means


# --------------------------------------------------------------------------
# criterion 9: spectral diagnostics


def _control_alignment(seed, n=4000, d=32, k=4):
    rng = np.random.default_rng(seed)
    ds = nb.EmbeddingDataset(
        "control",
        rng.normal(size=(n, d)).astype(np.float32),
        rng.integers(k, size=n),
        k,
    )
    return nb.spectral_report(ds).alignment


def test_criterion_9_spectral_diagnostics(criteria_log):
    tight = nb.gen_synthetic(
        nb.SyntheticSpec(
            n_classes=4, dim=16, samples_per_class=200,
            cluster_spread=0.0, center_separation=8.0, seed=3,
        )
    )
    tight_alignment = nb.spectral_report(tight).alignment
    tight_ok = tight_alignment >= 0.99

    expected = 4 / 32
    single = _control_alignment(0)
    oracle = float(np.mean([_control_alignment(s) for s in range(1, 9)]))
    control_ok = abs(single - expected) <= 0.05 and abs(oracle - expected) <= 0.05

    base = nb.gen_synthetic(
        nb.SyntheticSpec(
            n_classes=4, dim=16, samples_per_class=200,
            cluster_spread=1.0, center_separation=8.0, seed=5,
        )
    )
    rng = np.random.default_rng(9)
    q, r = np.linalg.qr(rng.normal(size=(base.dim, base.dim)))
    q *= np.sign(np.diag(r))
    rotated = nb.EmbeddingDataset(
        "rot", (base.vectors @ q).astype(np.float32), base.labels, base.n_classes
    )
    rot_dev = abs(
        nb.spectral_report(base).alignment - nb.spectral_report(rotated).alignment
    )
    rot_ok = rot_dev <= 1e-8

    ok = tight_ok and control_ok and rot_ok
    criteria_log(
        9, "spectral alignment separates structure from noise", ok,
        f"tight={tight_alignment:.4f}, control={single:.4f} "
        f"(oracle {oracle:.4f}, expected {expected:.4f}), rotation dev {rot_dev:.1e}",
    )
    assert tight_ok
    assert control_ok, (single, oracle)
    assert rot_ok


# --------------------------------------------------------------------------
# criterion 10: deterministic parallelism and resume

SWEEP_TOML = """
seed = 3
parallelism = {workers}
output_dir = "{out_dir}"
figures = false
seeds = [0, 1]

[split]
fractions = [0.7, 0.15, 0.15]
seed = 0

[[datasets]]
name = "blob"
[datasets.synthetic]
n_classes = 3
dim = 16
samples_per_class = 150
cluster_spread = 0.9
center_separation = 6.0
seed = 5

[[methods]]
label = "gce"
loss = {{ kind = "gce", q = 0.7 }}
train = {{ lr_max = 0.02, lr_min = 0.01, epochs_max = 6, batch_size = 64, patience = 6, warmup_epochs = 0 }}

[[methods]]
label = "knn5"
knn = {{ k = 5, subsample_fraction = 0.5 }}

[[noise]]
kind = "uniform"
etas = [0.0, 0.4]
"""


def _sweep(tmp_path, tag, workers, max_new=None):
    cfg_path = tmp_path / f"{tag}.toml"
    cfg_path.write_text(
        SWEEP_TOML.format(workers=workers, out_dir=tmp_path / tag)
    )
    outcome = run_experiment(load_config(cfg_path), max_new_trials=max_new)
    return outcome, tmp_path / tag / "results.csv"


def test_criterion_10_parallel_determinism_and_resume(criteria_log, tmp_path):
    out1, csv1 = _sweep(tmp_path, "serial", workers=1)
    out8, csv8 = _sweep(tmp_path, "parallel", workers=8)
    parallel_ok = out1.all_ok and out8.all_ok and csv1.read_bytes() == csv8.read_bytes()

    half, partial_csv = _sweep(tmp_path, "resumed", workers=1, max_new=4)
    interrupted_ok = not half.complete and not partial_csv.exists()
    resumed, resumed_csv = _sweep(tmp_path, "resumed", workers=1)
    resume_ok = (
        resumed.complete
        and resumed.n_new == 4
        and resumed_csv.read_bytes() == csv1.read_bytes()
    )
    ok = parallel_ok and interrupted_ok and resume_ok
    criteria_log(
        10, "sweeps are byte-identical across parallelism and resume", ok,
        "1 vs 8 workers identical; 50% interrupt + resume identical",
    )
    assert parallel_ok
    assert interrupted_ok
    assert resume_ok
