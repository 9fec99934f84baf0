"""End-to-end CLI tests driving main() with argv lists."""

import json
import textwrap

import numpy as np
import pytest

import noisebench as nb
from noisebench.cli import main


@pytest.fixture()
def emb1_path(tmp_path):
    p = tmp_path / "toy.emb1"
    rc = main(
        [
            "gen", "--classes", "3", "--dim", "8", "--per-class", "30",
            "--spread", "0.8", "--separation", "6", "--seed", "4",
            "--out", str(p),
        ]
    )
    assert rc == 0
    return p


def test_gen_and_info(emb1_path, capsys):
    rc = main(["info", str(emb1_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "samples   90" in out
    assert "classes   3" in out
    assert "[30, 30, 30]" in out


def test_gen_csv(tmp_path, capsys):
    p = tmp_path / "toy.csv"
    rc = main(
        ["gen", "--classes", "2", "--dim", "4", "--per-class", "5", "--out", str(p)]
    )
    assert rc == 0
    ds = nb.load_csv(p)
    assert ds.n_samples == 10


def test_noise_writes_label_csv(emb1_path, tmp_path, capsys):
    out = tmp_path / "flips.csv"
    ds_out = tmp_path / "noisy.emb1"
    rc = main(
        [
            "noise", str(emb1_path), "--out", str(out),
            "--dataset-out", str(ds_out),
            "--noise", "uniform", "--eta", "0.5", "--seed", "1",
        ]
    )
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "clean,noisy,flip"
    assert len(lines) == 91
    rows = [tuple(int(v) for v in ln.split(",")) for ln in lines[1:]]
    clean = nb.load_emb1(emb1_path)
    noisy = nb.load_emb1(ds_out)
    assert [r[0] for r in rows] == clean.labels.tolist()
    assert [r[1] for r in rows] == noisy.labels.tolist()
    for c, n, f in rows:
        assert f == int(c != n)
    # eta=0.5 flips roughly half the labels
    assert 0.3 < np.mean([r[2] for r in rows]) < 0.7
    assert np.array_equal(clean.vectors, noisy.vectors)


def test_noise_rejects_bad_rate(emb1_path, tmp_path, capsys):
    rc = main(
        ["noise", str(emb1_path), "--out", str(tmp_path / "x.csv"), "--eta", "0.9"]
    )
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_train_emits_json_record(emb1_path, tmp_path, capsys):
    out_dir = tmp_path / "hist"
    rc = main(
        [
            "train", str(emb1_path), "--loss", "gce",
            "--lr-max", "0.02", "--lr-min", "0.01", "--epochs", "3",
            "--batch-size", "32", "--patience", "3", "--warmup", "0",
            "--hidden", "8", "--eta", "0.2", "--seed", "0",
            "--fractions", "0.7", "0.15", "0.15",
            "--out-dir", str(out_dir),
        ]
    )
    captured = capsys.readouterr()
    assert rc == 0
    record = json.loads(captured.out)
    assert record["epochs"] == [0, 1, 2]
    assert len(record["lr"]) == 3
    assert 0.0 <= record["test_accuracy"] <= 1.0
    assert "gce" in captured.err
    hist = (out_dir / "history.csv").read_text().strip().split("\n")
    assert hist[0] == "epoch,lr,train_loss,val_accuracy"
    assert len(hist) == 4
    assert (out_dir / "history.png").stat().st_size > 0


def test_knn_prints_accuracy(emb1_path, capsys):
    rc = main(
        ["knn", str(emb1_path), "--k", "3", "--fraction", "0.5", "--eta", "0.0"]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "knn-3" in out and "test acc" in out


def test_spectral_json_and_figure(emb1_path, tmp_path, capsys):
    fig = tmp_path / "spec.png"
    rc = main(["spectral", str(emb1_path), "--fig", str(fig)])
    captured = capsys.readouterr()
    assert rc == 0
    rep = json.loads(captured.out)
    assert rep["n_prominent"] == 3
    assert len(rep["singular_values"]) == 8
    assert fig.stat().st_size > 0


def sweep_toml(tmp_path, out_name="run", knn_k=3):
    cfg = tmp_path / "sweep.toml"
    cfg.write_text(
        textwrap.dedent(
            f"""
            seed = 7
            output_dir = "{tmp_path / out_name}"
            parallelism = 1
            seeds = [0, 1]

            [[datasets]]
            name = "blob"
            [datasets.synthetic]
            n_classes = 3
            dim = 8
            samples_per_class = 30
            cluster_spread = 0.8
            center_separation = 6.0
            seed = 4

            [[methods]]
            label = "probe"
            knn = {{ k = {knn_k}, subsample_fraction = 0.5 }}

            [[noise]]
            kind = "uniform"
            etas = [0.0, 0.4]
            """
        )
    )
    return cfg


def test_validate_ok_and_bad(tmp_path, capsys):
    cfg = sweep_toml(tmp_path)
    assert main(["validate", str(cfg)]) == 0
    assert "4 trials" in capsys.readouterr().out

    bad = tmp_path / "bad.toml"
    bad.write_text(cfg.read_text().replace("etas = [0.0, 0.4]", "etas = [0.9]"))
    assert main(["validate", str(bad)]) == 1
    assert "problem:" in capsys.readouterr().err


def test_sweep_full_run(tmp_path, capsys):
    cfg = sweep_toml(tmp_path)
    rc = main(["sweep", str(cfg), "--no-figures"])
    captured = capsys.readouterr()
    assert rc == 0
    assert "blob" in captured.out and "probe" in captured.out
    out_dir = tmp_path / "run"
    for name in ("trials.jsonl", "results.csv", "summary.csv", "curves.csv"):
        assert (out_dir / name).exists()
    assert not list(out_dir.glob("*.png"))


def test_sweep_interrupt_and_resume(tmp_path, capsys):
    cfg = sweep_toml(tmp_path)
    rc = main(["sweep", str(cfg), "--no-figures", "--max-new-trials", "2", "-q"])
    assert rc == 2
    assert "rerun to resume" in capsys.readouterr().out
    assert not (tmp_path / "run" / "results.csv").exists()
    rc = main(["sweep", str(cfg), "--no-figures", "-q"])
    assert rc == 0
    assert (tmp_path / "run" / "results.csv").exists()


def test_sweep_failures_exit_code(tmp_path, capsys):
    cfg = sweep_toml(tmp_path, knn_k=500)
    rc = main(["sweep", str(cfg), "--no-figures", "-q"])
    captured = capsys.readouterr()
    assert rc == 3
    assert "no successful trials" in captured.out


def test_sweep_figures_written(tmp_path, capsys):
    cfg = sweep_toml(tmp_path, out_name="figrun")
    rc = main(["sweep", str(cfg), "-q"])
    assert rc == 0
    pngs = list((tmp_path / "figrun").glob("curve_*.png"))
    assert len(pngs) == 1
    assert "wrote" in capsys.readouterr().out


def test_sweep_output_dir_override(tmp_path, capsys):
    cfg = sweep_toml(tmp_path)
    rc = main(
        ["sweep", str(cfg), "--no-figures", "-q", "-o", str(tmp_path / "elsewhere")]
    )
    assert rc == 0
    assert (tmp_path / "elsewhere" / "results.csv").exists()
    assert not (tmp_path / "run" / "results.csv").exists()


def test_missing_file_exits_one(tmp_path, capsys):
    rc = main(["info", str(tmp_path / "ghost.emb1")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_no_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert nb.__version__ in capsys.readouterr().out
