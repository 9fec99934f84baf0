"""Binary and CSV dataset serialization."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import noisebench as nb


def test_emb1_round_trip_bit_exact(small_ds, tmp_path):
    path = tmp_path / "ds.emb1"
    nb.save_emb1(small_ds, path)
    back = nb.load_emb1(path)
    assert back.name == small_ds.name
    assert back.n_classes == small_ds.n_classes
    assert back.vectors.dtype == np.float32
    assert np.array_equal(
        back.vectors.view(np.uint32), small_ds.vectors.view(np.uint32)
    )
    assert np.array_equal(back.labels, small_ds.labels)
    # saving the loaded copy reproduces the file byte for byte
    path2 = tmp_path / "ds2.emb1"
    nb.save_emb1(back, path2)
    assert path.read_bytes() == path2.read_bytes()


@settings(max_examples=25, deadline=None)
@given(
    n_per=st.integers(1, 5),
    k=st.integers(2, 5),
    dim=st.integers(1, 6),
    seed=st.integers(0, 2**16),
)
def test_emb1_round_trip_random(tmp_path_factory, n_per, k, dim, seed):
    rng = np.random.default_rng(seed)
    vec = rng.normal(scale=100.0, size=(n_per * k, dim)).astype(np.float32)
    lab = np.repeat(np.arange(k), n_per)
    ds = nb.EmbeddingDataset(f"r{seed}", vec, lab, k)
    path = tmp_path_factory.mktemp("emb1") / "x.emb1"
    nb.save_emb1(ds, path)
    back = nb.load_emb1(path)
    assert np.array_equal(back.vectors.view(np.uint32), vec.view(np.uint32))
    assert np.array_equal(back.labels, lab)


def test_emb1_header_errors(small_ds, tmp_path):
    path = tmp_path / "ds.emb1"
    nb.save_emb1(small_ds, path)
    raw = bytearray(path.read_bytes())

    bad = tmp_path / "bad.emb1"
    bad.write_bytes(b"NOPE" + raw[4:])
    with pytest.raises(nb.FormatError, match="magic"):
        nb.load_emb1(bad)

    wrong_version = bytearray(raw)
    struct.pack_into("<I", wrong_version, 4, 99)
    bad.write_bytes(wrong_version)
    with pytest.raises(nb.FormatError, match="version"):
        nb.load_emb1(bad)

    bad.write_bytes(raw[:-3])  # truncated payload
    with pytest.raises(nb.FormatError):
        nb.load_emb1(bad)

    bad.write_bytes(raw[:10])  # truncated header
    with pytest.raises(nb.FormatError):
        nb.load_emb1(bad)


def test_emb1_label_out_of_range(small_ds, tmp_path):
    path = tmp_path / "ds.emb1"
    nb.save_emb1(small_ds, path)
    raw = bytearray(path.read_bytes())
    raw[-2:] = struct.pack("<H", 7)  # last label >= K=3
    bad = tmp_path / "bad.emb1"
    bad.write_bytes(raw)
    with pytest.raises(nb.ValidationError):
        nb.load_emb1(bad)


def test_emb1_missing_file(tmp_path):
    with pytest.raises(nb.IoError):
        nb.load_emb1(tmp_path / "nope.emb1")


def test_csv_round_trip(small_ds, tmp_path):
    path = tmp_path / "ds.csv"
    nb.save_csv(small_ds, path)
    header = path.read_text().splitlines()[0]
    assert header == "label," + ",".join(f"f{i}" for i in range(small_ds.dim))
    back = nb.load_csv(path)
    assert back.name == "ds"  # from the file stem
    assert back.n_classes == small_ds.n_classes
    assert np.allclose(back.vectors, small_ds.vectors, rtol=1e-6, atol=0)
    assert np.array_equal(back.labels, small_ds.labels)


def test_csv_parse_errors(tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("label,f0,f1\n0,1.0,2.0\n1,3.0\n")
    with pytest.raises(nb.FormatError, match=r":3: ragged"):
        nb.load_csv(ragged)

    junk = tmp_path / "junk.csv"
    junk.write_text("label,f0\n0,abc\n1,2.0\n")
    with pytest.raises(nb.FormatError):
        nb.load_csv(junk)

    empty = tmp_path / "empty.csv"
    empty.write_text("label,f0\n")
    with pytest.raises(nb.FormatError):
        nb.load_csv(empty)


def test_csv_explicit_class_count(tmp_path):
    path = tmp_path / "two.csv"
    path.write_text("label,f0\n0,1.0\n1,-1.0\n")
    ds = nb.load_csv(path, n_classes=2)
    assert ds.n_classes == 2
    # declaring extra classes that never appear violates the container
    # invariant that every class is present
    with pytest.raises(nb.ValidationError):
        nb.load_csv(path, n_classes=4)


def test_emb1_label_width_limit(tmp_path):
    # labels are stored as u16; saving refuses K past that width rather
    # than silently truncating
    k = 65537
    vec = np.zeros((k, 1), dtype=np.float32)
    vec[:, 0] = np.arange(k, dtype=np.float32)
    ds = nb.EmbeddingDataset("wide", vec, np.arange(k), k)
    with pytest.raises(nb.ValidationError):
        nb.save_emb1(ds, tmp_path / "wide.emb1")
