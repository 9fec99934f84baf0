"""Reading and writing embedding datasets.

EMB1 binary layout (all little-endian):

    magic   'EMB1'            4 bytes
    version u32 = 1
    n_samples u64
    dim u32
    n_classes u32
    name_len u32, then name (UTF-8)
    vectors  n_samples * dim float32, row-major
    labels   n_samples * u16

The byte stream for a given dataset is deterministic, so save/load round
trips are bit-exact.  CSV interchange uses a `label,f0,...,f{d-1}` header
and prints floats with 9 significant digits, which is lossless for
float32.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .data import EmbeddingDataset
from .errors import FormatError, IoError, ValidationError

MAGIC = b"EMB1"
VERSION = 1
_HEADER = struct.Struct("<4sIQIII")  # magic, version, n, dim, k, name_len

MAX_LABEL = np.iinfo(np.uint16).max


def save_emb1(dataset: EmbeddingDataset, path) -> None:
    if dataset.n_classes - 1 > MAX_LABEL:
        raise ValidationError(f"EMB1 stores u16 labels; K={dataset.n_classes} too large")
    name = dataset.name.encode("utf-8")
    header = _HEADER.pack(
        MAGIC, VERSION, dataset.n_samples, dataset.dim, dataset.n_classes, len(name)
    )
    vec = np.ascontiguousarray(dataset.vectors, dtype="<f4")
    lab = np.ascontiguousarray(dataset.labels, dtype="<u2")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(name)
            fh.write(vec.tobytes())
            fh.write(lab.tobytes())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_emb1(path) -> EmbeddingDataset:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, n, dim, k, name_len = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")

    off = _HEADER.size
    if len(blob) < off + name_len:
        raise FormatError(f"{path}: truncated name field")
    try:
        name = blob[off:off + name_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: name is not valid UTF-8") from exc
    off += name_len

    vec_bytes = n * dim * 4
    lab_bytes = n * 2
    if len(blob) != off + vec_bytes + lab_bytes:
        raise FormatError(
            f"{path}: payload is {len(blob) - off} bytes, "
            f"expected {vec_bytes + lab_bytes}"
        )
    vectors = np.frombuffer(blob, dtype="<f4", count=n * dim, offset=off)
    vectors = vectors.reshape(n, dim)
    labels = np.frombuffer(blob, dtype="<u2", count=n, offset=off + vec_bytes)
    if labels.size and labels.max() >= k:
        raise ValidationError(
            f"{path}: label {labels.max()} out of range for K={k}"
        )
    return EmbeddingDataset(
        name=name,
        vectors=vectors,
        labels=labels.astype(np.int64),
        n_classes=k,
    )


def save_csv(dataset: EmbeddingDataset, path) -> None:
    header = ["label"] + [f"f{i}" for i in range(dataset.dim)]
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for label, row in zip(dataset.labels, dataset.vectors):
                writer.writerow([int(label)] + [f"{v:.9g}" for v in row])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_csv(path, name: str | None = None, n_classes: int | None = None) -> EmbeddingDataset:
    try:
        with open(path, "r", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FormatError(f"{path}: empty file") from None
            width = len(header)
            if width < 2 or header[0] != "label":
                raise FormatError(f"{path}: expected header label,f0,...  got {header[:3]}")
            labels: list[int] = []
            rows: list[list[float]] = []
            for lineno, row in enumerate(reader, start=2):
                if len(row) != width:
                    raise FormatError(
                        f"{path}:{lineno}: ragged row ({len(row)} cells, expected {width})"
                    )
                try:
                    labels.append(int(row[0]))
                    rows.append([float(v) for v in row[1:]])
                except ValueError as exc:
                    raise FormatError(f"{path}:{lineno}: non-numeric cell") from exc
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    if not rows:
        raise FormatError(f"{path}: no data rows")
    lab = np.asarray(labels, dtype=np.int64)
    if n_classes is None:
        n_classes = int(lab.max()) + 1
    return EmbeddingDataset(
        name=name if name is not None else Path(path).stem,
        vectors=np.asarray(rows, dtype=np.float32),
        labels=lab,
        n_classes=n_classes,
    )
