"""Dataset ingestion, class balancing, and synthetic data with known MI.

File formats:

* CSV: comma-separated, UTF-8, one sample per row, optional single header
  line (detected by a non-numeric first token).
* FAM1: magic ``FAM1``, then row and column counts as little-endian
  uint32, then row-major little-endian float32 values. Compact on disk;
  values are widened to float64 in memory.
* Metadata CSV: header-required columns ``id, split, label`` plus an
  optional ``group``.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import as_matrix, as_vector
from .errors import ParseError

__all__ = [
    "read_features",
    "write_features",
    "read_attribute",
    "write_attribute",
    "MetadataRow",
    "read_metadata",
    "BalanceResult",
    "balance_classes",
    "SyntheticSpec",
    "gen_synthetic",
    "embed_attributes",
]

FAM1_MAGIC = b"FAM1"
SPLIT_NAMES = ("train", "validation", "test")


def _read_matrix_csv(path) -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split(",")
            if not rows and width is None:
                try:
                    float(tokens[0])
                except ValueError:
                    continue  # header line
            try:
                values = [float(t) for t in tokens]
            except ValueError as exc:
                raise ParseError(f"non-numeric value ({exc})", path=path, line=lineno) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(
                    f"row has {len(values)} columns, expected {width}", path=path, line=lineno
                )
            rows.append(values)
    if not rows:
        raise ParseError("no data rows", path=path)
    return np.asarray(rows, dtype=np.float64)


def _write_matrix_csv(path, x: np.ndarray, header=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in x:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _read_matrix_fam1(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:4] != FAM1_MAGIC:
        raise ParseError("not a FAM1 file (bad magic)", path=path)
    rows, cols = struct.unpack("<II", blob[4:12])
    expected = 12 + 4 * rows * cols
    if len(blob) != expected:
        raise ParseError(
            f"expected {expected} bytes for {rows}x{cols} matrix, got {len(blob)}", path=path
        )
    data = np.frombuffer(blob, dtype="<f4", offset=12)
    return data.reshape(rows, cols).astype(np.float64)


def _write_matrix_fam1(path, x: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(FAM1_MAGIC)
        fh.write(struct.pack("<II", x.shape[0], x.shape[1]))
        fh.write(np.ascontiguousarray(x, dtype="<f4").tobytes())


def _sniff_format(path) -> str:
    with open(path, "rb") as fh:
        return "fam1" if fh.read(4) == FAM1_MAGIC else "csv"


def read_features(path, fmt: str | None = None) -> np.ndarray:
    """Read a feature matrix from CSV or FAM1 (auto-detected by magic)."""
    fmt = fmt or _sniff_format(path)
    if fmt == "csv":
        return _read_matrix_csv(path)
    if fmt == "fam1":
        return _read_matrix_fam1(path)
    raise ValueError(f"unknown format {fmt!r}, expected 'csv' or 'fam1'")


def write_features(path, features, fmt: str = "csv", header=None) -> None:
    """Write a feature matrix as CSV or FAM1 (float32 on disk)."""
    x = as_matrix(features, "features")
    if fmt == "csv":
        _write_matrix_csv(path, x, header=header)
    elif fmt == "fam1":
        _write_matrix_fam1(path, x)
    else:
        raise ValueError(f"unknown format {fmt!r}, expected 'csv' or 'fam1'")


def read_attribute(path, fmt: str | None = None) -> np.ndarray:
    """Read a single-column attribute vector (CSV or FAM1)."""
    mat = read_features(path, fmt=fmt)
    if mat.shape[1] != 1:
        raise ParseError(f"attribute file must have 1 column, found {mat.shape[1]}", path=path)
    return mat[:, 0]


def write_attribute(path, attribute, fmt: str = "csv", header=None) -> None:
    y = as_vector(attribute, "attribute")
    write_features(path, y[:, None], fmt=fmt, header=header)


@dataclass(frozen=True)
class MetadataRow:
    sample_id: str
    split: str
    label: str
    group: str | None = None


def read_metadata(path) -> list[MetadataRow]:
    """Read sample metadata (id, split, label[, group]); header required."""
    rows: list[MetadataRow] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("empty metadata file", path=path)
        missing = {"id", "split", "label"} - set(reader.fieldnames)
        if missing:
            raise ParseError(f"missing required columns: {sorted(missing)}", path=path)
        for lineno, rec in enumerate(reader, start=2):
            split = (rec["split"] or "").strip()
            if split not in SPLIT_NAMES:
                raise ParseError(
                    f"split must be one of {SPLIT_NAMES}, got {split!r}", path=path, line=lineno
                )
            group = rec.get("group")
            rows.append(
                MetadataRow(
                    sample_id=rec["id"].strip(),
                    split=split,
                    label=(rec["label"] or "").strip(),
                    group=group.strip() if group else None,
                )
            )
    if not rows:
        raise ParseError("no metadata rows", path=path)
    return rows


@dataclass
class BalanceResult:
    """Selected sample ids per split, with post-selection class counts."""

    selected: dict[str, list[str]]
    counts: dict[str, dict[str, int]]


def balance_classes(rows: list[MetadataRow], seed: int = 0) -> BalanceResult:
    """Equalize class counts within each split by downsampling the majority.

    Within each split independently, every class is downsampled uniformly
    without replacement to the size of that split's smallest class (the
    minority class is kept whole, nothing is duplicated). Deterministic
    for a fixed seed. Group ids are carried in the metadata but not used;
    balancing is per sample.
    """
    splits: dict[str, list[MetadataRow]] = {}
    for row in rows:
        splits.setdefault(row.split, []).append(row)
    all_labels = sorted({row.label for row in rows})

    rng = np.random.default_rng(seed)
    selected: dict[str, list[str]] = {}
    counts: dict[str, dict[str, int]] = {}
    for split in sorted(splits):
        by_label: dict[str, list[int]] = {}
        for i, row in enumerate(splits[split]):
            by_label.setdefault(row.label, []).append(i)
        missing = [lab for lab in all_labels if lab not in by_label]
        if missing:
            raise ValueError(
                f"split {split!r} is missing class(es) {missing}; cannot balance"
            )
        target = min(len(ix) for ix in by_label.values())
        keep: list[int] = []
        for label in sorted(by_label):
            ix = by_label[label]
            if len(ix) > target:
                chosen = rng.choice(len(ix), size=target, replace=False)
                keep.extend(ix[k] for k in chosen)
            else:
                keep.extend(ix)
        keep.sort()  # preserve original row order
        selected[split] = [splits[split][i].sample_id for i in keep]
        counts[split] = {
            label: sum(1 for i in keep if splits[split][i].label == label)
            for label in sorted(by_label)
        }
    return BalanceResult(selected=selected, counts=counts)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic dataset with analytically known MI.

    Kinds:

    * ``gaussian_pair``: 1-D feature and attribute, jointly Gaussian with
      correlation ``rho``; MI = -0.5*ln(1 - rho^2).
    * ``independent``: ``dim``-dimensional standard-normal features and an
      independent attribute; MI = 0.
    * ``embedded_attribute``: features = a*w + noise for a unit random
      direction w and noise std 1/snr; MI = 0.5*ln(1 + snr^2) for a
      continuous attribute, unknown (None) for a binary one.
    """

    kind: str
    n: int
    dim: int = 1
    rho: float | None = None
    snr: float | None = None
    attribute_type: str = "continuous"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gaussian_pair", "embedded_attribute", "independent"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.attribute_type not in ("continuous", "binary"):
            raise ValueError(f"unknown attribute_type {self.attribute_type!r}")
        if self.kind == "gaussian_pair":
            if self.rho is None or not (-1.0 < self.rho < 1.0):
                raise ValueError(f"gaussian_pair needs |rho| < 1, got {self.rho}")
            if self.dim != 1:
                raise ValueError("gaussian_pair is 1-dimensional; leave dim at 1")
        if self.kind == "embedded_attribute":
            if self.snr is None or self.snr <= 0:
                raise ValueError(f"embedded_attribute needs snr > 0, got {self.snr}")


def _draw_attribute(rng, n: int, attribute_type: str) -> np.ndarray:
    if attribute_type == "binary":
        return (rng.random(n) < 0.5).astype(np.float64)
    return rng.standard_normal(n)


def gen_synthetic(spec: SyntheticSpec):
    """Generate (features, attribute, true_mi_nats or None) per ``spec``."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "gaussian_pair":
        z1 = rng.standard_normal(spec.n)
        z2 = rng.standard_normal(spec.n)
        f = z1[:, None]
        a = spec.rho * z1 + np.sqrt(1.0 - spec.rho**2) * z2
        true_mi = -0.5 * np.log(1.0 - spec.rho**2)
        return f, a, float(true_mi)
    if spec.kind == "independent":
        f = rng.standard_normal((spec.n, spec.dim))
        a = _draw_attribute(rng, spec.n, spec.attribute_type)
        return f, a, 0.0
    # embedded_attribute
    a = _draw_attribute(rng, spec.n, spec.attribute_type)
    w = rng.standard_normal(spec.dim)
    w /= np.linalg.norm(w)
    noise = rng.standard_normal((spec.n, spec.dim)) / spec.snr
    f = a[:, None] * w + noise
    if spec.attribute_type == "continuous":
        return f, a, float(0.5 * np.log1p(spec.snr**2))
    return f, a, None


def embed_attributes(
    n: int,
    dim: int,
    snrs,
    seed: int = 0,
    attribute_type: str = "continuous",
):
    """Embed several attributes in one feature matrix at chosen SNRs.

    Each attribute gets its own orthonormal direction, scaled by its SNR,
    plus unit Gaussian noise, so for continuous attributes
    MI(features; attribute_k) = 0.5*ln(1 + snr_k^2) exactly and the
    attributes are mutually independent. Returns (features, attribute
    matrix with one column per SNR, list of true MI values or Nones).
    """
    snrs = [float(s) for s in snrs]
    k = len(snrs)
    if k < 1:
        raise ValueError("need at least one snr")
    if any(s <= 0 for s in snrs):
        raise ValueError(f"snrs must be positive, got {snrs}")
    if dim < k:
        raise ValueError(f"dim={dim} cannot hold {k} orthogonal directions")
    rng = np.random.default_rng(seed)
    attrs = np.column_stack([_draw_attribute(rng, n, attribute_type) for _ in range(k)])
    directions = np.linalg.qr(rng.standard_normal((dim, k)))[0]
    features = (attrs * np.asarray(snrs)) @ directions.T
    features += rng.standard_normal((n, dim))
    if attribute_type == "continuous":
        true_mi = [float(0.5 * np.log1p(s**2)) for s in snrs]
    else:
        true_mi = [None] * k
    return features, attrs, true_mi
