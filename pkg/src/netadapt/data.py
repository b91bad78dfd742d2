"""Datasets: CSV ingestion, synthetic two-moon domains and PCA reduction.

Feature matrices are ``d x n`` (one point per column). CSV files store one
point per row and are transposed on load.
"""
import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NonIntegerLabel, ParseError, RaggedRows


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = ""
    role: str = "source"

    def __post_init__(self):
        if self.features.ndim != 2:
            raise DimensionMismatch("features must be d x n")
        if self.labels is not None and self.labels.shape != (self.features.shape[1],):
            raise DimensionMismatch(
                f"{self.labels.shape[0]} labels for {self.features.shape[1]} points"
            )
        if self.role not in ("source", "target"):
            raise ValueError(f"role must be 'source' or 'target', got {self.role!r}")

    @property
    def n(self):
        return self.features.shape[1]

    @property
    def dim(self):
        return self.features.shape[0]


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh)) if any(c.strip() for c in row)]
    if not rows:
        raise ParseError(f"{path}: file is empty")
    if not all(_is_number(c) for c in rows[0][1]):
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: header but no data rows")
    width = len(rows[0][1])
    for lineno, row in rows:
        if len(row) != width:
            raise RaggedRows(f"{path}: expected {width} fields, got {len(row)}", row=lineno)
    return rows, width


def read_csv(path, has_labels=False):
    """Raw ``(features d x n, labels or None)`` without label remapping."""
    rows, width = _read_rows(path)
    n_feat = width - 1 if has_labels else width
    if n_feat < 1:
        raise ParseError(f"{path}: no feature columns")
    feats = np.empty((len(rows), n_feat))
    labels = np.empty(len(rows), dtype=int) if has_labels else None
    for r, (lineno, row) in enumerate(rows):
        for j in range(n_feat):
            try:
                feats[r, j] = float(row[j])
            except ValueError:
                raise ParseError(f"{path}: not a number: {row[j]!r}", row=lineno, col=j + 1) from None
        if has_labels:
            cell = row[-1].strip()
            try:
                value = float(cell)
            except ValueError:
                raise NonIntegerLabel(f"{path}: label {cell!r}", row=lineno, col=width) from None
            if not value.is_integer():
                raise NonIntegerLabel(f"{path}: label {cell!r}", row=lineno, col=width)
            labels[r] = int(value)
    if not np.all(np.isfinite(feats)):
        raise ParseError(f"{path}: non-finite feature value")
    return feats.T, labels


def label_mapping(*label_sets):
    """Map the joint label vocabulary onto ``1..C`` in sorted order."""
    vocab = sorted({int(v) for ls in label_sets if ls is not None for v in ls})
    return {v: i + 1 for i, v in enumerate(vocab)}


def remap(labels, mapping):
    if labels is None:
        return None
    return np.array([mapping[int(v)] for v in labels], dtype=int)


def load_csv(path, has_labels=False, name=None, role="source", mapping=None):
    """Load one dataset; labels are remapped to ``1..C`` (own vocabulary unless ``mapping`` given)."""
    feats, labels = read_csv(path, has_labels)
    if labels is not None:
        labels = remap(labels, mapping or label_mapping(labels))
    return Dataset(feats, labels, name or str(path), role)


def load_pair(source_path, target_path, target_has_labels=False):
    """Load a source/target pair with a shared label mapping.

    Returns ``(source, target, mapping)`` where ``mapping`` sends raw labels
    to ``1..C``.
    """
    xs, ys = read_csv(source_path, has_labels=True)
    xt, yt = read_csv(target_path, has_labels=target_has_labels)
    if xs.shape[0] != xt.shape[0]:
        raise DimensionMismatch(f"source has {xs.shape[0]} features, target {xt.shape[0]}")
    mapping = label_mapping(ys, yt)
    src = Dataset(xs, remap(ys, mapping), str(source_path), "source")
    tgt = Dataset(xt, remap(yt, mapping), str(target_path), "target")
    return src, tgt, mapping


def save_csv(path, dataset):
    """Write one point per row with 17 significant digits (round-trips float64)."""
    rows = dataset.features.T
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for i, row in enumerate(rows):
            cells = [format(float(v), ".17g") for v in row]
            if dataset.labels is not None:
                cells.append(str(int(dataset.labels[i])))
            writer.writerow(cells)


def _moons(rng, n_per_class, noise_sd):
    t_upper = rng.uniform(0.0, np.pi, n_per_class)
    t_lower = rng.uniform(0.0, np.pi, n_per_class)
    upper = np.vstack([np.cos(t_upper), np.sin(t_upper)])
    lower = np.vstack([1.0 - np.cos(t_lower), 0.5 - np.sin(t_lower)])
    x = np.hstack([upper, lower])
    if noise_sd > 0:
        x = x + rng.normal(scale=noise_sd, size=x.shape)
    y = np.repeat([1, 2], n_per_class)
    return x, y


MOON_CENTER = np.array([0.5, 0.25])


def two_moon(n_per_class=100, noise_sd=0.1, rotation_deg=30.0, translation=(0.0, 0.0), seed=0):
    """Source and shifted target two-moon domains.

    The target is a fresh draw from the source distribution, rotated by
    ``rotation_deg`` about the centre of the moons and then translated.
    Labels are 1 (upper moon) and 2 (lower moon); target labels are for
    scoring only.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    rng = np.random.default_rng(seed)
    xs, ys = _moons(rng, n_per_class, noise_sd)
    xt, yt = _moons(rng, n_per_class, noise_sd)
    theta = math.radians(rotation_deg)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    center = MOON_CENTER[:, None]
    xt = rot @ (xt - center) + center + np.asarray(translation, dtype=float).reshape(2, 1)
    return (
        Dataset(xs, ys, "two_moon_source", "source"),
        Dataset(xt, yt, "two_moon_target", "target"),
    )


def pca_reduce(x, target_dim):
    """Project mean-centred columns of ``x`` onto the top ``target_dim`` principal directions.

    Each direction's largest-magnitude coordinate is made positive.
    Returns a ``target_dim x n`` matrix.
    """
    x = np.asarray(x, dtype=float)
    d, n = x.shape
    if not 1 <= target_dim <= min(d, n):
        raise DimensionMismatch(f"target_dim must be in [1, {min(d, n)}], got {target_dim}")
    centered = x - x.mean(axis=1, keepdims=True)
    u, _, _ = np.linalg.svd(centered, full_matrices=False)
    u = u[:, :target_dim]
    big = np.argmax(np.abs(u), axis=0)
    u = u * np.sign(u[big, np.arange(target_dim)])
    return u.T @ centered
