"""MMD coefficient matrices for marginal and class-conditional alignment.

Indices ``0 .. n_s-1`` are source points and ``n_s .. n-1`` target points,
matching the column order of ``X = [X_S, X_T]``.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import DimensionMismatch, MissingPredictions


@dataclass(frozen=True)
class LabeledSplit:
    """Source labels plus (optionally) predicted target labels.

    ``n_target`` may be 0 only for graph construction; MMD matrices need
    both domains.
    """

    source_labels: np.ndarray
    n_target: int
    target_pred: Optional[np.ndarray] = None

    def __post_init__(self):
        ys = np.asarray(self.source_labels).astype(int, copy=False).ravel()
        object.__setattr__(self, "source_labels", ys)
        if ys.size < 1:
            raise ValueError("need at least one source point")
        if self.n_target < 0:
            raise ValueError("n_target must be nonnegative")
        if self.target_pred is not None:
            yt = np.asarray(self.target_pred).astype(int, copy=False).ravel()
            if yt.size != self.n_target:
                raise DimensionMismatch(
                    f"{yt.size} target predictions for {self.n_target} target points"
                )
            object.__setattr__(self, "target_pred", yt)

    @property
    def n_source(self):
        return self.source_labels.size

    @property
    def n(self):
        return self.n_source + self.n_target

    @property
    def classes(self):
        return np.unique(self.source_labels)

    def with_predictions(self, target_pred):
        return LabeledSplit(self.source_labels, self.n_target, target_pred)


@dataclass(frozen=True)
class MmdMatrices:
    m0: np.ndarray
    per_class: Dict[int, np.ndarray] = field(default_factory=dict)

    def total(self):
        out = self.m0.copy()
        for m in self.per_class.values():
            out += m
        return out


def _signed_indicator(n, src_idx, tgt_idx):
    u = np.zeros(n)
    u[src_idx] = 1.0 / len(src_idx)
    u[tgt_idx] = -1.0 / len(tgt_idx)
    return u


def marginal_mmd(split):
    """``M0 = u u^T`` with ``u = (1/n_s, ..., -1/n_t, ...)``."""
    if split.n_target < 1:
        raise ValueError("marginal MMD needs at least one target point")
    ns, n = split.n_source, split.n
    u = _signed_indicator(n, np.arange(ns), np.arange(ns, n))
    return np.outer(u, u)


def conditional_mmd(split, c):
    """MMD matrix restricted to class ``c``; ``None`` if either class subset is empty."""
    if split.target_pred is None:
        raise MissingPredictions("conditional MMD needs predicted target labels")
    src = np.flatnonzero(split.source_labels == c)
    tgt = split.n_source + np.flatnonzero(split.target_pred == c)
    if src.size == 0 or tgt.size == 0:
        return None
    u = _signed_indicator(split.n, src, tgt)
    return np.outer(u, u)


def mmd_vectors(split, conditional=True):
    """Columns ``u_c`` with ``M0 + sum_c M_c = U U^T`` (marginal column first)."""
    ns, n = split.n_source, split.n
    cols = [_signed_indicator(n, np.arange(ns), np.arange(ns, n))]
    if conditional and split.target_pred is not None:
        for c in split.classes:
            src = np.flatnonzero(split.source_labels == c)
            tgt = ns + np.flatnonzero(split.target_pred == c)
            if src.size and tgt.size:
                cols.append(_signed_indicator(n, src, tgt))
    return np.column_stack(cols)


def mmd_matrices(split, conditional=True):
    """``M0`` and, when predictions are present, every constructible ``M_c``."""
    per_class = {}
    if conditional and split.target_pred is not None:
        for c in split.classes:
            m = conditional_mmd(split, c)
            if m is not None:
                per_class[int(c)] = m
    return MmdMatrices(marginal_mmd(split), per_class)


def _gram_of(kern):
    return getattr(kern, "gram", kern)


def mmd_objective(a, kern, m):
    """``tr(A^T K M K^T A)``."""
    a = np.asarray(a, dtype=float)
    k = _gram_of(kern)
    if a.ndim == 1:
        a = a[:, None]
    if not (a.shape[0] == k.shape[0] == k.shape[1] == m.shape[0] == m.shape[1]):
        raise DimensionMismatch(
            f"shapes A{a.shape}, K{k.shape}, M{m.shape} do not agree"
        )
    ka = k.T @ a
    return float(np.sum(ka * (m @ ka)))


def direct_mmd_oracle(a, kern, split, c=None):
    """Squared distance between projected source and target means, computed directly.

    With ``c`` given, the means are taken over the class-``c`` subsets
    (source labels and predicted target labels); returns ``None`` when a
    subset is empty.
    """
    a = np.asarray(a, dtype=float)
    k = _gram_of(kern)
    if a.ndim == 1:
        a = a[:, None]
    if not (a.shape[0] == k.shape[0] == k.shape[1] == split.n):
        raise DimensionMismatch(f"shapes A{a.shape}, K{k.shape} and n={split.n} do not agree")
    ns = split.n_source
    if c is None:
        src = list(range(ns))
        tgt = list(range(ns, split.n))
    else:
        if split.target_pred is None:
            raise MissingPredictions("class-conditional oracle needs predicted target labels")
        src = [i for i in range(ns) if split.source_labels[i] == c]
        tgt = [ns + j for j in range(split.n_target) if split.target_pred[j] == c]
        if not src or not tgt:
            return None
    mean_s = sum(a.T @ k[:, i] for i in src) / len(src)
    mean_t = sum(a.T @ k[:, j] for j in tgt) / len(tgt)
    diff = mean_s - mean_t
    return float(diff @ diff)
