"""Label-similarity graph and its normalized Laplacian."""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroDegree


@dataclass(frozen=True)
class GraphPieces:
    w: np.ndarray
    degrees: np.ndarray
    laplacian: np.ndarray

    @property
    def d(self):
        return np.diag(self.degrees)


def adjacency(split):
    """Binary adjacency: 1 for same-label source pairs and on the diagonal.

    Target points carry no labels, so their rows and columns only hold the
    self-loop.
    """
    n, ns = split.n, split.n_source
    w = np.eye(n)
    ys = split.source_labels
    w[:ns, :ns] = np.maximum(w[:ns, :ns], (ys[:, None] == ys[None, :]).astype(float))
    return w


def normalized_laplacian(w):
    """``L = I - D^-1/2 W D^-1/2`` with ``D = diag(row sums of W)``."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DimensionMismatch(f"adjacency must be square, got {w.shape}")
    if np.any(w < 0):
        raise ValueError("adjacency weights must be nonnegative")
    deg = w.sum(axis=1)
    if np.any(deg <= 0):
        raise ZeroDegree(f"{int(np.sum(deg <= 0))} node(s) have zero degree")
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = np.eye(w.shape[0]) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    lap = 0.5 * (lap + lap.T)
    return GraphPieces(w, deg, lap)


def embedding_objective_oracle(z, pieces):
    """``1/2 sum_ij |z_i/sqrt(d_i) - z_j/sqrt(d_j)|^2 w_ij`` evaluated pair by pair."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    n = pieces.w.shape[0]
    if z.shape[1] != n:
        raise DimensionMismatch(f"z has {z.shape[1]} columns for a graph on {n} nodes")
    total = 0.0
    for i in range(n):
        zi = z[:, i] / np.sqrt(pieces.degrees[i])
        for j in range(n):
            if pieces.w[i, j] == 0:
                continue
            diff = zi - z[:, j] / np.sqrt(pieces.degrees[j])
            total += pieces.w[i, j] * float(diff @ diff)
    return 0.5 * total
