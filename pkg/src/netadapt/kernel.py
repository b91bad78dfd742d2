"""Gram matrices over column-oriented data (one point per column)."""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .errors import DegenerateData, DimensionMismatch
from .linalg import as_matrix

KINDS = ("gaussian", "linear")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice.

    ``bandwidth`` is the squared width sigma^2 of the gaussian kernel
    ``exp(-|x - y|^2 / sigma^2)``; ``None`` selects the median heuristic.
    It is ignored for the linear kernel.
    """

    kind: str = "gaussian"
    bandwidth: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kernel kind must be one of {KINDS}, got {self.kind!r}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError(f"fixed bandwidth must be positive, got {self.bandwidth}")


@dataclass(frozen=True)
class KernelMatrix:
    gram: np.ndarray
    spec: KernelSpec
    resolved_bandwidth: Optional[float] = None

    @property
    def n(self):
        return self.gram.shape[0]


def median_sq_dist(x):
    """Median of the pairwise squared Euclidean distances between columns of ``x``."""
    x = as_matrix(x)
    if x.shape[1] < 2:
        raise DimensionMismatch("need at least two points for the median heuristic")
    med = float(np.median(pdist(x.T, "sqeuclidean")))
    if med <= 0.0:
        raise DegenerateData("median squared distance is 0; supply a fixed bandwidth")
    return med


def resolve_bandwidth(x, spec):
    if spec.kind != "gaussian":
        return None
    if spec.bandwidth is not None:
        return float(spec.bandwidth)
    return median_sq_dist(x)


def _evaluate(x, y, kind, sigma2):
    if kind == "linear":
        return x.T @ y
    return np.exp(-cdist(x.T, y.T, "sqeuclidean") / sigma2)


def gram(x, spec=KernelSpec()):
    """Kernel matrix ``K[i, j] = k(x_i, x_j)`` with the bandwidth resolved from ``x``."""
    x = as_matrix(x)
    sigma2 = resolve_bandwidth(x, spec)
    if spec.kind == "linear":
        k = x.T @ x
    else:
        k = np.exp(-squareform(pdist(x.T, "sqeuclidean")) / sigma2)
    k = 0.5 * (k + k.T)
    return KernelMatrix(k, spec, sigma2)


def cross_gram(x_train, x_new, spec, resolved_bandwidth=None):
    """``K[i, j] = k(x_train_i, x_new_j)`` using a bandwidth fixed from training data.

    ``resolved_bandwidth`` is required for the median-heuristic gaussian
    kernel; pass ``KernelMatrix.resolved_bandwidth`` of the training gram.
    """
    x_train = as_matrix(x_train, "x_train")
    x_new = as_matrix(x_new, "x_new")
    if x_train.shape[0] != x_new.shape[0]:
        raise DimensionMismatch(
            f"feature dimensions differ: {x_train.shape[0]} vs {x_new.shape[0]}"
        )
    sigma2 = None
    if spec.kind == "gaussian":
        sigma2 = resolved_bandwidth if resolved_bandwidth is not None else spec.bandwidth
        if sigma2 is None:
            raise ValueError("cross_gram needs the bandwidth resolved on the training data")
    return _evaluate(x_train, x_new, spec.kind, sigma2)


def centering_matrix(n):
    """``H = I - 1/n``; symmetric, idempotent and annihilates constants."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.eye(n) - np.full((n, n), 1.0 / n)
