"""Nonlinear Embedding Transform and the spectral baselines it generalizes.

All fits solve ``S A = B A Lambda`` with

    S = alpha K (sum_c M_c) K^T + beta K L K^T + gamma I
    B = K D K^T + ridge I

and keep the ``k`` smallest generalized eigenvectors. JDA is the
``alpha = 1, beta = 0`` configuration, TCA additionally stops after the
first (marginal-only) solve, and KPCA is the unconstrained variance
maximizer over ``K H K^T``.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .classify import one_nn_predict
from .embedding import adjacency, normalized_laplacian
from .errors import DimensionMismatch, NotPositiveDefinite
from .kernel import KernelSpec, centering_matrix, cross_gram, gram
from .linalg import (
    fix_signs,
    gen_sym_eigen_smallest,
    regularized_cholesky,
    sym_eigen,
    symmetrize,
)
from .mmd import LabeledSplit, MmdMatrices, mmd_vectors

logger = logging.getLogger(__name__)

RIDGE_SCALE = 1e-6


@dataclass(frozen=True)
class HyperParams:
    """NET weights: ``alpha`` (MMD), ``beta`` (embedding), ``gamma`` (||A||_F^2)."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    k: int = 20
    iterations: int = 10
    ridge: Optional[float] = None

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.ridge is not None and self.ridge < 0:
            raise ValueError("ridge must be nonnegative")

    def check(self, n):
        if self.k > n:
            raise DimensionMismatch(f"k={self.k} exceeds the number of points n={n}")


@dataclass
class ProjectionResult:
    a: np.ndarray
    eigenvalues: np.ndarray
    z: np.ndarray
    kernel: object = None
    x: Optional[np.ndarray] = None
    n_source: Optional[int] = None
    ridge: float = 0.0
    target_label_history: List[np.ndarray] = field(default_factory=list)
    objective_history: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def z_source(self):
        return self.z[:, : self.n_source]

    @property
    def z_target(self):
        return self.z[:, self.n_source :]

    @property
    def target_pred(self):
        return self.target_label_history[-1] if self.target_label_history else None

    def transform(self, x_new):
        """Project new points (columns of ``x_new``) through their kernel against the fit data."""
        k_new = cross_gram(self.x, x_new, self.kernel.spec, self.kernel.resolved_bandwidth)
        return self.a.T @ k_new


def default_ridge(b):
    n = b.shape[0]
    return RIDGE_SCALE * float(np.trace(b)) / n


def assemble_system(kern, mmds, pieces, hp):
    """Left- and right-hand matrices ``(s, b)`` of the generalized eigenproblem.

    ``mmds`` may be ``None`` when ``alpha`` is zero. ``b`` excludes the ridge.
    """
    k = getattr(kern, "gram", kern)
    n = k.shape[0]
    if pieces.laplacian.shape != (n, n):
        raise DimensionMismatch(f"graph has {pieces.laplacian.shape[0]} nodes, kernel {n}")
    s = hp.gamma * np.eye(n)
    if hp.alpha:
        m = mmds.total() if isinstance(mmds, MmdMatrices) else np.asarray(mmds)
        if m.shape != (n, n):
            raise DimensionMismatch(f"MMD matrix shape {m.shape} != ({n}, {n})")
        s += hp.alpha * (k @ m @ k.T)
    if hp.beta:
        s += hp.beta * (k @ pieces.laplacian @ k.T)
    b = (k * pieces.degrees[None, :]) @ k.T
    return symmetrize(s), symmetrize(b)


def solve_projection(s, b, hp, kern=None, chol=None):
    """k smallest generalized eigenpairs; ``z = A^T K`` when a kernel is given.

    ``chol`` is an optional precomputed Cholesky factor of ``b + ridge I``
    (it must match ``hp.ridge`` or the default ridge of ``b``).
    """
    ridge = default_ridge(b) if hp.ridge is None else hp.ridge
    hp.check(s.shape[0])
    try:
        pairs = gen_sym_eigen_smallest(s, b, hp.k, ridge, chol=chol)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(f"{exc} (current ridge {ridge:g})") from None
    a = fix_signs(pairs.vectors)
    z = None
    if kern is not None:
        z = a.T @ getattr(kern, "gram", kern)
    return ProjectionResult(a=a, eigenvalues=pairs.values, z=z, kernel=kern, ridge=ridge)


def net_objective(a, s):
    """``tr(A^T S A)``; at a B-orthonormal ``A`` this is the NET objective."""
    return float(np.sum(a * (s @ a)))


def _stack(x_source, x_target):
    x_source = np.asarray(x_source, dtype=float)
    x_target = np.asarray(x_target, dtype=float)
    if x_source.ndim != 2 or x_target.ndim != 2:
        raise DimensionMismatch("data must be 2-D (features x points)")
    if x_source.shape[0] != x_target.shape[0]:
        raise DimensionMismatch(
            f"source has {x_source.shape[0]} features, target {x_target.shape[0]}"
        )
    return np.hstack([x_source, x_target])


def net_fit(x_source, y_source, x_target, spec=KernelSpec(), hp=HyperParams(), conditional=True):
    """Fit NET with pseudo-label refinement.

    The first solve aligns marginals only; each later iteration rebuilds the
    class-conditional MMD matrices from the previous 1-NN target predictions
    and solves again. ``conditional=False`` keeps the marginal-only system in
    every iteration.
    """
    x = _stack(x_source, x_target)
    ns = x_source.shape[1]
    split = LabeledSplit(y_source, x.shape[1] - ns)
    hp.check(split.n)
    kern = gram(x, spec)
    pieces = normalized_laplacian(adjacency(split))
    k = kern.gram
    n = split.n
    # iteration-invariant parts of the system; the MMD term is low rank
    kl = symmetrize(k @ pieces.laplacian @ k.T)
    b = symmetrize((k * pieces.degrees[None, :]) @ k.T)
    ridge = default_ridge(b) if hp.ridge is None else hp.ridge
    chol = regularized_cholesky(b, ridge)
    fixed = hp.beta * kl + hp.gamma * np.eye(n)
    split_t = split
    labels, objectives = [], []
    for it in range(hp.iterations):
        if it > 0 and conditional:
            split_t = split.with_predictions(labels[-1])
        ku = k @ mmd_vectors(split_t, conditional)
        s = fixed + hp.alpha * (ku @ ku.T)
        res = solve_projection(s, b, replace(hp, ridge=ridge), kern, chol=chol)
        pred = one_nn_predict(res.z[:, :ns], split.source_labels, res.z[:, ns:])
        proj = ku.T @ res.a
        mmd_val = float(np.sum(proj * proj))
        embed_val = net_objective(res.a, kl)
        labels.append(pred)
        objectives.append((mmd_val, embed_val))
        logger.debug("iteration %d: mmd=%.6g embed=%.6g", it + 1, mmd_val, embed_val)
    res.x = x
    res.n_source = ns
    res.target_label_history = labels
    res.objective_history = objectives
    return res


def jda_fit(x_source, y_source, x_target, spec=KernelSpec(), hp=HyperParams()):
    """JDA: ``net_fit`` with ``alpha = 1`` and ``beta = 0``."""
    return net_fit(x_source, y_source, x_target, spec, replace(hp, alpha=1.0, beta=0.0))


def tca_fit(x_source, y_source, x_target, spec=KernelSpec(), hp=HyperParams()):
    """TCA: one marginal-only solve with ``alpha = 1`` and ``beta = 0``."""
    hp = replace(hp, alpha=1.0, beta=0.0, iterations=1)
    return net_fit(x_source, y_source, x_target, spec, hp, conditional=False)


def kpca_fit(x, spec=KernelSpec(), k=20, n_source=None, y_source=None):
    """Kernel PCA: top-``k`` unit eigenvectors of ``K H K^T``.

    Columns are returned in ascending eigenvalue order. With ``n_source``
    and ``y_source`` the first ``n_source`` columns of ``x`` are treated as
    labeled source data and the remaining columns are classified by 1-NN.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[1]
    if not 1 <= k <= n:
        raise DimensionMismatch(f"k must be in [1, {n}], got {k}")
    kern = gram(x, spec)
    kk = kern.gram
    c = kk @ centering_matrix(n) @ kk.T
    pairs = sym_eigen(symmetrize(c))
    a = fix_signs(pairs.vectors[:, n - k :])
    res = ProjectionResult(
        a=a, eigenvalues=pairs.values[n - k :], z=a.T @ kk, kernel=kern, x=x, n_source=n_source
    )
    if n_source is not None and y_source is not None and n_source < n:
        res.target_label_history = [
            one_nn_predict(res.z[:, :n_source], y_source, res.z[:, n_source:])
        ]
    return res
