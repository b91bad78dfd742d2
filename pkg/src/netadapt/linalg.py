"""Dense symmetric linear algebra.

Cholesky factorization, symmetric eigendecomposition (LAPACK or cyclic
Jacobi) and the symmetric-definite generalized eigenproblem
``S a = lam (B + ridge I) a`` reduced through the Cholesky factor of the
right-hand side.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NoConvergence, NotPositiveDefinite, NotSymmetric

SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class EigenPairs:
    """Eigenvalues in ascending order with eigenvectors stored as columns."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.values.shape[0]:
            raise DimensionMismatch("vectors must have one column per eigenvalue")

    def __len__(self):
        return self.values.shape[0]


def as_matrix(m, name="matrix"):
    """Validate a dense 2-D float matrix with finite entries."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf")
    return m


def check_symmetric(m, name="matrix", rtol=SYMMETRY_RTOL):
    m = as_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.T) > rtol * scale:
        raise NotSymmetric(f"{name} is not symmetric within {rtol:g} relative tolerance")
    return m


def symmetrize(m):
    return 0.5 * (m + m.T)


def cholesky(m):
    """Lower-triangular ``L`` with ``L @ L.T == m``.

    Raises
    ------
    NotSymmetric
        If ``m`` is not symmetric to ``1e-10 * ||m||_F``.
    NotPositiveDefinite
        If a pivot is not strictly positive.
    """
    m = check_symmetric(m)
    try:
        return np.linalg.cholesky(symmetrize(m))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"matrix is not positive definite: {exc}") from None


def _jacobi_eigh(m, max_sweeps):
    a = m.copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    tol = n * np.finfo(float).eps * scale
    negligible = 1e-3 * np.finfo(float).eps * scale
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= negligible:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    off = np.linalg.norm(a - np.diag(np.diag(a)))
    if off <= tol:
        return np.diag(a).copy(), v
    raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def sym_eigen(m, method="lapack", k=None, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix, ascending.

    Parameters
    ----------
    m : (n, n) array
        Symmetric matrix.
    method : {"lapack", "jacobi"}
        ``"jacobi"`` runs cyclic Jacobi rotations with a budget of
        ``max_sweeps`` sweeps and is meant for small matrices.
    k : int, optional
        Only return the ``k`` smallest pairs.
    """
    m = symmetrize(check_symmetric(m))
    n = m.shape[0]
    if k is not None and not 1 <= k <= n:
        raise DimensionMismatch(f"k must be in [1, {n}], got {k}")
    if method == "lapack":
        subset = None if k is None or k == n else (0, k - 1)
        values, vectors = scipy.linalg.eigh(m, subset_by_index=subset)
    elif method == "jacobi":
        values, vectors = _jacobi_eigh(m, max_sweeps)
        order = np.argsort(values, kind="stable")
        values, vectors = values[order], vectors[:, order]
        if k is not None:
            values, vectors = values[:k], vectors[:, :k]
    else:
        raise ValueError(f"unknown eigen method {method!r}")
    return EigenPairs(values, vectors)


def fix_signs(vectors, rtol=1e-10):
    """Flip columns so that each column's first non-negligible entry is positive."""
    vectors = np.array(vectors, dtype=float, copy=True)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        scale = np.max(np.abs(col))
        if scale == 0.0:
            continue
        first = np.flatnonzero(np.abs(col) > rtol * scale)[0]
        if col[first] < 0:
            vectors[:, j] = -col
    return vectors


def regularized_cholesky(b, ridge):
    """Cholesky factor of ``b + ridge I``."""
    rhs = symmetrize(b) + ridge * np.eye(b.shape[0])
    try:
        return cholesky(rhs)
    except NotPositiveDefinite:
        raise NotPositiveDefinite(
            f"b + ridge*I is not positive definite (ridge={ridge:g}); raise ridge"
        ) from None


def gen_sym_eigen_smallest(s, b, k, ridge=0.0, method="lapack", chol=None):
    """The ``k`` smallest solutions of ``s a = lam (b + ridge I) a``.

    The right-hand side is factored as ``L L^T`` and the standard problem
    ``L^-1 s L^-T v = lam v`` is solved; ``a = L^-T v``. Returned columns
    are orthonormal in the ``b + ridge I`` inner product. ``chol`` may
    carry a precomputed factor of ``b + ridge I`` for repeated solves
    against the same right-hand side.

    Raises
    ------
    NotPositiveDefinite
        If ``b + ridge I`` has no Cholesky factor; increase ``ridge``.
    """
    s = check_symmetric(s, "s")
    b = check_symmetric(b, "b")
    if s.shape != b.shape:
        raise DimensionMismatch(f"s has shape {s.shape} but b has shape {b.shape}")
    n = s.shape[0]
    if not 1 <= k <= n:
        raise DimensionMismatch(f"k must be in [1, {n}], got {k}")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    if chol is None:
        chol = regularized_cholesky(b, ridge)
    half = scipy.linalg.solve_triangular(chol, symmetrize(s), lower=True)
    reduced = scipy.linalg.solve_triangular(chol, half.T, lower=True)
    pairs = sym_eigen(symmetrize(reduced), method=method, k=k)
    a = scipy.linalg.solve_triangular(chol.T, pairs.vectors, lower=False)
    return EigenPairs(pairs.values, a)
