"""Parameter selection from a source-only validation set.

Source points are reweighted by kernel mean matching (KMM) toward the
target distribution; the most heavily weighted fraction of the source
becomes a labeled validation set. Each grid cell is fit without those
points and scored by 1-NN on their out-of-sample projections.
"""
import itertools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import numpy as np

from .classify import accuracy, one_nn_predict
from .errors import DimensionMismatch, Infeasible, NetAdaptError
from .kernel import KernelSpec, cross_gram, resolve_bandwidth
from .solver import HyperParams, jda_fit, net_fit

logger = logging.getLogger(__name__)

KMM_JITTER = 1e-8

DEFAULT_K_VALUES = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 200)
DEFAULT_WEIGHT_VALUES = (0, 0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1, 5, 10)


@dataclass(frozen=True)
class KmmConfig:
    """Box bound ``b_cap`` and sum slack ``epsilon`` of the KMM problem.

    ``epsilon=None`` means ``(sqrt(n_s) - 1) / sqrt(n_s)``.
    """

    b_cap: float = 10.0
    epsilon: Optional[float] = None
    max_iters: int = 5000
    step_tol: float = 1e-10

    def __post_init__(self):
        if not self.b_cap > 0:
            raise ValueError("b_cap must be positive")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def resolved_epsilon(self, n_source):
        if self.epsilon is not None:
            return float(self.epsilon)
        root = math.sqrt(n_source)
        return (root - 1.0) / root


@dataclass
class KmmWeights:
    w: np.ndarray
    objective: float
    feasible: bool
    iterations: int = 0


def kmm_problem(x_source, x_target, spec=KernelSpec()):
    """Quadratic term ``K_S`` (with jitter) and linear term ``kappa`` of the KMM QP.

    The gaussian bandwidth is resolved on the concatenated source and target.
    """
    x_source = np.asarray(x_source, dtype=float)
    x_target = np.asarray(x_target, dtype=float)
    if x_source.shape[0] != x_target.shape[0]:
        raise DimensionMismatch(
            f"source has {x_source.shape[0]} features, target {x_target.shape[0]}"
        )
    ns, nt = x_source.shape[1], x_target.shape[1]
    sigma2 = resolve_bandwidth(np.hstack([x_source, x_target]), spec)
    ks = cross_gram(x_source, x_source, spec, sigma2)
    ks = 0.5 * (ks + ks.T) + KMM_JITTER * np.eye(ns)
    kappa = (ns / nt) * cross_gram(x_source, x_target, spec, sigma2).sum(axis=1)
    return ks, kappa


def project_box_slab(v, b_cap, lo, hi, tol=1e-13):
    """Euclidean projection onto ``{0 <= w <= b_cap, lo <= sum(w) <= hi}``.

    The projection is ``clip(v - tau, 0, b_cap)`` for the scalar shift
    ``tau`` that puts the sum on the violated bound; ``tau`` is found by
    bisection.
    """
    w = np.clip(v, 0.0, b_cap)
    total = w.sum()
    if lo <= total <= hi:
        return w
    target = hi if total > hi else lo
    left, right = float(v.min()) - b_cap, float(v.max())
    for _ in range(200):
        mid = 0.5 * (left + right)
        if np.clip(v - mid, 0.0, b_cap).sum() > target:
            left = mid
        else:
            right = mid
        if right - left <= tol * max(1.0, abs(mid)):
            break
    return np.clip(v - 0.5 * (left + right), 0.0, b_cap)


def _lipschitz(ks, iters=100):
    v = np.ones(ks.shape[0]) / math.sqrt(ks.shape[0])
    lam = 0.0
    for _ in range(iters):
        u = ks @ v
        lam = float(np.linalg.norm(u))
        if lam == 0.0:
            return 1.0
        v = u / lam
    # power iteration underestimates; pad the bound
    return 1.05 * lam + 1e-12


def solve_box_qp(q, c, b_cap, lo, hi, max_iters=5000, step_tol=1e-10):
    """Minimize ``1/2 w^T q w - c^T w`` over the box/slab set.

    Accelerated projected gradient with function-value restarts.
    Returns ``(w, objective, iterations)``.
    """
    n = q.shape[0]

    def f(w):
        return 0.5 * float(w @ q @ w) - float(c @ w)

    step = 1.0 / _lipschitz(q)
    w = project_box_slab(np.ones(n), b_cap, lo, hi)
    y, t = w.copy(), 1.0
    fw = f(w)
    it = 0
    for it in range(1, max_iters + 1):
        w_new = project_box_slab(y - step * (q @ y - c), b_cap, lo, hi)
        f_new = f(w_new)
        if f_new > fw:
            # restart momentum from the last iterate
            y, t = w.copy(), 1.0
            continue
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = w_new + ((t - 1.0) / t_new) * (w_new - w)
        moved = np.linalg.norm(w_new - w)
        w, fw, t = w_new, f_new, t_new
        if moved <= step_tol * max(1.0, np.linalg.norm(w)):
            break
    return w, fw, it


def kmm_weights(x_source, x_target, spec=KernelSpec(), cfg=KmmConfig()):
    """Importance weights of source points matching the target kernel mean.

    Raises
    ------
    Infeasible
        If ``b_cap * n_s < n_s * (1 - epsilon)``.
    """
    ns = np.asarray(x_source).shape[1]
    eps = cfg.resolved_epsilon(ns)
    lo, hi = max(ns * (1.0 - eps), 0.0), ns * (1.0 + eps)
    if cfg.b_cap * ns < lo:
        raise Infeasible(
            f"box [0, {cfg.b_cap}] cannot reach the lower sum bound {lo:g} for n_s={ns}"
        )
    ks, kappa = kmm_problem(x_source, x_target, spec)
    w, obj, iters = solve_box_qp(ks, kappa, cfg.b_cap, lo, hi, cfg.max_iters, cfg.step_tol)
    slack = 1e-6 * ns
    feasible = bool(
        np.all(w >= 0) and np.all(w <= cfg.b_cap) and lo - slack <= w.sum() <= hi + slack
    )
    return KmmWeights(w, obj, feasible, iters)


def select_validation(weights, fraction=0.10):
    """Indices of the ``ceil(fraction * n_s)`` largest weights and the remaining indices.

    Ties go to the lower index. Both index arrays are sorted.
    """
    w = np.asarray(getattr(weights, "w", weights), dtype=float)
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    n_val = min(math.ceil(fraction * w.size), w.size)
    order = np.argsort(-w, kind="stable")
    val = np.sort(order[:n_val])
    rest = np.sort(order[n_val:])
    return val, rest


@dataclass(frozen=True)
class ParamGrid:
    k_values: Sequence[int] = DEFAULT_K_VALUES
    alpha_values: Sequence[float] = DEFAULT_WEIGHT_VALUES
    beta_values: Sequence[float] = DEFAULT_WEIGHT_VALUES
    gamma_values: Sequence[float] = DEFAULT_WEIGHT_VALUES

    def __post_init__(self):
        for name in ("k_values", "alpha_values", "beta_values", "gamma_values"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"{name} must not be empty")
            object.__setattr__(self, name, values)

    def cells(self, algo="net", iterations=10, ridge=None):
        """Hyperparameter cells in grid order (alpha, beta, gamma, k nested outermost first).

        JDA fixes ``alpha = 1`` and ``beta = 0`` and searches ``gamma`` and ``k``.
        """
        if algo == "jda":
            alphas, betas = (1.0,), (0.0,)
        elif algo == "net":
            alphas, betas = self.alpha_values, self.beta_values
        else:
            raise ValueError(f"grid search supports 'net' and 'jda', got {algo!r}")
        return [
            HyperParams(alpha=a, beta=b, gamma=g, k=k, iterations=iterations, ridge=ridge)
            for a, b, g, k in itertools.product(alphas, betas, self.gamma_values, self.k_values)
        ]


@dataclass
class GridResult:
    best: Optional[HyperParams]
    table: List[dict]
    weights: KmmWeights
    validation_idx: np.ndarray
    best_row: Optional[dict] = None

    def oracle_best(self):
        """Row with the highest target accuracy, when target labels were supplied for scoring."""
        rows = [r for r in self.table if r.get("target_accuracy") is not None]
        if not rows:
            return None
        return max(rows, key=lambda r: (r["target_accuracy"], -r["cell"]))


def _fit(algo, xs, ys, xt, spec, hp):
    if algo == "jda":
        return jda_fit(xs, ys, xt, spec, hp)
    return net_fit(xs, ys, xt, spec, hp)


def worker_count():
    try:
        return max(1, int(os.environ.get("NET_ADAPT_THREADS", "1")))
    except ValueError:
        return 1


def grid_search(
    x_source,
    y_source,
    x_target,
    spec=KernelSpec(),
    grid=ParamGrid(),
    cfg=KmmConfig(),
    algo="net",
    fraction=0.10,
    iterations=10,
    ridge=None,
    y_target=None,
    threads=None,
):
    """Select hyperparameters by validation accuracy on KMM-selected source points.

    ``y_target`` is never used for fitting or selection. When given, each
    cell is additionally refit on the whole source and its target accuracy
    is recorded in the table, which is how the target-oracle optimum is
    measured.
    """
    x_source = np.asarray(x_source, dtype=float)
    x_target = np.asarray(x_target, dtype=float)
    y_source = np.asarray(y_source).astype(int).ravel()
    weights = kmm_weights(x_source, x_target, spec, cfg)
    val, rest = select_validation(weights, fraction)
    xs_train, ys_train = x_source[:, rest], y_source[rest]
    xs_val, ys_val = x_source[:, val], y_source[val]
    cells = grid.cells(algo, iterations, ridge)

    def evaluate(item):
        idx, hp = item
        row = {"cell": idx, **{key: val_ for key, val_ in asdict(hp).items() if key != "ridge"}}
        try:
            res = _fit(algo, xs_train, ys_train, x_target, spec, hp)
            z_val = res.transform(xs_val)
            pred = one_nn_predict(res.z_source, ys_train, z_val)
            row["validation_accuracy"] = accuracy(pred, ys_val)
            row["status"] = "ok"
        except (NetAdaptError, np.linalg.LinAlgError) as exc:
            row["validation_accuracy"] = None
            row["status"] = f"failed: {type(exc).__name__}: {exc}"
        row["target_accuracy"] = None
        if y_target is not None:
            try:
                full = _fit(algo, x_source, y_source, x_target, spec, hp)
                row["target_accuracy"] = accuracy(full.target_pred, y_target)
            except (NetAdaptError, np.linalg.LinAlgError) as exc:
                row["target_status"] = f"failed: {type(exc).__name__}: {exc}"
        return row

    items = list(enumerate(cells))
    n_workers = threads or worker_count()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            table = list(pool.map(evaluate, items))
    else:
        table = [evaluate(item) for item in items]

    ok = [r for r in table if r["validation_accuracy"] is not None]
    best_row = max(ok, key=lambda r: (r["validation_accuracy"], -r["cell"])) if ok else None
    best = cells[best_row["cell"]] if best_row else None
    return GridResult(best, table, weights, val, best_row)
