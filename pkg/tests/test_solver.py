import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netadapt.classify import accuracy, one_nn_predict
from netadapt.data import two_moon
from netadapt.embedding import adjacency, normalized_laplacian
from netadapt.errors import DimensionMismatch, NotPositiveDefinite
from netadapt.kernel import KernelSpec, centering_matrix, gram
from netadapt.mmd import LabeledSplit, marginal_mmd, mmd_matrices, mmd_objective
from netadapt.solver import (
    HyperParams,
    assemble_system,
    jda_fit,
    kpca_fit,
    net_fit,
    net_objective,
    solve_projection,
    tca_fit,
)

from conftest import b_orthonormalize, subspace_objective


def random_system(seed, n_range=(4, 16), with_pred=True):
    r = np.random.default_rng(seed)
    ns = int(r.integers(2, n_range[1] // 2 + 1))
    nt = int(r.integers(2, n_range[1] // 2 + 1))
    x = r.normal(size=(3, ns + nt))
    pred = r.integers(1, 3, nt) if with_pred else None
    split = LabeledSplit(r.integers(1, 3, ns), nt, pred)
    kern = gram(x)
    pieces = normalized_laplacian(adjacency(split))
    hp = HyperParams(
        alpha=float(r.uniform(0, 2)),
        beta=float(r.uniform(0, 2)),
        gamma=float(r.uniform(0.1, 2)),
        k=int(r.integers(1, ns + nt + 1)),
        ridge=1e-3,
    )
    return kern, mmd_matrices(split), pieces, hp


class TestHyperParams:
    def test_defaults(self):
        hp = HyperParams()
        assert (hp.alpha, hp.beta, hp.gamma, hp.k, hp.iterations) == (1.0, 1.0, 1.0, 20, 10)

    @pytest.mark.parametrize(
        "kwargs", [{"alpha": -1}, {"beta": -0.1}, {"gamma": -1}, {"k": 0}, {"iterations": 0}, {"ridge": -1}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            HyperParams(**kwargs)

    def test_k_exceeds_n(self, rng):
        with pytest.raises(DimensionMismatch):
            net_fit(rng.normal(size=(2, 3)), [1, 2, 1], rng.normal(size=(2, 2)), hp=HyperParams(k=6))


class TestAssemble:
    def test_only_regularizer(self, rng):
        kern, mm, pieces, _ = random_system(1)
        s, b = assemble_system(kern, None, pieces, HyperParams(alpha=0, beta=0, gamma=1))
        np.testing.assert_array_equal(s, np.eye(kern.n))

    def test_terms(self):
        kern, mm, pieces, hp = random_system(2)
        k = kern.gram
        s, b = assemble_system(kern, mm, pieces, hp)
        expected = hp.alpha * k @ mm.total() @ k + hp.beta * k @ pieces.laplacian @ k + hp.gamma * np.eye(kern.n)
        np.testing.assert_allclose(s, expected, atol=1e-12)
        np.testing.assert_allclose(b, k @ pieces.d @ k, atol=1e-12)

    def test_beta_zero_is_jda_system(self):
        kern, mm, pieces, hp = random_system(3)
        k = kern.gram
        s, _ = assemble_system(kern, mm, pieces, HyperParams(alpha=1, beta=0, gamma=hp.gamma))
        np.testing.assert_allclose(s, k @ mm.total() @ k + hp.gamma * np.eye(kern.n), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_symmetric_psd(self, seed):
        kern, mm, pieces, hp = random_system(seed)
        s, b = assemble_system(kern, mm, pieces, hp)
        assert np.linalg.norm(s - s.T) <= 1e-10 * np.linalg.norm(s)
        assert np.linalg.eigvalsh(b).min() >= -1e-10 * np.trace(b)

    def test_dimension_mismatch(self):
        kern, mm, pieces, hp = random_system(4)
        with pytest.raises(DimensionMismatch):
            assemble_system(kern, np.eye(kern.n + 1), pieces, hp)


class TestSolveProjection:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_contract_and_optimality(self, seed):
        kern, mm, pieces, hp = random_system(seed)
        s, b = assemble_system(kern, mm, pieces, hp)
        res = solve_projection(s, b, hp, kern)
        bb = b + hp.ridge * np.eye(kern.n)
        np.testing.assert_allclose(res.a.T @ bb @ res.a, np.eye(hp.k), atol=1e-8)
        np.testing.assert_allclose(res.z, res.a.T @ kern.gram, atol=1e-12)
        value = net_objective(res.a, s)
        assert value == pytest.approx(res.eigenvalues.sum(), rel=1e-8)
        r = np.random.default_rng(seed)
        for _ in range(50):
            other = subspace_objective(r.normal(size=(kern.n, hp.k)), s, bb)
            if hp.k == kern.n:
                # every full basis spans the same space: a tie up to conditioning of B
                assert value == pytest.approx(other, rel=1e-4)
            else:
                assert value <= other * (1 + 1e-9)

    def test_objective_decomposes(self):
        kern, mm, pieces, hp = random_system(5)
        s, b = assemble_system(kern, mm, pieces, hp)
        res = solve_projection(s, b, hp, kern)
        parts = (
            hp.alpha * mmd_objective(res.a, kern, mm.total())
            + hp.beta * np.trace(res.z @ pieces.laplacian @ res.z.T)
            + hp.gamma * np.sum(res.a ** 2)
        )
        assert parts == pytest.approx(res.eigenvalues.sum(), rel=1e-8)

    def test_regularizer_only(self):
        kern, mm, pieces, _ = random_system(6)
        hp = HyperParams(alpha=0, beta=0, gamma=0.7, k=3, ridge=1e-3)
        s, b = assemble_system(kern, mm, pieces, hp)
        res = solve_projection(s, b, hp, kern)
        assert net_objective(res.a, s) == pytest.approx(0.7 * np.sum(res.a ** 2), rel=1e-12)

    def test_full_basis_matches_kernel_metric(self, rng):
        # with A spanning everything, A A^T = B^-1, so distances in Z are
        # kernel-column distances under the B^-1 metric
        x = rng.normal(size=(2, 12))
        split = LabeledSplit(rng.integers(1, 3, 8), 4)
        kern = gram(x)
        pieces = normalized_laplacian(adjacency(split))
        hp = HyperParams(alpha=0, beta=0, gamma=1, k=12, ridge=1e-2)
        s, b = assemble_system(kern, None, pieces, hp)
        res = solve_projection(s, b, hp, kern)
        k = kern.gram
        binv = np.linalg.inv(b + hp.ridge * np.eye(12))
        np.testing.assert_allclose(res.a @ res.a.T, binv, atol=1e-8 * np.abs(binv).max())
        chol = np.linalg.cholesky(binv)
        feats = chol.T @ k
        ys = split.source_labels
        np.testing.assert_array_equal(
            one_nn_predict(res.z[:, :8], ys, res.z[:, 8:]), one_nn_predict(feats[:, :8], ys, feats[:, 8:])
        )

    def test_singular_rhs_needs_ridge(self):
        # a zero point has an all-zero linear-kernel row, so K D K^T is singular
        x = np.zeros((2, 10))
        x[:, 1:] = np.random.default_rng(0).normal(size=(2, 9))
        split = LabeledSplit([1, 2, 1, 2, 1], 5)
        kern = gram(x, KernelSpec("linear"))
        pieces = normalized_laplacian(adjacency(split))
        hp = HyperParams(alpha=1, beta=0, gamma=0, k=2, ridge=0.0)
        s, b = assemble_system(kern, mmd_matrices(split), pieces, hp)
        with pytest.raises(NotPositiveDefinite, match="ridge"):
            solve_projection(s, b, hp, kern)
        res = solve_projection(s, b, HyperParams(alpha=1, beta=0, gamma=0, k=2, ridge=1e-6), kern)
        assert np.all(np.isfinite(res.a))


@pytest.fixture(scope="module")
def moons():
    src, tgt = two_moon(40, 0.1, 30.0, seed=7)
    return src, tgt


class TestNetFit:
    def test_contract(self, moons):
        src, tgt = moons
        hp = HyperParams(alpha=1, beta=0.1, gamma=0.1, k=4, iterations=3)
        res = net_fit(src.features, src.labels, tgt.features, hp=hp)
        split = LabeledSplit(src.labels, tgt.n)
        pieces = normalized_laplacian(adjacency(split))
        k = res.kernel.gram
        bb = k @ pieces.d @ k + res.ridge * np.eye(k.shape[0])
        np.testing.assert_allclose(res.a.T @ bb @ res.a, np.eye(4), atol=1e-8)
        np.testing.assert_allclose(res.z, res.a.T @ k, atol=1e-12)
        assert len(res.target_label_history) == 3 == len(res.objective_history)
        np.testing.assert_allclose(res.transform(src.features), res.z_source, atol=1e-10)

    def test_deterministic(self, moons):
        src, tgt = moons
        hp = HyperParams(alpha=1, beta=0.1, gamma=0.1, k=3, iterations=4)
        r1 = net_fit(src.features, src.labels, tgt.features, hp=hp)
        r2 = net_fit(src.features, src.labels, tgt.features, hp=hp)
        np.testing.assert_array_equal(r1.a, r2.a)
        for p1, p2 in zip(r1.target_label_history, r2.target_label_history):
            np.testing.assert_array_equal(p1, p2)
        assert r1.objective_history == r2.objective_history

    def test_single_iteration_is_marginal_solve(self, moons):
        src, tgt = moons
        hp = HyperParams(alpha=1, beta=0.5, gamma=0.2, k=3, iterations=1)
        res = net_fit(src.features, src.labels, tgt.features, hp=hp)
        split = LabeledSplit(src.labels, tgt.n)
        pieces = normalized_laplacian(adjacency(split))
        s, b = assemble_system(res.kernel, marginal_mmd(split), pieces, hp)
        direct = solve_projection(s, b, HyperParams(1, 0.5, 0.2, 3, 1, res.ridge), res.kernel)
        # the fit assembles the MMD term in low-rank form; compare on the spectrum scale
        scale = np.abs(direct.eigenvalues).max()
        np.testing.assert_allclose(res.eigenvalues, direct.eigenvalues, rtol=1e-8, atol=1e-10 * scale)

    def test_later_iterations_use_class_terms(self, moons):
        src, tgt = moons
        hp = HyperParams(alpha=1, beta=0.5, gamma=0.2, k=3, iterations=2)
        res = net_fit(src.features, src.labels, tgt.features, hp=hp)
        split = LabeledSplit(src.labels, tgt.n, res.target_label_history[0])
        pieces = normalized_laplacian(adjacency(split))
        s, b = assemble_system(res.kernel, mmd_matrices(split), pieces, hp)
        direct = solve_projection(s, b, HyperParams(1, 0.5, 0.2, 3, 1, res.ridge), res.kernel)
        scale = np.abs(direct.eigenvalues).max()
        np.testing.assert_allclose(res.eigenvalues, direct.eigenvalues, rtol=1e-8, atol=1e-10 * scale)

    def test_self_adaptation(self):
        src, _ = two_moon(60, 0.05, 0.0, seed=3)
        res = net_fit(src.features, src.labels, src.features, hp=HyperParams(1, 0.01, 0.01, 2, 5))
        np.testing.assert_array_equal(res.target_pred, src.labels)

    def test_pseudo_label_trend(self):
        hp = HyperParams(alpha=1, beta=0.01, gamma=0.01, k=2)
        good = 0
        for seed in range(10):
            src, tgt = two_moon(100, 0.1, 30.0, seed=seed)
            res = net_fit(src.features, src.labels, tgt.features, hp=hp)
            accs = [accuracy(p, tgt.labels) for p in res.target_label_history]
            good += accs[-1] >= accs[0]
        assert good >= 8


class TestBaselines:
    def test_jda_is_net_without_embedding(self, moons):
        src, tgt = moons
        hp = HyperParams(alpha=3, beta=2, gamma=0.5, k=3, iterations=3)
        jda = jda_fit(src.features, src.labels, tgt.features, hp=hp)
        net = net_fit(src.features, src.labels, tgt.features, hp=HyperParams(1, 0, 0.5, 3, 3))
        np.testing.assert_allclose(jda.eigenvalues, net.eigenvalues, rtol=1e-10)

    def test_tca_is_single_marginal_solve(self, moons):
        src, tgt = moons
        tca = tca_fit(src.features, src.labels, tgt.features, hp=HyperParams(gamma=0.5, k=3))
        net = net_fit(
            src.features, src.labels, tgt.features, hp=HyperParams(1, 0, 0.5, 3, 1), conditional=False
        )
        assert len(tca.target_label_history) == 1
        np.testing.assert_allclose(tca.eigenvalues, net.eigenvalues, rtol=1e-10)

    def test_tca_aligns_better_than_kpca(self):
        for seed in range(10):
            src, tgt = two_moon(50, 0.1, 30.0, seed=seed)
            x = np.hstack([src.features, tgt.features])
            tca = tca_fit(src.features, src.labels, tgt.features, hp=HyperParams(gamma=1.0, k=2))
            kp = kpca_fit(x, k=2)
            split = LabeledSplit(src.labels, tgt.n)
            pieces = normalized_laplacian(adjacency(split))
            k = tca.kernel.gram
            bb = k @ pieces.d @ k + tca.ridge * np.eye(x.shape[1])
            m0 = marginal_mmd(split)
            kp_a = b_orthonormalize(kp.a, bb)
            assert mmd_objective(tca.a, k, m0) <= mmd_objective(kp_a, k, m0)

    def test_tca_four_point_direction_search(self):
        x = np.array([[0.0, 1.0, 0.3, 1.6], [0.0, 0.2, 1.0, 0.9]])
        tca = tca_fit(x[:, :2], [1, 2], x[:, 2:], hp=HyperParams(gamma=0.3, k=1))
        split = LabeledSplit([1, 2], 2)
        pieces = normalized_laplacian(adjacency(split))
        s, b = assemble_system(tca.kernel, marginal_mmd(split), pieces, HyperParams(1, 0, 0.3, 1))
        bb = b + tca.ridge * np.eye(4)
        dirs = np.random.default_rng(0).normal(size=(4, 200_000))
        quotients = np.sum(dirs * (s @ dirs), axis=0) / np.sum(dirs * (bb @ dirs), axis=0)
        best = quotients.min()
        assert tca.eigenvalues[0] <= best * (1 + 1e-12)
        assert tca.eigenvalues[0] == pytest.approx(best, rel=1e-2)

    def test_kpca_linear_matches_pca(self, rng):
        x = rng.normal(size=(3, 15)) * np.array([[3.0], [1.5], [0.5]])
        x -= x.mean(axis=1, keepdims=True)
        res = kpca_fit(x, KernelSpec("linear"), k=2)
        u, _, _ = np.linalg.svd(x, full_matrices=False)
        scores = u[:, :2][:, ::-1].T @ x  # ascending order like kpca_fit
        for z_row, p_row in zip(res.z, scores):
            z_unit, p_unit = z_row / np.linalg.norm(z_row), p_row / np.linalg.norm(p_row)
            assert min(np.linalg.norm(z_unit - p_unit), np.linalg.norm(z_unit + p_unit)) < 1e-8

    def test_kpca_full_basis_trace(self, rng):
        x = rng.normal(size=(2, 9))
        res = kpca_fit(x, k=9)
        k = res.kernel.gram
        assert res.eigenvalues.sum() == pytest.approx(np.trace(k @ centering_matrix(9) @ k), rel=1e-10)
        np.testing.assert_allclose(res.a.T @ res.a, np.eye(9), atol=1e-10)

    def test_kpca_duplicates_scale_spectrum(self, rng):
        x = rng.normal(size=(2, 8))
        one = kpca_fit(x, KernelSpec(bandwidth=1.0), k=3)
        two = kpca_fit(np.hstack([x, x]), KernelSpec(bandwidth=1.0), k=3)
        np.testing.assert_allclose(two.eigenvalues, 4 * one.eigenvalues, rtol=1e-8)

    def test_kpca_classifies_target(self, moons):
        src, tgt = moons
        res = kpca_fit(np.hstack([src.features, tgt.features]), k=2, n_source=src.n, y_source=src.labels)
        assert res.target_pred.shape == (tgt.n,)
        assert kpca_fit(src.features, k=2).target_pred is None

    def test_kpca_bad_k(self, rng):
        with pytest.raises(DimensionMismatch):
            kpca_fit(rng.normal(size=(2, 4)), k=5)
