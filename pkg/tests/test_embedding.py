import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netadapt.embedding import adjacency, embedding_objective_oracle, normalized_laplacian
from netadapt.errors import DimensionMismatch, ZeroDegree
from netadapt.mmd import LabeledSplit


class TestAdjacency:
    def test_same_label(self):
        np.testing.assert_array_equal(adjacency(LabeledSplit([1, 1], 0)), np.ones((2, 2)))

    def test_different_labels(self):
        np.testing.assert_array_equal(adjacency(LabeledSplit([1, 2], 0)), np.eye(2))

    def test_target_unlabeled(self):
        np.testing.assert_array_equal(adjacency(LabeledSplit([1], 1)), np.eye(2))

    def test_predictions_ignored(self):
        split = LabeledSplit([1, 2], 2, [1, 1])
        np.testing.assert_array_equal(adjacency(split), np.eye(4))

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(1, 4), min_size=1, max_size=12), st.integers(0, 5))
    def test_relabel_invariance(self, labels, nt):
        relabel = {1: 3, 2: 1, 3: 4, 4: 2}
        w = adjacency(LabeledSplit(labels, nt))
        w2 = adjacency(LabeledSplit([relabel[v] for v in labels], nt))
        np.testing.assert_array_equal(w, w2)
        assert np.all(np.diag(w) == 1)
        np.testing.assert_array_equal(w, w.T)


class TestLaplacian:
    def test_identity(self):
        pieces = normalized_laplacian(np.eye(4))
        np.testing.assert_array_equal(pieces.laplacian, np.zeros((4, 4)))
        np.testing.assert_array_equal(pieces.degrees, np.ones(4))

    def test_pair(self):
        pieces = normalized_laplacian(np.ones((2, 2)))
        np.testing.assert_allclose(pieces.laplacian, [[0.5, -0.5], [-0.5, 0.5]])
        np.testing.assert_array_equal(pieces.d, np.diag([2.0, 2.0]))

    def test_block_structure(self):
        w = np.zeros((5, 5))
        w[:2, :2] = 1
        w[2:, 2:] = 1
        lap = normalized_laplacian(w).laplacian
        assert np.all(lap[:2, 2:] == 0) and np.all(lap[2:, :2] == 0)

    def test_zero_degree(self):
        with pytest.raises(ZeroDegree):
            normalized_laplacian(np.diag([1.0, 0.0]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            normalized_laplacian([[1.0, -1.0], [-1.0, 1.0]])

    def test_connected_null_vector(self):
        r = np.random.default_rng(3)
        w = r.uniform(0.1, 1.0, (6, 6))
        w = w + w.T
        pieces = normalized_laplacian(w)
        v = np.sqrt(pieces.degrees)
        np.testing.assert_allclose(pieces.laplacian @ v, 0.0, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_spectrum_and_oracle(self, n, seed):
        r = np.random.default_rng(seed)
        ns = int(r.integers(1, n + 1))
        pieces = normalized_laplacian(adjacency(LabeledSplit(r.integers(1, 4, ns), n - ns)))
        vals = np.linalg.eigvalsh(pieces.laplacian)
        assert vals.min() >= -1e-10 and vals.max() <= 2 + 1e-8
        z = r.normal(size=(3, n))
        trace = float(np.trace(z @ pieces.laplacian @ z.T))
        assert embedding_objective_oracle(z, pieces) == pytest.approx(trace, rel=1e-10, abs=1e-12)


class TestOracle:
    def test_equal_columns(self):
        pieces = normalized_laplacian(np.ones((3, 3)))
        assert embedding_objective_oracle(np.ones((2, 3)), pieces) == pytest.approx(0.0, abs=1e-15)

    def test_identity_graph(self, rng):
        pieces = normalized_laplacian(np.eye(5))
        assert embedding_objective_oracle(rng.normal(size=(2, 5)), pieces) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            embedding_objective_oracle(np.ones((2, 4)), normalized_laplacian(np.eye(3)))
