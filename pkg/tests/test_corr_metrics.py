import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from diverse_ensembles.corr_metrics import (
    build_correlation_matrix,
    correlation_summary,
    equicorrelated_matrix,
    is_valid_correlation_matrix,
    label_summary,
    matrix_from_json,
    matrix_to_json,
    min_eigenvalue,
    pearson,
    summarize,
)
from diverse_ensembles.errors import ConstantVector, LengthMismatch, NotSymmetric, TooFewLearners
from diverse_ensembles.theory_bounds import BOUND_TOL, bound_slack
from diverse_ensembles.verification import random_gram_correlation

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def non_constant(n_min=3, n_max=30):
    return arrays(np.float64, st.integers(n_min, n_max), elements=finite).filter(
        lambda v: np.std(v) > 1e-6 * (1.0 + np.abs(v).max())
    )


class TestPearson:
    def test_identity(self):
        assert pearson([1, 0, 1, 0], [1, 0, 1, 0]) == pytest.approx(1.0, abs=1e-15)

    def test_complement(self):
        assert pearson([1, 0, 1, 0], [0, 1, 0, 1]) == pytest.approx(-1.0, abs=1e-15)

    def test_hand_value(self):
        assert pearson([0, 1, 2, 3], [0, 0, 1, 1]) == pytest.approx(2 / math.sqrt(5), abs=1e-12)

    def test_constant_raises(self):
        with pytest.raises(ConstantVector):
            pearson([1, 1, 1], [0, 1, 0])
        with pytest.raises(ConstantVector):
            pearson([0, 1, 0], [2, 2, 2])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            pearson([0, 1, 0], [0, 1])
        with pytest.raises(LengthMismatch):
            pearson([1], [1])

    @given(non_constant(), st.data())
    def test_symmetric_and_bounded(self, x, data):
        y = data.draw(arrays(np.float64, x.size, elements=finite))
        if np.std(y) <= 1e-6 * (1.0 + np.abs(y).max()):
            return
        r = pearson(x, y)
        assert -1.0 <= r <= 1.0
        assert r == pytest.approx(pearson(y, x), abs=1e-12)

    @given(non_constant(), st.floats(0.01, 100.0), st.floats(-100.0, 100.0))
    def test_affine_invariance(self, x, a, b):
        y = np.sin(np.arange(x.size)) + 0.1 * np.arange(x.size)
        r = pearson(x, y)
        assert pearson(a * x + b, y) == pytest.approx(r, abs=1e-9)
        assert pearson(-a * x + b, y) == pytest.approx(-r, abs=1e-9)


class TestCorrelationMatrix:
    def test_all_equal_truth(self):
        t = np.array([1, 0, 1, 1, 0])
        mat = build_correlation_matrix(t, [t, t, t])
        np.testing.assert_allclose(mat, np.ones((4, 4)), atol=1e-12)
        s = summarize(mat)
        assert (s.r_tl_ave, s.r_ll_ave) == pytest.approx((1.0, 1.0))

    def test_matches_corrcoef(self, rng):
        t = rng.integers(0, 2, 100)
        learners = [rng.integers(0, 2, 100) for _ in range(6)]
        mat = build_correlation_matrix(t, learners)
        np.testing.assert_allclose(mat, np.corrcoef(np.vstack([t, *learners])), atol=1e-12)
        assert np.array_equal(mat, mat.T)
        np.testing.assert_array_equal(np.diag(mat), 1.0)

    def test_correlation_summary_shortcut(self, rng):
        t = rng.integers(0, 2, 50)
        learners = [rng.integers(0, 2, 50) for _ in range(3)]
        assert correlation_summary(t, learners) == summarize(build_correlation_matrix(t, learners))

    def test_constant_learner_propagates(self):
        with pytest.raises(ConstantVector):
            build_correlation_matrix([0, 1, 0, 1], [[0, 1, 1, 1], [1, 1, 1, 1]])


class TestSummarize:
    def test_equicorrelated_example(self):
        s = summarize(equicorrelated_matrix(3, 0.3, -0.2))
        assert s.r_tl_ave == pytest.approx(0.3)
        assert s.r_ll_ave == pytest.approx(-0.2)

    def test_pair_at_lower_bound(self):
        mat = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, -1.0, 1.0]])
        assert summarize(mat).r_ll_ave == -1.0

    def test_too_few(self):
        with pytest.raises(TooFewLearners):
            summarize(np.eye(2))

    @pytest.mark.parametrize("n", range(2, 11))
    def test_gram_summaries_feasible(self, n):
        rng = np.random.default_rng(n)
        for _ in range(200):
            mat = random_gram_correlation(n, rng)
            assert is_valid_correlation_matrix(mat)
            s = summarize(mat)
            assert bound_slack(n, s.r_tl_ave, s.r_ll_ave) >= -BOUND_TOL


class TestValidity:
    def test_invalid_example(self):
        assert not is_valid_correlation_matrix(equicorrelated_matrix(3, 1.0, -1.0))

    def test_identity(self):
        assert is_valid_correlation_matrix(np.eye(5))

    def test_valid_example_eigenvalues(self):
        mat = equicorrelated_matrix(3, 0.3, -0.2)
        assert is_valid_correlation_matrix(mat)
        # coupled block [[1, 0.3 sqrt 3], [0.3 sqrt 3, 0.6]]
        expected_min = (1.6 - math.sqrt(0.4**2 + 4 * 0.27)) / 2
        assert min_eigenvalue(mat) == pytest.approx(expected_min, abs=1e-12)
        assert expected_min == pytest.approx(0.2432, abs=1e-4)
        np.testing.assert_allclose(np.linalg.eigvalsh(mat[1:, 1:]), [0.6, 1.2, 1.2], atol=1e-12)

    def test_asymmetric_raises(self):
        mat = np.eye(3)
        mat[0, 1] = 0.5
        with pytest.raises(NotSymmetric):
            is_valid_correlation_matrix(mat)

    def test_built_matrices_valid(self, rng):
        for _ in range(50):
            t = rng.integers(0, 2, 40)
            learners = [np.where(rng.random(40) < 0.3, 1 - t, t) for _ in range(5)]
            assert is_valid_correlation_matrix(build_correlation_matrix(t, learners))


class TestLabelSummary:
    def test_binary_uses_labels_directly(self, rng):
        y = rng.integers(0, 2, 60)
        preds = [np.where(rng.random(60) < 0.2, 1 - y, y) for _ in range(4)]
        assert label_summary(y, preds, 2) == correlation_summary(y, preds)

    def test_multiclass_averages_indicator_columns(self, rng):
        y = rng.integers(0, 3, 90)
        preds = [np.where(rng.random(90) < 0.3, rng.integers(0, 3, 90), y) for _ in range(3)]
        per_class = [correlation_summary(y == k, [p == k for p in preds]) for k in range(3)]
        s = label_summary(y, preds, 3)
        assert s.r_tl_ave == pytest.approx(np.mean([c.r_tl_ave for c in per_class]))
        assert s.r_ll_ave == pytest.approx(np.mean([c.r_ll_ave for c in per_class]))

    def test_constant_class_skipped(self):
        y = np.array([0, 1, 2, 0, 1, 2])
        preds = [np.array([0, 1, 1, 0, 1, 1]), np.array([0, 1, 1, 0, 0, 1])]
        s = label_summary(y, preds, 3)
        expected = [correlation_summary(y == k, [p == k for p in preds]) for k in (0, 1)]
        assert s.r_tl_ave == pytest.approx(np.mean([e.r_tl_ave for e in expected]))

    def test_all_constant_is_none(self):
        y = np.array([0, 1, 0, 1])
        assert label_summary(y, [np.zeros(4, int), np.zeros(4, int)], 2) is None


def test_json_roundtrip():
    mat = equicorrelated_matrix(4, 0.25, 0.1)
    np.testing.assert_array_equal(matrix_from_json(matrix_to_json(mat)), mat)
    with pytest.raises(NotSymmetric):
        matrix_from_json("[[1, 0, 0], [0, 1, 0]]")
