"""Pearson correlations between a ground-truth vector and learner outputs.

Index 0 of every correlation matrix built here is the truth vector and
indices 1..N are the learners. The averaged truth-learner correlation is
the mean of row 0 off the diagonal; the averaged learner-learner
correlation is the mean of the strict upper triangle of the learner block.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConstantVector, LengthMismatch, NotSymmetric, TooFewLearners

logger = logging.getLogger(__name__)

PSD_TOL = 1e-9


@dataclass(frozen=True)
class CorrelationSummary:
    n_learners: int
    r_tl_ave: float
    r_ll_ave: float
    matrix: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def as_dict(self):
        return {
            "n_learners": self.n_learners,
            "r_tl_ave": self.r_tl_ave,
            "r_ll_ave": self.r_ll_ave,
        }


def _as_vector(x, name):
    v = np.asarray(x, dtype=np.float64).ravel()
    if v.size < 2:
        raise LengthMismatch(f"{name} must have length >= 2, got {v.size}")
    return v


def pearson(x, y):
    """Product-moment correlation of two equal-length vectors.

    Raises
    ------
    LengthMismatch
        If the lengths differ or are below 2.
    ConstantVector
        If either vector has zero variance; correlation is undefined there.
    """
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.size != y.size:
        raise LengthMismatch(f"length {x.size} != {y.size}")
    if np.ptp(x) == 0.0:
        raise ConstantVector("x is constant")
    if np.ptp(y) == 0.0:
        raise ConstantVector("y is constant")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = np.dot(xc, xc)
    syy = np.dot(yc, yc)
    r = np.dot(xc, yc) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def build_correlation_matrix(truth, learners):
    """(N+1) x (N+1) correlation matrix of ``truth`` followed by ``learners``."""
    vectors = [_as_vector(truth, "truth")] + [
        _as_vector(v, f"learner {i}") for i, v in enumerate(learners)
    ]
    n = vectors[0].size
    for i, v in enumerate(vectors[1:]):
        if v.size != n:
            raise LengthMismatch(f"learner {i} has length {v.size}, truth has {n}")
    data = np.vstack(vectors)
    flat = np.ptp(data, axis=1) == 0.0
    if flat.any():
        bad = int(np.flatnonzero(flat)[0])
        raise ConstantVector("truth is constant" if bad == 0 else f"learner {bad - 1} is constant")
    centered = data - data.mean(axis=1, keepdims=True)
    ss = np.einsum("ij,ij->i", centered, centered)
    scaled = centered / np.sqrt(ss)[:, None]
    mat = np.clip(scaled @ scaled.T, -1.0, 1.0)
    mat = 0.5 * (mat + mat.T)
    np.fill_diagonal(mat, 1.0)
    return mat


def summarize(matrix):
    """Averaged truth-learner and learner-learner correlations of ``matrix``."""
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {mat.shape}")
    n = mat.shape[0] - 1
    if n < 2:
        raise TooFewLearners(f"need at least 2 learners, got {n}")
    r_tl = float(mat[0, 1:].mean())
    iu = np.triu_indices(n, k=1)
    r_ll = float(mat[1:, 1:][iu].mean())
    return CorrelationSummary(n, r_tl, r_ll, mat)


def correlation_summary(truth, learners):
    return summarize(build_correlation_matrix(truth, learners))


def is_valid_correlation_matrix(matrix, tol=PSD_TOL):
    """True iff the symmetric ``matrix`` has minimum eigenvalue >= ``-tol``."""
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {mat.shape}")
    if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-12):
        raise NotSymmetric("matrix is not symmetric")
    return bool(np.linalg.eigvalsh(mat)[0] >= -tol)


def min_eigenvalue(matrix):
    return float(np.linalg.eigvalsh(np.asarray(matrix, dtype=np.float64))[0])


def equicorrelated_matrix(n_learners, r_tl, r_ll):
    """Matrix with every truth-learner entry ``r_tl`` and learner pair ``r_ll``."""
    mat = np.full((n_learners + 1, n_learners + 1), float(r_ll))
    mat[0, :] = r_tl
    mat[:, 0] = r_tl
    np.fill_diagonal(mat, 1.0)
    return mat


def label_summary(y_true, member_preds, n_classes):
    """Averaged correlations of hard class predictions.

    Binary problems correlate the 0/1 labels directly. With more classes
    each class contributes its indicator columns, and the per-class
    averages are averaged again. A class is skipped when the truth or any
    member is constant on its indicator column; returns ``None`` when no
    class survives.

    Averaging over classes keeps the point inside the feasible region,
    which is convex.
    """
    y_true = np.asarray(y_true)
    preds = [np.asarray(p) for p in member_preds]
    if len(preds) < 2:
        raise TooFewLearners(f"need at least 2 learners, got {len(preds)}")
    classes = [1] if n_classes == 2 else range(n_classes)
    tl, ll, mats = [], [], []
    skipped = 0
    for k in classes:
        truth = (y_true == k).astype(np.float64)
        cols = [(p == k).astype(np.float64) for p in preds]
        try:
            mat = build_correlation_matrix(truth, cols)
        except ConstantVector:
            skipped += 1
            continue
        s = summarize(mat)
        tl.append(s.r_tl_ave)
        ll.append(s.r_ll_ave)
        mats.append(mat)
    if skipped:
        logger.debug("label_summary skipped %d constant class column(s)", skipped)
    if not tl:
        return None
    return CorrelationSummary(len(preds), float(np.mean(tl)), float(np.mean(ll)), np.mean(mats, axis=0))


def matrix_to_json(matrix):
    return json.dumps(np.asarray(matrix, dtype=np.float64).tolist())


def matrix_from_json(text):
    data = json.loads(text)
    mat = np.asarray(data, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotSymmetric(f"expected a square array-of-arrays, got shape {mat.shape}")
    return mat
