"""Hot inner loops with a numba build and a pure-numpy twin.

The public names (``best_split``, ``majority_vote``) resolve to the numba
versions unless ``DIVERSE_ENSEMBLES_DISABLE_NUMBA`` is set. Both variants
evaluate the weighted Gini score with the same operation order, so they
agree bit-for-bit and pick the same split.
"""
import numpy as np

from ._jit import USE_NUMBA, njit


def _split_score(n_left, sq_left, n_right, sq_right):
    # n_l * gini_l + n_r * gini_r, with gini = 1 - sum(c^2) / n^2
    return (n_left - sq_left / n_left) + (n_right - sq_right / n_right)


@njit(cache=True)
def _best_split_jit(X, y, n_classes, features):
    n = X.shape[0]
    best_feature = -1
    best_threshold = 0.0
    best_score = np.inf
    left = np.zeros(n_classes, dtype=np.float64)
    right = np.zeros(n_classes, dtype=np.float64)
    total = np.zeros(n_classes, dtype=np.float64)
    for i in range(n):
        total[y[i]] += 1.0
    for fi in range(features.shape[0]):
        f = features[fi]
        col = X[:, f].copy()
        order = np.argsort(col, kind="mergesort")
        for k in range(n_classes):
            left[k] = 0.0
            right[k] = total[k]
        for pos in range(n - 1):
            c = y[order[pos]]
            left[c] += 1.0
            right[c] -= 1.0
            lo = col[order[pos]]
            hi = col[order[pos + 1]]
            if not lo < hi:
                continue
            n_left = pos + 1.0
            n_right = n - n_left
            sq_left = 0.0
            sq_right = 0.0
            for k in range(n_classes):
                sq_left += left[k] * left[k]
                sq_right += right[k] * right[k]
            score = (n_left - sq_left / n_left) + (n_right - sq_right / n_right)
            if score < best_score:
                best_score = score
                best_feature = f
                thr = 0.5 * (lo + hi)
                if thr >= hi:
                    thr = lo
                best_threshold = thr
    return best_feature, best_threshold, best_score


def _best_split_np(X, y, n_classes, features):
    n = X.shape[0]
    best = (-1, 0.0, np.inf)
    if n < 2:
        return best
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    total = onehot.sum(axis=0)
    for f in features:
        col = X[:, f]
        order = np.argsort(col, kind="mergesort")
        xs = col[order]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = total - left
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        n_left = np.arange(1, n, dtype=np.float64)
        n_right = n - n_left
        score = _split_score(
            n_left, (left * left).sum(axis=1), n_right, (right * right).sum(axis=1)
        )
        score = np.where(valid, score, np.inf)
        pos = int(np.argmin(score))
        if score[pos] < best[2]:
            lo, hi = xs[pos], xs[pos + 1]
            thr = 0.5 * (lo + hi)
            if thr >= hi:
                thr = lo
            best = (int(f), float(thr), float(score[pos]))
    return best


def best_split_numpy(X, y, n_classes, features):
    return _best_split_np(
        np.ascontiguousarray(X, dtype=np.float64),
        np.asarray(y, dtype=np.int64),
        int(n_classes),
        np.asarray(features, dtype=np.int64),
    )


def best_split_numba(X, y, n_classes, features):
    f, t, s = _best_split_jit(
        np.ascontiguousarray(X, dtype=np.float64),
        np.asarray(y, dtype=np.int64),
        int(n_classes),
        np.asarray(features, dtype=np.int64),
    )
    return int(f), float(t), float(s)


@njit(cache=True)
def _majority_vote_jit(preds, n_classes):
    n, m = preds.shape
    out = np.empty(n, dtype=np.int64)
    counts = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        for k in range(n_classes):
            counts[k] = 0
        for j in range(m):
            counts[preds[i, j]] += 1
        best = 0
        for k in range(1, n_classes):
            if counts[k] > counts[best]:
                best = k
        out[i] = best
    return out


def majority_vote_numpy(preds, n_classes):
    preds = np.asarray(preds, dtype=np.int64)
    counts = np.zeros((preds.shape[0], n_classes), dtype=np.int64)
    rows = np.arange(preds.shape[0])
    for j in range(preds.shape[1]):
        counts[rows, preds[:, j]] += 1
    return np.argmax(counts, axis=1)


def majority_vote_numba(preds, n_classes):
    return _majority_vote_jit(np.ascontiguousarray(preds, dtype=np.int64), int(n_classes))


if USE_NUMBA:
    best_split = best_split_numba
    majority_vote = majority_vote_numba
else:
    best_split = best_split_numpy
    majority_vote = majority_vote_numpy

best_split.__doc__ = """Best Gini split of ``X`` over the candidate ``features``.

Returns ``(feature, threshold, score)`` where ``score`` is the
size-weighted Gini impurity summed over both children. Rows with
``x[feature] <= threshold`` go left. ``feature == -1`` means no feature
has two distinct values. Ties keep the earliest feature and position.
"""
majority_vote.__doc__ = """Row-wise plurality of integer votes ``preds`` (n x members).

Ties go to the lowest class index.
"""
