"""Tabular data ingestion, one-hot labels, fold splitting and synthetic data."""
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .errors import (
    DatasetTooSmall,
    DegenerateAlpha,
    KTooLarge,
    MissingLabelColumn,
    OutOfRangeLabel,
    ParseError,
)

logger = logging.getLogger(__name__)

MISSING = frozenset({"", "?", "NA", "NaN", "nan"})


@dataclass(eq=False)
class Dataset:
    X: np.ndarray
    labels: np.ndarray
    n_classes: int
    feature_kinds: List[str]
    name: str = ""
    class_names: Optional[List[str]] = None
    feature_names: Optional[List[str]] = None
    dropped_rows: int = field(default=0, compare=False)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[0] != self.labels.shape[0]:
            raise ValueError(f"X shape {self.X.shape} inconsistent with {self.labels.shape[0]} labels")
        if self.X.shape[0] < 2:
            raise DatasetTooSmall(f"need at least 2 rows, got {self.X.shape[0]}")
        if self.labels.min() < 0 or self.labels.max() >= self.n_classes:
            raise OutOfRangeLabel(f"labels outside 0..{self.n_classes - 1}")
        if len(self.feature_kinds) != self.X.shape[1]:
            raise ValueError("one feature kind per column required")

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            np.array_equal(self.X, other.X)
            and np.array_equal(self.labels, other.labels)
            and (self.n_classes, self.feature_kinds, self.name, self.class_names, self.feature_names)
            == (other.n_classes, other.feature_kinds, other.name, other.class_names, other.feature_names)
        )

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def q(self):
        return self.X.shape[1]

    def subset(self, idx):
        return Dataset(
            self.X[idx], self.labels[idx], self.n_classes, list(self.feature_kinds),
            self.name, self.class_names, self.feature_names,
        )


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path, label_column=-1, header=True, name=None):
    """Read a comma-separated file into a :class:`Dataset`.

    Parameters
    ----------
    path : str or Path
    label_column : int or str
        Column index (negative counts from the end) or header name.
    header : bool
        Whether the first line holds column names.

    Rows containing a missing marker (empty, ``?``, ``NA``) in any column
    are dropped and counted. Feature columns made entirely of non-numeric
    text are treated as nominal and coded in first-appearance order, as are
    non-numeric labels. Numeric labels keep their sorted order.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    names = None
    first_line = 1
    if header:
        if not rows:
            raise DatasetTooSmall(f"{path} is empty")
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first_line = 2
    if not rows:
        raise DatasetTooSmall(f"{path} has no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"expected {width} fields, found {len(r)}", row=i + first_line)

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if names is None or label_column not in names:
            raise MissingLabelColumn(f"label column {label_column!r} not found")
        label_idx = names.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise MissingLabelColumn(f"label column {label_idx} out of range for {width} columns")
        label_idx %= width

    cells = [[c.strip() for c in r] for r in rows]
    keep = [r for r in cells if not any(c in MISSING for c in r)]
    dropped = len(cells) - len(keep)
    if dropped:
        logger.warning("%s: dropped %d row(s) with missing values", path.name, dropped)
    if len(keep) < 2:
        raise DatasetTooSmall(f"{path} has {len(keep)} complete row(s); need at least 2")

    feat_idx = [j for j in range(width) if j != label_idx]
    X = np.empty((len(keep), len(feat_idx)))
    kinds = []
    for out_j, j in enumerate(feat_idx):
        col = [r[j] for r in keep]
        numeric = [_is_number(v) for v in col]
        if all(numeric):
            X[:, out_j] = [float(v) for v in col]
            kinds.append("numeric")
        elif not any(numeric):
            codes = {}
            X[:, out_j] = [codes.setdefault(v, len(codes)) for v in col]
            kinds.append("nominal")
        else:
            bad = numeric.index(False) if numeric[0] else numeric.index(True)
            raise ParseError(f"mixed numeric and text values {col[bad]!r}", row=bad + first_line,
                             column=names[j] if names else j)

    raw = [r[label_idx] for r in keep]
    if all(_is_number(v) for v in raw):
        values = sorted({float(v) for v in raw})
        codes = {v: i for i, v in enumerate(values)}
        labels = np.array([codes[float(v)] for v in raw])
        class_names = [format(v, "g") for v in values]
    else:
        codes = {}
        labels = np.array([codes.setdefault(v, len(codes)) for v in raw])
        class_names = list(codes)

    feature_names = [names[j] for j in feat_idx] if names else None
    return Dataset(X, labels, len(class_names), kinds, name or path.stem, class_names,
                   feature_names, dropped_rows=dropped)


def one_hot(labels, m):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= m):
        raise OutOfRangeLabel(f"labels must lie in 0..{m - 1}")
    out = np.zeros((labels.size, m))
    out[np.arange(labels.size), labels] = 1.0
    return out


def kfold_split(n, k, seed, stratify_labels=None):
    """Partition ``range(n)`` into ``k`` folds whose sizes differ by at most one.

    With ``stratify_labels`` each class is shuffled and dealt round-robin,
    continuing where the previous class stopped, so every fold holds each
    class to within one sample of its proportional share.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > n:
        raise KTooLarge(f"k={k} exceeds n={n}")
    rng = np.random.default_rng(seed)
    if stratify_labels is None:
        perm = rng.permutation(n)
        return [np.sort(perm[i::k]) for i in range(k)]
    labels = np.asarray(stratify_labels)
    if labels.shape[0] != n:
        raise ValueError("stratify_labels must have length n")
    folds = [[] for _ in range(k)]
    offset = 0
    for c in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == c))
        for i, idx in enumerate(members):
            folds[(offset + i) % k].append(idx)
        offset = (offset + len(members)) % k
    return [np.sort(np.asarray(f, dtype=np.int64)) for f in folds]


def train_test_folds(folds):
    """Yield ``(train_idx, test_idx)`` rotating each fold into the test role."""
    for i, test in enumerate(folds):
        train = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
        yield train, test


class Standardizer:
    """Zero-mean, unit-variance scaling with statistics from the data it is fit on."""

    def __init__(self, X):
        X = np.asarray(X, dtype=np.float64)
        self.mean = X.mean(axis=0)
        std = X.std(axis=0)
        self.std = np.where(std > 0.0, std, 1.0)

    def __call__(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.std


def synthetic_binary(n, alpha, separation, seed):
    """Two Gaussian blobs in the plane, ``round(alpha * n)`` of them labelled 1.

    Class 1 is centred at ``(separation / 2, 0)``, class 0 at the mirror
    point; both have identity covariance.
    """
    if n < 2:
        raise DatasetTooSmall(f"need n >= 2, got {n}")
    if not 0.0 < alpha < 1.0:
        raise DegenerateAlpha(f"alpha must lie in (0, 1), got {alpha}")
    n_pos = int(math.floor(alpha * n + 0.5))
    if n_pos in (0, n):
        raise DegenerateAlpha(f"alpha={alpha} leaves a single class for n={n}")
    rng = np.random.default_rng(seed)
    labels = np.zeros(n, dtype=np.int64)
    labels[rng.permutation(n)[:n_pos]] = 1
    X = rng.standard_normal((n, 2))
    X[:, 0] += np.where(labels == 1, 0.5, -0.5) * separation
    return Dataset(X, labels, 2, ["numeric", "numeric"], f"synthetic-binary-{separation:g}")


def synthetic_multiclass(n, n_features, n_informative, n_classes, seed, spread=1.5):
    """Gaussian class clusters living in the first ``n_informative`` features.

    Remaining features are standard-normal noise. Used for forest studies
    that need more than 20 columns.
    """
    if n_informative > n_features:
        raise ValueError("n_informative must not exceed n_features")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, spread, size=(n_classes, n_informative))
    labels = rng.integers(0, n_classes, size=n)
    X = rng.standard_normal((n, n_features))
    X[:, :n_informative] += centers[labels]
    return Dataset(X, labels, n_classes, ["numeric"] * n_features, "synthetic-multiclass")
