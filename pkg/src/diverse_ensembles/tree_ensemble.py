"""CART trees and small random-forest variants for the forest diversity study."""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .corr_metrics import label_summary
from .errors import EmptyData
from .kernels import best_split, majority_vote
from .theory_bounds import optimality_gap

logger = logging.getLogger(__name__)

FEATURE_SIZES = (1, 3, 5, 7, 20)
DEPTHS = (3, 5, 7, 9, 11)


class DecisionTree:
    """Binary tree stored as parallel arrays.

    ``feature[i] == -1`` marks a leaf whose prediction is ``value[i]``;
    otherwise rows with ``x[feature[i]] <= threshold[i]`` go to ``left[i]``.
    """

    def __init__(self, feature, threshold, left, right, value, n_classes,
                 max_depth=None, features=None):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.int64)
        self.n_classes = n_classes
        self.max_depth = max_depth
        self.features = None if features is None else np.asarray(features, dtype=np.int64)

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    def depth(self):
        d = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                d[self.left[i]] = d[self.right[i]] = d[i] + 1
        return int(d.max())

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return self.value[node]
            r, n, fa = rows[active], node[active], f[active]
            go_left = X[r, fa] <= self.threshold[n]
            node[active] = np.where(go_left, self.left[n], self.right[n])


def train_tree(X, y, n_classes=None, max_depth=None, feature_subset=None, rng=None):
    """Grow a Gini tree greedily.

    Splitting stops at purity, at ``max_depth``, below two samples, or when
    no feature has two distinct values. A split is taken even when it does
    not lower impurity, so patterns like XOR remain learnable.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyData("cannot grow a tree on zero samples")
    n_classes = int(n_classes or y.max() + 1)
    features = np.arange(X.shape[1]) if feature_subset is None else np.asarray(feature_subset, dtype=np.int64)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(int(np.argmax(np.bincount(y[idx], minlength=n_classes))))
        return len(feature) - 1

    stack = [(new_node(np.arange(X.shape[0])), np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if idx.size < 2 or (max_depth is not None and depth >= max_depth):
            continue
        if np.all(y[idx] == y[idx[0]]):
            continue
        f, thr, _ = best_split(X[idx], y[idx], n_classes, features)
        if f < 0:
            continue
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = int(f), float(thr)
        left[node], right[node] = new_node(li), new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return DecisionTree(feature, threshold, left, right, value, n_classes, max_depth,
                        None if feature_subset is None else features)


@dataclass
class ForestConfig:
    """Five-tree forest in one of three flavours.

    ``variant`` is ``"original"`` (bootstrap, all features, unlimited depth),
    ``"feature"`` (each tree sees a fixed random subset of ``m`` features) or
    ``"depth"`` (bootstrap with depth cap ``d``).
    """

    n_trees: int = 5
    variant: str = "original"
    m: Optional[int] = None
    d: Optional[int] = None
    bootstrap: bool = True
    seed: int = 0

    def validate(self, n_features=None):
        if self.variant not in ("original", "feature", "depth"):
            raise ValueError(f"unknown forest variant {self.variant!r}")
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.variant == "original" and not self.bootstrap:
            raise ValueError("the original forest always bootstraps")
        if self.variant == "feature":
            if self.m is None or self.m < 1:
                raise ValueError("feature variant needs m >= 1")
            if n_features is not None and self.m > n_features:
                raise ValueError(f"m={self.m} exceeds the {n_features} available features")
        if self.variant == "depth" and (self.d is None or self.d < 0):
            raise ValueError("depth variant needs d >= 0")
        return self

    @property
    def label(self):
        if self.variant == "feature":
            return f"feature_m{self.m}"
        if self.variant == "depth":
            return f"depth_d{self.d}"
        return "original"


class Forest:
    def __init__(self, trees, config):
        self.trees = trees
        self.config = config

    def member_predictions(self, X):
        return [t.predict(X) for t in self.trees]

    def predict(self, X):
        preds = np.stack(self.member_predictions(X), axis=1)
        return majority_vote(preds, self.trees[0].n_classes)


def train_forest(config, X, y, n_classes=None):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyData("cannot train a forest on zero samples")
    config.validate(X.shape[1])
    n_classes = int(n_classes or y.max() + 1)
    trees = []
    for child in np.random.SeedSequence(config.seed).spawn(config.n_trees):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, X.shape[0], X.shape[0]) if config.bootstrap else np.arange(X.shape[0])
        subset = np.sort(rng.choice(X.shape[1], config.m, replace=False)) if config.variant == "feature" else None
        depth = config.d if config.variant == "depth" else None
        trees.append(train_tree(X[rows], y[rows], n_classes, depth, subset, rng))
    return Forest(trees, config)


@dataclass
class ForestReport:
    label: str
    r_tl_ave: Optional[float]
    r_ll_ave: Optional[float]
    majority_accuracy: float
    gap: Optional[float]

    def row(self):
        return [self.label, self.r_ll_ave, self.r_tl_ave, self.majority_accuracy]


def forest_diversity_report(forest, X, y_true, label=None):
    """Correlation summary of the trees' hard predictions plus majority-vote accuracy.

    The correlation part is ``None`` when every class column is excluded
    for being constant.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    n_classes = forest.trees[0].n_classes
    preds = forest.member_predictions(X)
    vote = majority_vote(np.stack(preds, axis=1), n_classes)
    acc = float(np.mean(vote == y_true))
    s = label_summary(y_true, preds, n_classes) if len(preds) > 1 else None
    if s is None:
        logger.warning("no usable class column for forest %s", label or forest.config.label)
        return ForestReport(label or forest.config.label, None, None, acc, None)
    return ForestReport(label or forest.config.label, s.r_tl_ave, s.r_ll_ave, acc, optimality_gap(s))


def study_configs(seed=0, feature_sizes=FEATURE_SIZES, depths=DEPTHS):
    """The 11 forests: one original, five feature-subset, five depth-capped."""
    cfgs = [ForestConfig(variant="original", seed=seed)]
    cfgs += [ForestConfig(variant="feature", m=m, seed=seed) for m in feature_sizes]
    cfgs += [ForestConfig(variant="depth", d=d, seed=seed) for d in depths]
    return cfgs


def rf_study(X, y, n_classes=None, seed=0, feature_sizes=FEATURE_SIZES, depths=DEPTHS):
    """Train the 11 study forests and report each on the data it was trained on."""
    return [forest_diversity_report(train_forest(cfg, X, y, n_classes), X, y)
            for cfg in study_configs(seed, feature_sizes, depths)]


def write_report_csv(reports: List[ForestReport], path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "r_ll_ave", "r_tl_ave", "majority_accuracy"])
        for r in reports:
            w.writerow(r.row())
    return path
