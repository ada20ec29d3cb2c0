"""DECORATE baseline: grow an ensemble on artificial, inversely labelled data.

Starting from one learner fit to the training set, each iteration draws
an artificial set from per-attribute training distributions, labels it
against the current ensemble (classes the ensemble finds unlikely are
favoured), fits a candidate on the union, and keeps the candidate unless
ensemble accuracy on the original training set drops.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .corr_metrics import label_summary
from .datasets import kfold_split, one_hot, train_test_folds
from .diverse_train import (
    EnsembleModel,
    ExperimentResult,
    TraceRow,
    _fold_seed,
    _prepare,
    predict,
    run_folds,
)
from .errors import ConfigError, EmptyTraining, FactoryFailure
from .neural import SGD, MlpNetwork, Tensor, softmax_cross_entropy

logger = logging.getLogger(__name__)


@dataclass
class DecorateConfig:
    target_size: int = 15
    r_ratio: float = 1.0
    max_iterations: int = 50
    epsilon: float = 1e-3
    seed: int = 0
    epochs: int = 300
    learning_rate: float = 0.05
    hidden: List[int] = field(default_factory=lambda: [16])
    standardize: bool = True

    def validate(self):
        if self.target_size < 1:
            raise ConfigError("target_size", f"must be >= 1, got {self.target_size}")
        if not 0.0 <= self.r_ratio <= 1.0:
            raise ConfigError("r_ratio", f"must lie in [0, 1], got {self.r_ratio}")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations", f"must be >= 0, got {self.max_iterations}")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon", f"must lie in (0, 1), got {self.epsilon}")
        if self.epochs < 0:
            raise ConfigError("epochs", f"must be >= 0, got {self.epochs}")
        return self


def generate_artificial(X_train, r_ratio, rng, feature_kinds=None):
    """Draw ``floor(r_ratio * n)`` artificial rows.

    Numeric columns are Normal(mean, std) of the training column; nominal
    columns sample observed values with Laplace-smoothed frequencies.
    """
    X = np.asarray(X_train, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise EmptyTraining("need at least 2 training rows to estimate attribute statistics")
    n, q = X.shape
    size = int(np.floor(r_ratio * n))
    kinds = feature_kinds or ["numeric"] * q
    out = np.empty((size, q))
    for j in range(q):
        col = X[:, j]
        if kinds[j] == "nominal":
            values, counts = np.unique(col, return_counts=True)
            probs = (counts + 1.0) / (n + len(values))
            out[:, j] = rng.choice(values, size=size, p=probs)
        else:
            out[:, j] = rng.normal(col.mean(), col.std(), size=size)
    return out


def inverse_label(probs, epsilon, rng):
    """Sample a class with probability proportional to 1 / ensemble probability.

    ``probs`` may be one row or a matrix of rows. Entries below
    ``epsilon`` are raised to ``epsilon`` first.
    """
    p = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    w = 1.0 / np.maximum(p, epsilon)
    w /= w.sum(axis=1, keepdims=True)
    u = rng.random(p.shape[0])
    labels = np.minimum((w.cumsum(axis=1) < u[:, None]).sum(axis=1), p.shape[1] - 1)
    return int(labels[0]) if np.ndim(probs) == 1 else labels


def inverse_weights(probs, epsilon):
    p = np.maximum(np.asarray(probs, dtype=np.float64), epsilon)
    w = 1.0 / p
    return w / w.sum(axis=-1, keepdims=True)


def mlp_factory(hidden, epochs, learning_rate, seed):
    """Learner factory fitting a fresh MLP with full-batch cross-entropy."""

    def fit(X, y, n_classes, index):
        net = MlpNetwork([X.shape[1], *hidden, n_classes], seed=seed, index=index)
        Xt = Tensor(X)
        Y = one_hot(y, n_classes)
        opt = SGD(net.parameters(), learning_rate)
        for _ in range(epochs):
            opt.zero_grad()
            softmax_cross_entropy(net(Xt), Y).backward()
            opt.step()
        return net

    return fit


def _ensemble_accuracy(members, X, y):
    probs = np.mean([m.predict_proba(X) for m in members], axis=0)
    return float(np.mean(np.argmax(probs, axis=1) == y))


def _trace_row(step, members, X, y, n_classes, accuracy):
    s = label_summary(y, [m.predict(X) for m in members], n_classes) if len(members) > 1 else None
    return TraceRow(step, float("nan"), float("nan"),
                    None if s is None else s.r_tl_ave, None if s is None else s.r_ll_ave,
                    1.0 - accuracy)


def decorate_train(config, factory, X, y, n_classes=None, feature_kinds=None):
    """Build a DECORATE ensemble with learners from ``factory(X, y, n_classes, index)``.

    Returns an :class:`EnsembleModel` using the averaged-probability
    combiner; its trace has one row per accepted member with the hard-label
    summary on ``X`` and the training error in the ``loss`` slot.
    ``model.accuracy_trace`` lists training accuracy after each acceptance.
    """
    config.validate()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] < 2:
        raise EmptyTraining("need at least 2 training rows")
    n_classes = int(n_classes or y.max() + 1)
    rng = np.random.default_rng(config.seed)

    def fit(Xf, yf, index):
        try:
            return factory(Xf, yf, n_classes, index)
        except Exception as exc:
            raise FactoryFailure(f"learner factory failed on candidate {index}: {exc}") from exc

    members = [fit(X, y, 0)]
    accuracy = _ensemble_accuracy(members, X, y)
    acc_trace = [accuracy]
    trace = [_trace_row(0, members, X, y, n_classes, accuracy)]
    index = 1
    for it in range(config.max_iterations):
        if len(members) >= config.target_size:
            break
        art = generate_artificial(X, config.r_ratio, rng, feature_kinds)
        if art.shape[0]:
            probs = np.mean([m.predict_proba(art) for m in members], axis=0)
            art_y = inverse_label(probs, config.epsilon, rng)
            Xu, yu = np.vstack([X, art]), np.concatenate([y, art_y])
        else:
            Xu, yu = X, y
        candidate = fit(Xu, yu, index)
        index += 1
        new_acc = _ensemble_accuracy(members + [candidate], X, y)
        if new_acc >= accuracy:
            members.append(candidate)
            accuracy = new_acc
            acc_trace.append(accuracy)
            trace.append(_trace_row(it + 1, members, X, y, n_classes, accuracy))
        else:
            logger.debug("rejected candidate %d (accuracy %.4f < %.4f)", index - 1, new_acc, accuracy)
    model = EnsembleModel(members, "avg", trace)
    model.accuracy_trace = acc_trace
    return model


def _run_decorate_fold(config, dataset, train, test, fold):
    cfg = DecorateConfig(**{**asdict(config), "seed": _fold_seed(config.seed, fold)})
    Xtr, ytr, Xte, yte = _prepare(dataset, train, test, config.standardize)
    factory = mlp_factory(config.hidden, config.epochs, config.learning_rate, cfg.seed)
    model = decorate_train(cfg, factory, Xtr, ytr, dataset.n_classes, dataset.feature_kinds)
    err = float(np.mean(predict(model, Xte) != yte))
    s = label_summary(ytr, [m.predict(Xtr) for m in model.members], dataset.n_classes) \
        if len(model.members) > 1 else None
    return err, model.trace, None if s is None else s.as_dict()


def evaluate_decorate_cv(config, dataset, k=10, seed=0, jobs=1, stratify=False):
    config.validate()
    folds = kfold_split(dataset.n, k, seed, dataset.labels if stratify else None)
    tasks = [(config, dataset, tr, te, i) for i, (tr, te) in enumerate(train_test_folds(folds))]
    results = run_folds(_run_decorate_fold, jobs, tasks)
    errors = [r[0] for r in results]
    return ExperimentResult(
        method="decorate",
        dataset=dataset.name,
        config={**asdict(config), "folds": k, "cv_seed": seed, "stratify": stratify},
        fold_errors=errors,
        mean_error=float(np.mean(errors)),
        trace=[asdict(t) for t in results[0][1]],
        fold_summaries=[r[2] for r in results],
        outputs="hard",
    )
