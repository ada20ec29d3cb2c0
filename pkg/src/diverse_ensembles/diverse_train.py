"""Ensemble training with the correlation-sum loss.

Each epoch: zero gradients, run every member on the full training set,
compute

    loss = -(r_tl - lam * r_ll)

where ``r_tl`` sums the column-wise Pearson correlations between the
one-hot truth and every member's softmax output (N * m terms) and
``r_ll`` sums the column-wise correlations between every pair of members
(m * N(N-1)/2 terms), then backpropagate and take one SGD step.

Note that ``r_tl`` and ``r_ll`` here are sums, not the averages reported
by :mod:`corr_metrics`. The two conventions differ by the factors N*m and
m*N(N-1)/2, so a given ``lam`` means different things in each.
"""
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from . import kernels
from .corr_metrics import label_summary
from .datasets import Standardizer, kfold_split, one_hot, train_test_folds
from .errors import ConfigError, ConstantTruthColumn, ShapeMismatch
from .neural import (
    PEARSON_EPS,
    SGD,
    MlpNetwork,
    Tensor,
    concat,
    forward_softmax,
    no_grad,
    softmax_cross_entropy,
)

logger = logging.getLogger(__name__)

COMBINERS = ("avg", "vote")
DEFAULT_LAMBDA_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass
class TrainingConfig:
    ensemble_size: int = 15
    lam: float = 0.9
    epochs: int = 1000
    learning_rate: float = 0.05
    seed: int = 0
    hidden: List[int] = field(default_factory=lambda: [16])
    combiner: str = "avg"
    pretrain_epochs: int = 0
    pretrain_learning_rate: Optional[float] = None
    standardize: bool = True
    trace_every: int = 1

    def validate(self):
        if self.ensemble_size < 2:
            raise ConfigError("ensemble_size", f"must be >= 2, got {self.ensemble_size}")
        if not self.lam > 0.0:
            raise ConfigError("lam", f"must be > 0, got {self.lam}")
        if self.epochs < 0:
            raise ConfigError("epochs", f"must be >= 0, got {self.epochs}")
        if self.pretrain_epochs < 0:
            raise ConfigError("pretrain_epochs", f"must be >= 0, got {self.pretrain_epochs}")
        if not self.learning_rate > 0.0:
            raise ConfigError("learning_rate", f"must be > 0, got {self.learning_rate}")
        if self.pretrain_learning_rate is not None and not self.pretrain_learning_rate > 0.0:
            raise ConfigError("pretrain_learning_rate", f"must be > 0, got {self.pretrain_learning_rate}")
        if self.combiner not in COMBINERS:
            raise ConfigError("combiner", f"must be one of {COMBINERS}, got {self.combiner!r}")
        if any(int(h) < 1 for h in self.hidden):
            raise ConfigError("hidden", f"layer widths must be positive, got {self.hidden}")
        if self.trace_every < 1:
            raise ConfigError("trace_every", f"must be >= 1, got {self.trace_every}")
        return self


@dataclass
class TraceRow:
    epoch: int
    r_tl_sum: float
    r_ll_sum: float
    r_tl_ave: Optional[float]
    r_ll_ave: Optional[float]
    loss: float


@dataclass
class EnsembleModel:
    members: List[MlpNetwork]
    combiner: str = "avg"
    trace: List[TraceRow] = field(default_factory=list)

    def __post_init__(self):
        if not self.members:
            raise ShapeMismatch("an ensemble needs at least one member")
        widths = {(m.layer_sizes[0], m.layer_sizes[-1]) for m in self.members}
        if len(widths) != 1:
            raise ShapeMismatch(f"members disagree on input/output widths: {sorted(widths)}")

    @property
    def n_classes(self):
        return self.members[0].layer_sizes[-1]

    def member_probabilities(self, X):
        return [m.predict_proba(X) for m in self.members]

    def predict_proba(self, X):
        return np.mean(self.member_probabilities(X), axis=0)

    def predict(self, X, rule=None):
        return predict(self, X, rule)


# -- loss ------------------------------------------------------------------


def _class_masks(n_members, m, present):
    width = n_members * m
    tl = np.zeros((m, width))
    ll = np.zeros((width, width))
    for k in range(m):
        for j in range(n_members):
            if present[k]:
                tl[k, j * m + k] = 1.0
            for i in range(j):
                ll[i * m + k, j * m + k] = 1.0
    return tl, ll


def correlation_terms(outputs, Y, eps=PEARSON_EPS):
    """Differentiable ``(r_tl, r_ll)`` sums for member outputs against one-hot ``Y``.

    Class columns that are constant in ``Y`` (classes absent from the
    training fold) are left out of ``r_tl`` with a warning; ``r_ll`` keeps
    every column.
    """
    Yd = np.asarray(Y.data if isinstance(Y, Tensor) else Y, dtype=np.float64)
    if not outputs:
        raise ShapeMismatch("no member outputs")
    n, m = Yd.shape
    for o in outputs:
        if o.shape != (n, m):
            raise ShapeMismatch(f"member output {o.shape} does not match labels {(n, m)}")
    present = np.ptp(Yd, axis=0) > 0.0
    if not present.any():
        raise ConstantTruthColumn("every class column of Y is constant")
    if not present.all():
        logger.warning("skipping %d constant truth column(s) in r_tl", int((~present).sum()))
    n_members = len(outputs)
    tl_mask, ll_mask = _class_masks(n_members, m, present)

    O = concat(outputs, axis=1)
    Oc = O - O.mean(axis=0)
    var_o = (Oc * Oc).mean(axis=0)
    Yc = Yd - Yd.mean(axis=0)
    var_y = (Yc * Yc).mean(axis=0, keepdims=True)

    cov_ty = Tensor(Yc.T / n) @ Oc
    r_ty = cov_ty / (Tensor(var_y.T) @ var_o + eps).sqrt()
    r_tl = (r_ty * tl_mask).sum()

    cov_oo = Oc.T @ Oc * (1.0 / n)
    r_oo = cov_oo / (var_o.T @ var_o + eps).sqrt()
    r_ll = (r_oo * ll_mask).sum() if n_members > 1 else Tensor(0.0)
    return r_tl, r_ll


def correlation_loss(outputs, Y, lam):
    r_tl, r_ll = correlation_terms(outputs, Y)
    return -(r_tl - r_ll * lam)


# -- training ----------------------------------------------------------------


def build_members(config, n_features, n_classes):
    sizes = [n_features] + [int(h) for h in config.hidden] + [n_classes]
    return [MlpNetwork(sizes, seed=config.seed, index=j) for j in range(config.ensemble_size)]


def pretrain_members(members, X, Y, epochs, learning_rate):
    """Fit each member alone with cross-entropy, full batch."""
    Xt = Tensor(X)
    for net in members:
        opt = SGD(net.parameters(), learning_rate)
        for _ in range(epochs):
            opt.zero_grad()
            softmax_cross_entropy(net(Xt), Y).backward()
            opt.step()
    return members


def _hard_summary(members, X, labels, n_classes):
    preds = [m.predict(X) for m in members]
    return label_summary(labels, preds, n_classes)


def train_ensemble(config, X, Y, members=None):
    """Run the correlation-loss training loop; returns an :class:`EnsembleModel`.

    ``members`` may hold pre-fit networks to fine-tune; otherwise fresh
    ones are built from ``config``. ``config.pretrain_epochs`` of
    per-member cross-entropy (at ``pretrain_learning_rate`` when given)
    run first when set.
    """
    config.validate()
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[0] != Y.shape[0]:
        raise ShapeMismatch(f"X has {X.shape[0]} rows, Y has {Y.shape[0]}")
    n_classes = Y.shape[1]
    if members is None:
        members = build_members(config, X.shape[1], n_classes)
    for net in members:
        if net.layer_sizes[0] != X.shape[1] or net.layer_sizes[-1] != n_classes:
            raise ShapeMismatch(f"member widths {net.layer_sizes} do not fit data {X.shape} -> {n_classes}")
    if config.pretrain_epochs:
        lr = config.pretrain_learning_rate or config.learning_rate
        pretrain_members(members, X, Y, config.pretrain_epochs, lr)

    labels = np.argmax(Y, axis=1)
    Xt = Tensor(X)
    params = [p for net in members for p in net.parameters()]
    opt = SGD(params, config.learning_rate)
    trace = []
    for epoch in range(config.epochs):
        opt.zero_grad()
        outputs = [forward_softmax(net, Xt) for net in members]
        r_tl, r_ll = correlation_terms(outputs, Y)
        loss = -(r_tl - r_ll * config.lam)
        loss.backward()
        opt.step()
        if epoch % config.trace_every == 0 or epoch == config.epochs - 1:
            # hard labels are taken from the outputs this step was computed on
            preds = [np.argmax(o.data, axis=1) for o in outputs]
            s = label_summary(labels, preds, n_classes)
            trace.append(TraceRow(
                epoch, r_tl.item(), r_ll.item(),
                None if s is None else s.r_tl_ave,
                None if s is None else s.r_ll_ave,
                loss.item(),
            ))
    return EnsembleModel(list(members), config.combiner, trace)


def predict(ensemble, X, rule=None):
    """Hard labels from an ensemble.

    ``"avg"`` averages member softmax rows and takes the argmax; ``"vote"``
    takes each member's argmax and a plurality vote, ties to the lowest
    class index.
    """
    rule = rule or ensemble.combiner
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != ensemble.members[0].layer_sizes[0]:
        raise ShapeMismatch(f"input shape {X.shape} does not fit the ensemble")
    probs = ensemble.member_probabilities(X)
    if rule == "avg":
        return np.argmax(np.mean(probs, axis=0), axis=1)
    if rule == "vote":
        votes = np.stack([np.argmax(p, axis=1) for p in probs], axis=1)
        return kernels.majority_vote(votes, ensemble.n_classes)
    raise ValueError(f"unknown combiner {rule!r}")


# -- cross-validation -----------------------------------------------------------


@dataclass
class ExperimentResult:
    method: str
    dataset: str
    config: dict
    fold_errors: List[float]
    mean_error: float
    trace: List[dict] = field(default_factory=list)
    fold_summaries: List[Optional[dict]] = field(default_factory=list)
    outputs: str = "soft"
    created: Optional[str] = None

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def trace_rows(self):
        return list(self.trace)


def _fold_seed(seed, fold):
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, fold]).generate_state(1)[0])


def _prepare(dataset, train, test, standardize):
    Xtr, Xte = dataset.X[train], dataset.X[test]
    if standardize:
        scale = Standardizer(Xtr)
        Xtr, Xte = scale(Xtr), scale(Xte)
    return Xtr, dataset.labels[train], Xte, dataset.labels[test]


def _run_fold(config, dataset, train, test, fold):
    cfg = TrainingConfig(**{**asdict(config), "seed": _fold_seed(config.seed, fold)})
    Xtr, ytr, Xte, yte = _prepare(dataset, train, test, config.standardize)
    model = train_ensemble(cfg, Xtr, one_hot(ytr, dataset.n_classes))
    err = float(np.mean(predict(model, Xte) != yte))
    summary = _hard_summary(model.members, Xtr, ytr, dataset.n_classes)
    return err, model.trace, None if summary is None else summary.as_dict()


def run_folds(fn, jobs, tasks):
    """Run ``fn(*task)`` for each task, in a process pool when ``jobs > 1``."""
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *t) for t in tasks]
        return [f.result() for f in futures]


def evaluate_cv(config, dataset, k=10, seed=0, jobs=1, stratify=False):
    """k-fold cross-validated error of the correlation-loss ensemble.

    The trace kept in the result is the first fold's per-epoch trace.
    """
    config.validate()
    folds = kfold_split(dataset.n, k, seed, dataset.labels if stratify else None)
    tasks = [(config, dataset, tr, te, i) for i, (tr, te) in enumerate(train_test_folds(folds))]
    results = run_folds(_run_fold, jobs, tasks)
    errors = [r[0] for r in results]
    return ExperimentResult(
        method="correlation-loss",
        dataset=dataset.name,
        config={**asdict(config), "folds": k, "cv_seed": seed, "stratify": stratify},
        fold_errors=errors,
        mean_error=float(np.mean(errors)),
        trace=[asdict(t) for t in results[0][1]],
        fold_summaries=[r[2] for r in results],
    )
