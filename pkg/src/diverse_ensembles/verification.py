"""Randomised checks of the correlation bounds and the accuracy-correlation identity.

Each suite returns a plain dict (JSON-ready) with a ``violations`` count
and the extreme value it observed.
"""
import time

import numpy as np

from .corr_metrics import pearson, summarize
from .theory_bounds import BOUND_TOL, bound_slack
from .vote_theory import BinaryAccuracyProfile, accuracy_to_correlation


def random_gram_correlation(n_learners, rng, dim=None):
    """Correlation matrix of ``n_learners + 1`` random unit vectors.

    The dimension defaults to a random value in ``1..n_learners + 3`` so
    that rank-deficient (boundary) matrices are sampled as well.
    """
    size = n_learners + 1
    dim = dim or int(rng.integers(1, size + 3))
    V = rng.standard_normal((size, dim))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    G = V @ V.T
    G = 0.5 * (G + G.T)
    np.fill_diagonal(G, 1.0)
    return np.clip(G, -1.0, 1.0)


def gram_bound_suite(samples, seed, n_range=(2, 10)):
    """Check both averaged-correlation bounds on random Gram matrices."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    min_slack = np.inf
    violations = 0
    for _ in range(samples):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        s = summarize(random_gram_correlation(n, rng))
        slack = bound_slack(n, s.r_tl_ave, s.r_ll_ave)
        min_slack = min(min_slack, slack)
        violations += slack < -BOUND_TOL
    return {"suite": "gram_bounds", "samples": samples, "violations": int(violations),
            "min_slack": float(min_slack), "seconds": time.perf_counter() - t0}


def cauchy_schwarz_suite(samples, seed, n_range=(2, 10), length=50):
    """(sum_i corr(L_i, T))^2 <= N + N(N-1) r_ll_ave on random real vectors."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    min_slack = np.inf
    violations = 0
    for _ in range(samples):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        # a shared component gives a spread of learner-learner correlations
        base = rng.standard_normal(length)
        T = rng.standard_normal(length) + rng.normal() * base
        L = rng.standard_normal((n, length)) + rng.normal(size=(n, 1)) * base
        C = np.corrcoef(np.vstack([T, L]))
        r_tl = C[0, 1:]
        r_ll_ave = C[1:, 1:][np.triu_indices(n, 1)].mean()
        slack = n + n * (n - 1) * r_ll_ave - r_tl.sum() ** 2
        min_slack = min(min_slack, slack / max(1.0, n * n))
        violations += slack < -BOUND_TOL * n * n
    return {"suite": "cauchy_schwarz", "samples": samples, "violations": int(violations),
            "min_scaled_slack": float(min_slack), "seconds": time.perf_counter() - t0}


def random_label_pair(rng, length=100):
    """Truth with a random positive rate and a learner flipping a random share of it."""
    while True:
        alpha = rng.uniform(0.1, 0.9)
        flip = rng.uniform(0.0, 1.0)
        T = (rng.random(length) < alpha).astype(np.int64)
        L = np.where(rng.random(length) < flip, 1 - T, T)
        if 0 < T.sum() < length and 0 < L.sum() < length and (T == L).any():
            return T, L


def accuracy_identity_suite(pairs, seed, length=100, tol=1e-10):
    """Closed-form correlation from (p, alpha, beta) versus direct Pearson.

    Also reports the sample correlation between accuracy and r over the pairs.
    """
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    ps, rs = np.empty(pairs), np.empty(pairs)
    max_err = 0.0
    for i in range(pairs):
        T, L = random_label_pair(rng, length)
        profile = BinaryAccuracyProfile.from_labels(T, L)
        r = pearson(T, L)
        max_err = max(max_err, abs(accuracy_to_correlation(profile) - r))
        ps[i], rs[i] = profile.p, r
    trend = float(np.corrcoef(ps, rs)[0, 1])
    return {"suite": "accuracy_identity", "samples": pairs, "violations": int(max_err > tol),
            "max_abs_error": max_err, "p_r_correlation": trend,
            "seconds": time.perf_counter() - t0}


def run_all(samples, seed, pairs=2000):
    reports = [
        gram_bound_suite(samples, seed),
        cauchy_schwarz_suite(samples, seed + 1),
        accuracy_identity_suite(pairs, seed + 2),
    ]
    return {"seed": seed, "suites": reports,
            "violations": int(sum(r["violations"] for r in reports))}
