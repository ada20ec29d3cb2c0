"""Accuracy/correlation relations for binary learners and majority-vote accuracy.

Notation: ``p`` is a learner's accuracy, ``alpha`` the share of 1s in the
truth, ``beta`` the share of the learner's correct answers that are 1s.
For a homogeneous ensemble every learner has the same truth correlation
``r_tl`` and every pair the same correlation ``r_ll``.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DegenerateProfile, EvenJury, InfeasibleSpec, UnachievableCorrelation
from .theory_bounds import BOUND_TOL


@dataclass(frozen=True)
class BinaryAccuracyProfile:
    p: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DegenerateProfile(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.p <= 1.0:
            raise DegenerateProfile(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 <= self.beta <= 1.0:
            raise DegenerateProfile(f"beta must lie in [0, 1], got {self.beta}")
        tp = self.beta * self.p
        tn = self.p - tp
        eps = 1e-12
        if tp > self.alpha + eps or tn > 1.0 - self.alpha + eps:
            raise DegenerateProfile(
                f"joint probabilities P(T=1,L=1)={tp:.6g}, P(T=0,L=0)={tn:.6g} "
                f"incompatible with alpha={self.alpha}"
            )

    @classmethod
    def from_labels(cls, truth, predicted):
        """Empirical profile of a 0/1 prediction vector against 0/1 truth."""
        t = np.asarray(truth).astype(bool)
        lab = np.asarray(predicted).astype(bool)
        p = float(np.mean(t == lab))
        if p == 0.0:
            raise DegenerateProfile("accuracy is zero; beta is undefined")
        beta = float(np.mean(t & lab)) / p
        return cls(p=p, alpha=float(np.mean(t)), beta=beta)


@dataclass(frozen=True)
class HomogeneousEnsembleSpec:
    n: int
    r_tl: float
    r_ll: float
    alpha: float = 0.5

    def __post_init__(self):
        _check_odd(self.n)
        if not 0.0 < self.alpha < 1.0:
            raise InfeasibleSpec(f"alpha must lie in (0, 1), got {self.alpha}")
        _check_feasible_pair(self.n, self.r_tl, self.r_ll)

    @property
    def accuracy(self):
        return correlation_to_accuracy_linear(self.r_tl, self.alpha)


def _check_odd(n):
    if int(n) != n or n < 1:
        raise EvenJury(f"jury size must be a positive odd integer, got {n}")
    if n % 2 == 0:
        raise EvenJury(f"jury size must be odd, got {n}")


def _check_feasible_pair(n, r_tl, r_ll):
    if not -1.0 <= r_tl <= 1.0 or not -1.0 <= r_ll <= 1.0:
        raise InfeasibleSpec(f"correlations must lie in [-1, 1], got r_tl={r_tl}, r_ll={r_ll}")
    if n < 2:
        return
    if r_ll < -1.0 / (n - 1) - BOUND_TOL:
        raise InfeasibleSpec(f"r_ll={r_ll} below -1/(n-1) for n={n}")
    bound = math.sqrt(max(0.0, ((n - 1) * r_ll + 1.0) / n))
    if abs(r_tl) > bound + BOUND_TOL:
        raise InfeasibleSpec(f"|r_tl|={abs(r_tl)} exceeds {bound:.6g} at r_ll={r_ll}, n={n}")


def accuracy_to_correlation(profile):
    """Exact truth-learner correlation implied by ``(p, alpha, beta)``."""
    p, a, b = profile.p, profile.alpha, profile.beta
    pos_rate = 2.0 * b * p - p + 1.0 - a  # P(L = 1)
    radicand = a * (1.0 - a) * pos_rate * (-2.0 * b * p + p + a)
    if radicand <= 0.0:
        raise DegenerateProfile(f"learner predictions are constant for {profile}")
    return (b * p - a * pos_rate) / math.sqrt(radicand)


def correlation_to_accuracy_linear(r, alpha):
    """Accuracy of a learner equally good on both classes: 2a(1-a)(1+r)."""
    return 2.0 * alpha * (1.0 - alpha) * (1.0 + r)


def correlation_to_accuracy_taylor(r, alpha, beta):
    """First-order expansion of the accuracy around ``beta = 1/2``."""
    a = alpha
    slope = (
        a - 2 * a**2 + 2 * a**3
        + 2 * a * r - 6 * a**2 * r + 4 * a**3 * r
        + a * r**2 - 3 * a**2 * r**2 + 2 * a**3 * r**2
    )
    return correlation_to_accuracy_linear(r, alpha) - 4.0 * slope * (beta - 0.5)


def beta_function(a, b):
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def binomial_majority(n, p):
    """P(more than half of ``n`` independent votes are correct)."""
    return math.fsum(math.comb(n, i) * p**i * (1.0 - p) ** (n - i) for i in range((n + 1) // 2, n + 1))


def jury_majority_probability(n, p, c, with_clamped=False):
    """Majority-vote accuracy of ``n`` votes, each correct w.p. ``p``, pairwise correlation ``c``.

    The correlated part is a second-order correction to the independent
    binomial tail and can leave [0, 1] for extreme ``(p, c)``. The raw value
    is returned; pass ``with_clamped=True`` to get ``(raw, clamped)``.
    """
    _check_odd(n)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not -1.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [-1, 1], got {c}")
    half = (n + 1) / 2
    base = binomial_majority(n, p)
    correction = (
        0.5 * c * (n - 1) * (0.5 - p)
        * p ** (half - 1) * (1.0 - p) ** (half - 1)
        / beta_function(half, half)
    )
    raw = base + correction
    if with_clamped:
        return raw, min(1.0, max(0.0, raw))
    return raw


def ensemble_majority_accuracy(spec, with_clamped=False):
    """Majority-vote accuracy of a homogeneous ensemble of binary learners."""
    p = spec.accuracy
    if not 0.0 <= p <= 1.0:
        raise InfeasibleSpec(f"implied accuracy {p} outside [0, 1]")
    return jury_majority_probability(spec.n, p, spec.r_ll, with_clamped=with_clamped)


def ensemble_majority_accuracy_balanced(n, r_tl, r_ll, strict=True):
    """Closed form for balanced classes (alpha = beta = 1/2).

    ``strict=False`` skips the joint-feasibility check so whole curves can
    be drawn for a fixed ``r_ll`` level (see ``vote_curves``).
    """
    _check_odd(n)
    if strict:
        _check_feasible_pair(n, r_tl, r_ll)
    elif not -1.0 <= r_tl <= 1.0:
        raise InfeasibleSpec(f"r_tl must lie in [-1, 1], got {r_tl}")
    p = 0.5 * (1.0 + r_tl)
    half = (n + 1) / 2
    base = binomial_majority(n, p)
    return base - 0.25 * r_tl * r_ll * (n - 1) / beta_function(half, half) * p ** (half - 1) * (1.0 - p) ** (half - 1)


def default_rll_levels(n, count=6):
    """``count`` evenly spaced learner-learner levels from -1/(n-1) to 1."""
    return [float(v) for v in np.linspace(-1.0 / (n - 1), 1.0, count)]


def vote_curves(n, r_ll_levels=None, grid_points=101):
    """Rows ``(r_ll, r_tl, accuracy)`` over r_tl in [0, 1] for each level."""
    levels = default_rll_levels(n) if r_ll_levels is None else list(r_ll_levels)
    rows = []
    for r_ll in levels:
        for r_tl in np.linspace(0.0, 1.0, grid_points):
            m = ensemble_majority_accuracy_balanced(n, float(r_tl), float(r_ll), strict=False)
            rows.append((float(r_ll), float(r_tl), float(m)))
    return rows


def write_vote_curves_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r_ll", "r_tl", "majority_accuracy"])
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


# -- Monte-Carlo oracle --------------------------------------------------------


def _equicorrelated_root(n, rho):
    cov = np.full((n, n), rho)
    np.fill_diagonal(cov, 1.0)
    w, v = np.linalg.eigh(cov)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def _vote_pair_correlation(votes):
    v = votes.astype(np.float64)
    v -= v.mean(axis=0)
    cov = v.T @ v
    sd = np.sqrt(np.diag(cov))
    if np.any(sd == 0.0):
        return np.nan
    corr = cov / np.outer(sd, sd)
    iu = np.triu_indices(votes.shape[1], k=1)
    return float(corr[iu].mean())


def bahadur_count_distribution(n, p, c):
    """P(k of ``n`` votes correct) under the second-order Bahadur expansion.

    Pairwise correlations equal ``c`` and all higher-order correlations
    vanish. Raises UnachievableCorrelation if any probability is negative.
    """
    a = math.sqrt((1.0 - p) / p)
    b = math.sqrt(p / (1.0 - p))
    probs = np.empty(n + 1)
    for k in range(n + 1):
        s = k * a - (n - k) * b
        s2 = k * a * a + (n - k) * b * b
        probs[k] = math.comb(n, k) * p**k * (1.0 - p) ** (n - k) * (1.0 + c * 0.5 * (s * s - s2))
    if np.any(probs < -1e-15):
        raise UnachievableCorrelation(f"second-order model has negative mass for n={n}, p={p}, c={c}")
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def simulate_correlated_votes(n, p, c, trials, seed, tol=1e-3, max_iter=80, return_details=False,
                              model="copula"):
    """Monte-Carlo majority-vote accuracy of ``n`` exchangeable correlated votes.

    With the default ``model="copula"`` each vote is correct when its
    latent standard normal falls below the ``p`` quantile; latents are
    equicorrelated. The latent correlation is
    found by bisection so that the average pairwise Pearson correlation of
    the simulated 0/1 votes matches ``c`` within ``tol``. The same latent
    draws are reused across bisection steps, so the result is a
    deterministic function of ``seed``.

    ``model="bahadur"`` instead draws the number of correct votes from the
    second-order Bahadur distribution, whose pairwise correlation is ``c``
    by construction and whose higher-order correlations are zero.

    Raises
    ------
    UnachievableCorrelation
        If ``c`` is outside what the latent model reaches (latent
        correlations below -1/(n-1) are not positive semidefinite) or the
        bisection cannot get within ``tol``.
    """
    _check_odd(n)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    rng = np.random.default_rng(seed)
    if model == "bahadur":
        counts = rng.choice(n + 1, size=int(trials), p=bahadur_count_distribution(n, p, c))
        acc = float((counts > n // 2).mean())
        return (acc, float("nan"), float(c)) if return_details else acc
    if model != "copula":
        raise ValueError(f"unknown vote model {model!r}")
    base = rng.standard_normal((int(trials), n))
    cut = ndtri(p)

    if n == 1:
        votes = base < cut
        acc = float(votes[:, 0].mean())
        return (acc, 0.0, float("nan")) if return_details else acc

    lo_rho = -1.0 / (n - 1)

    def run(rho):
        votes = (base @ _equicorrelated_root(n, rho).T) < cut
        return votes, _vote_pair_correlation(votes)

    lo, hi = (0.0, 1.0) if c >= 0.0 else (lo_rho, 0.0)
    votes, emp = run(0.0)
    rho = 0.0
    if np.isnan(emp) or abs(emp - c) > tol:
        _, emp_lo = run(lo)
        _, emp_hi = run(hi)
        if np.isnan(emp_lo) or np.isnan(emp_hi) or not (emp_lo - tol <= c <= emp_hi + tol):
            raise UnachievableCorrelation(
                f"vote correlation {c} not reachable for n={n}, p={p} "
                f"(range [{emp_lo:.4g}, {emp_hi:.4g}] with {trials} trials)"
            )
        for _ in range(max_iter):
            rho = 0.5 * (lo + hi)
            votes, emp = run(rho)
            if not np.isnan(emp) and abs(emp - c) <= tol:
                break
            if np.isnan(emp) or emp < c:
                lo = rho
            else:
                hi = rho
        else:
            raise UnachievableCorrelation(f"bisection did not reach {c} within {tol}")
    acc = float((votes.sum(axis=1) > n // 2).mean())
    if return_details:
        return acc, rho, emp
    return acc
