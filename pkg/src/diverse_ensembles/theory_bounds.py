"""Feasible region of (averaged learner-learner, averaged truth-learner) pairs.

For N learners the averaged learner-learner correlation lives in
[-1/(N-1), 1], and for a given value ``r`` of it the averaged
truth-learner correlation is bounded in magnitude by
sqrt(((N-1) r + 1) / N). Both bounds are tight.
"""
import csv
import math
from typing import NamedTuple

import numpy as np

from .errors import InfeasibleSummary, OutOfRange, TooFewLearners

# slack for floating-point summaries sitting exactly on a boundary
BOUND_TOL = 1e-9


class BoundPair(NamedTuple):
    lower: float
    upper: float


def _check_n(n_learners):
    if int(n_learners) != n_learners or n_learners < 2:
        raise TooFewLearners(f"need an integer ensemble size >= 2, got {n_learners}")
    return int(n_learners)


def rll_bounds(n_learners):
    n = _check_n(n_learners)
    return BoundPair(-1.0 / (n - 1), 1.0)


def rtl_bound(n_learners, r_ll_ave, tol=BOUND_TOL):
    """Symmetric bound ``(-B, B)`` on the averaged truth-learner correlation.

    ``r_ll_ave`` may overshoot the learner-learner range by ``tol``; the
    radicand is clipped at zero in that case.
    """
    n = _check_n(n_learners)
    lo, hi = rll_bounds(n)
    if not (lo - tol <= r_ll_ave <= hi + tol):
        raise OutOfRange(f"r_ll_ave={r_ll_ave} outside [{lo}, {hi}] for N={n}")
    radicand = ((n - 1) * r_ll_ave + 1.0) / n
    b = math.sqrt(min(1.0, max(0.0, radicand)))
    return BoundPair(-b, b)


def check_feasible(n_learners, r_tl_ave, r_ll_ave, tol=BOUND_TOL):
    """Raise InfeasibleSummary unless both bounds hold within ``tol``."""
    try:
        b = rtl_bound(n_learners, r_ll_ave, tol=tol).upper
    except OutOfRange as exc:
        raise InfeasibleSummary(str(exc)) from None
    if abs(r_tl_ave) > b + tol:
        raise InfeasibleSummary(
            f"|r_tl_ave|={abs(r_tl_ave):.6g} exceeds bound {b:.6g} at r_ll_ave={r_ll_ave:.6g}, N={n_learners}"
        )


def optimality_gap(summary):
    """Vertical distance from the summary's point up to the upper boundary curve.

    Zero means the ensemble sits on the boundary; larger is worse.
    """
    check_feasible(summary.n_learners, summary.r_tl_ave, summary.r_ll_ave)
    upper = rtl_bound(summary.n_learners, summary.r_ll_ave).upper
    return max(0.0, upper - summary.r_tl_ave)


def bound_slack(n_learners, r_tl_ave, r_ll_ave):
    """Smallest margin to any of the three bounds; negative means violated."""
    n = _check_n(n_learners)
    lo = -1.0 / (n - 1)
    radicand = ((n - 1) * r_ll_ave + 1.0) / n
    b = math.sqrt(max(0.0, radicand))
    slack = min(r_ll_ave - lo, 1.0 - r_ll_ave, b - abs(r_tl_ave))
    if radicand < 0.0:
        slack = min(slack, radicand)
    return slack


def boundary_curve(n_learners, grid_points):
    """Rows ``(r_ll, r_tl_upper, r_tl_lower)`` sampled uniformly in r_ll."""
    n = _check_n(n_learners)
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    lo, hi = rll_bounds(n)
    rows = []
    for r in np.linspace(lo, hi, int(grid_points)):
        b = rtl_bound(n, float(r))
        rows.append((float(r), b.upper, b.lower + 0.0))
    return rows


def write_boundary_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r_ll", "r_tl_upper", "r_tl_lower"])
        for r in rows:
            w.writerow([repr(float(v)) for v in r])
