import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diverse_ensembles.corr_metrics import CorrelationSummary, correlation_summary
from diverse_ensembles.errors import InfeasibleSummary, OutOfRange, TooFewLearners
from diverse_ensembles.theory_bounds import (
    bound_slack,
    boundary_curve,
    check_feasible,
    optimality_gap,
    rll_bounds,
    rtl_bound,
    write_boundary_csv,
)
from diverse_ensembles.verification import cauchy_schwarz_suite


class TestLearnerBounds:
    @pytest.mark.parametrize("n, lower", [(2, -1.0), (5, -0.25), (11, -0.1)])
    def test_values(self, n, lower):
        assert rll_bounds(n) == pytest.approx((lower, 1.0))

    @pytest.mark.parametrize("n", [1, 0, 2.5])
    def test_too_few(self, n):
        with pytest.raises(TooFewLearners):
            rll_bounds(n)

    def test_pair_reaches_lower_bound(self):
        l1 = np.array([1, 0, 1, 1, 0, 0])
        s = correlation_summary(l1, [l1, 1 - l1])
        assert s.r_ll_ave == pytest.approx(-1.0, abs=1e-12)

    def test_equal_learners_reach_upper_bound(self):
        t = np.array([1, 0, 1, 1, 0, 0])
        s = correlation_summary(t, [np.roll(t, 1)] * 4)
        assert s.r_ll_ave == pytest.approx(1.0, abs=1e-12)


class TestTruthBound:
    def test_three_learner_example(self):
        b = rtl_bound(3, -0.2)
        assert b.upper == pytest.approx(math.sqrt(0.2), abs=1e-12)
        assert b.lower == -b.upper
        assert abs(0.3) <= b.upper

    @pytest.mark.parametrize("n", [2, 3, 7, 20])
    def test_full_agreement(self, n):
        assert rtl_bound(n, 1.0) == pytest.approx((-1.0, 1.0))

    def test_degenerate_at_lower(self):
        assert rtl_bound(5, -0.25) == pytest.approx((0.0, 0.0), abs=1e-15)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            rtl_bound(5, -0.3)
        with pytest.raises(OutOfRange):
            rtl_bound(5, 1.01)

    @given(st.integers(2, 50), st.floats(0.0, 1.0))
    def test_radicand_nonnegative(self, n, u):
        lo = -1.0 / (n - 1)
        r = lo + u * (1.0 - lo)
        b = rtl_bound(n, r).upper
        assert 0.0 <= b <= 1.0


class TestGap:
    def test_on_boundary(self):
        s = CorrelationSummary(3, math.sqrt(0.2), -0.2)
        assert optimality_gap(s) == pytest.approx(0.0, abs=1e-12)

    def test_inside(self):
        assert optimality_gap(CorrelationSummary(3, 0.3, -0.2)) == pytest.approx(math.sqrt(0.2) - 0.3, abs=1e-12)
        assert optimality_gap(CorrelationSummary(3, 0.3, -0.2)) == pytest.approx(0.1472, abs=1e-4)

    def test_centre(self):
        assert optimality_gap(CorrelationSummary(5, 0.0, 0.0)) == pytest.approx(math.sqrt(0.2), abs=1e-12)

    def test_infeasible(self):
        with pytest.raises(InfeasibleSummary):
            optimality_gap(CorrelationSummary(3, 0.6, -0.2))
        with pytest.raises(InfeasibleSummary):
            check_feasible(3, 0.0, -0.6)

    def test_slack_sign(self):
        assert bound_slack(5, 0.2, 0.1) > 0
        assert bound_slack(5, 0.9, 0.1) < 0
        assert bound_slack(5, 0.0, -0.3) < 0


class TestBoundaryCurve:
    def test_endpoints(self):
        rows = boundary_curve(5, 11)
        assert rows[0] == pytest.approx((-0.25, 0.0, 0.0), abs=1e-15)
        assert rows[-1] == pytest.approx((1.0, 1.0, -1.0))

    def test_interior(self):
        rows = boundary_curve(5, 6)
        r_ll = [r[0] for r in rows]
        i = int(np.argmin(np.abs(r_ll)))
        assert r_ll[i] == pytest.approx(0.0, abs=1e-12)
        assert rows[i][1] == pytest.approx(math.sqrt(0.2), abs=1e-12)

    def test_monotone_upper(self):
        upper = [r[1] for r in boundary_curve(7, 200)]
        assert min(upper) >= 0.0
        assert all(b >= a for a, b in zip(upper, upper[1:]))

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            boundary_curve(5, 1)

    def test_csv(self, tmp_path):
        path = tmp_path / "b.csv"
        write_boundary_csv(boundary_curve(5, 3), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "r_ll,r_tl_upper,r_tl_lower"
        assert len(lines) == 4
        assert "-0.0" not in lines[1].split(",")


def test_cauchy_schwarz_inequality():
    report = cauchy_schwarz_suite(2000, seed=3)
    assert report["violations"] == 0
    assert report["min_scaled_slack"] >= -1e-9
