import math

import numpy as np
import pytest

from ruinalarm.compare import (
    crossover,
    delta_from_ruin_times,
    delta_stderr,
    delta_t,
    equivalent_initial_capital,
    rate_label,
    schedule_from_pool,
    survival_table,
)
from ruinalarm.model import CapitalSchedule
from ruinalarm.simulate import time_grid

RATES = (0.0, 0.1, 0.3, 0.5, 1.0, 1.5, 2.0, 5.0, math.inf)


class TestEquivalentCapital:
    def test_example_row(self, ex2_schedule):
        """Discounted injections for the four-alarm schedule."""
        got = [equivalent_initial_capital(ex2_schedule, r) for r in RATES]
        expected = [70.0, 68.540, 65.996, 63.875, 59.944, 57.341, 55.564, 51.509, 50.0]
        np.testing.assert_allclose(got, expected, atol=6e-4)

    def test_negative_rate(self, ex2_schedule):
        with pytest.raises(ValueError):
            equivalent_initial_capital(ex2_schedule, -0.1)

    def test_labels(self):
        assert [rate_label(r) for r in (0.0, 0.1, math.inf)] == ["0", "0.1", "inf"]


class TestDelta:
    def test_paired_estimator(self):
        """Matches the difference of empirical CDFs, with the paired variance."""
        rng = np.random.default_rng(0)
        a = rng.exponential(1.0, 5000)
        b = np.where(rng.random(5000) < 0.8, a, rng.exponential(1.2, 5000))
        grid = time_grid(3.0, 0.1)
        d, e = delta_from_ruin_times(a, b, grid)
        ref = np.array([(a <= t).mean() - (b <= t).mean() for t in grid])
        np.testing.assert_allclose(d, ref, atol=1e-12)
        diff = (a[:, None] <= grid).astype(float) - (b[:, None] <= grid)
        np.testing.assert_allclose(e, diff.std(axis=0) / np.sqrt(5000), atol=1e-12)

    def test_crossover(self):
        grid = np.arange(6.0)
        assert crossover(grid, np.array([0.0, 0.2, 0.1, -0.1, -0.2, 0.1])) == 3.0
        assert crossover(grid, np.array([0.0, 0.2, -0.1, 0.1, 0.2, 0.1])) is None
        assert crossover(grid, np.zeros(6)) is None


@pytest.fixture(scope="module")
def report(ex2_model, ex2_schedule, ex2_pool):
    return survival_table(ex2_model, ex2_schedule, RATES, pool=ex2_pool, horizon=4.0)


class TestSurvivalTable:
    def test_alarm_times_on_grid(self, report, ex2_schedule):
        for a in ex2_schedule.times:
            report.grid_index(a)
        with pytest.raises(ValueError):
            report.grid_index(0.295)

    def test_delta_is_survival_gap(self, report):
        np.testing.assert_allclose(report.delta, report.survival_noalarm - report.survival_alarm[None, :],
                                   atol=1e-12)

    def test_ordering_before_first_alarm(self, report):
        """Before A_1 the lump-sum system holds at least as much capital, so it is ahead."""
        g = report.grid_index(0.29)
        assert np.all(report.delta[:, : g + 1] >= 0)
        # r = inf holds exactly u_0, the same as the alarm system before A_1
        assert np.all(report.delta[report.rate_index(math.inf), : g + 1] == 0)

    def test_infinite_rate_never_ahead(self, report):
        """With r = inf the alarm system always holds at least as much capital."""
        assert np.all(report.delta[report.rate_index(math.inf)] <= 0)

    def test_rate_ordering(self, report):
        """Higher rates discount more, so no-alarm survival decreases with r."""
        assert np.all(np.diff(report.survival_noalarm, axis=0) <= 0)

    def test_accessors(self, report):
        assert delta_t(report, 0.1, 1.0) == report.delta[1, report.grid_index(1.0)]
        assert delta_stderr(report, 0.1, 1.0) > 0
        with pytest.raises(KeyError):
            report.rate_index(0.7)

    def test_csv(self, report, tmp_path):
        report.to_csv(tmp_path / "s.csv", ["h"], times=[0.1, 1.0])
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[1].startswith("# equivalent_capitals: r0=70.0000,r0.1=68.5397")
        assert lines[2].split(",")[:3] == ["t", "s_alarm", "s_noalarm_r0"]
        assert len(lines) == 5


class TestScheduleFromPool:
    def test_pb(self, ex2_pool, ex2_schedule):
        al = schedule_from_pool(ex2_pool, ex2_schedule, 0.225)
        tau = ex2_pool.ruin_times(ex2_schedule)
        assert al.p_b[2] == (tau > 0.91).mean()
        assert al.termination == "given"

    def test_flat_schedule(self, ex2_pool):
        al = schedule_from_pool(ex2_pool, CapitalSchedule(50.0), 0.1)
        assert al.k == 0 and al.p_b == ()
