import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ruinalarm.model import CapitalSchedule, Exponential, Logarithmic, Pareto, RiskModel
from ruinalarm import simulate as sim
from ruinalarm.simulate import (
    PsiSurface,
    RuinCDF,
    conditional_cdf,
    estimate_psi_surface,
    estimate_ruin_cdf,
    ruin_time,
    simulate_path,
    simulate_pool,
    surface_from_pool,
    time_grid,
)

MODEL = RiskModel(Exponential(1.0), 2.0, 2.5, 3.0)


class TestTimeGrid:
    def test_exact_decimals(self):
        g = time_grid(1.0, 0.01)
        assert len(g) == 101
        assert g[29] == 0.29 and g[-1] == 1.0


class TestDeterminism:
    def test_workers_do_not_change_paths(self):
        """Thread count leaves every stored array bit-identical."""
        a = simulate_pool(MODEL, 5.0, 9000, 7, 20.0, workers=1)
        b = simulate_pool(MODEL, 5.0, 9000, 7, 20.0, workers=4)
        for name in ("counts", "times", "outgo", "runmax"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_chunk_size_does_not_change_paths(self, monkeypatch):
        """Cumulative sums carry across chunks exactly."""
        a = simulate_pool(MODEL, 5.0, 500, 7)
        monkeypatch.setattr(sim, "CHUNK_DRAWS", 5)
        b = simulate_pool(MODEL, 5.0, 500, 7)
        np.testing.assert_array_equal(a.times, b.times)
        np.testing.assert_array_equal(a.outgo, b.outgo)

    def test_extend_equals_larger_run(self):
        """Topping up continues the same stream of path indices."""
        small = simulate_pool(MODEL, 3.0, 5000, 2, 10.0).extend(3000)
        big = simulate_pool(MODEL, 3.0, 8000, 2, 10.0)
        np.testing.assert_array_equal(small.counts, big.counts)
        np.testing.assert_array_equal(small.outgo, big.outgo)

    def test_single_path_regeneration(self):
        """``simulate_path`` reproduces path ``i`` of the pool."""
        pool = simulate_pool(MODEL, 3.0, 100, 9)
        off = pool.offsets
        path = simulate_path(MODEL, 3.0, 9, 42)
        np.testing.assert_array_equal([e.time for e in path], pool.times[off[42]:off[43]])


class TestRuinTimes:
    pool = simulate_pool(MODEL, 6.0, 4000, 3, 30.0)

    def test_matches_scalar_scan(self):
        """Vectorised ruin times agree with a per-path scan against a schedule."""
        sched = CapitalSchedule(3.0, (0.5, 1.5), (1.0, 2.0))
        tau = self.pool.ruin_times(sched)
        for i in range(0, 4000, 97):
            out = ruin_time(simulate_path(MODEL, 6.0, 3, i), sched, horizon=6.0)
            assert (out.time if out.ruined else np.inf) == tau[i]

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, 25.0), st.floats(0.0, 5.0))
    def test_coupling_monotone(self, u, extra):
        """More capital never brings ruin earlier on the same path."""
        lo = self.pool.ruin_times(u)
        hi = self.pool.ruin_times(u + extra)
        assert np.all(hi >= lo)

    def test_threshold_above_stop_level_rejected(self):
        with pytest.raises(ValueError):
            self.pool.ruin_times(31.0)

    def test_stop_level_truncation_is_invisible(self):
        """Truncating paths above the stop level does not change ruin times below it."""
        full = simulate_pool(MODEL, 6.0, 4000, 3)
        cut = simulate_pool(MODEL, 6.0, 4000, 3, 4.0)
        for u in (0.0, 2.5, 4.0):
            np.testing.assert_array_equal(full.ruin_times(u), cut.ruin_times(u))
        assert len(cut.times) < len(full.times)

    def test_outgo_at(self):
        """Net outgo at a fixed time from the last event and the premium accrued since."""
        a = 1.3
        out = self.pool.outgo_at(a)
        off = self.pool.offsets
        for i in range(0, 4000, 211):
            t, r = self.pool.times[off[i]:off[i + 1]], self.pool.outgo[off[i]:off[i + 1]]
            before = t <= a
            if np.any(r[before] > self.pool.stop_level):
                assert np.isinf(out[i])
                continue
            expect = (r[before][-1] - 2.5 * (a - t[before][-1])) if before.any() else -2.5 * a
            assert out[i] == pytest.approx(expect, abs=1e-12)


class TestRuinCDF:
    def test_streamed_equals_pooled(self):
        grid = time_grid(4.0)
        streamed = estimate_ruin_cdf(MODEL, 3.0, 4.0, 6000, 1, grid)
        pool = simulate_pool(MODEL, 4.0, 6000, 1, 3.0)
        pooled = RuinCDF.from_ruin_times(pool.ruin_times(3.0), grid)
        np.testing.assert_array_equal(streamed.psi, pooled.psi)

    def test_grid_beyond_horizon_rejected(self):
        with pytest.raises(ValueError):
            estimate_ruin_cdf(MODEL, 3.0, 2.0, 100, 0, time_grid(3.0))

    def test_discrete_claims_at_ruin_level(self):
        """Integer claims: with u=0 and c small, a unit claim before t=1/c ruins."""
        m = RiskModel(Logarithmic(0.3), 1.0, 0.5, 0.0)
        cdf = estimate_ruin_cdf(m, 0.0, 2.0, 20_000, 0)
        # ruin by t=2 iff the first claim arrives before 2 (surplus c t < 1 <= X)
        assert cdf.at(2.0) == pytest.approx(1 - np.exp(-2.0), abs=4 * cdf.stderr[-1] + 0.005)


class TestConditional:
    def test_conditional_cdf(self):
        tau = np.array([0.05, 0.2, 0.35, 0.6, np.inf, np.inf, 1.5, 0.3])
        grid = time_grid(2.0, 0.1)
        c = conditional_cdf(tau, 0.3, grid)
        assert c.n_survivors == 5 and c.n_total == 8
        assert c.p_condition == pytest.approx(5 / 8)
        assert c.time_grid[0] == pytest.approx(0.3)
        assert c.at(0.4) == pytest.approx(1 / 5)
        assert c.at(2.0) == pytest.approx(3 / 5)

    def test_no_survivors(self):
        with pytest.raises(sim.ConditioningError):
            conditional_cdf(np.array([0.1, 0.2]), 0.5, time_grid(1.0))


class TestSurface:
    caps = np.arange(0.0, 10.5, 0.5)
    grid = time_grid(3.0, 0.05)
    pool = simulate_pool(MODEL, 3.0, 5000, 4, 10.0)

    def test_matches_direct_counts(self):
        """Each surface cell equals the ruin fraction computed from ruin times."""
        surf = surface_from_pool(self.pool, self.caps, self.grid)
        for ci in (0, 3, 12, 20):
            cdf = RuinCDF.from_ruin_times(self.pool.ruin_times(self.caps[ci]), self.grid)
            np.testing.assert_array_equal(surf.psi[ci], cdf.psi)

    def test_monotone(self):
        surf = surface_from_pool(self.pool, self.caps, self.grid)
        assert np.all(np.diff(surf.psi, axis=0) <= 0)
        assert np.all(np.diff(surf.psi, axis=1) >= 0)

    def test_streamed_equals_pooled(self):
        a = estimate_psi_surface(MODEL, self.caps, self.grid, 5000, 4)
        b = surface_from_pool(self.pool, self.caps, self.grid)
        np.testing.assert_array_equal(a.psi, b.psi)

    def test_interpolation(self):
        surf = surface_from_pool(self.pool, self.caps, self.grid)
        assert float(surf(2.0, 1.0)) == surf.psi[4, 20]
        mid = float(surf(2.25, 1.0))
        assert mid == pytest.approx(0.5 * (surf.psi[4, 20] + surf.psi[5, 20]))
        assert float(surf(-1.0, 1.0)) == 1.0
        assert float(surf(3.0, 0.0)) == 0.0
        with pytest.raises(ValueError):
            surf(1.0, 3.5)

    def test_csv_round_trip(self, tmp_path):
        surf = surface_from_pool(self.pool, self.caps, self.grid)
        surf.to_csv(tmp_path / "s.csv", ["header"])
        back = PsiSurface.from_csv(tmp_path / "s.csv")
        np.testing.assert_array_equal(back.psi, surf.psi)
        np.testing.assert_array_equal(back.time_grid, surf.time_grid)
        assert back.n_paths == 5000


class TestHeavyTail:
    def test_pareto_paths_finite(self):
        """Infinite-mean claims still give finite stored outgo below the stop level."""
        m = RiskModel(Pareto(1.0, 0.95), 20.0, 40.0, 50.0)
        pool = simulate_pool(m, 2.0, 3000, 0, 100.0)
        assert np.all(np.isfinite(pool.outgo))
        assert np.all(pool.ruin_times(50.0) <= pool.ruin_times(60.0))
