import math

import numpy as np
import pytest
from scipy import integrate, stats

from ruinalarm.model import (
    CapitalSchedule,
    Degenerate,
    Exponential,
    Logarithmic,
    Pareto,
    RiskModel,
    TabulatedDiscrete,
    capital_level,
    level_after,
    level_before,
    loading_factor,
    satisfies_npc,
)


class TestClaimLaws:
    def test_exponential_ppf_matches_scipy(self):
        u = np.linspace(0.01, 0.99, 25)
        np.testing.assert_allclose(Exponential(0.5).ppf(u), stats.expon(scale=2.0).ppf(u), rtol=1e-12)

    def test_pareto_ppf_matches_lomax(self):
        u = np.linspace(0.01, 0.99, 25)
        np.testing.assert_allclose(Pareto(1.0, 0.95).ppf(u), stats.lomax(0.95, scale=1.0).ppf(u), rtol=1e-10)

    def test_pareto_mean(self):
        assert math.isinf(Pareto(1.0, 0.95).mean())
        assert Pareto(2.0, 3.0).mean() == pytest.approx(1.0)

    def test_pareto_pdf_integrates_to_sf(self):
        p = Pareto(1.0, 1.5)
        val, _ = integrate.quad(lambda x: float(p.pdf(x)), 0.0, 4.0)
        assert val == pytest.approx(1.0 - float(p.sf(4.0)), rel=1e-9)

    def test_logarithmic_pmf(self):
        """The pmf sums to one and matches scipy's logser."""
        law = Logarithmic(0.95)
        total = math.fsum(law.pmf(i) for i in range(1, 2000))
        assert total == pytest.approx(1.0, abs=1e-12)
        for i in (1, 2, 5, 30):
            assert law.pmf(i) == pytest.approx(stats.logser(0.95).pmf(i), rel=1e-12)
        assert law.mean() == pytest.approx(6.342356, abs=1e-6)

    def test_logarithmic_ppf_inverts_cdf(self):
        law = Logarithmic(0.6)
        u = np.linspace(0.001, 0.999, 200)
        np.testing.assert_array_equal(law.ppf(u), stats.logser(0.6).ppf(u))

    def test_tabulated(self):
        law = TabulatedDiscrete((0.5, 0.3, 0.2))
        assert law.mean() == pytest.approx(1.7)
        assert law.tail(2) == pytest.approx(0.5)
        assert list(law.ppf([0.1, 0.6, 0.95])) == [1.0, 2.0, 3.0]
        with pytest.raises(ValueError):
            TabulatedDiscrete((0.5, 0.4))

    def test_degenerate_support(self):
        assert Degenerate(1.0).is_integer
        assert not Degenerate(0.5).is_integer

    @pytest.mark.parametrize("bad", [lambda: Exponential(0.0), lambda: Pareto(1.0, -1.0),
                                     lambda: Logarithmic(1.0), lambda: Degenerate(0.0)])
    def test_rejects_bad_parameters(self, bad):
        with pytest.raises(ValueError):
            bad()


class TestRiskModel:
    def test_loading_factor(self):
        assert loading_factor(RiskModel(Exponential(0.5), 20.0, 25.0)) == pytest.approx(-0.375)
        assert loading_factor(RiskModel(Exponential(1.0), 1.0, 1.5)) == pytest.approx(0.5)

    def test_infinite_mean_loading_is_minus_one(self):
        m = RiskModel(Pareto(1.0, 0.95), 20.0, 40.0)
        assert loading_factor(m) == -1.0
        assert not satisfies_npc(m)

    def test_rejects_zero_intensity(self):
        with pytest.raises(ValueError):
            RiskModel(Exponential(1.0), 0.0, 1.0)


class TestCapitalSchedule:
    schedule = CapitalSchedule(50.0, (0.29, 0.58, 0.91, 1.28), (5.0,) * 4)

    def test_left_continuous(self):
        """An injection at A is available only strictly after A."""
        assert float(self.schedule.level(0.29)) == 50.0
        assert float(self.schedule.level(0.2900001)) == 55.0
        assert float(self.schedule.level(5.0)) == 70.0

    def test_total_and_prefix(self):
        assert self.schedule.total == 70.0
        assert self.schedule.prefix(2).times == (0.29, 0.58)

    def test_rejects_unordered_times(self):
        with pytest.raises(ValueError):
            CapitalSchedule(1.0, (0.5, 0.4), (1.0, 1.0))

    def test_levels(self):
        """Level of the bridging models at r = 10%."""
        s = self.schedule
        assert level_before(s, 0) == 0.0
        assert level_before(s, 2) == 55.0
        assert capital_level(s, 0, 0.5, 0.1) == pytest.approx(68.53968750973657, abs=1e-12)
        assert capital_level(s, 4, 2.0, 0.1) == 70.0
        # model 2 follows the staircase until A_2, then holds the discounted remainder
        assert capital_level(s, 2, 0.3, 0.1) == 55.0
        expected = 60.0 + 5 * math.exp(-0.1 * 0.33) + 5 * math.exp(-0.1 * 0.70)
        assert capital_level(s, 2, 0.6, 0.1) == pytest.approx(expected, abs=1e-12)

    def test_level_after_infinite_rate(self):
        assert level_after(self.schedule, 1, math.inf) == 55.0

    def test_capital_level_bounds(self):
        with pytest.raises(IndexError):
            capital_level(self.schedule, 5, 1.0, 0.1)
        with pytest.raises(ValueError):
            capital_level(self.schedule, 1, 0.0, 0.1)
