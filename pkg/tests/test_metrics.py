import numpy as np
import pytest

from mfpricing import (
    ModelParams,
    cancellation_probability,
    economic_series,
)
from conftest import oversell_params


class TestEconomicSeries:
    def test_initial_values(self, base_eq, base_params):
        series = economic_series(base_eq, base_params)
        assert series.cost[0] == 0.0
        assert series.volume[0] == 0.0
        # all mass at full inventory, no sales yet: only the preemptive penalty
        assert series.revenue[0] == pytest.approx(-2.5, abs=1e-14)
        assert np.isnan(series.avg_cost[0])
        assert not np.isnan(series.avg_cost[1:]).any()

    def test_single_active_state_pins_the_instant_cost(self, base_eq, base_params):
        series = economic_series(base_eq, base_params)
        assert series.inst_cost[0] == base_eq.quotes.level(5)[0]

    def test_cost_and_volume_nondecreasing(self, base_eq, base_params):
        series = economic_series(base_eq, base_params)
        assert np.all(np.diff(series.cost) >= 0)
        assert np.all(np.diff(series.volume) >= 0)

    def test_revenue_below_cost_until_penalty_vanishes(self, base_eq, base_params):
        series = economic_series(base_eq, base_params)
        assert np.all(series.revenue <= series.cost)
        assert series.revenue[-1] < series.cost[-1]  # unsold mass remains at T

    def test_instant_cost_inside_the_quote_envelope(self, base_eq, base_params):
        series = economic_series(base_eq, base_params)
        f = base_eq.quotes.quotes
        assert np.all(series.inst_cost >= f.min(axis=0) - 1e-12)
        assert np.all(series.inst_cost <= f.max(axis=0) + 1e-12)

    def test_volume_equals_expected_units_sold(self, base_eq, base_params):
        # mass accounting: cumulative sales = initial inventory minus the
        # population-mean inventory, exactly on the shared grid
        levels = base_params.inv.levels().astype(float)
        mean_inventory = levels @ base_eq.population.proportions
        series = economic_series(base_eq, base_params)
        expected = base_params.inv.q_max - mean_inventory
        assert np.abs(series.volume - expected).max() <= 1e-12

    def test_avg_cost_is_cost_over_volume(self, base_eq, base_params):
        series = economic_series(base_eq, base_params)
        sold = series.volume > 0
        assert np.allclose(
            series.avg_cost[sold], series.cost[sold] / series.volume[sold], rtol=0, atol=0
        )


class TestCancellationProbability:
    def test_direct_formula_evaluation(self):
        p = oversell_params()
        # levels: [-2, -1, 0, 1, 2, 3, 4, 5]
        final = np.array([0.1, 0.2, 0.3, 0.2, 0.1, 0.05, 0.05, 0.0])
        report = cancellation_probability(final, p)
        expected = 0.2 * (1 / 6) + 0.1 * (2 / 7)
        assert report.probability == pytest.approx(expected, rel=1e-12)
        assert report.probability == pytest.approx(0.061905, abs=1e-6)
        assert report.per_depth[1] == pytest.approx(0.2 / 6, rel=1e-12)
        assert report.per_depth[2] == pytest.approx(0.2 / 7, rel=1e-12)

    def test_no_oversold_mass_means_no_cancellations(self):
        p = oversell_params()
        final = np.array([0.0, 0.0, 0.4, 0.3, 0.2, 0.1, 0.0, 0.0])
        assert cancellation_probability(final, p).probability == 0.0

    def test_everything_at_the_floor(self):
        p = oversell_params()
        final = np.zeros(8)
        final[0] = 1.0  # q = -2
        report = cancellation_probability(final, p)
        assert report.probability == pytest.approx(2 / 7, rel=1e-12)

    def test_probability_sums_per_depth_terms(self, oversell_low_eq, oversell_low_params):
        report = cancellation_probability(oversell_low_eq.population.final(), oversell_low_params)
        assert 0.0 <= report.probability <= 1.0
        assert report.probability == pytest.approx(sum(report.per_depth.values()), rel=1e-14)

    def test_base_model_rejected(self):
        with pytest.raises(ValueError):
            cancellation_probability(np.ones(6) / 6, ModelParams())

    def test_no_sales_rejected(self):
        p = oversell_params()
        final = np.zeros(8)
        final[-1] = 1.0
        with pytest.raises(ValueError):
            cancellation_probability(final, p)
