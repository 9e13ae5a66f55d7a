import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfpricing import (
    Bounds,
    IntensityParams,
    InventoryRange,
    ModelParams,
    PenaltyParams,
    check_intensity_conditions,
    finite_market_sales_derivative,
    intensity,
    validate_params,
)

BASE_IP = IntensityParams(scale=1.0, kappa=1.0, beta=0.3)


def grid_points(lo=-2.0, hi=2.0, n=5):
    axis = np.linspace(lo, hi, n)
    return [(d, m) for d in axis for m in axis]


class TestValidateParams:
    def test_base_parameter_set_is_valid(self):
        assert validate_params(ModelParams()) == []

    def test_negative_kappa_flagged_by_name(self):
        p = ModelParams(intensity=IntensityParams(kappa=-1.0))
        assert validate_params(p) == ["kappa >= 0"]

    def test_oversell_penalty_ordering(self):
        p = ModelParams(
            inv=InventoryRange(q_max=5, q_min=-2),
            penalty=PenaltyParams(alpha_pos=0.1, alpha_neg=0.05, phi_pos=0.03, phi_neg=0.06),
        )
        assert "alpha_pos < alpha_neg" in validate_params(p)

    def test_base_model_ignores_penalty_ordering(self):
        p = ModelParams(penalty=PenaltyParams(alpha_pos=0.1, alpha_neg=0.05,
                                              phi_pos=0.03, phi_neg=0.01))
        assert validate_params(p) == []

    def test_bounds_and_inventory_checks(self):
        p = ModelParams(bounds=Bounds(b_lo=2.0, b_hi=1.0))
        assert "b_lo < b_hi" in validate_params(p)
        p = ModelParams(inv=InventoryRange(q_max=0, q_min=0))
        assert "q_min <= 0 < q_max" in validate_params(p)


class TestIntensity:
    def test_zero_exponent(self):
        assert intensity(0.0, 0.0, BASE_IP) == 1.0

    def test_equal_quotes_reduce_to_single_agent_form(self):
        # the competition term beta * (mean - own) cancels when all agree
        for delta in (-1.5, -0.3, 0.0, 0.4, 1.7):
            expected = BASE_IP.scale * math.exp(-BASE_IP.kappa * delta)
            assert intensity(delta, delta, BASE_IP) == pytest.approx(expected, rel=1e-14)

    def test_scalar_evaluation(self):
        # exponent: -(1 + 0.3) * 1 + 0.3 * 0.5 = -1.15
        assert intensity(1.0, 0.5, BASE_IP) == pytest.approx(math.exp(-1.15), rel=1e-12)
        assert intensity(1.0, 0.5, BASE_IP) == pytest.approx(0.316637, abs=1e-6)

    @given(
        d1=st.floats(-2, 2), d2=st.floats(-2, 2), m=st.floats(-2, 2),
    )
    @settings(max_examples=100, deadline=None)
    def test_decreasing_in_own_increasing_in_mean(self, d1, d2, m):
        lo, hi = sorted((d1, d2))
        if hi - lo > 1e-9:
            assert intensity(lo, m, BASE_IP) > intensity(hi, m, BASE_IP)
            assert intensity(m, hi, BASE_IP) > intensity(m, lo, BASE_IP)


class TestIntensityConditions:
    def test_base_form_passes_all_five(self):
        report = check_intensity_conditions(BASE_IP, grid_points())
        assert report.all_passed(), report.failed()

    def test_no_competition_fails_market_slope_only(self):
        report = check_intensity_conditions(IntensityParams(1.0, 1.0, 0.0), grid_points())
        assert report.failed() == ["market_slope_positive"]

    def test_zero_scale_degenerates(self):
        report = check_intensity_conditions(IntensityParams(0.0, 1.0, 0.3), grid_points())
        failed = set(report.failed())
        assert {"own_slope_negative", "market_slope_positive",
                "joint_raise_slows_sales"} <= failed
        assert report.cross_effect_nonpositive.passed  # 0 <= 0

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            check_intensity_conditions(BASE_IP, [])

    @given(
        kappa=st.floats(0.1, 3.0), beta=st.floats(0.05, 2.0), scale=st.floats(0.1, 5.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_positive_parameters_always_pass(self, kappa, beta, scale):
        ip = IntensityParams(scale=scale, kappa=kappa, beta=beta)
        assert check_intensity_conditions(ip, grid_points(n=3)).all_passed()


def _fd_market_sales_derivative(ip, quotes, i, step=1e-6):
    """Finite-difference oracle: perturb each quote but agent i's and sum the
    responses of every agent's rate."""
    quotes = np.asarray(quotes, dtype=float)
    m = quotes.size

    def rate(j, qs):
        mix = (ip.beta / m) * (qs.sum() - qs[j])
        return ip.scale * math.exp(-(ip.kappa + ip.beta * (m - 1) / m) * qs[j] + mix)

    total = 0.0
    for k in range(m):
        if k == i:
            continue
        up, dn = quotes.copy(), quotes.copy()
        up[k] += step
        dn[k] -= step
        for j in range(m):
            total += (rate(j, up) - rate(j, dn)) / (2 * step)
    return total


class TestFiniteMarketSalesDerivative:
    def test_large_market_common_quotes_negative(self):
        quotes = np.ones(100)
        value = finite_market_sales_derivative(BASE_IP, quotes, 0)
        assert value < 0
        assert value == pytest.approx(_fd_market_sales_derivative(BASE_IP, quotes, 0), rel=1e-4)

    def test_two_agents_no_own_sensitivity_can_be_positive(self):
        # kappa = 0, strong competition, asymmetric quotes: the closed form is
        # (beta/2) * (rate_i - rate_other), positive when agent i quotes lower
        ip = IntensityParams(scale=1.0, kappa=0.0, beta=2.0)
        value = finite_market_sales_derivative(ip, [0.0, 1.0], 0)
        assert value == pytest.approx(math.e - math.exp(-1.0), rel=1e-12)
        assert value > 0
        assert value == pytest.approx(_fd_market_sales_derivative(ip, [0.0, 1.0], 0), rel=1e-4)

    def test_zero_scale_gives_zero(self):
        ip = IntensityParams(scale=0.0, kappa=1.0, beta=0.3)
        assert finite_market_sales_derivative(ip, [1.0, 2.0, 3.0], 1) == 0.0

    def test_requires_two_agents(self):
        with pytest.raises(ValueError):
            finite_market_sales_derivative(BASE_IP, [1.0], 0)

    def test_negative_across_common_quote_range(self):
        for quote in np.linspace(-2, 2, 9):
            value = finite_market_sales_derivative(BASE_IP, np.full(100, quote), 3)
            assert value < 0
