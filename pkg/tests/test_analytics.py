import math

import numpy as np
import pytest

from qtherm.analytics import (
    AnalyticInputs,
    cold_time_bounds,
    diabatic_costs,
    frac_lz_probability,
    macro_power,
    predict_eta,
    predict_q2,
    predict_q4,
    predict_wtot,
    repulsion_scale,
    speed_window,
    subengine_gap,
)


def make_inputs(**kw):
    base = dict(mean_gap=0.01, wb=0.01 / 16, beta_c=math.inf, beta_h=0.0)
    base.update(kw)
    return AnalyticInputs(**base)


class TestHeatAndWork:
    def test_q2_cold_limit(self):
        inputs = make_inputs()
        assert predict_q2(inputs).value == pytest.approx(
            -inputs.wb**2 / (2 * inputs.mean_gap)
        )

    def test_q2_zero_bandwidth(self):
        assert predict_q2(make_inputs(wb=0.0)).value == 0.0

    def test_wtot_and_q4_cold_limit(self):
        inputs = make_inputs()
        d = inputs.mean_gap
        assert predict_wtot(inputs).value == pytest.approx(inputs.wb)
        assert predict_q4(inputs).value == pytest.approx(
            inputs.wb + inputs.wb**2 / (2 * d)
        )
        assert predict_eta(inputs).value == pytest.approx(1 - inputs.wb / (2 * d))

    def test_wb_zero_eta_undefined(self):
        pred = predict_eta(make_inputs(wb=0.0))
        assert math.isnan(pred.value)
        assert not pred.valid

    def test_first_law_consistency(self):
        # W_tot = Q2 + Q4 at the retained orders (beta_H = 0)
        for beta_c in (math.inf, 2000.0):
            inputs = make_inputs(beta_c=beta_c)
            total = predict_q2(inputs).value + predict_q4(inputs).value
            assert total == pytest.approx(
                predict_wtot(inputs).value + math.pi**2 / (6 * beta_c**2 * inputs.mean_gap)
                if not math.isinf(beta_c)
                else predict_wtot(inputs).value,
                rel=1e-12,
            )

    def test_eta_limits(self):
        small = make_inputs(wb=1e-9)
        assert predict_eta(small).value == pytest.approx(1.0, abs=1e-6)
        assert predict_wtot(make_inputs(wb=0.0)).value == 0.0

    def test_validity_flags(self):
        assert predict_q2(make_inputs()).valid
        assert not predict_q2(make_inputs(wb=0.05)).valid  # Wb > <delta>
        assert not predict_q2(make_inputs(beta_c=1.0)).valid  # warm cold bath

    def test_pure_functions(self):
        inputs = make_inputs(beta_c=500.0, beta_h=0.05)
        assert predict_q4(inputs) == predict_q4(inputs)
        assert predict_eta(inputs).value == predict_eta(inputs).value


class TestDiabaticCosts:
    def test_apt_vanishes_at_infinite_hot_temperature(self):
        costs = diabatic_costs(make_inputs(speed=1e-6, delta_minus=1e-4))
        assert costs.w_apt == 0.0
        assert costs.w_lz == 0.0

    def test_adiabatic_limit(self):
        costs = diabatic_costs(make_inputs(speed=0.0, delta_minus=1e-4))
        assert costs.w_apt == costs.w_lz == costs.w_frac_lz == 0.0

    def test_apt_positive_at_finite_beta_h(self):
        costs = diabatic_costs(
            make_inputs(speed=1e-6, delta_minus=1e-4, beta_h=0.05)
        )
        assert costs.w_apt > 0.0

    def test_frac_lz_order_unity_at_critical_speed(self):
        inputs = make_inputs(delta_minus=1e-4)
        v_star = inputs.wb**3 / inputs.delta_minus
        costs = diabatic_costs(make_inputs(speed=v_star, delta_minus=1e-4))
        # comparable to Wb: ratio of order one
        assert 0.1 < costs.w_frac_lz / inputs.wb < 10.0

    def test_frac_lz_probability_formula(self):
        inputs = make_inputs(speed=2e-6, delta_minus=3e-4)
        gap = 5e-3
        assert frac_lz_probability(inputs, gap) == pytest.approx(
            (2e-6) ** 2 * (3e-4) ** 2 / (16 * gap**6)
        )


class TestScalesAndWindows:
    def test_repulsion_scale_no_suppression(self):
        assert repulsion_scale(0.0, 1.0, energy_unit=3.0) == 3.0

    def test_repulsion_scale_form(self):
        assert repulsion_scale(12.0, 1.0) == pytest.approx(
            math.exp(-12.0) * 2.0**-12
        )

    def test_subengine_gap(self):
        assert subengine_gap(12.0) == pytest.approx(math.sqrt(12.0) / 4096.0)

    def test_macro_power_linear(self):
        assert macro_power(2e6, 12.0) == pytest.approx(2 * macro_power(1e6, 12.0))

    def test_speed_window_paper_numbers(self):
        inputs = make_inputs(xi_loc=12.0, xi_deep=1.0)
        deep = speed_window(inputs, "deep")
        shallow = speed_window(inputs, "shallow")
        # v_min ~ 1e-25 E^2 (deep), ~ 1e-11 E^2 (shallow)
        assert -26 < math.log10(deep.v_min) < -24
        assert -12 < math.log10(shallow.v_min) < -10
        # v_max ~ 1e-5 E^2 from interrupted crossings in the deep regime
        assert -6 < math.log10(deep.v_max) < -4
        assert not deep.empty
        assert not shallow.empty

    def test_cold_time_markov_bound(self):
        # xi_loc = 12, xi_deep = 1, Wb = <delta>_sub/10 -> tau ~ 1e22 / E
        xi = 12.0
        delta_sub = 1.0 / 2.0**xi  # drop the sqrt(xi) as the estimate does
        dm = repulsion_scale(xi, 1.0)
        inputs = make_inputs(
            mean_gap=delta_sub, wb=delta_sub / 10, delta_minus=dm, xi_loc=xi
        )
        tau_markov, tau_high = cold_time_bounds(inputs)
        expected = 10.0 * math.exp(2 * xi) * 2.0 ** (3 * xi)
        assert tau_markov == pytest.approx(expected, rel=1e-9)
        assert 21 < math.log10(tau_markov) < 23
        assert tau_high > 0.0

    def test_cold_time_requires_positive_scales(self):
        with pytest.raises(ValueError):
            cold_time_bounds(make_inputs(delta_minus=0.0))
