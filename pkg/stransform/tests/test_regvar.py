import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stransform.exceptions import (
    DomainTooSmall, ExponentBelowOne, NonPositiveValue, RegimeMismatch, ValidationError,
)
from stransform.free_mult import s_combine
from stransform.measures import FreePoisson, MuAlphaBeta, Pareto
from stransform.regvar import (
    LogPowerSV, Quality, Regime, TailAsymptotic, de_bruijn_conjugate, de_bruijn_product, declared_tail,
    estimate_left_tail_from_s, estimate_tail_from_s, fit_reg_var, iterated_log,
    phase_index, pi_class_test, predict_power_tail, regime_for_index, sv_mul,
    sv_eval, sv_pow, sv_rescale_argument, sv_shift_log, symmetric_tail,
)
from stransform.transforms import closed_form_handle, s_transform


class TestLogPowerSV:

    def test_trailing_zero_exponents_dropped(self):
        assert LogPowerSV(2.0, (1.0, 0.0, 0.0)) == LogPowerSV(2.0, (1.0,))

    @pytest.mark.parametrize('exponents, threshold', [
        ((), 0.0),
        ((1.0,), math.e),
        ((1.0, 2.0), math.exp(math.e)),
    ])
    def test_threshold(self, exponents, threshold):
        assert LogPowerSV(1.0, exponents).threshold == pytest.approx(threshold)

    def test_evaluation(self):
        sv = LogPowerSV(3.0, (2.0, 1.0))
        x = 1e6
        expected = 3.0 * math.log(x) ** 2 * math.log(math.log(x))
        assert sv(x) == pytest.approx(expected, rel=1e-12)

    def test_evaluation_beyond_float_range(self):
        sv = LogPowerSV(1.0, (1.0,))
        assert sv.log_value_at_log(1e300) == pytest.approx(math.log(1e300))

    def test_below_threshold(self):
        with pytest.raises(DomainTooSmall):
            LogPowerSV(1.0, (1.0,))(2.0)

    def test_constant_needs_positive_value(self):
        with pytest.raises(ValidationError):
            LogPowerSV(0.0)

    def test_iterated_log(self):
        assert iterated_log(math.exp(math.exp(2.0)), 2) == pytest.approx(2.0)


class TestAlgebra:

    def test_mul(self):
        product = sv_mul(LogPowerSV(2.0, (1.0,)), LogPowerSV(3.0, (-1.0, 2.0)))
        assert product == LogPowerSV(6.0, (0.0, 2.0))

    def test_conjugate(self):
        assert de_bruijn_conjugate(LogPowerSV(2.0, (1.0,))) == LogPowerSV(0.5, (-1.0,))

    def test_eval(self):
        assert sv_eval(LogPowerSV(2.0, (1.0,)), math.e ** 3) == pytest.approx(6.0)

    def test_pow(self):
        assert sv_pow(LogPowerSV(4.0, (2.0,)), 0.5) == LogPowerSV(2.0, (1.0,))

    def test_rescale_argument(self):
        # L(x^2) = 2 (2 log x)^3 = 16 (log x)^3
        assert sv_rescale_argument(LogPowerSV(2.0, (3.0,)), 2.0) == LogPowerSV(16.0, (3.0,))

    def test_rescale_keeps_constants(self):
        assert sv_rescale_argument(LogPowerSV(5.0), 3.0) == LogPowerSV(5.0)

    def test_shift_log(self):
        shifted = sv_shift_log(LogPowerSV(1.0, (2.0,)))
        x = 1e50
        assert shifted(x) == pytest.approx(math.log(math.log(x)) ** 2)

    @pytest.mark.parametrize('sv', [
        LogPowerSV(1.0, (1.0,)),
        LogPowerSV(1.0, (1.0, 1.0)),
    ], ids=['log', 'log*loglog'])
    def test_de_bruijn_product(self, sv):
        assert de_bruijn_product(sv, 1e4) == pytest.approx(1.0, abs=0.01)


class TestFitRegVar:
    grid = np.logspace(2, 12, 11)

    def test_pure_power(self):
        fit = fit_reg_var(lambda x: 5.0 * x ** -2, self.grid)
        assert fit.index == pytest.approx(-2.0, abs=1e-9)
        assert fit.constant == pytest.approx(5.0, rel=1e-9)
        assert fit.quality is Quality.GOOD

    def test_with_log_factor(self):
        fit = fit_reg_var(lambda x: 5.0 * x ** -2 * math.log(x), self.grid, sv=LogPowerSV(1.0, (1.0,)))
        assert fit.index == pytest.approx(-2.0, abs=0.01)
        assert fit.constant == pytest.approx(5.0, rel=0.02)

    def test_unmodelled_log_factor_degrades(self):
        fit = fit_reg_var(lambda x: x ** -1 * math.log(x) ** 5, self.grid)
        assert fit.quality is Quality.DEGRADED

    def test_non_geometric_grid(self):
        with pytest.raises(ValidationError):
            fit_reg_var(lambda x: x, [1.0, 2.0, 3.0, 4.0, 5.0])

    def test_non_positive_values(self):
        with pytest.raises(NonPositiveValue):
            fit_reg_var(lambda x: -x, self.grid)

    @given(st.floats(-3.0, 3.0), st.floats(0.1, 10.0))
    def test_recovers_power(self, index, constant):
        fit = fit_reg_var(lambda x: constant * x ** index, self.grid)
        assert fit.index == pytest.approx(index, abs=1e-8)


class TestPiClass:
    grid = np.logspace(3, 8, 6)

    def test_logarithm(self):
        fit = pi_class_test(lambda x: 3.0 * math.log(x) + 7.0, lambda x: 1.0, self.grid)
        assert fit.constant == pytest.approx(3.0)
        assert fit.in_class

    def test_power_is_not_in_class(self):
        fit = pi_class_test(lambda x: x, lambda x: 1.0, self.grid)
        assert fit.flag == 'not_in_pi_class'

    def test_lambdas_must_exceed_one(self):
        with pytest.raises(ValidationError):
            pi_class_test(math.log, lambda x: 1.0, self.grid, lambdas=(0.5, 2.0))


class TestPrediction:

    def test_phase_transition(self):
        result = predict_power_tail(0.5, LogPowerSV(1.0), 2)
        assert result.index == pytest.approx(1.0 / 3.0)
        assert result.constant == pytest.approx(1.51005, rel=1e-4)
        assert result.regime is Regime.ALPHA01

    def test_finite_mean(self):
        result = predict_power_tail(2.0, LogPowerSV(1.0), 2, m1=2.0)
        assert result.index == 2.0
        assert result.constant == pytest.approx(8.0)

    def test_critical_line(self):
        result = predict_power_tail(1.0, LogPowerSV(1.0), 2)
        assert result.sv == LogPowerSV(2.0, (1.0,))
        assert result.regime is Regime.ALPHA1

    def test_slow(self):
        result = predict_power_tail(0.0, LogPowerSV(1.0, (-2.0,)), 3)
        assert result.regime is Regime.SLOW
        assert result.constant == pytest.approx(9.0)

    def test_first_power_is_identity(self):
        sv = LogPowerSV(2.0)
        assert predict_power_tail(0.3, sv, 1).sv == sv

    def test_exponent_below_one(self):
        with pytest.raises(ExponentBelowOne):
            predict_power_tail(0.5, LogPowerSV(1.0), 0.5)

    @pytest.mark.parametrize('alpha, sv, m1', [
        (0.5, LogPowerSV(1.0), 2.0),
        (2.0, LogPowerSV(1.0), None),
        (1.0, LogPowerSV(1.0, (1.0,)), None),
    ])
    def test_regime_mismatch(self, alpha, sv, m1):
        with pytest.raises(RegimeMismatch):
            predict_power_tail(alpha, sv, 2, m1=m1)

    @given(st.floats(0.05, 0.95), st.floats(1.0, 10.0), st.floats(0.0, 5.0))
    def test_phase_index_decreases_with_t(self, alpha, t, extra):
        assert 0 < phase_index(alpha, t + extra) <= phase_index(alpha, t) <= alpha + 1e-12

    def test_prediction_with_log_factor(self):
        result = predict_power_tail(0.5, LogPowerSV(1.0, (1.0,)), 2)
        # L(y^(2/3))^(4/3) = ((2/3) log y)^(4/3)
        assert result.sv.exponents == pytest.approx((4.0 / 3.0,))


class TestTailAsymptotic:

    @pytest.mark.parametrize('index, expected', [
        (0.0, Regime.SLOW),
        (0.5, Regime.ALPHA01),
        (1.0, Regime.ALPHA1),
        (2.0, Regime.FINITE_MEAN),
    ])
    def test_regime_for_index(self, index, expected):
        assert regime_for_index(index) is expected

    def test_inconsistent_regime(self):
        with pytest.raises(ValidationError):
            TailAsymptotic(2.0, LogPowerSV(1.0), Regime.ALPHA01)

    def test_tail(self):
        tail = TailAsymptotic(2.0, LogPowerSV(3.0), Regime.FINITE_MEAN)
        assert tail.tail(10.0) == pytest.approx(0.03)
        assert tail.to_dict()['regime'] == 'finite_mean'

    def test_symmetric_tail(self):
        result = symmetric_tail(TailAsymptotic(1.0, LogPowerSV(1.0), Regime.FINITE_MEAN))
        assert result.index == 2.0
        assert result.constant == pytest.approx(0.5)


class TestDeclaredTail:

    def test_pareto(self):
        result = declared_tail(Pareto(2.0))
        assert (result.index, result.constant, result.regime) == (2.0, 1.0, Regime.FINITE_MEAN)

    def test_mu_alpha_beta(self):
        result = declared_tail(MuAlphaBeta(0.0, 1.0))
        assert result.index == 0.5
        assert result.constant == pytest.approx(2.0 / math.pi)

    def test_unknown(self):
        assert declared_tail(FreePoisson()) is None


class TestEstimation:

    def test_mu_0_1(self):
        estimate = estimate_tail_from_s(closed_form_handle('mu_alpha_beta(0,1)'))
        assert estimate.index == pytest.approx(0.5, abs=0.01)
        assert estimate.constant == pytest.approx(2.0 / math.pi, rel=0.02)
        assert estimate.regime is Regime.ALPHA01

    @pytest.mark.parametrize('beta', [0.5, 2.0])
    def test_mu_0_beta(self, beta):
        estimate = estimate_tail_from_s(closed_form_handle('mu_alpha_beta', (0.0, beta)))
        assert estimate.index == pytest.approx(1.0 / (1.0 + beta), abs=0.02)

    def test_left_tail_of_mu_1_0(self):
        estimate = estimate_left_tail_from_s(closed_form_handle('mu_alpha_beta(1,0)'))
        assert estimate.index == pytest.approx(0.5, abs=0.01)

    def test_grid_must_span_six_decades(self):
        with pytest.raises(ValidationError):
            estimate_tail_from_s(closed_form_handle('mu_alpha_beta(0,1)'), np.logspace(0, 4, 9))

    def test_finite_mean_mode_needs_finite_mean(self):
        with pytest.raises(RegimeMismatch):
            estimate_tail_from_s(closed_form_handle('mu_alpha_beta(0,1)'), mode='finite_mean')

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            estimate_tail_from_s(closed_form_handle('mu_alpha_beta(0,1)'), mode='fast')

    @pytest.mark.slow
    def test_phase_transition(self):
        estimate = estimate_tail_from_s(s_combine([(Pareto(0.5), 2)]), np.logspace(8, 16, 9))
        assert estimate.index == pytest.approx(1.0 / 3.0, abs=0.01)
        assert estimate.constant == pytest.approx(1.51005, rel=0.05)

    @pytest.mark.slow
    def test_critical_line_growth(self):
        handle = s_transform(Pareto(1.0))
        log_x = 200.0 * math.log(10.0)
        assert math.exp(-handle.log_value(-1e-200)) / log_x == pytest.approx(1.0, abs=0.05)

    @pytest.mark.slow
    def test_critical_line_square_is_pi_class(self):
        square = s_combine([(Pareto(1.0), 2)])
        fit = pi_class_test(lambda x: math.exp(-square.log_value(-1.0 / x)),
                            lambda x: 2.0 * math.log(x), [1e200])
        assert fit.constant == pytest.approx(1.0, abs=0.05)
