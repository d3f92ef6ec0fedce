import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize, special

from stransform.exceptions import (
    AtomAtZero, OrderTooHigh, OutOfRange, UnknownTag, ValidationError,
)
from stransform.measures import (
    Atoms, DensityGrid, FreePoisson, MuAlphaBeta, Pareto, PointMass, pushforward_inverse,
)
from stransform.transforms import (
    ClosedFormSTransform, HatSTransform, NumericSTransform, SymmetricValue,
    chi_eval, closed_form_handle, closed_form_s, dump_csv, hat_transform,
    jet_to_log, log_to_jet, parse_tag, psi_deriv, psi_eval, s_deriv, s_eval,
    s_transform,
)


def catalan_psi(z, terms=200):
    """psi of the free Poisson law from its Catalan moments, valid for |z| < 1/4"""
    n = np.arange(1, terms + 1)
    catalan = special.comb(2 * n, n, exact=False) / (n + 1)
    return float(np.sum(catalan * z ** n))


class TestPsi:

    def test_point_mass(self):
        assert psi_eval(PointMass(2.0), -1.0) == pytest.approx(-2.0 / 3.0, rel=1e-14)

    def test_first_derivative_of_point_mass(self):
        # d/dz of a z / (1 - a z) is a / (1 - a z)^2
        assert psi_deriv(PointMass(2.0), -1.0, 1) == pytest.approx(2.0 / 9.0, rel=1e-14)

    def test_free_poisson_against_catalan_series(self, free_poisson):
        for z in (-0.01, -0.05, -0.1):
            assert psi_eval(free_poisson, z) == pytest.approx(catalan_psi(z), rel=1e-9)

    def test_positive_argument_rejected(self, free_poisson):
        with pytest.raises(OutOfRange):
            psi_eval(free_poisson, 0.5)

    def test_derivative_order_limit(self, free_poisson):
        with pytest.raises(OrderTooHigh):
            psi_deriv(free_poisson, -1.0, 5)

    def test_non_probability_rejected(self):
        with pytest.raises(ValidationError):
            psi_eval(Atoms(((1.0, 2.0),)), -1.0)


class TestPsiOfPareto:
    # closed forms from the antiderivatives of 2 t^-3 (t / (1 + t))^k / (1 + t)

    def test_value(self, pareto2):
        assert psi_eval(pareto2, -1.0) == pytest.approx(-2.0 * (1.0 - math.log(2.0)), rel=1e-9)

    def test_vanishes_at_origin(self, pareto2):
        assert -1e-6 < psi_eval(pareto2, -1e-8) < 0

    def test_first_derivative(self, pareto2):
        assert psi_deriv(pareto2, -1.0, 1) == pytest.approx(3.0 - 4.0 * math.log(2.0), rel=1e-9)

    def test_second_derivative(self, pareto2):
        assert psi_deriv(pareto2, -1.0, 2) == pytest.approx(4.0 * math.log(2.0) - 2.5, rel=1e-9)

    def test_first_derivative_increases_towards_zero(self, pareto2):
        assert psi_deriv(pareto2, -0.5, 1) > psi_deriv(pareto2, -1.0, 1)

    @pytest.mark.parametrize('k', [1, 2, 3, 4])
    def test_derivatives_are_finite_near_zero(self, k):
        value = psi_deriv(Pareto(1.5), -1e-6, k)
        assert math.isfinite(value) and value > 0


@pytest.mark.parametrize('mu', [Pareto(2.0), Pareto(0.5), FreePoisson()], ids=lambda m: m.family)
@pytest.mark.parametrize('z', [-0.1, -1.0, -10.0])
def test_chi_inverts_psi(mu, z):
    handle = NumericSTransform(mu)
    assert handle.chi(handle.psi(z)) == pytest.approx(z, abs=1e-9)


class TestSTransform:

    @pytest.mark.parametrize('w', np.linspace(-0.9, -0.1, 9))
    def test_free_poisson_closed_form(self, free_poisson, w):
        assert s_eval(free_poisson, w) == pytest.approx(1.0 / (1.0 + w), abs=1e-6)

    def test_free_poisson_against_catalan_inversion(self, free_poisson):
        # independent route: invert the Catalan series near the origin
        w = -0.1
        z = optimize.brentq(lambda z: catalan_psi(z) - w, -0.2, -1e-6, xtol=1e-15)
        assert s_eval(free_poisson, w) == pytest.approx((1.0 + w) / w * z, rel=1e-8)

    @pytest.mark.parametrize('a', [0.5, 2.0, 7.0])
    def test_point_mass(self, a):
        assert s_eval(PointMass(a), -0.5) == pytest.approx(1.0 / a, abs=1e-12)

    def test_atom_at_zero_shrinks_domain(self):
        handle = s_transform(Atoms(((0.0, 0.5), (1.0, 0.5))))
        assert handle.lower == pytest.approx(-0.5)
        assert handle.value(-0.25) == pytest.approx(3.0, rel=1e-9)
        with pytest.raises(OutOfRange):
            handle.value(-0.6)

    @pytest.mark.parametrize('w', [0.0, 0.1, -1.0, -1.5])
    def test_out_of_range(self, free_poisson, w):
        with pytest.raises(OutOfRange):
            s_eval(free_poisson, w)

    def test_derivatives_of_free_poisson(self, free_poisson):
        handle = NumericSTransform(free_poisson)
        jet = handle.jet(-0.5, 3)
        assert jet == pytest.approx([2.0, -4.0, 16.0, -96.0], rel=1e-5)

    def test_derivative_order_limit(self, free_poisson):
        with pytest.raises(OrderTooHigh):
            s_deriv(free_poisson, -0.5, 4)

    @pytest.mark.parametrize('mu', [Pareto(2.0), Pareto(0.5), Pareto(1.5)], ids=lambda m: f'pareto({m.alpha})')
    def test_derivatives_of_heavy_tails_against_differences(self, mu):
        handle = NumericSTransform(mu)
        w, h = -0.5, 1e-4
        jet = handle.jet(w, 3)
        for p in (1, 2, 3):
            upper = handle.jet(w + h, p - 1)[p - 1]
            lower = handle.jet(w - h, p - 1)[p - 1]
            assert jet[p] == pytest.approx((upper - lower) / (2 * h), rel=1e-5, abs=1e-8)

    def test_derivative_near_zero_without_second_moment(self):
        slope = s_deriv(Pareto(1.5), -1e-10, 1)
        assert math.isfinite(slope) and slope < 0
        assert abs(slope) > abs(s_deriv(Pareto(1.5), -1e-4, 1))

    def test_power_tailed_density_grid(self):
        nodes = np.geomspace(1.0, 10.0, 200)
        mu = DensityGrid(tuple(nodes), tuple(2.0 * nodes ** -3.0), 'power', 3.0)
        handle = NumericSTransform(mu)
        assert math.isfinite(handle.derivative(-0.5, 1))
        assert handle.derivative(-0.5, 1) < 0

    @pytest.mark.parametrize('w', [-0.9, -0.5, -0.1])
    def test_reciprocal_law(self, pareto2, w):
        hat = pushforward_inverse(pareto2)
        assert s_eval(hat, w) == pytest.approx(1.0 / s_eval(pareto2, -1.0 - w), rel=1e-8)

    def test_mu_alpha_beta_has_closed_form_handle(self):
        assert isinstance(s_transform(MuAlphaBeta(0.0, 1.0)), ClosedFormSTransform)

    def test_handle_passes_through(self, free_poisson_handle):
        assert s_transform(free_poisson_handle) is free_poisson_handle

    @given(st.floats(-0.99, -0.01), st.floats(-0.99, -0.01))
    def test_range_between_reciprocal_moments(self, w1, w2):
        handle = NumericSTransform(Atoms(((1.0, 0.5), (2.0, 0.5))))
        lo, hi = sorted((w1, w2))
        s_lo, s_hi = handle.value(lo), handle.value(hi)
        assert 1.0 / 1.5 < s_hi <= s_lo * (1 + 1e-10)
        assert s_lo < 0.75


def test_chi_eval_matches_free_poisson():
    # chi(w) = w S(w) / (1 + w) = w / (1 + w)^2
    assert chi_eval(FreePoisson(), -0.5) == pytest.approx(-2.0, rel=1e-9)


class TestJets:

    def test_log_jet_roundtrip(self):
        jet = [2.0, -4.0, 16.0, -96.0]
        assert log_to_jet(jet_to_log(jet)) == pytest.approx(jet)

    def test_log_jet_of_exponential(self):
        # S = exp(3 w): log S = 3 w
        w = -0.2
        jet = [math.exp(3 * w) * 3 ** k for k in range(4)]
        assert jet_to_log(jet) == pytest.approx([3 * w, 3.0, 0.0, 0.0], abs=1e-12)


class TestClosedForms:

    @pytest.mark.parametrize('tag, w, expected', [
        ('point_mass(4)', -0.3, 0.25),
        ('free_poisson', -0.5, 2.0),
        ('mu_alpha_beta(0,1)', -0.25, 0.25),
        ('mu_alpha_beta(1,0)', -0.5, 2.0),
        ('mu_alpha_beta(2,0.5)', -0.75, math.sqrt(0.75) / 0.0625),
    ])
    def test_values(self, tag, w, expected):
        assert closed_form_s(tag, w) == pytest.approx(expected, rel=1e-14)

    def test_params_argument(self):
        assert closed_form_s('mu_alpha_beta', -0.25, (0.0, 1.0)) == pytest.approx(0.25)

    def test_symmetric_bernoulli_is_imaginary(self):
        value = closed_form_s('symmetric_bernoulli', -0.5)
        assert isinstance(value, SymmetricValue)
        assert value.imaginary
        assert float(value) == pytest.approx(1.0)

    def test_derivatives(self):
        handle = closed_form_handle('mu_alpha_beta(1,1)')
        w = -0.5
        # S = -w / (1 + w), S' = -1 / (1 + w)^2
        assert handle.derivative(w, 1) == pytest.approx(-4.0)

    def test_moments(self):
        handle = closed_form_handle('mu_alpha_beta(0,1)')
        assert math.isinf(handle.m1)
        assert handle.m_minus1 == 1.0

    @pytest.mark.parametrize('tag', ['gamma(1)', 'point_mass', 'mu_alpha_beta(1)', 'free_poisson(x)', 42])
    def test_unknown_tags(self, tag):
        with pytest.raises(UnknownTag):
            parse_tag(tag)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(-0.99, -0.01), st.floats(-0.99, -0.01))
    def test_mu_alpha_beta_is_nonincreasing(self, alpha, beta, w1, w2):
        lo, hi = sorted((w1, w2))
        handle = ClosedFormSTransform('mu_alpha_beta', (alpha, beta))
        assert handle.value(hi) <= handle.value(lo) * (1 + 1e-12)


class TestHat:

    def test_free_poisson_hat_is_mu_0_1(self, free_poisson_handle):
        hat = hat_transform(free_poisson_handle)
        assert isinstance(hat, HatSTransform)
        assert hat.value(-0.3) == pytest.approx(0.3)
        assert hat.derivative(-0.3, 1) == pytest.approx(-1.0)
        assert hat.derivative(-0.3, 2) == pytest.approx(0.0, abs=1e-12)

    def test_hat_swaps_moments(self, free_poisson_handle):
        hat = hat_transform(free_poisson_handle)
        assert hat.m1 == free_poisson_handle.m_minus1
        assert hat.m_minus1 == free_poisson_handle.m1

    def test_double_hat(self, free_poisson_handle):
        assert hat_transform(hat_transform(free_poisson_handle)) is free_poisson_handle

    def test_needs_no_atom_at_zero(self):
        with pytest.raises(AtomAtZero):
            hat_transform(Atoms(((0.0, 0.5), (1.0, 0.5))))


def test_dump_csv(free_poisson_handle):
    stream = io.StringIO()
    dump_csv(free_poisson_handle, [-0.5, -0.75], stream)
    assert stream.getvalue() == 'w,S\n-0.5,2\n-0.75,4\n'
