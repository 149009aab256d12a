import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from expspline.expcore import (
    ExpPolynomial,
    as_frequency_vector,
    convolution_check,
    count_sign_changes,
    fundamental_derivative,
    fundamental_eval,
    fundamental_expoly,
    integrate_fundamental,
    operator_apply,
    transform,
    weighted_cross_integral,
    weighted_square_integrals,
)
from expspline.quadrature import integrate

from oracles import mp_phi


class TestFundamentalEval:
    def test_polynomial_pair_is_identity(self):
        assert fundamental_eval((0.0, 0.0), 2.5) == 2.5

    def test_symmetric_pair_is_sinh(self):
        assert_allclose(fundamental_eval((1.0, -1.0), 1.0), math.sinh(1.0),
                        rtol=1e-14)

    def test_confluent_pair(self):
        # double frequency lambda gives t*exp(lambda*t)
        assert_allclose(fundamental_eval((1.0, 1.0), 1.0), math.e, rtol=1e-14)
        assert_allclose(fundamental_eval((0.3, 0.3, 0.3), 4.0),
                        8.0 * math.exp(1.2), rtol=1e-13)

    def test_four_frequency_closed_forms(self):
        assert_allclose(fundamental_eval((2.0, -2.0, 0.0, 0.0), 1.0),
                        (math.sinh(2.0) - 2.0) / 8.0, rtol=1e-13)
        assert_allclose(fundamental_eval((0.0, 1.0, 0.0, -1.0), 1.3),
                        math.sinh(1.3) - 1.3, rtol=1e-12)
        t = 0.9
        assert_allclose(fundamental_eval((1.0, -1.0, 1.0, -1.0), t),
                        0.5 * (t * math.cosh(t) - math.sinh(t)), rtol=1e-12)
        assert_allclose(fundamental_eval((0.0, 0.0, 0.0, 0.0), 2.0),
                        8.0 / 6.0, rtol=1e-14)

    def test_value_at_zero(self):
        assert fundamental_eval((3.0,), 0.0) == 1.0
        assert fundamental_eval((3.0, -1.0), 0.0) == 0.0
        assert fundamental_eval((3.0, -1.0, 0.0, 2.0), 0.0) == 0.0

    def test_against_divided_difference_oracle(self):
        cases = [
            ((1.0, 1.0 + 1e-13), 1.0),
            ((5.0, 4.999999, -3.0, 0.0), 1.5),
            ((-20.0, 20.0, 0.0, -1.0), 2.0),
            ((3.0, 2.0, 1.0, 0.5, -0.5, -1.0, -2.0, -3.0), 1.7),
            ((2.0, -2.0, 0.0, 0.0), 1e-6),
            ((2.0, -2.0, 0.0, 0.0), 1e-12),
            ((-5.0, -5.0, -5.0, 2.0), 3.0),
            ((0.25, 0.5, 0.75), 0.1),
        ]
        for freqs, t in cases:
            ref = float(mp_phi(freqs, t))
            assert_allclose(fundamental_eval(freqs, t), ref, rtol=5e-12,
                            err_msg=f"freqs={freqs} t={t}")

    def test_near_confluent_matches_exact_nodes(self):
        # frozen from the 50-digit divided difference over (1, 1+1e-12)
        assert_allclose(fundamental_eval((1.0, 1.0 + 1e-12), 1.0),
                        2.7182818284604043763, rtol=1e-13)

    def test_positive_for_positive_argument(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            k = rng.integers(1, 7)
            freqs = rng.uniform(-5.0, 5.0, k)
            ts = rng.uniform(1e-3, 2.0, 8)
            assert np.all(fundamental_eval(freqs, ts) > 0.0)

    def test_multiset_symmetry_is_exact(self):
        freqs = (1.5, -0.25, 3.0, 0.0)
        perm = (3.0, 1.5, 0.0, -0.25)
        for t in (-1.2, 0.37, 2.0):
            assert fundamental_eval(freqs, t) == fundamental_eval(perm, t)

    def test_reflection_parity(self):
        freqs = (0.5, -2.0, 1.0)
        for t in (0.3, 1.7):
            lhs = fundamental_eval(freqs, -t)
            rhs = (-1.0) ** 2 * fundamental_eval((-0.5, 2.0, -1.0), t)
            assert_allclose(lhs, rhs, rtol=1e-13)

    def test_array_shape_preserved(self):
        ts = np.array([[0.0, 0.5], [-1.0, 2.0]])
        out = fundamental_eval((1.0, -1.0), ts)
        assert out.shape == ts.shape
        assert out[0, 0] == 0.0
        assert_allclose(out[1, 0], -math.sinh(1.0), rtol=1e-14)

    def test_overflow_raises(self):
        with pytest.raises(OverflowError):
            fundamental_eval((300.0,), 3.0)
        with pytest.raises(OverflowError):
            fundamental_eval((200.0, 100.0), 10.0)
        with pytest.raises(OverflowError):
            fundamental_eval((-300.0, 300.0, 0.0), 5.0)

    def test_hard_underflow_returns_zero(self):
        assert fundamental_eval((-200.0, -200.0), 10.0) == 0.0

    def test_invalid_input(self):
        with pytest.raises(ValueError):
            fundamental_eval((np.nan, 1.0), 1.0)
        with pytest.raises(ValueError):
            fundamental_eval((1.0,), np.inf)
        with pytest.raises(ValueError):
            as_frequency_vector(())


class TestDerivative:
    def test_normalization_at_zero(self):
        # all derivatives below order N vanish at 0 and order N gives 1
        freqs = (2.0, -1.0, 0.5, 3.0)
        for order in range(3):
            assert fundamental_derivative(freqs, 0.0, order) == 0.0
        assert fundamental_derivative(freqs, 0.0, 3) == 1.0

    def test_pair_first_derivative_at_zero_exact(self):
        assert fundamental_derivative((2.0, 5.0), 0.0, 1) == 1.0

    def test_second_derivative_closed_form(self):
        # Phi_(2,3) = e^{3t} - e^{2t}; second derivative at 0.7 frozen
        assert_allclose(fundamental_derivative((2.0, 3.0), 0.7, 2),
                        57.274729345730152312, rtol=1e-13)

    def test_lowering_identity(self):
        freqs = (-1.0, 0.5, 2.0)
        for t in (0.2, 1.1, -0.7):
            lhs = fundamental_derivative(freqs, t, 1)
            rhs = 2.0 * fundamental_eval(freqs, t) \
                + fundamental_eval(freqs[:2], t)
            assert_allclose(lhs, rhs, rtol=1e-13)

    def test_against_finite_differences(self):
        freqs = (1.0, -2.0, 0.3, 0.0)
        h = 1e-5
        for t in (0.4, 1.3):
            fd = (fundamental_eval(freqs, t + h)
                  - fundamental_eval(freqs, t - h)) / (2.0 * h)
            assert_allclose(fundamental_derivative(freqs, t, 1), fd,
                            rtol=1e-8)

    def test_order_zero_is_value(self):
        assert fundamental_derivative((1.0, 2.0), 0.8, 0) == \
            fundamental_eval((1.0, 2.0), 0.8)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            fundamental_derivative((1.0,), 0.5, -1)


class TestIntegralAndTransforms:
    def test_polynomial_integral(self):
        assert_allclose(integrate_fundamental((0.0, 0.0), 1.0), 0.5,
                        rtol=1e-14)

    def test_integral_matches_quadrature(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            freqs = tuple(rng.uniform(-3.0, 3.0, 2))
            h = rng.uniform(0.1, 2.0)
            ref, _ = integrate(lambda ts: fundamental_eval(freqs, ts), 0.0, h)
            assert_allclose(integrate_fundamental(freqs, h), ref, rtol=1e-9)

    def test_transform_identities_pointwise(self):
        freqs = (0.5, -1.5, 2.0)
        ts = np.linspace(-1.5, 1.5, 11)
        for kind, value in (("shift", 0.7), ("reflect", None), ("scale", 1.3),
                            ("scale", -0.6)):
            rule = transform(freqs, kind, value)
            lhs = fundamental_eval(rule.freqs, ts)
            rhs = rule.factor(ts) * fundamental_eval(
                freqs, rule.arg_scale * ts)
            assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-15,
                            err_msg=f"kind={kind}")

    def test_transform_validation(self):
        with pytest.raises(ValueError):
            transform((1.0,), "scale", 0.0)
        with pytest.raises(ValueError):
            transform((1.0,), "shear", 1.0)
        with pytest.raises(ValueError):
            transform((1.0,), "shift")


class TestOperatorApply:
    def test_quadruple_on_sine(self):
        xi = 1.7
        ts = np.linspace(0.0, math.pi, 9)
        derivs = [np.sin(ts), np.cos(ts), -np.sin(ts), -np.cos(ts),
                  np.sin(ts)]
        got = operator_apply((xi, xi, -xi, -xi), derivs)
        assert_allclose(got, (1.0 + xi * xi) ** 2 * np.sin(ts), rtol=1e-12,
                        atol=1e-12)

    def test_mixed_quadruple_on_cubic(self):
        rho = 2.5
        ts = np.linspace(-1.0, 1.0, 7)
        derivs = [ts ** 3, 3.0 * ts ** 2, 6.0 * ts, 6.0 * np.ones_like(ts),
                  np.zeros_like(ts)]
        got = operator_apply((0.0, 0.0, rho, -rho), derivs)
        assert_allclose(got, -6.0 * rho * rho * ts, rtol=1e-12, atol=1e-12)

    def test_annihilates_own_kernel(self):
        freqs = (1.0, -0.5, 2.0)
        ts = np.linspace(0.1, 1.5, 6)
        derivs = [fundamental_derivative(freqs, ts, k) for k in range(4)]
        got = operator_apply(freqs, derivs)
        assert np.max(np.abs(got)) < 1e-10

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError):
            operator_apply((1.0, 2.0), [1.0, 2.0])


class TestWeightedIntegrals:
    def test_polynomial_values_exact(self):
        i_left, i_right, i_lin_left, i_lin_right = \
            weighted_square_integrals(0.0, 0.0, 0.0, 1.0)
        assert_allclose(i_left, 1.0 / 3.0, rtol=1e-13)
        assert_allclose(i_right, 1.0 / 3.0, rtol=1e-13)
        assert_allclose(i_lin_left, 0.5, rtol=1e-13)
        assert_allclose(i_lin_right, -0.5, rtol=1e-13)
        assert_allclose(weighted_cross_integral(0.0, 0.0, 0.0, 1.0),
                        -1.0 / 6.0, rtol=1e-13)

    def test_frozen_high_precision_values(self):
        got = weighted_square_integrals(0.5, 2.0, 1.0, 0.8)
        ref = (1.7202816791997870047, 0.058070444991091012653,
               1.1962094522596683777, -0.24151052320352100494)
        assert_allclose(got, ref, rtol=1e-12)
        assert_allclose(weighted_cross_integral(0.5, 2.0, 1.0, 0.8),
                        -0.1598776255578924445, rtol=1e-12)

    def test_against_quadrature(self):
        rng = np.random.default_rng(11)
        for _ in range(12):
            lam0, lam1 = rng.uniform(-4.0, 4.0, 2)
            p = rng.uniform(-2.0, 2.0)
            h = rng.uniform(0.1, 2.0)
            phi = lambda ts: fundamental_eval((lam0, lam1), ts)
            w = lambda ts: np.exp(p * ts)
            refs = (
                integrate(lambda ts: phi(ts) ** 2 * w(ts), 0.0, h)[0],
                integrate(lambda ts: phi(ts - h) ** 2 * w(ts), 0.0, h)[0],
                integrate(lambda ts: phi(ts) * w(ts), 0.0, h)[0],
                integrate(lambda ts: phi(ts - h) * w(ts), 0.0, h)[0],
            )
            got = weighted_square_integrals(lam0, lam1, p, h)
            assert_allclose(got, refs, rtol=1e-9, atol=1e-13,
                            err_msg=f"{lam0},{lam1},{p},{h}")
            cross_ref = integrate(
                lambda ts: phi(ts - h) * phi(ts) * w(ts), 0.0, h)[0]
            assert_allclose(weighted_cross_integral(lam0, lam1, p, h),
                            cross_ref, rtol=1e-9, atol=1e-13)

    def test_signs_for_positive_interval(self):
        i_left, i_right, _, i_lin_right = \
            weighted_square_integrals(-1.0, 2.0, 0.5, 1.3)
        assert i_left > 0.0 and i_right > 0.0
        assert i_lin_right < 0.0
        assert weighted_cross_integral(-1.0, 2.0, 0.5, 1.3) < 0.0

    def test_zero_length(self):
        assert weighted_square_integrals(1.0, 2.0, 0.0, 0.0) == \
            (0.0, 0.0, 0.0, 0.0)
        assert weighted_cross_integral(1.0, 2.0, 0.0, 0.0) == 0.0


class TestConvolution:
    def test_unit_example(self):
        lhs, rhs = convolution_check((1.0, -1.0), (0.0,), 1.5)
        assert_allclose(rhs, 1.3524096152432473258, rtol=1e-13)
        assert_allclose(lhs, rhs, rtol=1e-10)

    def test_polynomial_case(self):
        lhs, rhs = convolution_check((0.0,), (0.0,), 2.0)
        assert_allclose(rhs, 2.0, rtol=1e-14)
        assert_allclose(lhs, rhs, rtol=1e-12)

    def test_requires_positive_argument(self):
        with pytest.raises(ValueError):
            convolution_check((1.0,), (2.0,), 0.0)


class TestExpPolynomial:
    def test_monomial_representation(self):
        poly = fundamental_expoly((0.0, 0.0, 0.0, 0.0))
        assert poly.terms == {(0.0, 3): pytest.approx(1.0 / 6.0, rel=1e-15)}

    def test_matches_fundamental_on_grid(self):
        for freqs in ((1.0, -1.0, 1.0, -1.0), (0.5, 2.0), (0.0, 0.7, -0.3),
                      (2.0, -2.0, 0.0, 0.0)):
            poly = fundamental_expoly(freqs)
            ts = np.linspace(-2.0, 2.0, 17)
            assert_allclose(poly(ts), fundamental_eval(freqs, ts),
                            rtol=1e-11, atol=1e-13, err_msg=str(freqs))

    def test_cluster_merging_near_confluent(self):
        poly = fundamental_expoly((1.0, 1.0 + 1e-12))
        got = poly(1.0)
        assert_allclose(got, 2.7182818284604043763, rtol=1e-10)

    def test_derivative_matches(self):
        freqs = (0.4, -1.1, 2.2)
        poly = fundamental_expoly(freqs).derivative()
        ts = np.linspace(-1.0, 1.5, 9)
        assert_allclose(poly(ts), fundamental_derivative(freqs, ts, 1),
                        rtol=1e-11, atol=1e-13)

    def test_addition_and_scaling(self):
        a = ExpPolynomial({(0.0, 1): 2.0})
        b = ExpPolynomial({(0.0, 1): -2.0, (1.0, 0): 3.0})
        c = a + b.scaled(2.0)
        assert_allclose(c(1.0), 2.0 - 4.0 + 6.0 * math.e, rtol=1e-14)


class TestSignChanges:
    def test_parabola(self):
        poly = ExpPolynomial({(0.0, 2): 1.0, (0.0, 0): -1.0})
        assert count_sign_changes(poly, -2.0, 2.0, 512) == 2

    def test_exponential_minus_one(self):
        poly = ExpPolynomial({(1.0, 0): 1.0, (0.0, 0): -1.0})
        assert count_sign_changes(poly, -1.0, 1.0, 512) == 1

    def test_fundamental_changes_bounded_by_degree(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            k = rng.integers(2, 7)
            freqs = tuple(rng.uniform(-3.0, 3.0, k))
            poly = fundamental_expoly(freqs)
            assert count_sign_changes(poly, -3.0, 3.0, 4096) <= k - 1

    def test_validation(self):
        poly = ExpPolynomial({(0.0, 0): 1.0})
        with pytest.raises(ValueError):
            count_sign_changes(poly, 1.0, 0.0, 16)
        with pytest.raises(ValueError):
            count_sign_changes(poly, 0.0, 1.0, 1)
