import numpy as np
import pytest
from numpy.testing import assert_allclose

from expspline.errbound2 import (
    IntervalBoundData,
    M_constant,
    green_eval,
    interp2_error_bound,
    mstar,
    omega_eval,
    omega_via_green,
)
from expspline.hatbasis import Partition, build_hat_basis

from oracles import mp_omega


class TestOmega:
    def test_symmetric_unit_example(self):
        # omega for (1,-1) on [0,1] at the midpoint: 1 - 2 sinh(1/2)/sinh(1)
        got = omega_eval(1.0, -1.0, 0.0, 1.0, 0.5)
        assert_allclose(got, 0.11318111602992609134, rtol=1e-13)

    def test_polynomial_case_is_parabola(self):
        ts = np.linspace(0.0, 1.0, 11)
        got = omega_eval(0.0, 0.0, 0.0, 1.0, ts)
        assert_allclose(got, 0.5 * ts * (1.0 - ts), rtol=1e-14, atol=1e-16)

    def test_boundary_values_exact_zero(self):
        for lam in ((0.7, 2.0), (-3.0, 1.0), (0.0, 5.0), (-2.0, -2.0)):
            assert omega_eval(*lam, 1.5, 2.75, 1.5) == 0.0
            assert omega_eval(*lam, 1.5, 2.75, 2.75) == 0.0

    def test_positive_inside(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            lam0, lam1 = np.sort(rng.uniform(-6.0, 6.0, 2))
            a = rng.uniform(-2.0, 2.0)
            b = a + rng.uniform(0.2, 2.0)
            ts = np.linspace(a, b, 41)[1:-1]
            assert np.all(omega_eval(lam0, lam1, a, b, ts) > 0.0)

    def test_against_boundary_solve_oracle(self):
        cases = [(1.0, -1.0, 0.0, 1.0), (2.0, 3.0, -1.0, 0.5),
                 (0.0, 4.0, 0.3, 1.9), (-2.0, -1.0, 0.0, 2.0),
                 (0.0, 0.0, -1.0, 1.0)]
        for lam0, lam1, a, b in cases:
            ts = np.linspace(a, b, 9)[1:-1]
            ref = [float(mp_omega(lam0, lam1, a, b, t)) for t in ts]
            assert_allclose(omega_eval(lam0, lam1, a, b, ts), ref,
                            rtol=1e-11, atol=1e-15)

    def test_differential_equation_finite_differences(self):
        # L omega = -1 checked with fourth order central stencils
        for lam0, lam1, a, b in [(1.0, -1.0, 0.0, 1.0), (0.5, 2.5, 0.0, 1.5),
                                 (-3.0, 0.0, 1.0, 2.2)]:
            span = b - a
            h = 1e-3 * span
            for t in np.linspace(a + 5 * h, b - 5 * h, 7):
                f = omega_eval(lam0, lam1, a, b,
                               np.array([t - 2 * h, t - h, t, t + h,
                                         t + 2 * h]))
                d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
                d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) \
                    / (12 * h * h)
                residual = d2 - (lam0 + lam1) * d1 + lam0 * lam1 * f[2]
                assert abs(residual + 1.0) < 1e-6

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            omega_eval(0.0, 0.0, 1.0, 0.0, 0.5)
        with pytest.raises(ValueError):
            omega_eval(0.0, 0.0, 0.0, 1.0, 2.0)


class TestGreen:
    def test_polynomial_diagonal_value(self):
        assert_allclose(green_eval(0.0, 0.0, 0.0, 1.0, 0.5, 0.5), -0.25,
                        rtol=1e-14)

    def test_nonpositive_everywhere(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            lam0, lam1 = np.sort(rng.uniform(-5.0, 5.0, 2))
            a, b = 0.0, rng.uniform(0.3, 2.0)
            ts = rng.uniform(a, b, 12)
            ss = rng.uniform(a, b, 12)
            assert np.all(green_eval(lam0, lam1, a, b, ts, ss) <= 0.0)

    def test_branches_agree_on_diagonal(self):
        lam0, lam1, a, b = -1.5, 2.5, 0.0, 1.3
        ts = np.linspace(a, b, 9)
        lower = green_eval(lam0, lam1, a, b, ts, ts)
        span = b - a
        from expspline.expcore import fundamental_eval
        upper = fundamental_eval((lam0, lam1), ts - a) * fundamental_eval(
            (-lam0, -lam1), ts - b) / fundamental_eval((lam0, lam1), span)
        assert_allclose(lower, upper, rtol=1e-12, atol=1e-15)

    def test_omega_is_integral_of_green(self):
        for lam0, lam1, a, b in [(1.0, -1.0, 0.0, 1.0), (0.5, 2.0, -1.0, 0.4),
                                 (0.0, 0.0, 0.0, 2.0)]:
            for t in np.linspace(a, b, 5):
                ref = omega_via_green(lam0, lam1, a, b, t)
                assert_allclose(omega_eval(lam0, lam1, a, b, t), ref,
                                rtol=1e-9, atol=1e-12)

    def test_straddling_pair_diagonal_dominates_omega(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            lam0 = -rng.uniform(0.0, 5.0)
            lam1 = rng.uniform(0.0, 5.0)
            a = rng.uniform(-1.0, 1.0)
            b = a + rng.uniform(0.2, 2.0)
            ts = np.linspace(a, b, 17)[1:-1]
            omega = omega_eval(lam0, lam1, a, b, ts)
            diag = (b - a) * np.abs(green_eval(lam0, lam1, a, b, ts, ts))
            assert np.all(omega <= diag * (1.0 + 1e-12))

    def test_scaled_diagonal_quarter_bound(self):
        rng = np.random.default_rng(18)
        for _ in range(50):
            lam0, lam1 = np.sort(rng.uniform(-8.0, 8.0, 2))
            a = rng.uniform(-1.0, 1.0)
            b = a + rng.uniform(0.1, 2.0)
            ts = np.linspace(a, b, 33)
            diag = (b - a) * np.abs(green_eval(lam0, lam1, a, b, ts, ts))
            assert np.max(diag) <= 0.25 * (b - a) ** 2 * (1.0 + 1e-12)


class TestMstar:
    def test_value_at_zero(self):
        assert mstar(0.0) == 0.125

    def test_frozen_values(self):
        assert_allclose(mstar(2.0), 0.087986431584028650106, rtol=1e-14)
        assert_allclose(mstar(0.01), 0.12499869792990437971, rtol=1e-14)

    def test_even(self):
        assert mstar(-3.7) == mstar(3.7)

    def test_series_branch_continuous(self):
        left = mstar(1e-4 * (1.0 - 1e-9))
        right = mstar(1e-4 * (1.0 + 1e-9))
        assert_allclose(left, right, rtol=1e-12)

    def test_large_argument_tail(self):
        assert_allclose(mstar(1e4), 1e-8, rtol=1e-12)
        assert mstar(2000.0) > 0.0

    def test_bounded_by_eighth(self):
        xs = np.linspace(0.0, 50.0, 501)
        vals = np.array([mstar(x) for x in xs])
        assert np.all(vals <= 0.125)
        assert np.all(vals > 0.0)


class TestMConstant:
    def test_symmetric_matches_closed_form(self):
        for xi_span in (0.01, 0.5, 2.0, 10.0):
            span = 0.7
            xi = xi_span / span
            data = M_constant(-xi, xi, 0.0, span)
            assert_allclose(data.value, span * span * mstar(xi_span),
                            rtol=1e-10)
            assert abs(data.t_max - 0.5 * span) < 1e-6 * span

    def test_polynomial_value(self):
        data = M_constant(0.0, 0.0, 0.0, 1.0)
        assert_allclose(data.value, 0.125, rtol=1e-12)
        assert_allclose(data.t_max, 0.5, atol=1e-7)

    def test_translation_invariance(self):
        base = M_constant(1.0, 2.0, 0.0, 0.3)
        moved = M_constant(1.0, 2.0, 5.0, 5.3)
        assert_allclose(moved.value, base.value, rtol=1e-13)
        assert_allclose(moved.t_max - 5.0, base.t_max, atol=1e-10)

    def test_quarter_square_bound_for_straddling_pairs(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            lam0 = -rng.uniform(0.0, 4.0)
            lam1 = rng.uniform(0.0, 4.0)
            span = rng.uniform(0.1, 2.0)
            data = M_constant(lam0, lam1, 0.0, span)
            assert data.value <= 0.25 * span * span * (1.0 + 1e-10)
            assert 0.0 < data.t_max < span

    def test_matches_direct_omega_maximum(self):
        data = M_constant(-1.0, 3.0, 0.0, 1.2)
        ts = np.linspace(0.0, 1.2, 20001)[1:-1]
        brute = np.max(omega_eval(-1.0, 3.0, 0.0, 1.2, ts))
        assert_allclose(data.value, brute, rtol=1e-7)
        assert data.value >= brute - 1e-12

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            M_constant(0.0, 1.0, 2.0, 2.0)

    def test_returns_dataclass(self):
        data = M_constant(0.0, 0.0, 0.0, 1.0)
        assert isinstance(data, IntervalBoundData)
        assert (data.a, data.b) == (0.0, 1.0)


class TestInterp2ErrorBound:
    def test_zero_operator_gives_zero(self):
        basis = build_hat_basis(Partition((0.0, 0.5, 1.0)), (0.0, 0.0))
        assert interp2_error_bound(basis, 0.0) == 0.0

    def test_polynomial_uniform(self):
        basis = build_hat_basis(Partition((0.0, 0.5, 1.0)), (0.0, 0.0))
        # M per interval is h^2/8 with h = 1/2
        assert_allclose(interp2_error_bound(basis, 1.0), 0.25 * 0.125,
                        rtol=1e-10)

    def test_per_interval_products(self):
        basis = build_hat_basis(Partition((0.0, 0.5, 1.5)), (0.0, 0.0))
        got = interp2_error_bound(basis, [8.0, 0.1])
        # max(0.5^2/8 * 8, 1^2/8 * 0.1) = max(1/4, 1/80)
        assert_allclose(got, 0.25, rtol=1e-10)

    def test_arity_validation(self):
        basis = build_hat_basis(Partition((0.0, 0.5, 1.0)), (0.0, 0.0))
        with pytest.raises(ValueError):
            interp2_error_bound(basis, [1.0])
        with pytest.raises(ValueError):
            interp2_error_bound(basis, [-1.0, 1.0])
