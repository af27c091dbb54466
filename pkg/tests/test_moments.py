"""Exact Wiener-measure moments of kernel-weighted iterated integrals."""

import numpy as np
import pytest

from svcubature.kernels import const_kernel, power_kernel
from svcubature.moments import (
    IteratedIntegralSpec,
    KernelFactor,
    beta_integral,
    moment_targets_1d_multi_n3,
    moment_targets_1d_oneperiod_n3,
    moment_targets_1d_oneperiod_n5,
    moment_targets_2d_oneperiod_n5,
    wiener_expectation,
)


def two_leg_spec(kernel, word=(1, 1), horizon=1.0, monomials=()):
    """Both legs kernel-weighted against the interval end point."""
    return IteratedIntegralSpec(
        word=word,
        factors=(KernelFactor(kernel, 0, 1), KernelFactor(kernel, 0, 2)),
        monomials=monomials,
        interval=(0.0, horizon),
    )


class TestSecondOrder:
    def test_double_power_kernel_integral(self):
        # ordered double integral with both kernels anchored at the end
        # point: value T^{2H} / (4H)
        H, T = 1.5, 1.3
        val = wiener_expectation(two_leg_spec(power_kernel(H), horizon=T))
        assert val.value == pytest.approx(T ** (2 * H) / (4 * H), rel=1e-9)

    def test_chained_kernel_anchoring_vanishes(self):
        # anchoring the inner kernel at the outer leg gives the bracket term
        # (1/2) int K(T,t) K(t,t) dt, which vanishes for a power-law kernel
        H, T = 1.5, 1.0
        spec = IteratedIntegralSpec(
            word=(1, 1),
            factors=(
                KernelFactor(power_kernel(H), 0, 1),
                KernelFactor(power_kernel(H), 1, 2),
            ),
            interval=(0.0, T),
        )
        assert wiener_expectation(spec).value == pytest.approx(0.0, abs=1e-12)

    def test_mixed_drivers_with_correlation(self):
        H, T, rho = 1.5, 0.7, 0.3
        corr = np.array([[1.0, rho], [rho, 1.0]])
        val = wiener_expectation(
            two_leg_spec(power_kernel(H), word=(1, 2), horizon=T), corr=corr
        )
        assert val.value == pytest.approx(rho * T ** (2 * H) / (4 * H), rel=1e-9)

    def test_independent_drivers_vanish(self):
        H = 1.5
        val = wiener_expectation(
            two_leg_spec(power_kernel(H), word=(1, 2)), corr=np.eye(2)
        )
        assert val.value == 0.0


class TestParity:
    def test_odd_driver_count_vanishes(self):
        spec = IteratedIntegralSpec(
            word=(1, 0, 1, 1),
            factors=(KernelFactor(power_kernel(1.5), 0, 1),),
        )
        assert wiener_expectation(spec).value == 0.0

    def test_single_leg_vanishes(self):
        spec = IteratedIntegralSpec(
            word=(1,), factors=(KernelFactor(const_kernel(), 0, 1),)
        )
        assert wiener_expectation(spec).value == 0.0


class TestBetaIntegral:
    def test_matches_quadrature(self):
        from scipy.integrate import quad

        a, b = 2.0, 1.5
        val, _ = quad(lambda t: (1 - t) ** (a - 1) * t ** (b - 1), 0, 1)
        assert beta_integral(a, b) == pytest.approx(val, rel=1e-10)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            beta_integral(0.0, 1.0)


class TestMonteCarloOracle:
    """Simulated Stratonovich integrals agree with the exact moments."""

    @pytest.mark.slow
    def test_time_weighted_cross_moment_mc(self):
        # E[ int_0^T (T-t1) t2 dB dB ] with a single driver equals the
        # bracket term (1/2) int (T-t) t dt; simulate with a midpoint
        # (Stratonovich) discretization of the inner integral
        rng = np.random.default_rng(7)
        T, n, m = 1.0, 400, 200_000
        dt = T / n
        tm = (np.arange(n) + 0.5) * dt
        dB = rng.standard_normal((m, n)) * np.sqrt(dt)
        inner = np.concatenate(
            [np.zeros((m, 1)), np.cumsum(tm * dB, axis=1)], axis=1
        )
        # midpoint (Stratonovich) evaluation of the inner integral
        outer = ((T - tm) * 0.5 * (inner[:, :-1] + inner[:, 1:]) * dB).sum(axis=1)
        est = outer.mean()
        spec = IteratedIntegralSpec(
            word=(1, 1),
            factors=(KernelFactor(power_kernel(1.5), 0, 1),),
            monomials=(0, 1),
            interval=(0.0, T),
        )
        exact = wiener_expectation(spec).value
        se = outer.std() / np.sqrt(m)
        assert est == pytest.approx(exact, abs=4 * se + 1e-4)


class TestTargetGenerators:
    def test_oneperiod_n3_targets(self):
        H, T = 1.5, 1.0
        conds = moment_targets_1d_oneperiod_n3(power_kernel(H), T)
        by_label = {c.label: c.target for c in conds}
        assert by_label["n2-anchored-end"] == pytest.approx(T ** (2 * H) / (4 * H))
        assert by_label["n2-chained"] == 0.0

    def test_oneperiod_n5_count_and_weight(self):
        conds = moment_targets_1d_oneperiod_n5(power_kernel(1.5), 1.0)
        assert len(conds) == 10
        assert conds[0].is_weight and conds[0].target == 1.0

    def test_2d_oneperiod_n5_count(self):
        conds = moment_targets_2d_oneperiod_n5(1.5, 1.0, 0.5)
        assert len(conds) == 45

    def test_const_kernel_rejected_one_period(self):
        with pytest.raises(ValueError):
            moment_targets_1d_oneperiod_n3(const_kernel(), 1.0)

    def test_multi_labels_stable(self):
        c1 = {c.label for c in moment_targets_1d_multi_n3(0.5)}
        c2 = {c.label for c in moment_targets_1d_multi_n3(2.0)}
        assert c1 == c2


class TestSpecValidation:
    def test_empty_word_rejected(self):
        with pytest.raises(ValueError):
            IteratedIntegralSpec(word=())

    def test_anchor_must_precede_leg(self):
        with pytest.raises(ValueError):
            KernelFactor(const_kernel(), 2, 1)

    def test_monomial_length_checked(self):
        with pytest.raises(ValueError):
            IteratedIntegralSpec(word=(1, 1), monomials=(1,))
