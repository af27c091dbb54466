"""Cubature measures: builders, composition, serialization, moment systems."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcubature.kernels import power_kernel
from svcubature.measures import (
    CubatureMeasure,
    MomentSystem,
    build_1d_multi_n3,
    build_1d_multi_n5,
    build_1d_oneperiod_n3,
    build_2d_multi_n3,
    compose,
    load_measure,
    replicate,
    save_measure,
)
from svcubature.moments import (
    moment_targets_1d_multi_n3,
    moment_targets_1d_multi_n5,
    moment_targets_1d_oneperiod_n3,
    moment_targets_2d_multi_n3,
)
from svcubature.paths import measure_expectation


def max_relative_residual(conditions, measure):
    out = 0.0
    scale = max(abs(c.target) for c in conditions)
    for cond in conditions:
        if cond.is_weight:
            val = 2.0 * measure.weights.sum()
        else:
            val = sum(measure_expectation(s, measure) for s in cond.specs)
        denom = abs(cond.target) if cond.target != 0 else scale
        out = max(out, abs(val - cond.target) / denom)
    return out


class TestClosedFormBuilders:
    def test_multi_n3_exact(self):
        delta = 0.7
        m = build_1d_multi_n3(delta)
        conds = moment_targets_1d_multi_n3(delta)
        assert max_relative_residual(conds, m) < 1e-12

    @pytest.mark.parametrize("lam1", [1 / 6, 0.1, 0.03])
    def test_multi_n5_exact(self, lam1):
        delta = 1.3
        m = build_1d_multi_n5(delta, lambda1=lam1)
        conds = moment_targets_1d_multi_n5(delta)
        assert max_relative_residual(conds, m) < 1e-11

    def test_multi_n5_default_merges_zero_path(self):
        m = build_1d_multi_n5(1.0)
        weights = [w for w, _ in m.atoms()]
        assert len(weights) == 3  # two mirrored atoms plus one zero path
        assert sum(weights) == pytest.approx(1.0)

    @pytest.mark.parametrize("hurst", [0.8, 1.0, 1.5, 2.5])
    def test_oneperiod_n3_exact(self, hurst):
        T = 1.0
        m = build_1d_oneperiod_n3(power_kernel(hurst), T)
        conds = moment_targets_1d_oneperiod_n3(power_kernel(hurst), T)
        assert max_relative_residual(conds, m) < 1e-9

    def test_oneperiod_n3_closed_form_h15(self):
        # at H = 3/2 the two slopes have the closed form
        # ((sqrt5 + 1)/sqrt3, (5 - 3 sqrt5)/sqrt3)
        m = build_1d_oneperiod_n3(power_kernel(1.5), 1.0)
        a = m.slopes[0, :, 0]
        assert a[0] == pytest.approx((np.sqrt(5) + 1) / np.sqrt(3), rel=1e-12)
        assert a[1] == pytest.approx((5 - 3 * np.sqrt(5)) / np.sqrt(3), rel=1e-12)

    @pytest.mark.parametrize("rho", [0.5, -0.3, 1.0])
    def test_2d_multi_n3_exact(self, rho):
        delta = 0.5
        m = build_2d_multi_n3(delta, rho)
        conds = moment_targets_2d_multi_n3(delta, rho)
        assert max_relative_residual(conds, m) < 1e-12

    def test_2d_multi_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            build_2d_multi_n3(1.0, 1.5)


class TestMeasureValidation:
    def test_weights_must_normalize(self):
        with pytest.raises(ValueError):
            CubatureMeasure(
                weights=np.array([0.4]),
                slopes=np.array([[[1.0]]]),
                start=0.0,
                horizon=1.0,
            )

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            CubatureMeasure(
                weights=np.array([-0.1, 0.6]),
                slopes=np.zeros((2, 1, 1)),
                start=0.0,
                horizon=1.0,
            )


class TestComposition:
    def test_replicate_counts_atoms(self):
        m = build_1d_multi_n3(0.5)
        composed = replicate(m, 3)
        assert composed.n_atoms == 2**3
        total = sum(w for w, _ in composed.atoms())
        assert total == pytest.approx(1.0)

    def test_zero_path_merging_reduces_atoms(self):
        m = build_1d_multi_n5(0.2)  # three atoms per period
        composed = replicate(m, 5)
        assert composed.n_atoms == 3**5

    def test_compose_requires_contiguous_periods(self):
        m1 = build_1d_multi_n3(0.5)
        m2 = build_1d_multi_n3(0.5)  # also starts at 0
        with pytest.raises(ValueError):
            compose([m1, m2])

    def test_composed_path_is_continuous(self):
        composed = replicate(build_1d_multi_n3(0.5), 2)
        _, path = next(iter(composed.atoms()))
        left = path.value(0.5 - 1e-9)
        right = path.value(0.5 + 1e-9)
        assert left == pytest.approx(right, abs=1e-6)


class TestSerialization:
    def test_round_trip_bit_identical(self, tmp_path):
        m = build_1d_oneperiod_n3(power_kernel(1.5), 2.0)
        f = tmp_path / "measure.json"
        save_measure(m, f)
        m2 = load_measure(f)
        assert np.array_equal(m.weights, m2.weights)
        assert np.array_equal(m.slopes, m2.slopes)
        assert m.start == m2.start and m.horizon == m2.horizon

    def test_composed_round_trip(self, tmp_path):
        composed = replicate(build_1d_multi_n3(0.5), 2)
        f = tmp_path / "composed.json"
        save_measure(composed, f)
        back = load_measure(f)
        assert back.n_atoms == composed.n_atoms
        for (w1, p1), (w2, p2) in zip(composed.atoms(), back.atoms()):
            assert w1 == w2
            assert p1.value(0.77) == pytest.approx(p2.value(0.77), abs=0)


class TestRescaling:
    @given(delta=st.floats(0.05, 10.0))
    @settings(max_examples=20, deadline=None)
    def test_rescaled_preserves_slopes(self, delta):
        m = build_1d_oneperiod_n3(power_kernel(1.5), 1.0)
        m2 = m.rescaled(delta)
        assert m2.horizon == pytest.approx(delta)
        assert np.array_equal(m.slopes, m2.slopes)


class TestMomentSystem:
    def test_fast_lhs_matches_direct_expectation(self):
        conds = moment_targets_1d_multi_n5(0.8)
        system = MomentSystem(conds, n_paths=2, n_segments=1, dim=1)
        m = build_1d_multi_n5(0.8, lambda1=0.1)
        lhs = system.lhs(m.weights, m.slopes)
        for k, cond in enumerate(system.conditions):
            if cond.is_weight:
                direct = 2.0 * m.weights.sum()
            else:
                direct = sum(measure_expectation(s, m) for s in cond.specs)
            assert lhs[k] == pytest.approx(direct, rel=1e-10, abs=1e-13)

    def test_jacobian_matches_finite_differences(self):
        conds = moment_targets_1d_oneperiod_n3(power_kernel(1.5), 1.0)
        system = MomentSystem(conds, n_paths=2, n_segments=2, dim=1)
        rng = np.random.default_rng(3)
        lam = np.array([0.2, 0.3])
        a = rng.normal(size=(2, 2, 1))
        _, jac = system.lhs_and_jacobian(lam, a)
        x0 = np.concatenate([lam, a.ravel()])
        eps = 1e-7

        def lhs_at(x):
            return system.lhs(x[:2], x[2:].reshape(2, 2, 1))

        for col in range(x0.size):
            xp = x0.copy()
            xp[col] += eps
            xm = x0.copy()
            xm[col] -= eps
            fd = (lhs_at(xp) - lhs_at(xm)) / (2 * eps)
            assert jac[:, col] == pytest.approx(fd, rel=1e-5, abs=1e-6)

    def test_relative_residuals_zero_at_solution(self):
        delta = 0.4
        conds = moment_targets_1d_multi_n3(delta)
        system = MomentSystem(conds, n_paths=1, n_segments=1, dim=1)
        m = build_1d_multi_n3(delta)
        rel = system.relative_residuals(m.weights, m.slopes)
        assert np.abs(rel).max() < 1e-12
