"""Tests for the moment-system solver."""

import numpy as np
import pytest

from svcubature.kernels import power_kernel
from svcubature.measures import MomentSystem
from svcubature.moments import moment_targets_1d_oneperiod_n5
from svcubature.solver import SolverConfig, SolverResult, solve_moment_system


@pytest.fixture(scope="module")
def system_1d():
    conds = moment_targets_1d_oneperiod_n5(power_kernel(1.5), 1.0)
    return MomentSystem(conds, n_paths=3, n_segments=4, dim=1)


@pytest.fixture(scope="module")
def solved(system_1d):
    return solve_moment_system(
        system_1d, horizon=1.0, cfg=SolverConfig(n_starts=16, seed=0)
    )


class TestSolverConfig:
    def test_validation(self):
        with pytest.raises(ValueError, match="positive"):
            SolverConfig(n_starts=0)
        with pytest.raises(ValueError, match="positive"):
            SolverConfig(threshold=0.0)
        with pytest.raises(ValueError, match="method"):
            SolverConfig(method="newton")
        with pytest.raises(ValueError, match="beta"):
            SolverConfig(beta=np.array([1.0, -1.0]))


class TestSolve:
    def test_recovers_order5_measure(self, system_1d, solved):
        assert solved.success
        assert solved.max_relative_residual < 1e-6
        m = solved.measure
        assert m.weights.shape == (3,)
        assert np.all(m.weights >= 0)
        assert 2 * m.weights.sum() == pytest.approx(1.0, abs=1e-12)
        # independent check of the residuals on the returned measure
        rel = system_1d.relative_residuals(m.weights, m.slopes)
        assert np.abs(rel).max() < 1e-6

    def test_report_and_labels(self, system_1d, solved):
        rep = solved.report()
        assert len(rep) == system_1d.n_equations
        assert {"label", "residual", "relative"} <= set(rep[0])

    def test_rescaled_measure_meets_short_horizon_conditions(self, solved):
        # dimensionless slopes carry over: solving on [0, 1] and rescaling
        # satisfies the conditions generated for the shorter horizon
        m = solved.measure.rescaled(0.25)
        conds = moment_targets_1d_oneperiod_n5(power_kernel(1.5), 0.25)
        system = MomentSystem(conds, n_paths=3, n_segments=4, dim=1)
        rel = system.relative_residuals(m.weights, m.slopes)
        assert np.abs(rel).max() < 1e-6

    def test_failure_returns_valid_measure(self):
        # one path with four segments cannot meet all ten order-5 conditions
        conds = moment_targets_1d_oneperiod_n5(power_kernel(1.5), 1.0)
        system = MomentSystem(conds, n_paths=1, n_segments=4, dim=1)
        res = solve_moment_system(
            system, horizon=1.0, cfg=SolverConfig(n_starts=4, seed=1)
        )
        assert isinstance(res, SolverResult)
        assert not res.success
        assert "no restart" in res.message
        # the returned measure is still well formed
        assert 2 * res.measure.weights.sum() == pytest.approx(1.0, abs=1e-6)

    def test_beta_shape_checked(self, system_1d):
        with pytest.raises(ValueError, match="beta"):
            solve_moment_system(
                system_1d, horizon=1.0,
                cfg=SolverConfig(n_starts=2, beta=np.ones(3)),
            )
