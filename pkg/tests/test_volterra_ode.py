"""Deterministic Volterra solves along piecewise-linear paths."""

import numpy as np
import pytest

from svcubature.kernels import power_kernel
from svcubature.measures import build_1d_multi_n3, build_1d_oneperiod_n3, replicate
from svcubature.models import cos_1d, linear_1d, volatility_2d
from svcubature.paths import PiecewiseLinearPath
from svcubature.volterra_ode import SolveGrid, solve_along_path


class TestLinearModel:
    def test_closed_form_terminal_value(self):
        # for the linear model X_t = x0 + int (t-r)^{H-1/2} domega with a
        # single-segment path of dimensionless slope a, the terminal value is
        # x0 + a T^H / (H + 1/2) exactly; the midpoint rule integrates the
        # polynomial kernel at H = 3/2 without error
        H, T, a, x0 = 1.5, 1.0, 1.3, 0.2
        model = linear_1d(hurst=H, x0=x0)
        path = PiecewiseLinearPath(0.0, T, [[a]])
        val = solve_along_path(model, path, SolveGrid(64))
        expected = x0 + a * T**H / (H + 0.5)
        assert val[0] == pytest.approx(expected, rel=1e-12)

    def test_mirror_antisymmetry(self):
        model = linear_1d(hurst=1.5, x0=0.0)
        path = PiecewiseLinearPath(0.0, 1.0, [[0.9], [-0.4]])
        v = solve_along_path(model, path, SolveGrid(50))
        vm = solve_along_path(model, path.mirrored(), SolveGrid(50))
        assert vm[0] == pytest.approx(-v[0], rel=1e-12)

    def test_trajectory_shape(self):
        model = linear_1d(hurst=1.5, x0=0.0)
        path = PiecewiseLinearPath(0.0, 1.0, [[1.0]])
        _, traj = solve_along_path(model, path, SolveGrid(10), return_trajectory=True)
        assert traj.shape == (11, 1)
        assert traj[0, 0] == 0.0


class TestGridConvergence:
    def test_cos_model_first_order_in_steps(self):
        model = cos_1d(hurst=1.5, x0=1.0)
        measure = build_1d_oneperiod_n3(power_kernel(1.5), 1.0)
        _, path = next(iter(measure.atoms()))
        vals = [solve_along_path(model, path, SolveGrid(D))[0] for D in (40, 80, 160, 1280)]
        ref = vals[-1]
        errs = [abs(v - ref) for v in vals[:-1]]
        assert errs[0] > errs[1] > errs[2]

    def test_alignment_warning(self):
        model = cos_1d(hurst=1.5, x0=1.0)
        measure = replicate(build_1d_multi_n3(1.0 / 3), 3)
        _, path = next(iter(measure.atoms()))
        grid = SolveGrid(100)
        with pytest.warns(UserWarning, match="not a multiple"):
            grid.check_alignment(3, 1)


class TestTwoDriverModel:
    def test_zero_path_reduces_to_deterministic_odes(self):
        # with no noise, U_t = 1 + int (t-s)(1/2 - U_s/3) ds solves
        # U'' = 1/2 - U/3 with U(0)=1, U'(0)=0, i.e.
        # U = 3/2 - cos(t/sqrt3)/2, and S' = S U gives
        # S = exp(3t/2 - (sqrt3/2) sin(t/sqrt3))
        model = volatility_2d(hurst=1.5, rho=0.5, s0=1.0, u0=1.0)
        t = 0.5
        path = PiecewiseLinearPath(0.0, t, [[0.0, 0.0]])
        val = solve_along_path(model, path, SolveGrid(400))
        u_exact = 1.5 - 0.5 * np.cos(t / np.sqrt(3))
        s_exact = np.exp(1.5 * t - (np.sqrt(3) / 2) * np.sin(t / np.sqrt(3)))
        assert val[1] == pytest.approx(u_exact, rel=1e-4)
        assert val[0] == pytest.approx(s_exact, rel=1e-2)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            SolveGrid(0)
