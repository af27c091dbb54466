"""Deterministic cubature pricing for stochastic Volterra integral equations.

The package prices functionals ``E[G(X_T)]`` where ``X`` solves a Volterra
equation driven by Brownian motion, by replacing the Wiener measure with a
finitely supported cubature measure on piecewise linear paths and solving a
deterministic Volterra integral equation along each path.  A Monte-Carlo
Euler scheme is included as a statistical baseline.
"""

from svcubature.kernels import Kernel, const_kernel, kernel_eval, power_kernel
from svcubature.measures import (
    ComposedMeasure,
    ComposedPath,
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
from svcubature.models import (
    Coefficient,
    HypothesisReport,
    Payoff,
    SVIEModel,
    builtin_model,
    builtin_payoff,
    cos_1d,
    linear_1d,
    load_model,
    payoff_call,
    payoff_cos,
    payoff_square,
    save_model,
    validate_hypotheses,
    volatility_2d,
)
from svcubature.moments import (
    IteratedIntegralSpec,
    KernelFactor,
    MomentCondition,
    moment_targets_1d_multi_n3,
    moment_targets_1d_multi_n5,
    moment_targets_1d_oneperiod_n3,
    moment_targets_1d_oneperiod_n5,
    moment_targets_2d_multi_n3,
    moment_targets_2d_oneperiod_n5,
    wiener_expectation,
)
from svcubature.paths import (
    PiecewiseLinearPath,
    measure_expectation,
    path_iterated_integral,
)
from svcubature.pricing import (
    ComparisonResult,
    compare,
    cubature_price,
    euler_price,
    gaussian_oracle,
)
from svcubature.solver import SolverConfig, SolverResult, solve_moment_system
from svcubature.volterra_ode import SolveGrid, solve_along_path

__version__ = "0.1.0"

__all__ = [
    "Kernel",
    "const_kernel",
    "power_kernel",
    "kernel_eval",
    "CubatureMeasure",
    "ComposedMeasure",
    "ComposedPath",
    "MomentSystem",
    "build_1d_multi_n3",
    "build_1d_multi_n5",
    "build_1d_oneperiod_n3",
    "build_2d_multi_n3",
    "compose",
    "replicate",
    "save_measure",
    "load_measure",
    "Coefficient",
    "SVIEModel",
    "Payoff",
    "HypothesisReport",
    "builtin_model",
    "builtin_payoff",
    "linear_1d",
    "cos_1d",
    "volatility_2d",
    "payoff_cos",
    "payoff_square",
    "payoff_call",
    "save_model",
    "load_model",
    "validate_hypotheses",
    "IteratedIntegralSpec",
    "KernelFactor",
    "MomentCondition",
    "wiener_expectation",
    "moment_targets_1d_oneperiod_n3",
    "moment_targets_1d_oneperiod_n5",
    "moment_targets_1d_multi_n3",
    "moment_targets_1d_multi_n5",
    "moment_targets_2d_multi_n3",
    "moment_targets_2d_oneperiod_n5",
    "PiecewiseLinearPath",
    "path_iterated_integral",
    "measure_expectation",
    "SolverConfig",
    "SolverResult",
    "solve_moment_system",
    "SolveGrid",
    "solve_along_path",
    "cubature_price",
    "euler_price",
    "gaussian_oracle",
    "compare",
    "ComparisonResult",
]
