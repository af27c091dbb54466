"""Pricing E[G(X_T)]: deterministic cubature, Gaussian oracle, Euler Monte
Carlo, and the statistical comparison between them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.stats import norm

from .models import Payoff, SVIEModel
from .volterra_ode import SolveGrid, solve_along_path


def cubature_price(
    model: SVIEModel,
    payoff: Payoff,
    measure,
    grid: SolveGrid,
) -> float:
    """Deterministic price: weighted payoff over the measure's atom paths.

    Atoms are enumerated in the measure's deterministic order, so the result
    is bit-reproducible.
    """
    horizon = measure.horizon
    n_periods = getattr(measure, "n_periods", 1)
    n_segments = getattr(measure, "n_segments", None)
    if n_segments is None:
        n_segments = measure.periods[0].n_segments
    grid.check_alignment(n_periods, n_segments)
    total = 0.0
    for weight, path in measure.atoms():
        x_T = solve_along_path(model, path, grid, horizon=horizon)
        total += weight * float(payoff(x_T))
    return total


def gaussian_oracle(
    payoff: Payoff,
    x0: float,
    hurst: float,
    horizon: float,
) -> float:
    """Exact price for the scalar model with V identically one.

    The terminal value is Gaussian with mean x0 and variance T^{2H} / (2H);
    the payoff is integrated against this law on [-12, 12] standard
    deviations with any payoff kinks passed as quadrature break points.
    """
    var = horizon ** (2.0 * hurst) / (2.0 * hurst)
    sd = np.sqrt(var)

    def integrand(z):
        return payoff.scalar(x0 + sd * z) * norm.pdf(z)

    points = sorted(
        {(k - x0) / sd for k in payoff.kinks if abs(k - x0) < 12.0 * sd}
    )
    val, _ = integrate.quad(
        integrand, -12.0, 12.0, epsabs=1e-10, epsrel=1e-10,
        points=points or None, limit=200,
    )
    return val


def _ito_correction(model: SVIEModel, x: np.ndarray) -> np.ndarray:
    """Stratonovich-to-Ito drift correction for constant-kernel states.

    Returns an array of shape (..., d1); nonzero only for states carrying the
    constant kernel.  Uses central finite differences with a relative step.
    """
    d = model.n_drivers
    corr = model.corr
    const_states = model.semimartingale_states
    out = np.zeros(x.shape[:-1] + (model.n_states,))
    if not const_states:
        return out
    for i in const_states:
        acc = 0.0
        for k in const_states:
            eps = 1e-6 * (1.0 + np.abs(x[..., k]))
            xp = x.copy()
            xm = x.copy()
            xp[..., k] = x[..., k] + eps
            xm[..., k] = x[..., k] - eps
            for j in range(1, d + 1):
                dv = (model.coeffs[i][j](xp) - model.coeffs[i][j](xm)) / (2.0 * eps)
                for jp in range(1, d + 1):
                    rho = corr[j - 1, jp - 1]
                    if rho == 0.0:
                        continue
                    acc = acc + 0.5 * rho * dv * model.coeffs[k][jp](x)
        out[..., i] = acc
    return out


def euler_price(
    model: SVIEModel,
    payoff: Payoff,
    horizon: float,
    n_steps: int,
    n_samples: int,
    seed: int = 0,
    repeat: int = 0,
    zero_noise: bool = False,
) -> float:
    """Monte-Carlo price by the Volterra Euler scheme.

    The Stratonovich vol coefficients are corrected to Ito drift on
    constant-kernel states; power-kernel states need no correction since
    their kernel vanishes on the diagonal.  Each (seed, repeat) pair selects
    an independent counter-based random substream.  ``zero_noise`` replaces
    the Gaussian increments with zeros (testing hook).
    """
    D = n_steps
    h = horizon / D
    d = model.n_drivers
    d1 = model.n_states
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(repeat,))
    rng = np.random.default_rng(ss)
    if zero_noise:
        dB = np.zeros((D, n_samples, d))
    else:
        z = rng.standard_normal((D, n_samples, d))
        chol = np.linalg.cholesky(
            model.corr + 1e-14 * np.eye(d)
        )
        dB = np.sqrt(h) * (z @ chol.T)

    times = h * np.arange(D + 1)
    x = np.tile(model.x0, (n_samples, 1))
    # stored per-step coefficient terms: V_0 h + corr h + sum_j V_j dB_j
    terms = np.empty((D, n_samples, d1))
    const_states = list(model.semimartingale_states)
    power_states = [i for i in range(d1) if i not in const_states]
    const_acc = np.zeros((n_samples, len(const_states)))

    for l in range(D):
        corr_drift = _ito_correction(model, x)
        for i in range(d1):
            t = model.coeffs[i][0](x) * h + corr_drift[..., i] * h
            for j in range(1, d + 1):
                t = t + model.coeffs[i][j](x) * dB[l, :, j - 1]
            terms[l, :, i] = t
        new_x = x.copy()
        for idx, i in enumerate(const_states):
            const_acc[:, idx] += terms[l, :, i]
            new_x[:, i] = model.x0[i] + const_acc[:, idx]
        for i in power_states:
            kern = model.kernels[i](times[l + 1], times[: l + 1])
            new_x[:, i] = model.x0[i] + np.einsum(
                "a,an->n", kern, terms[: l + 1, :, i]
            )
        x = new_x
        if not np.all(np.isfinite(x)):
            bad = np.argwhere(~np.isfinite(x))
            raise FloatingPointError(
                f"non-finite state in Euler scheme at step {l + 1}, "
                f"coordinate {bad[0][1]}"
            )
    return float(np.mean(payoff(x)))


@dataclass(frozen=True)
class ComparisonResult:
    """Cubature-vs-Euler error comparison."""

    cubature_value: float
    cubature_error: float
    cubature_time: float
    truth: float
    euler_mean_value: float
    euler_mean_error: float
    euler_sd: float
    euler_value_sd: float
    euler_time: float
    percentile: float
    empirical_rank: float
    n_repeats: int
    degenerate: bool
    euler_values: np.ndarray = None

    @property
    def pooled_se(self) -> float:
        """Standard error of the pooled Euler mean across repeats."""
        if self.n_repeats < 2:
            return 0.0
        return self.euler_value_sd / np.sqrt(self.n_repeats)

    def with_truth(self, truth: float) -> "ComparisonResult":
        """Recompute the error statistics against a different truth value."""
        return _build_result(
            self.cubature_value, self.cubature_time, self.euler_values,
            self.euler_time, float(truth),
        )


def compare(
    model: SVIEModel,
    payoff: Payoff,
    measure,
    grid: SolveGrid,
    horizon: float,
    euler_steps: int,
    euler_samples: int,
    n_repeats: int = 1000,
    seed: int = 0,
    truth: float | None = None,
) -> ComparisonResult:
    """Compare the cubature price against repeated Euler Monte-Carlo runs.

    ``truth`` defaults to the pooled mean of the Euler values (for models
    without an analytic price); pass the Gaussian-oracle value when
    available.  The percentile is the normal approximation
    Phi((e_cub - mean e_euler) / SD e_euler); the empirical rank is the
    fraction of Euler errors below the cubature error.
    """
    t0 = time.perf_counter()
    y_cub = cubature_price(model, payoff, measure, grid)
    t_cub = time.perf_counter() - t0

    t0 = time.perf_counter()
    values = np.array(
        [
            euler_price(
                model, payoff, horizon, euler_steps, euler_samples,
                seed=seed, repeat=r,
            )
            for r in range(n_repeats)
        ]
    )
    t_euler = (time.perf_counter() - t0) / n_repeats
    if truth is None:
        truth = float(values.mean())
    return _build_result(y_cub, t_cub, values, t_euler, truth)


def _build_result(y_cub, t_cub, values, t_euler, truth) -> ComparisonResult:
    n_repeats = values.size
    errors = np.abs(values - truth)
    e_cub = abs(y_cub - truth)
    e_mean = float(errors.mean())
    sd = float(errors.std(ddof=1)) if n_repeats > 1 else 0.0
    degenerate = sd == 0.0
    if degenerate:
        percentile = 0.5 if e_cub == e_mean else float(e_cub > e_mean)
    else:
        percentile = float(norm.cdf((e_cub - e_mean) / sd))
    rank = float(np.mean(errors < e_cub))
    return ComparisonResult(
        cubature_value=y_cub,
        cubature_error=e_cub,
        cubature_time=t_cub,
        truth=truth,
        euler_mean_value=float(values.mean()),
        euler_mean_error=e_mean,
        euler_sd=sd,
        euler_value_sd=float(values.std(ddof=1)) if n_repeats > 1 else 0.0,
        euler_time=t_euler,
        percentile=percentile,
        empirical_rank=rank,
        n_repeats=n_repeats,
        degenerate=degenerate,
        euler_values=values,
    )
