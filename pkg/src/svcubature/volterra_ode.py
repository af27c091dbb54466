"""Deterministic Volterra integration along cubature paths.

Substituting a piecewise-linear path omega for the Brownian driver turns the
SVIE into a deterministic Volterra equation, discretized by the midpoint
recurrence

    X^i_{lh} = x_i + sum_j sum_{alpha=0}^{l-1} K_i(lh, alpha h) V^i_j(X_{alpha h})
               (omega^j_{(alpha+1)h} - omega^j_{(alpha-1)h}) / 2,

with omega_{-h} := 0 for the drivers and omega^0_t := t for the implicit
time component.  Cost is O(D^2) in time and O(D * d1) in space.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .models import SVIEModel


@dataclass(frozen=True)
class SolveGrid:
    """Uniform time grid with D steps on [0, T]."""

    n_steps: int

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")

    def step(self, horizon: float) -> float:
        return horizon / self.n_steps

    def check_alignment(self, n_periods: int, n_segments: int) -> None:
        """Warn when grid points do not align with path breakpoints."""
        if self.n_steps % (n_periods * n_segments) != 0:
            warnings.warn(
                f"n_steps = {self.n_steps} is not a multiple of periods*segments "
                f"= {n_periods * n_segments}; path kinks fall between grid points",
                stacklevel=3,
            )


def solve_along_path(
    model: SVIEModel,
    path,
    grid: SolveGrid,
    horizon: float | None = None,
    return_trajectory: bool = False,
):
    """Integrate the Volterra equation along a deterministic path.

    Parameters
    ----------
    model : SVIEModel
    path : object with ``value(t)``, ``start``, ``horizon`` and ``dim``
        A piecewise-linear (possibly multi-period) cubature path; its
        dimension must be at least the model's driver count.
    grid : SolveGrid
    horizon : float, optional
        Overrides the path's horizon (useful for zero paths).
    return_trajectory : bool
        When True also return the (D+1, d1) state trajectory.

    Returns
    -------
    terminal : ndarray, shape (d1,)
        The state at time T, or ``(terminal, trajectory)`` when requested.
    """
    if path.dim < model.n_drivers:
        raise ValueError("path dimension below the model's driver count")
    T = horizon if horizon is not None else path.horizon
    D = grid.n_steps
    h = T / D
    start = path.start
    d = model.n_drivers
    d1 = model.n_states
    times = start + h * np.arange(D)

    # increments[alpha, j]: j = 0 is the time leg (full step h), j >= 1 the
    # central driver increments with omega_{-h} := 0
    increments = np.empty((D, d + 1))
    increments[:, 0] = h
    drv = np.empty((D, path.dim))
    vals_up = path.value(times + h)
    vals_dn = path.value(np.maximum(times - h, start))
    drv[:] = 0.5 * (vals_up - vals_dn)
    increments[:, 1:] = drv[:, :d]

    # coeff_vals[alpha, i, j] = V^i_j(X_{alpha h}), filled as we advance
    coeff_vals = np.empty((D, d1, d + 1))
    # running kernel-weighted sums are recomputed per l for the power-law
    # kernels (the kernel depends on both arguments), but vectorized over alpha
    traj = np.empty((D + 1, d1))
    x = model.x0.copy()
    traj[0] = x

    const_states = [i for i, k in enumerate(model.kernels) if k.is_const]
    power_states = [i for i, k in enumerate(model.kernels) if not k.is_const]
    # for constant kernels the sum telescopes: keep running accumulators
    const_acc = {i: 0.0 for i in const_states}

    for l in range(1, D + 1):
        alpha = l - 1
        for i in range(d1):
            for j in range(d + 1):
                coeff_vals[alpha, i, j] = model.coeffs[i][j](x)
        t_l = start + l * h
        for i in const_states:
            const_acc[i] += float(coeff_vals[alpha, i] @ increments[alpha])
            xi = model.x0[i] + const_acc[i]
            if not np.isfinite(xi):
                raise FloatingPointError(
                    f"non-finite state: coordinate {i} at step {l}"
                )
            x[i] = xi
        for i in power_states:
            kern = model.kernels[i](t_l, times[:l])
            contrib = np.einsum(
                "a,aj,aj->", kern, coeff_vals[:l, i, :], increments[:l]
            )
            xi = model.x0[i] + contrib
            if not np.isfinite(xi):
                raise FloatingPointError(
                    f"non-finite state: coordinate {i} at step {l}"
                )
            x[i] = xi
        traj[l] = x

    if return_trajectory:
        return x, traj
    return x
