"""Numerical solution of cubature moment systems.

Minimizes the weighted squared residual of a :class:`MomentSystem` over the
path weights and slope matrices, with nonnegative weights, from many seeded
random starting points.  The default local method is a trust-region
Gauss-Newton step on the weighted residual vector; a plain gradient descent
with backtracking line search is available as a fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .measures import CubatureMeasure, MomentSystem


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the moment-system solver.

    Attributes
    ----------
    beta : ndarray or None
        Per-equation weights; default 1/target^2 for nonzero targets, 1 else.
    n_starts : int
        Number of seeded random restarts.
    seed : int
        Base seed; restarts use independent substreams.
    max_iter : int
        Iteration cap per restart.
    gtol : float
        Gradient/step tolerance passed to the local method.
    threshold : float
        Acceptance threshold on the max relative residual.
    method : str
        "gauss-newton" (default) or "gd".
    """

    beta: object = None
    n_starts: int = 64
    seed: int = 2024
    max_iter: int = 400
    gtol: float = 1e-14
    threshold: float = 1e-6
    method: str = "gauss-newton"

    def __post_init__(self):
        if self.n_starts < 1 or self.max_iter < 1:
            raise ValueError("n_starts and max_iter must be positive")
        if self.gtol <= 0 or self.threshold <= 0:
            raise ValueError("gtol and threshold must be positive")
        if self.method not in ("gauss-newton", "gd"):
            raise ValueError("method must be 'gauss-newton' or 'gd'")
        if self.beta is not None and np.any(np.asarray(self.beta) <= 0):
            raise ValueError("beta weights must be positive")


@dataclass
class SolverResult:
    """Best candidate found, with per-equation diagnostics."""

    measure: CubatureMeasure
    success: bool
    max_relative_residual: float
    residuals: np.ndarray
    relative_residuals: np.ndarray
    labels: tuple
    n_starts: int
    best_start: int
    objective: float
    message: str = ""

    def report(self):
        return [
            {
                "label": lab,
                "residual": float(r),
                "relative": float(rr),
            }
            for lab, r, rr in zip(self.labels, self.residuals, self.relative_residuals)
        ]


def _default_beta(system: MomentSystem) -> np.ndarray:
    targets = system.targets
    beta = np.ones_like(targets)
    nz = targets != 0.0
    beta[nz] = 1.0 / targets[nz] ** 2
    return beta


def _unpack(x, W, L, d):
    lam = x[:W]
    a = x[W:].reshape(W, L, d)
    return lam, a


def _descend_gd(fun, x0, max_iter, gtol, n_weights):
    """Projected gradient descent with backtracking on 0.5*||fun(x)||^2.

    The first ``n_weights`` coordinates are kept nonnegative.
    """

    def project(x):
        x = x.copy()
        x[:n_weights] = np.maximum(x[:n_weights], 0.0)
        return x

    def value_grad(x):
        r = fun(x)
        f = 0.5 * float(r @ r)
        g = np.empty(x.size)
        h = 1e-7
        for i in range(x.size):
            xp = x.copy()
            xp[i] += h
            rp = fun(xp)
            g[i] = (0.5 * float(rp @ rp) - f) / h
        return f, g

    x = project(x0)
    f, g = value_grad(x)
    for _ in range(max_iter):
        gn = np.linalg.norm(g)
        if gn < gtol:
            break
        step = 1.0
        while step > 1e-16:
            xn = project(x - step * g)
            rn = fun(xn)
            fn = 0.5 * float(rn @ rn)
            if fn < f - 1e-4 * step * gn * gn:
                break
            step *= 0.5
        else:
            break
        x = xn
        f, g = value_grad(x)
    return x, f


def solve_moment_system(
    system: MomentSystem,
    horizon: float,
    cfg: SolverConfig | None = None,
    start: float = 0.0,
) -> SolverResult:
    """Solve a moment system for a cubature measure on [start, start+horizon].

    Runs ``cfg.n_starts`` independent local optimizations from seeded random
    initial points, keeps every candidate whose maximum relative residual is
    below ``cfg.threshold``, and among those returns the one with the
    smallest maximum slope magnitude (ties in feasibility broken toward the
    smallest residual otherwise).
    """
    if cfg is None:
        cfg = SolverConfig()
    W, L, d = system.n_paths, system.n_segments, system.dim
    beta = np.asarray(cfg.beta, dtype=float) if cfg.beta is not None else _default_beta(system)
    if beta.shape != (system.n_equations,):
        raise ValueError("beta must have one entry per equation")
    sqrt_beta = np.sqrt(beta)
    targets = system.targets

    def weighted_residual(x):
        lam, a = _unpack(x, W, L, d)
        return sqrt_beta * (system.lhs(lam, a) - targets)

    def weighted_jacobian(x):
        lam, a = _unpack(x, W, L, d)
        _, jac = system.lhs_and_jacobian(lam, a)
        return sqrt_beta[:, None] * jac

    rng_root = np.random.default_rng(cfg.seed)
    seeds = rng_root.spawn(cfg.n_starts)
    lower = np.concatenate([np.zeros(W), np.full(W * L * d, -np.inf)])
    upper = np.full(W + W * L * d, np.inf)

    feasible = []  # (max_abs_slope, max_rel, start_index, x)
    best_any = None  # (max_rel, start_index, x)
    for i, child in enumerate(seeds):
        rng = np.random.default_rng(child)
        lam0 = np.full(W, 0.5 / W) * rng.uniform(0.5, 1.5, W)
        a0 = rng.normal(size=W * L * d)
        x0 = np.concatenate([lam0, a0])
        if cfg.method == "gauss-newton":
            sol = least_squares(
                weighted_residual,
                x0,
                jac=weighted_jacobian,
                bounds=(lower, upper),
                max_nfev=cfg.max_iter,
                gtol=cfg.gtol,
                xtol=1e-15,
                ftol=1e-15,
            )
            x = sol.x
        else:
            x, _ = _descend_gd(weighted_residual, x0, cfg.max_iter, cfg.gtol, W)
        lam, a = _unpack(x, W, L, d)
        # renormalize the weight constraint exactly when it is near-satisfied
        total = 2.0 * lam.sum()
        if abs(total - 1.0) < 1e-6 and total > 0:
            lam = lam / total
            x = np.concatenate([lam, a.ravel()])
        rel = np.abs(system.relative_residuals(lam, a))
        max_rel = float(rel.max())
        if best_any is None or max_rel < best_any[0]:
            best_any = (max_rel, i, x.copy())
        if max_rel <= cfg.threshold:
            feasible.append((float(np.abs(a).max()), max_rel, i, x.copy()))

    if feasible:
        feasible.sort(key=lambda t: (t[0], t[1]))
        _, max_rel, idx, x = feasible[0]
        success = True
        message = f"{len(feasible)}/{cfg.n_starts} restarts feasible"
    else:
        max_rel, idx, x = best_any
        success = False
        message = (
            f"no restart reached max relative residual <= {cfg.threshold:g}; "
            f"best {max_rel:.3e}"
        )
    lam, a = _unpack(x, W, L, d)
    # project onto the normalization constraint so that the returned measure
    # is always well formed, even for unsuccessful runs
    total = 2.0 * lam.sum()
    lam = lam / total if total > 0 else np.full(W, 0.5 / W)
    measure = CubatureMeasure(lam, a, start=start, horizon=horizon)
    res = system.residuals(lam, a)
    rel = system.relative_residuals(lam, a)
    return SolverResult(
        measure=measure,
        success=success,
        max_relative_residual=float(np.abs(rel).max()),
        residuals=res,
        relative_residuals=rel,
        labels=tuple(c.label for c in system.conditions),
        n_starts=cfg.n_starts,
        best_start=idx,
        objective=float(np.sum(beta * res**2)),
        message=message,
    )
