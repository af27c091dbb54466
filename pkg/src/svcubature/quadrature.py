"""Nested Gauss-Legendre quadrature over ordered-simplex regions.

All moment computations in this package reduce to integrals of the form

    int_{a <= t_m <= ... <= t_1 <= b} f(t_1, ..., t_m) dt_m ... dt_1,

possibly with per-variable sub-interval (cell) constraints.  These are
evaluated by nesting one-dimensional Gauss-Legendre rules, one level per
variable, with the node interval of level k depending on the value of the
variable at level k-1.

A quadratic grading substitution t = hi - (hi - lo) v**2 clusters nodes
toward the upper endpoint of each level.  Kernel factors (t_a - t_b)**p with
half-integer p have their only non-smooth point there, and the substitution
turns them into polynomials in v, so the fixed-order rules are exact for
every half-integer Hurst index.
"""

from __future__ import annotations

import numpy as np

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}

#: default escalation ladder for the adaptive wrapper
_ORDER_LADDER = (16, 24, 36, 54, 81, 122, 183)


def _gauss_legendre_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [0, 1]."""
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def nested_simplex_quad(integrand, bounds, npts: int = 24, graded: bool = True) -> float:
    """Integrate ``integrand`` over an ordered-simplex region.

    Parameters
    ----------
    integrand : callable
        Receives a list of m broadcastable arrays (one per variable, outermost
        first) and returns an array of integrand values.
    bounds : sequence of (lo, hi)
        Per-variable bounds, outermost first.  ``hi`` may be ``None``, meaning
        "the previous variable" (chained simplex constraint); the first entry
        must be numeric.  ``lo`` is always numeric.
    npts : int
        Gauss-Legendre order used at every level.
    graded : bool
        Apply the quadratic grading substitution toward the upper endpoint.

    Returns
    -------
    float
    """
    m = len(bounds)
    if m == 0:
        return float(integrand([]))
    x, w = _gauss_legendre_01(npts)
    ts: list[np.ndarray] = []
    weight = None
    for k, (lo, hi) in enumerate(bounds):
        if hi is None:
            if k == 0:
                raise ValueError("first variable needs a numeric upper bound")
            upper = ts[k - 1][..., None]
        else:
            upper = hi
        shape = (1,) * k + (npts,)
        xk = x.reshape(shape)
        wk = w.reshape(shape)
        span = upper - lo
        if graded:
            # t = hi - (hi - lo) v^2,  dt = 2 (hi - lo) v dv
            t = upper - span * xk**2
            jac = 2.0 * span * xk
        else:
            t = lo + span * xk
            jac = span
        ts.append(t)
        contrib = wk * jac
        weight = contrib if weight is None else weight[..., None] * contrib
    # align each variable with its own broadcast axis
    ts = [t.reshape(t.shape + (1,) * (m - 1 - k)) for k, t in enumerate(ts)]
    vals = integrand(ts)
    return float(np.sum(vals * weight))


def simplex_quad(
    integrand,
    bounds,
    rtol: float = 1e-11,
    atol: float = 1e-14,
    orders=_ORDER_LADDER,
) -> tuple[float, float]:
    """Adaptively escalated nested quadrature.

    Evaluates :func:`nested_simplex_quad` on an increasing ladder of orders
    until two consecutive results agree to ``rtol``/``atol``.  Returns the
    last value and the final difference as an error estimate.
    """
    prev = nested_simplex_quad(integrand, bounds, npts=orders[0])
    err = np.inf
    for n in orders[1:]:
        cur = nested_simplex_quad(integrand, bounds, npts=n)
        err = abs(cur - prev)
        if err <= max(atol, rtol * abs(cur)):
            return cur, err
        prev = cur
    return prev, err
