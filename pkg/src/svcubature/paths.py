"""Deterministic path calculus for piecewise-linear cubature paths.

A cubature path on a period [start, start + delta] is piecewise linear over
L equal segments, starting at 0, with dimensionless slopes a_{l}^j scaled by
1/sqrt(delta).  Iterated integrals of an :class:`IteratedIntegralSpec`
against such a path reduce to sums over cells: each leg is assigned to one
segment (in weakly decreasing order), the driver legs pick up the slope
factors, and the remaining time integral over the cell is evaluated by the
nested Gauss-Legendre rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

from .moments import IteratedIntegralSpec
from .quadrature import simplex_quad


@dataclass(frozen=True)
class PiecewiseLinearPath:
    """A d-dimensional piecewise-linear path over one period.

    Attributes
    ----------
    start : float
        Left endpoint of the period.
    horizon : float
        Period length delta.
    slopes : ndarray, shape (L, d)
        Dimensionless slopes a_{l}^j; the actual slope on segment l is
        a_{l}^j / sqrt(delta).  The path starts at value 0.
    """

    start: float
    horizon: float
    slopes: np.ndarray

    def __post_init__(self):
        slopes = np.atleast_2d(np.asarray(self.slopes, dtype=float))
        object.__setattr__(self, "slopes", slopes)
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if slopes.ndim != 2:
            raise ValueError("slopes must be an (L, d) array")

    @property
    def n_segments(self) -> int:
        return self.slopes.shape[0]

    @property
    def dim(self) -> int:
        return self.slopes.shape[1]

    @property
    def breakpoints(self) -> np.ndarray:
        L = self.n_segments
        return self.start + self.horizon * np.arange(L + 1) / L

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.slopes == 0.0))

    def mirrored(self) -> "PiecewiseLinearPath":
        return PiecewiseLinearPath(self.start, self.horizon, -self.slopes)

    def value(self, t) -> np.ndarray:
        """Path value at times t (shape (..., d)); clamps to the period."""
        t = np.asarray(t, dtype=float)
        L = self.n_segments
        seg_len = self.horizon / L
        scaled = self.slopes / np.sqrt(self.horizon)
        cum = np.vstack([np.zeros(self.dim), np.cumsum(scaled * seg_len, axis=0)])
        u = np.clip(t - self.start, 0.0, self.horizon)
        idx = np.minimum((u / seg_len).astype(int), L - 1)
        return cum[idx] + scaled[idx] * (u - idx * seg_len)[..., None]


def _cells(n_legs: int, n_segments: int):
    """All weakly decreasing cell assignments (l_1 >= l_2 >= ... >= l_n)."""
    for combo in combinations_with_replacement(range(n_segments, 0, -1), n_legs):
        yield combo


@lru_cache(maxsize=4096)
def cell_coefficients(
    spec: IteratedIntegralSpec,
    n_segments: int,
    rtol: float = 1e-12,
) -> tuple:
    """Polynomial representation of the path integral in the slope matrix.

    For a piecewise-linear path with ``n_segments`` equal segments on the
    spec's interval, the iterated integral equals

        sum over cells  c * prod over driver legs  a[segment, driver],

    independent of the actual slope values.  Returns a tuple of
    ``(c, ((segment, driver), ...))`` pairs with zero-based indices; the
    1/sqrt(delta) slope scaling is folded into the coefficients ``c``.
    """
    start, end = spec.interval
    n = spec.depth
    L = n_segments
    delta = end - start
    s = start + delta * np.arange(L + 1) / L
    sqrt_delta = np.sqrt(delta)
    driver_legs = [m for m, j in enumerate(spec.word) if j > 0]
    terms = []
    for cell in _cells(n, L):
        bounds = []
        for m, l in enumerate(cell):
            lo = s[l - 1]
            if m > 0 and cell[m - 1] == l:
                bounds.append((lo, None))
            else:
                bounds.append((lo, s[l]))

        def integrand(ts):
            val = np.asarray(1.0)
            for f in spec.factors:
                upper = end if f.anchor == 0 else ts[f.anchor - 1]
                val = val * f.kernel(upper, ts[f.leg - 1])
            for leg, e in enumerate(spec.monomials):
                if e:
                    val = val * (ts[leg] - start) ** e
            return val

        value, _ = simplex_quad(integrand, bounds, rtol=rtol)
        coef = value / sqrt_delta ** len(driver_legs)
        if coef == 0.0:
            continue
        factors = tuple((cell[m] - 1, spec.word[m] - 1) for m in driver_legs)
        terms.append((coef, factors))
    return tuple(terms)


def evaluate_polynomial(terms, slopes: np.ndarray) -> float:
    """Evaluate a cell polynomial at a dimensionless (L, d) slope matrix."""
    total = 0.0
    for coef, factors in terms:
        prod = coef
        for seg, drv in factors:
            prod *= slopes[seg, drv]
            if prod == 0.0:
                break
        total += prod
    return total


def path_iterated_integral(
    spec: IteratedIntegralSpec,
    path: PiecewiseLinearPath,
    rtol: float = 1e-12,
) -> float:
    """Evaluate the iterated integral of ``spec`` along a piecewise-linear path.

    The spec's interval must coincide with the path's period.  Word letter 0
    integrates dt; letter j >= 1 integrates the j-th path component.
    """
    start, end = spec.interval
    if abs(start - path.start) > 1e-12 or abs(end - (path.start + path.horizon)) > 1e-12:
        raise ValueError("spec interval does not match the path period")
    if any(j > path.dim for j in spec.word):
        raise ValueError("word letter exceeds path dimension")
    terms = cell_coefficients(spec, path.n_segments, rtol)
    return evaluate_polynomial(terms, path.slopes)


def measure_expectation(spec: IteratedIntegralSpec, measure, rtol: float = 1e-12) -> float:
    """Expectation of ``spec`` under a one-period cubature measure.

    Sums weight * integral over all atoms (paths and their mirror images).
    """
    total = 0.0
    for weight, path in measure.atoms():
        total += weight * path_iterated_integral(spec, path, rtol=rtol)
    return total
