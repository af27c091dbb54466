"""Cubature measures on piecewise-linear path space.

A one-period measure stores W weighted paths; each non-zero path implicitly
carries an antithetic mirror with the same weight, so the stored weights sum
to 1/2.  Multi-period measures are independent compositions whose atoms are
weight products over concatenated paths.

Closed-form constructions are provided for the cases admitting explicit
solutions (order 3 and 5 in one dimension, order 3 in two dimensions); the
remaining systems are handled by the numerical solver in
:mod:`svcubature.solver` against a :class:`MomentSystem`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .kernels import Kernel
from .moments import MomentCondition
from .paths import PiecewiseLinearPath, cell_coefficients, evaluate_polynomial


@dataclass(frozen=True)
class CubatureMeasure:
    """A one-period cubature measure.

    Attributes
    ----------
    weights : ndarray, shape (W,)
        Weights of the stored paths; mirrors carry the same weights, so the
        entries are nonnegative and sum to 1/2.
    slopes : ndarray, shape (W, L, d)
        Dimensionless slope matrices of the stored paths.
    start : float
        Left endpoint of the period.
    horizon : float
        Period length.
    """

    weights: np.ndarray
    slopes: np.ndarray
    start: float = 0.0
    horizon: float = 1.0

    def __post_init__(self):
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        slopes = np.asarray(self.slopes, dtype=float)
        if slopes.ndim != 3:
            raise ValueError("slopes must be a (W, L, d) array")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "slopes", slopes)
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if weights.shape[0] != slopes.shape[0]:
            raise ValueError("one weight per path required")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(2.0 * weights.sum() - 1.0) > 1e-6:
            raise ValueError("weights (with mirrors) must sum to 1")

    @property
    def n_paths(self) -> int:
        return self.slopes.shape[0]

    @property
    def n_segments(self) -> int:
        return self.slopes.shape[1]

    @property
    def dim(self) -> int:
        return self.slopes.shape[2]

    def path(self, k: int) -> PiecewiseLinearPath:
        return PiecewiseLinearPath(self.start, self.horizon, self.slopes[k])

    def atoms(self):
        """Yield (weight, path) atoms; mirrors included, zero paths merged."""
        for k in range(self.n_paths):
            p = self.path(k)
            if p.is_zero:
                yield 2.0 * self.weights[k], p
            else:
                yield self.weights[k], p
                yield self.weights[k], p.mirrored()

    @property
    def n_atoms(self) -> int:
        return sum(1 for _ in self.atoms())

    def shifted(self, start: float) -> "CubatureMeasure":
        """The same measure on [start, start + horizon]."""
        return CubatureMeasure(self.weights, self.slopes, start, self.horizon)

    def rescaled(self, horizon: float, start: float = 0.0) -> "CubatureMeasure":
        """The same dimensionless measure on a different period length."""
        return CubatureMeasure(self.weights, self.slopes, start, horizon)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "slopes": self.slopes.tolist(),
            "start": self.start,
            "horizon": self.horizon,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CubatureMeasure":
        return cls(
            weights=np.asarray(d["weights"], dtype=float),
            slopes=np.asarray(d["slopes"], dtype=float),
            start=float(d.get("start", 0.0)),
            horizon=float(d["horizon"]),
        )


def save_measure(measure, path) -> None:
    with open(path, "w") as fh:
        json.dump(measure.to_dict(), fh, indent=2)


def load_measure(path):
    with open(path) as fh:
        d = json.load(fh)
    if "periods" in d:
        return ComposedMeasure.from_dict(d)
    return CubatureMeasure.from_dict(d)


@dataclass(frozen=True)
class ComposedPath:
    """Concatenation of per-period piecewise-linear paths."""

    paths: tuple

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        for a, b in zip(self.paths, self.paths[1:]):
            if abs(a.start + a.horizon - b.start) > 1e-12:
                raise ValueError("periods must be contiguous")

    @property
    def start(self) -> float:
        return self.paths[0].start

    @property
    def horizon(self) -> float:
        return sum(p.horizon for p in self.paths)

    @property
    def dim(self) -> int:
        return self.paths[0].dim

    def value(self, t) -> np.ndarray:
        """Path value at times t; per-period values clamp, so they add up."""
        return sum(p.value(t) for p in self.paths)


@dataclass(frozen=True)
class ComposedMeasure:
    """Independent composition of contiguous one-period measures."""

    periods: tuple

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(self.periods))
        if not self.periods:
            raise ValueError("at least one period required")
        for a, b in zip(self.periods, self.periods[1:]):
            if abs(a.start + a.horizon - b.start) > 1e-12:
                raise ValueError("periods must be contiguous")

    @property
    def n_periods(self) -> int:
        return len(self.periods)

    @property
    def start(self) -> float:
        return self.periods[0].start

    @property
    def horizon(self) -> float:
        return sum(m.horizon for m in self.periods)

    @property
    def dim(self) -> int:
        return self.periods[0].dim

    @property
    def n_atoms(self) -> int:
        n = 1
        for m in self.periods:
            n *= m.n_atoms
        return n

    def atoms(self):
        """Lazily yield (weight, ComposedPath) over all atom combinations."""
        per = [list(m.atoms()) for m in self.periods]
        for combo in product(*per):
            w = 1.0
            for lam, _ in combo:
                w *= lam
            yield w, ComposedPath(tuple(p for _, p in combo))

    def to_dict(self) -> dict:
        return {"periods": [m.to_dict() for m in self.periods]}

    @classmethod
    def from_dict(cls, d: dict) -> "ComposedMeasure":
        return cls(tuple(CubatureMeasure.from_dict(p) for p in d["periods"]))


def compose(measures) -> ComposedMeasure:
    """Compose contiguous one-period measures into a multi-period measure."""
    return ComposedMeasure(tuple(measures))


def replicate(measure: CubatureMeasure, n_periods: int) -> ComposedMeasure:
    """Compose n contiguous copies of a one-period measure."""
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    return ComposedMeasure(
        tuple(
            measure.shifted(measure.start + m * measure.horizon)
            for m in range(n_periods)
        )
    )


# ---------------------------------------------------------------------------
# Closed-form constructions
# ---------------------------------------------------------------------------


def build_1d_multi_n3(delta: float, start: float = 0.0) -> CubatureMeasure:
    """Order-3 one-dimensional multi-period measure: one path of slope 1."""
    return CubatureMeasure(
        weights=np.array([0.5]),
        slopes=np.array([[[1.0]]]),
        start=start,
        horizon=delta,
    )


def build_1d_multi_n5(
    delta: float, lambda1: float = 1.0 / 6.0, start: float = 0.0
) -> CubatureMeasure:
    """Order-5 one-dimensional multi-period measure (two paths plus mirrors).

    The one-parameter family with weights (lambda1, 1/2 - lambda1) and slopes

        a1^2 = 1 + sqrt(2 lambda2 / lambda1),
        a2^2 = 1 - sqrt(2 lambda1 / lambda2),

    which satisfies the order-5 moment conditions for any lambda1 in
    (0, 1/6].  The default lambda1 = 1/6 gives slopes (sqrt(3), 0), i.e.
    three atoms with weights (1/6, 2/3, 1/6) and slopes (sqrt(3), 0,
    -sqrt(3)).
    """
    if not 0.0 < lambda1 <= 1.0 / 6.0:
        raise ValueError("requires 0 < lambda1 <= 1/6")
    lambda2 = 0.5 - lambda1
    a1 = np.sqrt(1.0 + np.sqrt(2.0 * lambda2 / lambda1))
    a2sq = 1.0 - np.sqrt(2.0 * lambda1 / lambda2)
    a2 = -np.sqrt(a2sq) if a2sq > 1e-12 else 0.0
    return CubatureMeasure(
        weights=np.array([lambda1, lambda2]),
        slopes=np.array([[[a1]], [[a2]]]),
        start=start,
        horizon=delta,
    )


def build_1d_oneperiod_n3(
    kernel: Kernel, horizon: float, start: float = 0.0
) -> CubatureMeasure:
    """Order-3 one-dimensional single-period measure for a power-law kernel.

    Uses one path with two segments whose slopes solve the two kernel-weighted
    moment conditions in closed form (quadratic in the slope ratio).
    """
    if kernel.is_const:
        raise ValueError("use the multi-period construction for the constant kernel")
    from .moments import moment_targets_1d_oneperiod_n3

    H = kernel.hurst
    Hp = H + 0.5
    T = horizon
    conds = {c.label: c for c in moment_targets_1d_oneperiod_n3(kernel, T, start)}
    chained = conds["n2-chained"].specs[0]
    # The chained condition reads c1 a1^2 + c2 a1 a2 + c3 a2^2 = 0, where the
    # c_i are the cell integrals with both legs in the first segment, split
    # across segments, and both in the second segment respectively.
    coefs = {}
    for c, factors in cell_coefficients(chained, 2):
        segs = tuple(sorted(seg for seg, _ in factors))
        coefs[segs] = coefs.get(segs, 0.0) + c
    c1 = coefs.get((0, 0), 0.0)
    c2 = coefs.get((0, 1), 0.0)
    c3 = coefs.get((1, 1), 0.0)
    disc = c2 * c2 - 4.0 * c1 * c3
    if disc < 0:
        raise ValueError("construction failed: negative discriminant")
    c4 = (-c2 + np.sqrt(disc)) / (2.0 * c3)
    two_pow = 2.0**Hp
    a1 = Hp * two_pow / (np.sqrt(2.0 * H) * (two_pow + c4 - 1.0))
    a2 = c4 * a1
    return CubatureMeasure(
        weights=np.array([0.5]),
        slopes=np.array([[[a1], [a2]]]),
        start=start,
        horizon=T,
    )


def build_2d_multi_n3(
    delta: float, rho: float, theta1: float | None = None, start: float = 0.0
) -> CubatureMeasure:
    """Order-3 two-dimensional multi-period measure for correlation rho.

    Two paths (plus mirrors) with weight 1/4 each and slopes
    sqrt(2)(sin t1, sin t2) and sqrt(2)(cos t1, cos t2) with
    t2 = t1 - arccos(rho); the default t1 = pi/6 reproduces the standard
    choice at rho = 1/2.
    """
    if abs(rho) > 1.0:
        raise ValueError("correlation must satisfy |rho| <= 1")
    if theta1 is None:
        theta1 = np.pi / 6.0
    theta2 = theta1 - np.arccos(rho)
    r2 = np.sqrt(2.0)
    slopes = np.array(
        [
            [[r2 * np.sin(theta1), r2 * np.sin(theta2)]],
            [[r2 * np.cos(theta1), r2 * np.cos(theta2)]],
        ]
    )
    return CubatureMeasure(
        weights=np.array([0.25, 0.25]),
        slopes=slopes,
        start=start,
        horizon=delta,
    )


# ---------------------------------------------------------------------------
# Moment systems
# ---------------------------------------------------------------------------


class MomentSystem:
    """A system of moment conditions in the unknowns (weights, slopes).

    Precomputes, for each condition, the cell polynomial of every underlying
    integral spec, so candidate measures can be scored cheaply during
    optimization.

    Parameters
    ----------
    conditions : sequence of MomentCondition
    n_paths, n_segments, dim : int
        Unknown layout (W, L, d).
    """

    def __init__(self, conditions, n_paths: int, n_segments: int, dim: int):
        self.conditions = tuple(conditions)
        self.n_paths = int(n_paths)
        self.n_segments = int(n_segments)
        self.dim = int(dim)
        if self.n_paths < 1 or self.n_segments < 1 or self.dim < 1:
            raise ValueError("layout entries must be positive")
        self._rows = []
        for cond in self.conditions:
            if cond.is_weight:
                self._rows.append(("weight", cond.target))
                continue
            terms = []
            parity = None
            for spec in cond.specs:
                n_driv = sum(1 for j in spec.word if j > 0)
                if parity is None:
                    parity = n_driv % 2
                elif parity != n_driv % 2:
                    raise ValueError("mixed driver parity within one condition")
                if any(j > self.dim for j in spec.word):
                    raise ValueError("spec dimension exceeds system layout")
                terms.extend(cell_coefficients(spec, self.n_segments))
            # group terms by degree into flat (coef, segment, driver) arrays
            by_deg: dict = {}
            for coef, factors in terms:
                by_deg.setdefault(len(factors), []).append((coef, factors))
            groups = []
            for deg, items in by_deg.items():
                coefs = np.array([c for c, _ in items])
                segs = np.array([[f[0] for f in fs] for _, fs in items], dtype=int)
                drvs = np.array([[f[1] for f in fs] for _, fs in items], dtype=int)
                groups.append((deg, coefs, segs.reshape(len(items), deg),
                               drvs.reshape(len(items), deg)))
            self._rows.append(("poly", groups, parity, cond.target))

    @property
    def n_equations(self) -> int:
        return len(self.conditions)

    @property
    def n_unknowns(self) -> int:
        return self.n_paths * (1 + self.n_segments * self.dim)

    @property
    def targets(self) -> np.ndarray:
        return np.array([c.target for c in self.conditions])

    def lhs(self, weights: np.ndarray, slopes: np.ndarray) -> np.ndarray:
        """Left-hand sides at a candidate (weights (W,), slopes (W, L, d)).

        Mirrors are accounted for analytically: odd-driver conditions
        contribute zero, even-driver ones twice the stored-path value.
        """
        weights = np.asarray(weights, dtype=float)
        slopes = np.asarray(slopes, dtype=float)
        out = np.empty(len(self._rows))
        for e, row in enumerate(self._rows):
            if row[0] == "weight":
                out[e] = 2.0 * weights.sum()
                continue
            _, groups, parity, _ = row
            if parity == 1:
                # mirror cancels the stored path exactly
                out[e] = 0.0
                continue
            val = 0.0
            for deg, coefs, segs, drvs in groups:
                if deg == 0:
                    val += 2.0 * weights.sum() * coefs.sum()
                    continue
                # slope products per path: (W, nterms)
                prods = slopes[:, segs, drvs].prod(axis=2)
                val += 2.0 * weights @ (prods @ coefs)
            out[e] = val
        return out

    def lhs_and_jacobian(self, weights: np.ndarray, slopes: np.ndarray):
        """Left-hand sides and their Jacobian in (weights, slopes.ravel()).

        Returns ``(lhs, jac)`` with ``jac`` of shape
        ``(n_equations, W + W*L*d)``; the slope block is ordered like
        ``slopes.ravel()``.
        """
        weights = np.asarray(weights, dtype=float)
        slopes = np.asarray(slopes, dtype=float)
        W, L, d = self.n_paths, self.n_segments, self.dim
        n_eq = len(self._rows)
        lhs = np.empty(n_eq)
        jac = np.zeros((n_eq, W + W * L * d))
        for e, row in enumerate(self._rows):
            if row[0] == "weight":
                lhs[e] = 2.0 * weights.sum()
                jac[e, :W] = 2.0
                continue
            _, groups, parity, _ = row
            if parity == 1:
                lhs[e] = 0.0
                continue
            val = 0.0
            for deg, coefs, segs, drvs in groups:
                if deg == 0:
                    val += 2.0 * weights.sum() * coefs.sum()
                    jac[e, :W] += 2.0 * coefs.sum()
                    continue
                terms = slopes[:, segs, drvs]  # (W, nT, deg)
                prods = terms.prod(axis=2)  # (W, nT)
                pv = prods @ coefs  # (W,)
                val += 2.0 * weights @ pv
                jac[e, :W] += 2.0 * pv
                for m in range(deg):
                    others = np.delete(terms, m, axis=2).prod(axis=2)  # (W, nT)
                    loo = others * coefs  # (W, nT)
                    for k in range(W):
                        g = np.zeros((L, d))
                        np.add.at(g, (segs[:, m], drvs[:, m]), loo[k])
                        jac[e, W + k * L * d : W + (k + 1) * L * d] += (
                            2.0 * weights[k] * g.ravel()
                        )
            lhs[e] = val
        return lhs, jac

    def residuals(self, weights: np.ndarray, slopes: np.ndarray) -> np.ndarray:
        return self.lhs(weights, slopes) - self.targets

    def relative_residuals(self, weights: np.ndarray, slopes: np.ndarray) -> np.ndarray:
        """Residuals scaled by |target|, or for zero targets by the largest
        |target| among conditions of the same depth."""
        res = self.residuals(weights, slopes)
        return res / self._scales()

    def _scales(self) -> np.ndarray:
        targets = self.targets
        depths = []
        for cond in self.conditions:
            depths.append(max((s.depth for s in cond.specs), default=0))
        depths = np.asarray(depths)
        scales = np.abs(targets).astype(float)
        for e in range(len(scales)):
            if scales[e] == 0.0:
                same = np.abs(targets[depths == depths[e]])
                fallback = same.max() if same.size and same.max() > 0 else 1.0
                scales[e] = fallback
        return scales

    def verify(self, measure: CubatureMeasure, rtol: float = 1e-12):
        """Per-condition report for a concrete measure via direct expectation.

        Returns a list of dicts with label, lhs, target, and residuals.
        Unlike :meth:`lhs`, this integrates every atom path directly and so
        also exercises the mirror/merging logic of the measure itself.
        """
        from .paths import measure_expectation

        report = []
        for cond in self.conditions:
            if cond.is_weight:
                val = sum(w for w, _ in measure.atoms())
            else:
                val = sum(
                    measure_expectation(spec, measure, rtol=rtol)
                    for spec in cond.specs
                )
            report.append(
                {
                    "label": cond.label,
                    "lhs": val,
                    "target": cond.target,
                    "residual": val - cond.target,
                }
            )
        scales = self._scales()
        for entry, s in zip(report, scales):
            entry["relative"] = entry["residual"] / s
        return report
