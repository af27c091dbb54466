"""Exact Wiener-measure moments of kernel-weighted iterated Stratonovich integrals.

The central object is :class:`IteratedIntegralSpec`, describing

    int_{start <= t_n <= ... <= t_1 <= end}
        prod_l K_{(l)}(t_{kappa_l}, t_l) * prod_l (t_l - start)**alpha_l
        o dB^{j_n}_{t_n} ... o dB^{j_1}_{t_1},

where t_0 denotes the right endpoint of the interval, the word letter j_l = 0
marks a plain dt leg, and the anchors satisfy kappa_l < l.

Expectations under the Wiener measure follow from the Stratonovich pairing
rule: processing legs from the outside in, a dt leg survives as a time
variable, while a driver leg must pair with the *next* leg.  The pair merges
into a single time variable and contributes a factor rho_{j1 j2} / 2 (the
driver correlation; identity for independent drivers); if the next leg is a
dt leg or uncorrelated, the whole expectation vanishes.  What remains is a
deterministic simplex integral, evaluated by nested Gauss-Legendre rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import special

from .kernels import Kernel, power_kernel, const_kernel
from .quadrature import simplex_quad


def beta_integral(alpha: float, beta: float) -> float:
    """Euler integral int_0^1 (1-t)**(alpha-1) t**(beta-1) dt."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("beta integral requires positive exponents")
    return float(special.beta(alpha, beta))


@dataclass(frozen=True)
class KernelFactor:
    """A factor K(t_anchor, t_leg); anchor 0 denotes the interval end."""

    kernel: Kernel
    anchor: int
    leg: int

    def __post_init__(self):
        if self.leg < 1:
            raise ValueError("leg index must be >= 1")
        if not 0 <= self.anchor < self.leg:
            raise ValueError("anchor must precede the leg (0 = interval end)")


@dataclass(frozen=True)
class IteratedIntegralSpec:
    """A kernel-weighted iterated Stratonovich integral over a simplex.

    Attributes
    ----------
    word : tuple of int
        Driver indices, outermost leg first; 0 marks a dt leg.
    factors : tuple of KernelFactor
        Kernel factors K(t_anchor, t_leg).
    monomials : tuple of int
        Exponent of (t_l - start) per leg (all zero if omitted).
    interval : (float, float)
        Integration interval (start, end).
    """

    word: tuple[int, ...]
    factors: tuple[KernelFactor, ...] = ()
    monomials: tuple[int, ...] = ()
    interval: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        n = len(self.word)
        if n == 0:
            raise ValueError("empty word")
        if any(j < 0 for j in self.word):
            raise ValueError("word letters must be >= 0")
        if self.monomials and len(self.monomials) != n:
            raise ValueError("monomials must have one exponent per leg")
        if not self.monomials:
            object.__setattr__(self, "monomials", (0,) * n)
        for f in self.factors:
            if f.leg > n:
                raise ValueError("factor leg index exceeds word length")
        if not self.interval[1] > self.interval[0]:
            raise ValueError("interval must have positive length")

    @property
    def depth(self) -> int:
        return len(self.word)

    @property
    def weight(self) -> int:
        """The order weight: number of legs plus number of dt legs."""
        return len(self.word) + sum(1 for j in self.word if j == 0)

    @property
    def drivers(self) -> tuple[int, ...]:
        return tuple(sorted({j for j in self.word if j > 0}))


class MomentValue(NamedTuple):
    value: float
    method: str  # "analytic" (polynomial integrand, rule exact) or "quadrature"
    error: float


def _reduce_to_time_integral(spec: IteratedIntegralSpec, corr: np.ndarray | None):
    """Apply the pairing rule; return (coef, variables, factors, monomials) or None.

    ``variables`` is the list of surviving leg labels in descending time
    order.  ``None`` means the expectation vanishes identically.
    """
    legs = [(l + 1, j) for l, j in enumerate(spec.word)]
    factors = [[f.kernel, f.anchor, f.leg] for f in spec.factors]
    monos = {l + 1: e for l, e in enumerate(spec.monomials) if e}
    coef = 1.0
    variables: list[int] = []
    pos = 0
    while pos < len(legs):
        label, j = legs[pos]
        if j == 0:
            variables.append(label)
            pos += 1
            continue
        if pos + 1 >= len(legs):
            return None
        label2, j2 = legs[pos + 1]
        if j2 == 0:
            return None
        rho = 1.0 if corr is None else float(corr[j - 1, j2 - 1])
        if j != j2 and corr is None:
            return None
        if rho == 0.0:
            return None
        coef *= 0.5 * rho
        for f in factors:
            if f[1] == label:
                f[1] = label2
            if f[2] == label:
                f[2] = label2
        if label in monos:
            monos[label2] = monos.get(label2, 0) + monos.pop(label)
        variables.append(label2)
        pos += 2
    # factors that collapsed onto the diagonal contribute K(t, t)
    live = []
    for kern, anchor, leg in factors:
        if anchor == leg:
            coef *= kern.diagonal_value()
        else:
            live.append((kern, anchor, leg))
    if coef == 0.0:
        return None
    return coef, variables, live, monos


def _is_polynomial(factors, monos) -> bool:
    return all(float(k.exponent).is_integer() for k, _, _ in factors)


def wiener_expectation(
    spec: IteratedIntegralSpec,
    corr: np.ndarray | None = None,
    rtol: float = 1e-12,
) -> MomentValue:
    """Expectation of ``spec`` under the Wiener measure.

    Parameters
    ----------
    spec : IteratedIntegralSpec
    corr : array or None
        Driver correlation matrix; ``None`` means independent drivers.
    rtol : float
        Relative tolerance for the quadrature escalation.
    """
    reduced = _reduce_to_time_integral(spec, corr)
    if reduced is None:
        return MomentValue(0.0, "analytic", 0.0)
    coef, variables, factors, monos = reduced
    if not variables:
        return MomentValue(coef, "analytic", 0.0)
    start, end = spec.interval
    idx = {label: k for k, label in enumerate(variables)}

    def integrand(ts):
        val = np.asarray(1.0)
        for kern, anchor, leg in factors:
            upper = end if anchor == 0 else ts[idx[anchor]]
            val = val * kern(upper, ts[idx[leg]])
        for label, e in monos.items():
            val = val * (ts[idx[label]] - start) ** e
        return val

    bounds = [(start, end)] + [(start, None)] * (len(variables) - 1)
    value, err = simplex_quad(integrand, bounds, rtol=rtol)
    method = "analytic" if _is_polynomial(factors, monos) else "quadrature"
    return MomentValue(coef * value, method, abs(coef) * err)


# ---------------------------------------------------------------------------
# Moment conditions: the matching equations a cubature measure must satisfy.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentCondition:
    """One matching equation: sum of measure expectations of ``specs`` = target.

    ``is_weight`` marks the normalisation constraint (total atom mass = 1),
    which carries no integral specs.
    """

    label: str
    specs: tuple[IteratedIntegralSpec, ...]
    target: float
    is_weight: bool = False


def _weight_condition() -> MomentCondition:
    return MomentCondition("weight-sum", (), 1.0, is_weight=True)


def _require_power(kernel: Kernel):
    if kernel.is_const:
        raise ValueError("one-period moment targets require a power-law kernel")


def moment_targets_1d_oneperiod_n3(
    kernel: Kernel, horizon: float, start: float = 0.0
) -> list[MomentCondition]:
    """Order-3 one-period conditions for a scalar state with power-law kernel.

    Two conditions on the second-order integrals, with kernel factors anchored
    at the interval end and at the outer leg respectively.
    """
    _require_power(kernel)
    H = kernel.hurst
    T = horizon
    end = start + T
    iv = (start, end)
    k00 = IteratedIntegralSpec(
        word=(1, 1),
        factors=(KernelFactor(kernel, 0, 1), KernelFactor(kernel, 0, 2)),
        interval=iv,
    )
    k01 = IteratedIntegralSpec(
        word=(1, 1),
        factors=(KernelFactor(kernel, 0, 1), KernelFactor(kernel, 1, 2)),
        interval=iv,
    )
    return [
        MomentCondition("n2-anchored-end", (k00,), T ** (2 * H) / (4 * H)),
        MomentCondition("n2-chained", (k01,), 0.0),
    ]


#: anchor patterns of the order-4 kernel products, grouped so that every
#: group shares the same coefficient functional in the Taylor expansion
_QUARTIC_GROUPS: tuple[tuple[tuple[int, int, int, int], ...], ...] = (
    ((0, 0, 0, 0),),
    ((0, 0, 0, 1), (0, 0, 1, 0), (0, 1, 0, 0), (0, 0, 0, 2), (0, 0, 2, 0), (0, 0, 0, 3)),
    ((0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0), (0, 0, 2, 2)),
    ((0, 0, 1, 2), (0, 0, 2, 1), (0, 0, 1, 3), (0, 0, 2, 3), (0, 1, 0, 2), (0, 1, 2, 0), (0, 1, 0, 3)),
    ((0, 1, 1, 1),),
    ((0, 1, 1, 2), (0, 1, 2, 1), (0, 1, 2, 2), (0, 1, 1, 3)),
    ((0, 1, 2, 3),),
)


def quartic_anchor_groups() -> tuple[tuple[tuple[int, int, int, int], ...], ...]:
    """The seven anchor-pattern groups of the order-4 scalar conditions."""
    return _QUARTIC_GROUPS


def moment_targets_1d_oneperiod_n5(
    kernel: Kernel, horizon: float, start: float = 0.0
) -> list[MomentCondition]:
    """Order-5 one-period conditions for a scalar state with power-law kernel.

    Ten conditions: the weight-sum constraint, the two order-3 conditions,
    and seven grouped fourth-order conditions (anchor patterns sharing a
    coefficient functional are summed into one equation).
    """
    _require_power(kernel)
    H = kernel.hurst
    Hp = H + 0.5
    T = horizon
    iv = (start, start + T)
    conditions = [_weight_condition()]
    conditions += moment_targets_1d_oneperiod_n3(kernel, horizon, start)
    gamma = [
        T ** (4 * H) / (32 * H**2),
        T ** (4 * H) / (4 * H) * beta_integral(2 * H, Hp),
        T ** (4 * H) / (4 * H) * beta_integral(2 * H, 2 * Hp),
        T ** (4 * H) / (4 * H) * beta_integral(2 * H, 2 * Hp),
        0.0,
        0.0,
        0.0,
    ]
    for g, (group, target) in enumerate(zip(_QUARTIC_GROUPS, gamma), start=1):
        specs = tuple(
            IteratedIntegralSpec(
                word=(1, 1, 1, 1),
                factors=tuple(
                    KernelFactor(kernel, kappa[l], l + 1) for l in range(4)
                ),
                interval=iv,
            )
            for kappa in group
        )
        conditions.append(MomentCondition(f"n4-group-{g}", specs, target))
    return conditions


def moment_targets_1d_multi_n3(delta: float, start: float = 0.0) -> list[MomentCondition]:
    """Order-3 per-period condition for one driver (kernel-free)."""
    iv = (start, start + delta)
    spec = IteratedIntegralSpec(word=(1, 1), interval=iv)
    return [MomentCondition("n2-plain", (spec,), delta / 2)]


def moment_targets_1d_multi_n5(delta: float, start: float = 0.0) -> list[MomentCondition]:
    """Order-5 per-period conditions for one driver (kernel-free).

    Three conditions: the plain second-order integral, the merged pair of
    time-weighted second-order integrals, and the plain fourth-order integral.
    """
    iv = (start, start + delta)
    plain = IteratedIntegralSpec(word=(1, 1), interval=iv)
    weighted = (
        IteratedIntegralSpec(word=(1, 1), monomials=(1, 0), interval=iv),
        IteratedIntegralSpec(word=(1, 1), monomials=(0, 1), interval=iv),
    )
    quartic = IteratedIntegralSpec(word=(1, 1, 1, 1), interval=iv)
    return [
        MomentCondition("n2-plain", (plain,), delta / 2),
        MomentCondition("n2-time-weighted", weighted, delta**2 / 2),
        MomentCondition("n4-plain", (quartic,), delta**2 / 8),
    ]


def moment_targets_2d_multi_n3(
    delta: float, rho: float, start: float = 0.0
) -> list[MomentCondition]:
    """Order-3 per-period conditions for two correlated drivers (kernel-free)."""
    iv = (start, start + delta)

    def cond(j1, j2, target):
        spec = IteratedIntegralSpec(word=(j1, j2), interval=iv)
        return MomentCondition(f"n2-drivers-{j1}{j2}", (spec,), target)

    return [
        cond(1, 1, delta / 2),
        cond(2, 2, delta / 2),
        cond(1, 2, rho * delta / 2),
        cond(2, 1, rho * delta / 2),
    ]


#: index tuples (i1, i2, i3, kappa2, kappa3) of the third-order volatility terms
_2D_SIGMA3_TUPLES: tuple[tuple[int, int, int, int, int], ...] = (
    (1, 1, 1, 1, 1), (1, 1, 2, 1, 1), (1, 1, 2, 1, 2), (1, 1, 2, 1, 3),
    (1, 2, 1, 1, 1), (1, 2, 1, 2, 1), (1, 2, 2, 1, 1), (1, 2, 2, 1, 2),
    (1, 2, 2, 1, 3), (1, 2, 2, 2, 1), (1, 2, 2, 2, 2), (1, 2, 2, 2, 3),
    (2, 1, 1, 1, 1), (2, 1, 2, 1, 1), (2, 1, 2, 1, 2), (2, 1, 2, 1, 3),
    (2, 2, 1, 1, 1), (2, 2, 1, 2, 1), (2, 2, 2, 1, 1), (2, 2, 2, 1, 2),
    (2, 2, 2, 1, 3), (2, 2, 2, 2, 1), (2, 2, 2, 2, 2), (2, 2, 2, 2, 3),
)

_2D_PAIR_TUPLES: tuple[tuple[int, int, int], ...] = (
    (1, 1, 1), (1, 2, 1), (1, 2, 2), (2, 1, 1), (2, 2, 1), (2, 2, 2),
)


def moment_targets_2d_oneperiod_n5(
    hurst: float,
    horizon: float,
    rho: float,
    homogeneous: bool = True,
    start: float = 0.0,
    legacy_inner_targets: bool = False,
) -> list[MomentCondition]:
    """Order-5 one-period conditions for the two-driver price/volatility model.

    State 1 carries the constant kernel, state 2 the power-law kernel with
    index ``hurst``; the drivers have correlation ``rho``.  For homogeneous
    (time-independent) coefficients the two drift-free third-order terms drop
    out, leaving 45 conditions including the weight-sum constraint; with
    ``homogeneous=False`` they are kept (47 conditions).

    ``legacy_inner_targets`` switches the two mixed inner-dt conditions
    (i1, i2, kappa2) = (1, 2, 1) and (1, 2, 2) to the commonly tabulated
    values rho*gamma1/2 and 0 instead of the self-consistent value gamma1/2
    shared by both (the value the expectation recursion produces).
    """
    T = horizon
    H = hurst
    Hp = H + 0.5
    iv = (start, start + T)
    kern = {1: const_kernel(), 2: power_kernel(H)}
    gamma1 = T ** (Hp + 1) / (Hp * (Hp + 1))
    gamma2 = T ** (2 * Hp) / (8 * H * Hp)
    conditions = [_weight_condition()]

    # second-order terms
    for i in (1, 2):
        spec = IteratedIntegralSpec(
            word=(1, i), factors=(KernelFactor(kern[i], 1, 2),), interval=iv
        )
        target = T / 2 if i == 1 else 0.0
        conditions.append(MomentCondition(f"n2-vol-{i}", (spec,), target))

    # fourth-order terms from the drift expansion: dt leg outermost
    drift_targets = {
        (1, 1, 1): T**2 / 4,
        (1, 2, 1): rho * gamma1 / 2,
        (2, 1, 1): rho * gamma1 / 2,
        (2, 2, 1): gamma2,
        (1, 2, 2): 0.0,
        (2, 2, 2): 0.0,
    }
    for (i, j, k) in _2D_PAIR_TUPLES:
        spec = IteratedIntegralSpec(
            word=(0, i, j),
            factors=(KernelFactor(kern[i], 1, 2), KernelFactor(kern[j], k, 3)),
            interval=iv,
        )
        conditions.append(
            MomentCondition(f"n4-drift-{i}{j}{k}", (spec,), drift_targets[(i, j, k)])
        )

    if not homogeneous:
        for i2 in (1, 2):
            spec = IteratedIntegralSpec(
                word=(1, 0, i2),
                factors=(KernelFactor(kern[i2], 1, 3),),
                interval=iv,
            )
            conditions.append(MomentCondition(f"n4-vol-t-{i2}", (spec,), 0.0))

    # fourth-order terms from the volatility expansion, inner dt leg
    for (i1, i2, k2) in _2D_PAIR_TUPLES:
        spec = IteratedIntegralSpec(
            word=(1, 0, i2),
            factors=(KernelFactor(kern[i1], 1, 2), KernelFactor(kern[i2], k2, 3)),
            interval=iv,
        )
        conditions.append(MomentCondition(f"n4-vol-mid-{i1}{i2}{k2}", (spec,), 0.0))

    sigma2_targets = {
        (1, 1, 1): T**2 / 4,
        (1, 2, 1): rho * gamma1 / 2 if legacy_inner_targets else gamma1 / 2,
        (1, 2, 2): 0.0 if legacy_inner_targets else gamma1 / 2,
        (2, 1, 1): 0.0,
        (2, 2, 1): 0.0,
        (2, 2, 2): 0.0,
    }
    for (i1, i2, k2) in _2D_PAIR_TUPLES:
        spec = IteratedIntegralSpec(
            word=(1, i1, 0),
            factors=(KernelFactor(kern[i1], 1, 2), KernelFactor(kern[i2], k2, 3)),
            interval=iv,
        )
        conditions.append(
            MomentCondition(f"n4-vol-inner-{i1}{i2}{k2}", (spec,), sigma2_targets[(i1, i2, k2)])
        )

    # fourth-order terms from the third-order volatility expansion
    for (i1, i2, i3, k2, k3) in _2D_SIGMA3_TUPLES:
        if i1 == 2 or (i3, k3) == (2, 3):
            target = 0.0
        elif (i1, i2, i3) == (1, 1, 1):
            target = T**2 / 8
        elif (i1, i2, i3) == (1, 2, 1) or ((i1, i2, i3) == (1, 1, 2) and k3 in (1, 2)):
            target = rho * gamma1 / 4
        elif (i1, i2, i3) == (1, 2, 2) and k3 in (1, 2):
            target = gamma2 / 2
        else:  # pragma: no cover - enumeration above is exhaustive
            raise AssertionError((i1, i2, i3, k2, k3))
        spec = IteratedIntegralSpec(
            word=(1, i1, i2, i3),
            factors=(
                KernelFactor(kern[i1], 1, 2),
                KernelFactor(kern[i2], k2, 3),
                KernelFactor(kern[i3], k3, 4),
            ),
            interval=iv,
        )
        conditions.append(
            MomentCondition(f"n4-vol3-{i1}{i2}{i3}-{k2}{k3}", (spec,), target)
        )
    return conditions
