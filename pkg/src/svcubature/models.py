"""SVIE model descriptions, coefficient families, payoffs, and hypothesis checks.

A model is the data of the equation

    X^i_t = x_i + sum_j int_0^t K_i(t, r) V^i_j(X_r) o dB^j_r,   i = 1..d1,

with V^i_0 the drift coefficient (against dt), a kernel per state, and a
driver correlation matrix.  Coefficients are plain callables, vectorised over
leading axes of the state array; a small closed set of built-in families
covers the models used in the numerical studies and is what the JSON model
files can reference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .kernels import Kernel, const_kernel, power_kernel


# ---------------------------------------------------------------------------
# Coefficient families
# ---------------------------------------------------------------------------

_FAMILIES = {
    "zero": lambda u, p: np.zeros_like(u),
    "const": lambda u, p: np.full_like(u, p.get("c", 1.0)),
    "identity": lambda u, p: u,
    "cos": lambda u, p: np.cos(u),
    "sqrt": lambda u, p: np.sqrt(np.maximum(u, 0.0)),
    "affine": lambda u, p: p.get("c0", 0.0) + p.get("c1", 1.0) * u,
}


@dataclass(frozen=True)
class Coefficient:
    """A coefficient V(x) = family(x[arg]) * (x[mul_state] if given).

    The optional multiplicative state covers price-type coefficients such as
    S * cos(U).
    """

    family: str
    arg: int = 0
    mul_state: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown coefficient family {self.family!r}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = _FAMILIES[self.family](x[..., self.arg], self.params)
        if self.mul_state is not None:
            v = v * x[..., self.mul_state]
        return v

    def to_dict(self) -> dict:
        d: dict = {"family": self.family, "arg": self.arg}
        if self.mul_state is not None:
            d["mul_state"] = self.mul_state
        if self.params:
            d["params"] = self.params
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Coefficient":
        return cls(
            family=d["family"],
            arg=d.get("arg", 0),
            mul_state=d.get("mul_state"),
            params=d.get("params", {}),
        )


def zero_coefficient() -> Coefficient:
    return Coefficient("zero")


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SVIEModel:
    """An SVIE with d drivers and d1 states.

    Attributes
    ----------
    kernels : list of Kernel
        One kernel per state.
    coeffs : list of list of callables
        coeffs[i][j] = V^i_j, i = 0..d1-1 states, j = 0..d (0 is the drift).
        Each callable maps state arrays of shape (..., d1) to (...).
    corr : ndarray, shape (d, d)
        Driver correlation matrix.
    x0 : ndarray, shape (d1,)
        Initial state.
    """

    kernels: tuple[Kernel, ...]
    coeffs: tuple[tuple, ...]
    corr: np.ndarray
    x0: np.ndarray
    name: str = ""

    def __post_init__(self):
        corr = np.atleast_2d(np.asarray(self.corr, dtype=float))
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "corr", corr)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "kernels", tuple(self.kernels))
        object.__setattr__(self, "coeffs", tuple(tuple(row) for row in self.coeffs))
        d1 = len(self.kernels)
        if x0.shape != (d1,):
            raise ValueError("x0 length must match the number of states")
        if len(self.coeffs) != d1:
            raise ValueError("one coefficient row per state required")
        d = corr.shape[0]
        if corr.shape != (d, d):
            raise ValueError("corr must be square")
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise ValueError("corr must be symmetric")
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
            raise ValueError("corr must have unit diagonal")
        if np.min(np.linalg.eigvalsh(corr)) < -1e-10:
            raise ValueError("corr must be positive semidefinite")
        for i, row in enumerate(self.coeffs):
            if len(row) != d + 1:
                raise ValueError(f"state {i}: expected {d + 1} coefficients (drift + d)")
            for j, c in enumerate(row):
                v = np.asarray(c(x0))
                if not np.all(np.isfinite(v)):
                    raise ValueError(f"coefficient V^{i}_{j} non-finite at x0")

    @property
    def n_drivers(self) -> int:
        return self.corr.shape[0]

    @property
    def n_states(self) -> int:
        return len(self.kernels)

    @property
    def semimartingale_states(self) -> tuple[int, ...]:
        """States carrying the constant kernel (the set needing Ito corrections)."""
        return tuple(i for i, k in enumerate(self.kernels) if k.is_const)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "drivers": self.n_drivers,
            "states": self.n_states,
            "kernels": [k.to_dict() for k in self.kernels],
            "coeffs": [[c.to_dict() for c in row] for row in self.coeffs],
            "corr": self.corr.tolist(),
            "x0": self.x0.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SVIEModel":
        return cls(
            kernels=tuple(Kernel.from_dict(k) for k in d["kernels"]),
            coeffs=tuple(
                tuple(Coefficient.from_dict(c) for c in row) for row in d["coeffs"]
            ),
            corr=np.asarray(d["corr"], dtype=float),
            x0=np.asarray(d["x0"], dtype=float),
            name=d.get("name", ""),
        )


def save_model(model: SVIEModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh, indent=2)


def load_model(path) -> SVIEModel:
    with open(path) as fh:
        return SVIEModel.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Built-in models
# ---------------------------------------------------------------------------


def linear_1d(hurst: float, x0: float = 0.0) -> SVIEModel:
    """Scalar SVIE with power-law kernel and V == 1 (Gaussian terminal law)."""
    return SVIEModel(
        kernels=(power_kernel(hurst),),
        coeffs=((zero_coefficient(), Coefficient("const")),),
        corr=np.eye(1),
        x0=np.array([x0]),
        name="1d-linear",
    )


def cos_1d(hurst: float, x0: float = 0.0) -> SVIEModel:
    """Scalar SVIE with power-law kernel and V(x) = cos(x)."""
    return SVIEModel(
        kernels=(power_kernel(hurst),),
        coeffs=((zero_coefficient(), Coefficient("cos")),),
        corr=np.eye(1),
        x0=np.array([x0]),
        name="1d-cos",
    )


def volatility_2d(
    hurst: float = 1.5,
    rho: float = 0.5,
    s0: float = 1.0,
    u0: float = 1.0,
    b1: str = "identity",
    sigma1: str = "cos",
    sigma2: str = "cos",
) -> SVIEModel:
    """Price/volatility model: dS = S b1(U) dt + S sigma1(U) o dB^1,
    U = u0 + int (t-s)^{H-1/2} [1/2 - U/3] ds + int (t-s)^{H-1/2} sigma2(U) o dB^2.

    State 0 is the price S (constant kernel), state 1 the volatility factor U
    (power-law kernel). ``b1``/``sigma1``/``sigma2`` name coefficient families
    applied to U.
    """
    return SVIEModel(
        kernels=(const_kernel(), power_kernel(hurst)),
        coeffs=(
            (
                Coefficient(b1, arg=1, mul_state=0),
                Coefficient(sigma1, arg=1, mul_state=0),
                zero_coefficient(),
            ),
            (
                Coefficient("affine", arg=1, params={"c0": 0.5, "c1": -1.0 / 3.0}),
                zero_coefficient(),
                Coefficient(sigma2, arg=1),
            ),
        ),
        corr=np.array([[1.0, rho], [rho, 1.0]]),
        x0=np.array([s0, u0]),
        name="2d-volatility",
    )


_BUILTIN_MODELS = {
    "1d-linear": lambda **kw: linear_1d(**kw),
    "1d-cos": lambda **kw: cos_1d(**kw),
    "2d-volatility": lambda **kw: volatility_2d(**kw),
}


def builtin_model(name: str, **kwargs) -> SVIEModel:
    if name not in _BUILTIN_MODELS:
        raise ValueError(f"unknown builtin model {name!r}; choices: {sorted(_BUILTIN_MODELS)}")
    return _BUILTIN_MODELS[name](**kwargs)


# ---------------------------------------------------------------------------
# Payoffs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Payoff:
    """A payoff G reading one state coordinate of the terminal state.

    ``kinks`` lists points where G is not smooth (used by the Gaussian
    oracle's quadrature and by hypothesis validation warnings).
    """

    fn: object
    name: str
    read_index: int = 0
    kinks: tuple[float, ...] = ()

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.fn(x[..., self.read_index]))

    def scalar(self, v):
        """Apply G directly to the read coordinate value."""
        return self.fn(np.asarray(v, dtype=float))


def payoff_cos(read_index: int = 0) -> Payoff:
    return Payoff(np.cos, "cos", read_index)


def payoff_square(read_index: int = 0) -> Payoff:
    return Payoff(lambda v: v**2, "square", read_index)


def payoff_call(strike: float, read_index: int = 0) -> Payoff:
    return Payoff(
        lambda v: np.maximum(v - strike, 0.0),
        f"call-{strike:g}",
        read_index,
        kinks=(strike,),
    )


def builtin_payoff(name: str, read_index: int = 0, strike: float = 0.5) -> Payoff:
    if name == "cos":
        return payoff_cos(read_index)
    if name in ("square", "x2"):
        return payoff_square(read_index)
    if name == "call":
        return payoff_call(strike, read_index)
    raise ValueError(f"unknown payoff {name!r}; choices: cos, square, call")


# ---------------------------------------------------------------------------
# Hypothesis validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    """Advisory regularity report for a planned cubature order."""

    order: int
    entries: tuple[dict, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.warnings


def validate_hypotheses(model: SVIEModel, order: int) -> HypothesisReport:
    """Check kernel regularity against the requested cubature order.

    The base hypothesis (H > 1/2 for power-law kernels) is enforced at kernel
    construction.  For the multi-period order-N construction the kernels need
    H > N/2; a violation degrades accuracy but is not an error, so it is
    reported as a warning.
    """
    if order % 2 == 0:
        raise ValueError("cubature order must be odd")
    threshold = order / 2.0
    entries = []
    warnings = []
    for i, k in enumerate(model.kernels):
        if k.is_const:
            entries.append({"state": i, "kernel": "one", "base": True, "order_ok": True})
            continue
        ok = k.hurst > threshold
        entries.append(
            {"state": i, "kernel": "power", "hurst": k.hurst, "base": True, "order_ok": ok}
        )
        if not ok:
            warnings.append(
                f"state {i}: H = {k.hurst:g} <= {threshold:g}; the order-{order} "
                "multi-period construction may lose accuracy"
            )
    return HypothesisReport(order, tuple(entries), tuple(warnings))
