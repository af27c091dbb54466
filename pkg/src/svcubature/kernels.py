"""Volterra kernels.

Two kernel families are supported: the constant-one kernel (the state is an
ordinary semimartingale) and the power-law kernel

    K(t, r) = (t - r)**(H - 1/2),        1/2 < H,

which for H > 1/2 vanishes on the diagonal and is rescalable,
K(c t, c r) = c**(H - 1/2) K(t, r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Kernel:
    """A two-parameter Volterra kernel K(t, r) defined for 0 <= r <= t.

    Attributes
    ----------
    kind : str
        "one" for the constant kernel, "power" for the power-law kernel.
    hurst : float or None
        Hurst index H for the power-law kernel; ``None`` for "one".
    """

    kind: str
    hurst: float | None = None

    def __post_init__(self):
        if self.kind not in ("one", "power"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "power":
            if self.hurst is None:
                raise ValueError("power-law kernel requires a Hurst index")
            if not self.hurst > 0.5:
                raise ValueError(f"power-law kernel requires H > 1/2, got H={self.hurst}")
        elif self.hurst is not None:
            raise ValueError("constant kernel takes no Hurst index")

    @property
    def is_const(self) -> bool:
        return self.kind == "one"

    @property
    def exponent(self) -> float:
        """The power p in K(t, r) = (t - r)**p (0 for the constant kernel)."""
        return 0.0 if self.is_const else self.hurst - 0.5

    def __call__(self, t, r):
        """Evaluate K(t, r) elementwise.  Requires r <= t (up to roundoff)."""
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        gap = t - r
        if np.any(gap < -1e-12 * (1.0 + np.abs(t))):
            raise ValueError("kernel evaluated outside the domain r <= t")
        if self.is_const:
            return np.ones(np.broadcast(t, r).shape)
        return np.maximum(gap, 0.0) ** self.exponent

    def diagonal_value(self) -> float:
        """K(t, t): 1 for the constant kernel, 0 for power-law (H > 1/2)."""
        return 1.0 if self.is_const else 0.0

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.hurst is not None:
            d["hurst"] = self.hurst
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Kernel":
        return cls(kind=d["kind"], hurst=d.get("hurst"))


def const_kernel() -> Kernel:
    return Kernel("one")


def power_kernel(hurst: float) -> Kernel:
    return Kernel("power", hurst)


def kernel_eval(kernel: Kernel, t, r):
    """Functional form of :meth:`Kernel.__call__`."""
    return kernel(t, r)
