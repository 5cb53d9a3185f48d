"""Unit-circle values stored as unbounded angle accumulators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(angle):
    """Reduce an angle (scalar or array) to the interval (-pi, pi]."""
    a = np.asarray(angle, dtype=float)
    r = -np.remainder(-a + math.pi, TWO_PI) + math.pi
    if r.ndim == 0:
        return float(r)
    return r


@dataclass(frozen=True)
class Phase:
    """A point of U(1) kept as a real angle.

    Multiplication of unit complex numbers is addition of angles, so a
    product of many transition factors and exponentiated integrals keeps the
    unreduced total in ``angle``. ``error`` carries the accumulated
    quadrature error estimate of the integrals that produced it.
    """

    angle: float = 0.0
    error: float = 0.0

    @classmethod
    def from_complex(cls, z: complex) -> "Phase":
        return cls(math.atan2(z.imag, z.real))

    def canonical(self) -> float:
        return wrap_angle(self.angle)

    @property
    def value(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))

    def inverse(self) -> "Phase":
        return Phase(-self.angle, self.error)

    def __mul__(self, other: "Phase") -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase(self.angle + other.angle, self.error + other.error)

    def __truediv__(self, other: "Phase") -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase(self.angle - other.angle, self.error + other.error)

    def __neg__(self) -> "Phase":
        return self.inverse()

    def distance(self, other: "Phase") -> float:
        """Arc distance between two points of U(1), in [0, pi]."""
        return abs(wrap_angle(self.angle - other.angle))

    def to_dict(self) -> dict:
        z = self.value
        return {
            "phase_canonical": self.canonical(),
            "phase_accumulated": self.angle,
            "value": [z.real, z.imag],
            "quadrature_error": self.error,
        }


def product(phases) -> Phase:
    total = Phase()
    for p in phases:
        total = total * p
    return total
