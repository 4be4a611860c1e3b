"""Exact rational multiples of powers of pi.

All lattice arithmetic is exact; pi and pi^2 never enter a computation as
floats, they only tag outputs.  A ``PiMultiple`` is an exact coefficient
together with the power of pi it multiplies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class PiMultiple:
    coeff: Fraction
    power: int = 1

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        if self.power < 0:
            raise ValueError("negative powers of pi are not used here")

    @property
    def unit(self) -> str:
        return "pi" if self.power == 1 else f"pi^{self.power}"

    @property
    def is_zero(self) -> bool:
        return self.coeff == 0

    def __mul__(self, scalar) -> "PiMultiple":
        return PiMultiple(self.coeff * Fraction(scalar), self.power)

    __rmul__ = __mul__

    def __float__(self) -> float:
        return float(self.coeff) * math.pi ** self.power

    def __str__(self) -> str:
        return f"{self.coeff}*{self.unit}"
