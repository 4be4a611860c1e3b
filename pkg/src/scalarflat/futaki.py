"""Futaki invariant of the fiberwise circle action, exactly.

For a blown-up ruled surface in normal form the automorphism algebra is
spanned by the Euler field of the line bundle (normalized to 1), and the
invariant of an admissible class can be evaluated by two independent
closed formulas:

  * weight form:    F = -(A^2/2) * (k - sum_j w_j)
  * boundary form:  F = (1/2) * (int_{C_inf} - int_{C_0}) * int_F

Both are exact rationals and must agree; keeping both provides a
two-route oracle for every downstream consumer.  The invariant vanishes
exactly when the weights sum to the bundle degree, which is feasible for
weights in (0,1)^m precisely when k = m = 0 or 0 < k < m.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .lattice import (
    KahlerClassParam,
    RuledSurfaceModel,
    c1_pairing,
    is_admissible,
    section_integrals,
)


class Existence(Enum):
    """Whether an admissible class with vanishing Futaki invariant exists."""

    ADMISSIBLE_FUTAKI_ZERO_EXISTS = "admissible-futaki-zero-exists"
    NONE_EXISTS = "none-exists"


@dataclass(frozen=True)
class FutakiResult:
    via_weights: Fraction
    via_boundary: Fraction

    def __post_init__(self):
        if self.via_weights != self.via_boundary:
            raise AssertionError(
                f"formula mismatch: weights {self.via_weights} "
                f"!= boundary {self.via_boundary}"
            )

    @property
    def value(self) -> Fraction:
        return self.via_weights


def _require_admissible_hyperplane(model: RuledSurfaceModel, cls: KahlerClassParam):
    # Both closed formulas were derived under c_1 . [omega] = 0.
    if c1_pairing(model, cls) != 0:
        raise ValueError(
            "Futaki formulas require total scalar curvature zero "
            f"(c_1 . [omega] = {c1_pairing(model, cls)}); "
            "use admissible_b to fix the section ratio"
        )


def futaki_via_weights(model: RuledSurfaceModel, cls: KahlerClassParam) -> Fraction:
    """Weight form of the invariant: -(A^2/2) (k - sum w)."""
    _require_admissible_hyperplane(model, cls)
    a = cls.fiber_area
    return -(a * a) * (model.degree - cls.weight_sum) / 2


def futaki_via_boundary(model: RuledSurfaceModel, cls: KahlerClassParam) -> Fraction:
    """Fixed-curve form: half the section-integral difference times the fiber area."""
    _require_admissible_hyperplane(model, cls)
    over_inf, over_zero = section_integrals(model, cls)
    return (over_inf - over_zero) * cls.fiber_area / 2


def futaki_invariant(model: RuledSurfaceModel, cls: KahlerClassParam) -> FutakiResult:
    """Evaluate both formulas; construction fails if they ever disagree."""
    return FutakiResult(futaki_via_weights(model, cls), futaki_via_boundary(model, cls))


def existence_classification(model: RuledSurfaceModel) -> Existence:
    """Classify whether any admissible class has vanishing invariant.

    Vanishing needs sum(w) = k with each w_j in (0,1), which is feasible
    exactly when k = m = 0 or 0 < k < m.  In particular m = 1 is excluded.
    """
    k, m = model.degree, model.blowups
    if (k == 0 and m == 0) or (0 < k < m):
        return Existence.ADMISSIBLE_FUTAKI_ZERO_EXISTS
    return Existence.NONE_EXISTS


def restricted_futaki_gradient(
    model: RuledSurfaceModel, cls: KahlerClassParam
) -> tuple[Fraction, ...]:
    """Gradient of the invariant over the admissible cone at a zero.

    The cone is charted by (A, w_1, ..., w_m) with the section ratio
    eliminated.  At a point with vanishing invariant the partials are
    dF/dA = -A (k - sum w) = 0 and dF/dw_j = A^2 / 2, so the gradient
    vanishes exactly when m = 0, i.e. exactly when the signature is 0.
    """
    value = futaki_via_weights(model, cls)
    if value != 0:
        raise ValueError(
            f"restricted gradient is defined at a vanishing invariant; got {value}"
        )
    a = cls.fiber_area
    d_area = -a * (model.degree - cls.weight_sum)
    d_weight = a * a / 2
    return (d_area,) + (d_weight,) * model.blowups


def ml_obstruction_vanishes(model: RuledSurfaceModel) -> bool:
    """Reductivity of the automorphism algebra, in normal form.

    For m > 0 the bundle has no sections of the dual, so the algebra is
    spanned by the Euler field; for m = 0 the surface is either the
    product or again has 1-dimensional algebra.  Either way the identity
    component of the automorphism group has a compact real form.
    """
    return True


def scalar_flat_existence(model: RuledSurfaceModel, cls: KahlerClassParam) -> bool:
    """Does the class contain a scalar-flat Kahler metric?

    True exactly when the class is admissible, the Futaki invariant
    vanishes and the reductivity obstruction vanishes.
    """
    if not is_admissible(model, cls).admissible:
        return False
    return futaki_via_weights(model, cls) == 0 and ml_obstruction_vanishes(model)
