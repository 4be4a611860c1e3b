"""Exact intersection arithmetic on blown-up ruled surfaces.

A minimal ruled surface ``P(L + O) -> Sigma_g`` over a curve of genus
``g >= 2``, blown up at ``m`` distinct points of the zero section of the
line bundle ``L`` of degree ``k``, has second homology spanned by the
infinity section ``C_inf``, a fiber ``F`` and the exceptional curves
``E_1, ..., E_m``.  In that ordered basis the intersection form is

    [-k  1            ]
    [ 1  0            ]
    [       -1        ]
    [           ...   ]
    [              -1 ]

Everything here is exact rational arithmetic (`fractions.Fraction`); pi
and pi^2 appear only as symbolic unit tags on outputs (`units.PiMultiple`).

A (1,1)-class is parameterized by the fiber area ``A``, the ratio ``B``
with ``A*B`` the integral over ``C_inf``, and weights ``w_j`` in (0,1)
giving the exceptional-curve integrals ``A*w_j``.  Its Poincare dual in
the basis above is ``A*(1, B+k, -w_1, ..., -w_m)``.  A class is called
admissible when its total scalar curvature ``4*pi*(c_1 . [omega])``
vanishes and it lies in the Kahler cone; the cone conditions are tested
against the finite curve list ``{C_0, C_inf, F, E_j, F - E_j}``, which
generates the visible negative classes of the normal form.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DimensionMismatchError
from .units import PiMultiple

Rational = Fraction | int | str


def _fractions(values: Iterable[Rational]) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


@dataclass(frozen=True)
class RuledSurfaceModel:
    """Combinatorial model: genus, deg(L), and number of blown-up points.

    Blow-ups are at distinct points on the zero section; configurations
    with repeated points (chains of (-2)-curves) are rejected by
    construction elsewhere and never reach this type.
    """

    genus: int
    degree: int
    blowups: int

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError(f"genus must be >= 2, got {self.genus}")
        if self.blowups < 0:
            raise ValueError(f"blow-up count must be >= 0, got {self.blowups}")
        for name in ("genus", "degree", "blowups"):
            if not isinstance(getattr(self, name), int):
                raise TypeError(f"{name} must be an integer")

    @property
    def rank(self) -> int:
        """Rank of H_2 in the chosen basis: blow-ups + 2."""
        return self.blowups + 2

    @property
    def euler_characteristic(self) -> int:
        return 4 - 4 * self.genus + self.blowups

    @property
    def signature(self) -> int:
        return -self.blowups

    @property
    def c1_square(self) -> int:
        """c_1^2 = 2*chi + 3*tau = 8*(1 - genus) - blowups."""
        return 2 * self.euler_characteristic + 3 * self.signature

    def intersection_matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        n = self.rank
        q = [[Fraction(0)] * n for _ in range(n)]
        q[0][0] = Fraction(-self.degree)
        q[0][1] = q[1][0] = Fraction(1)
        for j in range(2, n):
            q[j][j] = Fraction(-1)
        return tuple(tuple(row) for row in q)


@dataclass(frozen=True)
class HomologyClass:
    """Rational H_2 class in the ordered basis (C_inf, F, E_1, ..., E_m)."""

    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", _fractions(self.coords))

    def __len__(self) -> int:
        return len(self.coords)

    @classmethod
    def section_infinity(cls, model: RuledSurfaceModel) -> "HomologyClass":
        return cls._basis(model, 0)

    @classmethod
    def fiber(cls, model: RuledSurfaceModel) -> "HomologyClass":
        return cls._basis(model, 1)

    @classmethod
    def exceptional(cls, model: RuledSurfaceModel, j: int) -> "HomologyClass":
        if not 1 <= j <= model.blowups:
            raise ValueError(f"exceptional index {j} out of range 1..{model.blowups}")
        return cls._basis(model, 1 + j)

    @classmethod
    def _basis(cls, model: RuledSurfaceModel, i: int) -> "HomologyClass":
        coords = [Fraction(0)] * model.rank
        coords[i] = Fraction(1)
        return cls(tuple(coords))


@dataclass(frozen=True)
class KahlerClassParam:
    """(1,1)-class parameters: fiber area A > 0, ratio B, weights in (0,1).

    ``fiber_area`` is the integral over a fiber; ``section_ratio`` is the
    integral over the infinity section divided by the fiber area; weight
    ``w_j`` is the integral over ``E_j`` divided by the fiber area.
    Positivity of the fiber area pins the positive component of the cone,
    standing in for a pairing against a reference Kahler class, which a
    purely combinatorial model does not carry.
    """

    fiber_area: Fraction
    section_ratio: Fraction
    weights: tuple[Fraction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fiber_area", Fraction(self.fiber_area))
        object.__setattr__(self, "section_ratio", Fraction(self.section_ratio))
        object.__setattr__(self, "weights", _fractions(self.weights))
        if self.fiber_area <= 0:
            raise ValueError(f"fiber area must be positive, got {self.fiber_area}")
        for j, w in enumerate(self.weights, start=1):
            if not 0 < w < 1:
                raise ValueError(f"weight w_{j} = {w} is outside the open interval (0,1)")

    @property
    def weight_sum(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def poincare_dual(self, model: RuledSurfaceModel) -> HomologyClass:
        """Coordinates A*(1, B + k, -w_1, ..., -w_m) of the dual H_2 class."""
        if len(self.weights) != model.blowups:
            raise DimensionMismatchError("weights", model.blowups, len(self.weights))
        a, b, k = self.fiber_area, self.section_ratio, model.degree
        return HomologyClass((a, a * (b + k)) + tuple(-a * w for w in self.weights))

    def scaled(self, factor: Rational) -> "KahlerClassParam":
        """Rescale the class by a positive rational factor (weights are ratios)."""
        return KahlerClassParam(self.fiber_area * Fraction(factor), self.section_ratio, self.weights)


def intersection_pairing(u: HomologyClass, v: HomologyClass, model: RuledSurfaceModel) -> Fraction:
    """Evaluate the intersection form u.v; symmetric and exact."""
    if len(u) != model.rank:
        raise DimensionMismatchError("u", model.rank, len(u))
    if len(v) != model.rank:
        raise DimensionMismatchError("v", model.rank, len(v))
    k = Fraction(model.degree)
    a, b = u.coords, v.coords
    total = -k * a[0] * b[0] + a[0] * b[1] + a[1] * b[0]
    total -= sum((a[j] * b[j] for j in range(2, model.rank)), Fraction(0))
    return total


def c1_row(model: RuledSurfaceModel) -> HomologyClass:
    """The functional pairing c_1 against H_2 classes in the standard basis.

    By adjunction on each basis curve (genus g for C_inf, rational for the
    rest) the row vector is (2*(1-g) - k, 2, 1, ..., 1).
    """
    head = (Fraction(2 * (1 - model.genus) - model.degree), Fraction(2))
    return HomologyClass(head + (Fraction(1),) * model.blowups)


def c1_pairing(model: RuledSurfaceModel, cls: KahlerClassParam) -> Fraction:
    """c_1 . [omega], evaluated as row(c_1) against the Poincare dual."""
    row = c1_row(model).coords
    dual = cls.poincare_dual(model).coords
    return sum((r * d for r, d in zip(row, dual)), Fraction(0))


def admissible_b(model: RuledSurfaceModel, weights: Sequence[Rational]) -> Fraction:
    """The unique ratio B with c_1 . [omega] = 0 for every fiber area.

    B = (-k + 2*(g-1) + sum(w)) / 2.
    """
    w = _fractions(weights)
    if len(w) != model.blowups:
        raise DimensionMismatchError("weights", model.blowups, len(w))
    return Fraction(-model.degree + 2 * (model.genus - 1) + sum(w, Fraction(0)), 2)


def section_integrals(model: RuledSurfaceModel, cls: KahlerClassParam) -> tuple[Fraction, Fraction]:
    """Integrals of the class over the two fixed sections (C_inf, C_0).

    The infinity-section integral is A*B = (A/2)*(-k + 2*(g-1) + sum(w))
    once B is admissible; the zero-section integral follows by the
    symmetry swapping the two sections, k <-> m - k and w_j <-> 1 - w_j:
    (A/2)*(k + 2*(g-1) - sum(w)).  The zero section is not given its own
    coordinate vector; this closed formula is used instead.
    """
    a, k, g = cls.fiber_area, model.degree, model.genus
    sw = cls.weight_sum
    over_inf = a * cls.section_ratio
    over_zero = a * Fraction(k + 2 * (g - 1), 1) / 2 - a * sw / 2
    return over_inf, over_zero


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    value: Fraction
    ok: bool


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    conditions: tuple[ConditionCheck, ...]

    @property
    def first_failure(self) -> str | None:
        for c in self.conditions:
            if not c.ok:
                return c.name
        return None


def is_admissible(model: RuledSurfaceModel, cls: KahlerClassParam) -> AdmissibilityReport:
    """Check the cohomological admissibility conditions, one by one.

    (i)   c_1 . [omega] = 0;
    (ii)  positivity of the fiber area (constructor-enforced, reported);
    (iii) [omega]^2 > 0;
    (iv)  [omega] . C > 0 for C in {C_0, C_inf, F, E_j, F - E_j}.

    Returns a per-condition report; `first_failure` names the earliest
    violated condition.
    """
    dual = cls.poincare_dual(model)
    over_inf, over_zero = section_integrals(model, cls)
    c1_omega = c1_pairing(model, cls)
    omega_sq = intersection_pairing(dual, dual, model)
    checks = [
        ConditionCheck("i:c1.omega", c1_omega, c1_omega == 0),
        ConditionCheck("ii:fiber_area", cls.fiber_area, cls.fiber_area > 0),
        ConditionCheck("iii:omega^2", omega_sq, omega_sq > 0),
        ConditionCheck("iv:C0", over_zero, over_zero > 0),
        ConditionCheck("iv:Cinf", over_inf, over_inf > 0),
        ConditionCheck("iv:F", cls.fiber_area, cls.fiber_area > 0),
    ]
    for j, w in enumerate(cls.weights, start=1):
        val = cls.fiber_area * w
        checks.append(ConditionCheck(f"iv:E{j}", val, val > 0))
    for j, w in enumerate(cls.weights, start=1):
        val = cls.fiber_area * (1 - w)
        checks.append(ConditionCheck(f"iv:F-E{j}", val, val > 0))
    return AdmissibilityReport(all(c.ok for c in checks), tuple(checks))


def total_scalar_curvature(model: RuledSurfaceModel, cls: KahlerClassParam) -> PiMultiple:
    """Total scalar curvature of any metric in the class: 4*pi*(c_1 . [omega])."""
    return PiMultiple(4 * c1_pairing(model, cls), power=1)


def curvature_functional_bounds(model: RuledSurfaceModel) -> tuple[PiMultiple, PiMultiple]:
    """Topological lower bounds of the curvature functionals.

    The L^2 norm of the full curvature tensor is bounded below by
    -8*pi^2*(3*tau + chi), with equality exactly for scalar-flat
    anti-self-dual metrics; the Weyl functional is bounded below by
    -12*pi^2*tau, with equality exactly for anti-self-dual metrics.
    """
    chi, tau = model.euler_characteristic, model.signature
    riemann = PiMultiple(Fraction(-8 * (3 * tau + chi)), power=2)
    weyl = PiMultiple(Fraction(-12 * tau), power=2)
    return riemann, weyl


# ---------------------------------------------------------------------------
# Degeneration of blow-up configurations on Sigma_g x CP^1.

CP1Point = tuple[Fraction, Fraction]
INFINITY_SECTION: CP1Point = (Fraction(1), Fraction(0))
ZERO_SECTION: CP1Point = (Fraction(0), Fraction(1))


def _cp1(p: Sequence[Rational]) -> CP1Point:
    z1, z2 = Fraction(p[0]), Fraction(p[1])
    if z1 == 0 and z2 == 0:
        raise ValueError("[0:0] is not a point of CP^1")
    return (z1, z2)


def cp1_equal(p: Sequence[Rational], q: Sequence[Rational]) -> bool:
    a, b = _cp1(p), _cp1(q)
    return a[0] * b[1] == a[1] * b[0]


def degenerate_configuration(
    points: Sequence[tuple[str, Sequence[Rational]]],
) -> list[tuple[str, CP1Point]]:
    """Push a blow-up configuration to its vector-field limit.

    Input points are (base-point label, [z1 : z2]) pairs on
    Sigma_g x CP^1.  Scaling the first homogeneous coordinate to zero
    fixes everything over [1:0] and sends every other point to [0:1].
    The limit configuration has blow-ups on both fixed sections, hence
    falls in the existence range 0 < deg(L) < m.

    Raises ValueError when the projection to CP^1 is a single point
    (blow up extra points first) or when [1:0] is not in the image
    (change homogeneous coordinates first).
    """
    if not points:
        raise ValueError("empty configuration")
    parsed = [(label, _cp1(p)) for label, p in points]
    if all(cp1_equal(p, parsed[0][1]) for _, p in parsed):
        raise ValueError(
            "all points project to a single CP^1 point; "
            "blow up extra points so the projection has more than one point"
        )
    if not any(cp1_equal(p, INFINITY_SECTION) for _, p in parsed):
        raise ValueError(
            "choose homogeneous coordinates so that [1:0] is in the image "
            "of the configuration"
        )
    return [
        (label, INFINITY_SECTION if cp1_equal(p, INFINITY_SECTION) else ZERO_SECTION)
        for label, p in parsed
    ]
