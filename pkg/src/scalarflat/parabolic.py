"""Parabolic quasi-stability of rank-2 bundles L + O with flagged fibers.

The bundle ``V = L + O`` over a curve carries flags: 1-dimensional
subspaces of chosen fibers, all sitting inside the O summand, each
weighted by a pair ``alpha_j < beta_j`` in [0,1].  The parabolic degree
of a line subbundle adds ``beta_j`` for flags it contains and
``alpha_j`` for those it misses:

    pardeg(L') = deg(L') + sum_{j not in L'} alpha_j + sum_{j in L'} beta_j
    pardeg(V)  = deg(V) + sum alpha_j + sum beta_j

Quasi-stability demands pardeg(L') <= pardeg(V)/2 for every line
subbundle, with equality allowed only for the two direct summands.  The
search space is cut down to a finite candidate family:

  * the summand L (degree k, no flags) and the summand O (degree 0, all
    flags);
  * twisted embeddings of O through a flag subset S: claiming a flag
    costs one unit of degree, so the extremal candidate has degree -|S|
    and contains exactly S;
  * proper subsheaves of L, extremal at degree k - 1, no flags.

Any line subbundle with nonzero projection to O has degree <= 0 and
gains beta - alpha < 1 per claimed flag while paying 1, so the family
above dominates all of them; this reduction is stress-tested against the
equivalent criterion sum(beta - alpha) = deg(L).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, Sequence

from .futaki import futaki_via_weights
from .lattice import KahlerClassParam, RuledSurfaceModel


@dataclass(frozen=True)
class Flag:
    point_id: int
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "beta", Fraction(self.beta))
        if not (0 <= self.alpha <= 1 and 0 <= self.beta <= 1):
            raise ValueError(f"flag weights must lie in [0,1]: ({self.alpha}, {self.beta})")
        if self.alpha >= self.beta:
            raise ValueError(f"flag needs alpha < beta, got ({self.alpha}, {self.beta})")
        if self.weight >= 1:
            raise ValueError(f"flag weight beta - alpha = {self.weight} must be < 1")

    @property
    def weight(self) -> Fraction:
        return self.beta - self.alpha


@dataclass(frozen=True)
class ParabolicBundle:
    """deg(L) plus the flag data; flags live in the O summand at distinct points."""

    degree: int
    flags: tuple[Flag, ...] = ()

    def __post_init__(self):
        ids = [f.point_id for f in self.flags]
        if len(set(ids)) != len(ids):
            raise ValueError(f"flag points must be distinct, got ids {ids}")

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(f.weight for f in self.flags)

    @property
    def flag_ids(self) -> frozenset[int]:
        return frozenset(f.point_id for f in self.flags)


class SubbundleKind(Enum):
    SUMMAND_L = "summand-L"
    SUMMAND_O = "summand-O"
    TWISTED_O = "twisted-O"
    SUBSHEAF_OF_L = "subsheaf-of-L"


@dataclass(frozen=True)
class LineSubbundleDescriptor:
    kind: SubbundleKind
    degree: Fraction
    contained_flags: frozenset[int]

    def __str__(self) -> str:
        flags = ",".join(str(i) for i in sorted(self.contained_flags)) or "-"
        return f"{self.kind.value}(deg={self.degree}, flags={{{flags}}})"


def summand_l(bundle: ParabolicBundle) -> LineSubbundleDescriptor:
    return LineSubbundleDescriptor(SubbundleKind.SUMMAND_L, Fraction(bundle.degree), frozenset())


def summand_o(bundle: ParabolicBundle) -> LineSubbundleDescriptor:
    return LineSubbundleDescriptor(SubbundleKind.SUMMAND_O, Fraction(0), bundle.flag_ids)


def twisted_o(
    bundle: ParabolicBundle, flag_ids: Sequence[int], extra_degree: int = 0
) -> LineSubbundleDescriptor:
    """Embedding of O passing through the flags in `flag_ids`.

    Each claimed flag forces a zero of the O-component, so the degree is
    at most -|S| + extra_degree with extra_degree <= 0; the descriptor
    carries the extremal value.
    """
    ids = frozenset(flag_ids)
    if not ids <= bundle.flag_ids:
        raise ValueError(f"unknown flag ids {sorted(ids - bundle.flag_ids)}")
    if extra_degree > 0:
        raise ValueError("extra twisting can only lower the degree")
    return LineSubbundleDescriptor(SubbundleKind.TWISTED_O, Fraction(-len(ids) + extra_degree), ids)


def subsheaf_of_l(bundle: ParabolicBundle, degree: int | None = None) -> LineSubbundleDescriptor:
    """A proper subsheaf of the L summand; extremal degree is deg(L) - 1."""
    d = bundle.degree - 1 if degree is None else degree
    if d >= bundle.degree:
        raise ValueError(f"proper subsheaf needs degree < {bundle.degree}, got {d}")
    return LineSubbundleDescriptor(SubbundleKind.SUBSHEAF_OF_L, Fraction(d), frozenset())


def parabolic_degree_total(bundle: ParabolicBundle) -> Fraction:
    total = Fraction(bundle.degree)
    for f in bundle.flags:
        total += f.alpha + f.beta
    return total


def parabolic_degree_line(bundle: ParabolicBundle, sub: LineSubbundleDescriptor) -> Fraction:
    if not sub.contained_flags <= bundle.flag_ids:
        raise ValueError(f"descriptor references unknown flags {sorted(sub.contained_flags)}")
    total = Fraction(sub.degree)
    for f in bundle.flags:
        total += f.beta if f.point_id in sub.contained_flags else f.alpha
    return total


def candidate_subbundles(bundle: ParabolicBundle) -> Iterator[LineSubbundleDescriptor]:
    """The finite family dominating all line subbundles, summands first."""
    yield summand_l(bundle)
    yield summand_o(bundle)
    ids = sorted(bundle.flag_ids)
    for r in range(1, len(ids) + 1):
        for subset in itertools.combinations(ids, r):
            yield twisted_o(bundle, subset)
    yield subsheaf_of_l(bundle)


@dataclass(frozen=True)
class StabilityVerdict:
    quasi_stable: bool
    witness: LineSubbundleDescriptor | None

    def __bool__(self) -> bool:
        return self.quasi_stable


def is_quasi_stable(bundle: ParabolicBundle) -> StabilityVerdict:
    """Quasi-stability over the candidate family.

    Equality of parabolic slopes is permitted only for the two direct
    summands; the first violating candidate is returned as witness.
    """
    half_total = parabolic_degree_total(bundle) / 2
    for sub in candidate_subbundles(bundle):
        d = parabolic_degree_line(bundle, sub)
        summand = sub.kind in (SubbundleKind.SUMMAND_L, SubbundleKind.SUMMAND_O)
        if d > half_total or (d == half_total and not summand):
            return StabilityVerdict(False, sub)
    return StabilityVerdict(True, None)


def bundle_from_class(
    model: RuledSurfaceModel,
    cls: KahlerClassParam,
    alphas: Sequence[Fraction] | None = None,
) -> ParabolicBundle:
    """Flag the weights of a (1,1)-class: beta_j = alpha_j + w_j.

    Defaults to alpha_j = 0.  Any alpha choice with beta_j <= 1 encodes
    the same weights; the stability verdict depends only on the
    differences.
    """
    weights = cls.weights
    if alphas is None:
        alphas = [Fraction(0)] * len(weights)
    if len(alphas) != len(weights):
        raise ValueError(f"need {len(weights)} alphas, got {len(alphas)}")
    flags = []
    for j, (a, w) in enumerate(zip(alphas, weights), start=1):
        a = Fraction(a)
        flags.append(Flag(j, a, a + w))
    return ParabolicBundle(model.degree, tuple(flags))


def stability_equals_futaki_zero(
    model: RuledSurfaceModel,
    cls: KahlerClassParam,
    alphas: Sequence[Fraction] | None = None,
) -> bool:
    """Quasi-stability verdict, cross-checked against the invariant.

    The verdict must coincide with the vanishing of the Futaki invariant
    of the class; a mismatch would falsify the candidate-family reduction
    and raises immediately.
    """
    verdict = is_quasi_stable(bundle_from_class(model, cls, alphas))
    futaki_zero = futaki_via_weights(model, cls) == 0
    if verdict.quasi_stable != futaki_zero:
        raise AssertionError(
            f"stability verdict {verdict.quasi_stable} disagrees with "
            f"Futaki vanishing {futaki_zero} for weights {cls.weights}"
        )
    return verdict.quasi_stable
