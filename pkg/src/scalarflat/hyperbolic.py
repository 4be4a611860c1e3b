"""Hyperbolic 3-space, Green functions, and Fuchsian group machinery.

The band ``Sigma_g x (-1,1)`` over a genus-g hyperbolic surface carries
the constant-curvature -1 metric

    h = h_Sigma / (1 - t^2) + dt^2 / (1 - t^2)^2 .

Lifting the surface to the upper half-plane, the chart

    (x, y, t)  |->  (X, U, Z) = (x, y t, y sqrt(1 - t^2))

is an isometry onto upper half-space with its standard hyperbolic
metric, carrying the Fuchsian deck group to the Poincare extension of
its Mobius action and the slices t = const to the planes U/Z = const.
Green functions on the band are therefore orbit sums of the radial
fundamental solution on half-space, and the boundary decay at t -> +-1
is automatic.

The radial solution normalized so that the (positive) Laplacian applied
to it produces 2*pi times a unit point mass is

    G(r) = (coth r - 1) / 2 = 1 / (e^{2r} - 1),

pinned by the flux convention that (1/2pi) * (star dG) integrates to -1
over a small geodesic sphere around the pole.

The shipped genus-2 group is the regular-octagon group: hyperbolic
translations of length 2*arccosh(1+sqrt2) along the four geodesics
through i at angles k*pi/4 satisfy

    g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 = 1,

and the change of generators a1 = g0, b1 = g1^-1, a2 = g1^-1 g0 g2,
b2 = g3^-1 g2 puts this relation in the canonical surface-group form
[a1,b1][a2,b2] = 1 (the octagon generators are recovered as g0 = a1,
g1 = b1^-1, g2 = a1^-1 b1^-1 a2, g3 = a1^-1 b1^-1 a2 b2^-1).  The
loader validates determinants, hyperbolicity and the commutator
relation for every group it accepts.
"""
from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

RELATION_TOLERANCE = 1e-10
_DEDUP_DECIMALS = 9


# ---------------------------------------------------------------------------
# Charts and distances.

def h2_to_h3(x, y, t):
    """Isometric chart (x, y, t) -> (X, U, Z) into upper half-space.

    Requires y > 0 and |t| < 1; the slice t = 0 is the totally geodesic
    vertical plane U = 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(y <= 0):
        raise ValueError("chart requires y > 0")
    if np.any(np.abs(t) >= 1):
        raise ValueError("chart requires |t| < 1")
    out = (x + 0.0, y * t, y * np.sqrt(1.0 - t * t))
    if out[2].ndim == 0:
        return float(out[0]), float(out[1]), float(out[2])
    return out


def _chart_to_h3_closed(x, y, t):
    # Internal variant admitting |t| <= 1; Z = 0 on the boundary slices.
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.asarray(x, dtype=float) + 0.0, y * t, y * np.sqrt(np.maximum(1.0 - t * t, 0.0))


def h3_cosh_distance(p, q):
    """cosh of the hyperbolic distance between points (X, U, Z), Z > 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    diff = p - q
    return 1.0 + (diff * diff).sum(axis=-1) / (2.0 * p[..., 2] * q[..., 2])


def h3_distance(p, q):
    """Hyperbolic distance in upper half-space; cosh d = 1 + |p-q|^2 / (2 Zp Zq)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(p[..., 2] <= 0) or np.any(q[..., 2] <= 0):
        raise ValueError("upper half-space points need Z > 0")
    c = h3_cosh_distance(p, q)
    return np.arccosh(np.maximum(c, 1.0))


def h3_green(r):
    """Radial Green function with 2*pi point mass: G(r) = 1/(e^{2r} - 1).

    Equals (coth r - 1)/2; behaves like 1/(2r) at the pole and decays
    like e^{-2r}.  Only r > 0 is admitted.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("the Green function is defined for r > 0")
    val = 1.0 / np.expm1(2.0 * r)
    return float(val) if val.ndim == 0 else val


def green_from_cosh(c):
    """G evaluated from cosh d directly; valid for c >= 1, vectorized.

    1/(e^{2d} - 1) with e^d = c + sqrt(c^2 - 1); returns 0 at infinite
    separation and +inf at coincident points.
    """
    c = np.asarray(c, dtype=float)
    ed = c + np.sqrt(np.maximum(c * c - 1.0, 0.0))
    with np.errstate(divide="ignore"):
        return 1.0 / (ed * ed - 1.0)


def green_gradient_factor(c):
    """dG/d(cosh d) = -1 / (2 sinh^3 d), vectorized over cosh d > 1."""
    c = np.asarray(c, dtype=float)
    sh2 = np.maximum(c * c - 1.0, 0.0)
    with np.errstate(divide="ignore"):
        return -1.0 / (2.0 * sh2 * np.sqrt(sh2))


# ---------------------------------------------------------------------------
# Mobius actions.

def mobius_apply(mat, z):
    """Upper half-plane action of a real 2x2 matrix on complex z."""
    a, b = mat[0, 0], mat[0, 1]
    c, d = mat[1, 0], mat[1, 1]
    return (a * z + b) / (c * z + d)


def _matrix_key(mat):
    flat = mat.reshape(-1)
    pivot = flat[np.argmax(np.abs(flat))]
    flat = flat * np.sign(pivot)
    return tuple(np.round(flat, _DEDUP_DECIMALS))


# ---------------------------------------------------------------------------
# Fuchsian groups.

@dataclass(frozen=True, eq=False)
class FuchsianGroup:
    """Generators a_1, b_1, ..., a_g, b_g of a cocompact surface group.

    Real 2x2 matrices of determinant 1 acting on the upper half-plane.
    Every generator must be hyperbolic (|trace| > 2) and the surface
    relation [a_1,b_1]...[a_g,b_g] must evaluate to +-identity within
    1e-10; both are enforced at construction.
    """

    generators: tuple[np.ndarray, ...]
    genus: int = field(init=False)
    relation_residual: float = field(init=False)

    def __post_init__(self):
        gens = tuple(np.array(g, dtype=float) for g in self.generators)
        if len(gens) < 4 or len(gens) % 2 != 0:
            raise ValueError(
                f"need an even number >= 4 of generators (2 per handle), got {len(gens)}"
            )
        normalized = []
        for i, g in enumerate(gens):
            if g.shape != (2, 2):
                raise ValueError(f"generator {i} is not a 2x2 matrix")
            det = float(np.linalg.det(g))
            if det <= 0 or abs(det - 1.0) > 1e-6:
                raise ValueError(f"generator {i} has determinant {det:.6g}, expected 1")
            g = g / np.sqrt(det)
            if abs(np.trace(g)) <= 2.0:
                raise ValueError(
                    f"generator {i} has |trace| = {abs(np.trace(g)):.6g} <= 2; "
                    "all generators must be hyperbolic"
                )
            normalized.append(g)
        object.__setattr__(self, "generators", tuple(normalized))
        object.__setattr__(self, "genus", len(normalized) // 2)
        resid = surface_relation_residual(self.generators)
        if resid > RELATION_TOLERANCE:
            raise ValueError(
                f"surface-group relation fails: commutator-product residual "
                f"{resid:.3e} > {RELATION_TOLERANCE:g}"
            )
        object.__setattr__(self, "relation_residual", resid)


def surface_relation_residual(generators) -> float:
    """Distance of [a_1,b_1]...[a_g,b_g] from +-identity, in max norm."""
    prod = np.eye(2)
    for i in range(0, len(generators), 2):
        a, b = generators[i], generators[i + 1]
        prod = prod @ a @ b @ np.linalg.inv(a) @ np.linalg.inv(b)
    return float(
        min(np.abs(prod - np.eye(2)).max(), np.abs(prod + np.eye(2)).max())
    )


def genus2_octagon_group() -> FuchsianGroup:
    """The regular-octagon genus-2 group, canonical generators.

    See the module docstring for the construction and the change of
    generators that produces the commutator-form presentation.
    """
    c = 1.0 + np.sqrt(2.0)
    s = np.sqrt(c * c - 1.0)
    trans = np.array([[c, s], [s, c]])

    def rot(phi):
        h = phi / 2.0
        return np.array([[np.cos(h), np.sin(h)], [-np.sin(h), np.cos(h)]])

    g = [rot(k * np.pi / 4) @ trans @ rot(-k * np.pi / 4) for k in range(4)]
    gi = [np.linalg.inv(m) for m in g]
    a1 = g[0]
    b1 = gi[1]
    a2 = gi[1] @ g[0] @ g[2]
    b2 = gi[3] @ g[2]
    return FuchsianGroup((a1, b1, a2, b2))


def save_group(group: FuchsianGroup, path) -> None:
    """One generator per line, four whitespace-separated reals (row major)."""
    lines = [" ".join(f"{v:.17g}" for v in g.reshape(-1)) for g in group.generators]
    Path(path).write_text("\n".join(lines) + "\n")


def load_group(path) -> FuchsianGroup:
    rows = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}:{ln}: expected 4 reals, got {len(parts)}")
        vals = [float(p) for p in parts]
        rows.append(np.array(vals).reshape(2, 2))
    return FuchsianGroup(tuple(rows))


def default_group_path() -> Path:
    return Path(importlib.resources.files("scalarflat") / "data" / "genus2_octagon.txt")


# ---------------------------------------------------------------------------
# Orbit enumeration.

def group_shells(group: FuchsianGroup, max_word_length: int) -> list[list[np.ndarray]]:
    """Distinct reduced words, grouped by word length 0..max_word_length.

    Words are reduced over generators and inverses without immediate
    backtracking and deduplicated by matrix comparison up to an overall
    sign at 1e-9 resolution, which removes the coincidences forced by the
    surface relation.
    """
    if max_word_length < 0:
        raise ValueError("word length must be >= 0")
    alphabet = []
    for i, g in enumerate(group.generators):
        alphabet.append((i + 1, g))
        alphabet.append((-(i + 1), np.linalg.inv(g)))
    identity = np.eye(2)
    seen = {_matrix_key(identity)}
    shells = [[identity]]
    frontier = [((), identity)]
    for _ in range(max_word_length):
        nxt = []
        for word, mat in frontier:
            for label, gen in alphabet:
                if word and word[-1] == -label:
                    continue
                cand = mat @ gen
                key = _matrix_key(cand)
                if key in seen:
                    continue
                seen.add(key)
                nxt.append((word + (label,), cand))
        shells.append([m for _, m in nxt])
        frontier = nxt
    return shells


def group_ball(group: FuchsianGroup, max_word_length: int) -> list[np.ndarray]:
    """All distinct elements of word length <= max_word_length."""
    return [m for shell in group_shells(group, max_word_length) for m in shell]


# ---------------------------------------------------------------------------
# Dirichlet fundamental domain about i, and quadrature over it.

def dirichlet_radii(group: FuchsianGroup, n_phi: int, image_depth: int = 4):
    """Geodesic-polar boundary radii r_max(phi) of the Dirichlet domain at i.

    The domain is {p : d(i, p) <= d(c, p) for all orbit points c of i};
    orbit points are enumerated to `image_depth` (length 4 reaches every
    Dirichlet neighbor of the shipped octagon group in its commutator
    generators) and the boundary radius in each direction is found by
    bisection.  Returns (phis, radii) with midpoint angles.
    """
    center = 1j
    images = []
    for mat in group_ball(group, image_depth)[1:]:
        images.append(mobius_apply(mat, center))
    images = np.array(images)
    dist0 = np.arccosh(1.0 + np.abs(images - center) ** 2 / (2.0 * images.imag))
    keep = images[dist0 <= dist0.min() + 2.5]

    phis = (np.arange(n_phi) + 0.5) * (2.0 * np.pi / n_phi)
    lo = np.zeros(n_phi)
    hi = np.full(n_phi, 4.0)
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        zt = np.tanh(mid / 2.0) * np.exp(1j * phis)
        p = 1j * (1.0 + zt) / (1.0 - zt)
        d_center = np.arccosh(1.0 + np.abs(p - center) ** 2 / (2.0 * p.imag))
        d_images = np.arccosh(
            1.0 + np.abs(p[:, None] - keep[None, :]) ** 2 / (2.0 * np.outer(p.imag, keep.imag))
        ).min(axis=1)
        inside = d_center <= d_images + 1e-14
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return phis, lo


def dirichlet_quadrature(group: FuchsianGroup, n_phi: int = 256, n_radial: int = 48):
    """Quadrature nodes and hyperbolic-area weights over the Dirichlet domain.

    Geodesic polar coordinates about i: Gauss-Legendre in the radius per
    angular strip, midpoint rule in the angle; the area element is
    sinh(r) dr dphi.  Returns (z_nodes, weights) with z in the upper
    half-plane.
    """
    phis, rmax = dirichlet_radii(group, n_phi)
    nodes, gl_weights = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * rmax[:, None] * (nodes[None, :] + 1.0)
    weights = (2.0 * np.pi / n_phi) * 0.5 * rmax[:, None] * gl_weights[None, :] * np.sinh(r)
    zt = np.tanh(r / 2.0) * np.exp(1j * phis[:, None])
    z = 1j * (1.0 + zt) / (1.0 - zt)
    return z.ravel(), weights.ravel()


def fundamental_domain_area(group: FuchsianGroup, n_phi: int = 512, n_radial: int = 64) -> float:
    """Hyperbolic area of the Dirichlet domain; Gauss-Bonnet gives 4pi(g-1)."""
    _, weights = dirichlet_quadrature(group, n_phi, n_radial)
    return float(weights.sum())
