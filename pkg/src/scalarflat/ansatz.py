"""Scalar-flat Kahler ansatz from hyperbolic monopoles, and its checks.

Charged points ``q_j`` in the hyperbolic band ``Sigma_g x (-1,1)`` define
the potential ``V = 1 + sum_j G_j`` by method of images; with

    v = (1 - t^2) / y^2,    w = V / (1 - t^2),

the metric ``v w (dx^2 + dy^2) + w dt^2 + w^{-1} theta^2`` is Kahler for
any circle connection theta with curvature

    d theta = w_x dy^dt + w_y dt^dx + (v w)_t dx^dy,

and scalar-flat because ``(log v)_xx + (log v)_yy + v_tt = 0`` for the
closed-form v.  The connection itself is never gauge-fixed; everything
verified here depends on theta only through d theta.

Harmonicity of the potential reads ``w_xx + w_yy + (v w)_tt = 0``; the
boundary integral of ``alpha = (1/2pi) star dV`` over a slice t = 1-eps
above all charges equals ``-sum_j (1 + t_j)/2``, which quantizes the
construction: a compact circle bundle exists exactly when the weight sum
is an integer.  The fiber of the compactified surface has area 4pi and
the exceptional curve over ``q_j`` has area ``4pi w_j``.

Grids are uniform in (x, log y, t); y-derivatives are taken by the chain
rule (f_y = f_u / y, f_yy = (f_uu - f_u) / y^2 with u = log y).  On such
a grid the centered-difference scalar-curvature identity cancels exactly
for the closed-form v, so the discrete scalar curvature of the ansatz is
zero to rounding at every resolution, while generic perturbations of v
are detected at O(1).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import hyperbolic as hyp
from .errors import GridExclusionError, QuantizationError

_GRID_BLOCK = 32768
_IMAGE_CHUNK = 128
FOUR_PI = 4.0 * math.pi


# ---------------------------------------------------------------------------
# Configurations.

@dataclass(frozen=True)
class Charge:
    """A monopole point: base point x + iy in the half-plane, height t."""

    x: float
    y: float
    t: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"charge needs y > 0, got {self.y}")
        if not abs(self.t) < 1:
            raise ValueError(f"charge needs |t| < 1, got {self.t}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @property
    def weight(self) -> float:
        return 0.5 * (1.0 + self.t)

    @property
    def h3_point(self) -> tuple[float, float, float]:
        return hyp.h2_to_h3(self.x, self.y, self.t)


@dataclass(frozen=True, eq=False)
class MonopoleConfig:
    """A Fuchsian group and pairwise inequivalent charged points.

    Base points must be distinct modulo the group (several charges over
    one base point form a non-generic column and are rejected).
    """

    group: hyp.FuchsianGroup
    charges: tuple[Charge, ...]

    def __post_init__(self):
        object.__setattr__(self, "charges", tuple(self.charges))
        self._check_inequivalent()

    def _check_inequivalent(self, tol: float = 1e-6):
        zs = [c.z for c in self.charges]
        if len(zs) < 2:
            return
        ball = hyp.group_ball(self.group, 3)
        for i in range(len(zs)):
            for j in range(i + 1, len(zs)):
                for mat in ball:
                    moved = hyp.mobius_apply(mat, zs[j])
                    d = math.acosh(
                        1.0 + abs(zs[i] - moved) ** 2 / (2.0 * zs[i].imag * moved.imag)
                    )
                    if d < tol:
                        raise ValueError(
                            f"charges {i} and {j} have group-equivalent base points"
                        )

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(c.weight for c in self.charges)

    @property
    def weight_sum(self) -> float:
        return sum(self.weights)

    def require_compact(self, tol: float = 1e-9) -> int:
        """Integer weight sum gate for the compact construction.

        Returns the line-bundle degree; raises QuantizationError when the
        weight sum is not an integer within `tol`.
        """
        total = self.weight_sum
        nearest = round(total)
        if abs(total - nearest) > tol:
            raise QuantizationError(
                f"weight sum {total!r} is not an integer within {tol:g}; "
                "no compact circle bundle exists for this configuration"
            )
        return int(nearest)


# ---------------------------------------------------------------------------
# Orbit sums.

def charge_image_shells(config: MonopoleConfig, charge: Charge, word_length: int):
    """Half-space images of one charge under group words, per word length."""
    shells = hyp.group_shells(config.group, word_length)
    out = []
    for shell in shells:
        pts = np.empty((len(shell), 3))
        for i, mat in enumerate(shell):
            z2 = hyp.mobius_apply(mat, charge.z)
            pts[i] = hyp.h2_to_h3(z2.real, z2.imag, charge.t)
        out.append(pts)
    return out


def _green_sum_block(X, U, Z, images):
    """Sum of Green terms and the largest single term, on flat arrays."""
    total = np.zeros_like(X)
    gmax = np.zeros_like(X)
    n = len(images)
    for lo in range(0, n, _IMAGE_CHUNK):
        chunk = images[lo : lo + _IMAGE_CHUNK]
        dx = X[:, None] - chunk[None, :, 0]
        du = U[:, None] - chunk[None, :, 1]
        dz = Z[:, None] - chunk[None, :, 2]
        with np.errstate(divide="ignore"):
            c = 1.0 + (dx * dx + du * du + dz * dz) / (2.0 * Z[:, None] * chunk[None, :, 2])
        g = hyp.green_from_cosh(c)
        total += g.sum(axis=1)
        gmax = np.maximum(gmax, g.max(axis=1))
    return total, gmax


def potential_at_points(config: MonopoleConfig, x, y, t, word_length: int = 4):
    """Evaluate V at chart points; returns (V, last-shell tail estimate).

    Points on the boundary slices |t| = 1 are admitted and get V = 1,
    the boundary limit of every Green term.
    """
    X, U, Z = hyp._chart_to_h3_closed(x, y, t)
    X, U, Z = np.broadcast_arrays(X, U, Z)
    shp = X.shape
    Xf, Uf, Zf = X.reshape(-1), U.reshape(-1), Z.reshape(-1)
    V = np.ones_like(Xf)
    tail = np.zeros_like(Xf)
    for charge in config.charges:
        shells = charge_image_shells(config, charge, word_length)
        for si, pts in enumerate(shells):
            if not len(pts):
                continue
            contrib, _ = _green_sum_block(Xf, Uf, Zf, pts)
            V += contrib
            if si == word_length:
                tail += contrib
    return V.reshape(shp), float(tail.max()) if tail.size else 0.0


# ---------------------------------------------------------------------------
# Grid sampling.

@dataclass(frozen=True)
class GridBox:
    """Chart box [x0,x1] x [y0,y1] x [t0,t1]; t may touch the boundary +-1."""

    x0: float
    x1: float
    y0: float
    y1: float
    t0: float
    t1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1 and self.t0 < self.t1):
            raise ValueError("box bounds must be increasing per axis")
        if self.y0 <= 0:
            raise ValueError("box requires y > 0")
        if self.t0 < -1 or self.t1 > 1:
            raise ValueError("t range must lie in [-1, 1]")

    @classmethod
    def default(cls) -> "GridBox":
        return cls(-0.5, 0.5, 0.5, 2.0, -0.9, 0.9)


@dataclass(eq=False)
class GridSample:
    """Sampled potential and metric coefficients on a (x, log y, t) grid.

    `tail` is the largest total contribution of the outermost image shell
    on the grid, the truncation-error yardstick for every verification
    tolerance downstream.  `ell` is 1/w = (1 - t^2)/V, finite up to the
    boundary.
    """

    xs: np.ndarray
    us: np.ndarray
    ts: np.ndarray
    V: np.ndarray
    v: np.ndarray
    w: np.ndarray
    ell: np.ndarray
    tail: float
    word_length: int

    @property
    def ys(self) -> np.ndarray:
        return np.exp(self.us)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.V.shape

    def spacing(self, axis: int) -> float:
        grid = (self.xs, self.us, self.ts)[axis]
        return float(grid[1] - grid[0]) if len(grid) > 1 else 0.0

    def meshes(self):
        return np.meshgrid(self.xs, self.ys, self.ts, indexing="ij")

    def replace_v(self, new_v: np.ndarray) -> "GridSample":
        """Negative-control helper: same grid, substituted area density."""
        return dataclasses.replace(self, v=np.asarray(new_v, dtype=float))


def auto_box(config: MonopoleConfig) -> GridBox:
    """A chart box clear of the charges: offset in x, moderate y and t range.

    Exploratory default only; the exclusion check still guards every
    sampled point, so a configuration that defeats the heuristic fails
    loudly rather than silently.
    """
    if not config.charges:
        return GridBox.default()
    xs = [c.x for c in config.charges]
    ys = [c.y for c in config.charges]
    x0 = max(xs) + 0.45
    return GridBox(x0, x0 + 0.7, 0.7 * min(ys), 1.35 * max(ys), -0.7, 0.7)


def sample_potential(
    config: MonopoleConfig,
    box: GridBox,
    shape: tuple[int, int, int],
    word_length: int = 4,
    exclusion_factor: float = 3.0,
) -> GridSample:
    """Sample V, v, w on a uniform (x, log y, t) grid inside the box.

    Every grid point must stay at hyperbolic distance at least
    ``exclusion_factor`` local grid spacings from every image of every
    charge; a violating point raises GridExclusionError naming it.
    """
    nx, ny, nt = shape
    if min(nx, ny, nt) < 2:
        raise ValueError("need at least 2 samples per axis")
    xs = np.linspace(box.x0, box.x1, nx)
    us = np.linspace(math.log(box.y0), math.log(box.y1), ny)
    ts = np.linspace(box.t0, box.t1, nt)
    X, Y, T = np.meshgrid(xs, np.exp(us), ts, indexing="ij")
    XX, UU, ZZ = hyp._chart_to_h3_closed(X, Y, T)

    flatX, flatU, flatZ = (a.reshape(-1) for a in (XX, UU, ZZ))
    n_points = flatX.size
    V = np.ones(n_points)
    tail = np.zeros(n_points)
    gmax_per_charge = []
    for charge in config.charges:
        shells = charge_image_shells(config, charge, word_length)
        gmax = np.zeros(n_points)
        for si, pts in enumerate(shells):
            if not len(pts):
                continue
            for lo in range(0, n_points, _GRID_BLOCK):
                sl = slice(lo, min(lo + _GRID_BLOCK, n_points))
                contrib, gblk = _green_sum_block(flatX[sl], flatU[sl], flatZ[sl], pts)
                V[sl] += contrib
                gmax[sl] = np.maximum(gmax[sl], gblk)
                if si == word_length:
                    tail[sl] += contrib
        gmax_per_charge.append(gmax)

    if gmax_per_charge:
        _check_exclusion(
            np.stack(gmax_per_charge), X, Y, T,
            (xs, us, ts), exclusion_factor,
        )

    V = V.reshape(X.shape)
    v = (1.0 - T * T) / (Y * Y)
    with np.errstate(divide="ignore"):
        w = V / (1.0 - T * T)
    ell = (1.0 - T * T) / V
    return GridSample(
        xs=xs, us=us, ts=ts, V=V, v=v, w=w, ell=ell,
        tail=float(tail.max()), word_length=word_length,
    )


def _check_exclusion(gmax_stack, X, Y, T, grids, factor):
    xs, us, ts = grids
    hx = xs[1] - xs[0] if len(xs) > 1 else 0.0
    hu = us[1] - us[0] if len(us) > 1 else 0.0
    ht = ts[1] - ts[0] if len(ts) > 1 else 0.0
    # local hyperbolic grid spacing, per axis, from the band metric
    with np.errstate(divide="ignore"):
        sq = np.sqrt(np.maximum(1.0 - T * T, 0.0))
        h_loc = np.maximum(hx / (Y * sq), np.maximum(hu / sq, ht / (1.0 - T * T)))
    gmax = gmax_stack.max(axis=0).reshape(X.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        dmin = 0.5 * np.log1p(1.0 / gmax)
        deficit = dmin - factor * h_loc
    # inf - inf on the boundary slices is no violation (no charge lives there)
    deficit = np.where(np.isnan(deficit), np.inf, deficit)
    if (deficit < 0).any():
        idx = np.unravel_index(np.argmin(deficit), X.shape)
        flat = np.ravel_multi_index(idx, X.shape)
        charge_index = int(np.argmax(gmax_stack[:, flat]))
        raise GridExclusionError(
            (float(X[idx]), float(Y[idx]), float(T[idx])),
            charge_index,
            float(dmin[idx]),
            float((factor * h_loc)[idx]),
        )


# ---------------------------------------------------------------------------
# Finite differences.

def _d1(arr, h, axis):
    s = [slice(1, -1)] * arr.ndim
    sp = list(s); sp[axis] = slice(2, None)
    sm = list(s); sm[axis] = slice(0, -2)
    return (arr[tuple(sp)] - arr[tuple(sm)]) / (2.0 * h)


def _d2(arr, h, axis):
    s = [slice(1, -1)] * arr.ndim
    sp = list(s); sp[axis] = slice(2, None)
    sm = list(s); sm[axis] = slice(0, -2)
    return (arr[tuple(sp)] - 2.0 * arr[tuple(s)] + arr[tuple(sm)]) / (h * h)


def _require_resolved(sample: GridSample, minimum: int = 5):
    if min(sample.shape) < minimum:
        raise ValueError(
            f"grid too coarse for interior differences: shape {sample.shape}, "
            f"need >= {minimum} points per axis"
        )


def _interior(arr):
    return arr[1:-1, 1:-1, 1:-1]


def _finite_sup(arr) -> float:
    finite = arr[np.isfinite(arr)]
    if finite.size == 0:
        raise ValueError("no interior points with a finite stencil")
    return float(np.abs(finite).max())


def harmonicity_residual(sample: GridSample) -> float:
    """sup |w_xx + w_yy + (v w)_tt| over the interior, relative to sup |w_xx|.

    Identically zero (to rounding) for a chargeless band; for charged
    configurations this is pure second-order discretization error, since
    every truncated image sum is exactly harmonic away from its poles.
    """
    _require_resolved(sample)
    hx, hu, ht = (sample.spacing(i) for i in range(3))
    Y = _interior(np.exp(np.broadcast_to(sample.us[None, :, None], sample.shape)))
    with np.errstate(invalid="ignore"):
        w_xx = _d2(sample.w, hx, 0)
        w_yy = (_d2(sample.w, hu, 1) - _d1(sample.w, hu, 1)) / (Y * Y)
        vw_tt = _d2(sample.v * sample.w, ht, 2)
        residual = _finite_sup(w_xx + w_yy + vw_tt)
    scale = _finite_sup(w_xx)
    if scale == 0.0:
        return residual
    return residual / scale


def scalar_curvature(sample: GridSample) -> np.ndarray:
    """Discrete scalar curvature s = [(log v)_xx + (log v)_yy + v_tt] / (v w).

    Interior grid only.  Independent of V; identically zero (to rounding)
    for the ansatz density v = (1 - t^2)/y^2 on the (x, log y, t) grid.
    """
    _require_resolved(sample)
    hx, hu, ht = (sample.spacing(i) for i in range(3))
    Y = _interior(np.exp(np.broadcast_to(sample.us[None, :, None], sample.shape)))
    with np.errstate(divide="ignore", invalid="ignore"):
        lv = np.log(sample.v)
        numerator = (
            _d2(lv, hx, 0)
            + (_d2(lv, hu, 1) - _d1(lv, hu, 1)) / (Y * Y)
            + _d2(sample.v, ht, 2)
        )
        return numerator / _interior(sample.v * sample.w)


def scalar_curvature_residual(sample: GridSample) -> float:
    return _finite_sup(scalar_curvature(sample))


# ---------------------------------------------------------------------------
# Ricci form, anti-self-duality, Einstein-Maxwell field.

def _coordinate_ricci_components(sample: GridSample):
    """Coefficients of rho = -1/2 d(J d log v) on the coordinate 2-form basis.

    With u = log v and q = u_t / w,

        d(J du) =   (u_xx + u_yy + q (vw)_t) dx^dy
                  + (-u_xt + q w_x)          dy^dt
                  + (-u_yt + q w_y)          dt^dx
                  + q_x dx^theta + q_y dy^theta + q_t dt^theta .

    First derivatives live one cell inside the grid, their derivatives
    two cells inside; everything returned is aligned on the twice-shrunk
    interior.  Basis order: dx^dy, dy^dt, dt^dx, dx^theta, dy^theta,
    dt^theta.
    """
    hx, hu, ht = (sample.spacing(i) for i in range(3))
    Y = np.exp(np.broadcast_to(sample.us[None, :, None], sample.shape))
    y1, y2 = _interior(Y), _interior(_interior(Y))
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.log(sample.v)
        vw = sample.v * sample.w

        # level 1: one cell inside
        u_x1 = _d1(u, hx, 0)
        u_y1 = _d1(u, hu, 1) / y1
        u_t1 = _d1(u, ht, 2)
        q1 = u_t1 / _interior(sample.w)
        vw_t1 = _d1(vw, ht, 2)
        w_x1 = _d1(sample.w, hx, 0)
        w_y1 = _d1(sample.w, hu, 1) / y1
        u_xx1 = _d2(u, hx, 0)
        u_yy1 = (_d2(u, hu, 1) - _d1(u, hu, 1)) / (y1 * y1)

        # level 2: two cells inside
        u_xt2 = _d1(u_x1, ht, 2)
        u_yt2 = _d1(u_y1, ht, 2)
        q_x2 = _d1(q1, hx, 0)
        q_y2 = _d1(q1, hu, 1) / y2
        q_t2 = _d1(q1, ht, 2)

        a2 = _interior(u_xx1 + u_yy1 + q1 * vw_t1)
        b2 = -u_xt2 + _interior(q1 * w_x1)
        c2 = -u_yt2 + _interior(q1 * w_y1)
        return tuple(-0.5 * comp for comp in (a2, b2, c2, q_x2, q_y2, q_t2))


@dataclass(frozen=True)
class RicciAsdResult:
    rho_omega_residual: float
    sd_residual: float


def ricci_asd_check(sample: GridSample) -> RicciAsdResult:
    """Anti-self-duality residuals of the Ricci form of the sampled metric.

    rho is assembled from finite differences of log v in the adapted
    orthonormal coframe e0 = sqrt(vw) dx, e1 = sqrt(vw) dy,
    e2 = sqrt(w) dt, e3 = theta / sqrt(w); its self-dual components are

        P1 = rho_01 + rho_23 = (rho, omega),
        P2 = rho_02 - rho_13,   P3 = rho_03 + rho_12.

    Both returned residuals vanish to rounding for constant v and decay
    at second order for the ansatz.
    """
    _require_resolved(sample)
    a_c, b_c, c_c, q_x, q_y, q_t = _coordinate_ricci_components(sample)
    v2 = _interior(_interior(sample.v))
    w2 = _interior(_interior(sample.w))
    vw2 = v2 * w2
    sqrt_v = np.sqrt(v2)

    rho_01 = a_c / vw2
    rho_12 = b_c / (w2 * sqrt_v)
    rho_02 = -c_c / (w2 * sqrt_v)
    rho_03 = q_x / sqrt_v
    rho_13 = q_y / sqrt_v
    rho_23 = q_t

    p1 = rho_01 + rho_23
    p2 = rho_02 - rho_13
    p3 = rho_03 + rho_12
    sd = max(_finite_sup(p1), _finite_sup(p2), _finite_sup(p3))
    return RicciAsdResult(rho_omega_residual=_finite_sup(p1), sd_residual=sd)


def einstein_maxwell_closedness(sample: GridSample) -> float:
    """sup-norm of the discrete exterior derivative of F = rho + omega/4.

    F is sampled on the coordinate 2-form basis (theta enters only
    through d theta); the four 3-form components of dF are differenced
    from the sampled coefficients and must vanish to quadrature accuracy:

        dF_(xyt)  = F_A,t + F_B,x + F_C,y - F_D w_x - F_E w_y - F_H (vw)_t
        dF_(xy0)  = F_E,x - F_D,y
        dF_(tx0)  = F_D,t - F_H,x
        dF_(yt0)  = F_H,y - F_E,t

    (the d theta products enter with a minus sign: d(dx^theta) = -dx^d theta).
    """
    _require_resolved(sample, 7)
    hx, hu, ht = (sample.spacing(i) for i in range(3))
    # rho components on the twice-shrunk interior (level 2)
    a_c, b_c, c_c, d_c, e_c, h_c = _coordinate_ricci_components(sample)
    with np.errstate(divide="ignore", invalid="ignore"):
        vw = sample.v * sample.w
        # omega = v w dx^dy + dt^theta
        f_a = a_c + 0.25 * _interior(_interior(vw))
        f_b, f_c, f_d, f_e = b_c, c_c, d_c, e_c
        f_h = h_c + 0.25

        Y = np.exp(np.broadcast_to(sample.us[None, :, None], sample.shape))
        y1, y3 = _interior(Y), _interior(_interior(_interior(Y)))
        # curvature components of d theta at level 3
        vw_t3 = _interior(_interior(_d1(vw, ht, 2)))
        w_x3 = _interior(_interior(_d1(sample.w, hx, 0)))
        w_y3 = _interior(_interior(_d1(sample.w, hu, 1) / y1))

        terms = [
            _d1(f_a, ht, 2),
            _d1(f_b, hx, 0),
            _d1(f_c, hu, 1) / y3,
            -_interior(f_d) * w_x3,
            -_interior(f_e) * w_y3,
            -_interior(f_h) * vw_t3,
            _d1(f_e, hx, 0),
            _d1(f_d, hu, 1) / y3,
            _d1(f_d, ht, 2),
            _d1(f_h, hx, 0),
            _d1(f_h, hu, 1) / y3,
            _d1(f_e, ht, 2),
        ]
        r1 = sum(terms[:6])
        r2 = terms[6] - terms[7]
        r3 = terms[8] - terms[9]
        r4 = terms[10] - terms[11]
        # cancellation residual, relative to the terms that must cancel,
        # floored at the O(1) curvature scale of this geometry
        scale = max(1.0, max(_finite_sup(t) for t in terms))
        return max(_finite_sup(r) for r in (r1, r2, r3, r4)) / scale


@dataclass(frozen=True)
class ConnectionData:
    """Sampled curvature components of the circle connection, d theta = star dV.

    Component order matches dx^dy, dy^dt, dt^dx; the connection itself is
    never constructed, only its curvature is sampled.
    """

    dxdy: np.ndarray
    dydt: np.ndarray
    dtdx: np.ndarray
    closedness_residual: float


def connection_curvature(sample: GridSample) -> ConnectionData:
    """Sample d theta = (vw)_t dx^dy + w_x dy^dt + w_y dt^dx and check d(d theta) = 0."""
    _require_resolved(sample)
    hx, hu, ht = (sample.spacing(i) for i in range(3))
    Y = np.exp(np.broadcast_to(sample.us[None, :, None], sample.shape))
    with np.errstate(divide="ignore", invalid="ignore"):
        comp_xy = _d1(sample.v * sample.w, ht, 2)
        comp_yt = _d1(sample.w, hx, 0)
        comp_tx = _d1(sample.w, hu, 1) / _interior(Y)
        ddtheta = (
            _d1(comp_xy, ht, 2)
            + _d1(comp_yt, hx, 0)
            + _d1(comp_tx, hu, 1) / _interior(_interior(Y))
        )
    return ConnectionData(comp_xy, comp_yt, comp_tx, _finite_sup(ddtheta))


# ---------------------------------------------------------------------------
# Boundary flux and sphere flux.

def _potential_t_derivative(x, y, t_level, images):
    """Analytic dV/dt of the image sum at chart points (x, y, t_level)."""
    X = np.asarray(x, dtype=float)
    Yc = np.asarray(y, dtype=float)
    U = Yc * t_level
    Z = Yc * math.sqrt(1.0 - t_level * t_level)
    dU = Yc
    dZ = -Yc * t_level / math.sqrt(1.0 - t_level * t_level)
    total = np.zeros_like(X)
    for lo in range(0, len(images), _IMAGE_CHUNK):
        chunk = images[lo : lo + _IMAGE_CHUNK]
        dx = X[:, None] - chunk[None, :, 0]
        du = U[:, None] - chunk[None, :, 1]
        dz = Z[:, None] - chunk[None, :, 2]
        r2 = dx * dx + du * du + dz * dz
        c = 1.0 + r2 / (2.0 * Z[:, None] * chunk[None, :, 2])
        dc = (du * dU[:, None] + dz * dZ[:, None]) / (Z[:, None] * chunk[None, :, 2]) - (
            c - 1.0
        ) * dZ[:, None] / Z[:, None]
        total += (hyp.green_gradient_factor(c) * dc).sum(axis=1)
    return total


@dataclass(frozen=True)
class FluxResult:
    value: float
    tail: float
    quadrature_error: float
    epsilon: float

    @property
    def tolerance(self) -> float:
        """Acceptance tolerance: twice the truncation tail plus quadrature estimate."""
        return 2.0 * (self.tail + self.quadrature_error)


def boundary_flux(
    config: MonopoleConfig,
    epsilon: float,
    word_length: int = 4,
    n_phi: int = 256,
    n_radial: int = 48,
) -> FluxResult:
    """Integral of alpha = (1/2pi) star dV over the slice t = 1 - epsilon.

    The slice must lie above every charge.  The integral is taken over
    the Dirichlet fundamental domain; the exact value for the full image
    sum is minus the weight sum, so the result quantizes the topology of
    the circle bundle.  Reported alongside: the last-shell truncation
    tail and a quadrature estimate from comparing against a half-resolution
    rule.
    """
    t_level = 1.0 - epsilon
    if config.charges and t_level <= max(c.t for c in config.charges):
        raise ValueError(
            f"slice t = {t_level} does not lie above all charges "
            f"(max t = {max(c.t for c in config.charges)}); decrease epsilon"
        )
    if not -1.0 < t_level < 1.0:
        raise ValueError(f"epsilon = {epsilon} puts the slice outside the band")
    if not config.charges:
        return FluxResult(0.0, 0.0, 0.0, epsilon)

    def quadrature_value(np_, nr_):
        z, weights = hyp.dirichlet_quadrature(config.group, np_, nr_)
        xs, ys = z.real, z.imag
        total = 0.0
        tail = 0.0
        for charge in config.charges:
            shells = charge_image_shells(config, charge, word_length)
            all_images = np.concatenate([s for s in shells if len(s)], axis=0)
            vt = _potential_t_derivative(xs, ys, t_level, all_images)
            vt_last = _potential_t_derivative(xs, ys, t_level, shells[-1])
            total += float(np.sum(weights * vt)) / (2.0 * math.pi)
            tail += abs(float(np.sum(weights * vt_last))) / (2.0 * math.pi)
        return total, tail

    value, tail = quadrature_value(n_phi, n_radial)
    coarse, _ = quadrature_value(n_phi // 2, max(n_radial // 2, 8))
    return FluxResult(value, tail, abs(value - coarse), epsilon)


def sphere_flux(
    config: MonopoleConfig,
    charge_index: int = 0,
    radius: float = 0.08,
    n_theta: int = 48,
    n_phi: int = 96,
    word_length: int = 4,
) -> float:
    """Integral of alpha over a small geodesic sphere around one charge.

    The geodesic sphere of radius r about a half-space point with height
    Z is the euclidean sphere centered at height Z cosh r with radius
    Z sinh r; the flux of the hyperbolic gradient reduces to the
    euclidean normal derivative divided by the height.  The pole
    contributes exactly -1; all other images are harmonic inside.
    """
    charge = config.charges[charge_index]
    cx, cu, cz = charge.h3_point
    center = np.array([cx, cu, cz * math.cosh(radius)])
    e_radius = cz * math.sinh(radius)

    nodes, gl_w = np.polynomial.legendre.leggauss(n_theta)
    phis = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
    ct, ph = np.meshgrid(nodes, phis, indexing="ij")
    st = np.sqrt(1.0 - ct * ct)
    normal = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1)
    points = center[None, None, :] + e_radius * normal

    images = []
    for cidx, ch in enumerate(config.charges):
        shells = charge_image_shells(config, ch, word_length)
        images.append(np.concatenate([s for s in shells if len(s)], axis=0))
    images = np.concatenate(images, axis=0)

    flat = points.reshape(-1, 3)
    grad = np.zeros_like(flat)
    for lo in range(0, len(images), _IMAGE_CHUNK):
        chunk = images[lo : lo + _IMAGE_CHUNK]
        diff = flat[:, None, :] - chunk[None, :, :]
        r2 = (diff * diff).sum(axis=-1)
        c = 1.0 + r2 / (2.0 * flat[:, None, 2] * chunk[None, :, 2])
        dgdc = hyp.green_gradient_factor(c)
        dcdp = diff / (flat[:, None, 2:3] * chunk[None, :, 2:3])
        dcdp[..., 2] -= (c - 1.0) / flat[:, None, 2]
        grad += (dgdc[..., None] * dcdp).sum(axis=1)
    grad = grad.reshape(points.shape)

    integrand = (grad * normal).sum(axis=-1) / points[..., 2]
    total = float(np.sum(gl_w[:, None] * integrand)) * (2.0 * math.pi / n_phi) * e_radius**2
    return total / (2.0 * math.pi)


# ---------------------------------------------------------------------------
# Areas and boundary behavior.

def geometric_areas(config: MonopoleConfig) -> tuple[float, tuple[float, ...]]:
    """(fiber area, exceptional-curve areas) of the compactified surface.

    The moment interval [-1, 1] and fiber circles of the connection give
    the fiber area 2pi * 2 = 4pi exactly; the curve over q_j spans
    [-1, t_j] and has area 4pi w_j.
    """
    return FOUR_PI, tuple(FOUR_PI * c.weight for c in config.charges)


def boundary_behavior(sample: GridSample) -> tuple[float, float]:
    """One-sided slopes of ell = (1 - t^2)/V at the two boundary slices.

    Requires the t-axis to reach |t| >= 0.99.  Three-point one-sided
    differences (exact on quadratics) are taken along every (x, y)
    column; the worst column is returned, so assertions on the result
    are sup-norm assertions.  Expected slopes: +2 at t = -1, -2 at +1.
    """
    ts = sample.ts
    if len(ts) < 3:
        raise ValueError("need at least 3 t-samples for one-sided slopes")
    if ts[0] > -0.99 or ts[-1] < 0.99:
        raise ValueError(
            f"t-axis [{ts[0]}, {ts[-1]}] does not reach the boundary region |t| >= 0.99"
        )
    h = float(ts[1] - ts[0])
    ell = sample.ell
    lower = (-3.0 * ell[..., 0] + 4.0 * ell[..., 1] - ell[..., 2]) / (2.0 * h)
    upper = (3.0 * ell[..., -1] - 4.0 * ell[..., -2] + ell[..., -3]) / (2.0 * h)
    worst_lower = lower.reshape(-1)[np.argmax(np.abs(lower - 2.0))]
    worst_upper = upper.reshape(-1)[np.argmax(np.abs(upper + 2.0))]
    return float(worst_lower), float(worst_upper)


def exact_weights(ts: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    """Exact weights (1 + t)/2 from exact heights, for the lattice bridge."""
    out = []
    for t in ts:
        t = Fraction(t)
        if not -1 < t < 1:
            raise ValueError(f"height {t} outside (-1, 1)")
        out.append((1 + t) / 2)
    return tuple(out)
