"""Spectral exterior calculus on the flat 4-torus and the operator d+delta.

Differential forms on T^4 = (R/2piZ)^4 are truncated to Fourier modes
with every frequency component in [-N, N]; coefficients are indexed by
the mode and by the coordinate component (k-subsets of {0,1,2,3} in
lexicographic order).  All constant-coefficient operators act mode by
mode, so exterior calculus identities (d o d = 0, adjointness of d and
delta = -*d*, the Hodge split of 2-forms into +-1 eigenspaces of *) hold
exactly in the truncated space and kernel or cokernel dimensions are
honest integers separated from the numerical zeros by a large spectral
gap (threshold 1e-10).

The deformation operator of a scalar-flat Kahler surface is

    S(alpha) = d+ delta alpha - (rho, alpha) omega / 2 :  ASD -> SD,

elliptic of index -tau.  On the flat torus rho = 0, so S = d+ delta,
its kernel and cokernel are the constant anti-self-dual and self-dual
forms (dimensions b- = b+ = 3), and the index is 0 = -tau(T^4).  The
curved terms (the trace-free Ricci action and the -(rho, alpha) omega/2
correction) are carried in the assembly API as optional constant
coefficients defaulting to zero.

Complex structure: z1 = x0 + i x1, z2 = x2 + i x3, Kahler form
omega = dx0^dx1 + dx2^dx3.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

SV_THRESHOLD = 1e-10
COMPONENTS = {k: tuple(itertools.combinations(range(4), k)) for k in range(5)}
_COMP_INDEX = {k: {c: i for i, c in enumerate(COMPONENTS[k])} for k in range(5)}


def _perm_sign(perm) -> int:
    sign = 1
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b]:
                sign = -sign
    return sign


def star_matrix(degree: int) -> np.ndarray:
    """Hodge star on coordinate components: *(dx_I) = sign(I, I^c) dx_{I^c}."""
    src = COMPONENTS[degree]
    dst = _COMP_INDEX[4 - degree]
    mat = np.zeros((len(COMPONENTS[4 - degree]), len(src)))
    for i, comps in enumerate(src):
        complement = tuple(sorted(set(range(4)) - set(comps)))
        mat[dst[complement], i] = _perm_sign(tuple(comps) + complement)
    return mat


_STAR = {k: star_matrix(k) for k in range(5)}

# Self-dual / anti-self-dual orthonormal bases of the 2-form components,
# columns of 6x3 matrices: (e01 +- e23, e02 -+ e13, e03 +- e12) / sqrt2.
def _sd_asd_bases():
    idx = _COMP_INDEX[2]
    plus = np.zeros((6, 3))
    minus = np.zeros((6, 3))
    pairs = [((0, 1), (2, 3), 1.0), ((0, 2), (1, 3), -1.0), ((0, 3), (1, 2), 1.0)]
    for col, (a, b, sign) in enumerate(pairs):
        plus[idx[a], col] = 1.0 / np.sqrt(2.0)
        plus[idx[b], col] = sign / np.sqrt(2.0)
        minus[idx[a], col] = 1.0 / np.sqrt(2.0)
        minus[idx[b], col] = -sign / np.sqrt(2.0)
    return plus, minus


SD_BASIS, ASD_BASIS = _sd_asd_bases()
# Kahler form omega = dx0^dx1 + dx2^dx3 in components, = sqrt2 * (first SD vector)
OMEGA_COMPONENTS = np.sqrt(2.0) * SD_BASIS[:, 0]
# real and imaginary parts of dz1^dz2 span the (2,0)+(0,2) directions
_NON_11 = SD_BASIS[:, 1:3]


def d_matrix(degree: int, freq) -> np.ndarray:
    """Mode matrix of the exterior derivative at integer frequency vector."""
    freq = np.asarray(freq)
    rows, cols = len(COMPONENTS[degree + 1]), len(COMPONENTS[degree])
    mat = np.zeros((rows, cols), dtype=complex)
    tgt = _COMP_INDEX[degree + 1]
    for ci, comps in enumerate(COMPONENTS[degree]):
        for j in range(4):
            if j in comps:
                continue
            merged = tuple(sorted((j,) + comps))
            mat[tgt[merged], ci] += 1j * freq[j] * (-1) ** merged.index(j)
    return mat


def delta_matrix(degree: int, freq) -> np.ndarray:
    """Mode matrix of the codifferential -*d* on degree-k forms."""
    return -(_STAR[5 - degree] @ d_matrix(4 - degree, freq) @ _STAR[degree])


# ---------------------------------------------------------------------------
# Truncated forms.

@dataclass(eq=False)
class FourierForm:
    """Truncated form: complex coefficients, shape (2N+1,)*4 + (components,).

    Axis i of the mode block indexes the frequency n_i = index - N.  A
    real form satisfies coeff(-n) = conj(coeff(n)).
    """

    degree: int
    truncation: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not 0 <= self.degree <= 4:
            raise ValueError(f"degree must be 0..4, got {self.degree}")
        m = 2 * self.truncation + 1
        expected = (m,) * 4 + (len(COMPONENTS[self.degree]),)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != {expected}")

    @classmethod
    def zero(cls, degree: int, truncation: int) -> "FourierForm":
        m = 2 * truncation + 1
        return cls(degree, truncation, np.zeros((m,) * 4 + (len(COMPONENTS[degree]),), complex))

    @classmethod
    def from_modes(cls, degree, truncation, entries: Iterable) -> "FourierForm":
        """Build from (frequency 4-tuple, component tuple, coefficient) entries."""
        form = cls.zero(degree, truncation)
        n = truncation
        for freq, comps, value in entries:
            if any(abs(f) > n for f in freq):
                raise ValueError(f"frequency {freq} outside truncation {n}")
            idx = tuple(f + n for f in freq) + (_COMP_INDEX[degree][tuple(comps)],)
            form.coeffs[idx] += value
        return form

    def frequency_axis(self, j: int) -> np.ndarray:
        """Frequency values n_j broadcast over the coefficient array."""
        m = 2 * self.truncation + 1
        shape = [1] * 5
        shape[j] = m
        return np.arange(-self.truncation, self.truncation + 1).reshape(shape)

    def is_real(self, tol: float = 1e-12) -> bool:
        conj_flip = np.conj(np.flip(self.coeffs, axis=(0, 1, 2, 3)))
        return bool(np.abs(self.coeffs - conj_flip).max() <= tol)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def random_real_form(degree: int, truncation: int, rng: np.random.Generator) -> FourierForm:
    m = 2 * truncation + 1
    shape = (m,) * 4 + (len(COMPONENTS[degree]),)
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    c = 0.5 * (c + np.conj(np.flip(c, axis=(0, 1, 2, 3))))
    return FourierForm(degree, truncation, c)


def exterior_d(form: FourierForm) -> FourierForm:
    """Spectral exterior derivative; exact on the truncated space."""
    if form.degree >= 4:
        raise ValueError("no exterior derivative of a 4-form in dimension 4")
    out = FourierForm.zero(form.degree + 1, form.truncation)
    tgt = _COMP_INDEX[form.degree + 1]
    for ci, comps in enumerate(COMPONENTS[form.degree]):
        for j in range(4):
            if j in comps:
                continue
            merged = tuple(sorted((j,) + comps))
            sign = (-1) ** merged.index(j)
            out.coeffs[..., tgt[merged]] += (
                1j * sign * form.frequency_axis(j)[..., 0] * form.coeffs[..., ci]
            )
    return out


def hodge_star(form: FourierForm) -> FourierForm:
    return FourierForm(
        4 - form.degree, form.truncation, form.coeffs @ _STAR[form.degree].T
    )


def codifferential(form: FourierForm) -> FourierForm:
    """delta = -*d*; the formal adjoint of d, exactly, mode by mode."""
    if form.degree == 0:
        raise ValueError("no codifferential of a 0-form")
    starred = hodge_star(form)
    dstar = exterior_d(starred)
    out = hodge_star(dstar)
    out.coeffs = -out.coeffs
    return out


def inner_product(a: FourierForm, b: FourierForm) -> complex:
    """L^2 pairing <a, b> in the orthonormal mode/component basis."""
    if (a.degree, a.truncation) != (b.degree, b.truncation):
        raise ValueError("forms live in different spaces")
    return complex(np.vdot(a.coeffs, b.coeffs))


def sd_project(form: FourierForm) -> tuple[FourierForm, FourierForm]:
    """Split a 2-form into its +1 and -1 Hodge-star eigenparts."""
    if form.degree != 2:
        raise ValueError("self-dual split is defined for 2-forms")
    plus = form.coeffs @ SD_BASIS @ SD_BASIS.T
    minus = form.coeffs @ ASD_BASIS @ ASD_BASIS.T
    return (
        FourierForm(2, form.truncation, plus),
        FourierForm(2, form.truncation, minus),
    )


# ---------------------------------------------------------------------------
# Block operators.

def _mode_range(truncation: int):
    rng = range(-truncation, truncation + 1)
    return list(itertools.product(rng, repeat=4))


@dataclass(eq=False)
class BlockOperator:
    """Frequency-block-diagonal operator between truncated form spaces.

    `blocks[i]` is the matrix on the i-th mode of `modes`; constant
    coefficient operators never couple modes, so the singular values of
    the whole operator are the union over blocks.
    """

    modes: list[tuple[int, int, int, int]]
    blocks: np.ndarray  # (n_modes, rows, cols)

    def singular_values(self) -> np.ndarray:
        return np.sort(np.linalg.svd(self.blocks, compute_uv=False).ravel())[::-1]

    def rank(self, threshold: float = SV_THRESHOLD) -> int:
        return int((np.linalg.svd(self.blocks, compute_uv=False) > threshold).sum())

    def kernel_dimension(self, threshold: float = SV_THRESHOLD) -> int:
        return self.blocks.shape[0] * self.blocks.shape[2] - self.rank(threshold)

    def cokernel_dimension(self, threshold: float = SV_THRESHOLD) -> int:
        return self.blocks.shape[0] * self.blocks.shape[1] - self.rank(threshold)

    def index(self, threshold: float = SV_THRESHOLD) -> int:
        return self.kernel_dimension(threshold) - self.cokernel_dimension(threshold)

    def adjoint_blocks(self) -> np.ndarray:
        return np.conj(np.transpose(self.blocks, (0, 2, 1)))

    def dense(self) -> np.ndarray:
        """Assemble the full matrix; for cross-checks at small truncation."""
        n, r, c = self.blocks.shape
        out = np.zeros((n * r, n * c), dtype=complex)
        for i in range(n):
            out[i * r : (i + 1) * r, i * c : (i + 1) * c] = self.blocks[i]
        return out


def operator_s(
    truncation: int,
    ricci: np.ndarray | None = None,
    trace_free_ricci: np.ndarray | None = None,
) -> BlockOperator:
    """The deformation operator on ASD 2-forms, blockwise over frequencies.

    Flat default: S = d+ delta : ASD -> SD in the orthonormal SD/ASD
    bases.  `ricci` (3 ASD components of a constant Ricci form) switches
    on the -(rho, alpha) omega / 2 correction; `trace_free_ricci` (a
    constant 3x3 matrix in the same bases) adds the half trace-free Ricci
    action used on merely anti-self-dual backgrounds.  Both default to
    zero and are exercised only as assembly hooks.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    modes = _mode_range(truncation)
    blocks = np.empty((len(modes), 3, 3), dtype=complex)
    correction = np.zeros((3, 3))
    if ricci is not None:
        ricci = np.asarray(ricci, dtype=float)
        omega_sd = SD_BASIS.T @ OMEGA_COMPONENTS  # = (sqrt2, 0, 0)
        correction = correction - 0.5 * np.outer(omega_sd, ricci)
    if trace_free_ricci is not None:
        correction = correction + np.asarray(trace_free_ricci, dtype=float)
    for i, mode in enumerate(modes):
        freq = np.array(mode)
        blocks[i] = (
            SD_BASIS.T @ d_matrix(1, freq) @ delta_matrix(2, freq) @ ASD_BASIS
            + correction
        )
    return BlockOperator(modes, blocks)


def operator_s_adjoint(
    truncation: int,
    ricci: np.ndarray | None = None,
    trace_free_ricci: np.ndarray | None = None,
) -> BlockOperator:
    """The adjoint d- delta - (., omega) rho / 2 : SD -> ASD, blockwise."""
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    modes = _mode_range(truncation)
    blocks = np.empty((len(modes), 3, 3), dtype=complex)
    correction = np.zeros((3, 3))
    if ricci is not None:
        ricci = np.asarray(ricci, dtype=float)
        omega_sd = SD_BASIS.T @ OMEGA_COMPONENTS
        correction = correction - 0.5 * np.outer(ricci, omega_sd)
    if trace_free_ricci is not None:
        correction = correction + np.asarray(trace_free_ricci, dtype=float).T
    for i, mode in enumerate(modes):
        freq = np.array(mode)
        blocks[i] = (
            ASD_BASIS.T @ d_matrix(1, freq) @ delta_matrix(2, freq) @ SD_BASIS
            + correction
        )
    return BlockOperator(modes, blocks)


# ---------------------------------------------------------------------------
# Kernel statements.

def _null_space(mat: np.ndarray, threshold: float = SV_THRESHOLD) -> np.ndarray:
    u, s, vh = np.linalg.svd(mat, full_matrices=True)
    rank = int((s > threshold).sum())
    return vh[rank:].conj().T


@dataclass(frozen=True)
class KernelComparison:
    equal: bool
    dim_d_plus: int
    dim_d: int
    containment_residual: float


def d_plus_kernel_equals_closed(truncation: int) -> KernelComparison:
    """Compare ker(d+) with ker(d) on truncated 1-forms, as subspaces.

    On a compact 4-manifold a 1-form with self-dual exterior derivative
    is closed; in the truncated space both kernels decompose over modes
    (4 constants plus one exact line per nonzero mode) and must agree
    with containment residual below 1e-10.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    dim_plus = 0
    dim_d = 0
    residual = 0.0
    for mode in _mode_range(truncation):
        freq = np.array(mode)
        d1 = d_matrix(1, freq)
        dplus = SD_BASIS.T @ d1
        null_plus = _null_space(dplus)
        null_d = _null_space(d1)
        dim_plus += null_plus.shape[1]
        dim_d += null_d.shape[1]
        if null_plus.shape[1]:
            # containment of ker d+ in ker d
            proj = null_d @ (null_d.conj().T @ null_plus)
            residual = max(residual, float(np.abs(proj - null_plus).max()))
    return KernelComparison(
        equal=(dim_plus == dim_d and residual < SV_THRESHOLD),
        dim_d_plus=dim_plus,
        dim_d=dim_d,
        containment_residual=residual,
    )


def lichnerowicz_kernel(truncation: int, include_constants: bool = False) -> int:
    """Kernel dimension of the squared Laplacian on truncated functions.

    The mode eigenvalue is |n|^4; on the mean-zero subspace the kernel is
    trivial, and admitting constants adds exactly the constants.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    dim = 0
    for mode in _mode_range(truncation):
        eigenvalue = float(np.dot(mode, mode)) ** 2
        if mode == (0, 0, 0, 0) and not include_constants:
            continue
        if eigenvalue <= SV_THRESHOLD:
            dim += 1
    return dim


@dataclass(frozen=True)
class CorrespondenceResult:
    dim_ker_scalar_linearization: int
    dim_ker_s: int
    injection_residual: float

    @property
    def dimensions(self) -> tuple[int, int]:
        return (self.dim_ker_scalar_linearization, self.dim_ker_s)


def kernel_correspondence(truncation: int) -> CorrespondenceResult:
    """Kernels of the scalar-curvature linearization and of S, compared.

    The linearization acts on closed real (1,1)-forms with mean-zero
    trace: on the flat torus it is phi -> Laplacian(trace phi), and
    phi -> (primitive part of phi) identifies its kernel with ker S.
    Both dimensions and the injectivity defect of the identification are
    returned; the Kahler form itself has trace 2 and is excluded by the
    mean-zero constraint.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    # orthonormal basis of the real (1,1) directions: omega/sqrt2 and the ASD triple
    e11 = np.column_stack([OMEGA_COMPONENTS / np.sqrt(2.0), ASD_BASIS])
    dim_sprime = 0
    dim_s = 0
    residual = 0.0
    for mode in _mode_range(truncation):
        freq = np.array(mode)
        closed = d_matrix(2, freq) @ e11  # closedness constraint on (1,1) coords
        rows = [closed]
        if mode == (0, 0, 0, 0):
            rows.append((OMEGA_COMPONENTS @ e11)[None, :])  # mean-zero trace
        basis = _null_space(np.vstack(rows))
        s_block = SD_BASIS.T @ d_matrix(1, freq) @ delta_matrix(2, freq) @ ASD_BASIS
        dim_s += 3 - int(
            (np.linalg.svd(s_block, compute_uv=False) > SV_THRESHOLD).sum()
        )
        if basis.shape[1] == 0:
            continue
        # scalar linearization: |n|^2 * trace; trace phi = (phi, omega)
        lam = float(np.dot(mode, mode)) * (OMEGA_COMPONENTS @ e11 @ basis)[None, :]
        kernel = basis @ _null_space(lam)
        if kernel.shape[1]:
            dim_sprime += kernel.shape[1]
            # primitive part = coordinates along the ASD triple; the map
            # phi -> phi_0 is an isometry on ker of the linearization, so
            # 1 - sigma_min measures its injectivity defect there
            primitive = kernel[1:, :]
            sv = np.linalg.svd(primitive, compute_uv=False)
            sigma_min = float(sv[kernel.shape[1] - 1]) if len(sv) >= kernel.shape[1] else 0.0
            residual = max(residual, 1.0 - sigma_min)
    return CorrespondenceResult(dim_sprime, dim_s, residual)
