"""Matrix and fourth-order elasticity tensor algebra.

Fourth-order tensors with minor and major symmetry act on the 6-dimensional
space of symmetric 3x3 matrices. They are stored as symmetric 6x6 matrices
in an orthonormal (Frobenius) basis of that space, so the eigenvalues of
the stored matrix are directly the eigenvalues of the quadratic form
xi -> C xi . xi on symmetric matrices. Two-sided ellipticity

    c0 ||xi + xi^T||^2 <= C xi . xi <= c1 ||xi + xi^T||^2

is then equivalent to eig(stored matrix)/4 in [c0, c1], because the skew
part drops out of both sides.

Also here: cell-wise tensor fields over a structured grid, with ellipticity
checks and a mean-oscillation (VMO-style) diagnostic. The oscillation sup
over all balls is not computable; it is approximated on a deterministic
lattice of balls (all cell centers, three radii per requested radius) and
the lattice is reported.
"""

from dataclasses import dataclass, field

import numpy as np

from .boxgrid import Grid3

SQRT2 = np.sqrt(2.0)

# index pairs of the orthonormal symmetric basis: three diagonal directions
# e_i x e_i, then (e_i x e_j + e_j x e_i)/sqrt(2) for (2,3), (1,3), (1,2)
BASIS_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))


class SymmetryViolation(ValueError):
    """Raised when raw coefficients break minor or major symmetry."""


def sym(m):
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def skew(m):
    m = np.asarray(m, dtype=float)
    return 0.5 * (m - np.swapaxes(m, -1, -2))


def frobenius(m):
    m = np.asarray(m, dtype=float)
    return np.sqrt(np.einsum("...ij,...ij->...", m, m))


def mat_to_basis(m):
    """Coordinates of sym(m) in the orthonormal symmetric basis, (..., 6)."""
    s = sym(m)
    return np.stack(
        [s[..., 0, 0], s[..., 1, 1], s[..., 2, 2],
         SQRT2 * s[..., 1, 2], SQRT2 * s[..., 0, 2], SQRT2 * s[..., 0, 1]],
        axis=-1,
    )


def basis_to_mat(v):
    """Inverse of mat_to_basis, (..., 6) -> symmetric (..., 3, 3)."""
    v = np.asarray(v, dtype=float)
    m = np.zeros(v.shape[:-1] + (3, 3))
    m[..., 0, 0] = v[..., 0]
    m[..., 1, 1] = v[..., 1]
    m[..., 2, 2] = v[..., 2]
    m[..., 1, 2] = m[..., 2, 1] = v[..., 3] / SQRT2
    m[..., 0, 2] = m[..., 2, 0] = v[..., 4] / SQRT2
    m[..., 0, 1] = m[..., 1, 0] = v[..., 5] / SQRT2
    return m


def basis_matrices():
    """The six orthonormal basis matrices, shape (6, 3, 3)."""
    return basis_to_mat(np.eye(6))


def _components_from_matrix(matrix):
    """Full a_ij^hk array (3,3,3,3) from the 6x6 orthonormal-basis matrix."""
    E = basis_matrices()
    return np.einsum("ab,aij,bhk->ijhk", matrix, E, E)


def _matrix_from_components(a):
    E = basis_matrices()
    return np.einsum("ijhk,aij,bhk->ab", a, E, E)


class Tensor4:
    """Fourth-order tensor with minor and major symmetry (21 coefficients)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (6, 6):
            raise ValueError("expected a 6x6 matrix in the symmetric basis")
        self.matrix = 0.5 * (matrix + matrix.T)
        self.matrix.setflags(write=False)

    @classmethod
    def isotropic(cls, lam, mu):
        """Tensor of C xi = lam tr(xi) I + mu (xi + xi^T)."""
        m = np.zeros((6, 6))
        m[:3, :3] = lam
        m[np.arange(3), np.arange(3)] += 2.0 * mu
        m[np.arange(3, 6), np.arange(3, 6)] = 2.0 * mu
        return cls(m)

    @classmethod
    def from_components(cls, a, tol=1e-12):
        """Build from a raw (3,3,3,3) coefficient array a_ij^hk.

        Raises SymmetryViolation if the minor or major symmetry defect of
        the unit-normalized coefficients exceeds `tol`. Constructors are
        exact; this tolerance only guards file input.
        """
        a = np.asarray(a, dtype=float)
        if a.shape != (3, 3, 3, 3):
            raise ValueError("expected a (3,3,3,3) coefficient array")
        scale = np.abs(a).max() or 1.0
        minor = max(np.abs(a - a.transpose(1, 0, 2, 3)).max(),
                    np.abs(a - a.transpose(0, 1, 3, 2)).max())
        major = np.abs(a - a.transpose(2, 3, 0, 1)).max()
        if minor / scale > tol or major / scale > tol:
            raise SymmetryViolation(
                f"symmetry defect too large: minor={minor / scale:.3e}, "
                f"major={major / scale:.3e} (tol {tol:.1e})")
        return cls(_matrix_from_components(a))

    @classmethod
    def from_voigt_upper(cls, coeffs):
        """Build from the 21 upper-triangle entries of the pair-indexed form.

        Entries are a_ij^hk at the pairs (11,22,33,23,13,12), row-major upper
        triangle: a_11^11, a_11^22, ..., a_11^12, a_22^22, ..., a_12^12.
        """
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (21,):
            raise ValueError("expected 21 coefficients")
        v = np.zeros((6, 6))
        iu = np.triu_indices(6)
        v[iu] = coeffs
        v = v + np.triu(v, 1).T
        scale = np.diag([1.0, 1.0, 1.0, SQRT2, SQRT2, SQRT2])
        return cls(scale @ v @ scale)

    def voigt_upper(self):
        """The 21 pair-indexed coefficients (inverse of from_voigt_upper)."""
        scale = np.diag([1.0, 1.0, 1.0, 1.0 / SQRT2, 1.0 / SQRT2, 1.0 / SQRT2])
        v = scale @ self.matrix @ scale
        return v[np.triu_indices(6)]

    def components(self):
        return _components_from_matrix(self.matrix)

    def apply(self, xi):
        """C xi, broadcasting over leading dims of xi. Skew input maps to 0."""
        return basis_to_mat(mat_to_basis(xi) @ self.matrix.T)

    def inverse_on_sym(self):
        """Inverse as an operator on symmetric matrices."""
        return Tensor4(np.linalg.inv(self.matrix))

    def __add__(self, other):
        return Tensor4(self.matrix + other.matrix)

    def __sub__(self, other):
        return Tensor4(self.matrix - other.matrix)

    def __mul__(self, s):
        return Tensor4(self.matrix * float(s))

    __rmul__ = __mul__

    def __repr__(self):
        lo, hi = self.relative_eigenvalue_range()
        return f"Tensor4(rel eigs in [{lo:.4g}, {hi:.4g}])"

    def relative_eigenvalue_range(self):
        w = np.linalg.eigvalsh(self.matrix) / 4.0
        return float(w[0]), float(w[-1])


def apply_tensor(C, xi):
    """Contraction (C xi)_ij = sum_hk a_ij^hk xi_hk."""
    return C.apply(xi)


@dataclass(frozen=True)
class EllipticityReport:
    passed: bool
    lambda_min: float
    lambda_max: float
    c0: float
    c1: float

    def __bool__(self):
        return self.passed


def check_ellipticity(C, c0, c1, tol=1e-12):
    """Two-sided ellipticity check against ||xi + xi^T||^2.

    Accepts a Tensor4 or a raw (3,3,3,3) coefficient array; raw arrays are
    symmetry-validated first (SymmetryViolation on failure). Passes iff all
    relative eigenvalues lie in [c0, c1] (closed, up to roundoff slack).
    """
    if not isinstance(C, Tensor4):
        C = Tensor4.from_components(np.asarray(C, dtype=float), tol=tol)
    lo, hi = C.relative_eigenvalue_range()
    slack = 1e-12 * max(abs(lo), abs(hi), 1.0)
    passed = (lo >= c0 - slack) and (hi <= c1 + slack)
    return EllipticityReport(passed, lo, hi, float(c0), float(c1))


class ElasticTensorField:
    """Cell-wise fourth-order tensor data C(x) over a structured grid."""

    def __init__(self, grid: Grid3, matrices):
        matrices = np.ascontiguousarray(matrices, dtype=float)
        if matrices.shape != grid.shape + (6, 6):
            raise ValueError("matrices must have shape grid.shape + (6, 6)")
        self.grid = grid
        self.matrices = 0.5 * (matrices + np.swapaxes(matrices, -1, -2))

    # ---- generators ----

    @classmethod
    def constant(cls, grid, tensor: Tensor4):
        m = np.broadcast_to(tensor.matrix, grid.shape + (6, 6))
        return cls(grid, m)

    @classmethod
    def isotropic(cls, grid, lam, mu):
        return cls.constant(grid, Tensor4.isotropic(lam, mu))

    @classmethod
    def two_phase_laminate(cls, grid, axis, fraction, tensor_a, tensor_b,
                           period=None):
        """Layers normal to `axis`: phase a on the first `fraction` of each
        period, phase b on the rest. One period spans the box unless `period`
        is given. Cell-center sampling keeps interfaces face-aligned; the
        realized (sampled) fraction is stored as `effective_fraction`.
        """
        axis = int(axis)
        x = grid.axes()[axis]
        per = grid.size[axis] if period is None else float(period)
        t = ((x - grid.origin[axis]) / per) % 1.0
        in_a = t < fraction
        m = np.empty(grid.shape + (6, 6))
        shp = [1, 1, 1]
        shp[axis] = grid.shape[axis]
        mask = in_a.reshape(shp + [1, 1])
        m[...] = np.where(mask, tensor_a.matrix, tensor_b.matrix)
        out = cls(grid, m)
        out.effective_fraction = float(np.mean(in_a))
        return out

    @classmethod
    def periodic_sampled(cls, grid, cell_field, epsilon):
        """C(x) = C_Y((x - origin)/epsilon mod 1), with C_Y a field on the
        unit cell, sampled at the cell centers of `grid`."""
        eps = float(epsilon)
        cgrid = cell_field.grid
        axes_idx = []
        for d in range(3):
            x = grid.axes()[d]
            y = ((x - grid.origin[d]) / eps) % 1.0
            j = ((y - cgrid.origin[d]) / cgrid.spacing[d] - 0.5)
            j = np.rint(j).astype(int) % cgrid.shape[d]
            axes_idx.append(j)
        ii, jj, kk = np.meshgrid(*axes_idx, indexing="ij")
        return cls(grid, cell_field.matrices[ii, jj, kk])

    # ---- queries ----

    @property
    def flat(self):
        """(ncells, 6, 6) view in C order, for assembly loops."""
        return self.matrices.reshape(-1, 6, 6)

    def tensor_at(self, index):
        return Tensor4(self.matrices[tuple(index)])

    def is_constant(self):
        return bool(np.all(self.matrices == self.matrices.reshape(-1, 6, 6)[0]))

    def mean_tensor(self):
        return Tensor4(self.matrices.reshape(-1, 6, 6).mean(axis=0))

    def harmonic_mean_tensor(self):
        inv = np.linalg.inv(self.matrices.reshape(-1, 6, 6))
        return Tensor4(np.linalg.inv(inv.mean(axis=0)))

    def apply(self, xi):
        """Apply the per-cell tensor to matrix data shaped grid.shape + (...,3,3)."""
        v = mat_to_basis(xi)
        t = np.einsum("xyzab,xyz...b->xyz...a", self.matrices, v)
        return basis_to_mat(t)

    def check_ellipticity(self, c0, c1):
        """Every cell must pass; returns report with field-wide extremes."""
        w = np.linalg.eigvalsh(self.matrices.reshape(-1, 6, 6)) / 4.0
        lo = float(w[:, 0].min())
        hi = float(w[:, -1].max())
        slack = 1e-12 * max(abs(lo), abs(hi), 1.0)
        passed = (lo >= c0 - slack) and (hi <= c1 + slack)
        return EllipticityReport(passed, lo, hi, float(c0), float(c1))


@dataclass
class VmoReport:
    """Sampled mean-oscillation moduli on a decreasing radius schedule."""

    radii: list
    omegas: list
    rho_schedule: list = field(default_factory=list)
    clamped: bool = False
    lattice: str = "cell centers; rho in {r, r/2, r/4}; balls inside the box"
    monotone: bool = True

    def as_dict(self):
        return {
            "radii": list(self.radii),
            "omegas": list(self.omegas),
            "clamped": self.clamped,
            "lattice": self.lattice,
            "monotone": self.monotone,
        }


def _ball_oscillation(field, rho):
    """Max over admissible centers of the mean abs deviation over a ball.

    Balls are unions of cells whose centers lie within rho of the center
    cell's center; only balls fully inside the box count. Matrix size is
    the Frobenius norm in the orthonormal basis.
    """
    grid = field.grid
    h = grid.spacing
    r_cells = [int(np.floor(rho / h[d])) for d in range(3)]
    offs = []
    for di in range(-r_cells[0], r_cells[0] + 1):
        for dj in range(-r_cells[1], r_cells[1] + 1):
            for dk in range(-r_cells[2], r_cells[2] + 1):
                if (di * h[0]) ** 2 + (dj * h[1]) ** 2 + (dk * h[2]) ** 2 <= rho * rho:
                    offs.append((di, dj, dk))
    if not offs:
        return None
    m = int(max(max(abs(o[d]) for o in offs) for d in range(3)))
    nx, ny, nz = grid.shape
    if 2 * m >= min(nx, ny, nz):
        return None
    C = field.matrices.reshape(grid.shape + (36,))
    core = (slice(m, nx - m), slice(m, ny - m), slice(m, nz - m))
    mean = np.zeros(C[core].shape)
    for di, dj, dk in offs:
        mean += C[m + di:nx - m + di, m + dj:ny - m + dj, m + dk:nz - m + dk]
    mean /= len(offs)
    osc = np.zeros(mean.shape[:-1])
    for di, dj, dk in offs:
        dev = C[m + di:nx - m + di, m + dj:ny - m + dj, m + dk:nz - m + dk] - mean
        osc += np.sqrt((dev ** 2).sum(axis=-1))
    osc /= len(offs)
    return float(osc.max())


def vmo_modulus(field: ElasticTensorField, radii):
    """Approximate oscillation modulus of a tensor field for each radius.

    Radii above the box diameter are clamped (and flagged). For each r the
    sup is taken over the ball lattice with rho in {r, r/2, r/4}; radii too
    small to contain any cell ball contribute 0.
    """
    diam = field.grid.diameter
    rs = []
    clamped = False
    for r in radii:
        r = float(r)
        if r <= 0:
            raise ValueError("radii must be positive")
        if r > diam:
            r = diam
            clamped = True
        rs.append(r)
    omegas = []
    schedule = []
    for r in rs:
        best = 0.0
        rhos = [r, r / 2.0, r / 4.0]
        schedule.append(rhos)
        for rho in rhos:
            val = _ball_oscillation(field, rho)
            if val is not None:
                best = max(best, val)
        omegas.append(best)
    order = np.argsort(rs)[::-1]
    mono = all(omegas[order[i]] >= omegas[order[i + 1]] - 1e-14
               for i in range(len(order) - 1))
    return VmoReport(radii=rs, omegas=omegas, rho_schedule=schedule,
                     clamped=clamped, monotone=mono)
