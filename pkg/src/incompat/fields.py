"""Matrix-valued sample fields and their integral norms.

Two layouts share one container:
  * "cell":  samples at the cell centers of a Grid3, values (nx,ny,nz,3,3).
             For fields living on a padded box, `inner` marks the block of
             cells covering the physical domain; norms and means use only
             that block (midpoint rule, padding excluded).
  * "gauss": samples at the 2x2x2 Gauss points of a hex mesh,
             values (ne, 8, 3, 3); quadrature weights come with the mesh.
"""

import numpy as np

from .tensors import frobenius, skew

LP_EXPONENTS = (1.5, 2.0, 3.0)


class TensorField:
    """3x3 matrix value per sample point, with a norm cache."""

    def __init__(self, values, layout, grid=None, inner=None, weight=None):
        self.values = np.asarray(values, dtype=float)
        if self.values.shape[-2:] != (3, 3):
            raise ValueError("values must end in (3, 3)")
        if layout not in ("cell", "gauss"):
            raise ValueError("layout must be 'cell' or 'gauss'")
        self.layout = layout
        self.grid = grid
        self.inner = inner
        if layout == "cell":
            if grid is None:
                raise ValueError("cell layout needs a grid")
            weight = grid.cell_volume
        elif weight is None:
            raise ValueError("gauss layout needs a quadrature weight")
        self.weight = float(weight)
        self._norms = {}

    @classmethod
    def on_cells(cls, values, grid, inner=None):
        return cls(values, "cell", grid=grid, inner=inner)

    @classmethod
    def on_gauss(cls, values, mesh):
        return cls(values, "gauss", weight=mesh.wdet)

    def domain_values(self):
        """Samples over the physical domain only, shape (ns, 3, 3)."""
        v = self.values
        if self.layout == "cell" and self.inner is not None:
            v = v[self.inner]
        return v.reshape(-1, 3, 3)

    def domain_volume(self):
        return self.weight * len(self.domain_values())

    def mean(self):
        return self.domain_values().mean(axis=0)

    def mean_skew(self):
        """Average antisymmetric part over the domain."""
        return skew(self.mean())

    def copy_with(self, values):
        return TensorField(values, self.layout, grid=self.grid,
                           inner=self.inner, weight=self.weight)

    def __add__(self, other):
        return self.copy_with(self.values + other.values)

    def __sub__(self, other):
        return self.copy_with(self.values - other.values)

    def __mul__(self, s):
        return self.copy_with(self.values * float(s))

    __rmul__ = __mul__

    def shifted(self, const):
        """Subtract a constant matrix from every sample."""
        return self.copy_with(self.values - np.asarray(const, dtype=float))

    def sample_at(self, points):
        """Trilinear evaluation of a cell field at arbitrary points."""
        if self.layout != "cell":
            raise ValueError("sampling requires the cell layout")
        comp_first = np.moveaxis(self.values, (-2, -1), (0, 1))
        out = self.grid.trilinear(comp_first, points)
        return np.moveaxis(out, (0, 1), (-2, -1))

    def lp_norm(self, p):
        p = float(p)
        if p not in LP_EXPONENTS:
            raise ValueError(f"p must be one of {LP_EXPONENTS}")
        if p not in self._norms:
            mags = frobenius(self.domain_values())
            self._norms[p] = float((self.weight * (mags ** p).sum()) ** (1.0 / p))
        return self._norms[p]


def lp_norm(f: TensorField, p):
    """Midpoint/Gauss approximation of the L^p norm over the domain samples."""
    return f.lp_norm(p)
