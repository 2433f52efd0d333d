"""Uniform cell-centered grids over axis-aligned boxes.

Shared plumbing for the rasterizer, the spectral solver and the field
containers: cell centers, padding, and trilinear sampling of cell data.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid3:
    """Structured partition of an axis-aligned box into uniform cells.

    Values attached to a Grid3 live at cell centers, in C order with
    shape (nx, ny, nz) trailing dimensions.
    """

    origin: tuple
    spacing: tuple
    shape: tuple

    @classmethod
    def from_box(cls, origin, size, shape):
        origin = tuple(float(v) for v in origin)
        shape = tuple(int(n) for n in shape)
        spacing = tuple(float(s) / n for s, n in zip(size, shape))
        return cls(origin, spacing, shape)

    @property
    def size(self):
        return tuple(h * n for h, n in zip(self.spacing, self.shape))

    @property
    def ncells(self):
        return int(np.prod(self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def hmax(self):
        return max(self.spacing)

    @property
    def diameter(self):
        return float(np.linalg.norm(self.size))

    def axes(self):
        """Cell-center coordinates along each axis."""
        return [self.origin[d] + (np.arange(self.shape[d]) + 0.5) * self.spacing[d]
                for d in range(3)]

    def centers(self):
        """All cell centers, shape (nx, ny, nz, 3)."""
        X, Y, Z = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([X, Y, Z], axis=-1)

    def bounds(self):
        lo = np.asarray(self.origin)
        return lo, lo + np.asarray(self.size)

    def padded(self, pad_cells):
        """Extend the box by `pad_cells` whole cells per face and axis.

        Returns (padded grid, tuple of slices locating this grid's block
        inside the padded one).
        """
        pad = tuple(int(p) for p in pad_cells)
        origin = tuple(self.origin[d] - pad[d] * self.spacing[d] for d in range(3))
        shape = tuple(self.shape[d] + 2 * pad[d] for d in range(3))
        inner = tuple(slice(pad[d], pad[d] + self.shape[d]) for d in range(3))
        return Grid3(origin, self.spacing, shape), inner

    def trilinear(self, values, points):
        """Sample cell-centered data at arbitrary points.

        values: array with trailing spatial shape self.shape and arbitrary
        leading component dims, i.e. (..., nx, ny, nz).
        points: (..., 3). Points are clamped to the cell-center hull.
        """
        pts = np.asarray(points, dtype=float)
        out_shape = pts.shape[:-1]
        p = pts.reshape(-1, 3)
        idx = []
        frac = []
        for d in range(3):
            t = (p[:, d] - self.origin[d]) / self.spacing[d] - 0.5
            t = np.clip(t, 0.0, self.shape[d] - 1.0)
            i0 = np.minimum(t.astype(int), self.shape[d] - 2) if self.shape[d] > 1 \
                else np.zeros(len(t), dtype=int)
            idx.append(i0)
            frac.append(t - i0)
        comp = values.shape[:-3]
        vals = values.reshape(comp + self.shape)
        acc = np.zeros(comp + (len(p),))
        for cx in (0, 1):
            wx = (1 - frac[0]) if cx == 0 else frac[0]
            for cy in (0, 1):
                wy = (1 - frac[1]) if cy == 0 else frac[1]
                for cz in (0, 1):
                    wz = (1 - frac[2]) if cz == 0 else frac[2]
                    w = wx * wy * wz
                    acc += w * vals[..., idx[0] + cx, idx[1] + cy, idx[2] + cz]
        return acc.reshape(comp + out_shape)
