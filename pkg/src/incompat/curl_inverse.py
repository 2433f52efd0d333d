"""Construction of a strain field with prescribed curl on the padded box.

Per matrix row the periodic vector Poisson problem lap psi = -mu_row is
solved spectrally and the row is taken as curl psi. Because the input grid
measure is solenoidal and all derivatives share the same exact ik symbols,
the discrete curl of the output reproduces the measure and the discrete
row divergence vanishes, both to roundoff. The zero mode of psi is set to
zero; any constant shift of the output is immaterial modulo constant skew
matrices.
"""

import numpy as np

from . import spectral
from .dislocations import GridMeasure, check_divergence_free
from .fields import TensorField, lp_norm  # noqa: F401  (lp_norm re-exported)


class NonZeroMean(ValueError):
    """Grid measure with a nonvanishing component integral."""


class NotDivergenceFree(ValueError):
    """Grid measure with discrete divergence above tolerance."""


def solve_beta_mu(m: GridMeasure, mean_tol=1e-10, div_tol=1e-8):
    """Field with curl beta = mu and row-wise div beta = 0 on the box.

    Preconditions are verified, not assumed: componentwise integrals must
    vanish (NonZeroMean) and the normalized divergence residual must be
    below div_tol (NotDivergenceFree). Returns a cell TensorField over the
    padded box whose `inner` block covers the physical domain.
    """
    scale = float(np.abs(m.values).max())
    integrals = m.component_integrals()
    ref = m.variation if m.variation > 0 else max(scale * m.grid.cell_volume, 1.0)
    if np.abs(integrals).max() > mean_tol * ref:
        raise NonZeroMean(
            f"component integral {np.abs(integrals).max():.3e} exceeds "
            f"{mean_tol:.1e} * {ref:.3e}")
    res = check_divergence_free(m)
    if res > div_tol:
        raise NotDivergenceFree(f"divergence residual {res:.3e} > {div_tol:.1e}")
    rows = spectral.vector_poisson_curl(m.values, m.grid)
    values = np.moveaxis(rows, (0, 1), (-2, -1))
    return TensorField.on_cells(values, m.grid, inner=m.inner)


def spectral_residuals(beta: TensorField, m: GridMeasure):
    """Relative max-norm defects of curl beta - mu and div beta over the box."""
    rows = np.moveaxis(beta.values, (-2, -1), (0, 1))
    curl = spectral.row_curl(rows, m.grid)
    mu_scale = float(np.abs(m.values).max()) or 1.0
    beta_scale = float(np.abs(rows).max()) or 1.0
    curl_rel = float(np.abs(curl - m.values).max()) / mu_scale
    div = spectral.row_divergence(rows, m.grid)
    # divergence carries one derivative: scale by beta magnitude over delta
    div_rel = float(np.abs(div).max()) * m.delta / beta_scale
    return {"curl_rel": curl_rel, "div_rel": div_rel}
