"""Periodic spectral differential operators on cell-centered grids.

Derivatives use exact ik symbols so that composed identities (divergence of
a curl, curl of the inverse) hold to roundoff. On even grids the unpaired
Nyquist bin is assigned wavenumber zero: cross products k_i k_j at that bin
otherwise break the Hermitian symmetry of real transforms.
"""

import numpy as np


def derivative_wavenumbers(n, spacing):
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return k


def wavegrids(shape, spacing):
    ks = [derivative_wavenumbers(shape[d], spacing[d]) for d in range(3)]
    return np.meshgrid(*ks, indexing="ij")


def fft_vec(v):
    """FFT of a real vector field (3, nx, ny, nz), spatial axes only."""
    return np.fft.fftn(v, axes=(-3, -2, -1))


def ifft_vec(vh):
    return np.real(np.fft.ifftn(vh, axes=(-3, -2, -1)))


def solenoidal_project(rows, grid):
    """Remove the k-parallel part of each row of a (3, 3, nx, ny, nz) field.

    The k = 0 mode and the fully degenerate Nyquist modes (all assigned
    wavenumbers zero) are zeroed as well, so the result has exactly zero
    discrete divergence and zero componentwise mean.
    Returns (projected field, relative l2 change).
    """
    K = wavegrids(rows.shape[2:], grid.spacing)
    K2 = K[0] ** 2 + K[1] ** 2 + K[2] ** 2
    deg = K2 == 0.0
    K2safe = np.where(deg, 1.0, K2)
    out = np.empty_like(rows)
    change2 = 0.0
    total2 = 0.0
    for i in range(3):
        fh = fft_vec(rows[i])
        kdot = K[0] * fh[0] + K[1] * fh[1] + K[2] * fh[2]
        for j in range(3):
            gh = fh[j] - K[j] * kdot / K2safe
            gh[deg] = 0.0
            diff = gh - fh[j]
            change2 += np.real(diff * np.conj(diff)).sum()
            total2 += np.real(fh[j] * np.conj(fh[j])).sum()
            out[i, j] = np.real(np.fft.ifftn(gh))
    rel = float(np.sqrt(change2 / total2)) if total2 > 0 else 0.0
    return out, rel


def row_divergence(rows, grid):
    """Spectral divergence of each row of a (3, 3, nx, ny, nz) field."""
    K = wavegrids(rows.shape[2:], grid.spacing)
    out = np.empty((3,) + rows.shape[2:])
    for i in range(3):
        fh = fft_vec(rows[i])
        out[i] = np.real(np.fft.ifftn(1j * (K[0] * fh[0] + K[1] * fh[1] + K[2] * fh[2])))
    return out


def row_curl(rows, grid):
    """Spectral curl of each row: (curl v)_a = eps_abc d_b v_c."""
    K = wavegrids(rows.shape[2:], grid.spacing)
    out = np.empty_like(rows)
    for i in range(3):
        vh = fft_vec(rows[i])
        out[i, 0] = np.real(np.fft.ifftn(1j * (K[1] * vh[2] - K[2] * vh[1])))
        out[i, 1] = np.real(np.fft.ifftn(1j * (K[2] * vh[0] - K[0] * vh[2])))
        out[i, 2] = np.real(np.fft.ifftn(1j * (K[0] * vh[1] - K[1] * vh[0])))
    return out


def vector_poisson_curl(rows, grid):
    """Per row: solve lap psi = -row and return curl psi.

    The zero mode of psi is set to zero (gauge choice). If the input rows
    are solenoidal, the spectral curl of the output reproduces the input
    exactly and its divergence vanishes.
    """
    K = wavegrids(rows.shape[2:], grid.spacing)
    K2 = K[0] ** 2 + K[1] ** 2 + K[2] ** 2
    deg = K2 == 0.0
    K2safe = np.where(deg, 1.0, K2)
    out = np.empty_like(rows)
    for i in range(3):
        fh = fft_vec(rows[i])
        psih = np.where(deg, 0.0, fh / K2safe)
        out[i, 0] = np.real(np.fft.ifftn(1j * (K[1] * psih[2] - K[2] * psih[1])))
        out[i, 1] = np.real(np.fft.ifftn(1j * (K[2] * psih[0] - K[0] * psih[2])))
        out[i, 2] = np.real(np.fft.ifftn(1j * (K[0] * psih[1] - K[1] * psih[0])))
    return out
