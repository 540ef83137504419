"""Pure-numpy implementations of the hot pointwise kernels.

Semantics are the contract; the compiled twin in ``_accel.pyx`` must agree to
roundoff. Every function takes and returns C-ordered arrays; ``*_inplace``
variants mutate their first argument and are only used on buffers owned by the
caller (SpectralField data is never mutated).
"""

import numpy as np

BACKEND = "python"


def abs2(u):
    """|u|^2 as a float64 array."""
    return (u.real * u.real + u.imag * u.imag).astype(np.float64, copy=False)


def apply_phase(coeffs, lam, t):
    """coeffs * exp(-1j*t*lam), elementwise."""
    return coeffs * np.exp(-1j * t * lam)


def apply_phase_inplace(coeffs, lam, t):
    coeffs *= np.exp(-1j * t * lam)
    return coeffs


def rotate_by_intensity(u, chi, alpha):
    """u * exp(-1j*alpha*chi) with chi real (a pointwise phase rotation)."""
    return u * np.exp(-1j * alpha * chi)


def rotate_by_intensity_inplace(u, chi, alpha):
    u *= np.exp(-1j * alpha * chi)
    return u
