# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused pointwise kernels for the time-stepping hot loop.

Each kernel is a single pass over flattened complex128 data, avoiding the
temporaries the numpy fallback allocates for |u|^2 and the phase factor.
In-place variants require C-contiguous inputs (the solver owns its buffers).
"""

import numpy as np

from libc.math cimport cos, sin

BACKEND = "c"


def abs2(u):
    arr = np.ascontiguousarray(u, dtype=np.complex128)
    out = np.empty(arr.size, dtype=np.float64)
    cdef const double complex[::1] uf = arr.ravel()
    cdef double[::1] of = out
    cdef Py_ssize_t i, n = uf.shape[0]
    cdef double re, im
    for i in range(n):
        re = uf[i].real
        im = uf[i].imag
        of[i] = re * re + im * im
    return out.reshape(arr.shape)


def apply_phase(coeffs, lam, double t):
    out = np.array(coeffs, dtype=np.complex128, order="C", copy=True)
    apply_phase_inplace(out, lam, t)
    return out


def apply_phase_inplace(coeffs, lam, double t):
    if not coeffs.flags.c_contiguous:
        raise ValueError("in-place kernel needs a C-contiguous buffer")
    lam_arr = np.ascontiguousarray(lam, dtype=np.float64)
    if lam_arr.size != coeffs.size:
        lam_arr = np.broadcast_to(lam_arr, coeffs.shape).copy()
    cdef double complex[::1] cf = coeffs.ravel()
    cdef const double[::1] lf = lam_arr.ravel()
    cdef Py_ssize_t i, n = cf.shape[0]
    cdef double ph
    cdef double complex factor
    for i in range(n):
        ph = -t * lf[i]
        factor = cos(ph) + 1j * sin(ph)
        cf[i] = cf[i] * factor
    return coeffs


def rotate_by_intensity(u, chi, double alpha):
    out = np.array(u, dtype=np.complex128, order="C", copy=True)
    rotate_by_intensity_inplace(out, chi, alpha)
    return out


def rotate_by_intensity_inplace(u, chi, double alpha):
    if not u.flags.c_contiguous:
        raise ValueError("in-place kernel needs a C-contiguous buffer")
    chi_arr = np.ascontiguousarray(chi, dtype=np.float64)
    if chi_arr.size != u.size:
        raise ValueError("chi shape does not match u")
    cdef double complex[::1] uf = u.ravel()
    cdef const double[::1] xf = chi_arr.ravel()
    cdef Py_ssize_t i, n = uf.shape[0]
    cdef double ph
    cdef double complex factor
    for i in range(n):
        ph = -alpha * xf[i]
        factor = cos(ph) + 1j * sin(ph)
        uf[i] = uf[i] * factor
    return u
