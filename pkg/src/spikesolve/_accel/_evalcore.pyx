# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: trigonometric-polynomial evaluation at arbitrary
points and spike spectra. Signatures mirror ``fallback`` exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, pi

cnp.import_array()


def trig_eval(const double complex[::1] coeffs, const double[::1] xs):
    """Evaluate sum_m coeffs[m+M] * exp(2*pi*i*m*x) for each x in xs.

    Horner recurrence in z = exp(2*pi*i*x); |z| = 1 keeps it backward stable.
    """
    cdef Py_ssize_t n = coeffs.shape[0]
    cdef Py_ssize_t npts = xs.shape[0]
    cdef Py_ssize_t deg = (n - 1) // 2
    out = np.empty(npts, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, k
    cdef double ang
    cdef double complex z, acc
    for i in range(npts):
        ang = 2.0 * pi * xs[i]
        z = cos(ang) + 1j * sin(ang)
        acc = coeffs[n - 1]
        for k in range(n - 2, -1, -1):
            acc = acc * z + coeffs[k]
        ang = -2.0 * pi * deg * xs[i]
        ov[i] = acc * (cos(ang) + 1j * sin(ang))
    return out


def spike_spectrum(const double[::1] positions, const double complex[::1] amplitudes,
                   Py_ssize_t degree):
    """Return sum_j amplitudes[j] * exp(-2*pi*i*m*positions[j]) for m = -degree..degree.

    Phase recurrence per spike, resynchronized every 128 steps to cap the
    rounding drift of repeated unit-modulus multiplications.
    """
    cdef Py_ssize_t nspk = positions.shape[0]
    cdef Py_ssize_t n = 2 * degree + 1
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t j, k
    cdef double ang, s
    cdef double complex w, p, c
    for j in range(nspk):
        s = positions[j]
        c = amplitudes[j]
        ang = -2.0 * pi * s
        w = cos(ang) + 1j * sin(ang)
        ang = 2.0 * pi * degree * s
        p = cos(ang) + 1j * sin(ang)
        for k in range(n):
            if k % 128 == 0 and k > 0:
                ang = -2.0 * pi * (k - degree) * s
                p = cos(ang) + 1j * sin(ang)
            ov[k] = ov[k] + c * p
            p = p * w
    return out
