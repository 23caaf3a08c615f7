"""Pure-numpy implementations of the evaluation hot kernels.

Selected at import time when the compiled core is unavailable or when
``SPIKESOLVE_PURE_PYTHON`` is set. Semantics match ``_evalcore`` exactly.
"""

import numpy as np

# keep temporaries below ~8 MB of complex128
_CHUNK_ENTRIES = 1 << 19


def trig_eval(coeffs, xs):
    """Evaluate sum_m coeffs[m+M] * exp(2*pi*i*m*x) for each x in xs."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    xs = np.asarray(xs, dtype=np.float64)
    n = coeffs.shape[0]
    deg = (n - 1) // 2
    m = np.arange(-deg, deg + 1)
    out = np.empty(xs.shape[0], dtype=np.complex128)
    step = max(1, _CHUNK_ENTRIES // n)
    for lo in range(0, xs.shape[0], step):
        blk = xs[lo:lo + step]
        out[lo:lo + step] = np.exp(2j * np.pi * np.outer(blk, m)) @ coeffs
    return out


def spike_spectrum(positions, amplitudes, degree):
    """Return sum_j amplitudes[j] * exp(-2*pi*i*m*positions[j]) for m in -degree..degree."""
    positions = np.asarray(positions, dtype=np.float64)
    amplitudes = np.asarray(amplitudes, dtype=np.complex128)
    if positions.size == 0:
        return np.zeros(2 * degree + 1, dtype=np.complex128)
    m = np.arange(-degree, degree + 1)
    return np.exp(-2j * np.pi * np.outer(m, positions)) @ amplitudes
