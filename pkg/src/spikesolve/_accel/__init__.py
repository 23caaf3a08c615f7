"""Backend selection for the evaluation hot kernels.

Prefers the compiled Cython core; falls back to the numpy implementations
when the extension is not built. ``SPIKESOLVE_PURE_PYTHON=1`` forces the
fallback (used by the backend benchmark and the equivalence tests).
"""

import os

import numpy as np

if os.environ.get("SPIKESOLVE_PURE_PYTHON"):
    from . import fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _evalcore as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import fallback as _impl

        BACKEND = "python"


def trig_eval(coeffs, xs):
    """Evaluate a trig polynomial (coeffs indexed m=-M..M) at the points xs."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    return _impl.trig_eval(coeffs, xs)


def spike_spectrum(positions, amplitudes, degree):
    """Fourier coefficients sum_j c_j exp(-2 pi i m s_j), m = -degree..degree."""
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
    if positions.size == 0:
        return np.zeros(2 * degree + 1, dtype=np.complex128)
    return _impl.spike_spectrum(positions, amplitudes, int(degree))
