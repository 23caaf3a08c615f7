"""Evaluation kernels: spectral families (Dirichlet, Fejer, and the quartic
interpolation kernel used to build certificates) and spatially localized
periodized bumps, plus sup-norm estimation with a sampling-safe upper bound
and Bernstein-inequality reports.

The quartic kernel of window degree M is, with N = floor(M/2) + 1,

    ( sin(N pi x) / (N sin(pi x)) )^4,

a nonnegative trigonometric polynomial of degree 2(N-1) <= M that peaks at
1 and decays rapidly. It is represented primarily by its exact spectral
coefficients (the self-convolution of the squared-Fejer triangle sequence
divided by N^2), which removes the sin(pi x) singularity and makes every
derivative exact; the closed form is kept as a cross-check oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError
from .measures import DiscreteMeasure, TrigPoly, wrap01

#: grid points per unit of degree for certified sup-norm sampling
SUP_GRID_FACTOR = 64


@dataclass
class Kernel:
    """A convolution kernel with a spectral and/or spatial representation.

    ``spectral`` evaluates exactly through coefficient arithmetic and is
    preferred when present. ``spatial(x, order)`` is a closed-form evaluator
    for derivative orders 0..``spatial_orders``. ``scale`` is the nominal
    resolution parameter N (the kernel varies on scale 1/N); ``resolution``
    is the effective oscillation degree used to pick default grid sizes.
    """

    name: str
    scale: int
    spectral: Optional[TrigPoly] = None
    spatial: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    spatial_orders: int = 0
    resolution_hint: Optional[int] = None

    def __post_init__(self):
        self._derivatives: dict[int, TrigPoly] = {}
        if self.spectral is not None:
            self._derivatives[0] = self.spectral

    @property
    def resolution(self) -> int:
        if self.resolution_hint is not None:
            return max(self.resolution_hint, 1)
        if self.spectral is not None:
            return max(self.spectral.degree, 1)
        return max(self.scale, 1)

    def spectral_derivative(self, order: int) -> TrigPoly:
        if self.spectral is None:
            raise ParameterError(f"kernel {self.name!r} has no spectral form")
        if order not in self._derivatives:
            self._derivatives[order] = self.spectral.derivative(order)
        return self._derivatives[order]

    def eval(self, x, order: int = 0):
        """Evaluate the kernel or one of its derivatives; spectral path wins."""
        if self.spectral is not None:
            return self.spectral_derivative(order).eval(x)
        if self.spatial is None:
            raise ParameterError(f"kernel {self.name!r} has no evaluator")
        if order > self.spatial_orders:
            raise ParameterError(
                f"kernel {self.name!r} provides derivatives up to order {self.spatial_orders}"
            )
        scalar = np.ndim(x) == 0
        vals = self.spatial(np.atleast_1d(np.asarray(x, dtype=np.float64)), order)
        return complex(vals[0]) if scalar else vals.astype(np.complex128)


def _quartic_scale(M: int) -> int:
    if M < 2:
        raise ParameterError(f"window degree must be >= 2, got {M}")
    return M // 2 + 1


@lru_cache(maxsize=16)
def jackson_kernel(M: int) -> Kernel:
    """Peak-normalized quartic sine-ratio kernel fitting the degree-M window.

    Both representations are returned: the exact spectral coefficients of
    degree 2(N-1) (equal to M for even M), and the closed spatial form used
    as a cross-check. Odd M is accepted; the degree then drops to M-1.
    Cached per window degree: the kernel is immutable and certificate
    routines request it in tight loops.
    """
    N = _quartic_scale(M)
    tri = 1.0 - np.abs(np.arange(-(N - 1), N)) / N  # squared-Fejer coeffs x N
    coeffs = np.convolve(tri, tri) / N**2
    spectral = TrigPoly(2 * (N - 1), coeffs.astype(np.complex128))

    def closed_form(x, order):
        if order != 0:
            raise ParameterError("closed form provides order 0 only")
        x = wrap01(x)
        s = np.sin(np.pi * x)
        num = np.sin(N * np.pi * x)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(np.abs(s) < 1e-300, 1.0, num / (N * np.where(s == 0, 1.0, s)))
        return r**4

    return Kernel(name=f"jackson({M})", scale=N, spectral=spectral,
                  spatial=closed_form, spatial_orders=0)


def jackson_derivative_eval(M: int, order: int, x):
    """Derivative of the quartic kernel at x, order 0..3, via the spectral form.

    Real-valued by evenness; odd orders vanish at 0.
    """
    if order not in (0, 1, 2, 3):
        raise ParameterError(f"order must be in 0..3, got {order}")
    vals = jackson_kernel(M).eval(x, order)
    if np.ndim(vals) == 0:
        return float(np.real(vals))
    return np.real(vals)


def dirichlet_kernel(N: int) -> Kernel:
    """Dirichlet kernel: all 2N+1 coefficients equal to 1; value 2N+1 at 0."""
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    return Kernel(name=f"dirichlet({N})", scale=N,
                  spectral=TrigPoly(N, np.ones(2 * N + 1, dtype=np.complex128)))


def fejer_kernel(N: int) -> Kernel:
    """Fejer kernel: coefficients 1 - |m|/(N+1); nonnegative, value N+1 at 0."""
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    m = np.arange(-N, N + 1)
    return Kernel(name=f"fejer({N})", scale=N,
                  spectral=TrigPoly(N, (1.0 - np.abs(m) / (N + 1)).astype(np.complex128)))


def bump_profile_norms(L: float) -> dict[str, float]:
    """Closed-form sup norms of the raised-cosine-squared profile and its
    first two derivatives on [-1/L, 1/L]."""
    return {
        "k": 1.0,
        "k1": 3.0 * math.sqrt(3.0) * math.pi * L / 8.0,
        "k2": math.pi**2 * L**2,
    }


def periodized_bump(N: int, L: float) -> Kernel:
    """1-periodization of k(N x) for the compactly supported C^2 profile

        k(u) = (1 + cos(pi L u))^2 / 4   for |u| <= 1/L,  0 otherwise.

    Requires L > 2 so the support [-1/(LN), 1/(LN)] never overlaps itself;
    the periodization then has sup norm exactly 1. Derivative orders 0..2
    are provided in closed form.
    """
    if L <= 2:
        raise ParameterError(f"profile width parameter must satisfy L > 2, got {L}")
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")

    def evaluator(x, order):
        # signed distance to the nearest integer, in [-1/2, 1/2)
        u = wrap01(np.asarray(x, dtype=np.float64) + 0.5) - 0.5
        t = np.pi * L * N * u
        inside = np.abs(u) <= 1.0 / (L * N)
        if order == 0:
            vals = (1.0 + np.cos(t)) ** 2 / 4.0
        elif order == 1:
            vals = -(np.pi * L * N / 2.0) * (1.0 + np.cos(t)) * np.sin(t)
        elif order == 2:
            vals = -((np.pi * L * N) ** 2 / 2.0) * (np.cos(t) + np.cos(2.0 * t))
        else:
            raise ParameterError(f"bump provides derivative orders 0..2, got {order}")
        return np.where(inside, vals, 0.0)

    # effective oscillation scale ~ L*N drives default grid sizes
    return Kernel(
        name=f"bump({N},L={L:g})",
        scale=N,
        spatial=evaluator,
        spatial_orders=2,
        resolution_hint=int(math.ceil(L)) * N,
    )


def convolve_at(kern: Kernel, nu: DiscreteMeasure, x):
    """(K * nu)(x) = sum_j c_j K(x - s_j); exact finite sum."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.zeros(xs.shape, dtype=np.complex128)
    for s, c in zip(nu.positions, nu.amplitudes):
        out += c * np.asarray(kern.eval(xs - s, 0))
    return complex(out[0]) if scalar else out


@dataclass
class SupNormEstimate:
    """Grid maximum of |f| plus a sampling-safe upper bound.

    For a trig polynomial of degree n sampled on P uniform points, the true
    sup exceeds the grid max by at most the factor 1/(1 - pi n / P), so
    ``upper_bound = grid_max / (1 - pi n / P)`` is certified. For kernels
    without a spectral form the bound is the plain grid max (uncertified).
    """

    grid_max: float
    upper_bound: float
    grid_size: int
    degree: Optional[int]
    certified: bool


def _as_spectral(obj) -> Optional[TrigPoly]:
    if isinstance(obj, TrigPoly):
        return obj
    if isinstance(obj, Kernel):
        return obj.spectral
    raise ParameterError(f"expected TrigPoly or Kernel, got {type(obj).__name__}")


def sup_norm_estimate(obj, grid_size: Optional[int] = None) -> SupNormEstimate:
    """Estimate the sup norm of a TrigPoly or Kernel on a uniform grid."""
    spectral = _as_spectral(obj)
    if spectral is not None:
        deg = max(spectral.degree, 1)
        if grid_size is None:
            grid_size = SUP_GRID_FACTOR * deg
        if grid_size < SUP_GRID_FACTOR * deg:
            raise ParameterError(
                f"grid of {grid_size} too coarse for degree {deg}; need >= {SUP_GRID_FACTOR * deg}"
            )
        gmax = float(np.max(np.abs(spectral.grid_values(grid_size))))
        factor = 1.0 / (1.0 - math.pi * deg / grid_size)
        return SupNormEstimate(gmax, gmax * factor, grid_size, spectral.degree, True)
    kern: Kernel = obj
    if grid_size is None:
        grid_size = max(4096, SUP_GRID_FACTOR * kern.resolution)
    xs = np.arange(grid_size) / grid_size
    gmax = float(np.max(np.abs(kern.eval(xs, 0))))
    return SupNormEstimate(gmax, gmax, grid_size, None, False)


def sup_norm(obj, grid_size: Optional[int] = None) -> float:
    """Max modulus over a uniform grid (see SupNormEstimate for the certified
    upper bound that accounts for sampling between grid points)."""
    return sup_norm_estimate(obj, grid_size).grid_max


@dataclass
class BernsteinReport:
    """Sup norms of p, p', p'' and the two inequality chains they support.

    ``literal_ok`` checks ||p''|| <= N ||p'|| <= N^2 ||p|| as displayed with
    the plain degree factor; ``corrected_ok`` uses the 2*pi*N factor that the
    exp(2 pi i m x) convention actually produces. Both are reported; no guess
    is made about which was intended.
    """

    degree: int
    norm0: float
    norm1: float
    norm2: float
    literal_ok: bool
    corrected_ok: bool


def bernstein_check(p: TrigPoly, grid_size: Optional[int] = None) -> BernsteinReport:
    """Compare derivative sup norms against degree-based growth bounds."""
    n0 = sup_norm(p, grid_size)
    n1 = sup_norm(p.derivative(1), grid_size)
    n2 = sup_norm(p.derivative(2), grid_size)
    N = max(p.degree, 1)
    slack = 1.0 + 1e-9
    literal = (n2 <= N * n1 * slack + 1e-15) and (n1 <= N * n0 * slack + 1e-15)
    corrected = (n2 <= 2 * np.pi * N * n1 * slack + 1e-15) and (
        n1 <= 2 * np.pi * N * n0 * slack + 1e-15
    )
    return BernsteinReport(p.degree, n0, n1, n2, literal, corrected)
