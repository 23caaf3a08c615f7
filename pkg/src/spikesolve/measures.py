"""Discrete measures on the circle and their band-limited projections.

Positions live on the torus T = R/Z and are always stored as canonical
representatives in [0, 1). A discrete measure is a finite list of point
masses (spikes) with complex amplitudes; its total variation is the sum of
the amplitude moduli.

Fourier convention (analysis sign): the m-th coefficient of a measure is

    mu_hat(m) = sum_j c_j * exp(-2 pi i m s_j),

so that the degree-M projection evaluates as
``sum_{m=-M}^{M} mu_hat(m) exp(2 pi i m x)``. ``TrigPoly`` stores exactly
such coefficient windows, indexed m = -M..M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .errors import ParameterError

#: positions closer than this (torus distance) are combined during
#: canonicalization; keeps variation measures well defined when solvers
#: emit near-duplicate atoms
MERGE_TOL = 1e-9


def wrap01(x):
    """Canonical torus representative in [0, 1). Works on scalars and arrays."""
    if np.ndim(x) == 0:
        r = float(x) % 1.0
        return 0.0 if r >= 1.0 else r  # guard the float edge case r == 1.0
    r = np.asarray(x, dtype=np.float64)
    r = r - np.floor(r)
    return np.where(r >= 1.0, 0.0, r)


def torus_distance(x, y):
    """Distance on T = R/Z: min(|x-y|, 1-|x-y|) on canonical representatives.

    Symmetric, nonnegative, satisfies the triangle inequality; range [0, 1/2].
    """
    d = np.abs(np.asarray(wrap01(x)) - np.asarray(wrap01(y)))
    out = np.minimum(d, 1.0 - d)
    if np.ndim(out) == 0:
        return float(out)
    return out


def min_separation(support) -> float:
    """Smallest pairwise torus distance of a point set; +inf for < 2 points.

    Fewer than two points vacuously satisfy any separation condition, hence
    the +inf sentinel instead of an error.
    """
    pos = np.sort(wrap01(np.atleast_1d(np.asarray(support, dtype=np.float64))))
    if pos.size < 2:
        return math.inf
    gaps = np.diff(pos)
    wrap_gap = 1.0 - (pos[-1] - pos[0])
    return float(min(gaps.min(), wrap_gap))


def satisfies_separation(support, M: int) -> bool:
    """True iff all pairs are at torus distance >= 2/M (boundary inclusive)."""
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    return min_separation(support) >= 2.0 / M


@dataclass(frozen=True)
class Spike:
    """A single point mass: canonical position in [0,1) and complex amplitude."""

    position: float
    amplitude: complex

    def __post_init__(self):
        object.__setattr__(self, "position", wrap01(float(self.position)))
        object.__setattr__(self, "amplitude", complex(self.amplitude))


def _merge_clusters(positions, amplitudes, tol):
    """Combine positions within ``tol`` (torus distance) by summing amplitudes.

    Cluster positions are the |amplitude|-weighted means measured from the
    cluster anchor, so merging is exact for genuinely duplicated atoms.
    """
    if positions.size == 0:
        return positions, amplitudes
    order = np.argsort(positions)
    pos = positions[order]
    amp = amplitudes[order]
    clusters = [[0]]
    for i in range(1, pos.size):
        if pos[i] - pos[clusters[-1][-1]] <= tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    # wraparound: last cluster may continue into the first
    if len(clusters) > 1 and (pos[clusters[0][0]] + 1.0 - pos[clusters[-1][-1]]) <= tol:
        clusters[0] = clusters.pop() + clusters[0]
    out_pos = []
    out_amp = []
    for idx in clusters:
        c = amp[idx].sum()
        anchor = pos[idx[0]]
        offs = wrap01(pos[idx] - anchor + 0.5) - 0.5
        w = np.abs(amp[idx])
        if w.sum() > 0:
            p = wrap01(anchor + float((offs * w).sum() / w.sum()))
        else:
            p = anchor
        out_pos.append(p)
        out_amp.append(c)
    return np.asarray(out_pos), np.asarray(out_amp, dtype=np.complex128)


@dataclass(frozen=True)
class DiscreteMeasure:
    """A finite complex combination of point masses on the torus.

    Construction canonicalizes: positions are wrapped to [0,1), positions
    within ``MERGE_TOL`` are combined by summing amplitudes, and zero
    amplitudes are dropped. Instances are immutable.
    """

    spikes: tuple[Spike, ...]

    def __post_init__(self):
        spikes = tuple(
            s if isinstance(s, Spike) else Spike(*s) for s in self.spikes
        )
        pos = np.array([s.position for s in spikes], dtype=np.float64)
        amp = np.array([s.amplitude for s in spikes], dtype=np.complex128)
        pos, amp = _merge_clusters(pos, amp, MERGE_TOL)
        keep = amp != 0
        canonical = tuple(
            Spike(p, a) for p, a in sorted(zip(pos[keep], amp[keep]), key=lambda t: t[0])
        )
        object.__setattr__(self, "spikes", canonical)

    @classmethod
    def from_arrays(cls, positions, amplitudes) -> "DiscreteMeasure":
        positions = np.atleast_1d(np.asarray(positions, dtype=np.float64))
        amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=np.complex128))
        if positions.shape != amplitudes.shape:
            raise ParameterError("positions and amplitudes must have equal length")
        return cls(tuple(Spike(p, a) for p, a in zip(positions, amplitudes)))

    @classmethod
    def empty(cls) -> "DiscreteMeasure":
        return cls(())

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.spikes], dtype=np.float64)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([s.amplitude for s in self.spikes], dtype=np.complex128)

    def __len__(self) -> int:
        return len(self.spikes)

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure(self.spikes + other.spikes)

    def __sub__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return self + (-1.0) * other

    def __mul__(self, factor) -> "DiscreteMeasure":
        return DiscreteMeasure(tuple(Spike(s.position, factor * s.amplitude) for s in self.spikes))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {
            "spikes": [
                {"pos": s.position, "re": s.amplitude.real, "im": s.amplitude.imag}
                for s in self.spikes
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        return cls(
            tuple(
                Spike(d["pos"], complex(d["re"], d.get("im", 0.0)))
                for d in data["spikes"]
            )
        )


def total_variation(mu: DiscreteMeasure) -> float:
    """Total variation of a discrete measure: sum of amplitude moduli."""
    if len(mu) == 0:
        return 0.0
    return float(np.abs(mu.amplitudes).sum())


def fourier_coeff(mu: DiscreteMeasure, m: int) -> complex:
    """m-th Fourier coefficient sum_j c_j exp(-2 pi i m s_j)."""
    if len(mu) == 0:
        return 0.0 + 0.0j
    return complex(np.sum(mu.amplitudes * np.exp(-2j * np.pi * m * mu.positions)))


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Trigonometric polynomial of degree M stored as 2M+1 coefficients.

    ``coeffs[k]`` is the coefficient of exp(2 pi i m x) for m = k - degree.
    """

    degree: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        # always copy: freezing a caller-owned buffer in place would leak
        # the writeable=False flag back to the caller
        c = np.array(self.coeffs, dtype=np.complex128, copy=True, order="C")
        if self.degree < 0:
            raise ParameterError(f"degree must be >= 0, got {self.degree}")
        if c.shape != (2 * self.degree + 1,):
            raise ParameterError(
                f"need {2 * self.degree + 1} coefficients for degree {self.degree}, got {c.shape}"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, degree: int) -> "TrigPoly":
        return cls(degree, np.zeros(2 * degree + 1, dtype=np.complex128))

    def coeff(self, m: int) -> complex:
        """Coefficient of exp(2 pi i m x); zero outside the window."""
        if abs(m) > self.degree:
            return 0.0 + 0.0j
        return complex(self.coeffs[m + self.degree])

    def eval(self, x):
        """Evaluate at a scalar or array of positions."""
        scalar = np.ndim(x) == 0
        vals = _accel.trig_eval(self.coeffs, np.atleast_1d(np.asarray(x, dtype=np.float64)))
        return complex(vals[0]) if scalar else vals

    def derivative(self, order: int = 1) -> "TrigPoly":
        """Derivative of the given order: multiplies coeffs by (2 pi i m)^order."""
        if order < 0:
            raise ParameterError(f"order must be >= 0, got {order}")
        m = np.arange(-self.degree, self.degree + 1)
        return TrigPoly(self.degree, self.coeffs * (2j * np.pi * m) ** order)

    def l2_norm(self) -> float:
        """L2 norm on the torus, via Parseval: sqrt(sum |coeffs|^2)."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def grid_values(self, n: int) -> np.ndarray:
        """Values on the uniform grid x_k = k/n, k = 0..n-1, via FFT.

        Requires n >= 2*degree+1 so every coefficient lands in its own bin.
        """
        if n < 2 * self.degree + 1:
            raise ParameterError(f"grid size {n} too small for degree {self.degree}")
        bins = np.zeros(n, dtype=np.complex128)
        m = np.arange(-self.degree, self.degree + 1)
        bins[np.mod(m, n)] = self.coeffs
        return n * np.fft.ifft(bins)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        deg = max(self.degree, other.degree)
        c = np.zeros(2 * deg + 1, dtype=np.complex128)
        c[deg - self.degree:deg + self.degree + 1] += self.coeffs
        c[deg - other.degree:deg + other.degree + 1] += other.coeffs
        return TrigPoly(deg, c)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-1.0) * other

    def __mul__(self, factor) -> "TrigPoly":
        return TrigPoly(self.degree, self.coeffs * complex(factor))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrigPoly":
        coeffs = np.array([complex(re, im) for re, im in data["coeffs"]])
        return cls(int(data["degree"]), coeffs)


def project(mu: DiscreteMeasure, M: int) -> TrigPoly:
    """Degree-M projection of a measure: its Fourier coefficients on -M..M."""
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    return TrigPoly(M, _accel.spike_spectrum(mu.positions, mu.amplitudes, M))


def trig_eval(p: TrigPoly, x):
    return p.eval(x)


def trig_derivative(p: TrigPoly, order: int = 1) -> TrigPoly:
    return p.derivative(order)


def trig_l2_norm(p: TrigPoly) -> float:
    return p.l2_norm()
