"""Spectral noise models and the Gaussian tail calibration.

Two models are implemented. The Gaussian model draws the real and imaginary
parts of each windowed Fourier coefficient as independent N(0, sigma^2)
variables, so the squared spectral L2 norm divided by sigma^2 is chi-square
with 2(2M+1) degrees of freedom; the calibrated noise level

    epsilon = sigma * (1 + gamma) * sqrt(2(2M+1))

is exceeded with probability at most exp(-2(2M+1) gamma^2). The bounded
model draws a random spectral direction and rescales it onto the L2 sphere
of a supplied radius (the worst case for the inequalities checked
downstream).

Randomness is counter-based: each draw uses a Philox generator keyed by
(seed, trial), so trials are reproducible and order-independent under
concurrent execution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ParameterError
from .measures import DiscreteMeasure, TrigPoly, project
from .solvers import Observation

_U64 = np.uint64


@dataclass(frozen=True)
class NoiseSpec:
    """Noise configuration. ``kind`` is "gaussian" or "bounded".

    For the bounded kind, ``epsilon`` is the exact spectral L2 radius of the
    realization; sigma and gamma are ignored.
    """

    kind: str = "gaussian"
    sigma: float = 0.0
    gamma: float = 0.1
    seed: int = 0
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "bounded"):
            raise ParameterError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ParameterError("sigma must be >= 0")
        if self.kind == "gaussian" and self.gamma <= 0:
            raise ParameterError("gamma must be > 0 for gaussian noise")
        if self.kind == "bounded" and (self.epsilon is None or self.epsilon < 0):
            raise ParameterError("bounded noise requires epsilon >= 0")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "sigma": self.sigma, "gamma": self.gamma, "seed": self.seed}
        if self.epsilon is not None:
            d["epsilon"] = self.epsilon
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseSpec":
        return cls(
            kind=data.get("kind", "gaussian"),
            sigma=float(data.get("sigma", 0.0)),
            gamma=float(data.get("gamma", 0.1)),
            seed=int(data.get("seed", 0)),
            epsilon=data.get("epsilon"),
        )


@dataclass(frozen=True)
class NoiseRealization:
    """A realized spectral noise window: coefficients on m = -M..M."""

    spectrum: TrigPoly

    def l2_norm(self) -> float:
        return self.spectrum.l2_norm()


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, trial & 0xFFFFFFFFFFFFFFFF], dtype=_U64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_gaussian_noise(M: int, sigma: float, seed: int, trial: int = 0) -> NoiseRealization:
    """Draw 2(2M+1) independent N(0, sigma^2) values as the real/imaginary
    parts of the windowed spectrum. Deterministic given (seed, trial)."""
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    if sigma < 0:
        raise ParameterError("sigma must be >= 0")
    rng = _trial_rng(seed, trial)
    draws = rng.normal(0.0, 1.0, size=(2, 2 * M + 1)) * sigma
    return NoiseRealization(TrigPoly(M, draws[0] + 1j * draws[1]))


def sample_bounded_noise(M: int, epsilon: float, seed: int, trial: int = 0) -> NoiseRealization:
    """Random spectral direction rescaled onto the L2 sphere of radius epsilon."""
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    rng = _trial_rng(seed, trial)
    draws = rng.normal(0.0, 1.0, size=(2, 2 * M + 1))
    vec = draws[0] + 1j * draws[1]
    norm = float(np.sqrt(np.sum(np.abs(vec) ** 2)))
    if norm == 0.0 or epsilon == 0.0:
        return NoiseRealization(TrigPoly.zero(M))
    return NoiseRealization(TrigPoly(M, vec * (epsilon / norm)))


def epsilon_from_gaussian(M: int, sigma: float, gamma: float) -> float:
    """Calibrated noise level sigma*(1+gamma)*sqrt(2(2M+1))."""
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    return sigma * (1.0 + gamma) * math.sqrt(2.0 * (2 * M + 1))


def failure_probability_bound(M: int, gamma: float) -> float:
    """Probability bound exp(-2(2M+1)*gamma^2) for exceeding the calibrated level."""
    if M < 1 or gamma <= 0:
        raise ParameterError("need M >= 1 and gamma > 0")
    return math.exp(-2.0 * (2 * M + 1) * gamma**2)


def chi2_tail_bound(dof: int, x: float) -> float:
    """Concentration threshold t(x) = dof + 2*sqrt(dof*x) + 2*x.

    A chi-square variable with ``dof`` degrees of freedom exceeds t(x) with
    probability at most exp(-x).
    """
    if dof < 1 or x <= 0:
        raise ParameterError("need dof >= 1 and x > 0")
    return dof + 2.0 * math.sqrt(dof * x) + 2.0 * x


def tail_montecarlo(M: int, sigma: float, gamma: float, trials: int, seed: int) -> float:
    """Fraction of noise draws whose spectral L2 norm reaches the calibrated
    level. Should stay below failure_probability_bound plus sampling error."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    eps = epsilon_from_gaussian(M, sigma, gamma)
    if sigma == 0.0:
        return 0.0
    hits = 0
    for t in range(trials):
        rng = _trial_rng(seed, t)
        draws = rng.normal(0.0, 1.0, size=(2, 2 * M + 1)) * sigma
        if float(np.sum(draws * draws)) >= eps * eps:
            hits += 1
    return hits / trials


def make_observation(mu0: DiscreteMeasure, M: int, noise: NoiseSpec, trial: int = 0):
    """Observed spectrum of mu0 plus noise, with the matching noise level.

    Returns (Observation, NoiseRealization, epsilon): epsilon is the
    calibrated Gaussian level for the gaussian kind and the supplied radius
    for the bounded kind.
    """
    clean = project(mu0, M)
    if noise.kind == "gaussian":
        realization = sample_gaussian_noise(M, noise.sigma, noise.seed, trial)
        eps = epsilon_from_gaussian(M, noise.sigma, noise.gamma)
    else:
        realization = sample_bounded_noise(M, noise.epsilon, noise.seed, trial)
        eps = float(noise.epsilon)
    y = clean + realization.spectrum
    return Observation(y=y, M=M), realization, eps
