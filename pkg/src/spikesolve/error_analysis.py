"""Quantitative error functionals for recovered measures.

Around each reference spike s_j sits the closed near region
|x - s_j| <= 0.16/M; these regions are pairwise disjoint whenever the
support is separated. For the (discrete) difference measure nu = mu - mu0:

* far mass: total |amplitude| outside every near region,
* near second moment: sum over near spikes of |amplitude| * dist^2,
* smoothed error: sup_x |(K * nu)(x)| for a resolution kernel K,
* bound_rhs: C * eps * (||K|| + ||K'||/M + ||K''||/M^2), the scale against
  which the smoothed error is measured.

All integrals against |nu| are exact sums over the spike list. The scaling
experiment sweeps kernel resolutions N and fits the log-log slope of the
normalized worst-case error against N/M; the kernel-sup normalization makes
the predicted slope 2.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import ParameterError
from .kernels import (
    Kernel,
    dirichlet_kernel,
    fejer_kernel,
    periodized_bump,
    sup_norm,
)
from .measures import DiscreteMeasure, TrigPoly, project, torus_distance, wrap01
from .noise import NoiseSpec, make_observation
from .solvers import SolverConfig, solve_tikhonov

#: near-region radius as a multiple of 1/M
NEAR_RADIUS_FACTOR = 0.16


@dataclass(frozen=True)
class NeighborhoodSystem:
    """Closed intervals of radius 0.16/M around reference positions."""

    centers: np.ndarray
    radius: float
    M: int

    def classify(self, x) -> int:
        """Index of the region containing x (boundary inclusive), -1 if
        outside all of them. Ties cannot occur on separated supports; on
        unseparated ones the nearest center wins, lowest index first."""
        d = torus_distance(float(x), self.centers)
        j = int(np.argmin(d))
        return j if d[j] <= self.radius else -1

    def distances(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-point distance to the nearest center and its index."""
        d = torus_distance(np.asarray(xs, dtype=np.float64)[:, None], self.centers[None, :])
        idx = np.argmin(d, axis=1)
        return d[np.arange(len(idx)), idx], idx

    @property
    def disjoint(self) -> bool:
        if self.centers.size < 2:
            return True
        pos = np.sort(self.centers)
        gaps = np.append(np.diff(pos), 1.0 - (pos[-1] - pos[0]))
        return bool(np.all(gaps > 2 * self.radius))


def neighborhoods(support, M: int) -> NeighborhoodSystem:
    """The near-region system of a support at window degree M."""
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    centers = wrap01(np.atleast_1d(np.asarray(support, dtype=np.float64)))
    return NeighborhoodSystem(centers=centers, radius=NEAR_RADIUS_FACTOR / M, M=M)


def far_mass(nu: DiscreteMeasure, nbhd: NeighborhoodSystem) -> float:
    """Mass of nu outside every near region (exact: nu is discrete)."""
    if len(nu) == 0:
        return 0.0
    dist, _ = nbhd.distances(nu.positions)
    outside = dist > nbhd.radius
    return float(np.abs(nu.amplitudes[outside]).sum())


def near_second_moment(nu: DiscreteMeasure, nbhd: NeighborhoodSystem) -> float:
    """Sum over spikes inside a near region of |amplitude| * dist^2."""
    if len(nu) == 0:
        return 0.0
    dist, _ = nbhd.distances(nu.positions)
    inside = dist <= nbhd.radius
    return float((np.abs(nu.amplitudes[inside]) * dist[inside] ** 2).sum())


def _convolution_values(kern: Kernel, nu: DiscreteMeasure, grid_size: int) -> np.ndarray:
    """(K * nu) on the uniform grid; spectral kernels go through the product
    polynomial (exact), spatial kernels through the direct spike sum."""
    if kern.spectral is not None:
        deg = kern.spectral.degree
        nu_hat = project(nu, deg) if len(nu) else TrigPoly.zero(deg)
        prod = TrigPoly(deg, kern.spectral.coeffs * nu_hat.coeffs)
        return prod.grid_values(grid_size)
    xs = np.arange(grid_size) / grid_size
    out = np.zeros(grid_size, dtype=np.complex128)
    for s, c in zip(nu.positions, nu.amplitudes):
        out += c * kern.eval(xs - s, 0)
    return out


def _default_grid(kern: Kernel, M: int) -> int:
    return 64 * max(kern.resolution, M)


def smoothed_error(
    kern: Kernel, mu: DiscreteMeasure, mu0: DiscreteMeasure, grid_size: Optional[int] = None
) -> float:
    """sup_x |K * (mu - mu0)| over a uniform grid of 64 x max(resolution, M)
    points by default."""
    nu = mu - mu0
    if len(nu) == 0:
        return 0.0
    M = 1 if kern.spectral is None else max(kern.spectral.degree, 1)
    n = grid_size or _default_grid(kern, M)
    if kern.spectral is not None and n < 2 * kern.spectral.degree + 1:
        raise ParameterError(f"grid of {n} too coarse for kernel degree {kern.spectral.degree}")
    return float(np.max(np.abs(_convolution_values(kern, nu, n))))


def smoothing_error_bound(kern: Kernel, M: int, eps: float, constant: float = 1.0) -> float:
    """The resolution-weighted noise scale
    constant * eps * (||K|| + ||K'||/M + ||K''||/M^2)."""
    n0, n1, n2 = kernel_norms(kern)
    return constant * eps * (n0 + n1 / M + n2 / M**2)


def kernel_norms(kern: Kernel) -> tuple[float, float, float]:
    """Sup norms of the kernel and its first two derivatives."""
    if kern.spectral is not None:
        return (
            sup_norm(kern.spectral),
            sup_norm(kern.spectral.derivative(1)),
            sup_norm(kern.spectral.derivative(2)),
        )
    n = max(4096, 64 * kern.resolution)
    xs = np.arange(n) / n
    return tuple(float(np.max(np.abs(kern.eval(xs, order)))) for order in range(3))


@dataclass
class ErrorReport:
    """All error functionals of one recovered measure."""

    far_mass: float
    near_second_moment: float
    smoothed_sup: float
    bound_rhs: float
    empirical_constant: float

    def to_dict(self) -> dict:
        return {
            "far_mass": self.far_mass,
            "near_second_moment": self.near_second_moment,
            "smoothed_sup": self.smoothed_sup,
            "bound_rhs": self.bound_rhs,
            "empirical_constant": self.empirical_constant,
        }


def error_report(
    kern: Kernel,
    mu: DiscreteMeasure,
    mu0: DiscreteMeasure,
    M: int,
    eps: float,
    grid_size: Optional[int] = None,
) -> ErrorReport:
    """Far mass, near second moment, smoothed sup error and its bound."""
    nbhd = neighborhoods(mu0.positions, M)
    nu = mu - mu0
    smoothed = smoothed_error(kern, mu, mu0, grid_size)
    rhs = smoothing_error_bound(kern, M, eps)
    return ErrorReport(
        far_mass=far_mass(nu, nbhd),
        near_second_moment=near_second_moment(nu, nbhd),
        smoothed_sup=smoothed,
        bound_rhs=rhs,
        empirical_constant=smoothed / rhs if rhs > 0 else 0.0,
    )


@dataclass
class DecompositionReport:
    """Terms of the first-order expansion of the smoothed error at the
    scan argmax: affine interpolation part, curvature term
    ||K''|| * near second moment, and far term ||K|| * far mass. Their sum
    upper-bounds the observed |K * nu| there."""

    x0: float
    observed: float
    affine_term: float
    curvature_term: float
    far_term: float

    @property
    def total(self) -> float:
        return self.affine_term + self.curvature_term + self.far_term


def smoothed_error_decomposition(
    kern: Kernel,
    nu: DiscreteMeasure,
    nbhd: NeighborhoodSystem,
    grid_size: Optional[int] = None,
) -> DecompositionReport:
    """Diagnostic split of |K * nu| at its grid argmax x0.

    The affine term integrates K(x0-s_j) - K'(x0-s_j)(x-s_j) against nu on
    each near region; curvature and far terms bound the Taylor remainder
    and the outside mass.
    """
    n0, _, n2 = kernel_norms(kern)
    if len(nu) == 0:
        return DecompositionReport(0.0, 0.0, 0.0, 0.0, 0.0)
    n = grid_size or _default_grid(kern, nbhd.M)
    vals = _convolution_values(kern, nu, n)
    i0 = int(np.argmax(np.abs(vals)))
    x0 = i0 / n
    observed = float(np.abs(vals[i0]))

    dist, idx = nbhd.distances(nu.positions)
    inside = dist <= nbhd.radius
    affine = 0.0 + 0.0j
    for j in np.unique(idx[inside]):
        sel = inside & (idx == j)
        s_j = nbhd.centers[j]
        k0 = complex(kern.eval(x0 - s_j, 0))
        k1 = complex(kern.eval(x0 - s_j, 1))
        offs = wrap01(nu.positions[sel] - s_j + 0.5) - 0.5
        mass = nu.amplitudes[sel].sum()
        weighted = (nu.amplitudes[sel] * offs).sum()
        affine += k0 * mass - k1 * weighted
    return DecompositionReport(
        x0=x0,
        observed=observed,
        affine_term=abs(affine),
        curvature_term=n2 * near_second_moment(nu, nbhd),
        far_term=n0 * far_mass(nu, nbhd),
    )


_FAMILIES: dict[str, Callable[[int], Kernel]] = {
    "fejer": fejer_kernel,
    "dirichlet": dirichlet_kernel,
    "bump": lambda N: periodized_bump(N, 4.0),
}


def kernel_family(name: str) -> Callable[[int], Kernel]:
    if name not in _FAMILIES:
        raise ParameterError(f"unknown kernel family {name!r}; choose from {sorted(_FAMILIES)}")
    return _FAMILIES[name]


@dataclass
class ScalingRow:
    M: int
    N: int
    trial: int
    epsilon: float
    far_mass: float
    near_second_moment: float
    smoothed_sup: float
    rhs: float
    ratio: float
    flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "N": self.N,
            "trial": self.trial,
            "epsilon": self.epsilon,
            "far_mass": self.far_mass,
            "near_second_moment": self.near_second_moment,
            "smoothed_sup": self.smoothed_sup,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "flagged": self.flagged,
        }


@dataclass
class ScalingTable:
    """Per-(N, trial) error rows plus the fitted log-log slope of the
    normalized worst-case error against N/M."""

    rows: list[ScalingRow]
    slope: Optional[float]
    max_normalized: dict[int, float]
    family: str

    def max_ratio(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    lx = lx - lx.mean()
    return float((lx * (ly - ly.mean())).sum() / (lx * lx).sum())


def scaling_experiment(
    mu0: DiscreteMeasure,
    M: int,
    noise: NoiseSpec,
    family: str,
    N_list: Iterable[int],
    trials: int,
    seed: int = 0,
    cfg: Optional[SolverConfig] = None,
) -> ScalingTable:
    """Sweep kernel resolutions over noisy recoveries.

    One penalized solve per trial (the solver output does not depend on the
    evaluation kernel), then every N is scored on the same recovery. The
    slope is fitted on max-over-trials of smoothed error normalized by
    eps * ||K_N||, against N/M; when the solve is exact to working
    precision (noiseless data) the fit is skipped.
    """
    make = kernel_family(family)
    N_list = sorted(set(int(N) for N in N_list))
    if not N_list:
        raise ParameterError("N_list must not be empty")
    kernels = {N: make(N) for N in N_list}
    norms = {N: kernel_norms(kernels[N]) for N in N_list}
    rows: list[ScalingRow] = []
    flagged = family == "dirichlet"
    solves = []
    for t in range(trials):
        spec = NoiseSpec(
            kind=noise.kind,
            sigma=noise.sigma,
            gamma=noise.gamma,
            seed=seed + noise.seed,
            epsilon=noise.epsilon,
        )
        obs, _, eps = make_observation(mu0, M, spec, trial=t)
        if eps <= 0:
            res = solve_tikhonov(obs, max(1e-12, 1e-12 * obs.l2_norm()), cfg)
        else:
            res = solve_tikhonov(obs, eps, cfg)
        solves.append((t, eps, res.measure))
    nbhd = neighborhoods(mu0.positions, M)
    for t, eps, mu in solves:
        nu = mu - mu0
        fm = far_mass(nu, nbhd)
        nm = near_second_moment(nu, nbhd)
        for N in N_list:
            kern = kernels[N]
            n0, n1, n2 = norms[N]
            smoothed = smoothed_error(kern, mu, mu0)
            rhs = eps * (n0 + n1 / M + n2 / M**2)
            rows.append(
                ScalingRow(
                    M=M,
                    N=N,
                    trial=t,
                    epsilon=eps,
                    far_mass=fm,
                    near_second_moment=nm,
                    smoothed_sup=smoothed,
                    rhs=rhs,
                    ratio=smoothed / rhs if rhs > 0 else 0.0,
                    flagged=flagged,
                )
            )
    max_normalized: dict[int, float] = {}
    for N in N_list:
        n0 = norms[N][0]
        vals = [r.smoothed_sup / (r.epsilon * n0) for r in rows if r.N == N and r.epsilon > 0]
        if vals:
            max_normalized[N] = max(vals)
    slope = None
    if len(max_normalized) >= 2 and all(v > 0 for v in max_normalized.values()):
        slope = fit_loglog_slope(
            [N / M for N in max_normalized], list(max_normalized.values())
        )
    return ScalingTable(rows=rows, slope=slope, max_normalized=max_normalized, family=family)


def write_rows_csv(rows: Iterable, path, header_comment: Optional[str] = None):
    """Write dataclass rows (anything with to_dict) as an RFC-4180 CSV."""
    rows = list(rows)
    if not rows:
        raise ParameterError("no rows to write")
    dicts = [r.to_dict() if hasattr(r, "to_dict") else dict(r) for r in rows]
    fieldnames = list(dicts[0])
    close = False
    if isinstance(path, (str, bytes)):
        fh = open(path, "w", newline="")
        close = True
    else:
        fh = path
    try:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames, quoting=csv.QUOTE_MINIMAL)
        writer.writeheader()
        for d in dicts:
            writer.writerow(d)
    finally:
        if close:
            fh.close()
