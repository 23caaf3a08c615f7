"""Sparse spike recovery on the torus from noisy band-limited Fourier data.

Library + CLI for: total-variation regularized recovery of discrete
measures (penalized and residual-constrained forms), construction and
verification of the interpolation certificates behind the recovery
guarantees, noise calibration with chi-square tail bounds, and empirical
verification of the smoothed-error bounds at desk scale.
"""

from ._accel import BACKEND
from .certificate import (
    Certificate,
    CertificateMatrices,
    build_matrices,
    dual_certificate,
    eval_certificate,
    make_certificate,
    norm_bound_report,
    solve_coefficients,
    verify_interpolation,
)
from .errors import NumericalError, ParameterError
from .error_analysis import (
    ErrorReport,
    NeighborhoodSystem,
    far_mass,
    near_second_moment,
    neighborhoods,
    scaling_experiment,
    smoothed_error,
    smoothing_error_bound,
)
from .kernels import (
    Kernel,
    bernstein_check,
    convolve_at,
    dirichlet_kernel,
    fejer_kernel,
    jackson_derivative_eval,
    jackson_kernel,
    periodized_bump,
    sup_norm,
    sup_norm_estimate,
)
from .measures import (
    DiscreteMeasure,
    Spike,
    TrigPoly,
    fourier_coeff,
    min_separation,
    project,
    satisfies_separation,
    torus_distance,
    total_variation,
    wrap01,
)
from .noise import (
    NoiseRealization,
    NoiseSpec,
    chi2_tail_bound,
    epsilon_from_gaussian,
    failure_probability_bound,
    make_observation,
    sample_bounded_noise,
    sample_gaussian_noise,
    tail_montecarlo,
)
from .solvers import (
    ApproximationReport,
    Observation,
    SolveResult,
    SolverConfig,
    duality_gap,
    grid_lasso_oracle,
    is_approximation,
    solve_constrained,
    solve_noiseless,
    solve_tikhonov,
    tau_max,
    tikhonov_objective,
)

__version__ = "0.1.0"
