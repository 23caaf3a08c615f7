"""Recovery solvers: penalized, constrained, grid oracle, duality gaps."""

import numpy as np
import pytest

from spikesolve.errors import ParameterError
from spikesolve.measures import DiscreteMeasure, TrigPoly, project, total_variation
from spikesolve.noise import NoiseSpec, make_observation
from spikesolve.solvers import (
    Observation,
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

from conftest import separated_support


def observation_of(mu, M):
    return Observation(y=project(mu, M), M=M)


def match_to_truth(recovered, truth, pos_tol):
    """Match recovered mass to true spikes within pos_tol: returns per-spike
    amplitude sums and the stray mass left unmatched."""
    sums = np.zeros(len(truth), dtype=complex)
    stray = 0.0
    tp = truth.positions
    for s, c in zip(recovered.positions, recovered.amplitudes):
        d = np.minimum(np.abs(s - tp), 1 - np.abs(s - tp))
        j = int(np.argmin(d))
        if d[j] <= pos_tol:
            sums[j] += c
        else:
            stray += abs(c)
    return sums, stray


class TestTikhonovBasics:
    def test_zero_data_gives_zero_measure(self):
        obs = Observation(y=TrigPoly.zero(16), M=16)
        res = solve_tikhonov(obs, 0.5)
        assert len(res.measure) == 0
        assert res.converged
        assert res.duality_gap <= 1e-12

    def test_large_penalty_gives_zero_measure(self, rng):
        mu = DiscreteMeasure.from_arrays(rng.uniform(0, 1, 3), rng.normal(size=3))
        obs = observation_of(mu, 32)
        tau = 1.01 * tau_max(obs)
        res = solve_tikhonov(obs, tau)
        assert len(res.measure) == 0
        assert res.converged
        assert res.duality_gap <= 1e-10 * max(1.0, obs.l2_norm() ** 2)

    def test_invalid_penalty(self):
        obs = Observation(y=TrigPoly.zero(8), M=8)
        with pytest.raises(ParameterError):
            solve_tikhonov(obs, 0.0)

    def test_noiseless_small_penalty_recovery(self, rng):
        M = 128
        pos = separated_support(4, M, rng)
        amp = np.exp(2j * np.pi * rng.uniform(size=4))
        mu0 = DiscreteMeasure.from_arrays(pos, amp)
        obs = observation_of(mu0, M)
        res = solve_tikhonov(obs, 1e-6 * obs.l2_norm())
        assert res.converged
        sums, stray = match_to_truth(res.measure, mu0, 1e-4)
        assert stray <= 1e-6
        assert np.max(np.abs(sums - amp) / np.abs(amp)) <= 1e-3
        # positions of dominant atoms sit within 1e-4 of the truth
        big = np.abs(res.measure.amplitudes) > 0.5
        d = np.minimum.reduce(
            [np.minimum(np.abs(res.measure.positions[big] - p), 1 - np.abs(res.measure.positions[big] - p)) for p in pos]
        )
        assert np.max(d) <= 1e-4

    def test_objective_trace_nonincreasing(self, rng):
        M = 64
        mu0 = DiscreteMeasure.from_arrays(separated_support(3, M, rng), rng.normal(size=3) + 2.0)
        obs, _, eps = make_observation(mu0, M, NoiseSpec(kind="bounded", epsilon=0.2, seed=4))
        res = solve_tikhonov(obs, eps)
        trace = np.asarray(res.objective_trace)
        assert np.all(np.diff(trace) <= 1e-9 * max(1.0, trace[0]))

    def test_gap_never_significantly_negative(self, rng):
        M = 32
        mu0 = DiscreteMeasure.from_arrays(separated_support(2, M, rng), [1.0, -1.0j])
        obs = observation_of(mu0, M)
        for tau in (1e-3, 0.1, 1.0, 10.0):
            res = solve_tikhonov(obs, tau * max(1.0, obs.l2_norm()))
            assert res.duality_gap >= -1e-12 * max(1.0, obs.l2_norm() ** 2)


class TestConstrained:
    def test_loose_bound_gives_zero(self, rng):
        mu = DiscreteMeasure.from_arrays([0.3], [0.5])
        obs = observation_of(mu, 16)
        res = solve_constrained(obs, 2.0 * obs.l2_norm())
        assert len(res.measure) == 0
        assert res.converged

    def test_invalid_delta(self):
        obs = Observation(y=TrigPoly.zero(8), M=8)
        with pytest.raises(ParameterError):
            solve_constrained(obs, -1.0)

    def test_noiseless_exact_recovery(self, rng):
        M = 128
        pos = separated_support(4, M, rng)
        amp = np.exp(2j * np.pi * rng.uniform(size=4))
        mu0 = DiscreteMeasure.from_arrays(pos, amp)
        obs = observation_of(mu0, M)
        res = solve_constrained(obs, 1e-8)
        assert res.converged
        assert res.residual_l2 <= 1e-8
        assert total_variation(res.measure) <= total_variation(mu0) + 1e-6
        sums, stray = match_to_truth(res.measure, mu0, 1e-4)
        assert stray <= 1e-6
        assert np.max(np.abs(sums - amp) / np.abs(amp)) <= 1e-3

    def test_bounded_noise_approximation(self, rng):
        M = 128
        mu0 = DiscreteMeasure.from_arrays(
            separated_support(3, M, rng), np.exp(2j * np.pi * rng.uniform(size=3))
        )
        eps = 0.25
        obs, _, _ = make_observation(mu0, M, NoiseSpec(kind="bounded", epsilon=eps, seed=9))
        res = solve_constrained(obs, eps)
        assert res.converged
        assert res.residual_l2 <= eps * (1 + 1e-9)
        assert total_variation(res.measure) <= total_variation(mu0) + 1e-6
        rep = is_approximation(res.measure, mu0, M, eps)
        assert rep.passed

    def test_residual_monotone_along_path(self, rng):
        M = 32
        mu0 = DiscreteMeasure.from_arrays(separated_support(3, M, rng), [1.0, 1.0j, -0.5])
        obs, _, eps = make_observation(mu0, M, NoiseSpec(kind="bounded", epsilon=0.3, seed=2))
        taus = tau_max(obs) * np.array([0.5, 0.1, 0.03, 0.01, 0.003])
        res = []
        warm = None
        for t in taus:  # descending, warm-started like the constrained path
            r = solve_tikhonov(obs, t, initial=warm)
            warm = r.measure
            res.append(r.residual_l2)
        slack = 1e-7 * obs.l2_norm()
        assert all(r2 <= r1 + slack for r1, r2 in zip(res, res[1:]))


class TestNoiseless:
    def test_single_spike(self):
        mu0 = DiscreteMeasure.from_arrays([0.0], [1.0])
        res = solve_noiseless(observation_of(mu0, 128))
        assert len(res.measure) == 1
        assert abs(res.measure.positions[0]) <= 1e-6 or abs(res.measure.positions[0] - 1) <= 1e-6
        assert abs(res.measure.amplitudes[0] - 1.0) <= 1e-6

    def test_several_spikes(self, rng):
        M = 128
        pos = separated_support(4, M, rng)
        amp = np.exp(2j * np.pi * rng.uniform(size=4))
        mu0 = DiscreteMeasure.from_arrays(pos, amp)
        res = solve_noiseless(observation_of(mu0, M))
        sums, stray = match_to_truth(res.measure, mu0, 1e-4)
        assert stray <= 1e-6
        assert np.max(np.abs(sums - amp) / np.abs(amp)) <= 1e-3

    def test_empty_truth(self):
        res = solve_noiseless(Observation(y=TrigPoly.zero(64), M=64))
        assert len(res.measure) == 0
        assert res.converged


class TestDualityGap:
    def test_zero_measure_large_penalty(self, rng):
        mu = DiscreteMeasure.from_arrays(rng.uniform(0, 1, 2), rng.normal(size=2))
        obs = observation_of(mu, 16)
        gap = duality_gap(obs, 1.5 * tau_max(obs), DiscreteMeasure.empty())
        assert -1e-12 <= gap <= 1e-12 * max(1.0, obs.l2_norm() ** 2)

    def test_truth_nearly_optimal_for_tiny_penalty(self, rng):
        M = 64
        mu0 = DiscreteMeasure.from_arrays(separated_support(3, M, rng), [1.0, 1.0, 1.0])
        obs = observation_of(mu0, M)
        tau = 1e-9
        gap = duality_gap(obs, tau, mu0)
        assert gap <= tau * total_variation(mu0) + 1e-9

    def test_perturbation_strictly_positive(self, rng):
        M = 64
        mu0 = DiscreteMeasure.from_arrays(separated_support(3, M, rng), [1.0, 1.0, 1.0])
        obs = observation_of(mu0, M)
        perturbed = DiscreteMeasure.from_arrays(mu0.positions, [1.3, 1.0, 1.0])
        tau = 1e-6
        assert duality_gap(obs, tau, perturbed) > duality_gap(obs, tau, mu0)
        assert duality_gap(obs, tau, perturbed) > 0.01


class TestGridOracle:
    def test_zero_data(self):
        obs = Observation(y=TrigPoly.zero(8), M=8)
        out = grid_lasso_oracle(obs, 0.1, 4 * 17)
        assert len(out) == 0

    def test_grid_size_validated(self):
        obs = Observation(y=TrigPoly.zero(8), M=8)
        with pytest.raises(ParameterError):
            grid_lasso_oracle(obs, 0.1, 17)

    def test_on_grid_recovery(self):
        M = 16
        P = 4 * (2 * M + 1)
        mu0 = DiscreteMeasure.from_arrays([8 / P, 40 / P], [1.0, -0.5j])
        obs = observation_of(mu0, M)
        tau = 1e-5 * obs.l2_norm()
        out = grid_lasso_oracle(obs, tau, P)
        sums, stray = match_to_truth(out, mu0, 1e-9)
        assert stray <= 1e-6
        assert np.max(np.abs(sums - mu0.amplitudes)) <= 1e-5

    def test_matches_grid_restricted_solver(self, rng):
        # dual-route check: independent proximal-gradient solve vs the
        # conditional-gradient solver restricted to the same grid
        for M, J, seed in ((8, 2, 0), (16, 3, 1), (32, 4, 2)):
            P = 4 * (2 * M + 1)
            k = rng.choice(P, size=J, replace=False)
            mu0 = DiscreteMeasure.from_arrays(k / P, np.exp(2j * np.pi * rng.uniform(size=J)))
            obs, _, eps = make_observation(
                mu0, M, NoiseSpec(kind="bounded", epsilon=0.1, seed=seed)
            )
            tau = 0.3 * tau_max(obs)
            oracle = grid_lasso_oracle(obs, tau, P)
            cfg = SolverConfig(refine_positions=False, grid_factor=4)
            res = solve_tikhonov(obs, tau, cfg)
            obj_oracle = tikhonov_objective(obs, tau, oracle)
            obj_cg = tikhonov_objective(obs, tau, res.measure)
            assert res.converged
            assert res.duality_gap <= 1e-8 * obs.l2_norm() ** 2
            assert abs(obj_cg - obj_oracle) <= 1e-8 * max(1.0, abs(obj_oracle))


class TestIsApproximation:
    def test_identical_measures(self, rng):
        mu = DiscreteMeasure.from_arrays(rng.uniform(0, 1, 3), rng.normal(size=3))
        rep = is_approximation(mu, mu, 32, 0.0)
        assert rep.passed
        assert rep.spectral_l2 == pytest.approx(0.0, abs=1e-12)

    def test_added_mass_fails_tv(self, rng):
        eps = 0.1
        mu0 = DiscreteMeasure.from_arrays([0.2], [1.0])
        mu = mu0 + DiscreteMeasure.from_arrays([0.7], [3 * eps])
        rep = is_approximation(mu, mu0, 32, eps)
        assert not rep.tv_ok
        assert not rep.passed

    def test_reports_both_spectral_norms(self, rng):
        mu0 = DiscreteMeasure.from_arrays([0.2], [1.0])
        mu = DiscreteMeasure.from_arrays([0.2 + 1e-3], [1.0])
        rep = is_approximation(mu, mu0, 32, 0.5)
        assert rep.spectral_sup >= rep.spectral_l2 / np.sqrt(2 * 32 + 1)
        assert rep.spectral_sup > 0


class TestTikhonovInequalities:
    def test_tv_bound_under_calibrated_penalty(self, rng):
        # with the penalty at the noise level, the recovered variation stays
        # within eps/2 of the truth's (plus solver tolerance)
        M = 128
        mu0 = DiscreteMeasure.from_arrays(
            separated_support(4, M, rng), np.exp(2j * np.pi * rng.uniform(size=4))
        )
        eps = 0.25
        obs, _, _ = make_observation(mu0, M, NoiseSpec(kind="bounded", epsilon=eps, seed=77))
        res = solve_tikhonov(obs, eps)
        assert res.converged
        assert total_variation(res.measure) <= total_variation(mu0) + eps / 2 + 1e-6
        rep = is_approximation(res.measure, mu0, M, eps)
        assert rep.passed
