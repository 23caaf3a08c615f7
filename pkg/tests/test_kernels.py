"""Kernel families, sup-norm estimation, derivative-growth checks."""

import numpy as np
import pytest

from spikesolve.errors import ParameterError
from spikesolve.kernels import (
    bernstein_check,
    bump_profile_norms,
    convolve_at,
    dirichlet_kernel,
    fejer_kernel,
    jackson_derivative_eval,
    jackson_kernel,
    periodized_bump,
    sup_norm,
    sup_norm_estimate,
)
from spikesolve.measures import DiscreteMeasure, TrigPoly

from conftest import scaled_support


def quartic_closed_form(x, M):
    """Reference closed form, evaluated away from the singularity."""
    N = M // 2 + 1
    return (np.sin(N * np.pi * x) / (N * np.sin(np.pi * x))) ** 4


class TestQuarticKernel:
    def test_peak_value_one(self):
        g = jackson_kernel(128)
        assert abs(g.eval(0.0) - 1.0) < 1e-12
        # coefficient sum is the value at zero
        assert abs(g.spectral.coeffs.sum() - 1.0) < 1e-12

    def test_zeros_at_lattice(self):
        M = 128
        N = M // 2 + 1
        g = jackson_kernel(M)
        for k in (1, 2, 5, 17):
            assert abs(g.eval(k / N)) < 1e-12

    def test_mean_matches_quadrature_oracle(self):
        # oracle: uniform-grid mean of the closed form is the exact integral
        # once the grid exceeds the polynomial degree
        for M in (64, 128):
            N = M // 2 + 1
            g = jackson_kernel(M)
            P = 4 * M + 7
            xs = (np.arange(P) + 0.5) / P
            quad = float(np.mean(quartic_closed_form(xs, M)))
            assert g.spectral.coeff(0).real == pytest.approx(quad, abs=1e-9)
            assert g.spectral.coeff(0).real == pytest.approx(
                (2 * N**2 + 1) / (3 * N**3), rel=1e-13
            )

    def test_spectral_spatial_agreement(self):
        g = jackson_kernel(128)
        xs = np.arange(4096) / 4096
        keep = np.minimum(xs, 1 - xs) > 1e-4
        spec = g.eval(xs[keep]).real
        spat = quartic_closed_form(xs[keep], 128)
        assert np.max(np.abs(spec - spat)) < 1e-9

    def test_derivatives_at_zero(self):
        assert jackson_derivative_eval(128, 1, 0.0) == pytest.approx(0.0, abs=1e-9)
        assert jackson_derivative_eval(128, 3, 0.0) == pytest.approx(0.0, abs=1e-4)
        assert jackson_derivative_eval(128, 0, 0.0) == pytest.approx(1.0)

    def test_second_derivative_matches_finite_difference(self):
        # Richardson-extrapolated central difference of the closed form
        M = 128
        N = M // 2 + 1
        h = 1e-3 / N

        def second_diff(h):
            return (
                quartic_closed_form(np.array([h]), M)[0]
                - 2.0
                + quartic_closed_form(np.array([h]), M)[0]
            ) / h**2

        d_h = second_diff(h)
        d_h2 = second_diff(h / 2)
        oracle = (4 * d_h2 - d_h) / 3
        val = jackson_derivative_eval(M, 2, 0.0)
        assert val < 0
        assert val == pytest.approx(oracle, rel=1e-6)

    def test_odd_window_accepted(self):
        g = jackson_kernel(129)
        assert g.spectral.degree <= 129
        assert abs(g.eval(0.0) - 1.0) < 1e-12

    def test_invalid_window_rejected(self):
        for bad in (0, 1, -4):
            with pytest.raises(ParameterError):
                jackson_kernel(bad)

    def test_derivative_sums_scale_with_window(self, rng):
        # sum over other support points of |K^(l)(x - s_k)| grows like M^l;
        # reusing the same gap pattern (in units of 2/M) across window
        # degrees makes the constant comparable, and it stays within a
        # factor 2 over the sweep
        gap_units = rng.uniform(1.0, 2.5, size=7)
        rel_offsets = rng.uniform(-0.16, 0.16, size=8)
        consts = {l: [] for l in range(4)}
        for M in (128, 256, 512):
            support = scaled_support(gap_units, M)
            kern = jackson_kernel(M)
            worst = {l: 0.0 for l in range(4)}
            for j, s in enumerate(support):
                others = np.delete(support, j)
                x = s + rel_offsets[j] / M
                for l in range(4):
                    total = float(np.sum(np.abs(kern.eval(x - others, l))))
                    worst[l] = max(worst[l], total / M**l)
            for l in range(4):
                consts[l].append(worst[l])
        for l in range(4):
            lo, hi = min(consts[l]), max(consts[l])
            assert hi <= 2.0 * max(lo, 1e-9), (l, consts[l])


class TestClassicalKernels:
    def test_dirichlet_peak(self):
        for N in (1, 5, 32):
            assert dirichlet_kernel(N).eval(0.0) == pytest.approx(2 * N + 1)

    def test_fejer_peak(self):
        for N in (1, 5, 32):
            assert fejer_kernel(N).eval(0.0) == pytest.approx(N + 1)

    def test_fejer_nonnegative(self):
        vals = fejer_kernel(16).spectral.grid_values(4096).real
        assert vals.min() > -1e-10


class TestPeriodizedBump:
    def test_profile_endpoints(self):
        N, L = 4, 4.0
        b = periodized_bump(N, L)
        assert b.eval(0.0) == pytest.approx(1.0)
        assert abs(b.eval(1.0 / (L * N))) < 1e-15
        assert abs(b.eval(-1.0 / (L * N))) < 1e-15

    def test_derivative_smooth_pasting(self):
        N, L = 4, 4.0
        b = periodized_bump(N, L)
        for x in (0.0, 1.0 / (L * N), -1.0 / (L * N)):
            assert abs(b.eval(x, 1)) < 1e-12

    def test_derivative_matches_finite_difference(self, rng):
        b = periodized_bump(3, 5.0)
        h = 1e-7
        for x in rng.uniform(-0.05, 0.05, 12):
            fd = (complex(b.eval(x + h)) - complex(b.eval(x - h))).real / (2 * h)
            assert complex(b.eval(x, 1)).real == pytest.approx(fd, abs=1e-4 * (1 + abs(fd)))

    def test_scaled_derivative_bound(self):
        # |K_N'| <= N * sup|k'| on a dense grid (equality up to sampling)
        L = 4.0
        norms = bump_profile_norms(L)
        base_sup = norms["k1"] / 1  # profile derivative sup at N=1 scale: pi*L/2 * 3*sqrt(3)/4
        for N in (1, 4, 16):
            b = periodized_bump(N, L)
            xs = np.arange(1 << 14) / (1 << 14)
            sup1 = float(np.max(np.abs(b.eval(xs, 1))))
            assert sup1 <= N * base_sup * (1 + 1e-9)
            assert sup1 >= 0.95 * N * base_sup  # near equality: same profile rescaled

    def test_periodization_keeps_sup(self):
        # non-overlapping support means the sup norm equals the profile's
        for N in (1, 2, 8):
            b = periodized_bump(N, 3.5)
            xs = np.arange(1 << 14) / (1 << 14)
            assert float(np.max(np.abs(b.eval(xs)))) == pytest.approx(1.0, abs=1e-12)

    def test_narrow_profile_rejected(self):
        with pytest.raises(ParameterError):
            periodized_bump(4, 2.0)
        with pytest.raises(ParameterError):
            periodized_bump(4, 1.5)


class TestConvolveAt:
    def test_zero_measure(self):
        k = fejer_kernel(8)
        assert convolve_at(k, DiscreteMeasure.empty(), 0.3) == 0.0

    def test_single_delta_reproduces_kernel(self, rng):
        k = fejer_kernel(8)
        mu = DiscreteMeasure.from_arrays([0.0], [1.0])
        for x in rng.uniform(0, 1, 6):
            assert convolve_at(k, mu, x) == pytest.approx(complex(k.eval(x)))

    def test_difference_of_deltas(self):
        N, t = 12, 0.23
        k = fejer_kernel(N)
        nu = DiscreteMeasure.from_arrays([0.0, t], [1.0, -1.0])
        expected = (N + 1) - complex(k.eval(t)).real
        assert complex(convolve_at(k, nu, 0.0)).real == pytest.approx(expected)


class TestSupNorm:
    def test_dirichlet_on_grid(self):
        assert sup_norm(dirichlet_kernel(8)) == pytest.approx(17.0)

    def test_zero_poly(self):
        assert sup_norm(TrigPoly.zero(4)) == 0.0

    def test_quartic_kernel_peak(self):
        assert sup_norm(jackson_kernel(128)) == pytest.approx(1.0, abs=1e-6)

    def test_upper_bound_certified(self, rng):
        p = TrigPoly(16, rng.normal(size=33) + 1j * rng.normal(size=33))
        est = sup_norm_estimate(p)
        # oracle: much denser scan stays below the certified upper bound
        dense = float(np.max(np.abs(p.grid_values(1 << 16))))
        assert est.grid_max <= dense <= est.upper_bound
        assert est.certified

    def test_grid_too_coarse_rejected(self):
        with pytest.raises(ParameterError):
            sup_norm(TrigPoly(16, np.ones(33)), grid_size=256)


class TestBernstein:
    def test_pure_mode_extremal(self):
        # exp(2 pi i N x): the 2pi-corrected chain holds with equality
        N = 8
        c = np.zeros(2 * N + 1, dtype=complex)
        c[-1] = 1.0
        rep = bernstein_check(TrigPoly(N, c))
        assert rep.norm1 == pytest.approx(2 * np.pi * N, rel=1e-9)
        assert rep.corrected_ok
        assert not rep.literal_ok  # the plain-degree chain misses the 2pi

    def test_constant_passes(self):
        rep = bernstein_check(TrigPoly(0, np.array([3.0])))
        assert rep.corrected_ok and rep.literal_ok
        assert rep.norm1 == 0.0 and rep.norm2 == 0.0

    def test_fejer_strict(self):
        # dense-grid norms: the corrected chain holds strictly
        rep = bernstein_check(fejer_kernel(16).spectral)
        assert rep.corrected_ok
        assert rep.norm1 < 2 * np.pi * 16 * rep.norm0
        assert rep.norm2 < 2 * np.pi * 16 * rep.norm1

    def test_quartic_and_dirichlet_corrected(self):
        for p in (jackson_kernel(64).spectral, dirichlet_kernel(32).spectral):
            assert bernstein_check(p).corrected_ok
