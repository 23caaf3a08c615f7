"""Command-line harness: pipelines, determinism, exit codes."""

import json

import numpy as np
import pytest

from spikesolve.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main, random_measure
from spikesolve.errors import ParameterError
from spikesolve.measures import DiscreteMeasure, min_separation, satisfies_separation


def run(args):
    return main(args)


class TestGenerate:
    def test_single_spike_always_valid(self, tmp_path):
        out = tmp_path / "mu.json"
        assert run(["generate", "--J", "1", "--M", "64", "--seed", "3", "--out", str(out)]) == EXIT_OK
        mu = DiscreteMeasure.from_dict(json.loads(out.read_text()))
        assert len(mu) == 1

    def test_output_separated(self, tmp_path):
        out = tmp_path / "mu.json"
        assert run(["generate", "--J", "6", "--M", "128", "--margin", "1.3", "--seed", "11", "--out", str(out)]) == EXIT_OK
        mu = DiscreteMeasure.from_dict(json.loads(out.read_text()))
        assert satisfies_separation(mu.positions, 128)
        assert min_separation(mu.positions) >= 1.3 * 2 / 128

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(["generate", "--J", "5", "--M", "128", "--seed", "9", "--out", str(a)])
        run(["generate", "--J", "5", "--M", "128", "--seed", "9", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_infeasible_packing_exit_2(self):
        assert run(["generate", "--J", "65", "--M", "128", "--margin", "1.0"]) == EXIT_USAGE

    def test_exact_packing_feasible_or_reported(self):
        # 64 spikes at margin 1 on M=128 exactly fills the torus; rejection
        # sampling cannot place it and reports a numerical failure
        code = run(["generate", "--J", "64", "--M", "128", "--margin", "1.0", "--seed", "1"])
        assert code in (EXIT_OK, EXIT_NUMERICAL)

    def test_gaussian_amplitudes(self):
        mu = random_measure(4, 64, 1.1, seed=5, amplitude_law="gaussian")
        assert len(mu) == 4
        with pytest.raises(ParameterError):
            random_measure(4, 64, 1.1, seed=5, amplitude_law="cauchy")


class TestPipeline:
    def test_noiseless_roundtrip_exact(self, tmp_path):
        mu_f = tmp_path / "mu.json"
        obs_f = tmp_path / "obs.json"
        sol_f = tmp_path / "sol.json"
        assert run(["generate", "--J", "3", "--M", "128", "--seed", "5", "--out", str(mu_f)]) == EXIT_OK
        assert run([
            "observe", "--measure", str(mu_f), "--M", "128",
            "--noise-kind", "gaussian", "--sigma", "0", "--out", str(obs_f),
        ]) == EXIT_OK
        assert run([
            "solve", "--observation", str(obs_f), "--method", "noiseless",
            "--strict", "--out", str(sol_f),
        ]) == EXIT_OK
        sol = json.loads(sol_f.read_text())
        mu0 = DiscreteMeasure.from_dict(json.loads(mu_f.read_text()))
        mu = DiscreteMeasure.from_dict(sol["measure"])
        big = np.abs(mu.amplitudes) > 1e-4
        assert big.sum() == len(mu0)
        rec = np.sort(mu.positions[big])
        assert np.max(np.abs(rec - np.sort(mu0.positions))) <= 1e-4

    def test_analyze_approximation(self, tmp_path):
        mu_f = tmp_path / "mu.json"
        obs_f = tmp_path / "obs.json"
        sol_f = tmp_path / "sol.json"
        an_f = tmp_path / "an.json"
        run(["generate", "--J", "2", "--M", "128", "--seed", "6", "--out", str(mu_f)])
        run([
            "observe", "--measure", str(mu_f), "--M", "128", "--noise-kind", "bounded",
            "--epsilon", "0.2", "--seed", "2", "--out", str(obs_f),
        ])
        run([
            "solve", "--observation", str(obs_f), "--method", "constrained",
            "--delta", "0.2", "--out", str(sol_f),
        ])
        assert run([
            "analyze", "--solution", str(sol_f), "--truth", str(mu_f), "--M", "128",
            "--epsilon", "0.2", "--kernel", "fejer", "--out", str(an_f),
        ]) == EXIT_OK
        rep = json.loads(an_f.read_text())
        assert rep["approximation"]["passed"] is True

    def test_certify_single_spike(self, tmp_path, capsys):
        mu_f = tmp_path / "mu.json"
        run(["generate", "--J", "1", "--M", "128", "--seed", "8", "--out", str(mu_f)])
        # default dense grid: the peak is sampled to within ~1e-7
        assert run(["certify", "--measure", str(mu_f), "--M", "128"]) == EXIT_OK
        rep = json.loads(capsys.readouterr().out)
        assert rep["sup_abs"] == pytest.approx(1.0, abs=1e-6)
        assert rep["interpolation"]["passed"] is True
        assert rep["norm_bounds"]["d0_inv"] == pytest.approx(1.0)


class TestExitCodes:
    def test_missing_file_is_usage_error(self):
        assert run(["solve", "--observation", "/nonexistent.json"]) == EXIT_USAGE

    def test_bad_json_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["solve", "--observation", str(bad)]) == EXIT_USAGE

    def test_missing_parameter(self, tmp_path):
        mu_f = tmp_path / "mu.json"
        run(["generate", "--J", "1", "--M", "32", "--seed", "0", "--out", str(mu_f)])
        obs_f = tmp_path / "obs.json"
        run(["observe", "--measure", str(mu_f), "--M", "32", "--sigma", "0", "--out", str(obs_f)])
        assert run(["solve", "--observation", str(obs_f), "--method", "tikhonov"]) == EXIT_USAGE

    def test_unknown_flag(self):
        assert run(["generate", "--J", "1", "--M", "32", "--frobnicate"]) == EXIT_USAGE


class TestSweeps:
    def test_tail_suite(self, tmp_path):
        out = tmp_path / "tail.csv"
        assert run(["sweep", "--suite", "tail", "--trials", "2000", "--seed", "3", "--out", str(out)]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# generated ")
        header = lines[1].split(",")
        assert {"M", "gamma", "frequency", "bound", "config_hash", "seed"} <= set(header)
        assert len(lines) == 5  # comment + header + three calibration points

    def test_tail_deterministic_modulo_timestamp(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(["sweep", "--suite", "tail", "--trials", "500", "--seed", "1", "--out", str(a)])
        run(["sweep", "--suite", "tail", "--trials", "500", "--seed", "1", "--out", str(b)])
        assert a.read_text().splitlines()[1:] == b.read_text().splitlines()[1:]

    def test_certificates_suite_small(self, tmp_path):
        out = tmp_path / "cert.csv"
        assert run([
            "sweep", "--suite", "certificates", "--M", "128", "--trials", "5",
            "--seed", "2", "--out", str(out),
        ]) == EXIT_OK
        rows = out.read_text().splitlines()
        assert len(rows) == 2 + 5

    def test_approximation_suite_small(self, tmp_path):
        out = tmp_path / "approx.csv"
        assert run([
            "sweep", "--suite", "approximation", "--M", "64", "--J", "2",
            "--epsilon", "0.2", "--trials", "2", "--seed", "4", "--out", str(out),
        ]) == EXIT_OK
        text = out.read_text()
        assert "tikhonov" in text and "constrained" in text
