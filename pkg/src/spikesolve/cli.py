"""Reproducible command-line front end.

Subcommands: generate (random separated measures), observe (attach spectral
noise), solve (penalized / constrained / noiseless recovery), certify
(sign-interpolating dual certificates with norm reports), analyze (error
functionals of a recovery against the truth), sweep (verification suites
emitting CSV tables).

All randomness flows from one root seed; every CSV row carries the seed and
a hash of the generating configuration, and repeated runs produce identical
files apart from the timestamp header line. Exit codes: 0 success, 2 usage
or I/O problems, 3 numerical failures or violated assertions.
``SPIKESOLVE_THREADS`` caps sweep parallelism (default 1; rows are written
in deterministic order regardless).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import certificate as cert_mod
from . import error_analysis as ea
from .errors import NumericalError, ParameterError
from .kernels import sup_norm
from .measures import DiscreteMeasure, min_separation, satisfies_separation, total_variation
from .noise import (
    NoiseSpec,
    epsilon_from_gaussian,
    failure_probability_bound,
    make_observation,
    tail_montecarlo,
)
from .solvers import (
    Observation,
    SolverConfig,
    is_approximation,
    solve_constrained,
    solve_noiseless,
    solve_tikhonov,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _config_hash(params: dict) -> str:
    clean = {
        k: v for k, v in params.items() if not callable(v) and k not in ("out", "command")
    }
    blob = json.dumps(clean, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_json(data: dict, out: str | None):
    text = json.dumps(data, indent=2)
    if out is None or out == "-":
        print(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def _read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SPIKESOLVE_THREADS", "1")))
    except ValueError:
        return 1


def _run_trials(worker, args_list):
    nthreads = _threads()
    if nthreads == 1 or len(args_list) <= 1:
        return [worker(a) for a in args_list]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        return list(pool.map(worker, args_list))


def random_measure(J: int, M: int, margin: float, seed: int, amplitude_law: str) -> DiscreteMeasure:
    """Random separated measure: sequential rejection sampling of positions
    at separation >= margin * 2/M, amplitudes from the requested law."""
    if J < 1:
        raise ParameterError("J must be >= 1")
    if margin < 1.0:
        raise ParameterError("margin must be >= 1 (separation in units of 2/M)")
    gap = margin * 2.0 / M
    if J * gap > 1.0:
        raise ParameterError(f"cannot pack {J} spikes at separation {gap:.4g} on the torus")
    rng = np.random.Generator(np.random.Philox(key=np.array([seed & (2**64 - 1), 0], dtype=np.uint64)))
    positions: list[float] = []
    attempts = 0
    while len(positions) < J:
        x = float(rng.uniform())
        attempts += 1
        if attempts > 20000 * J:
            raise NumericalError(f"rejection sampling failed to place {J} spikes at margin {margin}")
        if all(min(abs(x - p), 1 - abs(x - p)) >= gap for p in positions):
            positions.append(x)
    if amplitude_law == "phase":
        amps = np.exp(2j * np.pi * rng.uniform(size=J))
    elif amplitude_law == "gaussian":
        amps = (rng.normal(size=J) + 1j * rng.normal(size=J)) / math.sqrt(2.0)
    else:
        raise ParameterError(f"unknown amplitude law {amplitude_law!r}")
    return DiscreteMeasure.from_arrays(np.array(positions), amps)


def _solver_config(args) -> SolverConfig:
    if getattr(args, "solver_config", None):
        return SolverConfig.from_dict(_read_json(args.solver_config))
    return SolverConfig(
        grid_factor=args.grid_factor,
        gap_tolerance=args.gap_tol,
        refine_positions=not getattr(args, "on_grid", False),
        max_iterations=args.max_iterations,
    )


def cmd_generate(args) -> int:
    mu = random_measure(args.J, args.M, args.margin, args.seed, args.amplitude_law)
    assert satisfies_separation(mu.positions, args.M)
    data = mu.to_dict()
    data["meta"] = {
        "M": args.M,
        "J": args.J,
        "margin": args.margin,
        "seed": args.seed,
        "min_separation": min_separation(mu.positions),
        "config_hash": _config_hash(vars(args)),
    }
    _write_json(data, args.out)
    return EXIT_OK


def cmd_observe(args) -> int:
    mu = DiscreteMeasure.from_dict(_read_json(args.measure))
    if args.noise_kind == "gaussian":
        spec = NoiseSpec(kind="gaussian", sigma=args.sigma, gamma=args.gamma, seed=args.seed)
    else:
        if args.epsilon is None:
            raise ParameterError("bounded noise requires --epsilon")
        spec = NoiseSpec(kind="bounded", epsilon=args.epsilon, seed=args.seed)
    obs, realization, eps = make_observation(mu, args.M, spec)
    _write_json(
        {
            "observation": obs.to_dict(),
            "epsilon": eps,
            "noise": {"spectrum": realization.spectrum.to_dict(), "l2": realization.l2_norm()},
            "noise_spec": spec.to_dict(),
            "config_hash": _config_hash(vars(args)),
        },
        args.out,
    )
    return EXIT_OK


def cmd_solve(args) -> int:
    data = _read_json(args.observation)
    obs = Observation.from_dict(data["observation"] if "observation" in data else data)
    cfg = _solver_config(args)
    if args.method == "tikhonov":
        if args.tau is None:
            raise ParameterError("tikhonov solve requires --tau")
        result = solve_tikhonov(obs, args.tau, cfg)
    elif args.method == "constrained":
        if args.delta is None:
            raise ParameterError("constrained solve requires --delta")
        result = solve_constrained(obs, args.delta, cfg)
    else:
        result = solve_noiseless(obs, cfg)
    payload = result.to_dict()
    payload["config_hash"] = _config_hash(vars(args))
    _write_json(payload, args.out)
    if not result.converged and args.strict:
        print(f"solver did not converge: {result.message}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_certify(args) -> int:
    mu = DiscreteMeasure.from_dict(_read_json(args.measure))
    amps = mu.amplitudes
    signs = amps / np.abs(amps)
    report = cert_mod.dual_certificate(mu.positions, signs, args.M, grid_size=args.grid_size)
    mats = cert_mod.build_matrices(mu.positions, args.M)
    norms = cert_mod.norm_bound_report(mats)
    interp = cert_mod.verify_interpolation(report.certificate, signs, np.zeros_like(signs))
    payload = {
        "M": args.M,
        "J": int(len(mu)),
        "sup_abs": report.sup_abs,
        "off_support_max": report.off_support_max,
        "strictly_below_one": report.strictly_below_one,
        "theory_regime": report.theory_regime,
        "interpolation": {
            "value_residual": interp.value_residual,
            "slope_residual": interp.slope_residual,
            "passed": interp.passed,
        },
        "norm_bounds": {
            "d0_inv": norms.d0_inv_norm,
            "d1_over_M": norms.d1_norm_scaled,
            "schur_inv_times_M2": norms.schur_inv_norm_scaled,
            "condition": norms.condition,
        },
        "config_hash": _config_hash(vars(args)),
    }
    _write_json(payload, args.out)
    if not interp.passed:
        return EXIT_NUMERICAL
    return EXIT_OK


def _load_measure(path: str) -> DiscreteMeasure:
    """Accept either a bare measure JSON or a solver-result JSON."""
    data = _read_json(path)
    if "spikes" not in data and "measure" in data:
        data = data["measure"]
    return DiscreteMeasure.from_dict(data)


def cmd_analyze(args) -> int:
    mu = _load_measure(args.solution)
    mu0 = _load_measure(args.truth)
    kern = ea.kernel_family(args.kernel)(args.N)
    report = ea.error_report(kern, mu, mu0, args.M, args.epsilon)
    approx = is_approximation(mu, mu0, args.M, args.epsilon)
    payload = {
        "error": report.to_dict(),
        "approximation": approx.to_dict(),
        "config_hash": _config_hash(vars(args)),
    }
    _write_json(payload, args.out)
    return EXIT_OK


def _sweep_tail(args) -> tuple[list[dict], bool]:
    points = [(4, 0.3), (64, 0.05), (128, 0.1)] if args.M is None else [(args.M, args.gamma)]
    rows = []
    ok = True
    for M, gamma in points:
        freq = tail_montecarlo(M, args.sigma, gamma, args.trials, args.seed)
        bound = failure_probability_bound(M, gamma)
        margin = 3.0 * math.sqrt(max(bound * (1 - bound), 1e-12) / args.trials)
        passed = freq <= bound + margin
        ok &= passed
        rows.append(
            {
                "M": M,
                "gamma": gamma,
                "sigma": args.sigma,
                "trials": args.trials,
                "epsilon": epsilon_from_gaussian(M, args.sigma, gamma),
                "frequency": freq,
                "bound": bound,
                "margin": margin,
                "passed": passed,
                "seed": args.seed,
            }
        )
    return rows, ok


def _sweep_approximation(args) -> tuple[list[dict], bool]:
    M = args.M or 128
    rows = []
    ok = True

    def one(trial):
        mu0 = random_measure(args.J, M, args.margin, args.seed + 1000 * trial, "phase")
        eps = args.epsilon
        spec = NoiseSpec(kind="bounded", epsilon=eps, seed=args.seed + trial)
        obs, _, _ = make_observation(mu0, M, spec, trial=trial)
        out = []
        for method in ("tikhonov", "constrained"):
            if method == "tikhonov":
                res = solve_tikhonov(obs, eps)
            else:
                res = solve_constrained(obs, eps)
            rep = is_approximation(res.measure, mu0, M, eps)
            tv_margin = total_variation(res.measure) - total_variation(mu0)
            out.append(
                {
                    "M": M,
                    "trial": trial,
                    "method": method,
                    "epsilon": eps,
                    "tv": rep.tv,
                    "tv_bound": rep.tv_bound,
                    "spectral_l2": rep.spectral_l2,
                    "spectral_bound": rep.spectral_bound,
                    "spectral_sup": rep.spectral_sup,
                    "tv_margin": tv_margin,
                    "passed": rep.passed,
                    "seed": args.seed + trial,
                }
            )
        return out

    for chunk in _run_trials(one, list(range(args.trials))):
        for row in chunk:
            ok &= row["passed"]
            rows.append(row)
    rows.sort(key=lambda r: (r["trial"], r["method"]))
    return rows, ok


def _sweep_error_constants(args) -> tuple[list[dict], bool]:
    rows = []
    M_list = [128, 256] if args.M is None else [args.M]
    ratios: dict[int, list[float]] = {}

    def one(task):
        M, trial = task
        mu0 = random_measure(args.J, M, args.margin, args.seed + 7000 + trial, "phase")
        eps = args.epsilon
        spec = NoiseSpec(kind="bounded", epsilon=eps, seed=args.seed + trial)
        obs, _, _ = make_observation(mu0, M, spec, trial=trial)
        res = solve_tikhonov(obs, eps) if trial % 2 == 0 else solve_constrained(obs, eps)
        nbhd = ea.neighborhoods(mu0.positions, M)
        nu = res.measure - mu0
        fm = ea.far_mass(nu, nbhd)
        nm = ea.near_second_moment(nu, nbhd)
        return {
            "M": M,
            "trial": trial,
            "epsilon": eps,
            "far_over_eps": fm / eps,
            "moment_scaled": M**2 * nm / eps,
            "solver": "tikhonov" if trial % 2 == 0 else "constrained",
            "seed": args.seed + trial,
        }

    tasks = [(M, t) for M in M_list for t in range(args.trials)]
    for row in _run_trials(one, tasks):
        rows.append(row)
        ratios.setdefault(row["M"], []).append(max(row["far_over_eps"], row["moment_scaled"]))
    rows.sort(key=lambda r: (r["M"], r["trial"]))
    ok = True
    if len(M_list) > 1:
        tops = {M: max(v) for M, v in ratios.items()}
        lo, hi = min(tops.values()), max(tops.values())
        ok = hi <= 2.0 * max(lo, 1e-6)
    return rows, ok


def _sweep_scaling(args) -> tuple[list[dict], bool]:
    M = args.M or 128
    mu0 = random_measure(args.J, M, args.margin, args.seed + 31, "phase")
    noise = NoiseSpec(kind="gaussian", sigma=args.sigma, gamma=args.gamma, seed=args.seed)
    N_list = [M * k for k in (1, 2, 4, 8)]
    ok = True
    rows = []
    for family in ("fejer", "bump"):
        table = ea.scaling_experiment(mu0, M, noise, family, N_list, args.trials, seed=args.seed)
        for r in table.rows:
            d = r.to_dict()
            d["family"] = family
            d["slope"] = table.slope
            d["seed"] = args.seed
            rows.append(d)
        if table.slope is not None:
            ok &= table.slope <= 2.3
    return rows, ok


def _sweep_certificates(args) -> tuple[list[dict], bool]:
    rows = []
    ok = True
    M_list = [128, 256, 512] if args.M is None else [args.M]
    rng = np.random.Generator(np.random.Philox(key=np.array([args.seed & (2**64 - 1), 5], dtype=np.uint64)))
    for i in range(args.trials):
        M = M_list[i % len(M_list)]
        J = int(rng.integers(1, 17))
        mu0 = random_measure(J, M, args.margin, args.seed + 97 * i, "phase")
        a = rng.normal(size=J) + 1j * rng.normal(size=J)
        b = (rng.normal(size=J) + 1j * rng.normal(size=J)) * M
        cert = cert_mod.make_certificate(mu0.positions, a, b, M)
        rep = cert_mod.verify_interpolation(cert, a, b)
        poly = cert_mod.certificate_poly(cert)
        fsup = sup_norm(poly)
        scale = float(np.max(np.abs(a)) + np.max(np.abs(b)) / M)
        rows.append(
            {
                "M": M,
                "J": J,
                "trial": i,
                "value_residual": rep.value_residual,
                "slope_residual": rep.slope_residual,
                "sup_over_scale": fsup / scale,
                "passed": rep.passed,
                "seed": args.seed + 97 * i,
            }
        )
        ok &= rep.passed
    return rows, ok


_SUITES = {
    "tail": _sweep_tail,
    "approximation": _sweep_approximation,
    "error-constants": _sweep_error_constants,
    "scaling": _sweep_scaling,
    "certificates": _sweep_certificates,
}


def cmd_sweep(args) -> int:
    runner = _SUITES[args.suite]
    rows, ok = runner(args)
    rows = [dict(r, config_hash=_config_hash(vars(args))) for r in rows]
    comment = f"generated {_timestamp()}"
    if args.out:
        class _Row:
            def __init__(self, d):
                self._d = d

            def to_dict(self):
                return self._d

        ea.write_rows_csv([_Row(r) for r in rows], args.out, header_comment=comment)
    else:
        for r in rows:
            print(json.dumps(r, default=str))
    if not ok:
        print(f"sweep suite {args.suite!r}: assertion failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spikesolve", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="random separated measure as JSON")
    g.add_argument("--J", type=int, required=True)
    g.add_argument("--M", type=int, required=True)
    g.add_argument("--margin", type=float, default=1.0, help="separation in units of 2/M")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--amplitude-law", choices=["phase", "gaussian"], default="phase")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_generate)

    o = sub.add_parser("observe", help="attach spectral noise to a measure")
    o.add_argument("--measure", required=True)
    o.add_argument("--M", type=int, required=True)
    o.add_argument("--noise-kind", choices=["gaussian", "bounded"], default="gaussian")
    o.add_argument("--sigma", type=float, default=0.0)
    o.add_argument("--gamma", type=float, default=0.1)
    o.add_argument("--epsilon", type=float, default=None)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out", default=None)
    o.set_defaults(func=cmd_observe)

    s = sub.add_parser("solve", help="recover a measure from an observation")
    s.add_argument("--observation", required=True)
    s.add_argument("--method", choices=["tikhonov", "constrained", "noiseless"], default="noiseless")
    s.add_argument("--tau", type=float, default=None)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--grid-factor", dest="grid_factor", type=int, default=16)
    s.add_argument("--gap-tol", dest="gap_tol", type=float, default=1e-9)
    s.add_argument("--max-iterations", dest="max_iterations", type=int, default=150)
    s.add_argument("--on-grid", action="store_true", help="disable off-grid refinement")
    s.add_argument("--solver-config", dest="solver_config", default=None,
                   help="JSON file with SolverConfig fields (overrides the flags)")
    s.add_argument("--strict", action="store_true", help="exit 3 when not converged")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="dual certificate for a measure's signs")
    c.add_argument("--measure", required=True)
    c.add_argument("--M", type=int, required=True)
    c.add_argument("--grid-size", dest="grid_size", type=int, default=1 << 18)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_certify)

    a = sub.add_parser("analyze", help="error functionals of a recovery")
    a.add_argument("--solution", required=True)
    a.add_argument("--truth", required=True)
    a.add_argument("--M", type=int, required=True)
    a.add_argument("--epsilon", type=float, required=True)
    a.add_argument("--kernel", choices=["fejer", "dirichlet", "bump"], default="fejer")
    a.add_argument("--N", type=int, default=None)
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_analyze)

    w = sub.add_parser("sweep", help="verification suites emitting CSV")
    w.add_argument("--suite", choices=sorted(_SUITES), required=True)
    w.add_argument("--M", type=int, default=None)
    w.add_argument("--J", type=int, default=4)
    w.add_argument("--margin", type=float, default=1.1)
    w.add_argument("--sigma", type=float, default=1.0)
    w.add_argument("--gamma", type=float, default=0.1)
    w.add_argument("--epsilon", type=float, default=0.25)
    w.add_argument("--trials", type=int, default=100)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out", default=None)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if getattr(args, "N", "absent") is None:
            args.N = args.M
        return args.func(args)
    except (ParameterError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input ({exc})", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
