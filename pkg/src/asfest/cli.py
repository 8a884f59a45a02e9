"""Command-line interface: simulate snapshots, run estimators on files,
drive full experiments, and score estimates.

Output directories honor the ASFEST_OUTPUT_DIR environment variable unless
an explicit --out-dir is given.  Exit code is nonzero iff a hard error
occurred.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import baselines, estimators, io
from .core import AngularGrid, asf_to_covariance, atom_matrix, grid_sample_asf, load_asf_json
from .covariance import build_nnls_problem, sample_covariance, sample_snapshots, toeplitzify
from .harness import METRICS_FIELDS, ExperimentConfig, compute_metrics, run_experiment

ENV_OUTPUT_DIR = "ASFEST_OUTPUT_DIR"


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="draw noisy channel snapshots from an ASF file")
    p.add_argument("--asf", required=True, help="ASF description JSON")
    p.add_argument("--m", type=int, required=True, help="number of antennas")
    p.add_argument("--t", type=int, required=True, help="number of snapshots")
    snr = p.add_mutually_exclusive_group()
    snr.add_argument("--snr-db", type=float, default=20.0)
    snr.add_argument("--noise-power", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="snapshot CSV path (sidecar JSON written next to it)")
    p.add_argument("--sigma-out", help="also write the Toeplitzified moment vector")


def _add_estimate(sub):
    p = sub.add_parser("estimate", help="estimate a grid ASF from snapshots or moments")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--snapshots", help="snapshot CSV (+ sidecar)")
    src.add_argument("--sigma", help="moment-vector CSV (+ sidecar)")
    src.add_argument("--asf", help="ASF JSON, used with exact moments (T -> inf)")
    p.add_argument("--m", type=int, help="antennas (required with --asf)")
    p.add_argument("--method", required=True,
                   choices=["nnls", "gnnls", "spice", "burg", "l2proj"])
    p.add_argument("--g", type=int, default=128, help="grid size")
    p.add_argument("--p0", type=int, help="dictionary width cap (gnnls)")
    p.add_argument("--varsigma-prime", type=float,
                   help="gnnls weight; default sweeps and picks residual-matched")
    p.add_argument("--order", type=int, help="Burg AR order (default M-1)")
    p.add_argument("--noise-power", type=float, help="override sidecar N0")
    p.add_argument("--batch", action="store_true",
                   help="multi-row --sigma input: write an S x G gamma matrix")
    p.add_argument("--out", required=True)


def _add_experiment(sub):
    p = sub.add_parser("experiment", help="run the full protocol from a config file")
    p.add_argument("--config", required=True, help="ExperimentConfig JSON")
    p.add_argument("--out-dir", help="overrides config output_dir and the environment")


def _add_metrics(sub):
    p = sub.add_parser("metrics", help="score estimate CSVs against a true ASF")
    p.add_argument("--estimate", required=True, nargs="+", help="estimate CSV file(s)")
    p.add_argument("--asf", required=True, help="true ASF JSON")
    p.add_argument("--out", required=True, help="metrics CSV path")
    p.add_argument("--seed", type=int, default=0, help="label recorded in the rows")
    p.add_argument("--t-over-m", type=int, default=0, help="label recorded in the rows")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asfest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_simulate(sub)
    _add_estimate(sub)
    _add_experiment(sub)
    _add_metrics(sub)
    return parser


def _out_path(path_str: str) -> Path:
    path = Path(path_str)
    env = os.environ.get(ENV_OUTPUT_DIR)
    if env and not path.is_absolute():
        path = Path(env) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_simulate(args) -> int:
    asf = load_asf_json(args.asf)
    cov = asf_to_covariance(asf, args.m)
    noise = args.noise_power
    if noise is None:
        noise = float(cov.first_column[0].real) * 10.0 ** (-args.snr_db / 10.0)
    snaps = sample_snapshots(cov, args.t, noise, args.seed)
    out = _out_path(args.out)
    io.save_snapshots(snaps, out)
    if args.sigma_out:
        sigma = toeplitzify(sample_covariance(snaps))
        io.save_sigma_rows(
            sigma, {"M": args.m, "T": args.t, "N0": noise, "seed": args.seed},
            _out_path(args.sigma_out),
        )
    print(f"wrote {args.t} snapshots to {out}")
    return 0


def _load_estimate_inputs(args):
    """Returns (sigma_rows (S, M), sample_cov or None, noise_power)."""
    if args.snapshots:
        snaps = io.load_snapshots(args.snapshots)
        cov = sample_covariance(snaps)
        noise = snaps.noise_power if args.noise_power is None else args.noise_power
        return toeplitzify(cov)[None, :], cov, noise
    if args.sigma:
        sigma, meta = io.load_sigma_rows(args.sigma)
        noise = meta.get("N0", 0.0) if args.noise_power is None else args.noise_power
        return sigma, None, noise
    if args.m is None:
        raise SystemExit("--asf input requires --m")
    asf = load_asf_json(args.asf)
    cov = asf_to_covariance(asf, args.m)
    return cov.first_column[None, :], cov.matrix(), 0.0


def _estimate_one(method, sigma, sample_cov, noise, grid, atoms, args):
    m = sigma.size
    if method in ("nnls", "gnnls"):
        problem = build_nnls_problem(sigma, atoms, noise)
        if method == "nnls":
            return estimators.estimate_nnls(problem)
        p0 = args.p0 or estimators.default_p0(grid.size, m)
        dictionary = estimators.build_pulse_dictionary(grid.size, p0)
        if args.varsigma_prime is not None:
            return estimators.estimate_gnnls(problem, dictionary, args.varsigma_prime)
        sweep = estimators.gnnls_sweep(problem, dictionary)
        reference = estimators.estimate_nnls(problem)
        return estimators.select_residual_matched(sweep, reference.data_residual, float(np.linalg.norm(problem.b)))
    if method == "burg":
        order = args.order if args.order is not None else m - 1
        return baselines.estimate_burg(sigma, order, grid)
    if method == "l2proj":
        return baselines.estimate_l2_projection(sigma, grid)
    if method == "spice":
        if sample_cov is None:
            raise SystemExit("spice needs --snapshots or --asf input (a full covariance)")
        return baselines.estimate_spice(sample_cov, grid, noise_power=noise or None)
    raise SystemExit(f"unknown method {method}")


def _cmd_estimate(args) -> int:
    sigma_rows, sample_cov, noise = _load_estimate_inputs(args)
    grid = AngularGrid(args.g)
    atoms = atom_matrix(grid, sigma_rows.shape[1])
    out = _out_path(args.out)
    if sigma_rows.shape[0] > 1:
        if not args.batch:
            raise SystemExit("multi-row sigma input needs --batch")
        gammas = []
        for row in sigma_rows:
            est = _estimate_one(args.method, row, sample_cov, noise, grid, atoms, args)
            gammas.append(est.gamma)
        io.write_matrix_csv(np.vstack(gammas), out)
        print(f"wrote {len(gammas)} x {args.g} estimates to {out}")
        return 0
    est = _estimate_one(args.method, sigma_rows[0], sample_cov, noise, grid, atoms, args)
    diag = {"method": est.method, "data_residual": est.data_residual}
    if est.varsigma_prime is not None:
        diag["varsigma_prime"] = est.varsigma_prime
    io.save_estimate(grid.points, est.gamma, out, diagnostics=diag)
    print(f"wrote estimate to {out}")
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    out_dir = args.out_dir or os.environ.get(ENV_OUTPUT_DIR) or config.output_dir
    rows = run_experiment(config, out_dir)
    failures = [r for r in rows if r.status != "ok"]
    print(f"{len(rows)} runs -> {out_dir} ({len(failures)} failures)")
    return 1 if failures else 0


def _cmd_metrics(args) -> int:
    asf = load_asf_json(args.asf)
    rows = []
    for est_path in args.estimate:
        xi, gamma = io.load_estimate(est_path)
        grid = AngularGrid(xi.size)
        truth = grid_sample_asf(asf, grid)
        row = compute_metrics(
            Path(est_path).stem, args.seed, args.t_over_m, gamma, truth
        )
        rows.append({f: getattr(row, f) for f in METRICS_FIELDS})
    io.write_metrics_csv(rows, METRICS_FIELDS, _out_path(args.out))
    print(f"wrote {len(rows)} metric rows to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "estimate": _cmd_estimate,
        "experiment": _cmd_experiment,
        "metrics": _cmd_metrics,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
