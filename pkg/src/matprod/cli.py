"""Command-line entry point: ``matprod <subcommand> [options]``.

Exit codes: 0 success, 1 hard property violation, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ensembles, harness, limitlaw, stieltjes
from .ensembles import EnsembleSpec
from .harness import ConfigError, ExperimentConfig

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (JSON)")
    common.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
    common.add_argument("--out", type=Path, help="output directory (overrides the config)")
    common.add_argument("--threads", type=_positive, help="replica worker threads")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(
        prog="matprod",
        description="Spectra of products of random matrices against their limit laws.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common],
                   help="sample products and write eigenvalues and singular values")
    sub.add_parser("limit", parents=[common],
                   help="evaluate the limit law and the Stieltjes solver on grids")
    sub.add_parser("compare", parents=[common],
                   help="convergence, moment and potential reports")
    sub.add_parser("proptest", parents=[common], help="property suite")
    sub.add_parser("sweep", parents=[common], help="convergence report over n_values")
    return parser


def default_config() -> ExperimentConfig:
    return ExperimentConfig(
        ensemble=EnsembleSpec(m=2, n=128, seed=0),
        n_values=[64, 128, 256],
        replicas=4,
        z_values=[0j, 0.5 + 0j, 2.0 + 0j],
        metrics=list(harness.ALL_METRICS),
    )


def load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config) if args.config else default_config()
    if args.seed is not None:
        config.ensemble = config.ensemble.with_seed(args.seed)
    if args.out is not None:
        config.output_dir = str(args.out)
    if args.threads is not None:
        config.threads = args.threads
    config.threads = harness.resolve_threads(config.threads)
    return config


def _emit(report, config, fmt) -> Path:
    path = harness.emit_report(report, fmt, config.output_dir)
    print(path)
    return path


def cmd_simulate(config, fmt) -> int:
    samples = harness.simulate(config)
    print(harness.write_samples(samples, config.seed, fmt, config.output_dir))
    return EXIT_OK


def cmd_limit(config, fmt) -> int:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = config.ensemble.m
    written = [
        limitlaw.export_density_grid(m, out / f"limit_density_m{m}.csv"),
        limitlaw.export_radial_cdf(m, out / f"limit_radial_m{m}.csv"),
    ]
    rows = []
    for z in config.z_values:
        curve = stieltjes.density_curve(m, z)
        written.append(curve.to_csv(out / f"limit_curve_m{m}_z{harness.zlabel(z)}.csv"))
        rows.append({
            "z": [z.real, z.imag],
            "potential_analytic": limitlaw.potential_U(m, z),
            "potential_solver": stieltjes.potential_from_solver(m, z),
            "curve_mass": curve.integral(),
        })
    states = [stieltjes.solve_system(m, z, 1e-6j) for z in config.z_values]
    written.append(stieltjes.export_diagnostics(states, out / f"limit_states_m{m}.json"))
    summary = {
        "m": m,
        "support_edge": limitlaw.support_edge(m),
        "fuss_catalan": [str(limitlaw.fuss_catalan(m, p)) for p in range(config.p_max + 1)],
        "potentials": rows,
    }
    summary_path = out / f"limit_summary_m{m}.{fmt}"
    if fmt == "json":
        summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    else:
        lines = ["z_re,z_im,potential_analytic,potential_solver,curve_mass"]
        lines += [f"{r['z'][0]!r},{r['z'][1]!r},{r['potential_analytic']!r},"
                  f"{r['potential_solver']!r},{r['curve_mass']!r}" for r in rows]
        summary_path.write_text("\n".join(lines) + "\n")
    written.append(summary_path)
    for p in written:
        print(p)
    return EXIT_OK


def cmd_compare(config, fmt) -> int:
    if any(m in config.metrics for m in harness.CONVERGENCE_METRICS):
        _emit(harness.run_convergence(config), config, fmt)
    if "moments" in config.metrics:
        _emit(harness.run_moment_check(config), config, fmt)
    if "potential" in config.metrics:
        _emit(harness.run_potential_check(config), config, fmt)
    return EXIT_OK


def cmd_proptest(config, fmt) -> int:
    report = harness.run_property_suite(config)
    _emit(report, config, fmt)
    bad = harness.hard_violations(report)
    if bad:
        print(f"product singular-value inequality violated {bad} times", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_sweep(config, fmt) -> int:
    if not any(m in config.metrics for m in harness.CONVERGENCE_METRICS):
        config.metrics = list(config.metrics) + ["radial_ks"]
    _emit(harness.run_convergence(config, name="sweep"), config, fmt)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "limit": cmd_limit,
    "compare": cmd_compare,
    "proptest": cmd_proptest,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage, which is our config-error code too
        return int(exc.code or 0)
    try:
        config = load_config(args)
        return COMMANDS[args.command](config, args.format)
    except (ConfigError, ensembles.EnsembleError, limitlaw.LimitLawError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
