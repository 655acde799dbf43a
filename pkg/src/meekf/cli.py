"""Command-line front end: ``meekf run|diagnose|complexity``.

Exit codes: 0 on success, 2 on invalid input (flags, config file, data,
output directory), 3 on numerical failure.
"""

import argparse
import logging
import os
import sys

from . import __version__
from .errors import NumericalError, ValidationError
from .experiments import RUNNERS, ExperimentConfig
from .experiments import io as exp_io
from .experiments.config import ALL_FILTERS, SCENARIOS
from .mee_core import (
    BACKEND,
    FixedPointConfig,
    complexity_estimate,
    contraction_radius,
    convergence_diagnostic,
    demo_instance,
)

log = logging.getLogger("meekf")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _filters(text):
    names = tuple(t.strip().upper() for t in text.split(",") if t.strip())
    for name in names:
        if name not in ALL_FILTERS:
            raise ValueError(f"unknown filter {name!r}")
    return names


# config-file key -> value parser; keys match the argparse destinations
CONFIG_KEYS = {
    "steps": int,
    "runs": int,
    "seed": int,
    "noise_case": int,
    "sigma_mee": float,
    "sigma_mcc": float,
    "sigma_mee_ekf": float,
    "sigma_mcc_ekf": float,
    "epsilon": float,
    "max_iter": int,
    "regularization": float,
    "data": str,
    "out": str,
    "filters": _filters,
    "per_run": _bool,
    "process_variance": float,
    "merge": str,
    "radar_outlier_prob": float,
    "radar_outlier_scale": float,
    "sir_truth": str,
    "time_scale": float,
    "workers": int,
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so main() owns exit codes."""

    def error(self, message):
        raise CliError(f"{self.prog}: {message}")


def read_config(path):
    """Parse a flat ``key = value`` file with ``#`` comments.

    Args:
        path: File path (UTF-8).

    Returns:
        Dict of parsed values keyed like the argparse destinations.

    Raises:
        CliError: Unreadable file, malformed line or unknown key.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc.strerror}") from None
    values = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise CliError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise CliError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}") from None
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _filter_list(text):
    try:
        return _filters(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    parser = _Parser(prog="meekf", description="MEE Kalman filtering benchmarks and diagnostics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    run = sub.add_parser("run", help="run a Monte-Carlo experiment")
    run.add_argument("scenario", choices=SCENARIOS)
    # defaults are None so that a config file can fill the gaps
    run.add_argument("--steps", type=_positive_int)
    run.add_argument("--runs", type=_positive_int)
    run.add_argument("--seed", type=int)
    run.add_argument("--noise-case", type=int, choices=(1, 2, 3, 4))
    run.add_argument("--sigma-mee", type=_positive_float, help="kernel size of MEE-KF (and MEE-EKF unless set)")
    run.add_argument("--sigma-mcc", type=_positive_float, help="kernel size of MCKF (and MCEKF unless set)")
    run.add_argument("--sigma-mee-ekf", type=_positive_float)
    run.add_argument("--sigma-mcc-ekf", type=_positive_float)
    run.add_argument("--epsilon", type=_positive_float)
    run.add_argument("--max-iter", type=_positive_int)
    run.add_argument("--regularization", type=float)
    run.add_argument("--data", help="CSV input (fusion, sir)")
    run.add_argument("--out", help="output directory (default: results)")
    run.add_argument("--filters", type=_filter_list, help="comma-separated filter names")
    run.add_argument("--per-run", action="store_const", const=True, help="also write per-run metrics")
    run.add_argument("--merge", choices=("sequential", "parallel"), help="fusion merge rule")
    run.add_argument("--sir-truth", choices=("mismatched", "matched"))
    run.add_argument("--time-scale", type=_positive_float, help="seconds per fusion CSV time unit")
    run.add_argument("--workers", type=int, help="process count (overrides REF_THREADS)")
    run.add_argument("--config", help="key = value settings file; flags take precedence")

    diag = sub.add_parser("diagnose", help="convergence bounds on the demo instance")
    diag.add_argument("--sigma", type=_positive_float)
    diag.add_argument("--beta", type=_positive_float, help="1-norm radius (default 2 rho)")
    diag.add_argument("--alpha", type=float, default=0.9)
    diag.add_argument("--solve-bounds", action="store_true", help="bisect for sigma1 and sigma2")

    comp = sub.add_parser("complexity", help="flop counts of KF, MCKF and MEE-KF")
    comp.add_argument("n", type=_positive_int)
    comp.add_argument("m", type=_positive_int)
    comp.add_argument("T", type=_positive_int)
    return parser


def merged_settings(args):
    """Config-file values overlaid by explicitly given flags."""
    settings = read_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


SCENARIO_ROBUST = {
    "vehicle": ("MEEKF", "MCKF"),
    "fusion": ("MEEKF", "MCKF", "MEEEKF", "MCEKF"),
    "sir": ("MEEEKF", "MCEKF"),
}

# settings key -> ExperimentConfig field, copied only when present
PASSTHROUGH = {
    "epsilon": "epsilon",
    "max_iter": "max_iter",
    "regularization": "regularization",
    "merge": "fusion_merge",
    "radar_outlier_prob": "radar_outlier_prob",
    "radar_outlier_scale": "radar_outlier_scale",
    "sir_truth": "sir_truth",
    "time_scale": "time_scale",
}


def experiment_config(scenario, settings):
    """Translate merged CLI settings into an ExperimentConfig.

    ``sigma_mee``/``sigma_mcc`` set the linear robust filters and also the
    nonlinear ones unless ``sigma_mee_ekf``/``sigma_mcc_ekf`` are given.
    """
    mee, mcc = settings.get("sigma_mee"), settings.get("sigma_mcc")
    given = {
        "MEEKF": mee,
        "MCKF": mcc,
        "MEEEKF": settings.get("sigma_mee_ekf", mee),
        "MCEKF": settings.get("sigma_mcc_ekf", mcc),
    }
    sigmas = {k: v for k, v in given.items() if v is not None and k in SCENARIO_ROBUST[scenario]}
    kwargs = dict(
        scenario=scenario,
        steps=settings.get("steps"),
        runs=settings.get("runs", 20),
        seed=settings.get("seed", 0),
        noise_case=settings.get("noise_case"),
        sigmas=sigmas,
        data_path=settings.get("data"),
        filters=settings.get("filters"),
        process_variance=settings.get("process_variance"),
    )
    for key, field in PASSTHROUGH.items():
        if key in settings:
            kwargs[field] = settings[key]
    return ExperimentConfig(**kwargs)


def _prepare_out(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {path}: {exc.strerror}") from None
    if not os.access(path, os.W_OK | os.X_OK):
        raise CliError(f"output directory {path} is not writable")


def cmd_run(args):
    settings = merged_settings(args)
    config = experiment_config(args.scenario, settings)
    out = settings.get("out", "results")
    _prepare_out(out)
    log.info("running %s with %d run(s) of %d steps", config.scenario, config.runs, config.steps)
    report = RUNNERS[config.scenario](config, workers=settings.get("workers"))

    prefix = os.path.join(out, config.scenario)
    files = {"summary": prefix + "_summary.csv"}
    try:
        exp_io.write_summary_csv(report, files["summary"])
        if settings.get("per_run"):
            files["per_run"] = prefix + "_per_run.csv"
            exp_io.write_per_run_csv(report, files["per_run"])
        if report.trajectory is not None:
            files["trajectory"] = prefix + "_trajectory.csv"
            exp_io.write_trajectory_csv(report.trajectory, files["trajectory"])
        files["manifest"] = prefix + "_manifest.json"
        exp_io.write_manifest(files["manifest"], {
            "version": __version__,
            "backend": BACKEND,
            "config": config.to_dict(),
            "seeds": [config.seed + r for r in range(config.runs if not config.data_path else 1)],
            "files": {k: os.path.basename(v) for k, v in files.items()},
        })
    except OSError as exc:
        raise CliError(f"cannot write to {out}: {exc.strerror}") from None

    print(f"{config.scenario}: {config.runs if not config.data_path else 1} run(s) x {config.steps} steps")
    print(f"{'filter':<14}{'component':<10}{'mean':>12}{'std':>12}{'iter':>8}{'max':>5}{'fallback':>9}")
    for row in report.rows():
        print(f"{row.filter:<14}{row.component:<10}{row.mse_mean:>12.5g}{row.mse_std:>12.5g}"
              f"{row.iter_mean:>8.2f}{row.iter_max:>5d}{row.fallbacks:>9d}")
    print(f"wrote {', '.join(sorted(files.values()))}")
    return EXIT_OK


def cmd_diagnose(args):
    if args.sigma is None and not args.solve_bounds:
        raise CliError("diagnose: give --sigma or --solve-bounds")
    aug = demo_instance()
    rho, _ = contraction_radius(aug)
    beta = 2.0 * rho if args.beta is None else args.beta
    sigma = args.sigma if args.sigma is not None else 1.0
    report = convergence_diagnostic(aug, FixedPointConfig(sigma), beta, args.alpha, args.solve_bounds)
    if args.sigma is None and report.sigma1 is not None and report.sigma2 is not None:
        # no sigma given: evaluate at the smallest kernel size meeting both bounds
        sigma = max(report.sigma1, report.sigma2)
        report = convergence_diagnostic(aug, FixedPointConfig(sigma), beta, args.alpha, True)
    print(f"rho             {report.rho:.10g}")
    print(f"lambda_min      {report.lambda_min:.10g}")
    print(f"sigma           {report.sigma:.10g}")
    print(f"beta            {report.beta:.10g}")
    print(f"alpha           {report.alpha:.10g}")
    print(f"g_norm_bound    {report.g_norm_bound:.10g}")
    print(f"grad_norm_bound {report.grad_norm_bound:.10g}")
    if args.solve_bounds:
        for name in ("sigma1", "sigma2"):
            value = getattr(report, name)
            print(f"{name:<16}{'not found in [1e-3, 1e6]' if value is None else format(value, '.10g')}")
    print(f"satisfied       {'yes' if report.satisfied else 'no'}")
    return EXIT_OK


def cmd_complexity(args):
    c_kf, c_mckf, c_meekf = complexity_estimate(args.n, args.m, args.T)
    print("filter,flops")
    print(f"KF,{c_kf}")
    print(f"MCKF,{c_mckf}")
    print(f"MEEKF,{c_meekf}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "diagnose": cmd_diagnose, "complexity": cmd_complexity}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
