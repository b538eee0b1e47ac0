"""
dpols - Main Command-Line Entry Point
Private least squares with stability certification

Usage: python main.py {fit,generate,stability,accuracy,bench,sigma} [options]
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

import config
from estimators.issp import IsspConfig, IsspEstimator
from estimators.sigma_estimator import SigmaConfig, estimate_sigma_squared
from generators.svg_generator import ChartGenerator
from generators.synthetic_generator import CovariateFamily, ModelSpec, generate, make_adjacent
from harness.accuracy import AccuracyConfig, error_series, run_accuracy
from harness.bench import BenchConfig, run_bench
from harness.results import ResultTable
from harness.runner import write_manifest
from harness.stability import ALL_MODES, StabilityConfig, reproducer, run_stability
from parsers.config_parser import parse_number_list, read_config_file
from parsers.csv_parser import read_dataset, write_dataset
from utils.errors import DpOlsError, InvalidParameter
from utils.logger import progress_logger, setup_logging
from utils.rng import RngStream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE_OUTCOME = 2
EXIT_VIOLATION = 3

BOOLEAN_OPTIONS = ('strict_privacy', 'plots', 'debug_checks', 'random_design', 'no_reference')

logger = logging.getLogger('dpols')


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    return parse_number_list(text, kind=int)


def _float_list(text):
    return parse_number_list(text, kind=float)


def _truthy(value) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ('1', 'true', 'yes', 'on')
    return bool(value)


def _add_shared(sub: argparse.ArgumentParser):
    sub.add_argument('--seed', type=int, default=config.DEFAULT_SEED, help='Root seed')
    sub.add_argument('--config', help='Flat key=value file with option defaults')
    sub.add_argument('--out', default=config.DEFAULT_OUTPUT_DIR, help='Output directory')
    sub.add_argument('--strict-privacy', action='store_true', default=config.DEFAULT_STRICT_PRIVACY,
                     help='Suppress diagnostics not covered by the privacy guarantee')
    sub.add_argument('--plots', action='store_true', help='Also write SVG plots')
    sub.add_argument('--workers', type=int, default=config.DEFAULT_WORKERS, help='Worker processes')
    sub.add_argument('--log-level', default=config.DEFAULT_LOG_LEVEL)


def _add_privacy(sub: argparse.ArgumentParser):
    sub.add_argument('--epsilon', type=float, default=1.0)
    sub.add_argument('--delta', type=float, default=0.1)
    sub.add_argument('--l0', type=float, help='Leverage outlier threshold L0')
    sub.add_argument('--r0', type=float, help='Residual outlier threshold R0')
    sub.add_argument('--noise-scale-override', type=float, default=1.0,
                     help='Positive multiplier on the noise variance c^2')


def build_parser():
    """Return the parser and its subcommand parsers by name"""
    parser = CliParser(prog='dpols', description='Differentially private OLS with stability certification')
    commands = parser.add_subparsers(dest='command', required=True)
    subs = {}

    sub = commands.add_parser('fit', help='Run the private estimator on a CSV dataset')
    sub.add_argument('input', help='Dataset CSV (x1,...,xd,y)')
    _add_privacy(sub)
    sub.add_argument('--debug-checks', action='store_true', default=config.DEFAULT_DEBUG_CHECKS)
    sub.set_defaults(func=cmd_fit)
    subs['fit'] = sub

    sub = commands.add_parser('generate', help='Write a synthetic dataset')
    sub.add_argument('--n', type=int, default=1000)
    sub.add_argument('--d', type=int, default=2)
    sub.add_argument('--sigma', type=float, default=1.0)
    sub.add_argument('--kappa', type=float, default=1.0, help='Condition number of Sigma = diag(kappa, 1, ...)')
    sub.add_argument('--beta', type=_float_list, help='True coefficients (comma separated)')
    sub.add_argument('--family', choices=[f.value for f in CovariateFamily], default='gaussian')
    sub.add_argument('--adjacent-mode', choices=list(ALL_MODES))
    sub.add_argument('--i-star', type=int, default=0)
    sub.add_argument('--magnitude', type=float, default=50.0)
    sub.add_argument('--name', default='data', help='File stem inside --out')
    sub.set_defaults(func=cmd_generate)
    subs['generate'] = sub

    sub = commands.add_parser('stability', help='Certify sensitivity bounds on adjacent pairs')
    sub.add_argument('--trials', type=int, default=500)
    sub.add_argument('--n', type=int, default=20000)
    sub.add_argument('--d', type=int, default=2)
    sub.add_argument('--k', type=int, default=4)
    sub.add_argument('--l0', type=float)
    sub.add_argument('--r0', type=float, default=3.0)
    sub.add_argument('--sigma', type=float, default=1.0)
    sub.add_argument('--magnitude', type=float, default=50.0)
    sub.add_argument('--modes', default=','.join(ALL_MODES))
    sub.add_argument('--family', choices=[f.value for f in CovariateFamily], default='gaussian')
    sub.set_defaults(func=cmd_stability)
    subs['stability'] = sub

    sub = commands.add_parser('accuracy', help='Sweep n (and kappa) and record the release error')
    sub.add_argument('--n-grid', type=_int_list, default=[10240])
    sub.add_argument('--d', type=int, default=2)
    sub.add_argument('--sigma', type=float, default=1.0)
    sub.add_argument('--kappas', type=_float_list, default=[1.0])
    sub.add_argument('--trials', type=int, default=200)
    _add_privacy(sub)
    sub.add_argument('--target-variance', type=float, help='Set the override so the noise variance equals this')
    sub.add_argument('--family', choices=[f.value for f in CovariateFamily], default='balanced')
    sub.add_argument('--random-design', action='store_true', help='Draw a fresh X every trial')
    sub.set_defaults(func=cmd_accuracy)
    subs['accuracy'] = sub

    sub = commands.add_parser('bench', help='Time the estimator phases over an n grid')
    sub.add_argument('--n-grid', type=_int_list, default=[2000, 4000, 8000, 16000])
    sub.add_argument('--d', type=int, default=20)
    sub.add_argument('--epsilon', type=float, default=1.0)
    sub.add_argument('--delta', type=float, default=0.1)
    sub.add_argument('--l0-factor', type=float, default=2.0)
    sub.add_argument('--r0', type=float, default=4.0)
    sub.add_argument('--repeats', type=int, default=3)
    sub.add_argument('--no-reference', action='store_true', help='Skip the reference residual filter')
    sub.set_defaults(func=cmd_bench)
    subs['bench'] = sub

    sub = commands.add_parser('sigma', help='Private estimate of the noise variance')
    sub.add_argument('input', help='Dataset CSV (x1,...,xd,y)')
    sub.add_argument('--eps0', type=float, default=1.0)
    sub.add_argument('--delta0', type=float, default=1e-3)
    sub.add_argument('--zeta', type=float, default=0.1)
    sub.add_argument('--c1', type=float, default=8.0)
    sub.add_argument('--partitions', type=int)
    sub.set_defaults(func=cmd_sigma)
    subs['sigma'] = sub

    for sub in subs.values():
        _add_shared(sub)
    return parser, subs


def parse_args(argv=None) -> argparse.Namespace:
    """Parse argv; values from --config sit between environment defaults and explicit flags"""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()

    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config')
    known, _ = pre.parse_known_args(argv)
    if known.config:
        values = read_config_file(known.config)
        values.pop('config', None)
        for sub in subs.values():
            sub.set_defaults(**values)

    args = parser.parse_args(argv)
    for name in BOOLEAN_OPTIONS:
        if hasattr(args, name):
            setattr(args, name, _truthy(getattr(args, name)))
    return args


def _config_dict(args) -> dict:
    return {key: value for key, value in vars(args).items() if key != 'func'}


def _coefficients(beta) -> str:
    return ' '.join(repr(float(b)) for b in beta)


def cmd_fit(args) -> int:
    data = read_dataset(args.input)
    if args.l0 is None or args.r0 is None:
        raise InvalidParameter("fit needs --l0 and --r0")
    cfg = IsspConfig(args.epsilon, args.delta, args.l0, args.r0, args.noise_scale_override,
                     seed=args.seed, strict_privacy=args.strict_privacy, debug_checks=args.debug_checks)
    estimator = IsspEstimator(cfg)
    output = estimator.fit(data, RngStream(args.seed))

    row = {'trial': 0, 'point': 0, 'n': data.n, 'd': data.d, 'outcome': output.outcome.value}
    guard_text = None if estimator.constants.passes_guards(cfg.l0) else estimator.constants.describe_guards(cfg.l0)
    if output.failed:
        print('FAIL')
        # Guards depend only on the parameters
        if guard_text:
            print(guard_text)
    else:
        print(f"beta_tilde: {_coefficients(output.beta_tilde)}")
        for j, b in enumerate(output.beta_tilde):
            row[f'beta{j + 1}'] = float(b)

    diagnostics = output.diagnostics
    if diagnostics is not None:
        print(f"k: {diagnostics.k}")
        print(f"log_c2: {estimator.constants.log_c2!r}")
        print(f"noise_variance: {diagnostics.noise_variance!r}")
        row.update(k=diagnostics.k, log_c2=estimator.constants.log_c2, noise_variance=diagnostics.noise_variance)
        if not args.strict_privacy:
            for key in ('score_leverage', 'score_residual', 'weight_mass', 'fail_reason', 'message'):
                value = getattr(diagnostics, key)
                if value not in (None, ''):
                    print(f"{key}: {value}")
                    row[key] = value
            if diagnostics.warning:
                print(f"warning: {diagnostics.warning}")

    ResultTable.from_records('fit', [row]).write(os.path.join(args.out, 'fit.csv'))
    write_manifest(args.out, 'fit', _config_dict(args), args.seed)
    return EXIT_FAILURE_OUTCOME if output.failed else EXIT_OK


def cmd_generate(args) -> int:
    covariance = np.eye(args.d)
    covariance[0, 0] = args.kappa
    spec = ModelSpec(n=args.n, d=args.d, sigma=args.sigma, beta_star=args.beta, covariance=covariance,
                     family=args.family, seed=args.seed)
    data = generate(spec)
    path = write_dataset(data, os.path.join(args.out, f"{args.name}.csv"))
    print(path)

    if args.adjacent_mode:
        pair = make_adjacent(data, args.i_star, args.adjacent_mode, args.magnitude, args.sigma,
                             spec=spec, seed=RngStream(args.seed).spawn(1).seed_sequence)
        print(write_dataset(pair.variant, os.path.join(args.out, f"{args.name}_adjacent.csv")))
    write_manifest(args.out, 'generate', _config_dict(args), args.seed)
    return EXIT_OK


def cmd_stability(args) -> int:
    cfg = StabilityConfig(trials=args.trials, n=args.n, d=args.d, k=args.k, l0=args.l0, r0=args.r0,
                          sigma=args.sigma, magnitude=args.magnitude,
                          modes=tuple(m.strip() for m in args.modes.split(',') if m.strip()),
                          family=args.family, seed=args.seed)
    table = run_stability(cfg, workers=args.workers, progress_callback=progress_logger('dpols.stability'))
    table.write(os.path.join(args.out, 'stability.csv'))
    write_manifest(args.out, 'stability', _config_dict(args), args.seed)

    failing = table.frame[table.frame['violations'] > 0]
    if failing.empty:
        print(f"stability: {len(table)} pairs, 0 violations")
        return EXIT_OK

    folder = os.path.join(args.out, 'reproducers')
    os.makedirs(folder, exist_ok=True)
    for _, row in failing.iterrows():
        record = reproducer(row.to_dict(), cfg)
        path = os.path.join(folder, f"{record['mode']}_{record['trial']}.json")
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(record, handle, indent=2, sort_keys=True)
    print(f"stability: {len(failing)} of {len(table)} pairs violate a bound; reproducers in {folder}")
    return EXIT_VIOLATION


def cmd_accuracy(args) -> int:
    cfg = AccuracyConfig(n_grid=tuple(args.n_grid), d=args.d, sigma=args.sigma, kappas=tuple(args.kappas),
                         trials=args.trials, epsilon=args.epsilon, delta=args.delta, l0=args.l0,
                         r0=args.r0 if args.r0 is not None else 6.0,
                         noise_scale_override=args.noise_scale_override, target_variance=args.target_variance,
                         family=args.family, fixed_design=not args.random_design, seed=args.seed)
    table, summary = run_accuracy(cfg, workers=args.workers, progress_callback=progress_logger('dpols.accuracy'))
    table.write(os.path.join(args.out, 'accuracy.csv'))
    summary.write(os.path.join(args.out, 'accuracy_summary.csv'))
    print(summary.frame.to_string(index=False))

    if args.plots:
        ChartGenerator().line_chart(error_series(summary), os.path.join(args.out, 'accuracy_error.svg'),
                                    title='Sigma-norm error of the release', x_label='n',
                                    y_label='mean |beta~ - beta*|_Sigma / sigma', log_x=True)
    write_manifest(args.out, 'accuracy', _config_dict(args), args.seed)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = BenchConfig(n_grid=tuple(args.n_grid), d=args.d, epsilon=args.epsilon, delta=args.delta,
                      l0_factor=args.l0_factor, r0=args.r0, repeats=args.repeats,
                      compare_reference=not args.no_reference, seed=args.seed)
    table, exponent = run_bench(cfg, progress_callback=progress_logger('dpols.bench'))
    table.write(os.path.join(args.out, 'bench.csv'))
    print(f"overhead scaling exponent: {exponent if exponent is not None else 'n/a'}")

    if args.plots and 'time_overhead' in table.frame:
        medians = table.frame.groupby('n')['time_overhead'].median().dropna()
        ChartGenerator().line_chart({'overhead': list(zip(medians.index, medians.to_numpy()))},
                                    os.path.join(args.out, 'bench_overhead.svg'),
                                    title='Post-factorization overhead', x_label='n', y_label='seconds',
                                    log_x=True)
    write_manifest(args.out, 'bench', _config_dict(args), args.seed)
    return EXIT_OK


def cmd_sigma(args) -> int:
    data = read_dataset(args.input)
    cfg = SigmaConfig(args.eps0, args.delta0, args.zeta, args.c1, args.partitions)
    estimate = estimate_sigma_squared(data, cfg, RngStream(args.seed))
    row = {'trial': 0, 'point': 0, 'n': data.n, 'd': data.d, 'partitions': cfg.block_count,
           'estimate': estimate}
    ResultTable.from_records('sigma', [row]).write(os.path.join(args.out, 'sigma.csv'))
    write_manifest(args.out, 'sigma', _config_dict(args), args.seed)

    if estimate is None:
        print('⊥')
        return EXIT_FAILURE_OUTCOME
    print(repr(estimate))
    return EXIT_OK


def main(argv=None) -> int:
    """Main application entry point"""
    try:
        args = parse_args(argv)
    except DpOlsError as exc:
        print(f"dpols: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(args.log_level)
    try:
        return args.func(args)
    except DpOlsError as exc:
        print(f"dpols: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
