#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Command line utility for architecture search experiments.

  qarch_util run --task iris2_01 [--seed N] [--random] [--out DIR] [--max-depth D]
  qarch_util analyze --task iris [--threshold 0.9] [--log runs/iris/metrics.csv] [--out DIR]
  qarch_util compare --task mnist2 --circuit runs/mnist2/best_circuit.txt [--layers 1 2]
  qarch_util landscape --task iris --circuit runs/iris/best_circuit.txt [--pair 0 1] [--interval pi]
  qarch_util plot --metrics runs/iris/metrics.csv --out training.svg
  qarch_util plot --report analysis/transitions.csv --out transitions.svg
  qarch_util cache inspect --task iris [--top 10]

--config PATH replaces the packaged defaults of --task. The cache directory
is taken from the config, then $QARCH_CACHE_PATH, then ./qarch_cache.
"""
import argparse
import logging
import os
import sys
import traceback

from qarch.analysis.compare import train_candidates, comparison_report, history_report
from qarch.analysis.landscape import cost_landscape, INTERVALS
from qarch.analysis.macro import analyze_macro, cross_check, DEFAULT_THRESHOLD
from qarch.analysis.plot import plot_metrics_file, plot_report_file, PLOT_LUT
from qarch.analysis.reports import AnalysisException
from qarch.circuits.export import load_circuit, parse_params
from qarch.circuits.metrics import metrics
from qarch.circuits.sequence import decode
from qarch.datasets.loaders import load_task
from qarch.inner.cache import open_cache
from qarch.logging.metrics_log import read_metrics_log
from qarch.logging.qarch_logger import configure_cli_logging
from .config import ExperimentConfig
from .exceptions import ConfigException
from .runner import run_experiment


def experiment_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.task:
        cfg = ExperimentConfig.for_task(args.task)
    else:
        raise ConfigException('Specify --task or --config')
    return cfg.with_overrides(seed=getattr(args, 'seed', None), out_dir=args.out if args.verb == 'run' else None,
                              random=getattr(args, 'random', False), max_depth=getattr(args, 'max_depth', None),
                              total_steps=getattr(args, 'steps', None))


def _dataset(cfg: ExperimentConfig):
    return load_task(cfg.task, seed=cfg.dataset_seed, path=cfg.dataset_path)


def do_run(args):
    cfg = experiment_config(args)
    out = run_experiment(cfg)
    logging.info(f'Run artifacts written to {out}')


def do_analyze(args):
    cfg = experiment_config(args)
    out = args.out or os.path.join(cfg.out_dir, 'analysis')
    os.makedirs(out, exist_ok=True)
    with open_cache(_dataset(cfg), cfg.opt, cfg.cache_dir) as cache:
        entries = list(cache.entries())
    reports = analyze_macro(entries, args.threshold)
    if args.log:
        reports['crosscheck'] = cross_check(read_metrics_log(args.log), entries)
    for name, report in reports.items():
        report.save(os.path.join(out, f'{name}.csv'))
        for note in report.notes:
            logging.info(f'{name}: {note}')
    logging.info(f'Wrote {len(reports)} reports to {out}')


def do_compare(args):
    cfg = experiment_config(args)
    circuit = args.circuit or os.path.join(cfg.out_dir, 'best_circuit.txt')
    data = _dataset(cfg)
    candidates = train_candidates(circuit, data, cfg.opt.with_changes(record_history=True), args.layers)
    report = comparison_report(candidates, data)
    out = args.out or os.path.join(cfg.out_dir, 'comparison.csv')
    report.save(out)
    history_report(candidates, data).save(os.path.join(os.path.dirname(os.path.abspath(out)), 'optimization.csv'))
    for row in report.rows:
        logging.info(' '.join(f'{c}={v}' for c, v in zip(report.columns, row)))


def do_landscape(args):
    cfg = experiment_config(args)
    circuit = args.circuit or os.path.join(cfg.out_dir, 'best_circuit.txt')
    if not os.path.exists(circuit):
        raise AnalysisException(f'Circuit file {circuit} not found')
    with open(circuit) as f:
        params = parse_params(f.read())
    seq = load_circuit(circuit)
    if params is None:
        raise AnalysisException(f'{circuit} carries no trained parameters')
    landscape = cost_landscape(seq, params, _dataset(cfg), tuple(args.pair), args.interval, args.points)
    out = args.out or os.path.join(cfg.out_dir, f'landscape_{args.interval}.csv')
    landscape.to_report().save(out)
    x, y, loss = landscape.minimum()
    logging.info(f'Landscape minimum {loss:.6f} at ({x:.4f}, {y:.4f}), written to {out}')


def do_plot(args):
    if args.metrics:
        plot_metrics_file(args.metrics, args.out)
    elif args.report:
        kind = args.kind or os.path.splitext(os.path.basename(args.report))[0]
        plot_report_file(args.report, args.out, kind)
    else:
        raise AnalysisException('Specify --metrics or --report')
    logging.info(f'Wrote {args.out}')


def do_cache(args):
    cfg = experiment_config(args)
    with open_cache(_dataset(cfg), cfg.opt, cfg.cache_dir) as cache:
        entries = list(cache.entries())
        logging.info(f'Cache {cache.path} namespace {cache.namespace}: {len(entries)} entries')
    ranked = sorted(entries, key=lambda e: (-e[2].aggregate_test_acc, len(decode(e[1]))))
    for key, tensor, result in ranked[:args.top]:
        seq = decode(tensor)
        logging.info(f'{key:016x} test {result.aggregate_test_acc:.4f} train {result.aggregate_train_acc:.4f} '
                     f'{metrics(seq)} {" ".join(g.label() for g in seq)}')


def _experiment_args(p):
    p.add_argument('-c', '--config', action='store', help='experiment configuration file (YAML)')
    p.add_argument('-t', '--task', action='store', help='task with packaged default configuration')
    p.add_argument('--out', action='store', help='output directory or file')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='qarch_util')
    parser.add_argument('-d', '--debug', action='count', help='turn on debugging')
    verbs = parser.add_subparsers(dest='verb')

    run = verbs.add_parser('run', help='train agents and export the best circuit')
    _experiment_args(run)
    run.add_argument('--seed', type=int, help='single run seed replacing the configured seeds')
    run.add_argument('--random', action='store_true', help='use the uniformly random baseline agent')
    run.add_argument('--max-depth', dest='max_depth', type=int, help='maximum circuit depth')
    run.add_argument('--steps', type=int, help='environment steps per run')

    analyze = verbs.add_parser('analyze', help='macro analysis of the evaluation cache')
    _experiment_args(analyze)
    analyze.add_argument('--threshold', type=float, default=DEFAULT_THRESHOLD,
                         help='test accuracy of high-performing circuits')
    analyze.add_argument('--log', action='store', help='metrics log to cross-check against the cache')

    compare = verbs.add_parser('compare', help='searched circuit against SEL baselines')
    _experiment_args(compare)
    compare.add_argument('--circuit', action='store', help='exported circuit file')
    compare.add_argument('--layers', type=int, nargs='+', default=[1, 2], help='SEL layer counts')

    landscape = verbs.add_parser('landscape', help='loss over a grid of two angles')
    _experiment_args(landscape)
    landscape.add_argument('--circuit', action='store', help='exported circuit file with parameters')
    landscape.add_argument('--pair', type=int, nargs=2, default=[0, 1], help='parameter indices')
    landscape.add_argument('--interval', choices=sorted(INTERVALS), default='pi')
    landscape.add_argument('--points', type=int, default=41)

    plot = verbs.add_parser('plot', help='render a metrics log or report as SVG')
    plot.add_argument('--metrics', action='store', help='metrics log')
    plot.add_argument('--report', action='store', help='report CSV')
    plot.add_argument('--kind', choices=sorted(PLOT_LUT), help='report type, defaults to the file name')
    plot.add_argument('--out', action='store', required=True, help='SVG file')

    cache = verbs.add_parser('cache', help='evaluation cache operations')
    cache_verbs = cache.add_subparsers(dest='cache_verb')
    inspect = cache_verbs.add_parser('inspect', help='list namespace, entry count and top circuits')
    _experiment_args(inspect)
    inspect.add_argument('--top', type=int, default=10)
    return parser


VERBS = {'run': do_run, 'analyze': do_analyze, 'compare': do_compare, 'landscape': do_landscape,
         'plot': do_plot, 'cache': do_cache}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_cli_logging(args.debug)

    if args.verb is None or (args.verb == 'cache' and args.cache_verb is None):
        parser.print_help(sys.stderr)
        sys.exit(-1)
    try:
        VERBS[args.verb](args)
    except Exception as e:
        logging.error(f'Unable to {args.verb}: {e}')
        traceback.print_exc(file=sys.stderr)
        sys.exit(-1)


if __name__ == '__main__':
    main()
