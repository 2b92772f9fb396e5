"""
Command-line entry point: python -m dpdlib <program> [runtime flags]

  pi --n N [--blocked]
  seed
  matreduce --k K [--matrix-seed S] [--matrices M]
  floyd --input PATH --q Q

Exit status is 0 on an oracle match, 1 on a mismatch and 2 on a failed run
or invalid arguments.
"""

import sys
import logging
import argparse

from .bench import BenchRunner, WeightedGraph
from .config import BENCH_SETTINGS, COST_SETTINGS, SIMULATOR_SETTINGS
from .errors import ConfigError, DpdError
from .runtime import BACKENDS, RunConfig

logger = logging.getLogger(__name__)


def add_runtime_arguments(parser):
    parser.add_argument('--backend', choices=BACKENDS, default='sim', help='execution backend. Default: sim')
    parser.add_argument('--np', type=int, default=1, help='number of ranks')
    parser.add_argument('--rank', type=int, default=None, help='this process\'s rank (tcp only)')
    parser.add_argument('--hosts', default=None, help='hosts file, one "address port" line per rank (tcp only)')
    parser.add_argument('--seed', type=int, default=SIMULATOR_SETTINGS['default_seed'], help='scheduler seed (sim)')
    parser.add_argument('--ts', type=float, default=COST_SETTINGS['t_s'], help='message startup time in seconds')
    parser.add_argument('--tw', type=float, default=COST_SETTINGS['t_w'], help='per-word transfer time in seconds')
    parser.add_argument('--out', default=None, help='also write the report record to a .csv or .json file')
    parser.add_argument('--log-level', default='WARNING', help='logging level. Default: WARNING')


def build_parser():
    parser = argparse.ArgumentParser(prog='dpdlib', description='Distributed parallel data structure benchmarks')
    programs = parser.add_subparsers(dest='program', required=True)

    pi = programs.add_parser('pi', help='midpoint-rule approximation of pi')
    pi.add_argument('--n', type=int, required=True, help='number of samples')
    pi.add_argument('--blocked', action='store_true',
                    help='sum contiguous chunks per PE (implied when n exceeds --np)')

    programs.add_parser('seed', help='agree on a random seed across all ranks')

    matreduce = programs.add_parser('matreduce', help='ordered matrix product, tree vs linear reduce')
    matreduce.add_argument('--k', type=int, default=BENCH_SETTINGS['default_matrix_size'], help='matrix dimension')
    matreduce.add_argument('--matrix-seed', type=int, default=0, help='seed of the random matrices')
    matreduce.add_argument('--matrices', type=int, default=None,
                           help='number of matrices, held by the first PEs (default: --np)')

    floyd = programs.add_parser('floyd', help='2D-blocked Floyd-Warshall')
    floyd.add_argument('--input', required=True, help='graph file: n, then n rows of n weights ("inf" for no edge)')
    floyd.add_argument('--q', type=int, required=True, help='grid side; needs q*q <= np and n divisible by q')

    for sub in programs.choices.values():
        add_runtime_arguments(sub)
    return parser


def run_program(args):
    config = RunConfig.from_args(args)
    runner = BenchRunner(config)
    if args.program == 'pi':
        return runner.run_pi(args.n, True if args.blocked else None)
    if args.program == 'seed':
        return runner.run_seed()
    if args.program == 'matreduce':
        return runner.run_matreduce(args.k, args.matrix_seed, args.matrices)
    return runner.run_floyd(WeightedGraph.from_file(args.input), args.q)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        report = run_program(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DpdError as e:
        logger.error(f"{args.program} failed: {type(e).__name__}: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return 2

    print(report.text)
    if args.out:
        report.write(args.out)
    if report.record.get('verdict') == BENCH_SETTINGS['oracle_mismatch_verdict']:
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
