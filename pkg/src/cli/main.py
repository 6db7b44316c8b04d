#!/usr/bin/env python3
import argparse
import sys
from datetime import datetime
from pathlib import Path

from src.cli.commands import HANDLERS
from src.cli.config import RunConfig
from src.cli.report import Report
from src.cli.verify import SUITES, run_verify
from src.moments.kernels import KERNELS
from src.period.models import EVAL_METHODS
from src.spectral.operator import BASES
from src.utils.exceptions import MinklabError
from src.utils.logger import get_logger

logger = get_logger("cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INTERRUPTED = 130


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--prec', type=int, help='Working precision in bits')
    common.add_argument('--order', type=int, help='Moment order N')
    common.add_argument('--gen', type=int, help='Calkin-Wilf generation depth')
    common.add_argument('--json', dest='format', action='store_const', const='json', help='JSON output')
    common.add_argument('--csv', dest='format', action='store_const', const='csv', help='CSV output')
    common.add_argument('--config', help='key=value file with prec, order, gen, format')
    common.add_argument('--out', help='Write the report to this file instead of stdout')
    common.add_argument('--deterministic', action='store_true', help='Omit wall time from the report')
    return common


def _actions(parent, name: str, help_text: str) -> argparse._SubParsersAction:
    command = parent.add_parser(name, help=help_text)
    return command.add_subparsers(dest='action', required=True, parser_class=_Parser)


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="minklab", description="Minkowski question mark function toolkit")
    commands = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    qmark = _actions(commands, 'qmark', 'Evaluate ?(x), its inverse and fixed points')
    qmark.add_parser('eval', parents=[common]).add_argument('--x', required=True)
    qmark.add_parser('inverse', parents=[common]).add_argument('--y', required=True)
    qmark.add_parser('fixed', parents=[common])
    qmark.add_parser('salem', parents=[common])

    tree = _actions(commands, 'tree', 'Calkin-Wilf generations and the empirical distribution')
    tree.add_parser('gen', parents=[common])
    tree.add_parser('stern', parents=[common]).add_argument('--count', type=int)
    tree.add_parser('newman', parents=[common]).add_argument('--count', type=int)
    tree.add_parser('cdf', parents=[common]).add_argument('--x', required=True)
    tree.add_parser('deviation', parents=[common]).add_argument('--points', type=int)

    moments = commands.add_parser('moments', parents=[common], help='Solve the moment system')
    moments.add_argument('--kernel', choices=KERNELS)

    gfun = _actions(commands, 'gfun', 'The dyadic period function G(z)')
    evaluate = gfun.add_parser('eval', parents=[common])
    evaluate.add_argument('--z', required=True)
    evaluate.add_argument('--method', choices=EVAL_METHODS)
    gfun.add_parser('check', parents=[common]).add_argument('--z', required=True)

    eigen = commands.add_parser('eigen', parents=[common], help='Eigenvalues of the transfer operator')
    eigen.add_argument('--count', type=int)
    eigen.add_argument('--basis', choices=BASES)
    eigen.add_argument('--coeffs', action='store_true', help='Include eigenvector coefficients')

    padic = _actions(commands, 'padic', 'p-adic distribution, Markov chain and zeta function')
    mu = padic.add_parser('mu', parents=[common])
    mu.add_argument('--p', type=int, required=True)
    mu.add_argument('--z', default='0')
    mu.add_argument('--nu', type=int, required=True)
    mu.add_argument('--empirical', type=int, help='Also count generation n of the tree')
    chain = padic.add_parser('orbit', parents=[common])
    chain.add_argument('--p', type=int, required=True)
    chain.add_argument('--kappa', type=int)
    chain.add_argument('--dump', choices=['csv'])
    matrix = padic.add_parser('matrix', parents=[common])
    matrix.add_argument('--p', type=int, required=True)
    matrix.add_argument('--kappa', type=int)
    zeta = padic.add_parser('zeta', parents=[common])
    zeta.add_argument('--p', type=int, required=True)
    zeta.add_argument('--s', required=True)
    padic.add_parser('counts', parents=[common])

    verify = commands.add_parser('verify', parents=[common], help='Run the golden value checks')
    verify.add_argument('--suite', choices=SUITES, default='fast')
    verify.add_argument('--golden', help='Golden values file')

    return parser


def run(argv) -> Report:
    args = build_parser().parse_args(argv)
    flags = vars(args)
    if flags.pop('dump', None) == 'csv':
        flags['format'] = 'csv'
    config = RunConfig.resolve(flags, flags.get('config'))
    report = Report(command=" ".join(filter(None, [args.command, flags.get('action')])), config=config)

    start_time = datetime.now()
    logger.info(f"Running {report.command} with prec={config.prec}, order={config.order}, gen={config.gen}")
    if args.command == 'verify':
        run_verify(config, report)
    else:
        HANDLERS[args.command](config, report)
    report.wall_time = (datetime.now() - start_time).total_seconds()
    logger.info(f"{report.command} finished in {report.wall_time:.2f} seconds")
    return report


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        report = run(argv)
        output = report.render()
        if report.config.out:
            path = Path(report.config.out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(output)
            logger.info(f"Report written to {path}")
        else:
            sys.stdout.write(output)
        return EXIT_VALIDATION if report.failed else EXIT_OK

    except UsageError as e:
        print(e, file=sys.stderr)
        build_parser().print_usage(sys.stderr)
        return EXIT_USAGE
    except MinklabError as e:
        logger.error(f"[{type(e).__name__}] ERROR: {e}")
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.exception(f"[{e}] ERROR: Unexpected failure")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
