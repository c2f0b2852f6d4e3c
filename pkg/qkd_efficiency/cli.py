"""
MIT License

Copyright (c) 2025-present The qkd-efficiency Authors

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all
copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
SOFTWARE.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from collections.abc import Sequence
from typing import IO, Any, Callable, Final, NoReturn, Optional

from . import __version__
from .asymptotics import asymptotic_optimum, compare_asymptotics
from .config import FIELDS, RunConfig
from .enums import OutputFormat, ProtocolId, ValidationScale
from .errors import AsymptoticRegimeError, ConfigError, DomainError, QKDEfficiencyException, ValidationFailure
from .link_model import LinkPoint, evaluate, qber_set
from .optimizer import CSV_HEADER, SweepGrid, optimize_p, optimize_pm, sweep
from .simulator import compare_to_analytic, simulate
from .utils import dumps, format_float, round_floats, to_json
from .validation import run_validation

__all__: tuple[str, ...] = ('create_parser', 'load_config', 'run', 'main')

_log = logging.getLogger(__name__)

EXIT_OK: Final[int] = 0
EXIT_CONFIG: Final[int] = 1
EXIT_NUMERICAL: Final[int] = 2
EXIT_VALIDATION: Final[int] = 3

VERBOSITY_LEVELS: Final[tuple[str, ...]] = ('DEBUG', 'INFO', 'WARNING', 'ERROR')

# Commands that can write CSV, everything else writes JSON only.
_CSV_COMMANDS: Final[frozenset[str]] = frozenset({'compute', 'optimize', 'sweep'})


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise ConfigError(message, field='arguments')


def _add_parameter_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('link parameters')
    group.add_argument('--protocol', help='bbm92-4, bbm92-6, sarg04-4 or sarg04-6')
    group.add_argument('--protocols', help='comma separated protocols compared in a sweep')
    group.add_argument('--kind', help='dephasing or depolarizing')
    group.add_argument('--v', help='visibility of both channels')
    group.add_argument('--v-a', dest='v_a', help="visibility of Alice's channel")
    group.add_argument('--v-b', dest='v_b', help="visibility of Bob's channel")
    group.add_argument('--lambda-a', dest='lambda_a', help="depolarizing parameter of Alice's channel")
    group.add_argument('--lambda-b', dest='lambda_b', help="depolarizing parameter of Bob's channel")
    group.add_argument('--eta', help='transmission of both sides')
    group.add_argument('--eta-a', dest='eta_a', help="Alice's transmission")
    group.add_argument('--eta-b', dest='eta_b', help="Bob's transmission")
    group.add_argument('--n', help='background probability per slot on both sides')
    group.add_argument('--n-a', dest='n_a', help="Alice's background probability per slot")
    group.add_argument('--n-b', dest='n_b', help="Bob's background probability per slot")
    group.add_argument('--q', help='probability of choosing the Z basis')
    group.add_argument('--sift-factor', dest='sift_factor', help='fraction of qubits kept by sifting')
    group.add_argument('--symmetric', action='store_const', const='true', help='use the unbiased basis choice defaults')
    group.add_argument('--m', help='coding order; optimized when missing')
    group.add_argument('--p-pair', dest='p_pair', help='pair probability; optimized when missing')
    group.add_argument('--dt', help='frame duration in seconds')
    group.add_argument('--p-floor', dest='p_floor', help='lower edge of the pair probability search')
    group.add_argument('--p-ceiling', dest='p_ceiling', help='upper edge of the pair probability search')

    group = parser.add_argument_group('sweeps and approximations')
    group.add_argument('--axis', action='append', help='parameter:lo:hi:count[:scale], at most twice')
    group.add_argument('--full-xi', dest='full_xi', action='store_const', const='true', help='iterate the full Xi form')

    group = parser.add_argument_group('simulation')
    group.add_argument('--frames', help='number of simulated frames')
    group.add_argument('--seed', help='64 bit seed')
    group.add_argument('--blocks', help='number of blocks the frames are split into')
    group.add_argument('--workers', help='number of worker processes')
    group.add_argument('--pair-model', dest='pair_model', help='poisson or bernoulli2')
    group.add_argument('--scale', default=ValidationScale.QUICK.value, help='validation scale, quick or full')


def create_parser() -> argparse.ArgumentParser:
    """Builds the argument parser of the ``qkd-efficiency`` command."""
    common = _ArgumentParser(add_help=False)
    common.add_argument('--config', help='KEY=value file, or a JSON result to replay')
    common.add_argument('--out', help='output path, stdout by default')
    common.add_argument('--format', choices=OutputFormat.values(), help='csv for sweeps, json otherwise by default')
    common.add_argument('--verbosity', choices=VERBOSITY_LEVELS, default='WARNING')
    _add_parameter_options(common)

    parser = _ArgumentParser(prog='qkd-efficiency', description='Photon key efficiency of multiqubit entangled QKD links.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('compute', parents=[common], help='evaluate one fully specified operating point')
    commands.add_parser('optimize', parents=[common], help='find the optimal coding order and pair probability')
    commands.add_parser('sweep', parents=[common], help='optimize over a one or two dimensional grid')
    commands.add_parser('approx', parents=[common], help='evaluate the weak noise closed forms')
    commands.add_parser('simulate', parents=[common], help='run the Monte Carlo simulation and compare it to the model')
    commands.add_parser('validate', parents=[common], help='run the acceptance checks')
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {key: getattr(args, key, None) for key in FIELDS}
    for both, pair in (('v', ('v_a', 'v_b')), ('eta', ('eta_a', 'eta_b')), ('n', ('n_a', 'n_b'))):
        value = getattr(args, both)
        for key in pair:
            if overrides[key] is None:
                overrides[key] = value

    axes: list[str] = args.axis or []
    if len(axes) > 2:
        raise ConfigError('at most two axes can be swept', field='axis')
    for key, text in zip(('axis_a', 'axis_b'), axes):
        overrides[key] = text
    return overrides


def load_config(args: argparse.Namespace) -> RunConfig:
    """Combines the defaults, the ``--config`` file and the command line flags."""
    config = RunConfig()
    if args.config:
        if args.config.endswith('.json'):
            try:
                with open(args.config, 'rb') as fp:
                    config = RunConfig.from_result_dict(to_json(fp.read()))
            except OSError as exc:
                raise ConfigError(str(exc), field='config') from None
            except ValueError as exc:
                raise ConfigError(f'not a JSON result: {exc}', field='config') from None
        else:
            config = RunConfig.from_file(args.config)
    return config.merged(_overrides(args))


def _point_echo(m: int, p_pair: float) -> dict[str, Any]:
    return {'m': m, 'p_pair': p_pair}


def _csv_text(rows: Sequence[Sequence[str]]) -> str:
    stream = io.StringIO()
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return stream.getvalue()


def _point_row(point: LinkPoint, pke: float, flags: str = '') -> list[str]:
    qbers = qber_set(point)
    return [
        format_float(point.channel.noise_ratio_a),
        format_float(point.channel.noise_ratio_b),
        point.protocol.id.value,
        str(point.m),
        format_float(point.p_pair),
        format_float(pke),
        format_float(qbers.e_X),
        format_float(qbers.e_Z),
        flags,
    ]


def _compute(config: RunConfig, fmt: OutputFormat) -> str:
    point = config.point()
    evaluation = evaluate(point)
    if fmt is OutputFormat.CSV:
        return _csv_text([_point_row(point, evaluation.pke)])

    payload = {
        'command': 'compute',
        'config': config.to_dict(),
        'point': _point_echo(point.m, point.p_pair),
        'result': round_floats(evaluation.to_dict()),
    }
    return dumps(payload)


def _optimize(config: RunConfig, fmt: OutputFormat) -> str:
    template = config.template()
    if config.m is not None:
        optimum = optimize_p(template, config.m, p_floor=config.p_floor, p_ceiling=config.p_ceiling)
        result: dict[str, Any] = {
            'm_star': optimum.m,
            'p_pair_star': optimum.p_pair,
            'pke_star': optimum.pke,
            'flags': int(optimum.flags),
        }
        m_star, p_star, pke_star, flags = optimum.m, optimum.p_pair, optimum.pke, optimum.flags
    else:
        found = optimize_pm(template, p_floor=config.p_floor, p_ceiling=config.p_ceiling)
        result = found.to_dict()
        m_star, p_star, pke_star, flags = found.m_star, found.p_pair_star, found.pke_star, found.flags

    if fmt is OutputFormat.CSV:
        return _csv_text([_point_row(template.replace(m=m_star, p_pair=p_star), pke_star, flags.names())])

    payload = {
        'command': 'optimize',
        'config': config.to_dict(),
        'point': _point_echo(m_star, p_star),
        'result': round_floats(result),
    }
    return dumps(payload)


def _sweep(config: RunConfig, fmt: OutputFormat) -> str:
    axes = config.sweep_axes()
    if not axes:
        raise ConfigError('a sweep needs at least one --axis', field='axis')

    grid = SweepGrid(
        axes,
        config.template(),
        protocols=config.protocol_specs(),
        m=config.m,
        p_floor=config.p_floor,
        p_ceiling=config.p_ceiling,
    )
    result = sweep(grid, workers=config.workers)
    if fmt is OutputFormat.CSV:
        stream = io.StringIO()
        result.write_csv(stream)
        return stream.getvalue()

    return dumps({'command': 'sweep', 'config': config.to_dict(), 'result': round_floats(result.to_dict())})


def _approx(config: RunConfig, fmt: OutputFormat) -> str:
    protocol = config.protocol_spec()
    if protocol.id is not ProtocolId.BBM92_4:
        raise AsymptoticRegimeError('protocol', f'closed forms exist only for bbm92-4, not {protocol.id.value}')

    profile = config.profile()
    q = (1.0 if protocol.symmetric else protocol.q) * protocol.sift_factor
    closed = asymptotic_optimum(config.eta_b, config.n_b, profile, q, full_xi=config.full_xi)
    comparison = compare_asymptotics(
        config.eta_b, config.n_b, profile, protocol, p_floor=config.p_floor, p_ceiling=config.p_ceiling
    )
    payload = {
        'command': 'approx',
        'config': config.to_dict(),
        'result': round_floats(closed.to_dict()),
        'comparison': round_floats(
            {
                **comparison.to_dict(),
                'm_error': comparison.m_error,
                'p_ratio': comparison.p_ratio,
                'pke_ratio': comparison.pke_ratio,
            }
        ),
    }
    return dumps(payload)


def _simulate(config: RunConfig, fmt: OutputFormat) -> str:
    sim = config.sim_config()
    tally = simulate(sim)
    report = compare_to_analytic(tally, sim.point)
    payload = {
        'command': 'simulate',
        'config': config.to_dict(),
        'point': _point_echo(sim.point.m, sim.point.p_pair),
        'tally': tally.to_dict(),
        'comparison': round_floats(report.to_dict()),
    }
    return dumps(payload)


_COMMANDS: Final[dict[str, Callable[[RunConfig, OutputFormat], str]]] = {
    'compute': _compute,
    'optimize': _optimize,
    'sweep': _sweep,
    'approx': _approx,
    'simulate': _simulate,
}


def _write(text: str, out: Optional[str], stdout: IO[str]) -> None:
    if not text.endswith('\n'):
        text += '\n'
    if out is None:
        stdout.write(text)
        return
    try:
        with open(out, 'w', encoding='utf-8', newline='') as fp:
            fp.write(text)
    except OSError as exc:
        raise ConfigError(str(exc), field='out') from None


def _execute(args: argparse.Namespace, stdout: IO[str]) -> None:
    config = load_config(args)
    command: str = args.command
    fmt = OutputFormat(args.format or ('csv' if command == 'sweep' else 'json'))
    if fmt is OutputFormat.CSV and command not in _CSV_COMMANDS:
        raise ConfigError(f'{command} only writes json', field='format')

    _log.debug('running %s with %r', command, config)
    if command == 'validate':
        report = run_validation(args.scale, seed=config.seed, workers=config.workers)
        payload = {'command': 'validate', 'passed': report.passed, 'failed': report.failed, **report.to_dict()}
        _write(dumps(payload), args.out, stdout)
        report.raise_for_failure()
        return

    _write(_COMMANDS[command](config, fmt), args.out, stdout)


def run(argv: Optional[Sequence[str]] = None, *, stdout: Optional[IO[str]] = None, stderr: Optional[IO[str]] = None) -> int:
    """Runs the command line interface and returns its exit code.

    ``0`` on success, ``1`` for configuration and argument errors, ``2`` for numerical
    failures and ``3`` when a validation check fails. Every failure is reported as a
    single line on ``stderr``.

    Parameters
    ----------
    argv: Optional[Sequence[:class:`str`]]
        The arguments without the program name, ``sys.argv[1:]`` by default.
    stdout: Optional[IO[:class:`str`]]
        Where results go when ``--out`` is not given.
    stderr: Optional[IO[:class:`str`]]
        Where diagnostics go.
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = create_parser().parse_args(argv)
        logging.basicConfig(level=args.verbosity, format='%(asctime)s [%(levelname)s] %(name)s: %(message)s')
        _execute(args, stdout)
    except ValidationFailure as exc:
        print(f'qkd-efficiency: {exc}', file=stderr)
        return EXIT_VALIDATION
    except (ConfigError, DomainError) as exc:
        print(f'qkd-efficiency: error: {exc}', file=stderr)
        return EXIT_CONFIG
    except QKDEfficiencyException as exc:
        print(f'qkd-efficiency: numerical failure: {exc}', file=stderr)
        return EXIT_NUMERICAL
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)
    return EXIT_OK


def main() -> NoReturn:
    """The console script entry point."""
    sys.exit(run())
