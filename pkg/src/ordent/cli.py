"""
Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 insufficient data.

Numeric notes: ``tent`` without a slope uses 1.9999, because exact slope-2
orbits collapse onto 0 in binary floating point. Initial points are drawn
from the invariant law and burnt in for 1000 steps.
"""
import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from .cdf import analytic_cdf, rank_convergence_report
from .dynamics import (
    ObservableSpec, SystemSpec, initial_point, lyapunov, noninjectivity_fraction, orbit,
)
from .entropy import DEFAULT_K_MAX, UndersamplingWarning, ks_table
from .errors import InsufficientData, InvalidInput, UnsupportedSystem
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DATA = 0, 1, 2, 3

DEFAULTS = {
    'system': {'kind': 'logistic', 'r': 4.0},
    'observable': {'kind': 'identity'},
    'd_max': 6,
    'k_max': DEFAULT_K_MAX,
    'len': 10**6,
    'trials': 100,
    'threads': 1,
    'format': 'json',
    'out': None,
}


class ConfigError(Exception):
    pass


def _load_file(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f'cannot read config {path}: {e}') from None
    if path.suffix == '.toml':
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            return tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f'bad TOML in {path}: {e}') from None
    if path.suffix == '.json':
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f'bad JSON in {path}: {e}') from None
    raise ConfigError(f'config must end in .toml or .json: {path}')


def resolve_config(args):
    """Merge defaults, ``ORDENT_SEED``, the config file and flags (in rising precedence)."""
    cfg = dict(DEFAULTS)
    env_seed = os.environ.get('ORDENT_SEED')
    cfg['seed'] = 0
    if env_seed is not None:
        try:
            cfg['seed'] = int(env_seed)
        except ValueError:
            raise ConfigError(f'ORDENT_SEED must be an integer, got {env_seed!r}') from None
    if args.config:
        file_cfg = _load_file(args.config)
        if 'orbit_len' in file_cfg:
            file_cfg['len'] = file_cfg.pop('orbit_len')
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f'unknown config keys: {sorted(unknown)}')
        cfg.update(file_cfg)
    for key in ('d_max', 'k_max', 'len', 'trials', 'seed', 'threads', 'format', 'out'):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    try:
        cfg['system'] = (SystemSpec.parse(args.system) if args.system
                         else SystemSpec.from_config(cfg['system']))
        cfg['observable'] = (ObservableSpec.parse(args.observable) if args.observable
                             else ObservableSpec.from_config(cfg['observable']))
    except InvalidInput as e:
        raise ConfigError(str(e)) from None
    if cfg['format'] not in ('json', 'csv'):
        raise ConfigError(f'format must be json or csv, got {cfg["format"]!r}')
    for key in ('d_max', 'k_max', 'len', 'trials', 'threads'):
        if not isinstance(cfg[key], int) or cfg[key] < 1:
            raise ConfigError(f'{key} must be a positive integer, got {cfg[key]!r}')
    if not isinstance(cfg['seed'], int) or cfg['seed'] < 0:
        raise ConfigError(f'seed must be a nonnegative integer, got {cfg["seed"]!r}')
    return cfg


def _emit(text, out):
    if out in (None, '-'):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _note(msg):
    print(msg, file=sys.stderr)


def cmd_simulate(cfg):
    sys_, obs = cfg['system'], cfg['observable']
    x = orbit(sys_, initial_point(sys_, cfg['seed']), cfg['len'])
    vals = obs(x)
    rows = zip(x.tolist(), *vals.tolist())
    if cfg['format'] == 'json':
        text = json.dumps({
            'format': 'ordent.orbit',
            'system': sys_.to_config(),
            'observable': obs.to_config(),
            'seed': cfg['seed'],
            'x': x.tolist(),
            'observables': vals.tolist(),
        }, sort_keys=True) + '\n'
    else:
        text = ''.join(','.join(repr(v) for v in row) + '\n' for row in rows)
    _emit(text, cfg['out'])
    return EXIT_OK


def cmd_entropy_table(cfg):
    sys_, obs = cfg['system'], cfg['observable']
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', UndersamplingWarning)
        table = ks_table(sys_, obs, cfg['d_max'], cfg['k_max'], cfg['len'], cfg['seed'],
                         threads=cfg['threads'])
    for w in caught:
        _note(f'warning: {w.message}')
    try:
        oracle = lyapunov(sys_, initial_point(sys_, cfg['seed']), max(cfg['len'], 1000))
    except (InvalidInput, InsufficientData):
        oracle = None
    table.metadata['lyapunov_oracle'] = oracle
    _emit(table.to_json() if cfg['format'] == 'json' else table.to_csv(), cfg['out'])

    flagged = sum(not c.reliable for c in table.cells)
    if flagged:
        _note(f'warning: {flagged} of {len(table.cells)} cells flagged unreliable '
              '(undersampled)')
    cell = table.ks_cell()
    est = 'n/a' if cell is None else f'{cell.cond_nats:.6f}'
    where = '' if cell is None else f' (d={cell.d}, k={cell.k})'
    orc = 'n/a' if oracle is None else f'{oracle:.6f}'
    _note(f'ks_estimate{where}: {est} nats    lyapunov_oracle: {orc} nats')
    if cell is not None and oracle is not None:
        _note(f'|estimate - oracle|: {abs(cell.cond_nats - oracle):.6f} nats')
    return EXIT_OK


def cmd_rank(cfg, d_list):
    sys_, obs = cfg['system'], cfg['observable']
    report = rank_convergence_report(sys_, obs, d_list, cfg['trials'], cfg['seed'],
                                     cdf=analytic_cdf(sys_, obs), threads=cfg['threads'])
    _emit(report.to_json(), cfg['out'])
    for r in report.rows:
        _note(f'd={r.d}: mean |I_d/d - F| = {r.mean_dev:.5f}, max = {r.max_dev:.5f}')
    return EXIT_OK


def cmd_noninj(cfg, tol, pairs):
    frac = noninjectivity_fraction(cfg['observable'], cfg['system'], pairs, tol, cfg['seed'])
    _emit(json.dumps({
        'format': 'ordent.noninjectivity',
        'system': cfg['system'].to_config(),
        'observable': cfg['observable'].to_config(),
        'pairs': pairs, 'tol': tol, 'seed': cfg['seed'], 'fraction': frac,
    }, sort_keys=True) + '\n', cfg['out'])
    return EXIT_OK


def cmd_verify(name, out):
    if name not in SUITES:
        _note(f'error: unknown suite {name!r}; choose from {", ".join(SUITES)}')
        return EXIT_CONFIG
    res = run_suite(name)
    _emit(res.to_json(), out)
    for c in res.checks:
        _note(f'{"PASS" if c.passed else "FAIL"}  {c.name}' + (f'  [{c.detail}]' if c.detail else ''))
    return EXIT_OK if res.passed else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='TOML or JSON run configuration')
    common.add_argument('--system', help='e.g. logistic:4, tent:1.9999, rotation')
    common.add_argument('--observable', help='identity, affine:a,b, sincos or fold:c')
    common.add_argument('--d-max', dest='d_max', type=int)
    common.add_argument('--k-max', dest='k_max', type=int)
    common.add_argument('--len', type=int, help='orbit length')
    common.add_argument('--trials', type=int)
    common.add_argument('--seed', type=int, help='defaults to $ORDENT_SEED, else 0')
    common.add_argument('--threads', type=int)
    common.add_argument('--out', help='output path (default: stdout)')
    common.add_argument('--format', choices=('json', 'csv'))

    parser = argparse.ArgumentParser(
        prog='ordent', description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('simulate', parents=[common], help='write an orbit and its observables')
    sub.add_parser('entropy-table', parents=[common],
                   help='ordinal block-entropy table and KS estimate')
    p = sub.add_parser('rank', parents=[common], help='rank-statistic convergence report')
    p.add_argument('--d-list', default='1000,10000,100000')
    p = sub.add_parser('noninj', parents=[common], help='non-injectivity diagnostic')
    p.add_argument('--tol', type=float, default=1e-6)
    p.add_argument('--pairs', type=int, default=10**5)
    p = sub.add_parser('verify', help='run a property suite')
    p.add_argument('suite', help=f'one of: {", ".join(SUITES)}')
    p.add_argument('--out')
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == 'verify':
            return cmd_verify(args.suite, args.out)
        if args.command == 'simulate' and args.format is None:
            args.format = 'csv'
        cfg = resolve_config(args)
        if args.command == 'simulate':
            return cmd_simulate(cfg)
        if args.command == 'entropy-table':
            return cmd_entropy_table(cfg)
        if args.command == 'rank':
            try:
                d_list = [int(v) for v in args.d_list.split(',')]
            except ValueError:
                raise ConfigError(f'bad --d-list {args.d_list!r}') from None
            return cmd_rank(cfg, d_list)
        if args.command == 'noninj':
            return cmd_noninj(cfg, args.tol, args.pairs)
    except (ConfigError, InvalidInput, UnsupportedSystem) as e:
        _note(f'error: {e}')
        return EXIT_CONFIG
    except InsufficientData as e:
        _note(f'error: {e}')
        return EXIT_DATA
    return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
