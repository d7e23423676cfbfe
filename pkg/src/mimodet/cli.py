"""Command-line front end: ``mimodet run`` and ``mimodet bounds``.

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Command-line flags override file values.
"""

import argparse
import csv
import io
import math
import sys

from . import __version__
from .detectors import MSchedule, full_tree_nodes
from .sim import DETECTORS, SNR_CONVENTION, SimConfig, run_experiment

__all__ = ['ConfigError', 'parse_config', 'read_config_file', 'format_csv',
           'CSV_FIELDS', 'main']

CSV_FIELDS = ('snr_db', 'detector', 'trials', 'vector_error_rate',
              'symbol_error_rate', 'nodes_mean', 'nodes_max', 'nodes_min',
              'f_lb', 'f_qrdm', 'f_ub', 'ulbc_equals_qrdm_fraction',
              'early_termination_fraction')

COUNTING_NOTE = ('one visited node = one single-stage squared-term '
                 'evaluation for one candidate symbol')

_ORDERINGS = {'plain': 'plain_qr', 'plain_qr': 'plain_qr',
              'sorted': 'sorted_qr', 'sorted_qr': 'sorted_qr'}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending setting."""

    def __init__(self, key, message):
        super().__init__("{0}: {1}".format(key, message))
        self.key = key


def _int(text):
    return int(text.strip(), 0)


def _int_list(text):
    return tuple(_int(t) for t in text.split(',') if t.strip())


def _snr_list(text):
    """``0,4,8`` or inclusive ``start:stop:step``; ``inf`` is noiseless."""
    text = text.strip()
    if ':' in text:
        start, stop, step = (float(t) for t in text.split(':'))
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + k * step for k in range(n))
    return tuple(float(t) for t in text.split(',') if t.strip())


def _name_list(text):
    return tuple(t.strip() for t in text.split(',') if t.strip())


def _ordering(text):
    try:
        return _ORDERINGS[text.strip()]
    except KeyError:
        raise ValueError("expected plain or sorted") from None


# key -> (SimConfig field, parser)
_KEYS = {
    'n_tx': ('n_tx', _int),
    'n_rx': ('n_rx', _int),
    'constellation_size': ('constellation_size', _int),
    'schedule': ('schedule', _int_list),
    'snr_grid': ('snr_grid', _snr_list),
    'trials_per_snr': ('trials_per_snr', _int),
    'master_seed': ('master_seed', _int),
    'detector_set': ('detector_set', _name_list),
    'ordering': ('ordering', _ordering),
    'ml_cap': ('ml_cap', _int),
}
_ALIASES = {'snr': 'snr_grid', 'trials': 'trials_per_snr',
            'seed': 'master_seed', 'detectors': 'detector_set'}
_EXTRA_KEYS = ('out', 'workers')


def read_config_file(path):
    """Parse a ``key = value`` file into a dict of raw strings."""
    values = {}
    with open(path, encoding='utf-8') as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError(
                    'line {0}'.format(lineno), "expected 'key = value'")
            key, value = (s.strip() for s in line.split('=', 1))
            values[key] = value
    return values


def parse_config(raw):
    """
    Turn raw ``key -> string`` settings into a ``SimConfig``.

    Returns
    -------
    config : SimConfig
    extra : dict
        Non-simulation settings (``out``, ``workers``).

    Raises
    ------
    ConfigError
        Naming the first unknown key or invalid value.
    """
    kwargs = {}
    extra = {}
    for key, text in raw.items():
        name = _ALIASES.get(key, key)
        if name in _EXTRA_KEYS:
            extra[name] = text
            continue
        if name not in _KEYS:
            raise ConfigError(key, "unknown key")
        field, parse = _KEYS[name]
        try:
            kwargs[field] = parse(text)
        except ValueError as exc:
            raise ConfigError(key, "invalid value {0!r} ({1})".format(
                text, exc)) from None
    if 'detector_set' in kwargs:
        bad = [d for d in kwargs['detector_set'] if d not in DETECTORS]
        if bad:
            raise ConfigError('detector_set', "unknown detector(s) {0}; "
                              "choose from {1}".format(
                                  ','.join(bad), ','.join(DETECTORS)))
    if 'schedule' in kwargs:
        n_s = 2 * kwargs.get('n_tx', SimConfig.n_tx)
        if len(kwargs['schedule']) != n_s:
            raise ConfigError('schedule', "has {0} stages, expected n_s = "
                              "{1}".format(len(kwargs['schedule']), n_s))
        try:
            kwargs['schedule'] = MSchedule(kwargs['schedule'])
        except ValueError as exc:
            raise ConfigError('schedule', str(exc)) from None
    try:
        config = SimConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(_guess_key(str(exc)), str(exc)) from None
    if 'workers' in extra:
        try:
            extra['workers'] = _int(extra['workers'])
        except ValueError:
            raise ConfigError('workers', "invalid value {0!r}".format(
                extra['workers'])) from None
    return config, extra


def _guess_key(message):
    for key in ('n_rx', 'n_tx', 'constellation', 'schedule', 'snr_grid',
                'trials_per_snr', 'master_seed', 'ml', 'detector',
                'ordering'):
        if key in message:
            return {'constellation': 'constellation_size', 'ml': 'ml_cap',
                    'detector': 'detector_set'}.get(key, key)
    return 'config'


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ''
    if isinstance(value, float):
        return '{0:.6f}'.format(value)
    return str(value)


def _fmt_snr(snr):
    return '{0:g}'.format(snr)


def result_rows(stats):
    """Output rows ordered by SNR ascending, then detector name."""
    config = stats.config
    f_lb, f_qrdm, f_ub = config.bounds()
    rows = []
    for snr in sorted(config.snr_grid):
        for name in sorted(config.detector_set):
            cell = stats[snr, name]
            ulbc = name.startswith('ulbc')
            equal = (cell.ulbc_equals_qrdm / cell.trials
                     if ulbc and 'qrdm' in config.detector_set else None)
            early = cell.early_terminations / cell.trials if ulbc else None
            rows.append({
                'snr_db': _fmt_snr(snr),
                'detector': name,
                'trials': cell.trials,
                'vector_error_rate': cell.vector_errors / cell.trials,
                'symbol_error_rate':
                    cell.symbol_errors / (cell.trials * config.n_tx),
                'nodes_mean': cell.node_mean,
                'nodes_max': cell.node_max,
                'nodes_min': cell.node_min,
                'f_lb': f_lb, 'f_qrdm': f_qrdm, 'f_ub': f_ub,
                'ulbc_equals_qrdm_fraction': equal,
                'early_termination_fraction': early,
            })
    return rows


def config_echo(config):
    return [
        ('code_version', __version__),
        ('n_tx', config.n_tx),
        ('n_rx', config.n_rx),
        ('constellation_size', config.constellation_size),
        ('schedule', str(config.schedule)),
        ('snr_grid', ','.join(_fmt_snr(s) for s in config.snr_grid)),
        ('trials_per_snr', config.trials_per_snr),
        ('master_seed', config.master_seed),
        ('detector_set', ','.join(config.detector_set)),
        ('ordering', config.ordering),
        ('channel', 'flat i.i.d. Rayleigh, CN(0,1) entries'),
        ('snr_definition', SNR_CONVENTION),
        ('node_counting', COUNTING_NOTE),
    ]


def format_csv(stats):
    """CSV text: ``#`` config-echo lines, a header row, one row per cell."""
    buf = io.StringIO()
    for key, value in config_echo(stats.config):
        buf.write('# {0} = {1}\n'.format(key, value))
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(CSV_FIELDS)
    for row in result_rows(stats):
        writer.writerow([_fmt(row[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def format_summary(stats):
    rows = result_rows(stats)
    header = ('snr_db', 'detector', 'VER', 'SER', 'nodes_mean', 'nodes_min',
              'nodes_max')
    lines = ['{0:>7} {1:<12} {2:>9} {3:>9} {4:>11} {5:>9} {6:>9}'.format(
        *header)]
    for r in rows:
        lines.append(
            '{0:>7} {1:<12} {2:>9.5f} {3:>9.5f} {4:>11.2f} {5:>9} {6:>9}'
            .format(r['snr_db'], r['detector'], r['vector_error_rate'],
                    r['symbol_error_rate'], r['nodes_mean'], r['nodes_min'],
                    r['nodes_max']))
    f_lb, f_qrdm, f_ub = stats.config.bounds()
    lines.append('bounds: f_lb={0} f_qrdm={1} f_ub={2}'.format(
        f_lb, f_qrdm, f_ub))
    return '\n'.join(lines)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog='mimodet',
        description='MIMO tree-search detection experiments.')
    parser.add_argument('--version', action='version', version=__version__)
    sub = parser.add_subparsers(dest='command', required=True)
    for name, help_text in (('run', 'run a Monte Carlo experiment'),
                            ('bounds', 'print ULBC QRD-M complexity bounds')):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--config', help='key = value configuration file')
        p.add_argument('--snr', help='SNR list, e.g. 0,4,8 or 0:24:4')
        p.add_argument('--trials', help='trials per SNR point')
        p.add_argument('--seed', help='64-bit master seed')
        p.add_argument('--detectors',
                       help='comma-separated subset of ' + ','.join(DETECTORS))
        p.add_argument('--ordering', choices=('plain', 'sorted'))
        p.add_argument('--n-tx', dest='n_tx')
        p.add_argument('--constellation', dest='constellation_size')
        p.add_argument('--schedule', help='comma-separated beam widths')
        if name == 'run':
            p.add_argument('--out', help='CSV output path')
            p.add_argument('--workers', help='worker processes (default 1)')
    return parser


def _collect(args):
    raw = read_config_file(args.config) if args.config else {}
    # Flags override the file; normalize aliases so they do not collide.
    raw = {_ALIASES.get(k, k): v for k, v in raw.items()}
    for flag, key in (('snr', 'snr_grid'), ('trials', 'trials_per_snr'),
                      ('seed', 'master_seed'), ('detectors', 'detector_set'),
                      ('ordering', 'ordering'), ('n_tx', 'n_tx'),
                      ('constellation_size', 'constellation_size'),
                      ('schedule', 'schedule'), ('out', 'out'),
                      ('workers', 'workers')):
        value = getattr(args, flag, None)
        if value is not None:
            raw[key] = value
    if 'n_tx' in raw and 'n_rx' not in raw:
        raw['n_rx'] = raw['n_tx']
    return raw


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        config, extra = parse_config(_collect(args))
    except ConfigError as exc:
        print('mimodet: error: {0}'.format(exc), file=sys.stderr)
        return 2
    except OSError as exc:
        print('mimodet: error: config: {0}'.format(exc), file=sys.stderr)
        return 2

    if args.command == 'bounds':
        f_lb, f_qrdm, f_ub = config.bounds()
        print('f_lb = {0}'.format(f_lb))
        print('f_qrdm = {0}'.format(f_qrdm))
        print('f_ub = {0}'.format(f_ub))
        print('full_tree = {0}'.format(
            full_tree_nodes(config.n_s, config.alphabet.q)))
        return 0

    out = extra.get('out', 'results.csv')
    try:
        fh = open(out, 'w', encoding='utf-8', newline='')
    except OSError as exc:
        print('mimodet: error: out: cannot write {0!r}: {1}'.format(
            out, exc.strerror), file=sys.stderr)
        return 1
    with fh:
        stats = run_experiment(config, workers=extra.get('workers', 1))
        fh.write(format_csv(stats))
    print(format_summary(stats))
    print('wrote {0}'.format(out))
    return 0


if __name__ == '__main__':
    sys.exit(main())
