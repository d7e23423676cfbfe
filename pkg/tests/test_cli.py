import csv
import io
import subprocess
import sys

import pytest

from mimodet.cli import CSV_FIELDS, ConfigError, main, parse_config
from mimodet.detectors import full_tree_nodes


def run_cli(*args):
    return main(list(args))


def read_rows(path):
    with open(path, encoding='utf-8') as fh:
        lines = [ln for ln in fh if not ln.startswith('#')]
    return list(csv.DictReader(io.StringIO(''.join(lines))))


def test_empty_config_defaults():
    config, extra = parse_config({})
    assert config.schedule.limits == (4, 16, 64, 64, 64, 64, 64, 64)
    assert config.n_tx == config.n_rx == 4
    assert config.constellation_size == 16
    assert config.snr_grid == (0, 4, 8, 12, 16, 20, 24)
    assert config.trials_per_snr == 10_000
    assert config.detector_set == ('babai', 'qrdm', 'sd', 'ulbc_paper',
                                   'ulbc_strict')
    assert extra == {}


@pytest.mark.parametrize('raw,key', [
    ({'bogus': '1'}, 'bogus'),
    ({'trials_per_snr': 'many'}, 'trials_per_snr'),
    ({'schedule': '4,16,64'}, 'schedule'),
    ({'detectors': 'babai,psychic'}, 'detector_set'),
    ({'ordering': 'random'}, 'ordering'),
    ({'constellation_size': '8'}, 'constellation_size'),
])
def test_parse_config_errors_name_the_key(raw, key):
    with pytest.raises(ConfigError) as err:
        parse_config(raw)
    assert err.value.key == key or key in str(err.value)


def test_snr_range_syntax():
    config, _ = parse_config({'snr': '0:24:4'})
    assert config.snr_grid == (0, 4, 8, 12, 16, 20, 24)
    config, _ = parse_config({'snr': '3, 7.5 ,inf'})
    assert config.snr_grid == (3.0, 7.5, float('inf'))


def test_bounds_defaults(capsys):
    assert run_cli('bounds') == 0
    out = capsys.readouterr().out
    assert 'f_lb = 12' in out
    assert 'f_qrdm = 1364' in out
    assert 'f_ub = 1372' in out


def test_bounds_small(capsys):
    assert run_cli('bounds', '--n-tx', '1', '--constellation', '4',
                   '--schedule', '1,1') == 0
    out = capsys.readouterr().out
    assert 'f_lb = 4\n' in out and 'f_qrdm = 4\n' in out and 'f_ub = 6\n' in out


def test_bounds_saturating_schedule(capsys):
    n = full_tree_nodes(4, 4)
    assert run_cli('bounds', '--n-tx', '2', '--schedule',
                   '256,256,256,256') == 0
    assert 'f_qrdm = {0}\n'.format(n) in capsys.readouterr().out


def test_flag_overrides_file(tmp_path, capsys):
    cfg = tmp_path / 'exp.cfg'
    cfg.write_text('# small run\nn_tx = 1\nconstellation_size = 4\n'
                   'schedule = 2, 2   # beam widths\ntrials = 5\n')
    assert run_cli('bounds', '--config', str(cfg)) == 0
    assert 'f_qrdm = 6' in capsys.readouterr().out
    assert run_cli('bounds', '--config', str(cfg), '--schedule', '1,1') == 0
    assert 'f_qrdm = 4' in capsys.readouterr().out


def test_schedule_length_rejected(capsys):
    assert run_cli('bounds', '--schedule', '4,16') != 0
    assert 'schedule' in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / 'bad.cfg'
    cfg.write_text('trials = 5\nfrobnicate = yes\n')
    assert run_cli('run', '--config', str(cfg),
                   '--out', str(tmp_path / 'x.csv')) != 0
    assert 'frobnicate' in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    out = tmp_path / 'missing-dir' / 'r.csv'
    assert run_cli('run', '--trials', '2', '--out', str(out)) != 0
    assert 'out' in capsys.readouterr().err


SMALL = ('--trials', '40', '--snr', '0,12,24', '--seed', '99')


def test_run_writes_csv(tmp_path, capsys):
    out = tmp_path / 'r.csv'
    assert run_cli('run', *SMALL, '--out', str(out)) == 0
    summary = capsys.readouterr().out
    assert 'ulbc_strict' in summary
    text = out.read_text(encoding='utf-8')
    assert '\r' not in text
    assert '# snr_definition = ' in text
    assert '# master_seed = 99' in text
    rows = read_rows(out)
    assert tuple(rows[0].keys()) == CSV_FIELDS
    order = [(float(r['snr_db']), r['detector']) for r in rows]
    assert order == sorted(order)
    assert len(rows) == 3 * 5
    for r in rows:
        assert 0 <= float(r['vector_error_rate']) <= 1
        assert 0 <= float(r['symbol_error_rate']) <= 1
        assert int(r['nodes_min']) <= float(r['nodes_mean']) <= \
            int(r['nodes_max'])
        if r['detector'].startswith('ulbc'):
            assert int(r['f_lb']) <= int(r['nodes_min'])
            assert int(r['nodes_max']) <= int(r['f_ub'])
            assert 0 <= float(r['ulbc_equals_qrdm_fraction']) <= 1
        else:
            assert r['early_termination_fraction'] == ''
    qrdm = [float(r['nodes_mean']) for r in rows if r['detector'] == 'qrdm']
    assert len(set(qrdm)) == 1
    by_snr = {}
    for r in rows:
        by_snr.setdefault(r['snr_db'], {})[r['detector']] = r
    for cells in by_snr.values():
        assert float(cells['ulbc_strict']['nodes_mean']) <= \
            float(cells['qrdm']['nodes_mean'])


def test_run_is_deterministic(tmp_path, capsys):
    a, b, c = (tmp_path / n for n in ('a.csv', 'b.csv', 'c.csv'))
    args = ('--trials', '15', '--snr', '0,20', '--detectors',
            'babai,qrdm,sd,ulbc_strict')
    assert run_cli('run', *args, '--out', str(a)) == 0
    assert run_cli('run', *args, '--out', str(b)) == 0
    assert run_cli('run', *args, '--workers', '2', '--out', str(c)) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_sorted_ordering_and_ml(tmp_path, capsys):
    out = tmp_path / 'o.csv'
    assert run_cli('run', '--n-tx', '2', '--trials', '30', '--snr', '5,15',
                   '--ordering', 'sorted', '--detectors', 'ml,sd',
                   '--out', str(out)) == 0
    rows = read_rows(out)
    for snr in ('5', '15'):
        cells = {r['detector']: r for r in rows if r['snr_db'] == snr}
        assert cells['ml']['vector_error_rate'] == \
            cells['sd']['vector_error_rate']


def test_module_entry_point():
    proc = subprocess.run([sys.executable, '-m', 'mimodet', 'bounds'],
                          capture_output=True, text=True, check=True)
    assert 'f_ub = 1372' in proc.stdout
