import json
import os

import pandas as pd
import pytest

from ..numerics import cli
from ..numerics.quality.battery import IdentityBattery
from ..numerics.exc import ConfigurationError


def read_json(path):
    with open(path) as f:
        return json.load(f)


def test_specfun_verify_single_identity(tmpdir):
    out = str(tmpdir)
    assert cli.run(['specfun-verify', '--out', out, '--only', 'log_gamma']) == cli.EXIT_OK
    table = pd.read_csv(os.path.join(out, 'specfun-verify.csv'))
    assert list(table.columns) == ['identity', 'error', 'tolerance', 'passed']
    assert list(table['identity']) == ['log_gamma']
    index = read_json(os.path.join(out, 'index.json'))
    assert index['info']['passed'] is True
    assert index['files']['specfun-verify'] == 'specfun-verify.csv'
    assert os.path.exists(os.path.join(out, 'log.txt'))


def test_specfun_verify_failure_still_reports(tmpdir):
    out = str(tmpdir)
    code = cli.run(['specfun-verify', '--out', out, '--only', 'ml_erfcx', '--set', 'verify.tolerance=1e-20'])
    assert code == cli.EXIT_FAILED
    table = pd.read_csv(os.path.join(out, 'specfun-verify.csv'))
    assert not table['passed'].any()
    assert (table['tolerance'] == 1e-20).all()
    summary = read_json(os.path.join(out, 'specfun-verify.json'))
    assert summary['passed'] is False
    assert summary['messages']


def test_unknown_identity(tmpdir):
    assert cli.run(['specfun-verify', '--out', str(tmpdir), '--only', 'zeta']) == cli.EXIT_USAGE
    with pytest.raises(ConfigurationError):
        IdentityBattery.select(['zeta'])


def test_identity_names():
    names = IdentityBattery.names()
    assert 'log_gamma' in names
    assert len(names) == len(set(names))


@pytest.mark.parametrize('argv', [
    ['experiment'],
    ['experiment', 'no-such-experiment'],
    ['solve', 'extra'],
    ['solve', '--set', 'solve.no_such_key=1'],
    ['solve', '--set', 'solve.domain=annulus'],
    ['solve', '--set', 'solve.alpha=1.5'],
    ['frobnicate'],
])
def test_usage_errors(tmpdir, argv):
    out = str(tmpdir.join('out'))
    assert cli.run(argv + ['--out', out]) == cli.EXIT_USAGE
    assert not os.path.exists(out)


def test_run_config_file(tmpdir):
    path = tmpdir.join('run.json')
    path.write(json.dumps({'solve': {'n_modes': 4, 'n_steps': 10}}))
    out = str(tmpdir.join('out'))
    assert cli.run(['solve', '--config', str(path), '--out', out]) == cli.EXIT_OK
    modes = pd.read_csv(os.path.join(out, 'solution_modes.csv'))
    assert list(modes.columns) == ['t', 'mode_1', 'mode_2', 'mode_3', 'mode_4']
    assert len(modes) == 11


def test_solve_outputs_are_reproducible(tmpdir):
    outputs = ('solution.csv', 'solution_modes.csv', 'solution.json', 'index.json')
    contents = []
    for run in ('first', 'second'):
        out = str(tmpdir.join(run))
        assert cli.run(['solve', '--out', out, '--set', 'solve.n_modes=8:solve.n_steps=20']) == cli.EXIT_OK
        files = []
        for name in outputs:
            with open(os.path.join(out, name), 'rb') as f:
                files.append(f.read())
        contents.append(files)
    assert contents[0] == contents[1]
    index = read_json(os.path.join(str(tmpdir.join('first')), 'index.json'))
    assert index['files'] == {'solution': 'solution.csv', 'solution_modes': 'solution_modes.csv',
                              'solution_metadata': 'solution.json'}
    assert index['info']['command'] == 'solve'


def test_solve_with_boundary_data(tmpdir):
    out = str(tmpdir)
    argv = ['solve', '--out', out, '--set', 'solve.n_modes=64:solve.n_nodes=4096:solve.n_steps=20:solve.h=one']
    assert cli.run(argv) == cli.EXIT_OK
    sidecar = read_json(os.path.join(out, 'solution.json'))
    assert sidecar['metadata']['concentration']['j'] >= 4


def test_experiment_duality_sweep(tmpdir):
    out = str(tmpdir)
    assert cli.run(['experiment', 'duality-sweep', '--out', out]) == cli.EXIT_OK
    table = pd.read_csv(os.path.join(out, 'duality-sweep.csv'))
    assert len(table) == 9
    summary = read_json(os.path.join(out, 'duality-sweep.json'))
    assert summary['passed'] is True
    assert summary['experiment'] == 'duality-sweep'
    assert summary['parameters']['n_steps'] == 400


def test_experiment_failure_exit_code(tmpdir):
    out = str(tmpdir)
    assert cli.run(['experiment', 'duality-sweep', '--out', out,
                    '--set', 'experiments.duality-sweep.tol=1e-20']) == cli.EXIT_FAILED
    index = read_json(os.path.join(out, 'index.json'))
    assert index['info']['results'] == {'duality-sweep': False}
    assert os.path.exists(os.path.join(out, 'duality-sweep.csv'))


def test_experiments_run_in_order(tmpdir):
    out = str(tmpdir)
    assert cli.run(['experiment', 'subordination', 'duality-sweep', 'subordination', '--out', out]) == cli.EXIT_OK
    index = read_json(os.path.join(out, 'index.json'))
    assert sorted(index['info']['results']) == ['duality-sweep', 'subordination']


@pytest.mark.slow
def test_all_experiments(tmpdir):
    out = str(tmpdir)
    assert cli.run(['experiment', 'all', '--out', out]) == cli.EXIT_OK
    index = read_json(os.path.join(out, 'index.json'))
    assert all(index['info']['results'].values())
    assert len(index['info']['results']) == 11
