import json
import os

import numpy as np
import pandas as pd
import pytest

from fdr_criticality.bin.cli import main, parse_args
from fdr_criticality.distributions import AlternativeFamily
from fdr_criticality.examples import example_path
from fdr_criticality.procedures import plug_in_bh
from fdr_criticality.pvalues import MixtureModel, sample_pvalues

LAPLACE = ['--family', 'laplace', '--theta', '2', '--pi0', '0.75']


def _read_json(directory, name):
    with open(os.path.join(str(directory), name)) as input_:
        return json.load(input_)


def test_parse_args():
    args = parse_args(['simulate', '-l', 'debug', '--alpha', '0.1', '0.2',
                       '--B', '5'])
    assert args.command == 'simulate'
    assert args.alpha == [0.1, 0.2]
    assert args.B == 5
    assert args.threads == 1
    assert args.log_level == 10


def test_crit(tmp_path):
    assert main(['crit'] + LAPLACE + ['--out', str(tmp_path)]) == 0
    report = _read_json(tmp_path, 'crit.json')
    assert abs(report['alpha_star'] - 0.385) < 5e-4
    assert abs(report['alpha_star_numeric'] - report['alpha_star']) < 1e-6
    assert report['is_critical'] is True
    config = _read_json(tmp_path, 'config.json')
    assert config['command'] == 'crit'
    assert config['model'] == {'family': 'laplace', 'theta': 2., 'pi0': 0.75}
    predictions = pd.read_csv(str(tmp_path / 'predictions.csv'),
                              float_precision='round_trip')
    assert list(predictions.columns[:5]) == ['family', 'theta', 'pi0',
                                             'sidedness', 'alpha']
    assert len(predictions) == 50
    assert not (tmp_path / 'crit_grid.csv').exists()


def test_crit_without_criticality(tmp_path):
    assert main(['crit', '--family', 'gaussian', '--theta', '3', '--pi0',
                 '0.5', '--out', str(tmp_path)]) == 0
    report = _read_json(tmp_path, 'crit.json')
    assert report['alpha_star'] == 0
    assert report['g1_at_0'] == 'inf'


def test_crit_grid(tmp_path):
    assert main(['crit'] + LAPLACE + ['--theta-grid', '1', '2', '3',
                                      '--pi0-grid', '0', '0.75', '0.9',
                                      '--alpha', '0.3', '0.45', '--out',
                                      str(tmp_path)]) == 0
    grid = pd.read_csv(str(tmp_path / 'crit_grid.csv'),
                       float_precision='round_trip')
    assert list(grid.columns) == ['theta', 'pi0', 'sidedness', 'alpha_star',
                                  'alpha_star_intrinsic']
    assert len(grid) == 2 * 3 * 3
    for _, side in grid.groupby('sidedness'):
        table = side.pivot(index='theta', columns='pi0', values='alpha_star')
        assert (table.diff(axis=0).dropna() < 0).values.all()
        assert (table.diff(axis=1).dropna(axis=1) > 0).values.all()
    anchor = grid.set_index(['sidedness', 'theta', 'pi0'])['alpha_star']
    assert abs(anchor[('one', 2., 0.75)] - 0.385) < 5e-4
    predictions = pd.read_csv(str(tmp_path / 'predictions.csv'),
                              float_precision='round_trip')
    assert predictions['alpha'].tolist() == [0.3, 0.45]
    assert predictions['t_star'].iloc[0] == 0
    assert predictions['t_star'].iloc[1] > 0
    assert _read_json(tmp_path, 'config.json')['experiment']['theta_grid'] == \
        [1., 2., 3.]


def test_config_errors_write_nothing(tmp_path):
    out = tmp_path / 'out'
    assert main(['crit', '--theta', '2', '--pi0', '0.5', '--out',
                 str(out)]) == 2
    assert main(['crit'] + LAPLACE + ['--pi0', '1.5', '--out',
                                      str(out)]) == 2
    assert main(['crit', '--family', 'subbotin', '--theta', '2', '--pi0',
                 '0.5', '--out', str(out)]) == 2
    assert not out.exists()


def test_usage_errors():
    assert main(['plot']) == 2
    assert main([]) == 2
    assert main(['crit', '--theta', 'two']) == 2


def test_simulate_is_independent_of_threads(tmp_path):
    arguments = ['simulate'] + LAPLACE + ['--m', '200', '--B', '12',
                                          '--seed', '3', '--alpha', '0.2',
                                          '0.4']
    assert main(arguments + ['--out', str(tmp_path / 'one')]) == 0
    assert main(arguments + ['--threads', '2', '--out',
                             str(tmp_path / 'two')]) == 0
    for name in ('simulation.csv', 'simulation.json'):
        assert (tmp_path / 'one' / name).read_text() == \
            (tmp_path / 'two' / name).read_text()
    frame = pd.read_csv(str(tmp_path / 'one' / 'simulation.csv'),
                        float_precision='round_trip')
    assert list(frame['alpha'].unique()) == [0.2, 0.4]
    assert len(frame) == 6
    pvalues = pd.read_csv(str(tmp_path / 'one' / 'pvalues.csv'),
                          float_precision='round_trip')
    assert list(pvalues.columns) == ['index', 'p_value', 'is_null']
    model = MixtureModel(0.75, AlternativeFamily.laplace(2))
    expected, is_null = sample_pvalues(model, 200, 3, stream_keys=(0, ))
    assert pvalues['index'].tolist() == list(range(200))
    assert np.array_equal(pvalues['p_value'].values, expected)
    assert np.array_equal(pvalues['is_null'].values, is_null)


def test_config_file_with_overrides(tmp_path):
    out = tmp_path / 'run'
    assert main(['simulate', '--config', example_path('power_laplace.json'),
                 '--m', '100', '--B', '4', '--alpha-range', '0.1', '0.3', '3',
                 '--out', str(out)]) == 0
    config = _read_json(out, 'config.json')
    assert config['experiment']['m'] == 100
    assert config['experiment']['seed'] == 20240617
    assert config['experiment']['alpha_range'] == {'start': 0.1, 'stop': 0.3,
                                                   'num': 3}
    assert config['output'] == {'dir': str(out)}
    # The written configuration reproduces the run.
    again = tmp_path / 'again'
    assert main(['simulate', '--config', str(out / 'config.json'), '--out',
                 str(again)]) == 0
    assert (out / 'simulation.csv').read_text() == \
        (again / 'simulation.csv').read_text()


def test_simulate_plug_in(tmp_path):
    assert main(['simulate', '--family', 'laplace', '--theta', '2', '--pi0',
                 '0.5', '--m', '500', '--B', '5', '--alpha', '0.45',
                 '--estimator', 'storey_fixed', '--lambda', '0.5',
                 '--out', str(tmp_path)]) == 0
    result = _read_json(tmp_path, 'simulation.json')
    assert result['config']['procedure'] == 'plug_in'
    assert result['config']['estimator'] == {'kind': 'storey_fixed',
                                             'lambda': 0.5}


def test_dist(tmp_path):
    assert main(['dist'] + LAPLACE + ['--points', '11', '--out',
                                      str(tmp_path)]) == 0
    statistic = pd.read_csv(str(tmp_path / 'dist_statistic.csv'),
                            float_precision='round_trip')
    pvalue = pd.read_csv(str(tmp_path / 'dist_pvalue.csv'),
                         float_precision='round_trip')
    assert len(statistic) == 11
    assert len(pvalue) == 11
    assert list(pvalue.columns) == ['u', 'g1_cdf', 'g1_pdf', 'g_cdf', 'g_pdf',
                                    'bh_ratio']
    assert pvalue['g1_cdf'].iloc[-1] == pytest.approx(1.)
    assert (statistic['t'].diff().dropna() > 0).all()


def test_pi0_from_file(tmp_path):
    pvalues = tmp_path / 'pvalues.csv'
    pvalues.write_text('pvalue\n' + '\n'.join(str((i + 0.5) / 100)
                                              for i in range(100)) + '\n')
    assert main(['pi0'] + LAPLACE + ['--pvalues', str(pvalues), '--out',
                                     str(tmp_path / 'out')]) == 0
    result = _read_json(tmp_path / 'out', 'pi0.json')
    assert result['m'] == 100
    assert result['estimator'] == {'kind': 'storey_fixed', 'lambda': 0.5}
    assert result['estimate']['value_clamped'] == pytest.approx(1.)


def test_pi0_rejections(tmp_path):
    out = tmp_path / 'single'
    assert main(['pi0'] + LAPLACE + ['--m', '500', '--seed', '4',
                                     '--alpha', '0.2', '--out',
                                     str(out)]) == 0
    result = _read_json(out, 'pi0.json')
    pvalues = pd.read_csv(str(out / 'pvalues.csv'),
                          float_precision='round_trip')
    assert list(pvalues.columns) == ['index', 'p_value', 'is_null']
    assert len(pvalues) == 500
    rejections = pd.read_csv(str(out / 'rejections.csv'),
                             float_precision='round_trip')
    assert list(rejections.columns) == ['index', 'p_value', 'rejected']
    assert np.array_equal(rejections['p_value'].values,
                          pvalues['p_value'].values)
    outcome = plug_in_bh(pvalues['p_value'].values, 0.2,
                         result['estimate']['value_clamped'])
    assert np.flatnonzero(rejections['rejected']).tolist() == \
        outcome.rejected.tolist()
    assert result['rejections'] == [
        {'file': 'rejections.csv', 'alpha': 0.2,
         'effective_level': outcome.effective_level, 'R': outcome.r}]

    out = tmp_path / 'grid'
    assert main(['pi0'] + LAPLACE + ['--m', '500', '--seed', '4',
                                     '--alpha', '0.1', '0.2', '--out',
                                     str(out)]) == 0
    names = [entry['file'] for entry in
             _read_json(out, 'pi0.json')['rejections']]
    assert names == ['rejections_0.csv', 'rejections_1.csv']
    assert (out / 'rejections_1.csv').read_text() == \
        (tmp_path / 'single' / 'rejections.csv').read_text()
    assert not (out / 'rejections.csv').exists()


def test_pi0_missing_file(tmp_path):
    out = tmp_path / 'out'
    assert main(['pi0'] + LAPLACE + ['--pvalues',
                                     str(tmp_path / 'missing.csv'), '--out',
                                     str(out)]) == 1
    assert not out.exists()


def test_fdp_law_critical_regime_fails(tmp_path):
    out = tmp_path / 'out'
    assert main(['fdp-law', '--family', 'laplace', '--theta', '2', '--pi0',
                 '0.5', '--alpha', '0.1', '--m-list', '100', '--B', '5',
                 '--out', str(out)]) == 1
    assert not out.exists()


def test_fdp_law(tmp_path):
    assert main(['fdp-law', '--family', 'laplace', '--theta', '2', '--pi0',
                 '0.5', '--alpha', '0.45', '--m-list', '200', '400', '--B',
                 '10', '--out', str(tmp_path)]) == 0
    table = pd.read_csv(str(tmp_path / 'fdp_law.csv'),
                        float_precision='round_trip')
    assert list(table['m']) == [200, 400]
    assert table.columns[0] == 'alpha'
    series = pd.read_csv(str(tmp_path / 'fdp_law_standardized.csv'),
                         float_precision='round_trip')
    assert len(series) == 20


def test_ttest(tmp_path):
    assert main(['ttest', '--family', 'student', '--delta', '0.9', '--n-x',
                 '27', '--n-y', '11', '--pi0', '0.5', '--sided', 'two',
                 '--m', '300', '--rates', '0.6', '1.0', '--B', '3',
                 '--alpha', '0.1', '0.2', '--out', str(tmp_path)]) == 0
    observed = pd.read_csv(str(tmp_path / 'ttest_observed.csv'),
                           float_precision='round_trip')
    assert len(observed) == (3 + 1) * 2
    median = pd.read_csv(str(tmp_path / 'ttest_median.csv'),
                         float_precision='round_trip')
    assert len(median) == 2 * 2
    asymptote = pd.read_csv(str(tmp_path / 'ttest_asymptote.csv'),
                            float_precision='round_trip')
    assert set(asymptote['rate']) == {0.6, 1.0}


def test_ttest_requires_effect(tmp_path):
    assert main(['ttest', '--family', 'student', '--theta', '2.5', '--k',
                 '36', '--pi0', '0.5', '--m', '100', '--out',
                 str(tmp_path / 'out')]) == 2
