# coding: utf-8
'''
Command-line front end.

Every subcommand accepts a ``--config`` file (JSON or YAML) and inline flags;
inline flags override the file.  The resolved configuration is validated,
the experiment is run to completion and then its outputs are written,
together with ``config.json``, into the output directory.

Exit codes: 0 on success, 2 on configuration errors, 1 on runtime errors.
'''
from argparse import ArgumentParser
import copy
import logging
import sys

import numpy as np
import pandas as pd

from . import LOG_LEVELS, log_level
from .. import __version__
from ..asymptotics import predict_curve, predictions_frame
from ..criticality import (bh_ratio, critical_value_numeric,
                           critical_value_surface, pi0_bar, purity_report)
from ..distributions import (f0_cdf, f0_pdf, f0_quantile, f1_cdf, f1_pdf,
                             likelihood_ratio)
from ..export import write_outputs
from ..pi0 import Pi0Estimator, bias_report
from ..procedures import plug_in_bh, rejection_frame
from ..pvalues import (g1_cdf, g1_pdf, mixture_cdf, mixture_pdf,
                       pvalues_frame, sample_pvalues)
from ..schema import COMMANDS, CONFIG_VERSION, ConfigError, RunConfig, \
    read_config
from ..simulation import (SimulationConfig, fdp_law_experiment,
                          replicate_sample, run)
from ..ttest_pipeline import ResamplingPlan, TwoSampleDataset, \
    median_curve, rejection_curve

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = '.'
DEFAULT_ESTIMATOR = {'kind': 'storey_fixed', 'lambda': 0.5}
DEFAULT_POINTS = 101

# Inline flag destination -> (config block, config key).
MODEL_FLAGS = {'family': 'family', 'theta': 'theta', 'gamma': 'gamma',
               'k': 'k', 'delta': 'delta', 'n_x': 'n_x', 'n_y': 'n_y',
               'pi0': 'pi0', 'sided': 'sided'}
EXPERIMENT_FLAGS = {'m': 'm', 'B': 'B', 'seed': 'seed', 'alpha': 'alpha_grid',
                    'quantiles': 'quantiles', 'm_list': 'm_list',
                    'rates': 'rates', 'points': 'points',
                    'pvalues': 'pvalues', 'data': 'data', 'labels': 'labels',
                    'theta_grid': 'theta_grid', 'pi0_grid': 'pi0_grid'}
ESTIMATOR_FLAGS = {'estimator': 'kind', 'lam': 'lambda', 'estimator_k': 'k',
                   'order': 'order', 'eta_exponent': 'eta_exponent',
                   'eta': 'eta'}


def _common_parser():
    parser = ArgumentParser(add_help=False)
    parser.add_argument('-l', '--log-level', type=str, choices=LOG_LEVELS,
                        default='info')
    parser.add_argument('--config', help='JSON or YAML run configuration.')
    parser.add_argument('--out', help='Output directory (default: current '
                        'directory).')
    parser.add_argument('--threads', type=int, default=1,
                        help='Worker processes (affects wall time only).')

    model = parser.add_argument_group('model')
    model.add_argument('--family', choices=['gaussian', 'laplace', 'subbotin',
                                            'student'])
    model.add_argument('--theta', type=float)
    model.add_argument('--gamma', type=float, help='Subbotin shape.')
    model.add_argument('--k', type=int, help='Student degrees of freedom.')
    model.add_argument('--delta', type=float,
                       help='Standardized two-sample effect (Student).')
    model.add_argument('--n-x', dest='n_x', type=int)
    model.add_argument('--n-y', dest='n_y', type=int)
    model.add_argument('--pi0', type=float)
    model.add_argument('--sided', choices=['one', 'two'])

    experiment = parser.add_argument_group('experiment')
    experiment.add_argument('--m', type=int)
    experiment.add_argument('--B', type=int)
    experiment.add_argument('--seed', type=int)
    experiment.add_argument('--alpha', type=float, nargs='+',
                            help='Explicit level grid.')
    experiment.add_argument('--alpha-range', type=float, nargs=3,
                            metavar=('START', 'STOP', 'NUM'))
    experiment.add_argument('--quantiles', type=float, nargs='+')
    experiment.add_argument('--estimator', choices=['storey_fixed',
                                                    'storey_bandwidth',
                                                    'kernel'])
    experiment.add_argument('--lambda', dest='lam', type=float)
    experiment.add_argument('--estimator-k', type=int,
                            help='Smoothness order of the bandwidth rule.')
    experiment.add_argument('--order', type=int, help='Kernel order.')
    experiment.add_argument('--eta-exponent', type=float)
    experiment.add_argument('--eta', type=float)
    experiment.add_argument('--m-list', type=int, nargs='+')
    experiment.add_argument('--rates', type=float, nargs='+')
    experiment.add_argument('--points', type=int,
                            help='Grid size of `dist` tables.')
    experiment.add_argument('--theta-grid', type=float, nargs='+',
                            help='`crit`: tabulate critical values over '
                            'these shifts.')
    experiment.add_argument('--pi0-grid', type=float, nargs='+',
                            help='`crit`: tabulate critical values over '
                            'these null proportions.')
    experiment.add_argument('--bernoulli-labels', action='store_true',
                            default=None)
    experiment.add_argument('--strict-level', action='store_true',
                            default=None)
    experiment.add_argument('--pvalues', help='CSV file of p-values.')
    experiment.add_argument('--data', help='Data matrix CSV.')
    experiment.add_argument('--labels', help='Sample label CSV.')
    return parser


def parse_args(args=None):
    """Parses arguments, returns namespace."""
    if args is None:
        args = sys.argv[1:]

    parser = ArgumentParser(prog='fdr-criticality',
                            description='Criticality of FDR-controlling '
                            'procedures.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True
    common = _common_parser()
    helps = {'crit': 'Critical value and purity of a mixture model.',
             'dist': 'Tabulate statistic and p-value distributions.',
             'simulate': 'Power/FDP Monte Carlo against asymptotics.',
             'pi0': 'Estimate pi0 from p-values.',
             'fdp-law': 'Plug-in FDP limit law experiment.',
             'ttest': 'Two-sample t-test rejection curves under resampling.'}
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=helps[command])

    args = parser.parse_args(args)
    args.log_level = log_level(args.log_level)
    return args


def resolve_config(args):
    '''
    Merge the ``--config`` document with inline flags into a
    :class:`RunConfig`.

    Raises
    ------
    ConfigError
    '''
    document = (read_config(args.config) if args.config else
                {'version': CONFIG_VERSION})
    document = copy.deepcopy(document)
    document['command'] = args.command
    model = document.setdefault('model', {})
    experiment = document.setdefault('experiment', {})
    output = document.setdefault('output', {})
    for dest, key in MODEL_FLAGS.items():
        if getattr(args, dest) is not None:
            model[key] = getattr(args, dest)
    for dest, key in EXPERIMENT_FLAGS.items():
        if getattr(args, dest) is not None:
            experiment[key] = getattr(args, dest)
    if args.alpha is not None:
        experiment.pop('alpha_range', None)
    if args.alpha_range is not None:
        start, stop, num = args.alpha_range
        if int(num) != num:
            raise ConfigError('NUM must be an integer.',
                              '$.experiment.alpha_range')
        experiment.pop('alpha_grid', None)
        experiment['alpha_range'] = {'start': start, 'stop': stop,
                                     'num': int(num)}
    for flag in ('bernoulli_labels', 'strict_level'):
        if getattr(args, flag):
            experiment[flag] = True
    estimator_flags = {key: getattr(args, dest)
                       for dest, key in ESTIMATOR_FLAGS.items()
                       if getattr(args, dest) is not None}
    if estimator_flags:
        estimator = experiment.get('estimator', {})
        if estimator_flags.get('kind', estimator.get('kind')) != \
                estimator.get('kind'):
            # A new kind discards the settings of the configured one.
            estimator = {}
        estimator.update(estimator_flags)
        experiment['estimator'] = estimator
    if args.out is not None:
        output['dir'] = args.out
    for block in ('experiment', 'output'):
        if not document[block]:
            del document[block]
    return RunConfig.from_dict(document)


###########################################################################
# Commands
def _require(config, key, default=None):
    value = config.get(key, default)
    if value is None:
        raise ConfigError('`%s` is required by `%s`.' % (key, config.command),
                          '$.experiment')
    return value


def run_crit(config, n_workers):
    model = config.mixture_model()
    report = purity_report(model).to_dict()
    report['alpha_star_numeric'] = critical_value_numeric(model)
    report['model'] = model.to_dict()
    predictions = predict_curve(model, config.alpha_grid())
    outputs = {'crit.json': report,
               'predictions.csv': predictions_frame(model, predictions)}
    if 'theta_grid' in config.experiment or 'pi0_grid' in config.experiment:
        # A missing axis is pinned to the model's value.
        outputs['crit_grid.csv'] = critical_value_surface(
            model.family, config.get('theta_grid', [model.family.theta]),
            config.get('pi0_grid', [model.pi0]))
    return outputs


def run_dist(config, n_workers):
    model = config.mixture_model()
    family = model.family
    points = config.get('points', DEFAULT_POINTS)
    levels = np.linspace(0, 1, points + 2)[1:-1]
    t = f0_quantile(family, levels)
    statistic = pd.DataFrame({'t': t, 'f0_pdf': f0_pdf(family, t),
                              'f1_pdf': f1_pdf(family, t),
                              'f0_cdf': f0_cdf(family, t),
                              'f1_cdf': f1_cdf(family, t),
                              'likelihood_ratio': likelihood_ratio(family, t)})
    u = np.linspace(0, 1, points)
    with np.errstate(divide='ignore', invalid='ignore'):
        pvalue = pd.DataFrame({'u': u, 'g1_cdf': g1_cdf(model, u),
                               'g1_pdf': g1_pdf(model, u),
                               'g_cdf': mixture_cdf(model, u),
                               'g_pdf': mixture_pdf(model, u),
                               'bh_ratio': bh_ratio(model, u)})
    return {'dist_statistic.csv': statistic, 'dist_pvalue.csv': pvalue}


def run_simulate(config, n_workers):
    procedure = 'plug_in' if 'estimator' in config.experiment else 'standard'
    quantiles = config.get('quantiles')
    simulation = SimulationConfig(
        model=config.mixture_model(), m=_require(config, 'm'),
        B=_require(config, 'B'), alpha_grid=config.alpha_grid(),
        seed=config.get('seed', 0), procedure=procedure,
        estimator=config.estimator(),
        bernoulli=config.get('bernoulli_labels', False),
        strict_level=config.get('strict_level', False),
        **({} if quantiles is None else {'quantiles': tuple(quantiles)}))
    summary = run(simulation, n_workers=n_workers)
    return {'simulation.csv': summary.to_frame(),
            'simulation.json': summary.to_dict(),
            'pvalues.csv': pvalues_frame(*replicate_sample(simulation, 0))}


def _read_pvalues(path):
    frame = pd.read_csv(path)
    column = 'pvalue' if 'pvalue' in frame.columns else frame.columns[0]
    return frame[column].values.astype(float)


def run_pi0(config, n_workers):
    model = config.mixture_model()
    estimator = config.estimator() or \
        Pi0Estimator.from_dict(DEFAULT_ESTIMATOR)
    outputs = {}
    if 'pvalues' in config.experiment:
        pvalues = _read_pvalues(config.get('pvalues'))
    else:
        pvalues, is_null = sample_pvalues(
            model, _require(config, 'm'), config.get('seed', 0),
            bernoulli=config.get('bernoulli_labels', False))
        outputs['pvalues.csv'] = pvalues_frame(pvalues, is_null)
    estimate = estimator.estimate(pvalues)
    result = {'estimator': estimator.to_dict(), 'estimate': estimate.to_dict(),
              'm': pvalues.size, 'pi0': model.pi0, 'pi0_bar': pi0_bar(model)}
    if 'alpha_grid' in config.experiment or \
            'alpha_range' in config.experiment:
        # Plug-in rejection sets at each configured level.
        alphas = config.alpha_grid()
        result['rejections'] = []
        for k, alpha in enumerate(alphas):
            outcome = plug_in_bh(pvalues, alpha, estimate.value,
                                 strict=config.get('strict_level', False))
            name = ('rejections.csv' if len(alphas) == 1 else
                    'rejections_%d.csv' % k)
            outputs[name] = rejection_frame(outcome, pvalues)
            result['rejections'].append(
                {'file': name, 'alpha': alpha,
                 'effective_level': outcome.effective_level, 'R': outcome.r})
    try:
        result['bias'] = bias_report(model, estimator.k or 1,
                                     estimate.bandwidth)
    except ValueError as exception:
        logger.info('No bias prediction: %s', exception)
        result['bias'] = None
    outputs['pi0.json'] = result
    return outputs


def run_fdp_law(config, n_workers):
    model = config.mixture_model()
    estimator = config.estimator() or \
        Pi0Estimator.from_dict(DEFAULT_ESTIMATOR)
    tables = []
    standardized = []
    for alpha in config.alpha_grid():
        result = fdp_law_experiment(model, alpha, estimator,
                                    _require(config, 'm_list'),
                                    _require(config, 'B'),
                                    seed=config.get('seed', 0),
                                    n_workers=n_workers)
        tables.append(result.table.assign(alpha=alpha))
        standardized.append(result.standardized_frame().assign(alpha=alpha))
    table = pd.concat(tables, ignore_index=True)
    table = table[['alpha'] + [c for c in table.columns if c != 'alpha']]
    series = pd.concat(standardized, ignore_index=True)
    series = series[['alpha', 'm', 'replicate', 'statistic']]
    return {'fdp_law.csv': table, 'fdp_law_standardized.csv': series}


def run_ttest(config, n_workers):
    model = config.model
    if 'delta' not in model:
        raise ConfigError('`ttest` needs a Student model given by `delta`, '
                          '`n_x` and `n_y`.', '$.model')
    seed = config.get('seed', 0)
    if 'data' in config.experiment:
        data = TwoSampleDataset.from_csv(config.get('data'),
                                         config.get('labels'))
    else:
        data = TwoSampleDataset.synthetic(model['delta'], model['pi0'],
                                          _require(config, 'm'), model['n_x'],
                                          model['n_y'], seed)
    plan = ResamplingPlan(config.get('rates', [1.]), config.get('B', 100),
                          seed)
    observed, asymptote = rejection_curve(data, config.alpha_grid(), plan,
                                          model['delta'], model['pi0'],
                                          n_workers=n_workers)
    return {'ttest_observed.csv': observed,
            'ttest_asymptote.csv': asymptote,
            'ttest_median.csv': median_curve(observed)}


RUNNERS = {'crit': run_crit, 'dist': run_dist, 'simulate': run_simulate,
           'pi0': run_pi0, 'fdp-law': run_fdp_law, 'ttest': run_ttest}


def main(argv=None):
    '''
    Run a subcommand.

    Returns
    -------
    int
        Exit code.
    '''
    try:
        args = parse_args(argv)
    except SystemExit as exception:
        return exception.code

    logging.basicConfig(level=args.log_level)
    try:
        config = resolve_config(args)
        outputs = RUNNERS[config.command](config, args.threads)
    except ConfigError as exception:
        logger.error('Invalid configuration: %s', exception)
        return 2
    except Exception:
        logger.exception('`%s` failed.', args.command)
        return 1
    outputs['config.json'] = config.to_dict()
    try:
        write_outputs(config.output.get('dir', DEFAULT_OUTPUT_DIR), outputs)
    except (IOError, OSError):
        logger.exception('Could not write outputs.')
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
