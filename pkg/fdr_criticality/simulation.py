'''
Monte Carlo experiments comparing finite-``m`` step-up procedures with
their asymptotic predictions.

Replicate ``b`` of :func:`run` draws its p-values from the substream
``(seed, b)``; replicate ``b`` of :func:`fdp_law_experiment` at size ``m``
draws from ``(seed, m, b)``.  Replicates are independent of scheduling, so
results are identical for any number of workers.
'''
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import itertools
import logging
import math

import arrow
import numpy as np
import pandas as pd
from scipy import stats

from .asymptotics import (AsymptoticPrediction, CriticalRegimeError, predict,
                          predict_plug_in)
from .criticality import critical_value_closed_form, pi0_bar
from .procedures import account, bh95, plug_in_bh
from .pvalues import sample_pvalues

logger = logging.getLogger(__name__)

PROCEDURES = ('standard', 'plug_in')
METRICS = ('power', 'fdp', 'rho')
DEFAULT_QUANTILES = (0.05, 0.5, 0.95)
#: Quantile convention recorded in the output metadata.
QUANTILE_METHOD = 'linear'
SEED_RULE = ('replicate b draws from Philox(SeedSequence(seed, '
             'spawn_key=keys))')


def _strictly_increasing(values):
    values = np.asarray(values, dtype=float)
    return values.ndim == 1 and bool(np.all(np.diff(values) > 0))


@dataclass(frozen=True)
class SimulationConfig:
    '''
    Parameters
    ----------
    model : MixtureModel
    m : int
        Hypotheses per replicate.
    B : int
        Number of replicates.
    alpha_grid : tuple of float
        Strictly increasing levels in ``(0, 1]``.
    seed : int
    procedure : str, optional
        ``'standard'`` or ``'plug_in'``.
    estimator : Pi0Estimator, optional
        Required for ``'plug_in'``.
    quantiles : tuple of float, optional
    bernoulli : bool, optional
        Draw labels independently instead of exactly ``round(pi0 m)`` nulls.
    strict_level : bool, optional
        Raise instead of clamping plug-in levels above 1.
    '''
    model: object
    m: int
    B: int
    alpha_grid: tuple
    seed: int
    procedure: str = 'standard'
    estimator: object = None
    quantiles: tuple = DEFAULT_QUANTILES
    bernoulli: bool = False
    strict_level: bool = False

    def __post_init__(self):
        for name in ('m', 'B'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError('%s must be a positive integer, got %r' %
                                 (name, value))
        object.__setattr__(self, 'alpha_grid',
                           tuple(float(a) for a in self.alpha_grid))
        object.__setattr__(self, 'quantiles',
                           tuple(float(q) for q in self.quantiles))
        if not self.alpha_grid or not _strictly_increasing(self.alpha_grid):
            raise ValueError('alpha_grid must be non-empty and strictly '
                             'increasing.')
        if not all(0 < a <= 1 for a in self.alpha_grid):
            raise ValueError('alpha_grid values must lie in (0, 1].')
        if not _strictly_increasing(self.quantiles) or \
                not all(0 < q < 1 for q in self.quantiles):
            raise ValueError('quantiles must be strictly increasing in '
                             '(0, 1).')
        if self.procedure not in PROCEDURES:
            raise ValueError('Unknown procedure `%s`.' % self.procedure)
        if self.procedure == 'plug_in' and self.estimator is None:
            raise ValueError('The plug-in procedure needs an estimator.')

    @property
    def quantile_labels(self):
        return ['q%02d' % round(100 * q) for q in self.quantiles]

    def to_dict(self):
        value = {'model': self.model.to_dict(), 'm': self.m, 'B': self.B,
                 'alpha_grid': list(self.alpha_grid), 'seed': self.seed,
                 'procedure': self.procedure,
                 'quantiles': list(self.quantiles),
                 'bernoulli_labels': self.bernoulli,
                 'strict_level': self.strict_level}
        if self.estimator is not None:
            value['estimator'] = self.estimator.to_dict()
        return value


@dataclass(frozen=True)
class AlphaSummary:
    '''
    Replicate statistics at one level.
    '''
    alpha: float
    power_quantiles: tuple
    fdp_quantiles: tuple
    rho_quantiles: tuple
    mean_power: float
    mean_fdp: float
    mean_rho: float
    asymptotic: AsymptoticPrediction


@dataclass
class SimulationSummary:
    config: SimulationConfig
    records: list
    metadata: dict = field(default_factory=dict)

    def to_frame(self):
        '''
        Long table with columns ``alpha, metric, <quantiles>, mean,
        asymptotic``.
        '''
        labels = self.config.quantile_labels
        rows = []
        for record in self.records:
            asymptotic = {'power': record.asymptotic.pi_inf,
                          'fdp': record.asymptotic.fdp_limit,
                          'rho': record.asymptotic.rho_inf}
            for metric in METRICS:
                row = {'alpha': record.alpha, 'metric': metric}
                row.update(zip(labels, getattr(record,
                                               metric + '_quantiles')))
                row['mean'] = getattr(record, 'mean_' + metric)
                row['asymptotic'] = asymptotic[metric]
                rows.append(row)
        return pd.DataFrame(rows, columns=['alpha', 'metric'] + labels +
                            ['mean', 'asymptotic'])

    def to_dict(self):
        return {'config': self.config.to_dict(), 'metadata': self.metadata,
                'records': [asdict(record) for record in self.records]}


###########################################################################
# Replicates
def replicate_sample(config, b):
    '''
    Labeled p-values drawn by replicate ``b`` of a simulation.
    '''
    return sample_pvalues(config.model, config.m, config.seed,
                          stream_keys=(b, ), bernoulli=config.bernoulli)


def _replicate(config, b):
    '''
    Power, FDP and rejection fraction of replicate ``b`` at every level.
    '''
    pvalues, is_null = replicate_sample(config, b)
    pi0_hat = None
    if config.procedure == 'plug_in':
        pi0_hat = config.estimator.estimate(pvalues).value
    result = np.empty((len(METRICS), len(config.alpha_grid)))
    for j, alpha in enumerate(config.alpha_grid):
        if pi0_hat is None:
            outcome = bh95(pvalues, alpha)
        else:
            outcome = plug_in_bh(pvalues, alpha, pi0_hat,
                                 strict=config.strict_level)
        outcome = account(outcome, is_null)
        result[:, j] = (np.nan if outcome.power is None else outcome.power,
                        outcome.fdp, outcome.rho)
    return result


def _replicate_star(arguments):
    return _replicate(*arguments)


def map_replicates(function, arguments, n_workers=1):
    '''
    Apply ``function`` to each argument tuple, in order.

    ``n_workers > 1`` runs the calls in a process pool; the returned list is
    in argument order either way.
    '''
    arguments = list(arguments)
    if n_workers is None or n_workers <= 1 or len(arguments) <= 1:
        return [function(a) for a in arguments]
    chunksize = max(1, len(arguments) // (4 * n_workers))
    with ProcessPoolExecutor(max_workers=n_workers) as executor:
        return list(executor.map(function, arguments, chunksize=chunksize))


def quantiles(values, levels):
    '''
    Empirical quantiles (linear interpolation of order statistics) ignoring
    ``nan`` entries; all ``nan`` if no finite value is present.
    '''
    values = np.asarray(values, dtype=float)
    values = values[~np.isnan(values)]
    if not values.size:
        return tuple(np.nan for _ in levels)
    return tuple(float(q) for q in np.quantile(values, levels,
                                               method=QUANTILE_METHOD))


def _mean(values):
    values = np.asarray(values, dtype=float)
    values = values[~np.isnan(values)]
    return float(values.mean()) if values.size else np.nan


def _prediction(config, alpha):
    if config.procedure == 'standard':
        return predict(config.model, alpha)
    h_m = config.estimator.bandwidth(config.m) if config.m >= 2 else None
    try:
        return predict_plug_in(config.model, alpha, h_m=h_m, m=config.m)
    except CriticalRegimeError:
        return AsymptoticPrediction.null(alpha, pi0_bar(config.model))


def run(config, n_workers=1):
    '''
    Run a simulation and summarize it per level.

    Parameters
    ----------
    config : SimulationConfig
    n_workers : int, optional
        Number of worker processes (affects wall time only).

    Returns
    -------
    SimulationSummary
    '''
    start = arrow.utcnow()
    logger.info('Simulation started at %s: %d replicate(s) of m=%d, %d '
                'level(s).', start.isoformat(), config.B, config.m,
                len(config.alpha_grid))
    results = np.stack(map_replicates(_replicate_star,
                                      zip(itertools.repeat(config),
                                          range(config.B)),
                                      n_workers=n_workers))
    records = []
    for j, alpha in enumerate(config.alpha_grid):
        power, fdp, rho = (results[:, i, j] for i in range(len(METRICS)))
        records.append(AlphaSummary(alpha=alpha,
                                    power_quantiles=quantiles(
                                        power, config.quantiles),
                                    fdp_quantiles=quantiles(
                                        fdp, config.quantiles),
                                    rho_quantiles=quantiles(
                                        rho, config.quantiles),
                                    mean_power=_mean(power),
                                    mean_fdp=_mean(fdp),
                                    mean_rho=_mean(rho),
                                    asymptotic=_prediction(config, alpha)))
    metadata = {'seed_rule': SEED_RULE, 'stream_keys': '(b, )',
                'quantile_method': QUANTILE_METHOD,
                'alpha_star': critical_value_closed_form(config.model),
                'pi0_bar': pi0_bar(config.model)}
    logger.info('Simulation finished in %s.',
                start.humanize(arrow.utcnow(), only_distance=True))
    return SimulationSummary(config, records, metadata)


###########################################################################
# Plug-in FDP limit law
@dataclass
class FdpLawResult:
    '''
    Attributes
    ----------
    table : pandas.DataFrame
        One row per ``m``.
    standardized : dict
        Maps ``m`` to the array ``sqrt(m h_m) (FDP_b - mean FDP)``.
    '''
    table: pd.DataFrame
    standardized: dict

    def standardized_frame(self):
        frames = [pd.DataFrame({'m': m, 'replicate': np.arange(values.size),
                                'statistic': values})
                  for m, values in self.standardized.items()]
        return pd.concat(frames, ignore_index=True)


def _fdp_replicate(arguments):
    model, alpha, estimator, m, seed, b = arguments
    pvalues, is_null = sample_pvalues(model, m, seed, stream_keys=(m, b))
    pi0_hat = estimator.estimate(pvalues).value
    return account(plug_in_bh(pvalues, alpha, pi0_hat), is_null).fdp


def anderson_normality(values):
    '''
    Anderson-Darling statistic against the normal family and its critical
    value at the 1% level.

    Returns ``(nan, nan)`` for fewer than 8 values or a constant sample.
    '''
    values = np.asarray(values, dtype=float)
    if values.size < 8 or not np.std(values) > 0:
        return np.nan, np.nan
    result = stats.anderson(values, dist='norm')
    levels = list(result.significance_level)
    return (float(result.statistic),
            float(result.critical_values[levels.index(1.)]))


def fdp_law_experiment(model, alpha, estimator, m_list, B, seed=0,
                       n_workers=1):
    '''
    Finite-``m`` distribution of the plug-in FDP against its limit law.

    For each ``m``, ``B`` replicates of the plug-in procedure are run; the
    table reports the empirical mean and variance of the FDP, the variance
    scaled by ``m h_m``, the predicted limit and scaled variance, and an
    Anderson-Darling normality check of the standardized fluctuations.

    Pure null models (``pi0 = 1``) run without predictions (``nan``).

    Raises
    ------
    CriticalRegimeError
        If ``pi0 < 1`` and ``alpha <= pi0_bar * alpha_star``.
    '''
    if int(B) != B or B < 1:
        raise ValueError('B must be a positive integer, got %r' % B)
    if model.pi0 < 1:
        # Fail before any replicate is drawn.
        predict_plug_in(model, alpha)
    start = arrow.utcnow()
    logger.info('FDP law experiment started at %s: m in %s, B=%d.',
                start.isoformat(), list(m_list), B)
    rows = []
    standardized = {}
    for m in m_list:
        m = int(m)
        h_m = estimator.bandwidth(m)
        fdp = np.array(map_replicates(_fdp_replicate,
                                      [(model, alpha, estimator, m, seed, b)
                                       for b in range(B)],
                                      n_workers=n_workers))
        mean = float(fdp.mean())
        variance = float(fdp.var(ddof=1)) if B > 1 else np.nan
        if model.pi0 < 1:
            prediction = predict_plug_in(model, alpha, h_m=h_m, m=m)
            limit = prediction.fdp_limit
            predicted_variance = prediction.fdp_scaled_variance
        else:
            limit = predicted_variance = np.nan
        series = math.sqrt(m * h_m) * (fdp - mean)
        standardized[m] = series
        statistic, critical = anderson_normality(series)
        rows.append({'m': m, 'bandwidth': h_m, 'B': B, 'mean_fdp': mean,
                     'var_fdp': variance,
                     'mc_se': math.sqrt(variance / B) if B > 1 else np.nan,
                     'scaled_var': m * h_m * variance,
                     'fdp_limit': limit,
                     'predicted_scaled_var': predicted_variance,
                     'ad_statistic': statistic,
                     'ad_critical_1pct': critical,
                     'normal_at_1pct': bool(statistic < critical)})
        logger.debug('m=%d: mean FDP %.6g (limit %.6g).', m, mean, limit)
    logger.info('FDP law experiment finished in %s.',
                start.humanize(arrow.utcnow(), only_distance=True))
    return FdpLawResult(pd.DataFrame(rows), standardized)
