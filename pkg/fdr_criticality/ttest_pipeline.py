'''
Two-sample Student testing of feature-by-sample data matrices.

Each feature (row) is tested with the pooled-variance two-sample statistic

.. math::

    T = \\frac{\\bar Y - \\bar X}{S_{XY} \\sqrt{1/n_X + 1/n_Y}}

which is central Student with ``n_X + n_Y - 2`` degrees of freedom under the
null.  :func:`rejection_curve` repeats the Benjamini-Hochberg procedure on
column subsamples of the data and compares the observed rejection fractions
with the asymptotic ones of the matching two-sided Student mixture.
'''
from dataclasses import dataclass
import logging

import arrow
import numpy as np
import pandas as pd
from scipy import stats

from .asymptotics import predict
from .distributions import EffectSpec, subsample_sizes
from .procedures import bh95
from .pvalues import MixtureModel, Sidedness, null_count
from .simulation import map_replicates
from .streams import rate_key, substream

logger = logging.getLogger(__name__)

GROUPS = ('X', 'Y')


class TwoSampleDataset(object):
    '''
    Data matrix with one row per feature and one column per sample.

    Parameters
    ----------
    matrix : array_like
        Shape ``(m, n)``, finite values.
    groups : array_like
        ``n`` labels, each ``'X'`` or ``'Y'``.
    feature_ids : array_like, optional
        ``m`` feature names (default ``'0', '1', ...``).
    is_null : array_like, optional
        Ground-truth labels of synthetic data.
    '''
    def __init__(self, matrix, groups, feature_ids=None, is_null=None):
        self.matrix = np.asarray(matrix, dtype=float)
        if self.matrix.ndim != 2 or not self.matrix.size:
            raise ValueError('Expected a non-empty two-dimensional matrix.')
        if not np.isfinite(self.matrix).all():
            rows = np.flatnonzero(~np.isfinite(self.matrix).all(axis=1))
            raise ValueError('Missing or non-finite values in %d feature(s), '
                             'first at row %d.' % (rows.size, rows[0]))
        self.groups = np.asarray(groups, dtype=str)
        if self.groups.shape != (self.matrix.shape[1], ):
            raise ValueError('Expected %d group labels, got %d.' %
                             (self.matrix.shape[1], self.groups.size))
        unknown = sorted(set(self.groups) - set(GROUPS))
        if unknown:
            raise ValueError('Unknown group label(s): %s' % ', '.join(unknown))
        if min(self.n_x, self.n_y) < 2:
            raise ValueError('Each group needs at least 2 samples, got '
                             'n_x=%d, n_y=%d.' % (self.n_x, self.n_y))
        if feature_ids is None:
            feature_ids = [str(i) for i in range(self.m)]
        self.feature_ids = np.asarray(feature_ids, dtype=str)
        if self.feature_ids.shape != (self.m, ):
            raise ValueError('Expected %d feature ids, got %d.' %
                             (self.m, self.feature_ids.size))
        self.is_null = (None if is_null is None else
                        np.asarray(is_null, dtype=bool))

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def x_columns(self):
        return np.flatnonzero(self.groups == 'X')

    @property
    def y_columns(self):
        return np.flatnonzero(self.groups == 'Y')

    @property
    def n_x(self):
        return self.x_columns.size

    @property
    def n_y(self):
        return self.y_columns.size

    @property
    def df(self):
        return self.n_x + self.n_y - 2

    def columns(self, columns):
        '''
        Dataset restricted to the given sample columns.
        '''
        columns = np.asarray(columns)
        return TwoSampleDataset(self.matrix[:, columns], self.groups[columns],
                                self.feature_ids, self.is_null)

    @classmethod
    def from_csv(cls, data_path, labels_path):
        '''
        Read a data matrix and its sample labels.

        Parameters
        ----------
        data_path : str
            CSV file; first column feature id, remaining columns samples
            (header row holds the sample ids).
        labels_path : str
            CSV file with columns ``sample_id,group``.
        '''
        frame = pd.read_csv(data_path, index_col=0)
        labels = pd.read_csv(labels_path, dtype={'sample_id': str,
                                                 'group': str})
        missing = set(frame.columns) - set(labels['sample_id'])
        if missing:
            raise ValueError('No group label for sample(s): %s' %
                             ', '.join(sorted(missing)))
        groups = labels.set_index('sample_id')['group'].reindex(frame.columns)
        if frame.isnull().values.any():
            raise ValueError('Missing values in `%s`.' % data_path)
        return cls(frame.values, groups.values,
                   frame.index.astype(str).values)

    @classmethod
    def synthetic(cls, delta, pi0, m, n_x, n_y, seed, sigma=1.):
        '''
        Gaussian data with ``round(pi0 m)`` null features.

        Alternative features are shifted by ``delta * sigma`` in group ``Y``,
        with a random sign.  The ``n_x`` group ``X`` columns come first.
        '''
        if not sigma > 0:
            raise ValueError('sigma must be positive, got %r' % sigma)
        random_state = substream(seed)
        m0 = null_count(pi0, m)
        is_null = np.zeros(m, dtype=bool)
        is_null[random_state.permutation(m)[:m0]] = True
        matrix = sigma * random_state.standard_normal((m, n_x + n_y))
        signs = random_state.choice([-1., 1.], size=m - m0)
        matrix[~is_null, n_x:] += (delta * sigma * signs)[:, None]
        groups = ['X'] * n_x + ['Y'] * n_y
        return cls(matrix, groups, is_null=is_null)


def t_statistics(data):
    '''
    Pooled-variance two-sample statistics, one per feature.

    Raises
    ------
    ValueError
        If a feature has zero pooled variance.

    Examples
    --------

    >>> data = TwoSampleDataset([[-1, 1, 0, 2]], ['X', 'X', 'Y', 'Y'])
    >>> round(float(t_statistics(data)[0]), 4)
    0.7071
    '''
    x = data.matrix[:, data.x_columns]
    y = data.matrix[:, data.y_columns]
    n_x, n_y = data.n_x, data.n_y
    pooled = ((n_x - 1) * x.var(axis=1, ddof=1) +
              (n_y - 1) * y.var(axis=1, ddof=1)) / (n_x + n_y - 2)
    degenerate = np.flatnonzero(~(pooled > 0))
    if degenerate.size:
        raise ValueError('Zero pooled variance for feature `%s`.' %
                         data.feature_ids[degenerate[0]])
    return ((y.mean(axis=1) - x.mean(axis=1)) /
            np.sqrt(pooled * (1. / n_x + 1. / n_y)))


def two_sided_pvalues(tstats, df):
    '''
    ``2 (1 - F(|t|))`` for the central Student cdf ``F`` with ``df`` degrees
    of freedom.
    '''
    if not df >= 1:
        raise ValueError('df must be >= 1, got %r' % df)
    tstats = np.asarray(tstats, dtype=float)
    return np.minimum(2 * stats.t.sf(np.abs(tstats), df), 1.)


@dataclass(frozen=True)
class ResamplingPlan:
    '''
    Parameters
    ----------
    rates : tuple of float
        Column subsampling rates in ``(0, 1]``.
    B : int
        Resamples per rate below 1 (rate ``1.0`` is the full data set, a
        single replicate).
    seed : int
    '''
    rates: tuple
    B: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'rates', tuple(float(r) for r in self.rates))
        if not self.rates:
            raise ValueError('At least one resampling rate is required.')
        for rate in self.rates:
            if not 0 < rate <= 1:
                raise ValueError('Resampling rate must be in (0, 1], got %r'
                                 % rate)
        if int(self.B) != self.B or self.B < 1:
            raise ValueError('B must be a positive integer, got %r' % self.B)

    def replicates(self, rate):
        return 1 if rate == 1 else self.B

    def sizes(self, data, rate):
        return subsample_sizes(data.n_x, data.n_y, rate)

    def subsample_indices(self, data, rate, b):
        '''
        Sorted column indices of resample ``b`` at ``rate``, drawn without
        replacement within each group.
        '''
        n_x, n_y = self.sizes(data, rate)
        if rate == 1:
            return np.arange(data.groups.size)
        random_state = substream(self.seed, rate_key(rate), b)
        x = random_state.choice(data.x_columns, size=n_x, replace=False)
        y = random_state.choice(data.y_columns, size=n_y, replace=False)
        return np.sort(np.concatenate([x, y]))

    def to_dict(self):
        return {'rates': list(self.rates), 'B': self.B, 'seed': self.seed}


def _resample(arguments):
    data, alpha_grid, plan, rate, b = arguments
    subset = data.columns(plan.subsample_indices(data, rate, b))
    pvalues = two_sided_pvalues(t_statistics(subset), subset.df)
    return [bh95(pvalues, alpha).rho for alpha in alpha_grid]


def rejection_curve(data, alpha_grid, plan, delta, pi0, n_workers=1):
    '''
    Observed and asymptotic rejection fractions under column resampling.

    Parameters
    ----------
    data : TwoSampleDataset
    alpha_grid : sequence of float
    plan : ResamplingPlan
    delta : float
        Standardized effect of the reference Student mixture.
    pi0 : float
        Null proportion of the reference mixture.
    n_workers : int, optional

    Returns
    -------
    observed : pandas.DataFrame
        Columns ``rate, replicate, alpha, rho``.
    asymptote : pandas.DataFrame
        Columns ``rate, alpha, rho_inf`` for the two-sided Student mixture
        with ``theta`` and ``df`` of the subsampled group sizes.
    '''
    alpha_grid = [float(alpha) for alpha in alpha_grid]
    # Validate every rate before any resample is drawn.
    effects = {rate: EffectSpec(delta, data.n_x, data.n_y).subsample(rate)
               for rate in plan.rates}
    start = arrow.utcnow()
    logger.info('Rejection curve started at %s: %d feature(s), rates %s.',
                start.isoformat(), data.m, list(plan.rates))
    jobs = [(rate, b) for rate in plan.rates
            for b in range(plan.replicates(rate))]
    arguments = [(data, alpha_grid, plan, rate, b) for rate, b in jobs]
    results = map_replicates(_resample, arguments, n_workers=n_workers)
    observed = pd.DataFrame([(rate, b, alpha, rho)
                             for (rate, b), rhos in zip(jobs, results)
                             for alpha, rho in zip(alpha_grid, rhos)],
                            columns=['rate', 'replicate', 'alpha', 'rho'])
    rows = []
    for rate, effect in effects.items():
        model = MixtureModel(pi0, effect.family(), Sidedness.TWO)
        logger.debug('Rate %g: sizes (%d, %d), theta=%.4g, df=%d.', rate,
                     effect.n_x, effect.n_y, effect.theta, effect.df)
        rows.extend((rate, alpha, predict(model, alpha).rho_inf)
                    for alpha in alpha_grid)
    asymptote = pd.DataFrame(rows, columns=['rate', 'alpha', 'rho_inf'])
    logger.info('Rejection curve finished in %s.',
                start.humanize(arrow.utcnow(), only_distance=True))
    return observed, asymptote


def median_curve(observed):
    '''
    Median observed rejection fraction per ``(rate, alpha)``.
    '''
    return (observed.groupby(['rate', 'alpha'], sort=False)['rho'].median()
            .reset_index())
