'''
Large-``m`` limits of step-up procedures.

For a reference proportion ``r`` (``r = 1`` for the standard procedure and
``r = pi0_bar`` for plug-in procedures), the rejection threshold converges
to the rightmost crossing

.. math::

    t^\\star = \\sup\\{t \\in [0, 1] : G(t) \\geq r t / \\alpha\\}

which is 0 when ``alpha / r`` does not exceed the critical value.  The
rejection fraction converges to ``G(t*)`` and the power to
``(G(t*) - pi0 t*) / (1 - pi0)``.

Plug-in procedures with an estimator converging at rate ``sqrt(m h_m)``
have an asymptotically normal FDP::

    sqrt(m h_m) (FDP - pi0 alpha / pi0_bar)
        -> N(0, (pi0 alpha / pi0_bar)**2 v(pi0_bar) / pi0_bar**2)
'''
from dataclasses import asdict, dataclass, field
from functools import lru_cache
import logging
import math

import numpy as np
import pandas as pd
from scipy import optimize

from .criticality import critical_value_closed_form, pi0_bar
from .pvalues import mixture_cdf, mixture_pdf

logger = logging.getLogger(__name__)

#: Number of linearly spaced scan points on ``[1e-4, 1]``.
SCAN_POINTS = 10 ** 4
#: Geometric continuation of the scan down to this threshold.
SCAN_FLOOR = 1e-14
CROSSING_TOLERANCE = 1e-12


class CriticalRegimeError(ValueError):
    '''
    Raised when a plug-in prediction is requested at or below
    ``pi0_bar * alpha_star``.
    '''
    pass


@dataclass(frozen=True)
class AsymptoticPrediction:
    '''
    Attributes
    ----------
    alpha : float
        Target level.
    pi0_ref : float
        Reference proportion of the crossing (1 for the standard procedure).
    t_star : float
        Limit of the rejection threshold.
    rho_inf : float
        Limit of the rejection fraction.
    pi_inf : float
        Limit of the power.
    fdp_limit : float
        Limit of the FDP.
    fdp_scaled_variance : float, optional
        Variance of ``sqrt(m h_m) (FDP - fdp_limit)`` (plug-in only).
    metadata : dict
    '''
    alpha: float
    pi0_ref: float
    t_star: float
    rho_inf: float
    pi_inf: float
    fdp_limit: float
    fdp_scaled_variance: float = None
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def null(cls, alpha, pi0_ref=1., **metadata):
        '''
        Sub-critical prediction: nothing is rejected in the limit.
        '''
        return cls(alpha, pi0_ref, 0., 0., 0., 0., metadata=metadata)

    def to_dict(self):
        return asdict(self)


@lru_cache(maxsize=64)
def _scan_grid(model):
    '''
    Mixture cdf tabulated on the downward scan grid ``1 -> SCAN_FLOOR``.
    '''
    linear = np.linspace(1, 1e-4, SCAN_POINTS)
    geometric = np.geomspace(1e-4, SCAN_FLOOR, 400)[1:]
    grid = np.concatenate([linear, geometric])
    values = mixture_cdf(model, grid)
    grid.setflags(write=False)
    values.setflags(write=False)
    return grid, values


def _check_arguments(alpha, pi0_ref):
    if not 0 < alpha <= 1:
        raise ValueError('alpha must be in (0, 1], got %r' % alpha)
    if not 0 < pi0_ref <= 1:
        raise ValueError('pi0_ref must be in (0, 1], got %r' % pi0_ref)


def t_star(model, alpha, pi0_ref=1.):
    '''
    Rightmost crossing of ``G(t)`` and ``pi0_ref * t / alpha``.

    The crossing is located by scanning ``t`` downward from 1 for the first
    point with ``G(t) >= pi0_ref * t / alpha``, then solved with
    :func:`scipy.optimize.brentq` to an absolute tolerance of ``1e-12``.

    Returns
    -------
    float
        ``0`` when ``alpha / pi0_ref`` does not exceed the critical value
        (equality included).

    Examples
    --------

    >>> from fdr_criticality.distributions import AlternativeFamily
    >>> from fdr_criticality.pvalues import MixtureModel
    >>> model = MixtureModel(0.75, AlternativeFamily.laplace(2))
    >>> t_star(model, 0.3)  # below alpha_star ~ 0.385
    0.0
    '''
    _check_arguments(alpha, pi0_ref)
    if alpha / pi0_ref <= critical_value_closed_form(model):
        return 0.
    slope = pi0_ref / alpha

    def gap(t):
        return mixture_cdf(model, t) - slope * t

    if gap(1.) >= 0:
        return 1.
    grid, values = _scan_grid(model)
    above = np.flatnonzero(values - slope * grid >= 0)
    if not above.size:
        logger.debug('No crossing above %g for alpha=%g, pi0_ref=%g.',
                     SCAN_FLOOR, alpha, pi0_ref)
        return 0.
    first = above[0]
    lower, upper = grid[first], grid[first - 1]
    if gap(lower) == 0:
        return float(lower)
    return float(optimize.brentq(gap, lower, upper, xtol=CROSSING_TOLERANCE,
                                 rtol=4 * np.finfo(float).eps))


def predict(model, alpha):
    '''
    Limits of the standard step-up procedure at level ``alpha``.

    Above the critical value ``fdp_limit = pi0 alpha`` and
    ``pi_inf = (1 - pi0 alpha) / (1 - pi0) * rho_inf``; at or below it the
    prediction is all zero.
    '''
    alpha_star = critical_value_closed_form(model)
    _check_arguments(alpha, 1.)
    if alpha <= alpha_star:
        return AsymptoticPrediction.null(alpha, alpha_star=alpha_star)
    threshold = t_star(model, alpha)
    rho = float(mixture_cdf(model, threshold))
    power = (1 - model.pi0 * alpha) / (1 - model.pi0) * rho
    return AsymptoticPrediction(alpha, 1., threshold, rho, min(power, 1.),
                                model.pi0 * alpha,
                                metadata={'alpha_star': alpha_star})


def predict_curve(model, alphas):
    '''
    :func:`predict` over a grid of levels.
    '''
    return [predict(model, alpha) for alpha in alphas]


#: Columns of :func:`predictions_frame`; the first five key each row.
PREDICTION_COLUMNS = ['family', 'theta', 'pi0', 'sidedness', 'alpha',
                      't_star', 'rho_inf', 'pi_inf', 'fdp_limit']


def predictions_frame(model, predictions):
    '''
    Predictions as rows keyed by ``(family, theta, pi0, sidedness, alpha)``.

    Parameters
    ----------
    model : MixtureModel
    predictions : list of AsymptoticPrediction
        E.g., the output of :func:`predict_curve`.
    '''
    rows = [{'family': model.family.kind, 'theta': model.family.theta,
             'pi0': model.pi0, 'sidedness': model.sidedness.value,
             'alpha': p.alpha, 't_star': p.t_star, 'rho_inf': p.rho_inf,
             'pi_inf': p.pi_inf, 'fdp_limit': p.fdp_limit}
            for p in predictions]
    return pd.DataFrame(rows, columns=PREDICTION_COLUMNS)


def _bandwidth_condition(h_m, m):
    '''
    ``h_m ln ln m``, which must vanish for the FDP limit law to hold.
    '''
    if h_m is None or m is None or m <= math.e:
        return None
    return h_m * math.log(math.log(m))


def _check_plug_in_regime(model, alpha):
    reachable = pi0_bar(model)
    alpha_star = critical_value_closed_form(model)
    if alpha <= reachable * alpha_star:
        raise CriticalRegimeError('critical regime: alpha=%g does not exceed '
                                  'pi0_bar * alpha_star = %g' %
                                  (alpha, reachable * alpha_star))
    return reachable, alpha_star


def predict_plug_in(model, alpha, h_m=None, v_fn=None, m=None):
    '''
    Limits of the plug-in procedure ``BH(alpha / pi0_hat)``.

    Parameters
    ----------
    model : MixtureModel
    alpha : float
    h_m : float, optional
        Estimator bandwidth, recorded as metadata.
    v_fn : callable, optional
        Asymptotic variance ``v(pi0_bar)`` of ``sqrt(m h_m) (pi0_hat -
        pi0_bar)``.  Defaults to ``v(x) = x`` (Storey-type estimators).
    m : int, optional
        Number of hypotheses the bandwidth applies to.  Together with
        ``h_m`` it is used to check ``h_m = o(1 / ln ln m)``; a violation is
        logged as a warning.

    Returns
    -------
    AsymptoticPrediction
        ``fdp_limit = pi0 alpha / pi0_bar`` and ``fdp_scaled_variance =
        (pi0 alpha / pi0_bar)**2 v(pi0_bar) / pi0_bar**2``.

    Raises
    ------
    CriticalRegimeError
        If ``alpha <= pi0_bar * alpha_star``.
    '''
    _check_arguments(alpha, 1.)
    reachable, alpha_star = _check_plug_in_regime(model, alpha)
    v_fn = (lambda x: x) if v_fn is None else v_fn
    condition = _bandwidth_condition(h_m, m)
    if condition is not None and condition >= 1:
        logger.warning('Bandwidth h_m=%g at m=%d gives h_m ln ln m = %.3g; '
                       'the FDP limit law assumes this vanishes.', h_m, m,
                       condition)
    threshold = t_star(model, alpha, reachable)
    rho = float(mixture_cdf(model, threshold))
    power = (rho - model.pi0 * threshold) / (1 - model.pi0)
    limit = model.pi0 * alpha / reachable
    variance = limit ** 2 * v_fn(reachable) / reachable ** 2
    metadata = {'alpha_star': alpha_star, 'pi0_bar': reachable, 'h_m': h_m,
                'm': m, 'bandwidth_condition': condition}
    return AsymptoticPrediction(alpha, reachable, threshold, rho,
                                min(power, 1.), limit, variance,
                                metadata=metadata)


def predict_tvr_deltas(model, alpha, pi0_hat_minus_bar):
    '''
    First-order response of the plug-in threshold to an estimator error.

    Returns the deltas of the threshold ``tau``, the null rejection fraction
    ``nu = pi0 tau`` and the rejection fraction ``rho`` around
    ``(t*, pi0 t*, pi0_bar t* / alpha)``::

        (t* / alpha) / (g(t*) - pi0_bar / alpha) * (1, pi0, g(t*)) * d

    Raises
    ------
    CriticalRegimeError
        If ``alpha <= pi0_bar * alpha_star``.
    ValueError
        If ``g(t*) = pi0_bar / alpha``.
    '''
    _check_arguments(alpha, 1.)
    reachable, _ = _check_plug_in_regime(model, alpha)
    threshold = t_star(model, alpha, reachable)
    density = float(mixture_pdf(model, threshold))
    denominator = density - reachable / alpha
    if not abs(denominator) > 1e-12 or not np.isfinite(denominator):
        raise ValueError('Degenerate crossing: g(t*) = %g, pi0_bar / alpha '
                         '= %g' % (density, reachable / alpha))
    scale = threshold / alpha / denominator * pi0_hat_minus_bar
    return scale, scale * model.pi0, scale * density
