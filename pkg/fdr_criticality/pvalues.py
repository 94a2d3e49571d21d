'''
One- and two-sided p-values and the distributions they induce.

For a statistic ``T`` with null cdf ``F0``:

* one-sided: ``p = 1 - F0(T)``;
* two-sided: ``p = 2 (1 - F0(|T|))``.

Under the alternative, one-sided p-values have cdf
``G1(u) = 1 - F1(F0^{-1}(1 - u))`` and density ``g1(u) = LR(F0^{-1}(1 - u))``
where ``LR = f1 / f0``.  Two-sided p-value laws are always derived from the
one-sided ones::

    G1_two(u) = G1_one(u / 2) + 1 - G1_one(1 - u / 2)
    g1_two(u) = (g1_one(u / 2) + g1_one(1 - u / 2)) / 2

The mixture of ``m0 = pi0 m`` null and ``m - m0`` alternative p-values has
cdf ``G(u) = pi0 u + (1 - pi0) G1(u)``.
'''
from dataclasses import dataclass
from enum import Enum
import logging
import math

import numpy as np
import pandas as pd

from .distributions import (AlternativeFamily, f0_isf, f0_logsf, f0_sf,
                            f1_logcdf, f1_logsf, likelihood_ratio, lr_limit)
from .streams import substream

logger = logging.getLogger(__name__)

#: Families satisfying ``f0(-t) = f0(t)``, required for two-sided testing.
SYMMETRIC_FAMILIES = ('gaussian', 'laplace', 'subbotin', 'student')


class Sidedness(Enum):
    ONE = 'one'
    TWO = 'two'


@dataclass(frozen=True)
class MixtureModel:
    '''
    Two-component p-value mixture.

    Parameters
    ----------
    pi0 : float
        Proportion of true null hypotheses, in ``[0, 1]``.
    family : AlternativeFamily
    sidedness : Sidedness or str, optional
        ``'one'`` (default) or ``'two'``.
    '''
    pi0: float
    family: AlternativeFamily
    sidedness: Sidedness = Sidedness.ONE

    def __post_init__(self):
        pi0 = float(self.pi0)
        if not 0 <= pi0 <= 1:
            raise ValueError('pi0 must be in [0, 1], got %r' % self.pi0)
        object.__setattr__(self, 'pi0', pi0)
        sidedness = Sidedness(self.sidedness)
        if (sidedness is Sidedness.TWO and self.family.kind not in
                SYMMETRIC_FAMILIES):
            raise ValueError('Two-sided p-values require a symmetric null '
                             'density; `%s` is not symmetric.' %
                             self.family.kind)
        object.__setattr__(self, 'sidedness', sidedness)

    @property
    def two_sided(self):
        return self.sidedness is Sidedness.TWO

    def to_dict(self):
        value = self.family.to_dict()
        value.update({'pi0': self.pi0, 'sided': self.sidedness.value})
        return value

    @classmethod
    def from_dict(cls, value):
        return cls(value['pi0'], AlternativeFamily.from_dict(value),
                   value.get('sided', 'one'))


def _output(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


###########################################################################
# Laplace one-sided closed forms
def laplace_g1_cdf(theta, u):
    '''
    Cdf of one-sided Laplace p-values under the alternative.

    Three branches: ``u e**theta`` on ``[0, e**-theta / 2]``,
    ``1 - e**-theta / (4 u)`` on ``[e**-theta / 2, 1/2]`` and
    ``1 - (1 - u) e**-theta`` on ``[1/2, 1]``.
    '''
    u = np.asarray(u, dtype=float)
    decay = math.exp(-theta)
    with np.errstate(divide='ignore'):
        value = np.where(u <= 0.5 * decay, u / decay,
                         np.where(u <= 0.5, 1 - decay / (4 * u),
                                  1 - (1 - u) * decay))
    return value


def laplace_g1_complement(theta, u):
    '''
    ``1 - G1(u)`` for one-sided Laplace p-values, without cancellation.
    '''
    u = np.asarray(u, dtype=float)
    decay = math.exp(-theta)
    with np.errstate(divide='ignore'):
        value = np.where(u <= 0.5 * decay, 1 - u / decay,
                         np.where(u <= 0.5, decay / (4 * u),
                                  (1 - u) * decay))
    return value


def laplace_g1_pdf(theta, u):
    u = np.asarray(u, dtype=float)
    decay = math.exp(-theta)
    with np.errstate(divide='ignore'):
        value = np.where(u <= 0.5 * decay, 1 / decay,
                         np.where(u <= 0.5, decay / (4 * u * u), decay))
    return value


def laplace_g1_inverse(theta, v):
    '''
    Inverse of :func:`laplace_g1_cdf` (used for exact sampling).
    '''
    v = np.asarray(v, dtype=float)
    decay = math.exp(-theta)
    with np.errstate(divide='ignore'):
        value = np.where(v <= 0.5, v * decay,
                         np.where(v <= 1 - 0.5 * decay,
                                  decay / (4 * (1 - v)),
                                  1 - (1 - v) / decay))
    return value


###########################################################################
# One-sided primitives
def _uses_laplace_closed_form(family):
    return family.is_laplace and family.theta > 0


def _one_sided_cdf(family, u):
    if _uses_laplace_closed_form(family):
        return laplace_g1_cdf(family.theta, u)
    return family.alt_dist.sf(family.null_dist.isf(u))


def _one_sided_complement(family, u):
    if _uses_laplace_closed_form(family):
        return laplace_g1_complement(family.theta, u)
    return family.alt_dist.cdf(family.null_dist.isf(u))


def _one_sided_pdf(family, u):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if _uses_laplace_closed_form(family):
        value = laplace_g1_pdf(family.theta, u)
    else:
        value = np.empty(u.shape)
        interior = (u > 0) & (u < 1)
        value[interior] = likelihood_ratio(family,
                                           f0_isf(family, u[interior]))
    value[u == 0] = lr_limit(family, 1)
    value[u == 1] = lr_limit(family, -1)
    return value


def _check_unit_interval(u):
    u = np.asarray(u, dtype=float)
    if np.any(~((u >= 0) & (u <= 1))):
        raise ValueError('p-value level must lie in [0, 1], got %s' % u)
    return u


###########################################################################
# Public API
def p_value(model, x):
    '''
    p-value of statistic ``x``.

    Parameters
    ----------
    model : MixtureModel
        Only the family and the sidedness are used.
    x : float or numpy.ndarray

    Returns
    -------
    float or numpy.ndarray
        One-sided ``1 - F0(x)``; two-sided ``2 (1 - F0(|x|))``.
    '''
    x_array = np.asarray(x, dtype=float)
    if model.two_sided:
        value = np.minimum(1., 2 * f0_sf(model.family, np.abs(x_array)))
    else:
        value = f0_sf(model.family, x_array)
    return _output(value, x)


def log_p_value(model, x):
    '''
    Logarithm of :func:`p_value`, accurate far in the tail.
    '''
    x_array = np.asarray(x, dtype=float)
    if model.two_sided:
        value = math.log(2) + f0_logsf(model.family, np.abs(x_array))
        value = np.minimum(0., value)
    else:
        value = f0_logsf(model.family, x_array)
    return _output(value, x)


def g1_cdf(model, u):
    '''
    Cdf ``G1`` of alternative p-values.

    Examples
    --------

    >>> model = MixtureModel(0, AlternativeFamily.laplace(1))
    >>> round(g1_cdf(model, 0.25), 4)  # 1 - e**-1
    0.6321
    '''
    u_array = _check_unit_interval(u)
    family = model.family
    if model.two_sided:
        value = (_one_sided_cdf(family, 0.5 * u_array) +
                 _one_sided_complement(family, 1 - 0.5 * u_array))
    else:
        value = _one_sided_cdf(family, u_array)
    return _output(np.clip(value, 0, 1), u)


def g1_pdf(model, u):
    '''
    Density ``g1`` of alternative p-values.

    At ``u = 0`` the limit is returned; it is ``numpy.inf`` when the
    likelihood ratio is unbounded.
    '''
    u_array = _check_unit_interval(u)
    family = model.family
    if model.two_sided:
        value = 0.5 * (_one_sided_pdf(family, 0.5 * u_array) +
                       _one_sided_pdf(family, 1 - 0.5 * u_array))
    else:
        value = _one_sided_pdf(family, u_array)
    return _output(value.reshape(u_array.shape), u)


def mixture_cdf(model, u):
    '''
    Mixture cdf ``G(u) = pi0 u + (1 - pi0) G1(u)``.
    '''
    u_array = _check_unit_interval(u)
    if model.pi0 == 1:
        return _output(u_array, u)
    value = model.pi0 * u_array + (1 - model.pi0) * g1_cdf(model, u_array)
    return _output(value, u)


def mixture_pdf(model, u):
    '''
    Mixture density ``g(u) = pi0 + (1 - pi0) g1(u)``.
    '''
    u_array = _check_unit_interval(u)
    if model.pi0 == 1:
        return _output(np.ones(u_array.shape), u)
    value = model.pi0 + (1 - model.pi0) * g1_pdf(model, u_array)
    return _output(value, u)


def g1_tail_ratio(model, t):
    '''
    ``G1(u) / u`` at the p-value ``u`` of statistic ``t``.

    Computed from log survival functions in the statistic domain so that
    p-values far below the smallest normal double remain accurate.

    Parameters
    ----------
    model : MixtureModel
    t : float or numpy.ndarray
        Statistic values (absolute values for two-sided models).
    '''
    t_array = np.asarray(t, dtype=float)
    family = model.family
    if model.two_sided:
        t_array = np.abs(t_array)
        log_g1 = np.logaddexp(f1_logsf(family, t_array),
                              f1_logcdf(family, -t_array))
    else:
        log_g1 = f1_logsf(family, t_array)
    return _output(np.exp(log_g1 - log_p_value(model, t_array)), t)


###########################################################################
# Sampling
def sample_alternative(model, size, random_state):
    '''
    Draw alternative p-values.

    One-sided Laplace models invert the closed-form cdf; all other models
    draw a statistic from ``f1`` and transform it with :func:`p_value`.
    '''
    family = model.family
    if not model.two_sided and _uses_laplace_closed_form(family):
        return laplace_g1_inverse(family.theta, random_state.random(size))
    statistics = family.alt_dist.rvs(size=size, random_state=random_state)
    return p_value(model, np.asarray(statistics, dtype=float))


def null_count(pi0, m):
    '''
    Deterministic number of true nulls ``round(pi0 m)`` (halves round up).
    '''
    return int(math.floor(pi0 * m + 0.5))


def sample_pvalues(model, m, seed, stream_keys=(), bernoulli=False):
    '''
    Draw a labeled set of p-values from the mixture.

    Parameters
    ----------
    model : MixtureModel
    m : int
        Number of hypotheses, ``>= 1``.
    seed : int
        Experiment seed.
    stream_keys : tuple of int, optional
        Substream coordinates (see :func:`fdr_criticality.streams.substream`).
    bernoulli : bool, optional
        If ``True``, draw each label independently (null with probability
        ``pi0``).  By default exactly :func:`null_count` hypotheses are null,
        at uniformly random positions.

    Returns
    -------
    pvalues : numpy.ndarray
        Shape ``(m, )``, values in ``[0, 1]``.
    is_null : numpy.ndarray
        Boolean labels, ``True`` for true null hypotheses.
    '''
    if int(m) != m or m < 1:
        raise ValueError('m must be a positive integer, got %r' % m)
    m = int(m)
    random_state = substream(seed, *stream_keys)
    if bernoulli:
        is_null = random_state.random(m) < model.pi0
    else:
        is_null = np.zeros(m, dtype=bool)
        is_null[random_state.permutation(m)[:null_count(model.pi0, m)]] = True
    m0 = int(is_null.sum())
    pvalues = np.empty(m)
    pvalues[is_null] = random_state.random(m0)
    if m0 < m:
        pvalues[~is_null] = sample_alternative(model, m - m0, random_state)
    return pvalues, is_null


def pvalues_frame(pvalues, is_null):
    '''
    Labeled p-values as a frame with columns ``index,p_value,is_null``.

    ``index`` is the 0-based position of each hypothesis.
    '''
    pvalues = np.asarray(pvalues, dtype=float)
    is_null = np.asarray(is_null, dtype=bool)
    if pvalues.ndim != 1 or is_null.shape != pvalues.shape:
        raise ValueError('Expected matching one-dimensional p-values and '
                         'labels.')
    return pd.DataFrame({'index': np.arange(pvalues.size),
                         'p_value': pvalues, 'is_null': is_null},
                        columns=['index', 'p_value', 'is_null'])
