'''
Finite-sample multiple testing procedures.

* :func:`bh95`: Benjamini-Hochberg step-up procedure.
* :func:`plug_in_bh`: step-up procedure at level ``alpha / pi0_hat``.
* :func:`account`: ground-truth accounting (false discoveries, FDP, power).
* :func:`rejection_frame`: rejection set as a table.
'''
from dataclasses import dataclass, field, replace
import logging

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BHOutcome:
    '''
    Result of a step-up procedure.

    Attributes
    ----------
    alpha : float
        Target FDR level.
    effective_level : float
        Level the step-up scan ran at (``alpha / pi0_hat`` for plug-in
        procedures, clamped to at most 1).
    m : int
        Number of hypotheses.
    i_hat : int
        Largest index ``k`` with ``P_(k) <= effective_level k / m`` (0 if
        none).
    tau_hat : float
        Rejection threshold ``effective_level * i_hat / m``.
    rejected : numpy.ndarray
        Indices (into the input array) of rejected hypotheses, ascending.
    r : int
        Number of rejections.
    rho : float
        Rejection fraction ``r / m``.
    v : int, optional
        Number of false rejections (after :func:`account`).
    fdp : float, optional
        ``v / max(r, 1)`` (after :func:`account`).
    power : float, optional
        ``(r - v) / (m - m0)``; ``None`` when every hypothesis is null.
    '''
    alpha: float
    effective_level: float
    m: int
    i_hat: int
    tau_hat: float
    rejected: np.ndarray = field(repr=False)
    r: int
    rho: float
    v: int = None
    fdp: float = None
    power: float = None

    def to_dict(self):
        return {'alpha': self.alpha, 'effective_level': self.effective_level,
                'm': self.m, 'i_hat': self.i_hat, 'tau_hat': self.tau_hat,
                'rejected': self.rejected.tolist(), 'R': self.r,
                'V': self.v, 'fdp': self.fdp, 'power': self.power,
                'rho': self.rho}


def _check_pvalues(pvalues):
    pvalues = np.asarray(pvalues, dtype=float)
    if pvalues.ndim != 1 or pvalues.size == 0:
        raise ValueError('Expected a non-empty one-dimensional array of '
                         'p-values.')
    if np.any(~((pvalues >= 0) & (pvalues <= 1))):
        raise ValueError('p-values must lie in [0, 1].')
    return pvalues


def _check_level(alpha):
    if not 0 < alpha <= 1:
        raise ValueError('alpha must be in (0, 1], got %r' % alpha)
    return float(alpha)


def bh95(pvalues, alpha):
    '''
    Benjamini-Hochberg step-up procedure.

    Rejects every hypothesis with ``P_i <= alpha * i_hat / m`` where
    ``i_hat`` is the largest ``k`` such that ``P_(k) <= alpha k / m``.

    Parameters
    ----------
    pvalues : array_like
        Shape ``(m, )``, values in ``[0, 1]``.
    alpha : float
        Level in ``(0, 1]``.

    Returns
    -------
    BHOutcome

    Raises
    ------
    ValueError
        If ``pvalues`` is empty or contains values outside ``[0, 1]``.

    Examples
    --------

    >>> outcome = bh95([0.01, 0.02, 0.5], 0.15)
    >>> outcome.i_hat, round(outcome.tau_hat, 12), outcome.rejected.tolist()
    (2, 0.1, [0, 1])
    '''
    pvalues = _check_pvalues(pvalues)
    alpha = _check_level(alpha)
    m = pvalues.size
    # Stable sort: ties keep their original order.
    sorted_pvalues = pvalues[np.argsort(pvalues, kind='stable')]
    thresholds = alpha * np.arange(1, m + 1) / m
    passed = np.flatnonzero(sorted_pvalues <= thresholds)
    i_hat = int(passed[-1]) + 1 if passed.size else 0
    tau_hat = alpha * i_hat / m
    rejected = np.flatnonzero(pvalues <= tau_hat)
    return BHOutcome(alpha=alpha, effective_level=alpha, m=m, i_hat=i_hat,
                     tau_hat=tau_hat, rejected=rejected, r=int(rejected.size),
                     rho=rejected.size / m)


def plug_in_bh(pvalues, alpha, pi0_hat, strict=False):
    '''
    Plug-in step-up procedure: :func:`bh95` at level ``alpha / pi0_hat``.

    Parameters
    ----------
    pvalues : array_like
    alpha : float
        Target level in ``(0, 1]``.
    pi0_hat : float
        Estimated proportion of true nulls, in ``(0, 1]``.
    strict : bool, optional
        If ``True``, raise instead of clamping an effective level above 1.

    Returns
    -------
    BHOutcome
        With ``alpha`` the target level and ``effective_level`` the level
        the scan ran at.

    Raises
    ------
    ValueError
        If ``pi0_hat`` is not in ``(0, 1]``, or if ``strict`` and
        ``alpha / pi0_hat > 1``.
    '''
    alpha = _check_level(alpha)
    if not 0 < pi0_hat <= 1:
        raise ValueError('pi0_hat must be in (0, 1], got %r' % pi0_hat)
    level = alpha / pi0_hat
    if level > 1:
        if strict:
            raise ValueError('Effective level alpha / pi0_hat = %g exceeds 1.'
                             % level)
        logger.debug('Effective level %g clamped to 1.', level)
        level = 1.
    return replace(bh95(pvalues, level), alpha=alpha)


def account(outcome, is_null):
    '''
    Enrich an outcome with ground-truth accounting.

    Parameters
    ----------
    outcome : BHOutcome
    is_null : array_like of bool
        ``True`` for true null hypotheses, aligned with the p-values the
        outcome was computed from.

    Returns
    -------
    BHOutcome
        Copy with ``v``, ``fdp`` and ``power`` populated (``power`` stays
        ``None`` when every hypothesis is null).

    Raises
    ------
    ValueError
        If the label count differs from ``outcome.m``.
    '''
    is_null = np.asarray(is_null, dtype=bool)
    if is_null.shape != (outcome.m, ):
        raise ValueError('Expected %d labels, got %d.' %
                         (outcome.m, is_null.size))
    v = int(is_null[outcome.rejected].sum())
    m0 = int(is_null.sum())
    power = None
    if m0 < outcome.m:
        power = (outcome.r - v) / (outcome.m - m0)
    return replace(outcome, v=v, fdp=v / max(outcome.r, 1), power=power)


def rejection_frame(outcome, pvalues):
    '''
    Rejection set as a frame with columns ``index,p_value,rejected``.

    Parameters
    ----------
    outcome : BHOutcome
    pvalues : array_like
        The p-values the outcome was computed from.

    Examples
    --------

    >>> frame = rejection_frame(bh95([0.01, 0.02, 0.5], 0.15),
    ...                         [0.01, 0.02, 0.5])
    >>> frame['rejected'].tolist()
    [True, True, False]
    '''
    pvalues = _check_pvalues(pvalues)
    if pvalues.size != outcome.m:
        raise ValueError('Expected %d p-values, got %d.' %
                         (outcome.m, pvalues.size))
    rejected = np.zeros(outcome.m, dtype=bool)
    rejected[outcome.rejected] = True
    return pd.DataFrame({'index': np.arange(outcome.m), 'p_value': pvalues,
                         'rejected': rejected},
                        columns=['index', 'p_value', 'rejected'])
