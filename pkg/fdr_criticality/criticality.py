'''
Critical values and purity of p-value mixtures.

The Benjamini-Hochberg procedure at level ``alpha`` asymptotically rejects
nothing when ``alpha`` is below the critical value

.. math::

    \\alpha^\\star = \\inf_{u} \\frac{u}{G(u)}
                 = \\frac{1}{\\pi_0 + (1 - \\pi_0) g_1(0)}

(the second form holds when ``G`` is concave).  The model is *critical*
when ``alpha_star > 0``, i.e., when the likelihood ratio is bounded.  The
model is *pure* when ``g1(1) = 0``; estimators of ``pi0`` based on the
p-value density near 1 then converge to ``pi0`` rather than to
``pi0_bar = pi0 + (1 - pi0) g1(1)``.
'''
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
import logging

import numpy as np
import pandas as pd
from scipy import optimize

from .distributions import f0_isf, likelihood_ratio, lr_limit
from .pvalues import MixtureModel, g1_tail_ratio, log_p_value, mixture_cdf

logger = logging.getLogger(__name__)

#: Numeric critical values below this threshold are reported as 0.
ZERO_THRESHOLD = 1e-8
#: Default depth (in decades below 1) of the numeric infimum grid.
GRID_DECADES = 280
GRID_POINTS_PER_DECADE = 400


@dataclass(frozen=True)
class CriticalityReport:
    '''
    Criticality and purity diagnostics of a mixture model.

    Attributes
    ----------
    alpha_star : float
        Critical value of the Benjamini-Hochberg procedure.
    alpha_star_intrinsic : float
        ``pi0 * alpha_star``, the bound on achievable FDR for any procedure.
    g1_at_0 : float
        Limit of ``g1`` at 0 (possibly ``inf``).
    g1_at_1 : float
        Purity value ``g1(1)``.
    pi0_bar : float
        ``pi0 + (1 - pi0) g1(1)``.
    is_critical : bool
    is_pure : bool
    '''
    alpha_star: float
    alpha_star_intrinsic: float
    g1_at_0: float
    g1_at_1: float
    pi0_bar: float
    is_critical: bool
    is_pure: bool

    def to_dict(self):
        value = asdict(self)
        if np.isinf(self.g1_at_0):
            value['g1_at_0'] = 'inf'
        return value


def g1_at_0(model):
    '''
    Limit of the alternative p-value density at 0.
    '''
    if model.two_sided:
        return 0.5 * (lr_limit(model.family, 1) + lr_limit(model.family, -1))
    return lr_limit(model.family, 1)


def g1_at_1(model):
    '''
    Alternative p-value density at 1 (the purity value).

    Two-sided models satisfy ``g1(1) = LR(0)``.
    '''
    if model.two_sided:
        return likelihood_ratio(model.family, 0.)
    return lr_limit(model.family, -1)


def pi0_bar(model):
    '''
    Limit ``pi0 + (1 - pi0) g1(1)`` reached by density-at-1 estimators.
    '''
    return model.pi0 + (1 - model.pi0) * g1_at_1(model)


def critical_value_closed_form(model):
    '''
    Critical value ``1 / (pi0 + (1 - pi0) g1(0))``.

    Returns
    -------
    float
        ``0`` when ``g1(0)`` is infinite (Gaussian, Subbotin ``gamma > 1``),
        ``1`` for the pure null model ``pi0 = 1``.

    Examples
    --------

    >>> from fdr_criticality.distributions import AlternativeFamily
    >>> from fdr_criticality.pvalues import MixtureModel
    >>> model = MixtureModel(0.75, AlternativeFamily.laplace(2))
    >>> round(critical_value_closed_form(model), 3)
    0.385
    '''
    if model.pi0 == 1:
        return 1.
    density_at_0 = g1_at_0(model)
    if np.isinf(density_at_0):
        return 0.
    return 1. / (model.pi0 + (1 - model.pi0) * density_at_0)


def bh_ratio(model, u):
    '''
    ``u / G(u)``, the ratio whose infimum is the critical value.
    '''
    u_array = np.asarray(u, dtype=float)
    with np.errstate(invalid='ignore', divide='ignore'):
        value = u_array / mixture_cdf(model, u_array)
    value = np.where(u_array == 0, critical_value_closed_form(model), value)
    if np.ndim(u) == 0:
        return float(value)
    return value


def pfdr(model, t):
    '''
    Positive FDR ``pi0 t / G(t)`` of the fixed rejection region ``[0, t]``.
    '''
    return model.pi0 * bh_ratio(model, t)


def _statistic_grid(model, decades, points_per_decade):
    log10_u = np.linspace(0, -decades, decades * points_per_decade + 1)
    u = 10. ** log10_u
    if model.two_sided:
        return f0_isf(model.family, 0.5 * u)
    return f0_isf(model.family, u)


@lru_cache(maxsize=128)
def _sup_tail_ratio(model, decades, points_per_decade):
    '''
    Supremum of ``G1(u) / u`` on a geometric p-value grid.

    The ratio does not depend on ``pi0``; the cache is keyed on the family
    and sidedness only (callers pass a model with ``pi0 = 0``).
    '''
    statistics = _statistic_grid(model, decades, points_per_decade)
    with np.errstate(all='ignore'):
        ratio = g1_tail_ratio(model, statistics)
        log_u = log_p_value(model, statistics)
    valid = np.isfinite(ratio) & np.isfinite(log_u)
    if not valid.all():
        logger.debug('Dropped %d grid point(s) with non-finite tail ratio.',
                     (~valid).sum())
    indices = np.flatnonzero(valid)
    best = indices[np.argmax(ratio[valid])]
    sup_ratio = ratio[best]

    # Refine within the neighboring cells of the best grid point.
    lower = statistics[max(best - 1, 0)]
    upper = statistics[min(best + 1, statistics.size - 1)]
    if np.isfinite(lower) and np.isfinite(upper) and upper > lower:
        def objective(t):
            with np.errstate(all='ignore'):
                value = g1_tail_ratio(model, t)
            return -value if np.isfinite(value) else 0.

        result = optimize.minimize_scalar(objective, bounds=(lower, upper),
                                          method='bounded',
                                          options={'xatol': 1e-12})
        if -result.fun > sup_ratio:
            sup_ratio = -result.fun
    return float(sup_ratio)


def critical_value_numeric(model, decades=GRID_DECADES,
                           points_per_decade=GRID_POINTS_PER_DECADE):
    '''
    Critical value as the numeric infimum of ``u / G(u)``.

    The infimum is taken over a geometric grid of p-values
    ``u in [10**-decades, 1]`` evaluated through the statistic domain,
    followed by a bounded scalar refinement around the best grid point.

    Parameters
    ----------
    model : MixtureModel
    decades : int, optional
        Depth of the grid.  The default reaches ``1e-280``, far enough for
        slowly converging likelihood ratios (Student).
    points_per_decade : int, optional

    Returns
    -------
    float
        Values below :data:`ZERO_THRESHOLD` are reported as 0.
    '''
    if model.pi0 == 1:
        return 1.
    stripped = type(model)(0., model.family, model.sidedness)
    sup_ratio = _sup_tail_ratio(stripped, int(decades),
                                int(points_per_decade))
    value = 1. / (model.pi0 + (1 - model.pi0) * sup_ratio)
    if value < ZERO_THRESHOLD:
        return 0.
    return value


def purity_report(model):
    '''
    Full :class:`CriticalityReport` of a mixture model.

    Examples
    --------

    >>> from fdr_criticality.distributions import AlternativeFamily
    >>> from fdr_criticality.pvalues import MixtureModel
    >>> model = MixtureModel(0.5, AlternativeFamily.gaussian(2))
    >>> report = purity_report(model)
    >>> report.is_critical, report.is_pure
    (False, True)
    '''
    alpha_star = critical_value_closed_form(model)
    purity_value = float(g1_at_1(model))
    return CriticalityReport(alpha_star=alpha_star,
                             alpha_star_intrinsic=model.pi0 * alpha_star,
                             g1_at_0=float(g1_at_0(model)),
                             g1_at_1=purity_value,
                             pi0_bar=float(pi0_bar(model)),
                             is_critical=bool(alpha_star > 0),
                             is_pure=bool(purity_value == 0))


#: Columns of :func:`critical_value_surface`.
SURFACE_COLUMNS = ['theta', 'pi0', 'sidedness', 'alpha_star',
                   'alpha_star_intrinsic']


def critical_value_surface(family, thetas, pi0s, sides=('one', 'two')):
    '''
    Closed-form critical values over a ``theta x pi0`` grid.

    Parameters
    ----------
    family : AlternativeFamily
        Template family; its ``theta`` is replaced by each grid value while
        shape parameters (``gamma``, ``k``) are kept.
    thetas, pi0s : sequence of float
    sides : sequence of str, optional
        Sidedness values to tabulate.

    Returns
    -------
    pandas.DataFrame
        One row per ``(sidedness, theta, pi0)`` with columns
        :data:`SURFACE_COLUMNS`.

    Examples
    --------

    >>> from fdr_criticality.distributions import AlternativeFamily
    >>> surface = critical_value_surface(AlternativeFamily.laplace(1), [2],
    ...                                  [0.75], sides=['one'])
    >>> round(surface['alpha_star'].iloc[0], 3)
    0.385
    '''
    rows = []
    for sidedness in sides:
        for theta in thetas:
            shifted = replace(family, theta=theta)
            for pi0 in pi0s:
                model = MixtureModel(pi0, shifted, sidedness)
                alpha_star = critical_value_closed_form(model)
                rows.append({'theta': shifted.theta, 'pi0': model.pi0,
                             'sidedness': model.sidedness.value,
                             'alpha_star': alpha_star,
                             'alpha_star_intrinsic': model.pi0 * alpha_star})
    return pd.DataFrame(rows, columns=SURFACE_COLUMNS)
