'''
Test-statistic models under the null and the alternative hypothesis.

Four location-type families are supported:

``gaussian``
    ``f0(t) = exp(-t**2 / 2) / sqrt(2 pi)``, ``f1(t) = f0(t - theta)``.
``laplace``
    ``f0(t) = exp(-|t|) / 2``, ``f1(t) = f0(t - theta)``.
``subbotin``
    Exponential-power density ``f0(t) = exp(-|t|**gamma / gamma) / C_gamma``
    with ``C_gamma = 2 gamma**(1/gamma - 1) Gamma(1/gamma)``, and
    ``f1(t) = f0(t - theta)``.  With this scale convention ``gamma=2`` is
    exactly the Gaussian family and ``gamma=1`` exactly the Laplace family.
``student``
    Central Student distribution with ``k`` degrees of freedom under the
    null, non-central Student with non-centrality ``theta`` under the
    alternative.  The alternative density is evaluated through the repeated
    Gaussian integral :func:`hh`::

        f1(t) = f0(t) exp(-theta**2 / (2 (1 + t**2/k)))
                * Hh_k(-theta t / sqrt(k + t**2)) / Hh_k(0)

Frozen :mod:`scipy.stats` distributions provide the null and alternative
cdf/quantile functions; densities and likelihood ratios are computed in log
space wherever exponents may exceed the floating-point range.

Attributes
----------
FAMILIES : tuple
    Recognized family names.
HH_MAX_ARGUMENT : float
    Largest ``|z|`` accepted by :func:`hh`.
HH_RECURRENCE_MAX_ORDER : int
    Largest order evaluated by the three-term recurrence; higher orders use
    quadrature of the defining integral.
'''
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy import integrate, special, stats

logger = logging.getLogger(__name__)

FAMILIES = ('gaussian', 'laplace', 'subbotin', 'student')
HH_MAX_ARGUMENT = 40.
HH_RECURRENCE_MAX_ORDER = 60
LOG_2PI = math.log(2 * math.pi)
SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class AlternativeFamily:
    '''
    Test-statistic model generating the alternative hypotheses.

    Parameters
    ----------
    kind : str
        One of :data:`FAMILIES`.
    theta : float
        Shift (location families) or non-centrality (Student), ``theta >= 0``.
        ``theta == 0`` makes the alternative identical to the null.
    gamma : float, optional
        Subbotin exponent, ``gamma >= 1`` (Subbotin only).
    k : int, optional
        Degrees of freedom, ``k >= 1`` (Student only).
    '''
    kind: str
    theta: float
    gamma: float = None
    k: int = None

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ValueError('Unknown family `%s`.  Expected one of %s.' %
                             (self.kind, ', '.join(FAMILIES)))
        theta = float(self.theta)
        if not np.isfinite(theta) or theta < 0:
            raise ValueError('theta must be finite and non-negative, got %r'
                             % self.theta)
        object.__setattr__(self, 'theta', theta)
        if self.kind == 'subbotin':
            if self.gamma is None or not float(self.gamma) >= 1:
                raise ValueError('Subbotin exponent gamma must be >= 1, got '
                                 '%r' % (self.gamma, ))
            object.__setattr__(self, 'gamma', float(self.gamma))
        elif self.gamma is not None:
            raise ValueError('gamma only applies to the Subbotin family.')
        if self.kind == 'student':
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise ValueError('Student degrees of freedom k must be an '
                                 'integer >= 1, got %r' % (self.k, ))
            object.__setattr__(self, 'k', int(self.k))
        elif self.k is not None:
            raise ValueError('k only applies to the Student family.')

    @classmethod
    def gaussian(cls, theta):
        return cls('gaussian', theta)

    @classmethod
    def laplace(cls, theta):
        return cls('laplace', theta)

    @classmethod
    def subbotin(cls, theta, gamma):
        return cls('subbotin', theta, gamma=gamma)

    @classmethod
    def student(cls, theta, k):
        return cls('student', theta, k=k)

    @property
    def is_laplace(self):
        '''
        ``True`` for the Laplace family, including Subbotin with ``gamma=1``.
        '''
        return (self.kind == 'laplace' or
                (self.kind == 'subbotin' and self.gamma == 1))

    @property
    def has_unbounded_lr(self):
        '''
        ``True`` if the likelihood ratio diverges as ``t -> +inf``.
        '''
        return self.theta > 0 and (self.kind == 'gaussian' or
                                   (self.kind == 'subbotin' and
                                    self.gamma > 1))

    @property
    def null_dist(self):
        '''
        Frozen :mod:`scipy.stats` distribution of the statistic under H0.
        '''
        if self.kind == 'gaussian':
            return stats.norm()
        elif self.kind == 'laplace':
            return stats.laplace()
        elif self.kind == 'subbotin':
            return stats.gennorm(self.gamma,
                                 scale=self.gamma ** (1. / self.gamma))
        return stats.t(self.k)

    @property
    def alt_dist(self):
        '''
        Frozen :mod:`scipy.stats` distribution of the statistic under H1.
        '''
        if self.kind == 'gaussian':
            return stats.norm(loc=self.theta)
        elif self.kind == 'laplace':
            return stats.laplace(loc=self.theta)
        elif self.kind == 'subbotin':
            return stats.gennorm(self.gamma, loc=self.theta,
                                 scale=self.gamma ** (1. / self.gamma))
        elif self.theta == 0:
            return stats.t(self.k)
        return stats.nct(self.k, self.theta)

    def to_dict(self):
        value = {'family': self.kind, 'theta': self.theta}
        if self.gamma is not None:
            value['gamma'] = self.gamma
        if self.k is not None:
            value['k'] = self.k
        return value

    @classmethod
    def from_dict(cls, value):
        return cls(value['family'], value['theta'], gamma=value.get('gamma'),
                   k=value.get('k'))


@dataclass(frozen=True)
class EffectSpec:
    '''
    Standardized two-sample effect and the group sizes behind each test.

    Parameters
    ----------
    delta : float
        Effect size ``(mu_Y - mu_X) / sigma``, ``delta >= 0``.
    n_x, n_y : int
        Group sample sizes, each ``>= 2``.
    '''
    delta: float
    n_x: int
    n_y: int

    def __post_init__(self):
        if not np.isfinite(self.delta) or self.delta < 0:
            raise ValueError('delta must be finite and non-negative, got %r' %
                             self.delta)
        for name in ('n_x', 'n_y'):
            value = getattr(self, name)
            if int(value) != value or value < 2:
                raise ValueError('%s must be an integer >= 2, got %r' %
                                 (name, value))
            object.__setattr__(self, name, int(value))
        object.__setattr__(self, 'delta', float(self.delta))

    @property
    def theta(self):
        '''
        Non-centrality ``delta / sqrt(1/n_x + 1/n_y)``.
        '''
        return self.delta / math.sqrt(1. / self.n_x + 1. / self.n_y)

    @property
    def df(self):
        '''
        Degrees of freedom of the pooled two-sample statistic.
        '''
        return self.n_x + self.n_y - 2

    def family(self):
        return AlternativeFamily.student(self.theta, self.df)

    def subsample(self, rate):
        '''
        Effect specification after keeping a fraction of each group.

        Parameters
        ----------
        rate : float
            Fraction in ``(0, 1]``; group sizes become ``floor(rate * n)``.

        Raises
        ------
        ValueError
            If a subsampled group has fewer than 2 samples.
        '''
        n_x, n_y = subsample_sizes(self.n_x, self.n_y, rate)
        return EffectSpec(self.delta, n_x, n_y)


def subsample_sizes(n_x, n_y, rate):
    '''
    Group sizes ``(floor(rate * n_x), floor(rate * n_y))``.

    Raises
    ------
    ValueError
        If ``rate`` is outside ``(0, 1]`` or a group drops below 2 samples.
    '''
    if not 0 < rate <= 1:
        raise ValueError('Resampling rate must be in (0, 1], got %r' % rate)
    # Guard `floor` against representation error, e.g., 0.29 * 100.
    sizes = tuple(int(math.floor(rate * n + 1e-9)) for n in (n_x, n_y))
    if min(sizes) < 2:
        raise ValueError('Rate %g leaves group sizes %s; each group needs at '
                         'least 2 samples.' % (rate, sizes))
    return sizes


def subbotin_constant(gamma):
    '''
    Normalizing constant ``C_gamma = 2 gamma**(1/gamma - 1) Gamma(1/gamma)``.
    '''
    return 2 * gamma ** (1. / gamma - 1) * special.gamma(1. / gamma)


def _output(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


###########################################################################
# Densities and distribution functions
def f0_pdf(family, t):
    '''
    Null density ``f0(t)``; symmetric in ``t``.
    '''
    return _output(family.null_dist.pdf(t), t)


def f1_pdf(family, t):
    '''
    Alternative density ``f1(t)``.

    Location families evaluate ``f0(t - theta)``; the Student family
    evaluates the :func:`hh` representation of the non-central density.
    '''
    if family.kind != 'student':
        return _output(family.null_dist.pdf(np.asarray(t, dtype=float) -
                                            family.theta), t)
    log_density = (family.null_dist.logpdf(t) +
                   log_likelihood_ratio(family, t))
    return _output(np.exp(log_density), t)


def f0_cdf(family, t):
    return _output(family.null_dist.cdf(t), t)


def f0_sf(family, t):
    return _output(family.null_dist.sf(t), t)


def f0_logsf(family, t):
    return _output(family.null_dist.logsf(t), t)


def f1_cdf(family, t):
    return _output(family.alt_dist.cdf(t), t)


def f1_sf(family, t):
    return _output(family.alt_dist.sf(t), t)


def f1_logsf(family, t):
    return _output(family.alt_dist.logsf(t), t)


def f1_logcdf(family, t):
    return _output(family.alt_dist.logcdf(t), t)


def _check_probability(u):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise ValueError('Quantile level must lie in the open interval '
                         '(0, 1), got %s' % u)
    return u


def f0_quantile(family, u):
    '''
    Inverse of :func:`f0_cdf`.

    Raises
    ------
    ValueError
        If ``u`` is not in the open interval ``(0, 1)``.
    '''
    return _output(family.null_dist.ppf(_check_probability(u)), u)


def f0_isf(family, u):
    '''
    Inverse of :func:`f0_sf`, i.e., ``F0^{-1}(1 - u)`` without cancellation.

    ``u = 0`` maps to ``+inf`` and ``u = 1`` to ``-inf``.
    '''
    return _output(family.null_dist.isf(u), u)


###########################################################################
# Likelihood ratio
def lr_limit(family, direction=1):
    '''
    Limit of the likelihood ratio ``f1/f0`` as ``t -> direction * inf``.

    Parameters
    ----------
    family : AlternativeFamily
    direction : int, optional
        ``+1`` for ``t -> +inf`` (strongest evidence), ``-1`` for
        ``t -> -inf``.

    Returns
    -------
    float
        Possibly ``inf`` (Gaussian, Subbotin ``gamma > 1``).
    '''
    if direction not in (1, -1):
        raise ValueError('direction must be +1 or -1, got %r' % direction)
    if family.theta == 0:
        return 1.
    if family.has_unbounded_lr:
        return np.inf if direction > 0 else 0.
    elif family.is_laplace:
        return math.exp(direction * family.theta)
    return math.exp(log_hh(family.k, -direction * family.theta) -
                    log_hh(family.k, 0.))


def log_likelihood_ratio(family, t):
    '''
    Logarithm of the likelihood ratio ``f1(t) / f0(t)``.
    '''
    t_array = np.atleast_1d(np.asarray(t, dtype=float))
    theta = family.theta
    finite = np.isfinite(t_array)
    value = np.empty(t_array.shape)
    t_finite = t_array[finite]
    if theta == 0:
        value[finite] = 0.
    elif family.kind == 'gaussian':
        value[finite] = theta * t_finite - 0.5 * theta ** 2
    elif family.kind == 'laplace':
        value[finite] = np.abs(t_finite) - np.abs(t_finite - theta)
    elif family.kind == 'subbotin':
        gamma = family.gamma
        value[finite] = ((np.abs(t_finite) ** gamma -
                          np.abs(t_finite - theta) ** gamma) / gamma)
    else:
        k = family.k
        z = -theta * t_finite / np.sqrt(k + t_finite ** 2)
        value[finite] = (-0.5 * theta ** 2 / (1 + t_finite ** 2 / k) +
                         log_hh(k, z) - log_hh(k, 0.))
    if not finite.all():
        with np.errstate(divide='ignore'):
            value[t_array == np.inf] = math.log(lr_limit(family, 1))
            value[t_array == -np.inf] = math.log(lr_limit(family, -1))
        value[np.isnan(t_array)] = np.nan
    return _output(value.reshape(np.shape(t)), t)


def likelihood_ratio(family, t):
    '''
    Likelihood ratio ``f1(t) / f0(t)``; non-decreasing in ``t``.

    Examples
    --------

    >>> likelihood_ratio(AlternativeFamily.laplace(2), 5)  # plateau e**2
    7.38905609893065
    '''
    return _output(np.exp(log_likelihood_ratio(family, t)), t)


###########################################################################
# Repeated Gaussian integral
def _check_hh_args(k, z):
    if int(k) != k or k < -1:
        raise ValueError('Order k must be an integer >= -1, got %r' % (k, ))
    z = np.asarray(z, dtype=float)
    if np.any(~(np.abs(z) <= HH_MAX_ARGUMENT)):
        raise ValueError('|z| must not exceed %g, got %s' %
                         (HH_MAX_ARGUMENT, z))
    return int(k), z


def log_hh_quad(k, z):
    '''
    Logarithm of ``Hh_k(z)`` by adaptive quadrature of the defining integral

    .. math::

        Hh_k(z) = \\int_0^\\infty \\frac{x^k}{k!} e^{-(x + z)^2 / 2} dx

    The integrand is scaled by its value at the mode so that the result is
    representable for every ``k`` and ``|z| <= 40``.
    '''
    k, z = _check_hh_args(k, z)
    z = float(z)
    if k == -1:
        return -0.5 * z * z
    elif k == 0:
        return 0.5 * LOG_2PI + stats.norm.logsf(z)

    peak = 0.5 * (-z + math.sqrt(z * z + 4 * k))
    log_peak = k * math.log(peak) - 0.5 * (peak + z) ** 2

    def integrand(x):
        if x <= 0:
            return 0.
        return math.exp(k * math.log(x) - 0.5 * (x + z) ** 2 - log_peak)

    # Log-integrand is concave with curvature <= -1: 40 units from the mode
    # the integrand is below exp(-800).
    lower = max(0., peak - HH_MAX_ARGUMENT)
    upper = peak + HH_MAX_ARGUMENT
    total = 0.
    for a, b in ((lower, peak), (peak, upper)):
        total += integrate.quad(integrand, a, b, epsabs=0, epsrel=1e-12,
                                limit=200)[0]
    return log_peak + math.log(total) - special.gammaln(k + 1)


def hh_quad(k, z):
    return math.exp(log_hh_quad(k, z))


def hh_table(kmax, z):
    '''
    Table of ``Hh_j(z)`` for ``j = -1, 0, ..., kmax``.

    Non-positive arguments use the forward recurrence

    .. math::

        Hh_k(z) = (Hh_{k-2}(z) - z Hh_{k-1}(z)) / k

    from ``Hh_{-1}(z) = exp(-z**2/2)`` and ``Hh_0(z) = sqrt(2 pi) Phi(-z)``.
    Positive arguments run the same recurrence backward from quadrature
    values at ``kmax`` and ``kmax - 1``.  Both directions only add positive
    terms.

    Parameters
    ----------
    kmax : int
        Highest order, ``>= -1``.
    z : float or numpy.ndarray

    Returns
    -------
    numpy.ndarray
        Array of shape ``(kmax + 2,) + numpy.shape(z)``; row ``j + 1`` holds
        ``Hh_j(z)``.
    '''
    kmax, z = _check_hh_args(kmax, z)
    z_flat = z.reshape(-1)
    table = np.empty((kmax + 2, z_flat.size))
    table[0] = np.exp(-0.5 * z_flat * z_flat)
    if kmax >= 0:
        table[1] = SQRT_2PI * stats.norm.sf(z_flat)
    for j in range(1, kmax + 1):
        table[j + 1] = (table[j - 1] - z_flat * table[j]) / j

    if kmax >= 1:
        for i in np.flatnonzero(z_flat > 0):
            z_i = float(z_flat[i])
            column = np.empty(kmax + 2)
            column[kmax + 1] = hh_quad(kmax, z_i)
            column[kmax] = hh_quad(kmax - 1, z_i)
            for j in range(kmax, 0, -1):
                column[j - 1] = j * column[j + 1] + z_i * column[j]
            table[:, i] = column
    return table.reshape((kmax + 2, ) + z.shape)


def log_hh(k, z):
    '''
    Logarithm of :func:`hh`.

    Orders up to :data:`HH_RECURRENCE_MAX_ORDER` at ``z <= 0`` use the
    forward recurrence; all other arguments use :func:`log_hh_quad`.
    '''
    k, z_array = _check_hh_args(k, z)
    if k == -1:
        return _output(-0.5 * z_array * z_array, z)
    elif k == 0:
        return _output(0.5 * LOG_2PI + stats.norm.logsf(z_array), z)

    z_flat = z_array.reshape(-1)
    value = np.empty(z_flat.shape)
    forward = (z_flat <= 0) & (k <= HH_RECURRENCE_MAX_ORDER)
    if forward.any():
        value[forward] = np.log(hh_table(k, z_flat[forward])[-1])
    for i in np.flatnonzero(~forward):
        value[i] = log_hh_quad(k, z_flat[i])
    return _output(value.reshape(z_array.shape), z)


def hh(k, z):
    '''
    Repeated integral of the Gaussian density.

    .. math::

        Hh_k(z) = \\int_0^\\infty \\frac{x^k}{k!} e^{-(x + z)^2 / 2} dx,
        \\qquad Hh_{-1}(z) = e^{-z^2 / 2}

    Positive and strictly decreasing in ``z``, with ``Hh_{k+1}' = -Hh_k``.

    Parameters
    ----------
    k : int
        Order, ``>= -1``.
    z : float or numpy.ndarray
        Argument, ``|z| <= 40``.

    Raises
    ------
    ValueError
        If ``k < -1`` or ``|z| > 40``.

    Examples
    --------

    >>> hh(1, 0)
    1.0
    '''
    return _output(np.exp(log_hh(k, z)), z)
