'''
Estimators of the proportion ``pi0`` of true null hypotheses.

All estimators target the p-value density at 1, which equals
``pi0_bar = pi0 + (1 - pi0) g1(1)``:

* :func:`storey_fixed`: ``(#{P_i > lambda} / m) / (1 - lambda)``;
* :func:`storey_bandwidth`: the same with ``lambda = 1 - h_m`` and a
  shrinking bandwidth ``h_m = m**(-1 / (2k + 1)) eta_m**2``;
* :func:`kernel_pi0`: boundary kernel density estimate at 1 with a
  polynomial kernel of order ``k`` supported on ``[-1, 0]``.
'''
from dataclasses import dataclass
from functools import lru_cache
import logging
import math

import numpy as np
from numpy.polynomial import Polynomial

from .distributions import f0_isf, likelihood_ratio

logger = logging.getLogger(__name__)

ESTIMATOR_KINDS = ('storey_fixed', 'storey_bandwidth', 'kernel')
#: Base finite-difference step for derivatives of ``g1`` at 1.
DERIVATIVE_STEP = 1e-3
#: Derivatives below this magnitude count as zero in order detection.
DERIVATIVE_TOLERANCE = 1e-6


###########################################################################
# Bandwidth rules
@dataclass(frozen=True)
class PowerLog:
    '''
    ``eta_m = (ln m)**(-c)``.
    '''
    c: float = 1. / 3

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError('Exponent c must be positive, got %r' % self.c)

    def __call__(self, m):
        return math.log(m) ** -self.c

    def to_dict(self):
        return {'eta_exponent': self.c}


@dataclass(frozen=True)
class Explicit:
    '''
    Constant ``eta_m = eta``.
    '''
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError('eta must be positive, got %r' % self.eta)

    def __call__(self, m):
        return self.eta

    def to_dict(self):
        return {'eta': self.eta}


def bandwidth(m, k, eta_rule=None):
    '''
    Bandwidth ``h_m(k) = m**(-1 / (2k + 1)) * eta_m**2``.

    Parameters
    ----------
    m : int
        Number of p-values, ``>= 2``.
    k : int
        Smoothness order, ``>= 1``.
    eta_rule : PowerLog or Explicit, optional
        Defaults to ``PowerLog(1/3)``.
    '''
    if m < 2:
        raise ValueError('Bandwidth rules need m >= 2, got %r' % m)
    if int(k) != k or k < 1:
        raise ValueError('Order k must be an integer >= 1, got %r' % k)
    eta_rule = PowerLog() if eta_rule is None else eta_rule
    return m ** (-1. / (2 * k + 1)) * eta_rule(m) ** 2


###########################################################################
# Estimates
@dataclass(frozen=True)
class Pi0Estimate:
    '''
    Attributes
    ----------
    kind : str
        Estimator name.
    value_raw : float
        Unclamped estimate (may exceed 1).
    value : float
        Estimate clamped to ``[1/m, 1]`` for plug-in use.
    bandwidth : float
        Width of the window at 1 (``1 - lambda`` for Storey).
    asymptotic_se : float
        Asymptotic standard error.
    '''
    kind: str
    value_raw: float
    value: float
    bandwidth: float
    asymptotic_se: float

    def to_dict(self):
        return {'kind': self.kind, 'value_raw': self.value_raw,
                'value_clamped': self.value, 'bandwidth': self.bandwidth,
                'asymptotic_se': self.asymptotic_se}


def _check_pvalues(pvalues, min_size=1):
    pvalues = np.asarray(pvalues, dtype=float)
    if pvalues.ndim != 1 or pvalues.size < min_size:
        raise ValueError('Expected a one-dimensional array of at least %d '
                         'p-value(s).' % min_size)
    return pvalues


def _clamp(value, m):
    return float(min(max(value, 1. / m), 1.))


def storey_fixed(pvalues, lam):
    '''
    Storey estimator ``(#{P_i > lambda} / m) / (1 - lambda)``.

    The standard error uses ``G(lambda) (1 - G(lambda)) / (1 - lambda)**2``
    with ``G`` replaced by the empirical cdf.

    Raises
    ------
    ValueError
        If ``lam`` is not in ``(0, 1)``.

    Examples
    --------

    >>> storey_fixed([0.1, 0.2, 0.3, 0.9], 0.5).value_raw
    0.5
    '''
    pvalues = _check_pvalues(pvalues)
    if not 0 < lam < 1:
        raise ValueError('lambda must be in (0, 1), got %r' % lam)
    m = pvalues.size
    above = np.count_nonzero(pvalues > lam) / m
    raw = above / (1 - lam)
    ecdf = 1 - above
    se = math.sqrt(ecdf * (1 - ecdf) / m) / (1 - lam)
    return Pi0Estimate('storey_fixed', float(raw), _clamp(raw, m),
                       float(1 - lam), se)


def storey_bandwidth(pvalues, k, eta_rule=None):
    '''
    Storey estimator at ``lambda = 1 - h_m(k)``.

    The standard error is ``sqrt(pi0_hat / (m h_m))``.

    Raises
    ------
    ValueError
        If ``h_m(k) >= 1``.
    '''
    pvalues = _check_pvalues(pvalues, min_size=2)
    m = pvalues.size
    h = bandwidth(m, k, eta_rule)
    if not h < 1:
        raise ValueError('Bandwidth h_m = %g is not below 1 for m = %d.' %
                         (h, m))
    estimate = storey_fixed(pvalues, 1 - h)
    se = math.sqrt(max(estimate.value_raw, 0) / (m * h))
    return Pi0Estimate('storey_bandwidth', estimate.value_raw, estimate.value,
                       h, se)


@lru_cache(maxsize=None)
def boundary_kernel(order):
    '''
    Polynomial kernel of the given order supported on ``[-1, 0]``.

    The coefficients solve the moment conditions ``int K = 1`` and
    ``int u**j K(u) du = 0`` for ``j = 1, ..., order`` over ``[-1, 0]``.
    Order 0 is the rectangular kernel.

    Returns
    -------
    numpy.polynomial.Polynomial
    '''
    if int(order) != order or order < 0:
        raise ValueError('Kernel order must be a non-negative integer, got '
                         '%r' % order)
    powers = np.add.outer(np.arange(order + 1), np.arange(order + 1))
    # Moments of u**n over [-1, 0] are (-1)**n / (n + 1).
    moments = (-1.) ** powers / (powers + 1)
    target = np.zeros(order + 1)
    target[0] = 1
    return Polynomial(np.linalg.solve(moments, target))


def kernel_roughness(order):
    '''
    ``int K(u)**2 du`` over ``[-1, 0]``.
    '''
    squared = (boundary_kernel(order) ** 2).integ()
    return float(squared(0) - squared(-1))


def kernel_pi0(pvalues, k, eta_rule=None, order=None):
    '''
    Boundary kernel estimate of the p-value density at 1.

    .. math::

        \\hat\\pi_0 = \\frac{1}{m h} \\sum_i K\\left(\\frac{P_i - 1}{h}\\right)

    Parameters
    ----------
    pvalues : array_like
    k : int
        Order of the bandwidth rule ``h_m(k)``.
    eta_rule : PowerLog or Explicit, optional
    order : int, optional
        Kernel order (defaults to ``k``).  Order 0 reproduces
        :func:`storey_bandwidth`.
    '''
    pvalues = _check_pvalues(pvalues, min_size=2)
    m = pvalues.size
    order = k if order is None else order
    h = bandwidth(m, k, eta_rule)
    if not h < 1:
        raise ValueError('Bandwidth h_m = %g is not below 1 for m = %d.' %
                         (h, m))
    window = pvalues[pvalues > 1 - h]
    kernel = boundary_kernel(order)
    raw = float(kernel((window - 1) / h).sum() / (m * h))
    se = math.sqrt(max(raw, 0) * kernel_roughness(order) / (m * h))
    return Pi0Estimate('kernel', raw, _clamp(raw, m), h, se)


###########################################################################
# Estimator specification
@dataclass(frozen=True)
class Pi0Estimator:
    '''
    Specification of a ``pi0`` estimator.

    Parameters
    ----------
    kind : str
        ``'storey_fixed'``, ``'storey_bandwidth'`` or ``'kernel'``.
    lam : float, optional
        Threshold for ``'storey_fixed'``.
    k : int, optional
        Bandwidth rule order for the other kinds.
    eta_rule : PowerLog or Explicit, optional
    order : int, optional
        Kernel order for ``'kernel'`` (defaults to ``k``).
    '''
    kind: str
    lam: float = None
    k: int = None
    eta_rule: object = None
    order: int = None

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError('Unknown estimator `%s`.  Expected one of %s.' %
                             (self.kind, ', '.join(ESTIMATOR_KINDS)))
        if self.kind == 'storey_fixed':
            if self.lam is None or not 0 < self.lam < 1:
                raise ValueError('storey_fixed needs lambda in (0, 1), got %r'
                                 % (self.lam, ))
        elif self.k is None or int(self.k) != self.k or self.k < 1:
            raise ValueError('%s needs an integer order k >= 1, got %r' %
                             (self.kind, self.k))
        if self.eta_rule is None and self.kind != 'storey_fixed':
            object.__setattr__(self, 'eta_rule', PowerLog())

    def bandwidth(self, m):
        '''
        Width of the window at 1 used for ``m`` p-values.
        '''
        if self.kind == 'storey_fixed':
            return 1 - self.lam
        return bandwidth(m, self.k, self.eta_rule)

    def estimate(self, pvalues):
        if self.kind == 'storey_fixed':
            return storey_fixed(pvalues, self.lam)
        elif self.kind == 'storey_bandwidth':
            return storey_bandwidth(pvalues, self.k, self.eta_rule)
        return kernel_pi0(pvalues, self.k, self.eta_rule, self.order)

    def to_dict(self):
        value = {'kind': self.kind}
        if self.kind == 'storey_fixed':
            value['lambda'] = self.lam
            return value
        value['k'] = self.k
        value.update(self.eta_rule.to_dict())
        if self.order is not None:
            value['order'] = self.order
        return value

    @classmethod
    def from_dict(cls, value):
        if 'eta' in value:
            eta_rule = Explicit(value['eta'])
        elif 'eta_exponent' in value:
            eta_rule = PowerLog(value['eta_exponent'])
        else:
            eta_rule = None
        return cls(value['kind'], lam=value.get('lambda'), k=value.get('k'),
                   eta_rule=eta_rule, order=value.get('order'))


###########################################################################
# Bias of density-at-1 estimators
def _is_smooth_at_1(model):
    if model.two_sided or model.pi0 == 1 or model.family.theta == 0:
        return True
    # One-sided Laplace p-values have a flat density on [1/2, 1].
    return model.family.is_laplace


def _reflected_two_sided_density(family, x):
    '''
    ``g1(1 - |x|)`` for two-sided p-values, evaluated in the statistic
    domain: ``(LR(c) + LR(-c)) / 2`` with ``c = F0^{-1}(1/2 + |x|/2)``.
    '''
    c = f0_isf(family, 0.5 * (1 - np.abs(x)))
    return 0.5 * (likelihood_ratio(family, c) + likelihood_ratio(family, -c))


def _central_difference(function, order, step):
    offsets = (0.5 * order - np.arange(order + 1)) * step
    weights = np.array([(-1) ** j * math.comb(order, j)
                        for j in range(order + 1)])
    return float(np.dot(weights, function(offsets)) / step ** order)


def g1_derivative_at_1(model, order):
    '''
    Derivative ``g1^{(order)}(1)`` of the alternative p-value density.

    Two-sided densities are even around 1 after reflection, so odd orders
    vanish; even orders use Richardson-extrapolated central differences of
    the reflected density.

    Raises
    ------
    ValueError
        If ``g1`` is not differentiable at 1 (one-sided Gaussian, Subbotin
        with ``gamma > 1`` and Student models).
    '''
    if int(order) != order or order < 1:
        raise ValueError('Derivative order must be an integer >= 1, got %r'
                         % order)
    if not _is_smooth_at_1(model):
        raise ValueError('The one-sided %s p-value density is not '
                         'differentiable at 1.' % model.family.kind)
    if not model.two_sided or model.family.theta == 0 or order % 2:
        return 0.

    def density(x):
        return _reflected_two_sided_density(model.family, x)

    step = DERIVATIVE_STEP if order <= 2 else 10 * DERIVATIVE_STEP
    coarse = _central_difference(density, order, step)
    fine = _central_difference(density, order, 0.5 * step)
    return (4 * fine - coarse) / 3


def predicted_bias(model, k, h):
    '''
    Leading-order bias of Storey-type estimators at bandwidth ``h``.

    .. math::

        (1 - \\pi_0) \\frac{(-1)^k g_1^{(k)}(1)}{(k + 1)!} h^k

    Raises
    ------
    ValueError
        If ``g1`` is not differentiable at 1 for the model.
    '''
    if model.pi0 == 1:
        return 0.
    derivative = g1_derivative_at_1(model, k)
    return ((1 - model.pi0) * (-1) ** k * derivative / math.factorial(k + 1) *
            h ** k)


def leading_derivative_order(model, max_order=4,
                             tolerance=DERIVATIVE_TOLERANCE):
    '''
    Smallest ``k >= 1`` with ``g1^{(k)}(1) != 0``.

    Returns
    -------
    int or None
        ``None`` if every derivative up to ``max_order`` vanishes.
    '''
    for order in range(1, max_order + 1):
        if abs(g1_derivative_at_1(model, order)) > tolerance:
            return order
    return None


def bias_report(model, k, h, max_order=4):
    '''
    Predicted bias together with the order used and the detected order.
    '''
    return {'k': k, 'detected_order': leading_derivative_order(model,
                                                               max_order),
            'bandwidth': h, 'bias': predicted_bias(model, k, h)}
