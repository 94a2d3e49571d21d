import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

from fdr_criticality.distributions import (
    AlternativeFamily, EffectSpec, f0_pdf, f0_quantile, f1_cdf, f1_pdf, hh,
    hh_quad, hh_table, likelihood_ratio, log_hh, lr_limit, subbotin_constant,
    subsample_sizes)

ALL_FAMILIES = [AlternativeFamily.gaussian(2),
                AlternativeFamily.laplace(2),
                AlternativeFamily.subbotin(2, 1.5),
                AlternativeFamily.student(2.5, 36),
                AlternativeFamily.student(1.3, 9)]


def test_subbotin_gamma_2_is_gaussian():
    t = np.linspace(-6, 6, 49)
    assert_allclose(f0_pdf(AlternativeFamily.subbotin(1, 2), t),
                    f0_pdf(AlternativeFamily.gaussian(1), t), rtol=1e-12)
    assert_allclose(f1_pdf(AlternativeFamily.subbotin(1, 2), t),
                    f1_pdf(AlternativeFamily.gaussian(1), t), rtol=1e-12)


def test_subbotin_gamma_1_is_laplace():
    t = np.linspace(-6, 6, 49)
    assert_allclose(f0_pdf(AlternativeFamily.subbotin(1, 1), t),
                    f0_pdf(AlternativeFamily.laplace(1), t), rtol=1e-12)
    assert AlternativeFamily.subbotin(1, 1).is_laplace


@pytest.mark.parametrize('gamma', [1., 1.5, 2., 3.])
def test_subbotin_constant(gamma):
    integral = 2 * integrate.quad(lambda t: math.exp(-t ** gamma / gamma),
                                  0, np.inf, epsrel=1e-12)[0]
    assert_allclose(subbotin_constant(gamma), integral, rtol=1e-9)
    family = AlternativeFamily.subbotin(0, gamma)
    assert_allclose(f0_pdf(family, 0.), 1 / subbotin_constant(gamma),
                    rtol=1e-12)


def test_hh_at_zero():
    assert abs(hh(0, 0.) - math.sqrt(math.pi / 2)) < 1e-12
    assert abs(hh(1, 0.) - 1) < 1e-12
    assert abs(hh(-1, 0.) - 1) < 1e-12


def test_hh_recurrence_matches_quadrature():
    z = np.linspace(-10, 10, 21)
    table = hh_table(50, z)
    assert table.shape == (52, 21)
    for k in range(0, 51):
        expected = np.array([hh_quad(k, z_i) for z_i in z])
        assert_allclose(table[k + 1], expected, rtol=1e-8)


def test_log_hh_vectorized_matches_scalar():
    z = np.array([-3., -0.5, 0., 0.5, 3.])
    values = log_hh(12, z)
    assert values.shape == z.shape
    assert_allclose(values, [log_hh(12, z_i) for z_i in z], rtol=1e-12)
    # Orders above the recurrence limit go through quadrature.
    assert_allclose(log_hh(80, -2.), math.log(hh_quad(80, -2.)), rtol=1e-10)


def test_hh_rejects_large_argument():
    with pytest.raises(ValueError):
        hh(3, 41.)
    with pytest.raises(ValueError):
        hh(-2, 0.)


def test_student_density_integrates_to_one():
    family = AlternativeFamily.student(2.5, 36)
    total = sum(integrate.quad(lambda t: f1_pdf(family, t), a, b,
                               epsabs=1e-13, limit=200)[0]
                for a, b in ((-np.inf, 0), (0, 2.5), (2.5, np.inf)))
    assert abs(total - 1) < 1e-6


def _noncentral_t_density(t, k, theta):
    # T = (Z + theta) / sqrt(V / k) with V ~ chi2(k).
    def integrand(v):
        scale = math.sqrt(v / k)
        return (stats.chi2.pdf(v, k) * stats.norm.pdf(t * scale - theta) *
                scale)

    return integrate.quad(integrand, 0, 20 * k, points=[k], epsabs=0,
                          epsrel=1e-12, limit=400)[0]


def test_student_density_matches_defining_integral():
    k, theta = 36, 2.5
    family = AlternativeFamily.student(theta, k)
    for t in np.linspace(-10, 10, 21):
        assert_allclose(f1_pdf(family, t), _noncentral_t_density(t, k, theta),
                        rtol=1e-7)


def test_student_zero_noncentrality_is_null():
    family = AlternativeFamily.student(0, 9)
    t = np.linspace(-5, 5, 11)
    assert_allclose(f1_pdf(family, t), f0_pdf(family, t), rtol=1e-12)
    assert_allclose(likelihood_ratio(family, t), 1.)


def test_student_cdf_matches_density():
    family = AlternativeFamily.student(2.5, 36)
    integral = integrate.quad(lambda t: f1_pdf(family, t), -1, 3,
                              epsabs=1e-13)[0]
    assert_allclose(f1_cdf(family, 3.) - f1_cdf(family, -1.), integral,
                    rtol=1e-7)


@pytest.mark.parametrize('family', ALL_FAMILIES,
                         ids=lambda f: '%s-%g' % (f.kind, f.theta))
def test_likelihood_ratio_is_non_decreasing(family):
    t = np.linspace(-30, 30, 601)
    ratio = likelihood_ratio(family, t)
    assert np.all(np.diff(ratio) >= -1e-12 * ratio[1:])


def test_lr_limits():
    laplace = AlternativeFamily.laplace(2)
    assert_allclose(lr_limit(laplace, 1), math.exp(2))
    assert_allclose(lr_limit(laplace, -1), math.exp(-2))
    gaussian = AlternativeFamily.gaussian(1)
    assert lr_limit(gaussian, 1) == np.inf
    assert lr_limit(gaussian, -1) == 0
    assert_allclose(likelihood_ratio(gaussian, [-np.inf, np.inf]),
                    [0, np.inf])
    student = AlternativeFamily.student(2.5, 36)
    assert_allclose(lr_limit(student, 1), likelihood_ratio(student, 1e8),
                    rtol=1e-6)
    assert_allclose(lr_limit(student, -1), likelihood_ratio(student, -1e8),
                    rtol=1e-6)
    assert lr_limit(student, -1) < 1 < lr_limit(student, 1) < np.inf
    with pytest.raises(ValueError):
        lr_limit(student, 0)


def test_quantile_domain():
    family = AlternativeFamily.laplace(1)
    assert_allclose(f0_quantile(family, 0.5), 0.)
    for u in (0., 1., -0.1):
        with pytest.raises(ValueError):
            f0_quantile(family, u)


def test_family_validation():
    with pytest.raises(ValueError):
        AlternativeFamily('cauchy', 1)
    with pytest.raises(ValueError):
        AlternativeFamily.gaussian(-1)
    with pytest.raises(ValueError):
        AlternativeFamily('subbotin', 1)
    with pytest.raises(ValueError):
        AlternativeFamily.subbotin(1, 0.5)
    with pytest.raises(ValueError):
        AlternativeFamily.student(1, 0)
    with pytest.raises(ValueError):
        AlternativeFamily('gaussian', 1, k=3)


def test_family_dict_round_trip():
    for family in ALL_FAMILIES:
        assert AlternativeFamily.from_dict(family.to_dict()) == family


def test_effect_spec_full_sample():
    effect = EffectSpec(0.9, 27, 11)
    assert effect.df == 36
    assert abs(effect.theta - 2.5) < 0.02
    assert effect.family() == AlternativeFamily.student(effect.theta, 36)


def test_effect_spec_subsample():
    effect = EffectSpec(0.9, 27, 11).subsample(0.3)
    assert (effect.n_x, effect.n_y) == (8, 3)
    assert effect.df == 9
    assert abs(effect.theta - 1.3) < 0.05
    assert subsample_sizes(27, 11, 0.6) == (16, 6)
    with pytest.raises(ValueError):
        EffectSpec(0.9, 27, 11).subsample(0.1)
    with pytest.raises(ValueError):
        subsample_sizes(27, 11, 0)
