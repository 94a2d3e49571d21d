import io
import logging
import math

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from fdr_criticality.asymptotics import (
    PREDICTION_COLUMNS, CriticalRegimeError, predict, predict_curve,
    predict_plug_in, predict_tvr_deltas, predictions_frame, t_star)
from fdr_criticality.criticality import critical_value_closed_form, pi0_bar
from fdr_criticality.distributions import AlternativeFamily
from fdr_criticality.export import render_csv
from fdr_criticality.pvalues import MixtureModel, mixture_cdf

LAPLACE = MixtureModel(0.5, AlternativeFamily.laplace(2))
GAUSSIAN = MixtureModel(0.75, AlternativeFamily.gaussian(2))


def test_plug_in_laplace_worked_example():
    reachable = 0.5 + 0.5 * math.exp(-2)
    prediction = predict_plug_in(LAPLACE, 0.45)
    assert_allclose(prediction.pi0_ref, reachable)
    # Crossing on the upper branch G1(t) = 1 - (1 - t) e**-2.
    expected_t = 0.5 * (1 - math.exp(-2)) / (
        reachable / 0.45 - 0.5 - 0.5 * math.exp(-2))
    assert_allclose(prediction.t_star, expected_t, atol=1e-10)
    assert abs(prediction.t_star - 0.6231) < 1e-3
    assert abs(prediction.fdp_limit - 0.3963) < 1e-4
    assert abs(prediction.fdp_scaled_variance - 0.2767) < 1e-4
    assert_allclose(prediction.rho_inf,
                    mixture_cdf(LAPLACE, prediction.t_star))
    assert prediction.metadata['pi0_bar'] == pi0_bar(LAPLACE)


def test_standard_prediction_crossing():
    prediction = predict(GAUSSIAN, 0.2)
    assert prediction.pi0_ref == 1
    assert_allclose(prediction.fdp_limit, 0.15)
    assert 0 < prediction.t_star < 1
    assert_allclose(mixture_cdf(GAUSSIAN, prediction.t_star),
                    prediction.t_star / 0.2, rtol=1e-9)
    assert_allclose(prediction.rho_inf, prediction.t_star / 0.2, rtol=1e-9)
    assert 0 < prediction.pi_inf < 1
    assert_allclose(prediction.pi_inf,
                    (prediction.rho_inf - 0.75 * prediction.t_star) / 0.25,
                    rtol=1e-8)


def test_sub_critical_prediction_is_zero():
    model = MixtureModel(0.75, AlternativeFamily.laplace(2))
    alpha_star = critical_value_closed_form(model)
    for alpha in (0.1, 0.3, alpha_star):
        prediction = predict(model, alpha)
        assert (prediction.t_star, prediction.rho_inf, prediction.pi_inf,
                prediction.fdp_limit) == (0, 0, 0, 0)
    assert predict(model, alpha_star + 0.01).pi_inf > 0


def test_all_alternatives():
    model = MixtureModel(0, AlternativeFamily.gaussian(2))
    prediction = predict(model, 0.1)
    assert prediction.fdp_limit == 0
    assert_allclose(prediction.pi_inf, prediction.rho_inf)


def test_pure_null_prediction():
    model = MixtureModel(1, AlternativeFamily.gaussian(2))
    prediction = predict(model, 0.5)
    assert prediction.t_star == 0
    # alpha = alpha_star = 1 is sub-critical.
    assert t_star(model, 1.) == 0.


def test_t_star_is_monotone_in_alpha():
    values = [t_star(GAUSSIAN, alpha) for alpha in np.linspace(0.05, 0.9, 18)]
    assert np.all(np.diff(values) > 0)


def test_predict_curve():
    alphas = [0.1, 0.2, 0.3]
    curve = predict_curve(GAUSSIAN, alphas)
    assert [p.alpha for p in curve] == alphas
    assert curve[1] == predict(GAUSSIAN, 0.2)


def test_invalid_level():
    for alpha in (0, 1.5):
        with pytest.raises(ValueError):
            predict(GAUSSIAN, alpha)


def test_plug_in_critical_regime():
    with pytest.raises(CriticalRegimeError):
        predict_plug_in(LAPLACE, 0.1)
    with pytest.raises(ValueError):
        predict_tvr_deltas(LAPLACE, 0.1, 0.01)
    with pytest.raises(CriticalRegimeError):
        predict_plug_in(MixtureModel(1, AlternativeFamily.laplace(2)), 0.5)


def test_plug_in_variance_function():
    prediction = predict_plug_in(LAPLACE, 0.45, v_fn=lambda x: 2 * x)
    assert_allclose(prediction.fdp_scaled_variance, 2 * 0.2767, atol=2e-4)


def test_tvr_deltas_match_finite_difference():
    alpha = 0.45
    reachable = pi0_bar(LAPLACE)
    d = 1e-6
    delta_tau, delta_nu, delta_rho = predict_tvr_deltas(LAPLACE, alpha, d)
    moved = t_star(LAPLACE, alpha, reachable + d) - t_star(LAPLACE, alpha,
                                                           reachable)
    assert_allclose(delta_tau, moved, rtol=1e-3)
    assert_allclose(delta_nu, 0.5 * delta_tau)
    assert_allclose(delta_rho, (0.5 + 0.5 * math.exp(-2)) * delta_tau)
    assert delta_tau < 0


def test_bandwidth_condition_warning(caplog):
    with caplog.at_level(logging.WARNING, logger='fdr_criticality'):
        prediction = predict_plug_in(LAPLACE, 0.45, h_m=0.9, m=10 ** 5)
    assert 'h_m ln ln m' in caplog.text
    assert prediction.metadata['bandwidth_condition'] > 1
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger='fdr_criticality'):
        predict_plug_in(LAPLACE, 0.45, h_m=0.01, m=10 ** 5)
    assert not caplog.text


@pytest.mark.parametrize('sided', ['one', 'two'])
def test_threshold_dichotomy(sided):
    model = MixtureModel(0.75, AlternativeFamily.laplace(2), sided)
    alpha_star = critical_value_closed_form(model)
    assert predict(model, alpha_star - 1e-3).t_star == 0
    assert predict(model, alpha_star + 1e-3).t_star > 0
    # Plug-in procedures cross over at pi0_bar * alpha_star.
    reachable = pi0_bar(model)
    below = reachable * alpha_star - 1e-3
    above = reachable * alpha_star + 1e-3
    assert t_star(model, below, reachable) == 0
    assert t_star(model, above, reachable) > 0
    with pytest.raises(CriticalRegimeError):
        predict_plug_in(model, below)
    assert predict_plug_in(model, above).fdp_limit > 0


def test_tvr_deltas_error_shrinks_quadratically():
    alpha = 0.45
    reachable = pi0_bar(LAPLACE)
    errors = []
    for d in (1e-2, 1e-3, 1e-4):
        delta_tau = predict_tvr_deltas(LAPLACE, alpha, d)[0]
        moved = t_star(LAPLACE, alpha, reachable + d) - t_star(LAPLACE, alpha,
                                                               reachable)
        errors.append(abs(moved - delta_tau))
        assert abs(moved - delta_tau) < abs(moved) * 100 * d
    ratios = np.array(errors[1:]) / np.array(errors[:-1])
    # Second-order remainder: a tenfold smaller deviation, a hundredfold
    # smaller error.
    assert np.all((ratios > 0.005) & (ratios < 0.02))


def test_predictions_frame():
    model = MixtureModel(0.75, AlternativeFamily.laplace(2))
    alphas = [0.2, 0.45]
    predictions = predict_curve(model, alphas)
    text = render_csv(predictions_frame(model, predictions))
    assert text.splitlines()[0] == ','.join(PREDICTION_COLUMNS)
    parsed = pd.read_csv(io.StringIO(text), float_precision='round_trip')
    assert parsed[['family', 'sidedness']].values.tolist() == \
        [['laplace', 'one']] * 2
    assert parsed['theta'].tolist() == [2., 2.]
    assert parsed['pi0'].tolist() == [0.75, 0.75]
    assert parsed['alpha'].tolist() == alphas
    for (_, row), prediction in zip(parsed.iterrows(), predictions):
        assert row['t_star'] == prediction.t_star
        assert row['pi_inf'] == prediction.pi_inf
    assert parsed['t_star'].iloc[0] == 0
