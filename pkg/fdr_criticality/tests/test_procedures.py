import io
import math

import numpy as np
import pandas as pd
import pytest

from fdr_criticality.distributions import AlternativeFamily
from fdr_criticality.export import render_csv
from fdr_criticality.procedures import (
    account, bh95, plug_in_bh, rejection_frame)
from fdr_criticality.pvalues import MixtureModel, sample_pvalues


def _sup_crossing(pvalues, alpha):
    '''
    Rejection set from the largest ``k`` with at least ``k`` p-values at or
    below ``alpha k / m``.
    '''
    m = len(pvalues)
    for k in range(m, 0, -1):
        threshold = alpha * k / m
        if np.count_nonzero(pvalues <= threshold) >= k:
            return set(np.flatnonzero(pvalues <= threshold).tolist())
    return set()


def test_matches_sup_crossing_definition():
    random_state = np.random.default_rng(2024)
    for _ in range(1000):
        m = int(random_state.integers(1, 201))
        alpha = float(random_state.uniform(0.01, 1))
        pvalues = random_state.beta(0.3, 1, size=m)
        if random_state.random() < 0.3:
            # Ties.
            pvalues = np.round(pvalues, 2)
        outcome = bh95(pvalues, alpha)
        assert set(outcome.rejected.tolist()) == _sup_crossing(pvalues,
                                                               alpha)
        assert outcome.r == len(outcome.rejected)


def test_no_rejection():
    outcome = bh95([0.5, 0.7, 0.9], 0.1)
    assert outcome.i_hat == 0
    assert outcome.tau_hat == 0
    assert outcome.r == 0
    assert outcome.rho == 0


def test_reject_all():
    outcome = bh95([0.0, 0.0, 1.0], 1.)
    assert outcome.i_hat == 3
    assert outcome.rejected.tolist() == [0, 1, 2]


def test_invalid_pvalues():
    for pvalues in ([], [0.1, 1.2], [[0.1, 0.2]], [np.nan]):
        with pytest.raises(ValueError):
            bh95(pvalues, 0.1)
    for alpha in (0, 1.5):
        with pytest.raises(ValueError):
            bh95([0.1], alpha)


def test_plug_in_is_bh_at_scaled_level():
    pvalues = np.random.default_rng(3).beta(0.5, 1, size=100)
    plug_in = plug_in_bh(pvalues, 0.1, 0.5)
    standard = bh95(pvalues, 0.2)
    assert plug_in.alpha == 0.1
    assert plug_in.effective_level == 0.2
    assert np.array_equal(plug_in.rejected, standard.rejected)


def test_plug_in_level_above_one():
    outcome = plug_in_bh([0.2, 0.9], 0.6, 0.5)
    assert outcome.effective_level == 1.
    assert outcome.r == 2
    with pytest.raises(ValueError):
        plug_in_bh([0.2, 0.9], 0.6, 0.5, strict=True)
    for pi0_hat in (0, 1.2):
        with pytest.raises(ValueError):
            plug_in_bh([0.2, 0.9], 0.1, pi0_hat)


def test_account():
    outcome = account(bh95([0.001, 0.002, 0.003, 0.9], 0.1),
                      [True, False, False, True])
    assert outcome.r == 3
    assert outcome.v == 1
    assert outcome.fdp == 1. / 3
    assert outcome.power == 1.
    value = outcome.to_dict()
    assert value['R'] == 3 and value['V'] == 1


def test_account_edge_cases():
    null = account(bh95([0.001, 0.5], 0.1), [True, True])
    assert null.power is None
    assert null.fdp == 1.
    empty = account(bh95([0.5, 0.6], 0.1), [False, True])
    assert empty.fdp == 0.
    assert empty.power == 0.
    with pytest.raises(ValueError):
        account(bh95([0.5, 0.6], 0.1), [True])


def test_rejections_grow_with_level():
    random_state = np.random.default_rng(7)
    alphas = np.linspace(0.01, 1, 60)
    for _ in range(50):
        m = int(random_state.integers(1, 300))
        pvalues = random_state.beta(0.4, 1, size=m)
        counts = [bh95(pvalues, alpha).r for alpha in alphas]
        assert np.all(np.diff(counts) >= 0)


def test_plug_in_contains_standard_rejections():
    random_state = np.random.default_rng(8)
    for _ in range(200):
        pvalues = random_state.beta(0.4, 1, size=150)
        alpha = float(random_state.uniform(0.01, 0.5))
        pi0_hat = float(random_state.uniform(0.05, 1))
        standard = set(bh95(pvalues, alpha).rejected.tolist())
        plug_in = set(plug_in_bh(pvalues, alpha, pi0_hat).rejected.tolist())
        assert standard <= plug_in


def test_rejection_set_ignores_order():
    random_state = np.random.default_rng(9)
    for _ in range(100):
        pvalues = np.round(random_state.beta(0.4, 1, size=120), 3)
        order = random_state.permutation(pvalues.size)
        outcome = bh95(pvalues, 0.2)
        shuffled = bh95(pvalues[order], 0.2)
        assert set(order[shuffled.rejected].tolist()) == \
            set(outcome.rejected.tolist())
        assert shuffled.tau_hat == outcome.tau_hat


def test_fdr_control():
    model = MixtureModel(0.75, AlternativeFamily.gaussian(2))
    B = 2000
    fdp = np.empty(B)
    for b in range(B):
        pvalues, is_null = sample_pvalues(model, 500, 12, stream_keys=(b, ))
        fdp[b] = account(bh95(pvalues, 0.2), is_null).fdp
    se = fdp.std(ddof=1) / math.sqrt(B)
    assert fdp.mean() <= 0.75 * 0.2 + 3 * se


def test_rejection_frame():
    pvalues = [0.01, 0.02, 0.5, 0.03]
    outcome = bh95(pvalues, 0.15)
    frame = rejection_frame(outcome, pvalues)
    text = render_csv(frame)
    assert text.splitlines()[0] == 'index,p_value,rejected'
    parsed = pd.read_csv(io.StringIO(text), float_precision='round_trip')
    assert parsed['index'].tolist() == [0, 1, 2, 3]
    assert parsed['p_value'].tolist() == pvalues
    assert parsed['rejected'].tolist() == [True, True, False, True]
    assert np.flatnonzero(parsed['rejected']).tolist() == \
        outcome.rejected.tolist()
    with pytest.raises(ValueError):
        rejection_frame(outcome, pvalues[:2])
