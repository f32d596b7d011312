"""Convergence diagnostic sanity checks."""

import numpy as np

from cmlatent.diagnostics import ess_basic, split_rhat


def test_split_rhat_iid_near_one():
    g = np.random.default_rng(0)
    x = g.normal(size=4000)
    assert abs(split_rhat(x) - 1.0) < 0.02


def test_split_rhat_trend_detected():
    x = np.linspace(0.0, 10.0, 2000) + \
        np.random.default_rng(1).normal(size=2000) * 0.1
    assert split_rhat(x) > 1.5


def test_split_rhat_degenerate_cases():
    assert np.isnan(split_rhat(np.array([1.0, 2.0])))
    assert split_rhat(np.full(100, 3.0)) == 1.0


def test_ess_iid_near_n():
    g = np.random.default_rng(2)
    x = g.normal(size=5000)
    assert ess_basic(x) > 2500


def test_ess_autocorrelated_much_smaller():
    g = np.random.default_rng(3)
    n = 5000
    x = np.empty(n)
    x[0] = 0.0
    eps = g.normal(size=n)
    for i in range(1, n):
        x[i] = 0.95 * x[i - 1] + eps[i]
    assert ess_basic(x) < 1000


def test_ess_constant_sequence():
    assert ess_basic(np.full(50, 2.0)) <= 50
