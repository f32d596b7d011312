import numpy as np
import pytest
from scipy import stats

from cmlatent.cm import (CMParams, CMcSpec, cm_logpdf, cm_moments, cm_sample,
                         cmc_logpdf_unnorm, cmc_moments, cmc_sample,
                         gaussian_limit)
from cmlatent.dy import dy_logpdf
from cmlatent.partition import PartitionKind as PK
from cmlatent.samplers import RngStream


def _random_params(kind, n, seed, unit_lower=False):
    g = np.random.default_rng(seed)
    mu = g.normal(size=n)
    if unit_lower:
        Vinv = np.tril(g.normal(size=(n, n)), -1) + np.eye(n)
    else:
        Vinv = g.normal(size=(n, n)) + 3 * np.eye(n)
    if kind is PK.LOGIT_BETA:
        alpha = g.uniform(0.5, 3.0, size=n)
        kappa = alpha + g.uniform(0.5, 3.0, size=n)
    elif kind is PK.QUADRATIC:
        alpha = g.normal(size=n)
        kappa = g.uniform(0.3, 2.0, size=n)
    else:
        alpha = g.uniform(0.5, 3.0, size=n)
        kappa = g.uniform(0.5, 3.0, size=n)
    return CMParams(mu=mu, Vinv=Vinv, alpha=alpha, kappa=kappa, kind=kind,
                    unit_lower=unit_lower)


@pytest.mark.parametrize("kind", list(PK))
@pytest.mark.parametrize("unit_lower", [False, True])
def test_logpdf_change_of_variables(kind, unit_lower):
    # density must equal |det Vinv| times the product of univariate
    # densities evaluated at s = Vinv (y - mu)
    params = _random_params(kind, 4, 7, unit_lower=unit_lower)
    rng = RngStream(77)
    for _ in range(10):
        y = cm_sample(params, rng)
        s = params.Vinv @ (y - params.mu)
        expect = np.sum(dy_logpdf(kind, params.alpha, params.kappa, s))
        if not unit_lower:
            expect += np.linalg.slogdet(params.Vinv)[1]
        assert cm_logpdf(params, y) == pytest.approx(expect, abs=1e-10)


def test_quadratic_kind_is_multivariate_normal():
    params = _random_params(PK.QUADRATIC, 5, 3)
    mean, cov = cm_moments(params)
    mvn = stats.multivariate_normal(mean=mean, cov=cov)
    g = np.random.default_rng(0)
    for _ in range(10):
        y = mean + g.normal(size=5)
        assert cm_logpdf(params, y) == pytest.approx(mvn.logpdf(y), abs=1e-8)


@pytest.mark.parametrize("kind", list(PK))
def test_sample_moments_match_cm_moments(kind):
    params = _random_params(kind, 3, 11)
    rng = RngStream(8)
    n = 200000
    draws = cm_sample(params, rng, size=n)
    mean, cov = cm_moments(params)
    se = np.sqrt(np.diag(cov) / n)
    assert np.all(np.abs(draws.mean(axis=0) - mean) < 5 * se)
    emp_cov = np.cov(draws.T)
    assert np.linalg.norm(emp_cov - cov) < 0.03 * np.linalg.norm(cov)


def test_logpdf_outside_support_is_minus_inf():
    params = _random_params(PK.NEG_INV_GAMMA, 3, 2, unit_lower=True)
    # pick y so that the first coordinate of s is positive
    y = params.mu.copy()
    y[0] = params.mu[0] + 1.0
    assert cm_logpdf(params, y) == -np.inf


def test_singular_vinv_rejected():
    with pytest.raises(ValueError):
        CMParams(mu=np.zeros(2), Vinv=np.ones((2, 2)),
                 alpha=np.ones(2), kappa=np.ones(2), kind=PK.LOG_GAMMA)


def _random_cmc(kind, m, r, seed):
    g = np.random.default_rng(seed)
    H = g.normal(size=(m, r))
    mu = g.normal(size=m)
    if kind is PK.LOGIT_BETA:
        alpha = g.uniform(0.5, 3.0, size=m)
        kappa = alpha + g.uniform(0.5, 3.0, size=m)
    elif kind is PK.QUADRATIC:
        alpha = g.normal(size=m)
        kappa = g.uniform(0.3, 2.0, size=m)
    else:
        alpha = g.uniform(0.5, 3.0, size=m)
        kappa = g.uniform(0.5, 3.0, size=m)
    return CMcSpec(mu_star=mu, H=H, alpha=alpha, kappa=kappa, kind=kind)


@pytest.mark.parametrize("kind", [PK.LOG_GAMMA, PK.LOGIT_BETA, PK.QUADRATIC])
@pytest.mark.parametrize("m,r", [(6, 2), (8, 3)])
def test_cmc_sample_moments(kind, m, r, subtests=None):
    spec = _random_cmc(kind, m, r, seed=m * 10 + r)
    rng = RngStream(31)
    n = 200000
    draws = cmc_sample(spec, rng, size=n)
    mean, cov = cmc_moments(spec)
    se = np.sqrt(np.diag(cov) / n)
    assert np.all(np.abs(draws.mean(axis=0) - mean) < 5 * se)
    emp = np.cov(draws.T)
    assert np.linalg.norm(emp - cov) < 0.05 * np.linalg.norm(cov)


def test_cmc_square_h_reduces_to_cm():
    # with invertible square H the projection draw is an exact CM vector
    g = np.random.default_rng(5)
    n = 3
    H = g.normal(size=(n, n)) + 3 * np.eye(n)
    mu = g.normal(size=n)
    alpha = g.uniform(0.5, 2.0, size=n)
    kappa = g.uniform(0.5, 2.0, size=n)
    spec = CMcSpec(mu_star=mu, H=H, alpha=alpha, kappa=kappa,
                   kind=PK.LOG_GAMMA)
    params = CMParams(mu=np.linalg.solve(H, mu), Vinv=H, alpha=alpha,
                      kappa=kappa, kind=PK.LOG_GAMMA)
    m1, c1 = cmc_moments(spec)
    m2, c2 = cm_moments(params)
    np.testing.assert_allclose(m1, m2, atol=1e-10)
    np.testing.assert_allclose(c1, c2, atol=1e-10)
    # kernel differences match the exact density differences
    rng = RngStream(17)
    ya, yb = cm_sample(params, rng), cm_sample(params, rng)
    lhs = cmc_logpdf_unnorm(spec, ya) - cmc_logpdf_unnorm(spec, yb)
    rhs = cm_logpdf(params, ya) - cm_logpdf(params, yb)
    assert lhs == pytest.approx(rhs, abs=1e-9)
    # and the sampled distributions agree
    d1 = cmc_sample(spec, RngStream(19), size=20000)
    d2 = cm_sample(params, RngStream(20), size=20000)
    for j in range(n):
        assert stats.ks_2samp(d1[:, j], d2[:, j]).pvalue > 0.001


def test_cmc_stacked_identity_matches_dense():
    g = np.random.default_rng(9)
    n = 4
    mu = g.normal(size=2 * n)
    alpha = g.uniform(0.5, 2.0, size=2 * n)
    kappa = g.uniform(0.5, 2.0, size=2 * n)
    fast = CMcSpec(mu_star=mu, H=None, alpha=alpha, kappa=kappa,
                   kind=PK.LOG_GAMMA, stacked_identity=True)
    dense = CMcSpec(mu_star=mu, H=np.vstack([np.eye(n), np.eye(n)]),
                    alpha=alpha, kappa=kappa, kind=PK.LOG_GAMMA)
    y = g.normal(size=n)
    assert cmc_logpdf_unnorm(fast, y) == pytest.approx(
        cmc_logpdf_unnorm(dense, y), abs=1e-12)
    m1, c1 = cmc_moments(fast)
    m2, c2 = cmc_moments(dense)
    np.testing.assert_allclose(m1, m2, atol=1e-12)
    np.testing.assert_allclose(c1, c2, atol=1e-12)
    np.testing.assert_allclose(cmc_sample(fast, RngStream(4), size=7),
                               cmc_sample(dense, RngStream(4), size=7),
                               atol=1e-12)


def test_cmc_rank_deficient_rejected():
    H = np.ones((5, 2))
    with pytest.raises(ValueError):
        CMcSpec(mu_star=np.zeros(5), H=H, alpha=np.ones(5),
                kappa=2 * np.ones(5), kind=PK.LOGIT_BETA)


@pytest.mark.parametrize("kind", [PK.LOGIT_BETA, PK.LOG_GAMMA])
def test_gaussian_limit(kind):
    g = np.random.default_rng(21)
    n = 3
    V = np.tril(g.normal(size=(n, n)), -1) + np.diag(g.uniform(0.8, 1.5, n))
    mu = g.normal(size=n)
    params = gaussian_limit(kind, mu, V, 1e4)
    mean, cov = cm_moments(params)
    target = V @ V.T
    assert np.all(np.abs(mean - mu) < 0.05)
    assert np.linalg.norm(cov - target) < 0.05 * np.linalg.norm(target)


def test_gaussian_limit_invalid_kinds():
    V = np.eye(2)
    for kind in (PK.NEG_INV_GAMMA, PK.QUADRATIC):
        with pytest.raises(ValueError):
            gaussian_limit(kind, np.zeros(2), V, 100.0)


def test_unweighted_projection_matches_sandwich_moments():
    # row_weights="none" gives the plain least-squares projection whose
    # moments are P (mu* + k) and P K P' with P = (H'H)^{-1} H'
    from cmlatent.partition import dy_moments
    g = np.random.default_rng(5)
    H = g.standard_normal((6, 2))
    spec = CMcSpec(mu_star=g.standard_normal(6), H=H,
                   alpha=g.uniform(1, 4, 6), kappa=g.uniform(5, 9, 6),
                   kind=PK.LOG_GAMMA, row_weights="none")
    k, K = dy_moments(spec.kind, spec.alpha, spec.kappa)
    P = np.linalg.solve(H.T @ H, H.T)
    mean, cov = cmc_moments(spec)
    assert np.allclose(mean, P @ (spec.mu_star + k), atol=1e-12)
    assert np.allclose(cov, P @ np.diag(K) @ P.T, atol=1e-12)


def test_bad_row_weights_rejected():
    with pytest.raises(ValueError):
        CMcSpec(mu_star=np.zeros(2), H=np.eye(2), alpha=np.ones(2),
                kappa=2 * np.ones(2), kind=PK.LOG_GAMMA,
                row_weights="bogus")
