import numpy as np
import pytest
from scipy import integrate, special

from cmlatent.partition import (PartitionKind as PK, dy_moments, log_K,
                                psi_derivs, psi_eval, validate)

ALL_KINDS = list(PK)

# representative valid parameter settings per kind
VALID = {
    PK.NEG_INV_GAMMA: [(2.0, 3.0), (0.5, 0.25), (10.0, 1.0), (1e-3, 5.0)],
    PK.LOGIT_BETA: [(1.0, 2.0), (0.5, 3.0), (500.0, 1000.0), (2.5, 2.6)],
    PK.LOG_GAMMA: [(2.5, 1.3), (0.1, 0.1), (500.0, 500.0), (1.0, 10.0)],
    PK.QUADRATIC: [(0.0, 0.5), (0.7, 2.0), (-3.0, 0.1), (500.0, 500.0)],
}


def test_psi_values():
    assert psi_eval(PK.NEG_INV_GAMMA, -2.0) == pytest.approx(np.log(0.5))
    assert psi_eval(PK.LOGIT_BETA, 0.0) == pytest.approx(np.log(2.0))
    assert psi_eval(PK.LOG_GAMMA, 1.5) == pytest.approx(np.exp(1.5))
    assert psi_eval(PK.QUADRATIC, -3.0) == pytest.approx(9.0)


def test_psi_support_violation():
    with pytest.raises(ValueError):
        psi_eval(PK.NEG_INV_GAMMA, 0.5)
    with pytest.raises(ValueError):
        psi_eval(PK.NEG_INV_GAMMA, np.array([-1.0, 0.0]))


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_psi_derivs_match_finite_differences(kind):
    ys = np.array([-2.5, -1.0, -0.3]) if kind is PK.NEG_INV_GAMMA \
        else np.array([-2.0, -0.5, 0.0, 0.7, 2.0])
    h = 1e-6
    d1, d2 = psi_derivs(kind, ys)
    fd1 = (psi_eval(kind, ys + h) - psi_eval(kind, ys - h)) / (2 * h)
    fd2 = (psi_eval(kind, ys + h) - 2 * psi_eval(kind, ys)
           + psi_eval(kind, ys - h)) / h**2
    np.testing.assert_allclose(d1, fd1, rtol=1e-7, atol=1e-7)
    np.testing.assert_allclose(d2, fd2, rtol=1e-3, atol=1e-3)


def test_psi_convexity_at_grid():
    # all four functions are convex: second derivative nonnegative
    for kind in ALL_KINDS:
        ys = np.linspace(-8.0, -0.01, 40) if kind is PK.NEG_INV_GAMMA \
            else np.linspace(-8.0, 8.0, 40)
        _, d2 = psi_derivs(kind, ys)
        assert np.all(d2 >= 0.0)


@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("case", range(4))
def test_log_K_matches_quadrature(kind, case):
    # independent check of the closed-form normalizing constant: integrate
    # exp(alpha*y - kappa*psi(y)) numerically and compare with 1/K
    a, k = VALID[kind][case]
    mean, var = dy_moments(kind, a, k)
    sd = np.sqrt(var)
    lo, hi = mean - 60 * sd, mean + 60 * sd
    if kind is PK.NEG_INV_GAMMA:
        hi = min(hi, -1e-12)
    lk = log_K(kind, a, k)
    val, _ = integrate.quad(
        lambda y: np.exp(lk + a * y - k * psi_eval(kind, y)), lo, hi,
        limit=400, points=[mean - 2 * sd, mean, mean + 2 * sd])
    assert val == pytest.approx(1.0, abs=1e-8)


def test_log_K_frozen_values():
    # hand-checkable special cases
    assert log_K(PK.LOGIT_BETA, 1.0, 2.0) == pytest.approx(0.0)
    assert log_K(PK.QUADRATIC, 0.0, 0.5) == pytest.approx(
        -0.5 * np.log(2 * np.pi))
    assert log_K(PK.LOG_GAMMA, 1.0, 1.0) == pytest.approx(0.0)
    assert log_K(PK.NEG_INV_GAMMA, 1.0, 1.0) == pytest.approx(0.0)


def test_log_K_finite_for_large_parameters():
    for kind in ALL_KINDS:
        for mag in (1e3, 1e6):
            a = mag if kind is not PK.LOGIT_BETA else mag
            k = 2 * mag
            assert np.isfinite(log_K(kind, a, k))


@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("case", range(4))
def test_moments_match_quadrature(kind, case):
    a, k = VALID[kind][case]
    mean, var = dy_moments(kind, a, k)
    sd = np.sqrt(var)
    lo, hi = mean - 60 * sd, mean + 60 * sd
    if kind is PK.NEG_INV_GAMMA:
        hi = min(hi, -1e-12)
    lk = log_K(kind, a, k)

    def f(y, pw):
        return y**pw * np.exp(lk + a * y - k * psi_eval(kind, y))

    m1, _ = integrate.quad(f, lo, hi, args=(1,), limit=400)
    m2, _ = integrate.quad(f, lo, hi, args=(2,), limit=400)
    assert m1 == pytest.approx(mean, abs=1e-7 * max(1, abs(mean)))
    assert m2 - m1**2 == pytest.approx(var, rel=1e-6)


def test_validate_accepts_and_rejects():
    assert validate(PK.LOGIT_BETA, 1.0, 2.0) is None
    msg = validate(PK.LOGIT_BETA, 2.0, 2.0)
    assert msg is not None and "kappa" in msg
    assert validate(PK.LOG_GAMMA, 0.0, 1.0) is not None
    assert validate(PK.NEG_INV_GAMMA, -1.0, 1.0) is not None
    assert validate(PK.QUADRATIC, -5.0, 1.0) is None
    assert validate(PK.QUADRATIC, 0.0, 0.0) is not None
    # elementwise: one bad pair in a vector is reported with its index
    msg = validate(PK.LOG_GAMMA, np.array([1.0, -2.0]), np.array([1.0, 1.0]))
    assert msg is not None and "[1]" in msg


def test_quadratic_variance_broadcasts():
    m, v = dy_moments(PK.QUADRATIC, np.array([0.0, 1.0]), np.array([0.5, 2.0]))
    np.testing.assert_allclose(v, [1.0, 0.25])
    np.testing.assert_allclose(m, [0.0, 0.25])
