"""Tests for the basis construction and simulation designs."""

import numpy as np
import pytest

from cmlatent.design import gen_count_design, gen_sim_design, moran_basis


def test_moran_basis_orthonormal_and_orthogonal_to_x():
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(50), rng.standard_normal((50, 3))])
    Phi = moran_basis(X, 12)
    assert Phi.shape == (50, 12)
    assert np.allclose(Phi.T @ Phi, np.eye(12), atol=1e-10)
    assert np.allclose(X.T @ Phi, 0.0, atol=1e-10)


def test_moran_basis_range_errors():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((20, 4))
    with pytest.raises(ValueError):
        moran_basis(X, 17)  # only 16 complement directions exist
    with pytest.raises(ValueError):
        moran_basis(X, 0)
    Xdup = np.column_stack([X[:, 0], X[:, 0]])
    with pytest.raises(ValueError):
        moran_basis(Xdup, 2)  # rank-deficient covariates


def test_gen_sim_design_shapes_and_bounds():
    d = gen_sim_design(30, 3, 10, 10, seed=4)
    assert d.X.shape == (30, 3) and d.Phi.shape == (30, 10)
    assert np.all((d.p_vec > 0) & (d.p_vec < 1))
    assert np.all((d.Z_binomial >= 0) & (d.Z_binomial <= 10))
    assert np.all(d.Z_negbinomial >= 0)
    assert np.allclose(d.linpred, d.X @ d.beta + d.Phi @ d.eta + d.xi)


def test_gen_sim_design_binomial_mean_tracks_probability():
    # with many trials the observed proportions track p_vec
    d = gen_sim_design(200, 3, 10, 1000, seed=9)
    prop = d.Z_binomial / 1000.0
    assert np.mean(np.abs(prop - d.p_vec)) < 0.02


def test_gen_sim_design_reproducible():
    a = gen_sim_design(15, 2, 4, 10, seed=5)
    b = gen_sim_design(15, 2, 4, 10, seed=5)
    assert np.array_equal(a.Z_binomial, b.Z_binomial)
    assert np.array_equal(a.X, b.X)


def test_gen_count_design():
    X, Phi, Z, lam = gen_count_design(100, p=8, r=5, seed=2)
    assert X.shape == (100, 8) and Phi.shape == (100, 5)
    assert np.all(Z >= 0) and np.all(Z == np.round(Z))
    assert np.all(lam > 0)
    assert np.allclose(X.T @ Phi, 0.0, atol=1e-10)
