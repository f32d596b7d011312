"""Design-matrix utilities: residual-space basis and synthetic designs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .samplers import RngStream


def moran_basis(X, r: int) -> np.ndarray:
    """First r orthonormal basis vectors of the residual space of X.

    These span eigenvalue-one eigenvectors of the residual projector
    I - X (X'X)^{-1} X'.  That eigenspace has no canonical ordering, so
    the basis is taken as a deterministic orthonormal completion: the
    trailing r columns of the reduced QR factorization of [X | G], where
    G is a fixed Gaussian block from a hard-coded seed.  This keeps the
    cost at O(n (p + r)) memory (a full QR would materialize an n x n
    factor) while staying reproducible for a given X.  The result
    satisfies Phi'Phi = I and X'Phi = 0.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d array")
    n, p = X.shape
    if np.linalg.matrix_rank(X) < p:
        raise ValueError("X must have full column rank")
    if not 1 <= r <= n - p:
        raise ValueError(f"need 1 <= r <= n - p = {n - p}")
    G = np.random.default_rng(20200823).standard_normal((n, r))
    Q, R = np.linalg.qr(np.hstack([X, G]))
    d = np.abs(np.diag(R))
    if d.min() <= 1e-10 * d.max():
        raise ValueError("completion block is numerically dependent on X; "
                         "this should not happen for generic X")
    # fix the sign convention so the basis is unique, not just orthonormal
    Phi = Q[:, p:p + r]
    signs = np.sign(np.diag(R)[p:p + r])
    return Phi * signs


@dataclass
class SimDesign:
    """A synthetic dependent-data design with known truth."""

    X: np.ndarray
    Phi: np.ndarray
    Vinv_true: np.ndarray
    beta: np.ndarray
    eta: np.ndarray
    xi: np.ndarray
    p_vec: np.ndarray
    Z_binomial: np.ndarray
    Z_negbinomial: np.ndarray
    t: int

    @property
    def linpred(self) -> np.ndarray:
        return self.X @ self.beta + self.Phi @ self.eta + self.xi


def gen_sim_design(n: int, p: int = 3, r: int = 10, t: int = 10,
                   seed: int = 0) -> SimDesign:
    """Simulated binomial/negative-binomial design with dependent effects.

    Every free element (covariates, coefficients, the subdiagonal of the
    true V^{-1}, the basis-effect innovations, the fine-scale effects) is
    standard normal.  The basis functions are the residual-space basis of
    X, the basis effects are eta = V w, the success probabilities come
    from the logistic map, and both a Binomial(t, p_i) and a negative
    binomial (t successes, success probability 1 - p_i) response are
    drawn from the same linear predictor.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n < p + r:
        raise ValueError("need n >= p + r for the residual-space basis")
    gen = RngStream(seed).gen
    X = gen.standard_normal((n, p))
    Phi = moran_basis(X, r)
    Vinv = np.eye(r)
    for i in range(1, r):
        Vinv[i, :i] = gen.standard_normal(i)
    beta = gen.standard_normal(p)
    w = gen.standard_normal(r)
    eta = np.linalg.solve(Vinv, w)
    xi = gen.standard_normal(n)
    Y = X @ beta + Phi @ eta + xi
    p_vec = special.expit(Y)
    Z_binomial = gen.binomial(t, p_vec).astype(float)
    # success probability of each trial is 1 - p_i = expit(-Y); floor it
    # so extreme linear predictors cannot round it to an invalid 0
    q = np.maximum(special.expit(-Y), 1e-12)
    Z_negbinomial = gen.negative_binomial(t, q).astype(float)
    return SimDesign(X=X, Phi=Phi, Vinv_true=Vinv, beta=beta, eta=eta,
                     xi=xi, p_vec=p_vec, Z_binomial=Z_binomial,
                     Z_negbinomial=Z_negbinomial, t=t)


def gen_count_design(n: int, p: int = 8, r: int = 5, seed: int = 0,
                     signal: float = 0.15):
    """Synthetic Poisson design for fit/predict exercises.

    Returns (X, Phi, Z, mean_truth).  Coefficients are scaled by
    ``signal`` to keep counts in a modest range.
    """
    if n < p + r:
        raise ValueError("need n >= p + r")
    gen = RngStream(seed).gen
    X = gen.standard_normal((n, p))
    Phi = moran_basis(X, r)
    beta = signal * gen.standard_normal(p)
    eta = signal * np.sqrt(n / r) * gen.standard_normal(r)
    Y = X @ beta + Phi @ eta + 0.3 * gen.standard_normal(n)
    lam = np.exp(Y)
    Z = gen.poisson(lam).astype(float)
    return X, Phi, Z, lam
