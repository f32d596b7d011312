"""The univariate conjugate density induced by a unit log partition function.

For a kind psi and valid shape parameters (alpha, kappa) the density is

.. math:: f(y) = K(\\alpha, \\kappa) \\exp\\{\\alpha y - \\kappa \\psi(y)\\}.

Each kind admits an exact sampling recipe through a standard distribution:

==============  =======================================================
kind            representation
==============  =======================================================
NEG_INV_GAMMA   -W with W ~ Gamma(kappa + 1, rate alpha)
LOGIT_BETA      logit(B) with B ~ Beta(alpha, kappa - alpha)
LOG_GAMMA       log(W) with W ~ Gamma(alpha, rate kappa)
QUADRATIC       Normal(alpha / 2 kappa, variance 1 / 2 kappa)
==============  =======================================================
"""

from __future__ import annotations

import numpy as np

from .partition import (PartitionKind, check_params, in_support, log_K,
                        psi_eval)
from .samplers import RngStream, sample_log_gamma, sample_logit_beta


def dy_sample(kind: PartitionKind, alpha, kappa, rng: RngStream,
              size=None) -> np.ndarray:
    """Exact draws, elementwise over broadcast (alpha, kappa).

    With ``size=m`` and vector parameters of length n the result has shape
    (m, n): m independent draws of the vector.
    """
    check_params(kind, alpha, kappa, context="dy_sample")
    a = np.asarray(alpha, dtype=float)
    k = np.asarray(kappa, dtype=float)
    if kind is PartitionKind.NEG_INV_GAMMA:
        shape = np.broadcast_shapes(a.shape, k.shape)
        if size is not None:
            shape = (int(size),) + shape
        kk = np.broadcast_to(k, shape)
        aa = np.broadcast_to(a, shape)
        w = rng.gen.gamma(kk + 1.0)
        bad = w <= 0.0
        while np.any(bad):
            w[bad] = rng.gen.gamma(kk[bad] + 1.0)
            bad = w <= 0.0
        out = -w / aa
        return float(out) if out.shape == () else out
    if kind is PartitionKind.LOGIT_BETA:
        return sample_logit_beta(a, k - a, rng, size=size)
    if kind is PartitionKind.LOG_GAMMA:
        return sample_log_gamma(a, k, rng, size=size)
    if kind is PartitionKind.QUADRATIC:
        shape = np.broadcast_shapes(a.shape, k.shape)
        if size is not None:
            shape = (int(size),) + shape
        mean = np.broadcast_to(a / (2.0 * k), shape)
        sd = np.broadcast_to(np.sqrt(1.0 / (2.0 * k)), shape)
        out = mean + sd * rng.gen.standard_normal(shape)
        return float(out) if out.shape == () else out
    raise TypeError(f"unknown kind: {kind!r}")


def dy_logpdf(kind: PartitionKind, alpha, kappa, y) -> np.ndarray:
    """Log density, elementwise; -inf outside the support."""
    check_params(kind, alpha, kappa, context="dy_logpdf")
    y = np.asarray(y, dtype=float)
    a = np.asarray(alpha, dtype=float)
    k = np.asarray(kappa, dtype=float)
    ok = in_support(kind, y)
    shape = np.broadcast_shapes(a.shape, k.shape, y.shape)
    out = np.full(shape, -np.inf)
    if np.any(ok):
        ys = np.where(ok, y, -1.0 if kind is PartitionKind.NEG_INV_GAMMA
                      else 0.0)
        val = log_K(kind, a, k) + a * ys - k * psi_eval(kind, ys)
        out = np.where(np.broadcast_to(ok, shape), np.broadcast_to(val, shape),
                       -np.inf)
    if out.shape == ():
        return float(out)
    return out
