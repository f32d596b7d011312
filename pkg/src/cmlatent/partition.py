"""Unit log partition functions and the univariate density they induce.

A natural exponential family on one observation has log density
``z*y - b*psi(y) + c(z)`` where ``psi`` is one of four unit log partition
functions.  The same ``psi`` also defines the conjugate prior kernel

.. math:: f(y; \\alpha, \\kappa) = K(\\alpha, \\kappa)
          \\exp\\{\\alpha y - \\kappa \\psi(y)\\},

whose normalizing constant ``K`` is available in closed form for each of
the four kinds.  This module holds the four ``psi`` functions, their first
two derivatives, the log normalizing constants, the parameter validity
rules, and the closed-form mean/variance of the induced density.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special


class PartitionKind(enum.Enum):
    """The four unit log partition functions."""

    NEG_INV_GAMMA = "neg_inv_gamma"  # psi(y) = log(-1/y), y < 0
    LOGIT_BETA = "logit_beta"        # psi(y) = log(1 + e^y)
    LOG_GAMMA = "log_gamma"          # psi(y) = e^y
    QUADRATIC = "quadratic"          # psi(y) = y^2


@dataclass(frozen=True)
class DYParams:
    """Shape parameters (alpha, kappa) of the conjugate density."""

    alpha: float
    kappa: float


class InvalidParameterError(ValueError):
    """Raised when (alpha, kappa) violate the validity region of a kind."""


def in_support(kind: PartitionKind, y) -> np.ndarray:
    """Elementwise support indicator for the argument of psi."""
    y = np.asarray(y, dtype=float)
    if kind is PartitionKind.NEG_INV_GAMMA:
        return y < 0.0
    return np.isfinite(y)


def psi_eval(kind: PartitionKind, y):
    """Evaluate psi elementwise.

    Raises ValueError if any element lies outside the support (only the
    NEG_INV_GAMMA kind has a restricted support, y < 0).
    """
    y = np.asarray(y, dtype=float)
    if kind is PartitionKind.NEG_INV_GAMMA:
        if np.any(y >= 0.0):
            raise ValueError("psi(y) = log(-1/y) requires y < 0")
        return -np.log(-y)
    if kind is PartitionKind.LOGIT_BETA:
        return np.logaddexp(0.0, y)
    if kind is PartitionKind.LOG_GAMMA:
        return np.exp(y)
    if kind is PartitionKind.QUADRATIC:
        return y * y
    raise TypeError(f"unknown kind: {kind!r}")


def psi_derivs(kind: PartitionKind, y):
    """First and second derivatives of psi, elementwise.

    Returns
    -------
    (psi1, psi2) : tuple of ndarray
    """
    y = np.asarray(y, dtype=float)
    if kind is PartitionKind.NEG_INV_GAMMA:
        if np.any(y >= 0.0):
            raise ValueError("psi derivatives require y < 0 for this kind")
        return -1.0 / y, 1.0 / (y * y)
    if kind is PartitionKind.LOGIT_BETA:
        s = special.expit(y)
        return s, s * (1.0 - s)
    if kind is PartitionKind.LOG_GAMMA:
        e = np.exp(y)
        return e, e
    if kind is PartitionKind.QUADRATIC:
        return 2.0 * y, np.full_like(y, 2.0)
    raise TypeError(f"unknown kind: {kind!r}")


def validate(kind: PartitionKind, alpha, kappa) -> str | None:
    """Check (alpha, kappa) against the validity region of `kind`.

    Accepts scalars or arrays (checked elementwise).  Returns None when
    every pair is valid, otherwise a short description of the first
    violation found.
    """
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    k = np.atleast_1d(np.asarray(kappa, dtype=float))
    a, k = np.broadcast_arrays(a, k)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(k))):
        return "alpha and kappa must be finite"
    if kind is PartitionKind.NEG_INV_GAMMA:
        if np.any(a <= 0.0):
            i = int(np.argmax(a <= 0.0))
            return f"alpha must be > 0 (alpha[{i}] = {a.ravel()[i]:g})"
        if np.any(k <= 0.0):
            i = int(np.argmax(k <= 0.0))
            return f"kappa must be > 0 (kappa[{i}] = {k.ravel()[i]:g})"
        return None
    if kind is PartitionKind.LOGIT_BETA:
        if np.any(a <= 0.0):
            i = int(np.argmax(a <= 0.0))
            return f"alpha must be > 0 (alpha[{i}] = {a.ravel()[i]:g})"
        if np.any(k - a <= 0.0):
            i = int(np.argmax(k - a <= 0.0))
            return (f"kappa must exceed alpha "
                    f"(alpha[{i}] = {a.ravel()[i]:g}, kappa[{i}] = {k.ravel()[i]:g})")
        return None
    if kind is PartitionKind.LOG_GAMMA:
        if np.any(a <= 0.0):
            i = int(np.argmax(a <= 0.0))
            return f"alpha must be > 0 (alpha[{i}] = {a.ravel()[i]:g})"
        if np.any(k <= 0.0):
            i = int(np.argmax(k <= 0.0))
            return f"kappa must be > 0 (kappa[{i}] = {k.ravel()[i]:g})"
        return None
    if kind is PartitionKind.QUADRATIC:
        if np.any(k <= 0.0):
            i = int(np.argmax(k <= 0.0))
            return f"kappa must be > 0 (kappa[{i}] = {k.ravel()[i]:g})"
        return None
    raise TypeError(f"unknown kind: {kind!r}")


def check_params(kind: PartitionKind, alpha, kappa, context: str = "") -> None:
    """Raise InvalidParameterError if (alpha, kappa) are not valid."""
    msg = validate(kind, alpha, kappa)
    if msg is not None:
        prefix = f"{context}: " if context else ""
        raise InvalidParameterError(prefix + msg)


def log_K(kind: PartitionKind, alpha, kappa):
    """Log normalizing constant of exp{alpha*y - kappa*psi(y)}.

    Parameters must already satisfy the validity region; use `validate`
    first if unsure.  Accepts scalars or arrays elementwise.
    """
    a = np.asarray(alpha, dtype=float)
    k = np.asarray(kappa, dtype=float)
    if kind is PartitionKind.NEG_INV_GAMMA:
        return (k + 1.0) * np.log(a) - special.gammaln(k + 1.0)
    if kind is PartitionKind.LOGIT_BETA:
        return special.gammaln(k) - special.gammaln(a) - special.gammaln(k - a)
    if kind is PartitionKind.LOG_GAMMA:
        return a * np.log(k) - special.gammaln(a)
    if kind is PartitionKind.QUADRATIC:
        return 0.5 * (np.log(k) - np.log(np.pi)) - a * a / (4.0 * k)
    raise TypeError(f"unknown kind: {kind!r}")


def dy_moments(kind: PartitionKind, alpha, kappa):
    """Mean and variance of the density K(a,k) exp{a*y - k*psi(y)}.

    Returns
    -------
    (mean, var) : tuple of ndarray (or scalars for scalar input)
    """
    a = np.asarray(alpha, dtype=float)
    k = np.asarray(kappa, dtype=float)
    if kind is PartitionKind.NEG_INV_GAMMA:
        return -(k + 1.0) / a, (k + 1.0) / (a * a)
    if kind is PartitionKind.LOGIT_BETA:
        mean = special.digamma(a) - special.digamma(k - a)
        var = special.polygamma(1, a) + special.polygamma(1, k - a)
        return mean, var
    if kind is PartitionKind.LOG_GAMMA:
        return special.digamma(a) - np.log(k), special.polygamma(1, a)
    if kind is PartitionKind.QUADRATIC:
        return a / (2.0 * k), 1.0 / (2.0 * k) + 0.0 * a
    raise TypeError(f"unknown kind: {kind!r}")
