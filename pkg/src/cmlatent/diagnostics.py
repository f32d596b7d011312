"""Convergence diagnostics for a single chain of draws."""

from __future__ import annotations

import numpy as np


def split_rhat(x) -> float:
    """Split-chain potential scale reduction for one scalar's draws.

    The chain is split in half; the statistic compares between-half and
    within-half variance.  Values near 1 indicate the two halves agree.
    Returns NaN for fewer than 4 draws and inf when the within-half
    variance is zero while the halves disagree.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    n = x.shape[0] // 2
    if n < 2:
        return float("nan")
    halves = np.stack([x[:n], x[n:2 * n]])
    means = halves.mean(axis=1)
    b = n * means.var(ddof=1)
    w = halves.var(axis=1, ddof=1).mean()
    if w == 0.0:
        return 1.0 if b == 0.0 else float("inf")
    var_plus = (n - 1) / n * w + b / n
    return float(np.sqrt(var_plus / w))


def ess_basic(x) -> float:
    """Crude effective sample size from initial positive autocorrelations."""
    x = np.asarray(x, dtype=float).reshape(-1)
    n = x.shape[0]
    if n < 4:
        return float(n)
    xc = x - x.mean()
    var = xc @ xc / n
    if var == 0.0:
        return float(n)
    tau = 1.0
    for lag in range(1, n // 2):
        rho = (xc[:-lag] @ xc[lag:]) / (n * var)
        if rho <= 0.0:
            break
        tau += 2.0 * rho
    return float(n / tau)
